#include "omx/omx.h"

#include <cstdio>
#include <filesystem>
#include <new>
#include <sstream>
#include <string>

#include "omx/experiments.hpp"

struct omx_scenario {
  omx::ScenarioConfig cfg;
  std::string text;
};

struct omx_report {
  bool passed = false;
  std::string text;
};

namespace {

thread_local std::string last_error;

omx_status fail(omx_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
omx_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const omx::ConfigError& e) {
    return fail(OMX_ERR_CONFIG, e.what());
  } catch (const omx::SolverError& e) {
    return fail(OMX_ERR_SOLVER, e.what());
  } catch (const omx::TruncationError& e) {
    return fail(OMX_ERR_SOLVER, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(OMX_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(OMX_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(OMX_ERR_INTERNAL, e.what());
  }
}

omx_status new_scenario(omx::ScenarioConfig cfg, omx_scenario** out) {
  *out = new omx_scenario{std::move(cfg), {}};
  return OMX_OK;
}

}  // namespace

extern "C" {

const char* omx_version(void) { return omx::engine_version(); }

const char* omx_status_string(omx_status status) {
  switch (status) {
    case OMX_OK: return "ok";
    case OMX_FAIL: return "check failed";
    case OMX_ERR_INVALID_ARGUMENT: return "invalid argument";
    case OMX_ERR_CONFIG: return "configuration error";
    case OMX_ERR_IO: return "I/O error";
    case OMX_ERR_SOLVER: return "solver error";
    case OMX_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* omx_last_error(void) { return last_error.c_str(); }

omx_status omx_scenario_from_file(const char* path, omx_scenario** out) {
  if (!path || !out) return fail(OMX_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    if (!std::filesystem::exists(path)) {
      return fail(OMX_ERR_IO, std::string("no such file: ") + path);
    }
    return new_scenario(omx::load_config(path), out);
  });
}

omx_status omx_scenario_from_text(const char* text, omx_scenario** out) {
  if (!text || !out) return fail(OMX_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { return new_scenario(omx::parse_config(text), out); });
}

omx_status omx_preset_count(const char* name, size_t* count) {
  if (!name || !count) return fail(OMX_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *count = omx::preset(name).size();
    return OMX_OK;
  });
}

omx_status omx_scenario_preset(const char* name, size_t index, omx_scenario** out) {
  if (!name || !out) return fail(OMX_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto all = omx::preset(name);
    if (index >= all.size()) {
      return fail(OMX_ERR_INVALID_ARGUMENT, "preset index out of range");
    }
    return new_scenario(std::move(all[index]), out);
  });
}

omx_status omx_scenario_set(omx_scenario* scenario, const char* key,
                            const char* value) {
  if (!scenario || !key || !value) {
    return fail(OMX_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    omx::ScenarioConfig copy = scenario->cfg;
    omx::apply_setting(copy, key, value);
    copy.validate();
    scenario->cfg = std::move(copy);
    return OMX_OK;
  });
}

const char* omx_scenario_text(omx_scenario* scenario) {
  if (!scenario) return "";
  scenario->text = omx::format_config(scenario->cfg);
  return scenario->text.c_str();
}

void omx_scenario_free(omx_scenario* scenario) { delete scenario; }

omx_status omx_run(const omx_scenario* scenario, const char* out_dir,
                   omx_report** report) {
  if (!scenario || !out_dir || !report) {
    return fail(OMX_ERR_INVALID_ARGUMENT, "null argument");
  }
  *report = nullptr;
  return guarded([&] {
    const omx::RunRecord rec = omx::run(scenario->cfg, out_dir);
    *report = new omx_report{rec.passed, rec.summary};
    return rec.passed ? OMX_OK : OMX_FAIL;
  });
}

omx_status omx_converge(const omx_scenario* scenario, omx_report** report) {
  if (!scenario || !report) return fail(OMX_ERR_INVALID_ARGUMENT, "null argument");
  *report = nullptr;
  return guarded([&] {
    const auto reps = omx::converge(scenario->cfg);
    std::ostringstream os;
    bool ok = true;
    char buf[256];
    for (const auto& r : reps) {
      std::snprintf(buf, sizeof buf, "%s  %s: final deviation %.3e (tol %.1e)",
                    r.passed ? "PASS" : "FAIL", r.observable.c_str(),
                    r.final_deviation, r.tolerance);
      os << buf << "  truncations";
      for (const auto& dims : r.truncations) {
        os << " (";
        for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
        os << ")";
      }
      os << '\n';
      ok = ok && r.passed;
    }
    *report = new omx_report{ok, os.str()};
    return ok ? OMX_OK : OMX_FAIL;
  });
}

omx_status omx_validate(omx_report** report) {
  if (!report) return fail(OMX_ERR_INVALID_ARGUMENT, "null argument");
  *report = nullptr;
  return guarded([&] {
    const omx::ValidationReport rep = omx::validate();
    *report = new omx_report{rep.passed(), rep.text()};
    return rep.passed() ? OMX_OK : OMX_FAIL;
  });
}

int omx_report_passed(const omx_report* report) {
  return report && report->passed ? 1 : 0;
}

const char* omx_report_text(const omx_report* report) {
  return report ? report->text.c_str() : "";
}

void omx_report_free(omx_report* report) { delete report; }

}  // extern "C"
