#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "omx/omx.h"

namespace {

struct ScenarioDeleter {
  void operator()(omx_scenario* s) const { omx_scenario_free(s); }
};
struct ReportDeleter {
  void operator()(omx_report* r) const { omx_report_free(r); }
};
using Scenario = std::unique_ptr<omx_scenario, ScenarioDeleter>;
using Report = std::unique_ptr<omx_report, ReportDeleter>;

int report_error(omx_status s, const std::string& context) {
  std::fprintf(stderr, "omx: %s: %s: %s\n", context.c_str(), omx_status_string(s),
               omx_last_error());
  return 1;
}

// Prints the report (if any) and maps the status to the process exit code.
int finish(omx_status s, omx_report* raw, const std::string& context) {
  Report report(raw);
  if (report) std::fputs(omx_report_text(report.get()), stdout);
  if (s == OMX_OK) return 0;
  if (s == OMX_FAIL) {
    std::fprintf(stderr, "omx: %s: FAIL\n", context.c_str());
    return 1;
  }
  return report_error(s, context);
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct FigureOptions {
  std::optional<double> nth;
  std::optional<int> nm;
  std::string out = "out";
  std::optional<double> sweep_step;
};

int run_figure(const std::string& name, const FigureOptions& opt) {
  size_t count = 0;
  omx_status s = omx_preset_count(name.c_str(), &count);
  if (s != OMX_OK) return report_error(s, name);
  if (opt.sweep_step && name != "fig3") {
    std::fprintf(stderr, "omx: --sweep-step only applies to fig3\n");
    return 1;
  }
  int exit_code = 0;
  for (size_t i = 0; i < count; ++i) {
    omx_scenario* raw = nullptr;
    s = omx_scenario_preset(name.c_str(), i, &raw);
    if (s != OMX_OK) return report_error(s, name);
    Scenario sc(raw);
    auto set = [&](const char* key, const std::string& value) {
      const omx_status st = omx_scenario_set(sc.get(), key, value.c_str());
      if (st != OMX_OK) report_error(st, std::string("--") + key);
      return st == OMX_OK;
    };
    if (opt.nth && !set("n_th", "[" + number(*opt.nth) + "]")) return 1;
    if (opt.nm && !set("n_m", "[" + std::to_string(*opt.nm) + "]")) return 1;
    if (opt.sweep_step && !set("sweep_step", number(*opt.sweep_step))) return 1;
    omx_report* report = nullptr;
    s = omx_run(sc.get(), opt.out.c_str(), &report);
    if (finish(s, report, name) != 0) exit_code = 1;
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dressed-state vs standard master equation simulator for "
               "ultrastrong optomechanics"};
  app.set_version_flag("--version", std::string("omx ") + omx_version());
  app.require_subcommand(1);

  auto* validate = app.add_subcommand("validate", "Run the analytical oracle suite");

  std::string config_path;
  std::string run_out = "out";
  auto* run = app.add_subcommand("run", "Simulate a scenario from a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--out", run_out, "Output directory")->capture_default_str();

  std::string converge_path;
  auto* converge =
      app.add_subcommand("converge", "Mechanical-truncation convergence check");
  converge->add_option("config", converge_path, "Config file")->required();

  std::string preset_name;
  auto* show = app.add_subcommand("preset", "Print a figure preset as config text");
  show->add_option("name", preset_name,
                   "fig2, fig3, fig4, fig4_equal or fig4_unequal")
      ->required();

  FigureOptions fig;
  std::vector<CLI::App*> figures;
  for (const char* name : {"fig2", "fig3", "fig4"}) {
    auto* sub = app.add_subcommand(name, std::string("Reproduce ") + name);
    sub->add_option("--nth", fig.nth, "Single thermal occupation to run");
    sub->add_option("--nm", fig.nm, "Mechanical truncation")
        ->check(CLI::Range(2, 100000));
    sub->add_option("--out", fig.out, "Output directory")->capture_default_str();
    sub->add_option("--sweep-step", fig.sweep_step, "beta0 grid step (fig3)")
        ->check(CLI::PositiveNumber);
    figures.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  if (*validate) {
    omx_report* report = nullptr;
    const omx_status s = omx_validate(&report);
    return finish(s, report, "validate");
  }
  if (*run || *converge) {
    const std::string& path = *run ? config_path : converge_path;
    omx_scenario* raw = nullptr;
    omx_status s = omx_scenario_from_file(path.c_str(), &raw);
    if (s != OMX_OK) return report_error(s, path);
    Scenario sc(raw);
    omx_report* report = nullptr;
    s = *run ? omx_run(sc.get(), run_out.c_str(), &report)
             : omx_converge(sc.get(), &report);
    return finish(s, report, path);
  }
  if (*show) {
    size_t count = 0;
    omx_status s = omx_preset_count(preset_name.c_str(), &count);
    if (s != OMX_OK) return report_error(s, preset_name);
    for (size_t i = 0; i < count; ++i) {
      omx_scenario* raw = nullptr;
      s = omx_scenario_preset(preset_name.c_str(), i, &raw);
      if (s != OMX_OK) return report_error(s, preset_name);
      Scenario sc(raw);
      if (i) std::fputs("\n", stdout);
      std::fputs(omx_scenario_text(sc.get()), stdout);
    }
    return 0;
  }
  for (auto* sub : figures) {
    if (*sub) return run_figure(sub->get_name(), fig);
  }
  return 1;
}
