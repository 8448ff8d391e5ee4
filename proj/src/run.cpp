#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "omx/experiments.hpp"
#include "omx/observables.hpp"

namespace omx {

const char* engine_version() { return OMX_VERSION; }

const Column& DataTable::column(const std::string& name) const {
  for (const Column& c : columns) {
    if (c.name == name) return c;
  }
  throw Error("table " + file_stem + " has no column '" + name + "'");
}

std::string nth_tag(double n_th) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", n_th);
  return buf;
}

std::string column_name(const std::string& observable, Equation eq,
                        std::optional<double> n_th) {
  std::string s = observable + "_" + to_string(eq);
  if (n_th) s += "_nth" + nth_tag(*n_th);
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

// Runs fn(0..n-1) on a worker pool; rethrows the lowest-index failure.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(
      n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void merge_validity(StateValidity& into, const StateValidity& v) {
  into.trace_error = std::max(into.trace_error, v.trace_error);
  into.hermiticity_error = std::max(into.hermiticity_error, v.hermiticity_error);
  into.min_eigenvalue = std::min(into.min_eigenvalue, v.min_eigenvalue);
}

enum class Reduce { real, imag, abs };

struct OutputProbe {
  Probe probe;
  Reduce reduce = Reduce::real;
};

double reduce(Complex z, Reduce r) {
  switch (r) {
    case Reduce::imag:
      return z.imag();
    case Reduce::abs:
      return std::abs(z);
    case Reduce::real:
      break;
  }
  return z.real();
}

std::size_t mech_mode(const HilbertSpace& space) { return space.modes() - 1; }

OutputProbe make_output(const std::string& name, const ScenarioConfig& cfg,
                        const HilbertSpace& space) {
  static const std::regex coherence(R"(abs_rho(\d)(\d))");
  std::smatch m;
  const bool single = cfg.model == ModelKind::single;
  if (std::regex_match(name, m, coherence)) {
    if (!single) throw ConfigError(name + " needs the single-cavity model");
    const int n = std::stoi(m[1]);
    const int k = std::stoi(m[2]);
    if (n >= cfg.n_c || k >= cfg.n_c) {
      throw ConfigError(name + ": index outside the cavity truncation");
    }
    const int sc = space.stride(mode::cavity);
    const int sm = space.stride(mech_mode(space));
    const int dm = space.dim(mech_mode(space));
    return {{name,
             [=](const DensityMatrix& rho) {
               Complex acc = 0.0;
               for (int j = 0; j < dm; ++j) {
                 acc += rho.matrix()(n * sc + j * sm, k * sc + j * sm);
               }
               return acc;
             }},
            Reduce::abs};
  }
  if (name == "n_c" && single) {
    return {expectation_probe(name, number(space, mode::cavity)), Reduce::real};
  }
  if (name == "n_c1" && !single) {
    return {expectation_probe(name, number(space, mode::cavity1)), Reduce::real};
  }
  if (name == "n_c2" && !single) {
    return {expectation_probe(name, number(space, mode::cavity2)), Reduce::real};
  }
  if (name == "n_m") {
    return {expectation_probe(name, number(space, mech_mode(space))),
            Reduce::real};
  }
  if (name == "b_re" || name == "b_im") {
    return {expectation_probe(name, annihilation(space, mech_mode(space))),
            name == "b_re" ? Reduce::real : Reduce::imag};
  }
  if (name == "g2" && single) {
    return {{name,
             [](const DensityMatrix& rho) {
               return Complex(g2_zero(rho, mode::cavity), 0.0);
             }},
            Reduce::real};
  }
  if (name == "en" && !single) {
    return {{name,
             [](const DensityMatrix& rho) {
               const std::size_t keep[] = {mode::cavity1, mode::cavity2};
               return Complex(log_negativity(partial_trace(rho, keep)), 0.0);
             }},
            Reduce::real};
  }
  throw ConfigError("unknown output '" + name + "' for the " +
                    to_string(cfg.model) + " model");
}

std::vector<OutputProbe> make_outputs(const ScenarioConfig& cfg,
                                      const HilbertSpace& space) {
  std::vector<OutputProbe> out;
  for (const auto& name : cfg.outputs) out.push_back(make_output(name, cfg, space));
  return out;
}

std::vector<int> dims_of(const HilbertSpace& s) {
  return {s.dims().begin(), s.dims().end()};
}

HilbertSpace make_space(const ScenarioConfig& cfg, int n_m) {
  if (cfg.model == ModelKind::single) return HilbertSpace({cfg.n_c, n_m});
  return HilbertSpace({cfg.n_c, cfg.n_c2, n_m});
}

DensityMatrix initial_density(const ScenarioConfig& cfg,
                              const HilbertSpace& space) {
  const InitialState& init = *cfg.initial_state;
  const std::size_t modes = space.modes();
  auto occ = [&](std::vector<int> cav) {
    cav.resize(modes, 0);
    for (std::size_t m = 0; m < modes; ++m) {
      if (cav[m] < 0 || cav[m] >= space.dim(m)) {
        throw ConfigError("initial state occupation outside the truncation");
      }
    }
    return fock_state(space, cav);
  };
  if (init.kind == "cavity_superposition") {
    if (cfg.model != ModelKind::single) {
      throw ConfigError("cavity_superposition needs the single-cavity model");
    }
    const StateVector psi =
        (occ({init.args[0]}) + occ({init.args[1]})).normalized();
    return DensityMatrix::pure(psi);
  }
  if (init.kind == "cavity_bell") {
    const StateVector psi = (occ({0, 1}) + occ({1, 0})).normalized();
    return DensityMatrix::pure(psi);
  }
  if (init.args.size() != modes && init.args.size() != modes - 1) {
    throw ConfigError("fock initial state needs one occupation per mode");
  }
  return DensityMatrix::pure(occ(init.args));
}

Liouvillian make_generator(const ScenarioConfig& cfg, Equation eq,
                           const HilbertSpace& space,
                           const ThermalEnvironment& env,
                           std::optional<double> beta0 = {}) {
  if (cfg.model == ModelKind::two_cavity) {
    const Operator h = build_two_cavity_hamiltonian(cfg.two, space);
    return eq == Equation::dsme ? dsme_two_cavity_generator(h, cfg.two, env)
                                : sme_two_cavity_generator(h, cfg.two, env);
  }
  OmcParams p = cfg.single;
  if (beta0) p.g0 = *beta0 * p.omega_m;
  std::optional<Operator> h;
  if (cfg.drive) {
    DriveParams d = *cfg.drive;
    if (cfg.detuning_at_polaron_shift) {
      d.Delta0 = p.g0 * p.g0 / p.omega_m;
      d.omega_d.reset();
    }
    h = build_driven_hamiltonian_rotating(p, d, space);
  } else {
    h = build_hamiltonian(p, space);
  }
  return eq == Equation::dsme ? dsme_generator(*h, p, env)
                              : sme_generator(*h, p, env);
}

double omega_m(const ScenarioConfig& cfg) {
  return cfg.model == ModelKind::single ? cfg.single.omega_m : cfg.two.omega_m;
}

struct Job {
  std::size_t nth_index;
  Equation eq;
  std::optional<double> beta0;
};

struct JobOutput {
  std::vector<std::vector<double>> series;  // one per output
  RunInfo info;
};

JobOutput run_time_job(const ScenarioConfig& cfg, const Job& job, int n_m) {
  const double nth = cfg.n_th[job.nth_index];
  const ThermalEnvironment env = thermal_environment(nth);
  const HilbertSpace space = make_space(cfg, n_m);
  const Liouvillian L = make_generator(cfg, job.eq, space, env);
  const DensityMatrix rho0 = initial_density(cfg, space);
  const std::vector<OutputProbe> outs = make_outputs(cfg, space);
  std::vector<Probe> probes;
  for (const auto& o : outs) probes.push_back(o.probe);
  const std::vector<double> grid =
      uniform_grid(cfg.horizon(job.nth_index), cfg.dt_out);
  Trajectory tr;
  try {
    tr = evolve(L, rho0, grid, cfg.solver, probes);
  } catch (const SolverError& e) {
    throw SolverError(cfg.name + " (" + to_string(job.eq) + ", n_th=" +
                      nth_tag(nth) + "): " + e.what());
  }
  JobOutput out;
  for (std::size_t k = 0; k < outs.size(); ++k) {
    std::vector<double> v;
    v.reserve(tr.times.size());
    for (Complex z : tr.observables[k].values) v.push_back(reduce(z, outs[k].reduce));
    out.series.push_back(std::move(v));
  }
  out.info.label = to_string(job.eq) + "_nth" + nth_tag(nth);
  out.info.n_th = nth;
  out.info.kT_over_omega_m = env.kT_over_omega_m;
  out.info.dims.assign(space.dims().begin(), space.dims().end());
  out.info.stats = tr.stats;
  out.info.worst_validity = tr.worst_validity();
  return out;
}

JobOutput run_steady_job(const ScenarioConfig& cfg, const Job& job, int n_m,
                         bool check_validity) {
  const double nth = cfg.n_th[job.nth_index];
  const ThermalEnvironment env = thermal_environment(nth);
  const HilbertSpace space = make_space(cfg, n_m);
  const Liouvillian L = make_generator(cfg, job.eq, space, env, job.beta0);
  SteadyState ss = [&] {
    try {
      return steady_state(L);
    } catch (const SolverError& e) {
      throw SolverError(cfg.name + " (" + to_string(job.eq) + ", n_th=" +
                        nth_tag(nth) + ", beta0=" + nth_tag(*job.beta0) +
                        "): " + e.what());
    }
  }();
  JobOutput out;
  for (const auto& o : make_outputs(cfg, space)) {
    out.series.push_back({reduce(o.probe.eval(ss.rho), o.reduce)});
  }
  char label[96];
  std::snprintf(label, sizeof label, "%s_nth%s_beta0=%.4g",
                to_string(job.eq).c_str(), nth_tag(nth).c_str(), *job.beta0);
  out.info.label = label;
  out.info.n_th = nth;
  out.info.kT_over_omega_m = env.kT_over_omega_m;
  out.info.dims.assign(space.dims().begin(), space.dims().end());
  out.info.steady_state_residual = ss.residual;
  if (check_validity) out.info.worst_validity = ss.rho.validity();
  return out;
}

// Mechanical truncation for a sweep point scaled by `factor` (>= 1).
int scaled_dim(const ScenarioConfig& cfg, std::size_t i,
               std::optional<double> beta0, double factor) {
  return static_cast<int>(std::ceil(cfg.mechanical_dim(i, beta0) * factor - 1e-9));
}

std::vector<Job> sweep_jobs(const ScenarioConfig& cfg, std::size_t i,
                            const std::vector<double>& grid) {
  std::vector<Job> jobs;
  for (double b : grid) {
    for (Equation eq : cfg.equations) jobs.push_back({i, eq, b});
  }
  return jobs;
}

std::vector<std::vector<double>> run_sweep(const ScenarioConfig& cfg, std::size_t i,
                                           const std::vector<double>& grid,
                                           double factor,
                                           std::vector<RunInfo>* infos) {
  const std::vector<Job> jobs = sweep_jobs(cfg, i, grid);
  std::vector<JobOutput> outs(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    outs[j] = run_steady_job(cfg, jobs[j],
                             scaled_dim(cfg, i, jobs[j].beta0, factor),
                             infos != nullptr);
  });
  // series[output * n_eq + eq][point]
  const std::size_t n_eq = cfg.equations.size();
  std::vector<std::vector<double>> series(cfg.outputs.size() * n_eq);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const std::size_t e = j % n_eq;
    for (std::size_t k = 0; k < cfg.outputs.size(); ++k) {
      series[k * n_eq + e].push_back(outs[j].series[k][0]);
    }
    if (infos) infos->push_back(outs[j].info);
  }
  return series;
}

std::vector<std::size_t> interior_maxima(const std::vector<double>& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] > v[i + 1]) out.push_back(i);
  }
  return out;
}

ConvergenceReport converge_time(
    const ScenarioConfig& cfg, std::size_t i,
    const std::vector<std::vector<double>>* cached_first_output) {
  const int base = cfg.mechanical_dim(i);
  std::vector<std::vector<int>> schedule;
  int n_m = base;
  for (int l = 0; l < cfg.convergence_levels; ++l) {
    schedule.push_back(dims_of(make_space(cfg, n_m)));
    n_m = static_cast<int>(std::ceil(n_m * 1.25));
  }
  auto scenario = [&](const std::vector<int>& dims) {
    const int n_m = dims.back();
    std::vector<std::vector<double>> per_eq(cfg.equations.size());
    if (n_m == base && cached_first_output) {
      per_eq = *cached_first_output;
    } else {
      parallel_for(cfg.equations.size(), [&](std::size_t e) {
        per_eq[e] = run_time_job(cfg, {i, cfg.equations[e], {}}, n_m).series[0];
      });
    }
    std::vector<double> all;
    for (const auto& s : per_eq) all.insert(all.end(), s.begin(), s.end());
    return all;
  };
  return convergence_check(scenario, cfg.outputs[0] + "_nth" + nth_tag(cfg.n_th[i]),
                           schedule, cfg.convergence_tol);
}

ConvergenceReport converge_sweep(
    const ScenarioConfig& cfg, std::size_t i,
    const std::vector<std::vector<double>>* cached) {
  const std::vector<double> grid = cfg.sweep->values();
  const double b_max = *std::max_element(grid.begin(), grid.end());
  // Levels are set by the widest point; the others scale by the same ratio.
  const int base = cfg.mechanical_dim(i, b_max);
  std::vector<std::vector<int>> schedule;
  std::vector<double> factors;
  int n_m = base;
  for (int l = 0; l < cfg.convergence_levels; ++l) {
    factors.push_back(static_cast<double>(n_m) / base);
    schedule.push_back(dims_of(make_space(cfg, n_m)));
    n_m = static_cast<int>(std::ceil(n_m * 1.25));
  }
  const std::size_t n_eq = cfg.equations.size();
  auto scenario = [&](const std::vector<int>& dims) {
    std::size_t level = 0;
    while (schedule[level] != dims) ++level;
    std::vector<std::vector<double>> series;
    if (level == 0 && cached) {
      series = *cached;
    } else {
      series = run_sweep(cfg, i, grid, factors[level], nullptr);
    }
    std::vector<double> all;
    for (std::size_t e = 0; e < n_eq; ++e) {
      all.insert(all.end(), series[e].begin(), series[e].end());
    }
    return all;
  };
  return convergence_check(scenario, cfg.outputs[0] + "_nth" + nth_tag(cfg.n_th[i]),
                           schedule, cfg.convergence_tol);
}

void check_outputs(const ScenarioConfig& cfg) {
  const HilbertSpace space = make_space(cfg, 2);
  make_outputs(cfg, space);
}

ScenarioResult simulate_sweep(const ScenarioConfig& cfg) {
  ScenarioResult res;
  const std::vector<double> grid = cfg.sweep->values();
  DataTable table;
  table.file_stem = cfg.name;
  table.columns.push_back({cfg.sweep->parameter, grid});
  const std::size_t n_eq = cfg.equations.size();
  for (std::size_t i = 0; i < cfg.n_th.size(); ++i) {
    const double nth = cfg.n_th[i];
    const auto series = run_sweep(cfg, i, grid, 1.0, &table.runs);
    for (std::size_t k = 0; k < cfg.outputs.size(); ++k) {
      for (std::size_t e = 0; e < n_eq; ++e) {
        table.columns.push_back({column_name(cfg.outputs[k], cfg.equations[e], nth),
                                 series[k * n_eq + e]});
      }
    }
    if (cfg.convergence) {
      std::vector<std::vector<double>> first(series.begin(), series.begin() + n_eq);
      res.convergence.push_back(converge_sweep(cfg, i, &first));
    }
  }

  if (!cfg.expected_peaks.empty()) {
    for (const Column& c : table.columns) {
      if (c.name.rfind("g2_", 0) != 0) continue;
      for (std::size_t idx : interior_maxima(c.values)) {
        const double x = grid[idx];
        double best = std::numeric_limits<double>::infinity();
        for (double p : cfg.expected_peaks) best = std::min(best, std::abs(x - p));
        if (best > 0.03) {
          res.expectations_met = false;
          char buf[160];
          std::snprintf(buf, sizeof buf,
                        "%s: local maximum at %.4g is %.3g from the nearest "
                        "expected peak",
                        c.name.c_str(), x, best);
          res.notes.push_back(buf);
        }
      }
    }
  }
  for (const RunInfo& r : table.runs) merge_validity(res.worst_validity, r.worst_validity);
  res.tables.push_back(std::move(table));
  return res;
}

ScenarioResult simulate_time(const ScenarioConfig& cfg) {
  ScenarioResult res;
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < cfg.n_th.size(); ++i) {
    for (Equation eq : cfg.equations) jobs.push_back({i, eq, {}});
  }
  std::vector<JobOutput> outs(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    outs[j] = run_time_job(cfg, jobs[j], cfg.mechanical_dim(jobs[j].nth_index));
  });

  const double min_sep = cfg.envelope_min_separation > 0.0
                             ? cfg.envelope_min_separation
                             : M_PI / omega_m(cfg);
  const std::size_t n_eq = cfg.equations.size();
  for (std::size_t i = 0; i < cfg.n_th.size(); ++i) {
    const double nth = cfg.n_th[i];
    DataTable table;
    table.file_stem = cfg.name + "_nth" + nth_tag(nth);
    const std::vector<double> grid = uniform_grid(cfg.horizon(i), cfg.dt_out);
    table.columns.push_back({"t", grid});
    std::vector<std::vector<double>> first_output;
    for (std::size_t k = 0; k < cfg.outputs.size(); ++k) {
      for (std::size_t e = 0; e < n_eq; ++e) {
        const JobOutput& o = outs[i * n_eq + e];
        table.columns.push_back({column_name(cfg.outputs[k], cfg.equations[e]),
                                 o.series[k]});
        if (k == 0) first_output.push_back(o.series[k]);
      }
    }
    for (std::size_t e = 0; e < n_eq; ++e) {
      table.runs.push_back(outs[i * n_eq + e].info);
      merge_validity(res.worst_validity, outs[i * n_eq + e].info.worst_validity);
    }

    for (std::size_t c = 1; c < table.columns.size(); ++c) {
      const Column& col = table.columns[c];
      if (col.name.rfind("abs_rho", 0) != 0 && col.name.rfind("en_", 0) != 0) continue;
      const EnvelopeFit fit = envelope_fit(grid, col.values, min_sep);
      res.envelopes.push_back({table.file_stem + ":" + col.name, fit.rate,
                               fit.peak_times.size(), fit.fit_residual, fit.note});
    }

    if (cfg.expect_dsme_equals_sme && cfg.has(Equation::dsme) &&
        cfg.has(Equation::sme)) {
      for (const auto& name : cfg.outputs) {
        const auto& a = table.column(column_name(name, Equation::dsme)).values;
        const auto& b = table.column(column_name(name, Equation::sme)).values;
        double dev = 0.0;
        for (std::size_t t = 0; t < a.size(); ++t) dev = std::max(dev, std::abs(a[t] - b[t]));
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: max |dsme - sme| = %.3e (expected <= 1e-8)",
                      table.file_stem.c_str(), dev);
        res.notes.push_back(buf);
        if (!(dev <= 1e-8)) res.expectations_met = false;
      }
    }

    if (cfg.convergence) {
      res.convergence.push_back(converge_time(cfg, i, &first_output));
    }
    res.tables.push_back(std::move(table));
  }
  return res;
}

nlohmann::json to_json(const StateValidity& v) {
  return {{"trace_error", v.trace_error},
          {"hermiticity_error", v.hermiticity_error},
          {"min_eigenvalue", v.min_eigenvalue},
          {"ok", v.ok()}};
}

nlohmann::json to_json(const ConvergenceReport& r) {
  return {{"observable", r.observable},
          {"truncations", r.truncations},
          {"deviations", r.deviations},
          {"max_deviation", r.max_deviation},
          {"final_deviation", r.final_deviation},
          {"tolerance", r.tolerance},
          {"passed", r.passed}};
}

nlohmann::json to_json(const RunInfo& r) {
  nlohmann::json j = {{"label", r.label},
                      {"n_th", r.n_th},
                      {"kT_over_omega_m", r.kT_over_omega_m},
                      {"dims", r.dims},
                      {"worst_validity", to_json(r.worst_validity)}};
  if (r.stats.accepted_steps > 0) {
    j["integration"] = {{"accepted_steps", r.stats.accepted_steps},
                        {"rejected_steps", r.stats.rejected_steps},
                        {"rhs_evaluations", r.stats.rhs_evaluations},
                        {"trace_renormalizations", r.stats.trace_renormalizations},
                        {"max_trace_drift", r.stats.max_trace_drift},
                        {"min_step", r.stats.min_step},
                        {"max_step", r.stats.max_step}};
  } else {
    j["steady_state_residual"] = r.steady_state_residual;
  }
  return j;
}

nlohmann::json sidecar(const ScenarioConfig& cfg, const ScenarioResult& res,
                       const DataTable& table, const std::string& csv_name) {
  nlohmann::json j;
  j["engine"] = {{"name", "omx"}, {"version", engine_version()}};
  j["scenario"] = cfg.name;
  j["data_file"] = csv_name;
  j["config"] = format_config(cfg);
  nlohmann::json cols = nlohmann::json::array();
  for (const Column& c : table.columns) cols.push_back(c.name);
  j["columns"] = cols;
  j["model"] = to_string(cfg.model);
  nlohmann::json eqs = nlohmann::json::array();
  for (Equation e : cfg.equations) eqs.push_back(to_string(e));
  j["equations"] = eqs;
  nlohmann::json thermal = nlohmann::json::array();
  std::map<double, bool> seen;
  for (const RunInfo& r : table.runs) {
    if (seen.emplace(r.n_th, true).second) {
      thermal.push_back({{"n_th", r.n_th}, {"kT_over_omega_m", r.kT_over_omega_m}});
    }
  }
  j["thermal"] = thermal;
  if (cfg.is_sweep()) {
    j["sweep"] = {{"parameter", cfg.sweep->parameter},
                  {"start", cfg.sweep->start},
                  {"stop", cfg.sweep->stop},
                  {"step", cfg.sweep->step},
                  {"points", cfg.sweep->values().size()}};
  } else {
    j["time_grid"] = {{"t_end", table.columns[0].values.back()},
                      {"dt_out", cfg.dt_out},
                      {"points", table.columns[0].values.size()}};
  }
  j["solver"] = {{"rel_tol", cfg.solver.rel_tol},
                 {"abs_tol", cfg.solver.abs_tol},
                 {"max_step", cfg.solver.max_step},
                 {"hermitize_every", cfg.solver.hermitize_every},
                 {"trace_renorm_tol", cfg.solver.trace_renorm_tol},
                 {"check_every", cfg.solver.check_every}};
  nlohmann::json truncations = nlohmann::json::array();
  nlohmann::json runs = nlohmann::json::array();
  for (const RunInfo& r : table.runs) {
    truncations.push_back({{"run", r.label}, {"dims", r.dims}});
    runs.push_back(to_json(r));
  }
  j["truncations"] = truncations;
  j["runs"] = runs;
  nlohmann::json conv = nlohmann::json::array();
  for (const auto& c : res.convergence) conv.push_back(to_json(c));
  j["convergence"] = conv;
  nlohmann::json env = nlohmann::json::array();
  for (const auto& e : res.envelopes) {
    if (e.column.rfind(table.file_stem + ":", 0) != 0) continue;
    nlohmann::json x = {{"column", e.column.substr(table.file_stem.size() + 1)},
                        {"peaks", e.peaks},
                        {"fit_residual", e.fit_residual}};
    x["rate"] = e.rate ? nlohmann::json(*e.rate) : nlohmann::json(nullptr);
    if (!e.note.empty()) x["note"] = e.note;
    env.push_back(x);
  }
  j["envelopes"] = env;
  j["notes"] = res.notes;
  j["expectations_met"] = res.expectations_met;
  j["wall_seconds"] = res.wall_seconds;
  return j;
}

}  // namespace

ScenarioResult simulate(const ScenarioConfig& cfg) {
  cfg.validate();
  check_outputs(cfg);
  const auto start = Clock::now();
  ScenarioResult res = cfg.is_sweep() ? simulate_sweep(cfg) : simulate_time(cfg);
  res.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return res;
}

std::vector<ConvergenceReport> converge(const ScenarioConfig& cfg) {
  cfg.validate();
  check_outputs(cfg);
  std::vector<ConvergenceReport> out;
  for (std::size_t i = 0; i < cfg.n_th.size(); ++i) {
    out.push_back(cfg.is_sweep() ? converge_sweep(cfg, i, nullptr)
                                 : converge_time(cfg, i, nullptr));
  }
  return out;
}

std::filesystem::path write_csv(const DataTable& table,
                                const std::filesystem::path& out_dir) {
  if (table.columns.empty()) throw Error("write_csv: table has no columns");
  const std::size_t rows = table.columns[0].values.size();
  for (const Column& c : table.columns) {
    if (c.values.size() != rows) {
      throw Error("write_csv: column " + c.name + " has the wrong length");
    }
  }
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / (table.file_stem + ".csv");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    f << (c ? "," : "") << table.columns[c].name;
  }
  f << '\n';
  char buf[40];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.16e", table.columns[c].values[r]);
      if (c) f << ',';
      f << buf;
    }
    f << '\n';
  }
  if (!f) throw Error("write failed for " + path.string());
  return path;
}

RunRecord run(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  RunRecord rec;
  rec.config_snapshot = format_config(cfg);
  rec.engine_version = engine_version();
  rec.result = simulate(cfg);
  const ScenarioResult& res = rec.result;
  rec.wall_seconds = res.wall_seconds;
  rec.convergence = res.convergence;

  for (const DataTable& table : res.tables) {
    const auto csv = write_csv(table, out_dir);
    const auto meta = out_dir / (table.file_stem + ".json");
    std::ofstream f(meta);
    if (!f) throw Error("cannot write " + meta.string());
    f << sidecar(cfg, res, table, csv.filename().string()).dump(2) << '\n';
    if (!f) throw Error("write failed for " + meta.string());
    rec.output_files.push_back(csv);
    rec.output_files.push_back(meta);
  }

  std::ostringstream s;
  bool ok = res.expectations_met;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: %zu table(s), %.1f s\n", cfg.name.c_str(),
                res.tables.size(), res.wall_seconds);
  s << buf;
  const StateValidity& v = res.worst_validity;
  std::snprintf(buf, sizeof buf,
                "  state validity: trace %.2e, hermiticity %.2e, min eigenvalue "
                "%.2e  %s\n",
                v.trace_error, v.hermiticity_error, v.min_eigenvalue,
                v.ok() ? "ok" : "FAIL");
  s << buf;
  ok = ok && v.ok();
  for (const auto& e : res.envelopes) {
    if (e.rate) {
      std::snprintf(buf, sizeof buf, "  envelope %s: rate %.6g (%zu peaks)\n",
                    e.column.c_str(), *e.rate, e.peaks);
    } else {
      std::snprintf(buf, sizeof buf, "  envelope %s: %s\n", e.column.c_str(),
                    e.note.c_str());
    }
    s << buf;
  }
  for (const auto& c : res.convergence) {
    std::snprintf(buf, sizeof buf,
                  "  convergence %s: final deviation %.3e (tol %.1e)  %s\n",
                  c.observable.c_str(), c.final_deviation, c.tolerance,
                  c.passed ? "PASS" : "FAIL");
    s << buf;
    ok = ok && c.passed;
  }
  for (const auto& n : res.notes) s << "  " << n << '\n';
  for (const auto& p : rec.output_files) s << "  wrote " << p.string() << '\n';
  rec.passed = ok;
  rec.summary = s.str();
  return rec;
}

}  // namespace omx
