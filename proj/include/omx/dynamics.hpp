#pragma once

#include <functional>
#include <string>
#include <vector>

#include "omx/dissipators.hpp"
#include "omx/fock.hpp"

namespace omx {

/// Integration failed (step underflow, singular system, invariant breach).
class SolverError : public Error {
 public:
  using Error::Error;
};

struct SolverConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.5;  // in 1/omega_m
  int hermitize_every = 100;
  double trace_renorm_tol = 1e-9;
  /// Compute StateValidity at every n-th output point (0 disables).
  int check_every = 1;
  bool keep_states = false;
  bool fail_on_invalid = false;

  void validate() const;
};

/// A scalar read out of the state at each output time.
struct Probe {
  std::string name;
  std::function<Complex(const DensityMatrix&)> eval;
};

Probe expectation_probe(std::string name, Operator op);

struct Series {
  std::string name;
  std::vector<Complex> values;
};

struct IntegrationStats {
  long accepted_steps = 0;
  long rejected_steps = 0;
  long rhs_evaluations = 0;
  long trace_renormalizations = 0;
  double max_trace_drift = 0.0;
  double min_step = 0.0;
  double max_step = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Series> observables;
  std::vector<DensityMatrix> states;
  std::vector<StateValidity> validity;  // one per checked output point
  IntegrationStats stats;

  const Series& series(const std::string& name) const;
  /// Worst trace/Hermiticity errors and lowest eigenvalue over all checks.
  StateValidity worst_validity() const;
};

/// Integrates d rho/dt = L rho with an adaptive Dormand-Prince 5(4) scheme
/// on the column-stacked state. Output values come from the method's
/// continuous extension, so the output grid does not constrain the step.
/// `times` must start at 0 and increase strictly.
Trajectory evolve(const Liouvillian& L, const DensityMatrix& rho0,
                  std::span<const double> times, const SolverConfig& cfg,
                  std::span<const Probe> probes);

/// Uniform grid 0, dt, ..., t_end (t_end included when it lands on the grid).
std::vector<double> uniform_grid(double t_end, double dt);

struct SteadyState {
  DensityMatrix rho;
  double residual = 0.0;           // ||L rho||_inf / ||L||_inf
  bool used_inverse_iteration = false;
  double condition_estimate = 0.0;  // rough, from the LU pivots
};

/// Unique stationary state: sparse LU of L with one row replaced by the
/// trace functional; shifted inverse iteration if the LU breaks down.
/// Throws SolverError when the residual exceeds `residual_tol`.
SteadyState steady_state(const Liouvillian& L, double residual_tol = 1e-10);

struct ConvergenceReport {
  std::vector<std::vector<int>> truncations;
  std::vector<double> deviations;  // between consecutive levels
  double max_deviation = 0.0;
  double final_deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string observable;
};

/// Reruns `scenario` at every truncation in `schedule` and compares the
/// returned observable arrays elementwise (max abs difference) between
/// consecutive levels. PASS iff the last deviation is within `tolerance`.
/// Every step must grow the last (mechanical) dimension by >= 25%.
ConvergenceReport convergence_check(
    const std::function<std::vector<double>(const std::vector<int>&)>& scenario,
    const std::string& observable,
    const std::vector<std::vector<int>>& schedule, double tolerance);

}  // namespace omx
