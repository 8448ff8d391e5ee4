#include "omx/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "sparse_lu.hpp"

namespace omx {

namespace {

using RowMajorSparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

// Dormand-Prince 5(4) tableau. Row 6 of kA is the 5th-order solution.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
     -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// Difference between the 5th- and embedded 4th-order weights.
constexpr std::array<double, 7> kE = {-71.0 / 57600,  0.0,   71.0 / 16695,
                                      -71.0 / 1920,   17253.0 / 339200,
                                      -22.0 / 525,    1.0 / 40};
// Continuous extension: y(t + th h) = y + h sum_i k_i sum_p P[i][p] th^(p+1).
constexpr double kP[7][4] = {
    {1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608,
     -12715105075.0 / 11282082432},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933,
     87487479700.0 / 32700410799},
    {0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304,
     -10690763975.0 / 1880347072},
    {0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408,
     701980252875.0 / 199316789632},
    {0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883,
     -1453857185.0 / 822651844},
    {0.0, 40617522.0 / 29380423, -110615467.0 / 29380423,
     69997945.0 / 29380423},
};

double max_abs(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Max-norm of the scaled error. The max norm keeps step selection
// independent of components that stay exactly zero.
double error_norm(const Vector& err, const Vector& y0, const Vector& y1,
                  double atol, double rtol) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale =
        atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    worst = std::max(worst, std::abs(err[i]) / scale);
  }
  return worst;
}

Complex trace_of(const Vector& y, int d) {
  Complex t = 0.0;
  for (int i = 0; i < d; ++i) t += y[static_cast<Eigen::Index>(i) * (d + 1)];
  return t;
}

void hermitize(Vector& y, int d) {
  Eigen::Map<DenseMatrix> m(y.data(), d, d);
  const DenseMatrix h = 0.5 * (m + m.adjoint());
  m = h;
}

double infinity_norm(const SparseMatrix& a) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(a.rows());
  for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
      rows[it.row()] += std::abs(it.value());
    }
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw Error("solver tolerances must be positive");
  }
  if (!(max_step > 0.0)) throw Error("max_step must be positive");
  if (hermitize_every < 0) throw Error("hermitize_every must be >= 0");
  if (!(trace_renorm_tol > 0.0)) throw Error("trace_renorm_tol must be positive");
  if (check_every < 0) throw Error("check_every must be >= 0");
}

Probe expectation_probe(std::string name, Operator op) {
  return Probe{std::move(name), [op = std::move(op)](const DensityMatrix& rho) {
                 return expectation(op, rho);
               }};
}

const Series& Trajectory::series(const std::string& name) const {
  for (const Series& s : observables) {
    if (s.name == name) return s;
  }
  throw Error("trajectory has no observable named '" + name + "'");
}

StateValidity Trajectory::worst_validity() const {
  StateValidity w;
  w.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const StateValidity& v : validity) {
    w.trace_error = std::max(w.trace_error, v.trace_error);
    w.hermiticity_error = std::max(w.hermiticity_error, v.hermiticity_error);
    w.min_eigenvalue = std::min(w.min_eigenvalue, v.min_eigenvalue);
  }
  if (validity.empty()) w.min_eigenvalue = 0.0;
  return w;
}

std::vector<double> uniform_grid(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw Error("bad time grid");
  const auto n = static_cast<long>(std::floor(t_end / dt + 1e-9));
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = i * dt;
  return t;
}

Trajectory evolve(const Liouvillian& L, const DensityMatrix& rho0,
                  std::span<const double> times, const SolverConfig& cfg,
                  std::span<const Probe> probes) {
  cfg.validate();
  if (!(rho0.space() == L.space())) {
    throw DimensionError("initial state and Liouvillian spaces differ");
  }
  if (times.empty() || times.front() != 0.0) {
    throw Error("output grid must start at t = 0");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw Error("output grid must be strictly increasing");
    }
  }

  const HilbertSpace& space = L.space();
  const int d = space.total_dim();
  const RowMajorSparse op = L.matrix();
  Trajectory traj;
  traj.times.assign(times.begin(), times.end());
  for (const Probe& p : probes) traj.observables.push_back({p.name, {}});

  long check_counter = 0;
  auto record = [&](const Vector& y, double t_out) {
    const DensityMatrix rho(space, unvectorize(y, d));
    for (std::size_t i = 0; i < probes.size(); ++i) {
      traj.observables[i].values.push_back(probes[i].eval(rho));
    }
    if (cfg.check_every > 0 && check_counter++ % cfg.check_every == 0) {
      const StateValidity v = rho.validity();
      traj.validity.push_back(v);
      if (cfg.fail_on_invalid && !v.ok()) {
        throw SolverError("state left the physical set at t = " +
                          std::to_string(t_out));
      }
    }
    if (cfg.keep_states) traj.states.push_back(rho);
  };

  Vector y = vectorize(rho0.matrix());
  std::array<Vector, 7> k;
  for (Vector& ki : k) ki.resize(y.size());
  Vector stage(y.size());
  Vector y_new(y.size());

  auto rhs = [&](const Vector& in, Vector& out) {
    out.noalias() = op * in;
    ++traj.stats.rhs_evaluations;
  };

  record(y, 0.0);
  if (times.size() == 1) return traj;

  const double t_final = times.back();
  rhs(y, k[0]);

  // Initial step: Hairer & Wanner's heuristic.
  double h;
  {
    const double d0 = max_abs(y) / cfg.abs_tol;
    const double d1 = max_abs(k[0]) / cfg.abs_tol;
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, cfg.max_step);
    stage = y + h0 * k[0];
    rhs(stage, k[1]);
    const double d2 = max_abs(k[1] - k[0]) / cfg.abs_tol / h0;
    const double h1 = std::max(d1, d2) <= 1e-15
                          ? std::max(1e-6, h0 * 1e-3)
                          : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    h = std::min({100 * h0, h1, cfg.max_step, t_final});
  }

  double t = 0.0;
  std::size_t next_out = 1;
  long since_hermitize = 0;
  traj.stats.min_step = std::numeric_limits<double>::infinity();
  bool last_rejected = false;

  while (next_out < times.size()) {
    if (h < 1e-12 * std::max(1.0, std::abs(t))) {
      throw SolverError("step size underflow at t = " + std::to_string(t) +
                        " (problem may be stiff)");
    }
    h = std::min(h, cfg.max_step);
    if (t + h > t_final) h = t_final - t;

    for (int s = 1; s < 7; ++s) {
      stage = y;
      for (int j = 0; j < s; ++j) {
        if (kA[s][j] != 0.0) stage.noalias() += (h * kA[s][j]) * k[j];
      }
      if (s == 6) {
        y_new = stage;
        rhs(y_new, k[6]);
      } else {
        rhs(stage, k[s]);
      }
    }

    Vector err = Vector::Zero(y.size());
    for (int j = 0; j < 7; ++j) {
      if (kE[j] != 0.0) err.noalias() += (h * kE[j]) * k[j];
    }
    const double en = error_norm(err, y, y_new, cfg.abs_tol, cfg.rel_tol);

    if (en > 1.0 || !std::isfinite(en)) {
      ++traj.stats.rejected_steps;
      const double fac =
          std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
      h *= last_rejected ? std::min(fac, 0.5) : fac;
      last_rejected = true;
      continue;
    }

    // Accepted: emit outputs in (t, t + h] from the continuous extension.
    const double t_new = t + h;
    while (next_out < times.size() &&
           times[next_out] <= t_new * (1.0 + 1e-14)) {
      const double theta = (times[next_out] - t) / h;
      std::array<double, 4> powers = {theta, theta * theta,
                                      theta * theta * theta,
                                      theta * theta * theta * theta};
      Vector yo = y;
      for (int j = 0; j < 7; ++j) {
        double w = 0.0;
        for (int p = 0; p < 4; ++p) w += kP[j][p] * powers[p];
        if (w != 0.0) yo.noalias() += (h * w) * k[j];
      }
      record(yo, times[next_out]);
      ++next_out;
    }

    ++traj.stats.accepted_steps;
    traj.stats.min_step = std::min(traj.stats.min_step, h);
    traj.stats.max_step = std::max(traj.stats.max_step, h);
    t = t_new;
    y.swap(y_new);
    k[0] = k[6];

    bool modified = false;
    if (cfg.hermitize_every > 0 && ++since_hermitize >= cfg.hermitize_every) {
      hermitize(y, d);
      since_hermitize = 0;
      modified = true;
    }
    const Complex tr = trace_of(y, d);
    const double drift = std::abs(tr - Complex(1.0, 0.0));
    traj.stats.max_trace_drift = std::max(traj.stats.max_trace_drift, drift);
    if (drift > cfg.trace_renorm_tol) {
      y /= tr.real();
      ++traj.stats.trace_renormalizations;
      modified = true;
    }
    if (modified) rhs(y, k[0]);

    const double fac = en == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(en, -0.2));
    h *= last_rejected ? std::min(1.0, fac) : fac;
    last_rejected = false;
  }
  if (!std::isfinite(traj.stats.min_step)) traj.stats.min_step = 0.0;
  return traj;
}

SteadyState steady_state(const Liouvillian& L, double residual_tol) {
  const int d = L.space().total_dim();
  const SparseMatrix& l = L.matrix();
  const Eigen::Index n = l.rows();
  const double lnorm = infinity_norm(l);

  // Row 0 (the d rho_00/dt equation) becomes Tr rho = 1.
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<std::size_t>(l.nonZeros()) + d);
  for (Eigen::Index j = 0; j < l.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(l, j); it; ++it) {
      if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int i = 0; i < d; ++i) {
    trip.emplace_back(0, static_cast<Eigen::Index>(i) * (d + 1), 1.0);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());

  SteadyState out{DensityMatrix(L.space(), DenseMatrix::Zero(d, d))};
  Vector x;
  {
    detail::SparseLU lu(a);
    out.condition_estimate = lu.rcond() > 0.0 ? 1.0 / lu.rcond()
                                              : std::numeric_limits<double>::infinity();
    if (lu.ok() && lu.rcond() > 1e-14) {
      Vector rhs = Vector::Zero(n);
      rhs[0] = 1.0;
      x = lu.solve(rhs);
    }
  }

  if (x.size() == 0 || !x.allFinite()) {
    // Shifted inverse iteration towards the eigenvalue closest to zero.
    out.used_inverse_iteration = true;
    const double shift = 1e-9 * std::max(lnorm, 1.0);
    SparseMatrix shifted = l;
    for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift;
    detail::SparseLU lu(shifted);
    if (!lu.ok()) {
      throw SolverError("steady state: LU of shifted Liouvillian failed (status " +
                        std::to_string(lu.status()) + ")");
    }
    x = Vector::Zero(n);
    for (int i = 0; i < d; ++i) x[static_cast<Eigen::Index>(i) * (d + 1)] = 1.0 / d;
    for (int it = 0; it < 50; ++it) {
      Vector next = lu.solve(x);
      next /= next.norm();
      const double change = std::min((next - x).norm(), (next + x).norm());
      x = std::move(next);
      if (change < 1e-14) break;
    }
  }

  DenseMatrix rho = unvectorize(x, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const Complex tr = rho.trace();
  if (std::abs(tr) == 0.0) throw SolverError("steady state has zero trace");
  rho /= tr;

  const Vector r = l * vectorize(rho);
  out.residual = lnorm > 0.0 ? max_abs(r) / lnorm : max_abs(r);
  out.rho = DensityMatrix(L.space(), std::move(rho));
  if (!(out.residual <= residual_tol)) {
    throw SolverError("steady state residual " + std::to_string(out.residual) +
                      " exceeds " + std::to_string(residual_tol) +
                      " (condition estimate " +
                      std::to_string(out.condition_estimate) +
                      "); stationary state may not be unique");
  }
  return out;
}

ConvergenceReport convergence_check(
    const std::function<std::vector<double>(const std::vector<int>&)>& scenario,
    const std::string& observable,
    const std::vector<std::vector<int>>& schedule, double tolerance) {
  if (schedule.size() < 2) {
    throw Error("convergence_check needs at least two truncation levels");
  }
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i].size() != schedule[0].size() || schedule[i].empty()) {
      throw Error("convergence schedule levels must have equal mode counts");
    }
    const double prev = schedule[i - 1].back();
    if (schedule[i].back() < 1.25 * prev - 1e-9) {
      throw Error("convergence schedule must grow the mechanical truncation "
                  "by at least 25% per level");
    }
    for (std::size_t m = 0; m < schedule[i].size(); ++m) {
      if (schedule[i][m] < schedule[i - 1][m]) {
        throw Error("convergence schedule must not shrink any mode");
      }
    }
  }

  ConvergenceReport rep;
  rep.truncations = schedule;
  rep.tolerance = tolerance;
  rep.observable = observable;
  std::vector<double> prev = scenario(schedule[0]);
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    std::vector<double> cur = scenario(schedule[i]);
    if (cur.size() != prev.size()) {
      throw Error("convergence scenario returned arrays of different length");
    }
    double dev = 0.0;
    for (std::size_t j = 0; j < cur.size(); ++j) {
      dev = std::max(dev, std::abs(cur[j] - prev[j]));
    }
    rep.deviations.push_back(dev);
    prev = std::move(cur);
  }
  rep.max_deviation =
      *std::max_element(rep.deviations.begin(), rep.deviations.end());
  rep.final_deviation = rep.deviations.back();
  rep.passed = rep.final_deviation <= tolerance;
  return rep;
}

}  // namespace omx
