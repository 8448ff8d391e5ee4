#include <cmath>
#include <cstdio>
#include <sstream>

#include "omx/experiments.hpp"
#include "omx/observables.hpp"

namespace omx {

bool ValidationReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return !checks.empty();
}

std::string ValidationReport::text() const {
  std::ostringstream os;
  char buf[256];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%s  %-34s deviation %.3e  tolerance %.1e",
                  c.passed ? "PASS" : "FAIL", c.name.c_str(), c.deviation,
                  c.tolerance);
    os << buf;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << '\n';
  }
  std::size_t failed = 0;
  for (const auto& c : checks) failed += c.passed ? 0 : 1;
  std::snprintf(buf, sizeof buf, "%zu checks, %zu failed\n", checks.size(), failed);
  os << buf;
  return os.str();
}

namespace {

const OmcParams kRates{0.0, 1.0, 0.8, 0.005, 0.00167};

CheckResult check(std::string name, double deviation, double tolerance,
                  std::string detail = {}) {
  return {std::move(name), deviation, tolerance,
          std::isfinite(deviation) && deviation <= tolerance, std::move(detail)};
}

// Max relative photon-number deviation from exponential decay.
double photon_decay_deviation(bool dsme, double n_th) {
  const HilbertSpace space({4, 20});
  const ThermalEnvironment env = thermal_environment(n_th);
  const Operator h = build_hamiltonian(kRates, space);
  const Liouvillian L =
      dsme ? dsme_generator(h, kRates, env) : sme_generator(h, kRates, env);
  const int zero[] = {0, 0};
  const int three[] = {3, 0};
  const DensityMatrix rho0 = DensityMatrix::pure(
      (fock_state(space, zero) + fock_state(space, three)).normalized());
  const Probe probes[] = {expectation_probe("n", number(space, mode::cavity))};
  const auto grid = uniform_grid(40.0, 0.5);
  const Trajectory tr = evolve(L, rho0, grid, SolverConfig{}, probes);
  const double n0 = tr.observables[0].values[0].real();
  double dev = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double exact = std::exp(-kRates.kappa * grid[i]) * n0;
    dev = std::max(dev, std::abs(tr.observables[0].values[i].real() - exact) / n0);
  }
  return dev;
}

std::vector<Complex> mechanical_amplitude(double n_th, const std::vector<double>& grid) {
  const HilbertSpace space({2, 40});
  const ThermalEnvironment env = thermal_environment(n_th);
  const Liouvillian L =
      dsme_generator(build_hamiltonian(kRates, space), kRates, env);
  const int one[] = {1, 0};
  const DensityMatrix rho0 = DensityMatrix::pure(fock_state(space, one));
  const Probe probes[] = {expectation_probe("b", annihilation(space, 1))};
  return evolve(L, rho0, grid, SolverConfig{}, probes).observables[0].values;
}

Complex amplitude_formula(double t, const OmcParams& p, Complex b0, double n0) {
  const Complex i(0.0, 1.0);
  const double g = p.gamma_m;
  const Complex free = std::exp(-i * p.omega_m * t - g * t / 2.0);
  const Complex drive = (i * p.g0 + p.beta0() * g / 2.0) /
                        (i * p.omega_m + g / 2.0 - p.kappa);
  return free * b0 + drive * (std::exp(-p.kappa * t) - free) * n0;
}

double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  const SparseMatrix d = a - b;
  double m = 0.0;
  for (int k = 0; k < d.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) {
      m = std::max(m, std::abs(it.value()));
    }
  }
  return m;
}

}  // namespace

ValidationReport validate() {
  ValidationReport rep;

  double decay = 0.0;
  for (bool dsme : {true, false}) {
    for (double n_th : {0.0, 5.0}) decay = std::max(decay, photon_decay_deviation(dsme, n_th));
  }
  rep.checks.push_back(check("photon_decay", decay, 1e-6,
                             "dsme and sme, n_th 0 and 5"));

  const auto grid = uniform_grid(20.0, 0.25);
  const auto b0 = mechanical_amplitude(0.0, grid);
  const auto b5 = mechanical_amplitude(5.0, grid);
  double peak = 0.0;
  double err = 0.0;
  double spread = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex exact = amplitude_formula(grid[i], kRates, 0.0, 1.0);
    peak = std::max(peak, std::abs(exact));
    err = std::max(err, std::abs(b5[i] - exact));
    spread = std::max(spread, std::abs(b5[i] - b0[i]));
  }
  rep.checks.push_back(check("mechanical_amplitude", err / peak, 1e-4,
                             "dsme, n_th 5, relative to max |<b>|"));
  rep.checks.push_back(check("amplitude_temperature_independence", spread, 1e-6,
                             "n_th 0 vs 5"));

  {
    const HilbertSpace space({3, 12});
    const ThermalEnvironment env = thermal_environment(2.0);
    OmcParams p = kRates;
    p.g0 = 0.0;
    const Operator h = build_hamiltonian(p, space);
    const double d0 = max_abs_diff(dsme_generator(h, p, env).matrix(),
                                   sme_generator(h, p, env).matrix());
    rep.checks.push_back(check("zero_coupling_equivalence", d0, 0.0, "beta0 = 0"));
    p = kRates;
    p.gamma_m = 0.0;
    const Operator h2 = build_hamiltonian(p, space);
    const double d1 = max_abs_diff(dsme_generator(h2, p, env).matrix(),
                                   sme_generator(h2, p, env).matrix());
    rep.checks.push_back(check("zero_damping_equivalence", d1, 0.0, "gamma_m = 0"));
  }

  {
    OmcParams p{0.0, 1.0, 0.0, 0.005, 0.00167};
    const DriveParams d = DriveParams::at_detuning(5e-4, 0.01);
    const HilbertSpace space({6, 2});
    const Liouvillian L = sme_generator(build_driven_hamiltonian_rotating(p, d, space),
                                        p, thermal_environment(0.0));
    const SteadyState ss = steady_state(L);
    const double g2 = g2_zero(ss.rho, mode::cavity);
    const double n = expectation(number(space, mode::cavity), ss.rho).real();
    const double n_exact = d.E0 * d.E0 / (d.Delta0 * d.Delta0 + p.kappa * p.kappa / 4);
    rep.checks.push_back(check("linear_cavity_g2", std::abs(g2 - 1.0), 1e-6));
    rep.checks.push_back(check("linear_cavity_photon_number", std::abs(n - n_exact),
                               1e-8));
  }

  {
    const HilbertSpace space({2, 2});
    const int a[] = {0, 1};
    const int b[] = {1, 0};
    const DensityMatrix bell = DensityMatrix::pure(
        (fock_state(space, a) + fock_state(space, b)).normalized());
    rep.checks.push_back(check("bell_log_negativity",
                               std::abs(log_negativity(bell) - 1.0), 1e-9));
  }

  {
    double dev = 0.0;
    for (double beta : {0.4, 0.8, 1.5, 3.0}) {
      const int dim = recommended_mechanical_dim(3 * beta, 0.0);
      const DenseMatrix D = displacement_matrix(dim, beta);
      dev = std::max(dev, (D.adjoint() * D - DenseMatrix::Identity(dim, dim))
                              .cwiseAbs()
                              .maxCoeff());
    }
    rep.checks.push_back(check("displacement_unitarity", dev, 1e-8));
  }

  {
    double dev = 0.0;
    for (double g0 : {0.8, 1.5}) {
      OmcParams p = kRates;
      p.g0 = g0;
      const int n_m = recommended_mechanical_dim(3 * p.beta0(), 0.0, 3);
      const HilbertSpace space({4, n_m});
      const Operator h = build_hamiltonian(p, space);
      for (int n = 0; n <= 3; ++n) {
        for (int k = 0; k <= 3; ++k) {
          const StateVector psi = dressed_state(n, k, p, space, INFINITY);
          const Vector r = h.matrix() * psi.amplitudes() -
                           eigenenergy(n, k, p) * psi.amplitudes();
          dev = std::max(dev, r.norm());
        }
      }
    }
    rep.checks.push_back(check("dressed_state_residual", dev, 1e-6,
                               "n, k <= 3, beta0 0.8 and 1.5"));
  }

  {
    double dev = 0.0;
    for (double beta : {0.8, 1.5}) {
      const DenseMatrix fc = franck_condon_table(80, beta);
      for (int j = 0; j <= 3; ++j) {
        dev = std::max(dev, std::abs(fc.row(j).squaredNorm() - 1.0));
      }
    }
    rep.checks.push_back(check("franck_condon_completeness", dev, 1e-8));
  }

  {
    double dev = 0.0;
    for (double n_th : {0.1, 1.0, 5.0, 20.0}) {
      const double back = thermal_occupation(thermal_environment(n_th).kT_over_omega_m);
      dev = std::max(dev, std::abs(back - n_th) / n_th);
    }
    rep.checks.push_back(check("thermal_round_trip", dev, 1e-12));
  }

  return rep;
}

}  // namespace omx
