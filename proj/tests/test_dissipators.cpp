#include <doctest.h>

#include <cmath>

#include "omx/dissipators.hpp"

using namespace omx;

namespace {

DenseMatrix random_density(int dim) {
  const DenseMatrix x = DenseMatrix::Random(dim, dim);
  DenseMatrix rho = x * x.adjoint();
  return rho / rho.trace();
}

double max_abs(const DenseMatrix& m) { return m.cwiseAbs().maxCoeff(); }

double max_abs(const SparseMatrix& m) {
  double r = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
  }
  return r;
}

DenseMatrix explicit_dissipator(const DenseMatrix& o, const DenseMatrix& rho) {
  const DenseMatrix od = o.adjoint();
  return o * rho * od - 0.5 * (od * o * rho + rho * od * o);
}

const OmcParams kParams{0.0, 1.0, 0.8, 0.005, 0.00167};

}  // namespace

TEST_SUITE("dissipators") {
  TEST_CASE("thermal environment") {
    CHECK(thermal_environment(0.0).kT_over_omega_m == 0.0);
    CHECK(thermal_environment(20.0).kT_over_omega_m ==
          doctest::Approx(1.0 / std::log(1.05)).epsilon(1e-14));
    CHECK(thermal_environment(10.0).kT_over_omega_m ==
          doctest::Approx(1.0 / std::log(1.1)).epsilon(1e-14));
    CHECK(thermal_occupation(thermal_environment(5.0).kT_over_omega_m) ==
          doctest::Approx(5.0).epsilon(1e-13));
    CHECK_THROWS(thermal_environment(-1.0));
  }

  TEST_CASE("vectorization round trip is column stacking") {
    const DenseMatrix m = DenseMatrix::Random(4, 4);
    const Vector v = vectorize(m);
    CHECK(v(1) == m(1, 0));
    CHECK(v(4) == m(0, 1));
    CHECK(max_abs(unvectorize(v, 4) - m) == 0.0);
  }

  TEST_CASE("single dissipator against the explicit formula") {
    const HilbertSpace s({3, 5});
    const Operator o = annihilation(s, 1) - 0.8 * number(s, 0);
    const DenseMatrix rho = random_density(s.total_dim());
    const DenseMatrix lhs = lindblad_dissipator(o).apply(rho);
    CHECK(max_abs(lhs - explicit_dissipator(DenseMatrix(o.matrix()), rho)) < 1e-14);
  }

  TEST_CASE("generator against explicit Hamiltonian plus jump sum") {
    const HilbertSpace s({3, 6});
    const ThermalEnvironment env = thermal_environment(2.0);
    const Operator h = build_hamiltonian(kParams, s);
    const Liouvillian L = dsme_generator(h, kParams, env);
    const DenseMatrix rho = random_density(s.total_dim());
    const DenseMatrix H(h.matrix());
    const Complex i(0.0, 1.0);
    DenseMatrix expect = -i * (H * rho - rho * H);
    const double g = kParams.gamma_m;
    const double n = env.n_th;
    const double b0 = kParams.beta0();
    const DenseMatrix a(annihilation(s, 0).matrix());
    const DenseMatrix b(annihilation(s, 1).matrix());
    const DenseMatrix N(number(s, 0).matrix());
    expect += g * (n + 1) * explicit_dissipator(b - b0 * N, rho);
    expect += kParams.kappa * explicit_dissipator(a, rho);
    expect += g * n * explicit_dissipator(b.adjoint() - b0 * N, rho);
    expect += 4 * g * env.kT_over_omega_m * b0 * b0 * explicit_dissipator(N, rho);
    CHECK(max_abs(L.apply(rho) - expect) < 1e-14);
  }

  TEST_CASE("generators preserve the trace") {
    const HilbertSpace s({3, 8});
    const ThermalEnvironment env = thermal_environment(5.0);
    const Operator h = build_hamiltonian(kParams, s);
    CHECK(dsme_generator(h, kParams, env).trace_defect() < 1e-13);
    CHECK(sme_generator(h, kParams, env).trace_defect() < 1e-13);
    const DenseMatrix rho = random_density(s.total_dim());
    CHECK(std::abs(dsme_generator(h, kParams, env).apply(rho).trace()) < 1e-13);
  }

  TEST_CASE("equations coincide without coupling or without damping") {
    const HilbertSpace s({3, 8});
    const ThermalEnvironment env = thermal_environment(3.0);
    OmcParams p = kParams;
    p.g0 = 0.0;
    Operator h = build_hamiltonian(p, s);
    CHECK(max_abs(SparseMatrix(dsme_generator(h, p, env).matrix() -
                               sme_generator(h, p, env).matrix())) == 0.0);
    p = kParams;
    p.gamma_m = 0.0;
    h = build_hamiltonian(p, s);
    CHECK(max_abs(SparseMatrix(dsme_generator(h, p, env).matrix() -
                               sme_generator(h, p, env).matrix())) == 0.0);
    // and they differ otherwise
    h = build_hamiltonian(kParams, s);
    CHECK(max_abs(SparseMatrix(dsme_generator(h, kParams, env).matrix() -
                               sme_generator(h, kParams, env).matrix())) > 1e-6);
  }

  TEST_CASE("jump terms") {
    const HilbertSpace s({2, 4});
    const auto zero_t = dsme_terms(s, kParams, thermal_environment(0.0));
    double thermal = 0.0;
    for (const auto& t : zero_t) {
      if (t.label.find("b^dag") != std::string::npos) thermal += t.rate;
    }
    CHECK(thermal == 0.0);
    const auto hot = sme_terms(s, kParams, thermal_environment(4.0));
    double total = 0.0;
    for (const auto& t : hot) total += t.rate;
    CHECK(total == doctest::Approx(kParams.gamma_m * 9.0 + kParams.kappa));
  }

  TEST_CASE("dephasing gap") {
    CHECK(dephasing_gap(kParams, thermal_environment(20.0)) ==
          doctest::Approx(26.23 * kParams.gamma_m).epsilon(1e-3));
    // zero temperature: -gamma beta0^2, the dressed equation dephases less
    CHECK(dephasing_gap(kParams, thermal_environment(0.0)) ==
          doctest::Approx(-kParams.gamma_m * 0.64));
  }

  TEST_CASE("two-cavity equations") {
    TwoCavityParams t;
    t.g1 = t.g2 = 1.5;
    t.kappa1 = t.kappa2 = 0.005;
    t.gamma_m = 0.00167;
    const HilbertSpace s({2, 2, 10});
    const ThermalEnvironment env = thermal_environment(20.0);
    const Operator h = build_two_cavity_hamiltonian(t, s);
    const Liouvillian d = dsme_two_cavity_generator(h, t, env);
    const Liouvillian m = sme_two_cavity_generator(h, t, env);
    CHECK(d.trace_defect() < 1e-13);
    CHECK(m.trace_defect() < 1e-13);
    const DenseMatrix eff(effective_number(s, t).matrix());
    const DenseMatrix expect(1.5 * number(s, 0).matrix() + 1.5 * number(s, 1).matrix());
    CHECK(max_abs(eff - expect) < 1e-15);
  }
}
