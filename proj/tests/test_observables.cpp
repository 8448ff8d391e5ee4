#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "omx/observables.hpp"

using namespace omx;

namespace {

DensityMatrix bell(const HilbertSpace& s) {
  const int a[] = {0, 1};
  const int b[] = {1, 0};
  return DensityMatrix::pure((fock_state(s, a) + fock_state(s, b)).normalized());
}

// Partial transpose on the first of two modes by explicit index swap.
DenseMatrix naive_partial_transpose(const DenseMatrix& r, int d1, int d2) {
  DenseMatrix out(r.rows(), r.cols());
  for (int i1 = 0; i1 < d1; ++i1)
    for (int i2 = 0; i2 < d2; ++i2)
      for (int j1 = 0; j1 < d1; ++j1)
        for (int j2 = 0; j2 < d2; ++j2)
          out(i1 * d2 + i2, j1 * d2 + j2) = r(j1 * d2 + i2, i1 * d2 + j2);
  return out;
}

}  // namespace

TEST_SUITE("observables") {
  TEST_CASE("partial trace of a product state") {
    const HilbertSpace s({3, 4});
    const int occ[] = {2, 1};
    const DensityMatrix rho = DensityMatrix::pure(fock_state(s, occ));
    const std::size_t keep0[] = {0};
    const DensityMatrix r0 = partial_trace(rho, keep0);
    CHECK(r0.space().total_dim() == 3);
    CHECK(std::abs(coherence_element(r0, 2, 2) - 1.0) < 1e-15);
    const std::size_t keep1[] = {1};
    CHECK(std::abs(coherence_element(partial_trace(rho, keep1), 1, 1) - 1.0) < 1e-15);
    CHECK_THROWS_AS(coherence_element(r0, 3, 0), DimensionError);
    const std::size_t dup[] = {0, 0};
    CHECK_THROWS_AS(partial_trace(rho, dup), DimensionError);
  }

  TEST_CASE("partial trace keeps cavity coherence") {
    const HilbertSpace s({4, 5});
    const int a[] = {0, 2};
    const int b[] = {3, 2};
    const DensityMatrix rho =
        DensityMatrix::pure((fock_state(s, a) + fock_state(s, b)).normalized());
    const std::size_t keep[] = {0};
    const DensityMatrix r = partial_trace(rho, keep);
    CHECK(std::abs(coherence_element(r, 0, 3) - 0.5) < 1e-15);
    CHECK(std::abs(r.trace() - 1.0) < 1e-15);

    // Orthogonal mechanical partners erase the coherence.
    const int c[] = {3, 1};
    const DensityMatrix mixed =
        DensityMatrix::pure((fock_state(s, a) + fock_state(s, c)).normalized());
    CHECK(std::abs(coherence_element(partial_trace(mixed, keep), 0, 3)) < 1e-15);
  }

  TEST_CASE("partial trace over the mechanics of a three-mode state") {
    const HilbertSpace s({2, 2, 3});
    const int a[] = {0, 1, 2};
    const int b[] = {1, 0, 2};
    const DensityMatrix rho =
        DensityMatrix::pure((fock_state(s, a) + fock_state(s, b)).normalized());
    const std::size_t keep[] = {0, 1};
    const DensityMatrix r = partial_trace(rho, keep);
    CHECK(std::abs(log_negativity(r) - 1.0) < 1e-12);
  }

  TEST_CASE("partial transpose of a Bell state") {
    const HilbertSpace s({2, 2});
    const DensityMatrix rho = bell(s);
    const DenseMatrix pt = partial_transpose_matrix(rho, 0);
    CHECK((pt - naive_partial_transpose(rho.matrix(), 2, 2)).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(pt);
    const auto ev = es.eigenvalues();
    CHECK(ev(0) == doctest::Approx(-0.5));
    for (int k = 1; k < 4; ++k) CHECK(ev(k) == doctest::Approx(0.5));
    CHECK(trace_norm_hermitian(pt) == doctest::Approx(2.0));
  }

  TEST_CASE("logarithmic negativity") {
    const HilbertSpace s({2, 2});
    CHECK(std::abs(log_negativity(bell(s)) - 1.0) < 1e-12);
    const int occ[] = {1, 0};
    CHECK(std::abs(log_negativity(DensityMatrix::pure(fock_state(s, occ)))) < 1e-12);
    // p Bell + (1 - p) I/4: trace norm 3(p/2 + (1 - p)/4) + |(1 - p)/4 - p/2|
    const double p = 0.5;
    const DensityMatrix w(s, p * bell(s).matrix() +
                                 (1 - p) / 4 * DenseMatrix::Identity(4, 4));
    CHECK(log_negativity(w) == doctest::Approx(std::log2(1.25)).epsilon(1e-12));
    CHECK_THROWS_AS(log_negativity(DensityMatrix::pure(fock_state(HilbertSpace({2, 2, 2}),
                                                                  std::array{0, 0, 0}))),
                    DimensionError);

    const HilbertSpace t({3, 2});
    const DenseMatrix x = DenseMatrix::Random(6, 6);
    DenseMatrix m = x * x.adjoint();
    m /= m.trace();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(naive_partial_transpose(m, 3, 2));
    const double oracle = std::log2(es.eigenvalues().cwiseAbs().sum());
    CHECK(log_negativity(DensityMatrix(t, m)) == doctest::Approx(oracle).epsilon(1e-12));
  }

  TEST_CASE("g2 of Fock and thermal states") {
    const HilbertSpace s({8, 2});
    const int one[] = {1, 0};
    const int two[] = {2, 0};
    CHECK(std::abs(g2_zero(DensityMatrix::pure(fock_state(s, one)), 0)) < 1e-15);
    CHECK(g2_zero(DensityMatrix::pure(fock_state(s, two)), 0) == doctest::Approx(0.5));
    const int zero[] = {0, 0};
    CHECK_THROWS(g2_zero(DensityMatrix::pure(fock_state(s, zero)), 0));

    const HilbertSpace big({60});
    DenseMatrix th = DenseMatrix::Zero(60, 60);
    const double n = 0.7;
    for (int k = 0; k < 60; ++k) th(k, k) = std::pow(n, k) / std::pow(n + 1, k + 1);
    CHECK(g2_zero(DensityMatrix(big, th), 0) == doctest::Approx(2.0).epsilon(1e-9));
  }

  TEST_CASE("g2 is phase invariant") {
    const HilbertSpace s({6});
    Vector v(6);
    v << 0.6, 0.5, Complex(0.3, 0.2), 0.2, 0.1, 0.05;
    const StateVector psi(s, v.normalized());
    Vector w = psi.amplitudes();
    for (int k = 0; k < 6; ++k) w(k) *= std::exp(Complex(0.0, 0.9 * k));
    CHECK(g2_zero(DensityMatrix::pure(psi), 0) ==
          doctest::Approx(g2_zero(DensityMatrix::pure(StateVector(s, w)), 0)).epsilon(1e-13));
  }

  TEST_CASE("envelope of a damped oscillation") {
    std::vector<double> t;
    std::vector<double> y;
    const double rate = 0.02;
    for (int k = 0; k <= 4000; ++k) {
      t.push_back(0.05 * k);
      y.push_back(std::exp(-rate * t.back()) * std::abs(std::cos(t.back())));
    }
    const EnvelopeFit fit = envelope_fit(t, y, std::numbers::pi / 2);
    REQUIRE(fit.rate.has_value());
    CHECK_FALSE(fit.degenerate);
    CHECK(*fit.rate == doctest::Approx(rate).epsilon(0.02));
    CHECK(fit.peak_times.size() >= 60);
    const auto cross = fit.first_crossing(0.5);
    REQUIRE(cross.has_value());
    CHECK(*cross == doctest::Approx(std::log(2.0) / rate).epsilon(0.02));
    CHECK_FALSE(fit.first_crossing(1e-6).has_value());
  }

  TEST_CASE("envelope degenerate cases") {
    const std::vector<double> t{0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
    const std::vector<double> flat(8, 0.3);
    const EnvelopeFit c = envelope_fit(t, flat, 1.0);
    REQUIRE(c.rate.has_value());
    CHECK(std::abs(*c.rate) < 1e-14);

    const std::vector<double> zero(8, 0.0);
    CHECK(envelope_fit(t, zero, 1.0).degenerate);
    CHECK(envelope_fit(t, flat, 10.0).degenerate);
    CHECK(envelope_fit({}, {}, 1.0).degenerate);
    CHECK_THROWS(envelope_fit(t, flat, 0.0));
    const std::vector<double> shorter(3, 1.0);
    CHECK_THROWS(envelope_fit(t, shorter, 1.0));
  }
}
