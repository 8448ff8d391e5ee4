#include "omx/dissipators.hpp"

#include <cmath>

namespace omx {

namespace {

constexpr Complex kI(0.0, 1.0);

SparseMatrix sparse_identity(int n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

SparseMatrix dissipator_matrix(const SparseMatrix& o) {
  const int d = static_cast<int>(o.rows());
  const SparseMatrix id = sparse_identity(d);
  const SparseMatrix odo = o.adjoint() * o;
  const SparseMatrix odo_t = odo.transpose();
  SparseMatrix m = kron(SparseMatrix(o.conjugate()), o);
  m -= 0.5 * kron(id, odo);
  m -= 0.5 * kron(odo_t, id);
  return m;
}

SparseMatrix commutator_matrix(const SparseMatrix& h) {
  const int d = static_cast<int>(h.rows());
  const SparseMatrix id = sparse_identity(d);
  const SparseMatrix ht = h.transpose();
  SparseMatrix m = kron(id, h) - kron(ht, id);
  return -kI * m;
}

std::string rate_label(const std::string& label, double rate) {
  return label + " @ " + std::to_string(rate);
}

void require_modes(const HilbertSpace& space, std::size_t n, const char* who) {
  if (space.modes() != n) {
    throw DimensionError(std::string(who) + " expects " + std::to_string(n) +
                         " modes, got " + space.describe());
  }
}

// b - s X, written without the subtraction when s == 0 so that the s = 0
// case is bitwise identical to the bare operator.
Operator shifted(const Operator& b, double s, const Operator& x) {
  if (s == 0.0) return b;
  return b - Complex(s, 0.0) * x;
}

}  // namespace

ThermalEnvironment thermal_environment(double n_th) {
  if (!(n_th >= 0.0) || !std::isfinite(n_th)) {
    throw Error("n_th must be finite and non-negative");
  }
  ThermalEnvironment env;
  env.n_th = n_th;
  env.kT_over_omega_m = n_th == 0.0 ? 0.0 : 1.0 / std::log1p(1.0 / n_th);
  return env;
}

double thermal_occupation(double kT_over_omega_m) {
  if (!(kT_over_omega_m >= 0.0)) throw Error("temperature must be >= 0");
  if (kT_over_omega_m == 0.0) return 0.0;
  return 1.0 / std::expm1(1.0 / kT_over_omega_m);
}

Liouvillian::Liouvillian(HilbertSpace space, SparseMatrix matrix,
                         std::vector<std::string> labels)
    : space_(std::move(space)),
      matrix_(std::move(matrix)),
      labels_(std::move(labels)) {
  const Eigen::Index n =
      static_cast<Eigen::Index>(space_.total_dim()) * space_.total_dim();
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw DimensionError("Liouvillian shape does not match " +
                         space_.describe());
  }
  matrix_.prune(Complex(0.0, 0.0), 0.0);
  matrix_.makeCompressed();
}

DenseMatrix Liouvillian::apply(const DenseMatrix& rho) const {
  const int d = space_.total_dim();
  if (rho.rows() != d || rho.cols() != d) {
    throw DimensionError("density matrix does not match Liouvillian");
  }
  return unvectorize(matrix_ * vectorize(rho), d);
}

double Liouvillian::trace_defect() const {
  const int d = space_.total_dim();
  // Column j of vec(I)^dagger L is the sum of the diagonal-position rows.
  double worst = 0.0;
  for (Eigen::Index j = 0; j < matrix_.outerSize(); ++j) {
    Complex acc = 0.0;
    for (SparseMatrix::InnerIterator it(matrix_, j); it; ++it) {
      if (it.row() % (d + 1) == 0) acc += it.value();
    }
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

Liouvillian commutator_generator(const Operator& h) {
  return Liouvillian(h.space(), commutator_matrix(h.matrix()), {"-i[H,.]"});
}

Liouvillian lindblad_dissipator(const Operator& o) {
  return Liouvillian(o.space(), dissipator_matrix(o.matrix()), {"D[o]"});
}

Liouvillian assemble_generator(const Operator& h,
                               std::span<const JumpTerm> terms) {
  SparseMatrix m = commutator_matrix(h.matrix());
  std::vector<std::string> labels{"-i[H,.]"};
  for (const JumpTerm& t : terms) {
    if (!(t.op.space() == h.space())) {
      throw DimensionError("jump operator space differs from Hamiltonian");
    }
    if (!std::isfinite(t.rate) || t.rate < 0.0) {
      throw Error("dissipator rate must be finite and non-negative: " +
                  t.label);
    }
    if (t.rate == 0.0) continue;
    m += t.rate * dissipator_matrix(t.op.matrix());
    labels.push_back(rate_label(t.label, t.rate));
  }
  return Liouvillian(h.space(), std::move(m), std::move(labels));
}

std::vector<JumpTerm> dsme_terms(const HilbertSpace& space,
                                 const OmcParams& params,
                                 const ThermalEnvironment& env) {
  require_modes(space, 2, "dsme_terms");
  params.validate();
  const double beta0 = params.beta0();
  const Operator a = annihilation(space, mode::cavity);
  const Operator n = number(space, mode::cavity);
  const Operator b = annihilation(space, 1);
  const double g = params.gamma_m;
  return {
      {g * (env.n_th + 1.0), shifted(b, beta0, n), "D[b - beta0 N]"},
      {params.kappa, a, "D[a]"},
      {g * env.n_th, shifted(b.adjoint(), beta0, n), "D[b^dag - beta0 N]"},
      {4.0 * g * env.kT_over_omega_m * beta0 * beta0, n, "D[N]"},
  };
}

std::vector<JumpTerm> sme_terms(const HilbertSpace& space,
                                const OmcParams& params,
                                const ThermalEnvironment& env) {
  require_modes(space, 2, "sme_terms");
  params.validate();
  const Operator a = annihilation(space, mode::cavity);
  const Operator b = annihilation(space, 1);
  const double g = params.gamma_m;
  return {
      {g * (env.n_th + 1.0), b, "D[b]"},
      {params.kappa, a, "D[a]"},
      {g * env.n_th, b.adjoint(), "D[b^dag]"},
  };
}

Operator effective_number(const HilbertSpace& space,
                          const TwoCavityParams& params) {
  require_modes(space, 3, "effective_number");
  return Complex(params.beta1(), 0.0) * number(space, mode::cavity1) +
         Complex(params.beta2(), 0.0) * number(space, mode::cavity2);
}

std::vector<JumpTerm> dsme_two_cavity_terms(const HilbertSpace& space,
                                            const TwoCavityParams& params,
                                            const ThermalEnvironment& env) {
  require_modes(space, 3, "dsme_two_cavity_terms");
  params.validate();
  const Operator a1 = annihilation(space, mode::cavity1);
  const Operator a2 = annihilation(space, mode::cavity2);
  const Operator b = annihilation(space, 2);
  const Operator nt = effective_number(space, params);
  const bool uncoupled = params.g1 == 0.0 && params.g2 == 0.0;
  const double g = params.gamma_m;
  return {
      {g * (env.n_th + 1.0), uncoupled ? b : b - nt, "D[b - Nt]"},
      {params.kappa1, a1, "D[a1]"},
      {params.kappa2, a2, "D[a2]"},
      {g * env.n_th, uncoupled ? b.adjoint() : b.adjoint() - nt,
       "D[b^dag - Nt]"},
      {uncoupled ? 0.0 : 4.0 * g * env.kT_over_omega_m, nt, "D[Nt]"},
  };
}

std::vector<JumpTerm> sme_two_cavity_terms(const HilbertSpace& space,
                                           const TwoCavityParams& params,
                                           const ThermalEnvironment& env) {
  require_modes(space, 3, "sme_two_cavity_terms");
  params.validate();
  const Operator a1 = annihilation(space, mode::cavity1);
  const Operator a2 = annihilation(space, mode::cavity2);
  const Operator b = annihilation(space, 2);
  const double g = params.gamma_m;
  return {
      {g * (env.n_th + 1.0), b, "D[b]"},
      {params.kappa1, a1, "D[a1]"},
      {params.kappa2, a2, "D[a2]"},
      {g * env.n_th, b.adjoint(), "D[b^dag]"},
  };
}

Liouvillian dsme_generator(const Operator& h, const OmcParams& params,
                           const ThermalEnvironment& env) {
  const auto terms = dsme_terms(h.space(), params, env);
  return assemble_generator(h, terms);
}

Liouvillian sme_generator(const Operator& h, const OmcParams& params,
                          const ThermalEnvironment& env) {
  const auto terms = sme_terms(h.space(), params, env);
  return assemble_generator(h, terms);
}

Liouvillian dsme_two_cavity_generator(const Operator& h,
                                      const TwoCavityParams& params,
                                      const ThermalEnvironment& env) {
  const auto terms = dsme_two_cavity_terms(h.space(), params, env);
  return assemble_generator(h, terms);
}

Liouvillian sme_two_cavity_generator(const Operator& h,
                                     const TwoCavityParams& params,
                                     const ThermalEnvironment& env) {
  const auto terms = sme_two_cavity_terms(h.space(), params, env);
  return assemble_generator(h, terms);
}

double dephasing_gap(const OmcParams& params, const ThermalEnvironment& env) {
  const double beta0 = params.beta0();
  return params.gamma_m *
         (4.0 * env.kT_over_omega_m - 2.0 * env.n_th - 1.0) * beta0 * beta0;
}

Vector vectorize(const DenseMatrix& rho) {
  return Eigen::Map<const Vector>(rho.data(), rho.size());
}

DenseMatrix unvectorize(const Vector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw DimensionError("vector length is not dim^2");
  }
  return Eigen::Map<const DenseMatrix>(v.data(), dim, dim);
}

}  // namespace omx
