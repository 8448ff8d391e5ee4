#pragma once

// Lindblad superoperators and the master-equation generators.
//
// Vectorization is column stacking: vec(A rho B) = (B^T (x) A) vec(rho).
// The generator of D[o] with rate r is
//   r [ conj(o) (x) o - 1/2 I (x) o^dagger o - 1/2 (o^dagger o)^T (x) I ].

#include <span>
#include <string>
#include <vector>

#include "omx/fock.hpp"
#include "omx/model.hpp"

namespace omx {

struct ThermalEnvironment {
  double n_th = 0.0;
  double kT_over_omega_m = 0.0;
};

/// Bose-Einstein inversion kT/omega_m = 1 / ln(1 + 1/n_th); zero at n_th = 0.
ThermalEnvironment thermal_environment(double n_th);

/// Inverse map n_th = 1 / (exp(omega_m/kT) - 1).
double thermal_occupation(double kT_over_omega_m);

class Liouvillian {
 public:
  Liouvillian(HilbertSpace space, SparseMatrix matrix,
              std::vector<std::string> labels);

  const HilbertSpace& space() const { return space_; }
  const SparseMatrix& matrix() const { return matrix_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// L applied to a density matrix.
  DenseMatrix apply(const DenseMatrix& rho) const;

  /// max |vec(I)^dagger L|.
  double trace_defect() const;

 private:
  HilbertSpace space_;
  SparseMatrix matrix_;
  std::vector<std::string> labels_;
};

struct JumpTerm {
  double rate;
  Operator op;
  std::string label;
};

/// -i[H, .] as a superoperator.
Liouvillian commutator_generator(const Operator& h);

/// D[o] with unit rate.
Liouvillian lindblad_dissipator(const Operator& o);

/// -i[H, .] + sum rate D[op], in the order given. Zero rates are skipped.
Liouvillian assemble_generator(const Operator& h, std::span<const JumpTerm> terms);

/// Jump terms of the single-cavity dressed-state master equation:
///   g(n+1) D[b - beta0 N] + kappa D[a] + g n D[b^dagger - beta0 N]
///   + 4 g (kT/omega_m) beta0^2 D[N].
std::vector<JumpTerm> dsme_terms(const HilbertSpace& space,
                                 const OmcParams& params,
                                 const ThermalEnvironment& env);

/// The same with beta0 = 0: g(n+1) D[b] + kappa D[a] + g n D[b^dagger].
std::vector<JumpTerm> sme_terms(const HilbertSpace& space,
                                const OmcParams& params,
                                const ThermalEnvironment& env);

std::vector<JumpTerm> dsme_two_cavity_terms(const HilbertSpace& space,
                                            const TwoCavityParams& params,
                                            const ThermalEnvironment& env);

std::vector<JumpTerm> sme_two_cavity_terms(const HilbertSpace& space,
                                           const TwoCavityParams& params,
                                           const ThermalEnvironment& env);

Liouvillian dsme_generator(const Operator& h, const OmcParams& params,
                           const ThermalEnvironment& env);
Liouvillian sme_generator(const Operator& h, const OmcParams& params,
                          const ThermalEnvironment& env);
Liouvillian dsme_two_cavity_generator(const Operator& h,
                                      const TwoCavityParams& params,
                                      const ThermalEnvironment& env);
Liouvillian sme_two_cavity_generator(const Operator& h,
                                     const TwoCavityParams& params,
                                     const ThermalEnvironment& env);

/// beta1 N_1 + beta2 N_2.
Operator effective_number(const HilbertSpace& space,
                          const TwoCavityParams& params);

/// Coefficient difference of D[N] between the dressed-state and the standard
/// master equation in the interaction picture:
///   gamma_m [4 kT/omega_m - 2 n_th - 1] beta0^2.
/// Positive means the dressed-state equation dephases the cavity faster.
double dephasing_gap(const OmcParams& params, const ThermalEnvironment& env);

Vector vectorize(const DenseMatrix& rho);
DenseMatrix unvectorize(const Vector& v, int dim);

}  // namespace omx
