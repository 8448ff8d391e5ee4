#pragma once

// Optomechanical Hamiltonians and dressed-state analytics.
//
// Units: omega_m sets the frequency scale (1 by convention). Single-cavity
// spaces are ordered (cavity, mechanics); two-cavity spaces are ordered
// (cavity 1, cavity 2, mechanics).

#include <optional>
#include <vector>

#include "omx/fock.hpp"

namespace omx {

struct OmcParams {
  double omega_c = 0.0;  // 0 selects the frame rotating at the cavity frequency
  double omega_m = 1.0;
  double g0 = 0.0;
  double kappa = 0.0;
  double gamma_m = 0.0;

  double beta0() const { return g0 / omega_m; }
  void validate() const;
};

/// Coherent cavity drive E0 (a e^{i wd t} + a^dagger e^{-i wd t}).
struct DriveParams {
  double E0 = 0.0;
  double Delta0 = 0.0;  // omega_c - omega_d
  std::optional<double> omega_d;

  static DriveParams at_detuning(double E0, double Delta0);
  static DriveParams at_frequency(double E0, double omega_d, double omega_c);

  /// Checks Delta0 == omega_c - omega_d when omega_d is known.
  void validate(const OmcParams& params) const;
};

struct TwoCavityParams {
  double omega_c1 = 0.0;
  double omega_c2 = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double omega_m = 1.0;
  double gamma_m = 0.0;

  double beta1() const { return g1 / omega_m; }
  double beta2() const { return g2 / omega_m; }
  void validate() const;
};

namespace mode {
inline constexpr std::size_t cavity = 0;
inline constexpr std::size_t cavity1 = 0;
inline constexpr std::size_t cavity2 = 1;
}  // namespace mode

/// omega_c N + omega_m b^dagger b - g0 N (b + b^dagger).
Operator build_hamiltonian(const OmcParams& params, const HilbertSpace& space);

/// Time-independent Hamiltonian in the frame rotating at the drive
/// frequency on the cavity only:
///   Delta0 N + omega_m b^dagger b - g0 N (b + b^dagger) + E0 (a + a^dagger).
///
/// The frame change U = exp(i omega_d t N) commutes with N, with b, and with
/// every jump operator built from them, while a -> a e^{-i omega_d t} only
/// picks up a phase that cancels inside D[a]. Every dissipator of the
/// master equations is therefore unchanged by the transformation, so the
/// same generators apply in this frame. Observables that commute with N
/// (photon number, g2(0), coherence moduli) are frame independent.
Operator build_driven_hamiltonian_rotating(const OmcParams& params,
                                           const DriveParams& drive,
                                           const HilbertSpace& space);

/// sum_i omega_ci N_i + omega_m b^dagger b - sum_i g_i N_i (b + b^dagger).
Operator build_two_cavity_hamiltonian(const TwoCavityParams& params,
                                      const HilbertSpace& space);

/// n omega_c + k omega_m - n^2 g0^2 / omega_m.
double eigenenergy(int n, int k, const OmcParams& params);

double two_cavity_eigenenergy(int n1, int n2, int k,
                              const TwoCavityParams& params);

/// |n> (x) D(n beta0)|k>. Throws TruncationError when the residual
/// ||H psi - eps psi|| exceeds `residual_tol` (in units of omega_m).
StateVector dressed_state(int n, int k, const OmcParams& params,
                          const HilbertSpace& space,
                          double residual_tol = 1e-6);

/// |n1>|n2> (x) D(n1 beta1 + n2 beta2)|k>, same residual policy.
StateVector two_cavity_dressed_state(int n1, int n2, int k,
                                     const TwoCavityParams& params,
                                     const HilbertSpace& space,
                                     double residual_tol = 1e-6);

/// <j| D(beta0) |k>, the overlap between mechanical Fock states of adjacent
/// photon sectors. Multiply by sqrt(n) for the cavity-operator weight.
double franck_condon(int j, int k, double beta0);

/// <j| D(beta0) |k> for j, k < size from a single exponential.
DenseMatrix franck_condon_table(int size, double beta0);

/// Delta_{k,j}^{(n)} = omega_c + (k - j) omega_m + (1 - 2n) g0^2 / omega_m.
double sideband_gap(int n, int k, int j, const OmcParams& params);

/// Two-photon sideband resonances of g2(0): sqrt(k/2), k = 1..k_max.
std::vector<double> g2_peak_positions(int k_max);

}  // namespace omx
