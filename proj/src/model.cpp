#include "omx/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace omx {

namespace {

constexpr std::size_t kMechSingle = 1;
constexpr std::size_t kMechTwo = 2;

void require_modes(const HilbertSpace& space, std::size_t n, const char* who) {
  if (space.modes() != n) {
    throw DimensionError(std::string(who) + " expects " + std::to_string(n) +
                         " modes, got " + space.describe());
  }
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw Error(std::string(name) + " must be finite");
  }
}

Operator scaled(double s, const Operator& op) { return Complex(s, 0.0) * op; }

StateVector check_residual(const StateVector& psi, const Operator& h,
                           double energy, double tol) {
  const Vector r = h.matrix() * psi.amplitudes() - energy * psi.amplitudes();
  const double residual = r.norm();
  if (!(residual <= tol)) {
    throw TruncationError("dressed-state residual " + std::to_string(residual) +
                          " exceeds " + std::to_string(tol) +
                          "; mechanical truncation too small");
  }
  return psi;
}

}  // namespace

void OmcParams::validate() const {
  for (double v : {omega_c, omega_m, g0, kappa, gamma_m}) {
    require_finite(v, "OmcParams field");
  }
  if (omega_m <= 0.0) throw Error("omega_m must be positive");
  if (kappa < 0.0) throw Error("kappa must be non-negative");
  if (gamma_m < 0.0) throw Error("gamma_m must be non-negative");
}

DriveParams DriveParams::at_detuning(double E0, double Delta0) {
  return DriveParams{E0, Delta0, std::nullopt};
}

DriveParams DriveParams::at_frequency(double E0, double omega_d,
                                      double omega_c) {
  return DriveParams{E0, omega_c - omega_d, omega_d};
}

void DriveParams::validate(const OmcParams& params) const {
  require_finite(E0, "E0");
  require_finite(Delta0, "Delta0");
  if (omega_d) {
    const double expect = params.omega_c - *omega_d;
    if (std::abs(expect - Delta0) > 1e-12 * std::max(1.0, std::abs(expect))) {
      throw Error("Delta0 inconsistent with omega_c - omega_d");
    }
  }
}

void TwoCavityParams::validate() const {
  for (double v :
       {omega_c1, omega_c2, g1, g2, kappa1, kappa2, omega_m, gamma_m}) {
    require_finite(v, "TwoCavityParams field");
  }
  if (omega_m <= 0.0) throw Error("omega_m must be positive");
  if (kappa1 < 0.0 || kappa2 < 0.0) throw Error("kappa_i must be non-negative");
  if (gamma_m < 0.0) throw Error("gamma_m must be non-negative");
}

Operator build_hamiltonian(const OmcParams& params, const HilbertSpace& space) {
  require_modes(space, 2, "build_hamiltonian");
  params.validate();
  const Operator n = number(space, mode::cavity);
  const Operator b = annihilation(space, kMechSingle);
  const Operator x = b + b.adjoint();
  return scaled(params.omega_c, n) + scaled(params.omega_m, number(space, kMechSingle)) -
         scaled(params.g0, n * x);
}

Operator build_driven_hamiltonian_rotating(const OmcParams& params,
                                           const DriveParams& drive,
                                           const HilbertSpace& space) {
  require_modes(space, 2, "build_driven_hamiltonian_rotating");
  drive.validate(params);
  OmcParams frame = params;
  frame.omega_c = drive.Delta0;
  Operator h = build_hamiltonian(frame, space);
  if (drive.E0 != 0.0) {
    const Operator a = annihilation(space, mode::cavity);
    h = h + scaled(drive.E0, a + a.adjoint());
  }
  return h;
}

Operator build_two_cavity_hamiltonian(const TwoCavityParams& params,
                                      const HilbertSpace& space) {
  require_modes(space, 3, "build_two_cavity_hamiltonian");
  params.validate();
  const Operator n1 = number(space, mode::cavity1);
  const Operator n2 = number(space, mode::cavity2);
  const Operator b = annihilation(space, kMechTwo);
  const Operator x = b + b.adjoint();
  const Operator coupling = scaled(params.g1, n1) + scaled(params.g2, n2);
  return scaled(params.omega_c1, n1) + scaled(params.omega_c2, n2) +
         scaled(params.omega_m, number(space, kMechTwo)) - coupling * x;
}

double eigenenergy(int n, int k, const OmcParams& params) {
  if (n < 0 || k < 0) throw Error("eigenenergy needs n, k >= 0");
  const double nn = n;
  return nn * params.omega_c + k * params.omega_m -
         nn * nn * params.g0 * params.g0 / params.omega_m;
}

double two_cavity_eigenenergy(int n1, int n2, int k,
                              const TwoCavityParams& params) {
  if (n1 < 0 || n2 < 0 || k < 0) throw Error("eigenenergy needs n, k >= 0");
  const double shift = n1 * params.beta1() + n2 * params.beta2();
  return n1 * params.omega_c1 + n2 * params.omega_c2 + k * params.omega_m -
         shift * shift * params.omega_m;
}

StateVector dressed_state(int n, int k, const OmcParams& params,
                          const HilbertSpace& space, double residual_tol) {
  require_modes(space, 2, "dressed_state");
  const int nc = space.dim(mode::cavity);
  const int nm = space.dim(kMechSingle);
  if (n < 0 || n >= nc || k < 0 || k >= nm) {
    throw DimensionError("dressed_state indices outside truncation");
  }
  const HilbertSpace cav({nc});
  const HilbertSpace mech({nm});
  const int cav_occ[] = {n};
  const Vector mech_amp =
      displacement_matrix(nm, n * params.beta0()).col(k);
  const StateVector parts[] = {fock_state(cav, cav_occ),
                               StateVector(mech, mech_amp)};
  const StateVector psi = tensor(parts);
  return check_residual(psi, build_hamiltonian(params, space),
                        eigenenergy(n, k, params), residual_tol);
}

StateVector two_cavity_dressed_state(int n1, int n2, int k,
                                     const TwoCavityParams& params,
                                     const HilbertSpace& space,
                                     double residual_tol) {
  require_modes(space, 3, "two_cavity_dressed_state");
  const int nm = space.dim(kMechTwo);
  if (n1 < 0 || n1 >= space.dim(0) || n2 < 0 || n2 >= space.dim(1) || k < 0 ||
      k >= nm) {
    throw DimensionError("dressed_state indices outside truncation");
  }
  const double shift = n1 * params.beta1() + n2 * params.beta2();
  const HilbertSpace c1({space.dim(0)});
  const HilbertSpace c2({space.dim(1)});
  const HilbertSpace mech({nm});
  const int o1[] = {n1};
  const int o2[] = {n2};
  const StateVector parts[] = {
      fock_state(c1, o1), fock_state(c2, o2),
      StateVector(mech, displacement_matrix(nm, shift).col(k))};
  return check_residual(tensor(parts),
                        build_two_cavity_hamiltonian(params, space),
                        two_cavity_eigenenergy(n1, n2, k, params),
                        residual_tol);
}

DenseMatrix franck_condon_table(int size, double beta0) {
  if (size < 1) throw Error("franck_condon_table needs size >= 1");
  if (!std::isfinite(beta0)) throw Error("beta0 must be finite");
  const int top = size - 1;
  const int dim =
      top + 1 + recommended_mechanical_dim(std::abs(beta0), 0.0) + 2 * top;
  return displacement_matrix(dim, beta0).topLeftCorner(size, size);
}

double franck_condon(int j, int k, double beta0) {
  if (j < 0 || k < 0) throw Error("franck_condon needs j, k >= 0");
  return franck_condon_table(std::max(j, k) + 1, beta0)(j, k).real();
}

double sideband_gap(int n, int k, int j, const OmcParams& params) {
  if (n < 1) throw Error("sideband_gap needs n >= 1");
  return params.omega_c + (k - j) * params.omega_m +
         (1 - 2 * n) * params.g0 * params.g0 / params.omega_m;
}

std::vector<double> g2_peak_positions(int k_max) {
  if (k_max < 1) throw Error("g2_peak_positions needs k_max >= 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) out.push_back(std::sqrt(k / 2.0));
  return out;
}

}  // namespace omx
