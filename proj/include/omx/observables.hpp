#pragma once

// Reduced states and the figures of merit: cavity coherence, g2(0),
// logarithmic negativity, and peak-envelope fits of oscillating series.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omx/fock.hpp"

namespace omx {

/// Trace out every mode not listed in `keep`. Kept modes retain their
/// original relative order.
DensityMatrix partial_trace(const DensityMatrix& rho,
                            std::span<const std::size_t> keep);

/// <n| rho |m> of a single-mode (reduced) density matrix.
Complex coherence_element(const DensityMatrix& rho_reduced, int n, int m);

/// <a^dagger a^dagger a a> / <a^dagger a>^2 on `cavity_mode`.
/// Throws Error when <a^dagger a> vanishes.
double g2_zero(const DensityMatrix& rho, std::size_t cavity_mode);

/// Transpose of the tensor factor `subsystem`, returned Hermitian.
DenseMatrix partial_transpose_matrix(const DensityMatrix& rho,
                                     std::size_t subsystem);
Operator partial_transpose(const DensityMatrix& rho, std::size_t subsystem);

/// Sum of |eigenvalues| of a Hermitian matrix.
double trace_norm_hermitian(const DenseMatrix& m);

/// log2 || rho^{T_A} ||_1 with A the first mode. No clipping.
double log_negativity(const DensityMatrix& rho_two_cavity);

struct EnvelopeFit {
  std::vector<double> peak_times;
  std::vector<double> peak_values;
  std::optional<double> rate;  // empty when fewer than 3 peaks
  double fit_residual = 0.0;   // rms of ln(peak) residuals
  bool degenerate = false;     // fewer than 3 peaks or non-positive peaks
  std::string note;

  /// First time the piecewise-linear interpolation of the peaks falls to
  /// `level`, or nothing if it never does.
  std::optional<double> first_crossing(double level) const;
};

/// A sample is a peak when it is the largest value within +/- min_separation
/// and lies at least min_separation after the previous accepted peak. The
/// decay rate is the negated slope of a least-squares line through
/// (t, ln peak). Assumes a uniform grid.
EnvelopeFit envelope_fit(std::span<const double> times,
                         std::span<const double> values,
                         double min_separation);

}  // namespace omx
