#include "omx/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace omx {

namespace {

// Offsets of every occupation tuple over `modes` into the full flat index.
std::vector<int> offsets(const HilbertSpace& space,
                         const std::vector<std::size_t>& modes) {
  std::vector<int> out{0};
  for (std::size_t m : modes) {
    const int stride = space.stride(m);
    std::vector<int> next;
    next.reserve(out.size() * static_cast<std::size_t>(space.dim(m)));
    for (int base : out) {
      for (int k = 0; k < space.dim(m); ++k) next.push_back(base + k * stride);
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

DensityMatrix partial_trace(const DensityMatrix& rho,
                            std::span<const std::size_t> keep) {
  const HilbertSpace& space = rho.space();
  if (keep.empty()) throw DimensionError("partial_trace: keep set is empty");
  std::vector<std::size_t> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end()) {
    throw DimensionError("partial_trace: duplicate mode in keep set");
  }
  for (std::size_t m : kept) space.dim(m);

  std::vector<std::size_t> traced;
  std::vector<int> kept_dims;
  for (std::size_t m = 0; m < space.modes(); ++m) {
    if (std::binary_search(kept.begin(), kept.end(), m)) {
      kept_dims.push_back(space.dim(m));
    } else {
      traced.push_back(m);
    }
  }
  const std::vector<int> kept_off = offsets(space, kept);
  const std::vector<int> traced_off = offsets(space, traced);
  const auto nk = static_cast<Eigen::Index>(kept_off.size());

  const DenseMatrix& r = rho.matrix();
  DenseMatrix out = DenseMatrix::Zero(nk, nk);
  for (Eigen::Index j = 0; j < nk; ++j) {
    for (Eigen::Index i = 0; i < nk; ++i) {
      Complex acc = 0.0;
      for (int t : traced_off) acc += r(kept_off[i] + t, kept_off[j] + t);
      out(i, j) = acc;
    }
  }
  return DensityMatrix(HilbertSpace(std::move(kept_dims)), std::move(out));
}

Complex coherence_element(const DensityMatrix& rho_reduced, int n, int m) {
  const int d = rho_reduced.space().total_dim();
  if (n < 0 || m < 0 || n >= d || m >= d) {
    throw DimensionError("coherence_element: index outside truncation");
  }
  return rho_reduced.matrix()(n, m);
}

double g2_zero(const DensityMatrix& rho, std::size_t cavity_mode) {
  const Operator a = annihilation(rho.space(), cavity_mode);
  const Operator ad = a.adjoint();
  const double n = expectation(ad * a, rho).real();
  if (!(std::abs(n) > 0.0)) {
    throw Error("g2_zero: <a^dagger a> is zero (vacuum state)");
  }
  const double num = expectation(ad * ad * a * a, rho).real();
  return num / (n * n);
}

DenseMatrix partial_transpose_matrix(const DensityMatrix& rho,
                                     std::size_t subsystem) {
  const HilbertSpace& space = rho.space();
  const int dim = space.dim(subsystem);
  const int stride = space.stride(subsystem);
  const int n = space.total_dim();
  const DenseMatrix& r = rho.matrix();
  DenseMatrix out(n, n);
  for (int j = 0; j < n; ++j) {
    const int b = (j / stride) % dim;
    for (int i = 0; i < n; ++i) {
      const int a = (i / stride) % dim;
      out(i, j) = r(i + (b - a) * stride, j + (a - b) * stride);
    }
  }
  return out;
}

Operator partial_transpose(const DensityMatrix& rho, std::size_t subsystem) {
  const DenseMatrix pt = partial_transpose_matrix(rho, subsystem);
  return Operator(rho.space(), SparseMatrix(pt.sparseView(0.0, 0.0)));
}

double trace_norm_hermitian(const DenseMatrix& m) {
  const DenseMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double log_negativity(const DensityMatrix& rho_two_cavity) {
  if (rho_two_cavity.space().modes() != 2) {
    throw DimensionError("log_negativity expects a two-mode reduced state");
  }
  return std::log2(
      trace_norm_hermitian(partial_transpose_matrix(rho_two_cavity, 0)));
}

std::optional<double> EnvelopeFit::first_crossing(double level) const {
  if (peak_values.empty()) return std::nullopt;
  if (peak_values.front() <= level) return peak_times.front();
  for (std::size_t i = 1; i < peak_values.size(); ++i) {
    const double v0 = peak_values[i - 1];
    const double v1 = peak_values[i];
    if (v1 <= level) {
      const double frac = (v0 - level) / (v0 - v1);
      return peak_times[i - 1] + frac * (peak_times[i] - peak_times[i - 1]);
    }
  }
  return std::nullopt;
}

EnvelopeFit envelope_fit(std::span<const double> times,
                         std::span<const double> values,
                         double min_separation) {
  if (times.size() != values.size()) {
    throw Error("envelope_fit: times and values differ in length");
  }
  if (!(min_separation > 0.0)) {
    throw Error("envelope_fit: min_separation must be positive");
  }
  EnvelopeFit fit;
  const std::size_t n = values.size();
  if (n == 0) {
    fit.degenerate = true;
    fit.note = "empty series";
    return fit;
  }

  // Window maxima, scanned with two pointers.
  std::size_t lo = 0;
  std::size_t hi = 0;
  double last_peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    while (times[i] - times[lo] > min_separation) ++lo;
    while (hi + 1 < n && times[hi + 1] - times[i] <= min_separation) ++hi;
    bool is_max = true;
    for (std::size_t j = lo; j <= hi && is_max; ++j) {
      if (values[j] > values[i]) is_max = false;
    }
    if (!is_max || times[i] - last_peak < min_separation) continue;
    fit.peak_times.push_back(times[i]);
    fit.peak_values.push_back(values[i]);
    last_peak = times[i];
  }

  if (fit.peak_times.size() < 3) {
    fit.degenerate = true;
    fit.note = "fewer than 3 peaks; rate undefined";
    return fit;
  }
  if (std::any_of(fit.peak_values.begin(), fit.peak_values.end(),
                  [](double v) { return !(v > 0.0); })) {
    fit.degenerate = true;
    fit.note = "non-positive peak value; rate undefined";
    return fit;
  }

  const auto m = static_cast<double>(fit.peak_times.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < fit.peak_times.size(); ++i) {
    const double t = fit.peak_times[i];
    const double y = std::log(fit.peak_values[i]);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double denom = m * stt - st * st;
  const double slope = (m * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / m;
  double ss = 0.0;
  for (std::size_t i = 0; i < fit.peak_times.size(); ++i) {
    const double r = std::log(fit.peak_values[i]) -
                     (intercept + slope * fit.peak_times[i]);
    ss += r * r;
  }
  fit.rate = -slope;
  fit.fit_residual = std::sqrt(ss / m);
  return fit;
}

}  // namespace omx
