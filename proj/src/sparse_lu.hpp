#pragma once

// RAII wrapper over UMFPACK's complex (packed) LU.

#include <memory>
#include <string>

#include <umfpack.h>

#include "omx/fock.hpp"

namespace omx::detail {

class SparseLU {
 public:
  /// Factorizes a square column-major matrix. `ok()` is false when UMFPACK
  /// reports a singular or failed factorization.
  explicit SparseLU(const SparseMatrix& a) : a_(a) {
    a_.makeCompressed();
    umfpack_zi_defaults(control_);
    // Liouvillians are structurally near-symmetric.
    control_[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
    control_[UMFPACK_ORDERING] = UMFPACK_ORDERING_CHOLMOD;
    const auto n = static_cast<int>(a_.rows());
    const double* ax = reinterpret_cast<const double*>(a_.valuePtr());
    status_ = umfpack_zi_symbolic(n, n, a_.outerIndexPtr(), a_.innerIndexPtr(),
                                  ax, nullptr, &symbolic_, control_, info_);
    if (status_ != UMFPACK_OK) return;
    status_ = umfpack_zi_numeric(a_.outerIndexPtr(), a_.innerIndexPtr(), ax,
                                 nullptr, symbolic_, &numeric_, control_, info_);
    rcond_ = info_[UMFPACK_RCOND];
  }

  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;

  ~SparseLU() {
    if (numeric_) umfpack_zi_free_numeric(&numeric_);
    if (symbolic_) umfpack_zi_free_symbolic(&symbolic_);
  }

  bool ok() const { return status_ == UMFPACK_OK; }
  int status() const { return status_; }
  /// Reciprocal condition estimate from the pivots (min/max |U_ii|).
  double rcond() const { return rcond_; }

  Vector solve(const Vector& b) const {
    Vector x(b.size());
    double info[UMFPACK_INFO];
    const int s = umfpack_zi_solve(
        UMFPACK_A, a_.outerIndexPtr(), a_.innerIndexPtr(),
        reinterpret_cast<const double*>(a_.valuePtr()), nullptr,
        reinterpret_cast<double*>(x.data()), nullptr,
        reinterpret_cast<const double*>(b.data()), nullptr, numeric_,
        control_, info);
    if (s != UMFPACK_OK && s != UMFPACK_WARNING_singular_matrix) {
      throw Error("UMFPACK solve failed with status " + std::to_string(s));
    }
    return x;
  }

 private:
  SparseMatrix a_;
  double control_[UMFPACK_CONTROL];
  double info_[UMFPACK_INFO];
  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
  int status_ = UMFPACK_ERROR_internal_error;
  double rcond_ = 0.0;
};

}  // namespace omx::detail
