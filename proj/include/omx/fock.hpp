#pragma once

// Truncated Fock-space operator algebra.
//
// Mode order is fixed at construction: cavity modes first, the mechanical
// mode last. Column index of a basis state is the row-major flattening of
// the occupation tuple (last mode fastest).

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace omx {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or mode-index mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A truncated basis is too small for the requested state.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class HilbertSpace {
 public:
  explicit HilbertSpace(std::vector<int> dims);

  std::size_t modes() const { return dims_.size(); }
  int dim(std::size_t mode) const;
  int total_dim() const { return total_; }
  std::span<const int> dims() const { return dims_; }

  /// Flat basis index of an occupation tuple.
  int index(std::span<const int> occupations) const;

  /// Product of the dims after `mode` (the index stride of that mode).
  int stride(std::size_t mode) const;

  std::string describe() const;

  bool operator==(const HilbertSpace&) const = default;

 private:
  std::vector<int> dims_;
  int total_ = 1;
};

class Operator {
 public:
  Operator(HilbertSpace space, SparseMatrix matrix);

  const HilbertSpace& space() const { return space_; }
  const SparseMatrix& matrix() const { return matrix_; }

  Operator adjoint() const;

  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(Complex s, const Operator& a);
  friend Operator operator*(const Operator& a, Complex s) { return s * a; }

 private:
  HilbertSpace space_;
  SparseMatrix matrix_;
};

class StateVector {
 public:
  StateVector(HilbertSpace space, Vector amplitudes);

  const HilbertSpace& space() const { return space_; }
  const Vector& amplitudes() const { return amplitudes_; }

  double norm() const { return amplitudes_.norm(); }
  StateVector normalized() const;

  friend StateVector operator+(const StateVector& a, const StateVector& b);
  friend StateVector operator*(Complex s, const StateVector& a);

 private:
  HilbertSpace space_;
  Vector amplitudes_;
};

/// Deviation of a density matrix from the physical set.
struct StateValidity {
  double trace_error = 0.0;        // |Tr rho - 1|
  double hermiticity_error = 0.0;  // max |rho - rho^dagger|
  double min_eigenvalue = 0.0;

  /// Default bounds: trace 1e-9, Hermiticity 1e-10, eigenvalue -1e-8.
  bool ok(double trace_tol = 1e-9, double herm_tol = 1e-10,
          double eig_floor = -1e-8) const {
    return trace_error <= trace_tol && hermiticity_error <= herm_tol &&
           min_eigenvalue >= eig_floor;
  }
};

class DensityMatrix {
 public:
  DensityMatrix(HilbertSpace space, DenseMatrix matrix);

  static DensityMatrix pure(const StateVector& psi);

  const HilbertSpace& space() const { return space_; }
  const DenseMatrix& matrix() const { return matrix_; }

  Complex trace() const { return matrix_.trace(); }
  StateValidity validity() const;

 private:
  HilbertSpace space_;
  DenseMatrix matrix_;
};

// Single-mode building blocks.
SparseMatrix lowering_matrix(int dim);
DenseMatrix displacement_matrix(int dim, double beta);

/// Kronecker product, `a` on the slow index.
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);

/// Embed a single-mode matrix at `mode`, identities elsewhere.
Operator embed(const HilbertSpace& space, std::size_t mode,
               const SparseMatrix& local);

Operator identity(const HilbertSpace& space);
Operator annihilation(const HilbertSpace& space, std::size_t mode);
Operator creation(const HilbertSpace& space, std::size_t mode);
Operator number(const HilbertSpace& space, std::size_t mode);

/// exp(beta (b^dagger - b)) on `mode`, by dense exponential of the truncated
/// generator. Exactly unitary on the truncated space; agrees with the
/// untruncated displacement only away from the top Fock levels.
Operator displacement(const HilbertSpace& space, std::size_t mode, double beta);

/// Kronecker product in the given order; the result lives on the
/// concatenation of the factor spaces.
Operator tensor(std::span<const Operator> factors);
StateVector tensor(std::span<const StateVector> factors);

StateVector fock_state(const HilbertSpace& space,
                       std::span<const int> occupations);

/// Tr(op rho).
Complex expectation(const Operator& op, const DensityMatrix& rho);

/// Mechanical truncation heuristic for a state displaced by at most
/// `max_displacement` on top of a thermal occupation `n_th` and Fock
/// excitations up to `k_max`: ceil(x^2 + 6x + 10) with
/// x = max_displacement + sqrt(n_th) + sqrt(k_max).
int recommended_mechanical_dim(double max_displacement, double n_th,
                               int k_max = 0);

}  // namespace omx
