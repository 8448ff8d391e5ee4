#include "omx/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace omx {

namespace {

void require_same_space(const HilbertSpace& a, const HilbertSpace& b,
                        const char* what) {
  if (!(a == b)) {
    throw DimensionError(std::string(what) + ": operand spaces differ (" +
                         a.describe() + " vs " + b.describe() + ")");
  }
}

}  // namespace

HilbertSpace::HilbertSpace(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) {
    throw DimensionError("HilbertSpace needs at least one mode");
  }
  for (int d : dims_) {
    if (d < 2) {
      throw DimensionError("every mode dimension must be >= 2, got " +
                           std::to_string(d));
    }
    total_ *= d;
  }
}

int HilbertSpace::dim(std::size_t mode) const {
  if (mode >= dims_.size()) {
    throw DimensionError("mode index " + std::to_string(mode) +
                         " out of range for " + describe());
  }
  return dims_[mode];
}

int HilbertSpace::stride(std::size_t mode) const {
  dim(mode);
  int s = 1;
  for (std::size_t m = mode + 1; m < dims_.size(); ++m) s *= dims_[m];
  return s;
}

int HilbertSpace::index(std::span<const int> occupations) const {
  if (occupations.size() != dims_.size()) {
    throw DimensionError("occupation tuple has wrong length for " +
                         describe());
  }
  int idx = 0;
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    if (occupations[m] < 0 || occupations[m] >= dims_[m]) {
      throw DimensionError("occupation " + std::to_string(occupations[m]) +
                           " out of range for mode " + std::to_string(m) +
                           " of " + describe());
    }
    idx = idx * dims_[m] + occupations[m];
  }
  return idx;
}

std::string HilbertSpace::describe() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    if (m) os << ',';
    os << dims_[m];
  }
  os << ']';
  return os.str();
}

Operator::Operator(HilbertSpace space, SparseMatrix matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != space_.total_dim() ||
      matrix_.cols() != space_.total_dim()) {
    throw DimensionError("operator matrix shape does not match " +
                         space_.describe());
  }
  matrix_.makeCompressed();
}

Operator Operator::adjoint() const {
  return Operator(space_, SparseMatrix(matrix_.adjoint()));
}

Operator operator+(const Operator& a, const Operator& b) {
  require_same_space(a.space_, b.space_, "operator +");
  return Operator(a.space_, SparseMatrix(a.matrix_ + b.matrix_));
}

Operator operator-(const Operator& a, const Operator& b) {
  require_same_space(a.space_, b.space_, "operator -");
  return Operator(a.space_, SparseMatrix(a.matrix_ - b.matrix_));
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_space(a.space_, b.space_, "operator *");
  return Operator(a.space_, SparseMatrix(a.matrix_ * b.matrix_));
}

Operator operator*(Complex s, const Operator& a) {
  return Operator(a.space_, SparseMatrix(s * a.matrix_));
}

StateVector::StateVector(HilbertSpace space, Vector amplitudes)
    : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != space_.total_dim()) {
    throw DimensionError("state vector length does not match " +
                         space_.describe());
  }
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw Error("cannot normalize the zero vector");
  return StateVector(space_, amplitudes_ / n);
}

StateVector operator+(const StateVector& a, const StateVector& b) {
  require_same_space(a.space_, b.space_, "state +");
  return StateVector(a.space_, a.amplitudes_ + b.amplitudes_);
}

StateVector operator*(Complex s, const StateVector& a) {
  return StateVector(a.space_, s * a.amplitudes_);
}

DensityMatrix::DensityMatrix(HilbertSpace space, DenseMatrix matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != space_.total_dim() ||
      matrix_.cols() != space_.total_dim()) {
    throw DimensionError("density matrix shape does not match " +
                         space_.describe());
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  const Vector& v = psi.amplitudes();
  return DensityMatrix(psi.space(), v * v.adjoint());
}

StateValidity DensityMatrix::validity() const {
  StateValidity v;
  v.trace_error = std::abs(matrix_.trace() - Complex(1.0, 0.0));
  v.hermiticity_error = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  const DenseMatrix herm = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(herm, Eigen::EigenvaluesOnly);
  v.min_eigenvalue = es.eigenvalues().minCoeff();
  return v;
}

SparseMatrix lowering_matrix(int dim) {
  if (dim < 2) throw DimensionError("mode dimension must be >= 2");
  SparseMatrix a(dim, dim);
  a.reserve(Eigen::VectorXi::Constant(dim, 1));
  for (int n = 1; n < dim; ++n) {
    a.insert(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  a.makeCompressed();
  return a;
}

DenseMatrix displacement_matrix(int dim, double beta) {
  if (!std::isfinite(beta)) throw Error("displacement beta must be finite");
  const DenseMatrix b = DenseMatrix(lowering_matrix(dim));
  if (beta == 0.0) return DenseMatrix::Identity(dim, dim);
  const DenseMatrix generator = beta * (b.adjoint() - b);
  return generator.exp();
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  const Eigen::Index nb_rows = b.rows();
  const Eigen::Index nb_cols = b.cols();
  SparseMatrix out(a.rows() * nb_rows, a.cols() * nb_cols);
  out.reserve(static_cast<Eigen::Index>(a.nonZeros()) * b.nonZeros());

  // Column-major fill: result column (ja, jb) holds rows (ia, ib) in
  // increasing order because both factors iterate sorted.
  for (Eigen::Index ja = 0; ja < a.outerSize(); ++ja) {
    for (Eigen::Index jb = 0; jb < b.outerSize(); ++jb) {
      const Eigen::Index col = ja * nb_cols + jb;
      out.startVec(col);
      for (SparseMatrix::InnerIterator ia(a, ja); ia; ++ia) {
        for (SparseMatrix::InnerIterator ib(b, jb); ib; ++ib) {
          out.insertBack(ia.row() * nb_rows + ib.row(), col) =
              ia.value() * ib.value();
        }
      }
    }
  }
  out.finalize();
  return out;
}

namespace {

SparseMatrix sparse_identity(int n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

}  // namespace

Operator embed(const HilbertSpace& space, std::size_t mode,
               const SparseMatrix& local) {
  const int d = space.dim(mode);
  if (local.rows() != d || local.cols() != d) {
    throw DimensionError("local operator does not match mode dimension");
  }
  const int left = space.total_dim() / (d * space.stride(mode));
  const int right = space.stride(mode);
  SparseMatrix m = local;
  if (right > 1) m = kron(m, sparse_identity(right));
  if (left > 1) m = kron(sparse_identity(left), m);
  return Operator(space, std::move(m));
}

Operator identity(const HilbertSpace& space) {
  return Operator(space, sparse_identity(space.total_dim()));
}

Operator annihilation(const HilbertSpace& space, std::size_t mode) {
  return embed(space, mode, lowering_matrix(space.dim(mode)));
}

Operator creation(const HilbertSpace& space, std::size_t mode) {
  return annihilation(space, mode).adjoint();
}

Operator number(const HilbertSpace& space, std::size_t mode) {
  const int d = space.dim(mode);
  SparseMatrix n(d, d);
  n.reserve(Eigen::VectorXi::Constant(d, 1));
  for (int k = 1; k < d; ++k) n.insert(k, k) = static_cast<double>(k);
  n.makeCompressed();
  return embed(space, mode, n);
}

Operator displacement(const HilbertSpace& space, std::size_t mode,
                      double beta) {
  const DenseMatrix local = displacement_matrix(space.dim(mode), beta);
  return embed(space, mode, SparseMatrix(local.sparseView(0.0, 0.0)));
}

Operator tensor(std::span<const Operator> factors) {
  if (factors.empty()) throw DimensionError("tensor needs at least one factor");
  std::vector<int> dims;
  SparseMatrix m;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto fd = factors[i].space().dims();
    dims.insert(dims.end(), fd.begin(), fd.end());
    m = i == 0 ? factors[i].matrix() : kron(m, factors[i].matrix());
  }
  return Operator(HilbertSpace(std::move(dims)), std::move(m));
}

StateVector tensor(std::span<const StateVector> factors) {
  if (factors.empty()) throw DimensionError("tensor needs at least one factor");
  std::vector<int> dims;
  Vector v;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto fd = factors[i].space().dims();
    dims.insert(dims.end(), fd.begin(), fd.end());
    if (i == 0) {
      v = factors[i].amplitudes();
    } else {
      const Vector& w = factors[i].amplitudes();
      Vector next(v.size() * w.size());
      for (Eigen::Index a = 0; a < v.size(); ++a) {
        next.segment(a * w.size(), w.size()) = v(a) * w;
      }
      v = std::move(next);
    }
  }
  return StateVector(HilbertSpace(std::move(dims)), std::move(v));
}

StateVector fock_state(const HilbertSpace& space,
                       std::span<const int> occupations) {
  Vector v = Vector::Zero(space.total_dim());
  v(space.index(occupations)) = 1.0;
  return StateVector(space, std::move(v));
}

Complex expectation(const Operator& op, const DensityMatrix& rho) {
  require_same_space(op.space(), rho.space(), "expectation");
  // Tr(A rho) = sum_ij A_ij rho_ji
  Complex acc = 0.0;
  const SparseMatrix& a = op.matrix();
  const DenseMatrix& r = rho.matrix();
  for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
      acc += it.value() * r(j, it.row());
    }
  }
  return acc;
}

int recommended_mechanical_dim(double max_displacement, double n_th, int k_max) {
  if (max_displacement < 0.0 || n_th < 0.0 || k_max < 0) {
    throw Error("truncation heuristic needs non-negative inputs");
  }
  const double x = max_displacement + std::sqrt(n_th) + std::sqrt(k_max);
  return static_cast<int>(std::ceil(x * x + 6.0 * x + 10.0));
}

}  // namespace omx
