#include "phasekit/hilbert.hpp"

#include <cmath>
#include <random>

#include "phasekit/errors.hpp"

namespace phasekit {
namespace {

void require_same_basis(const BasisLabel& a, const BasisLabel& b, const char* what) {
  if (!(a == b))
    throw BasisMismatch(std::string(what) + ": " + a.describe() + " vs " + b.describe());
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

}  // namespace

BasisLabel BasisLabel::fock(int n_max) {
  if (n_max < 0) throw DomainError("fock basis: n_max must be >= 0");
  return {BasisKind::Fock, n_max};
}

BasisLabel BasisLabel::spin(int two_j) {
  if (two_j < 0) throw DomainError("spin basis: two_j must be >= 0");
  return {BasisKind::Spin, two_j};
}

std::string BasisLabel::describe() const {
  if (kind == BasisKind::Fock) return "fock(n_max=" + std::to_string(param) + ")";
  if (param % 2 == 0) return "spin(j=" + std::to_string(param / 2) + ")";
  return "spin(j=" + std::to_string(param) + "/2)";
}

HilbertOperator::HilbertOperator(BasisLabel basis, Matrix entries)
    : basis_(basis), m_(std::move(entries)) {
  if (m_.rows() != m_.cols()) throw BasisMismatch("operator matrix is not square");
  if (m_.rows() != basis_.dim())
    throw BasisMismatch("operator dimension " + std::to_string(m_.rows()) +
                        " does not match " + basis_.describe());
}

HilbertOperator HilbertOperator::zero(BasisLabel basis) {
  return {basis, Matrix::Zero(basis.dim(), basis.dim())};
}

HilbertOperator HilbertOperator::identity(BasisLabel basis) {
  return {basis, Matrix::Identity(basis.dim(), basis.dim())};
}

HilbertOperator& HilbertOperator::operator+=(const HilbertOperator& other) {
  require_same_basis(basis_, other.basis_, "operator +");
  m_ += other.m_;
  return *this;
}

HilbertOperator& HilbertOperator::operator-=(const HilbertOperator& other) {
  require_same_basis(basis_, other.basis_, "operator -");
  m_ -= other.m_;
  return *this;
}

HilbertOperator& HilbertOperator::operator*=(cplx factor) {
  m_ *= factor;
  return *this;
}

HilbertOperator operator+(HilbertOperator a, const HilbertOperator& b) { return a += b; }
HilbertOperator operator-(HilbertOperator a, const HilbertOperator& b) { return a -= b; }

HilbertOperator operator*(const HilbertOperator& a, const HilbertOperator& b) {
  require_same_basis(a.basis(), b.basis(), "operator *");
  return {a.basis(), a.matrix() * b.matrix()};
}

HilbertOperator operator*(cplx factor, HilbertOperator a) { return a *= factor; }

StateVector::StateVector(BasisLabel basis, Vector amplitudes)
    : basis_(basis), v_(std::move(amplitudes)) {
  if (v_.size() != basis_.dim())
    throw BasisMismatch("state length does not match " + basis_.describe());
  if (!v_.allFinite()) throw DomainError("state has non-finite amplitudes");
}

StateVector StateVector::basis_state(BasisLabel basis, int index) {
  if (index < 0 || index >= basis.dim()) throw DomainError("basis_state: index out of range");
  Vector v = Vector::Zero(basis.dim());
  v(index) = 1.0;
  return {basis, std::move(v)};
}

HilbertOperator StateVector::projector() const { return {basis_, v_ * v_.adjoint()}; }

DensityMatrix DensityMatrix::from_operator(HilbertOperator op) {
  if (hermiticity_defect(op) > 1e-12) throw DomainError("density matrix is not hermitian");
  if (std::abs(op.trace() - 1.0) > 1e-12) throw DomainError("density matrix trace is not 1");
  if (hermitian_eigenvalues(op.matrix()).minCoeff() < -1e-10)
    throw DomainError("density matrix has a negative eigenvalue");
  return DensityMatrix(std::move(op));
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw DomainError("pure state from a zero vector");
  HilbertOperator p = psi.projector();
  p *= 1.0 / (n * n);
  return DensityMatrix(std::move(p));
}

double DensityMatrix::purity() const { return trace_product(op_, op_).real(); }

cplx trace_product(const HilbertOperator& a, const HilbertOperator& b) {
  require_same_basis(a.basis(), b.basis(), "trace_product");
  const Matrix& x = a.matrix();
  const Matrix& y = b.matrix();
  const Eigen::Index d = x.rows();
  cplx sum = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    sum += x(i, i) * y(i, i);
    for (Eigen::Index j = i + 1; j < d; ++j) sum += x(i, j) * y(j, i) + x(j, i) * y(i, j);
  }
  return sum;
}

HilbertOperator adjoint(const HilbertOperator& a) { return {a.basis(), a.matrix().adjoint()}; }

HilbertOperator commutator(const HilbertOperator& a, const HilbertOperator& b) {
  require_same_basis(a.basis(), b.basis(), "commutator");
  return {a.basis(), a.matrix() * b.matrix() - b.matrix() * a.matrix()};
}

cplx matrix_expectation(const StateVector& u, const HilbertOperator& a) {
  require_same_basis(u.basis(), a.basis(), "matrix_expectation");
  return u.amplitudes().dot(a.matrix() * u.amplitudes());
}

DensityMatrix random_density(BasisLabel basis, int rank, std::uint64_t seed) {
  const int d = basis.dim();
  if (rank < 1 || rank > d) throw DomainError("random_density: rank must be in [1, dim]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, rank);
  for (int c = 0; c < rank; ++c)
    for (int r = 0; r < d; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = cplx(re, im);
    }
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  // Exact hermiticity, so downstream checks see zero defect.
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix::from_operator({basis, std::move(rho)});
}

HilbertOperator random_operator(BasisLabel basis, std::uint64_t seed, int support) {
  const int d = basis.dim();
  const int block = (support > 0 && support < d) ? support : d;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m = Matrix::Zero(d, d);
  for (int c = 0; c < block; ++c)
    for (int r = 0; r < block; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(r, c) = cplx(re, im) / static_cast<double>(block);
    }
  return {basis, std::move(m)};
}

DensityMatrix physical_projection(const HilbertOperator& a) {
  const Matrix h = 0.5 * (a.matrix() + a.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  Eigen::VectorXd lambda = solver.eigenvalues().cwiseMax(0.0);
  const double total = lambda.sum();
  if (!(total > 0.0)) throw DomainError("physical_projection: zero trace after clipping");
  lambda /= total;
  const Matrix& v = solver.eigenvectors();
  Matrix rho = v * lambda.cast<cplx>().asDiagonal() * v.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix::from_operator({a.basis(), std::move(rho)});
}

double trace_distance(const HilbertOperator& a, const HilbertOperator& b) {
  require_same_basis(a.basis(), b.basis(), "trace_distance");
  return 0.5 * hermitian_eigenvalues(a.matrix() - b.matrix()).cwiseAbs().sum();
}

double max_abs_diff(const HilbertOperator& a, const HilbertOperator& b) {
  require_same_basis(a.basis(), b.basis(), "max_abs_diff");
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

double hermiticity_defect(const HilbertOperator& a) {
  if (a.dim() == 0) return 0.0;
  return (a.matrix() - a.matrix().adjoint()).cwiseAbs().maxCoeff();
}

int spin_index(int two_j, int two_mu) {
  if (std::abs(two_mu) > two_j || (two_j - two_mu) % 2 != 0)
    throw DomainError("spin_index: invalid projection");
  return (two_j - two_mu) / 2;
}

HilbertOperator spin_jz(int two_j) {
  const BasisLabel b = BasisLabel::spin(two_j);
  Matrix m = Matrix::Zero(b.dim(), b.dim());
  for (int i = 0; i < b.dim(); ++i) m(i, i) = 0.5 * (two_j - 2 * i);
  return {b, std::move(m)};
}

HilbertOperator spin_jplus(int two_j) {
  const BasisLabel b = BasisLabel::spin(two_j);
  Matrix m = Matrix::Zero(b.dim(), b.dim());
  const double j = 0.5 * two_j;
  // J+ |j,mu> = sqrt(j(j+1) - mu(mu+1)) |j,mu+1>; index i holds mu = j - i.
  for (int i = 1; i < b.dim(); ++i) {
    const double mu = j - i;
    m(i - 1, i) = std::sqrt(j * (j + 1.0) - mu * (mu + 1.0));
  }
  return {b, std::move(m)};
}

HilbertOperator spin_jminus(int two_j) { return adjoint(spin_jplus(two_j)); }

HilbertOperator spin_jx(int two_j) {
  return cplx(0.5) * (spin_jplus(two_j) + spin_jminus(two_j));
}

HilbertOperator spin_jy(int two_j) {
  return cplx(0.0, -0.5) * (spin_jplus(two_j) - spin_jminus(two_j));
}

HilbertOperator boson_annihilation(int n_max) {
  const BasisLabel b = BasisLabel::fock(n_max);
  Matrix m = Matrix::Zero(b.dim(), b.dim());
  for (int n = 1; n <= n_max; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {b, std::move(m)};
}

HilbertOperator boson_creation(int n_max) { return adjoint(boson_annihilation(n_max)); }

HilbertOperator boson_number(int n_max) {
  const BasisLabel b = BasisLabel::fock(n_max);
  Matrix m = Matrix::Zero(b.dim(), b.dim());
  for (int n = 0; n <= n_max; ++n) m(n, n) = n;
  return {b, std::move(m)};
}

}  // namespace phasekit
