#pragma once

// Dense complex linear algebra on the finite Hilbert spaces used by the
// backends: a truncated Fock space or a spin-j multiplet.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>

namespace phasekit {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class BasisKind { Fock, Spin };

/// Basis of a finite Hilbert space. Fock{n_max} has dimension n_max + 1
/// (states |0>..|n_max>); Spin{two_j} has dimension two_j + 1 with states
/// ordered mu = j, j-1, ..., -j.
struct BasisLabel {
  BasisKind kind = BasisKind::Spin;
  int param = 0;

  static BasisLabel fock(int n_max);
  static BasisLabel spin(int two_j);

  int dim() const { return param + 1; }
  std::string describe() const;
  bool operator==(const BasisLabel&) const = default;
};

class HilbertOperator {
 public:
  HilbertOperator(BasisLabel basis, Matrix entries);

  static HilbertOperator zero(BasisLabel basis);
  static HilbertOperator identity(BasisLabel basis);

  const BasisLabel& basis() const { return basis_; }
  const Matrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  cplx operator()(int row, int col) const { return m_(row, col); }

  cplx trace() const { return m_.trace(); }

  HilbertOperator& operator+=(const HilbertOperator& other);
  HilbertOperator& operator-=(const HilbertOperator& other);
  HilbertOperator& operator*=(cplx factor);

 private:
  BasisLabel basis_;
  Matrix m_;
};

HilbertOperator operator+(HilbertOperator a, const HilbertOperator& b);
HilbertOperator operator-(HilbertOperator a, const HilbertOperator& b);
HilbertOperator operator*(const HilbertOperator& a, const HilbertOperator& b);
HilbertOperator operator*(cplx factor, HilbertOperator a);

class StateVector {
 public:
  StateVector(BasisLabel basis, Vector amplitudes);

  /// Basis vector |index> in storage order.
  static StateVector basis_state(BasisLabel basis, int index);

  const BasisLabel& basis() const { return basis_; }
  const Vector& amplitudes() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }

  /// Euclidean norm; never renormalized implicitly.
  double norm() const { return v_.norm(); }
  HilbertOperator projector() const;

 private:
  BasisLabel basis_;
  Vector v_;
};

/// Positive semidefinite, unit-trace hermitian operator.
class DensityMatrix {
 public:
  /// Validates hermiticity (1e-12), unit trace (1e-12) and positivity
  /// (smallest eigenvalue >= -1e-10); throws DomainError otherwise.
  static DensityMatrix from_operator(HilbertOperator op);
  static DensityMatrix pure(const StateVector& psi);

  const HilbertOperator& op() const { return op_; }
  const BasisLabel& basis() const { return op_.basis(); }
  int dim() const { return op_.dim(); }
  double purity() const;

 private:
  explicit DensityMatrix(HilbertOperator op) : op_(std::move(op)) {}
  HilbertOperator op_;
};

/// Tr(AB), summed symmetrically so that trace_product(A,B) and
/// trace_product(B,A) agree bit for bit.
cplx trace_product(const HilbertOperator& a, const HilbertOperator& b);
HilbertOperator adjoint(const HilbertOperator& a);
HilbertOperator commutator(const HilbertOperator& a, const HilbertOperator& b);
cplx matrix_expectation(const StateVector& u, const HilbertOperator& a);

/// Reproducible random state: normalized G G^dagger with G a d x rank matrix
/// of standard complex Gaussians drawn from a seeded mt19937_64.
DensityMatrix random_density(BasisLabel basis, int rank, std::uint64_t seed);

/// Random operator with standard complex Gaussian entries scaled by 1/d.
/// With support > 0 only the leading support x support block is filled.
HilbertOperator random_operator(BasisLabel basis, std::uint64_t seed, int support = -1);

/// Hermitize, clip negative eigenvalues, renormalize. Throws DomainError
/// when nothing positive remains.
DensityMatrix physical_projection(const HilbertOperator& a);

/// Half the trace norm of the hermitian part of (a - b).
double trace_distance(const HilbertOperator& a, const HilbertOperator& b);
double max_abs_diff(const HilbertOperator& a, const HilbertOperator& b);
double hermiticity_defect(const HilbertOperator& a);

// Angular momentum and boson ladder operators.
HilbertOperator spin_jz(int two_j);
HilbertOperator spin_jplus(int two_j);
HilbertOperator spin_jminus(int two_j);
HilbertOperator spin_jx(int two_j);
HilbertOperator spin_jy(int two_j);
HilbertOperator boson_annihilation(int n_max);
HilbertOperator boson_creation(int n_max);
HilbertOperator boson_number(int n_max);

/// Storage index of |j, mu> (mu = j maps to 0).
int spin_index(int two_j, int two_mu);

}  // namespace phasekit
