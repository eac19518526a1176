#include "support.hpp"

#include "phasekit/errors.hpp"
#include "phasekit/hilbert.hpp"
#include "phasekit/su2_backend.hpp"

using namespace phasekit;
using doctest::Approx;

TEST_CASE("basis labels") {
  CHECK(BasisLabel::fock(4).dim() == 5);
  CHECK(BasisLabel::spin(3).dim() == 4);
  CHECK(BasisLabel::spin(3).describe() == "spin(j=3/2)");
  CHECK_FALSE(BasisLabel::spin(2) == BasisLabel::fock(2));
}

TEST_CASE("trace_product frozen values") {
  const auto b = BasisLabel::spin(2);
  CHECK(trace_product(HilbertOperator::identity(b), HilbertOperator::identity(b)) == cplx(3.0));
  const auto p0 = StateVector::basis_state(b, 0).projector();
  const auto p1 = StateVector::basis_state(b, 1).projector();
  CHECK(trace_product(p0, p1) == cplx(0.0));
  for (int two_j : {1, 2, 5}) {
    double worst = 0.0;
    for (int l = 0; l <= two_j; ++l)
      for (int m = -l; m <= l; ++m)
        for (int lp = 0; lp <= two_j; ++lp)
          for (int mp = -lp; mp <= lp; ++mp) {
            const cplx t = trace_product(fano_multipole(two_j, l, m), adjoint(fano_multipole(two_j, lp, mp)));
            worst = std::max(worst, std::abs(t - ((l == lp && m == mp) ? 1.0 : 0.0)));
          }
    CHECK(worst < 1e-14);
  }
  CHECK_THROWS_AS(trace_product(p0, HilbertOperator::identity(BasisLabel::fock(2))), BasisMismatch);
}

TEST_CASE("trace_product is symmetric bit for bit") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = random_operator(BasisLabel::spin(5), seed);
    const auto b = random_operator(BasisLabel::spin(5), seed + 100);
    CHECK(trace_product(a, b) == trace_product(b, a));
  }
}

TEST_CASE("adjoint, commutator, expectation") {
  const auto n = boson_number(6);
  CHECK(matrix_expectation(StateVector::basis_state(BasisLabel::fock(6), 0), n) == cplx(0.0));
  const auto jz = spin_jz(4);
  CHECK(commutator(jz, jz).matrix().cwiseAbs().maxCoeff() == 0.0);
  CHECK(matrix_expectation(StateVector::basis_state(BasisLabel::spin(4), 0), jz).real() == Approx(2.0));
  // [Jx, Jy] = i Jz
  for (int two_j : {1, 2, 7}) {
    const auto c = commutator(spin_jx(two_j), spin_jy(two_j));
    CHECK(testing::max_diff(c, cplx(0.0, 1.0) * spin_jz(two_j)) < 1e-14);
  }
  // [a, a^dagger] = 1 away from the truncation edge
  const auto c = commutator(boson_annihilation(6), boson_creation(6));
  for (int i = 0; i < 6; ++i) CHECK(std::abs(c(i, i) - 1.0) < 1e-14);
  CHECK_THROWS_AS(commutator(jz, n), BasisMismatch);
  const auto a = random_operator(BasisLabel::fock(3), 7);
  CHECK(testing::max_diff(adjoint(adjoint(a)), a) == 0.0);
}

TEST_CASE("random_density contracts") {
  const auto b = BasisLabel::spin(4);
  const auto pure = random_density(b, 1, 11);
  CHECK(pure.purity() == Approx(1.0).epsilon(1e-12));
  const auto mixed = random_density(b, 5, 11);
  CHECK(mixed.purity() < 1.0);
  const auto again = random_density(b, 5, 11);
  CHECK(mixed.op().matrix() == again.op().matrix());
  Eigen::SelfAdjointEigenSolver<Matrix> es(mixed.op().matrix());
  CHECK(std::abs(es.eigenvalues().sum() - 1.0) < 1e-13);
  CHECK(es.eigenvalues().minCoeff() > -1e-14);
  CHECK_THROWS_AS(random_density(b, 0, 1), DomainError);
  CHECK_THROWS_AS(random_density(b, 6, 1), DomainError);
}

TEST_CASE("density matrix validation") {
  const auto b = BasisLabel::spin(1);
  Matrix m(2, 2);
  m << 1.1, 0.0, 0.0, -0.1;
  CHECK_THROWS_AS(DensityMatrix::from_operator({b, m}), DomainError);
  m << 0.5, 0.1, 0.2, 0.5;
  CHECK_THROWS_AS(DensityMatrix::from_operator({b, m}), DomainError);
  m << 0.6, 0.0, 0.0, 0.6;
  CHECK_THROWS_AS(DensityMatrix::from_operator({b, m}), DomainError);
}

TEST_CASE("physical_projection") {
  const auto b = BasisLabel::spin(1);
  Matrix m(2, 2);
  m << 1.1, 0.0, 0.0, -0.1;
  const auto p = physical_projection({b, m});
  CHECK(std::abs(p.op()(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(p.op()(1, 1)) < 1e-15);

  const auto rho = random_density(BasisLabel::spin(4), 5, 3);
  CHECK(testing::max_diff(physical_projection(rho.op()).op(), rho.op()) < 1e-14);
  const auto once = physical_projection(random_operator(BasisLabel::spin(4), 9));
  CHECK(testing::max_diff(physical_projection(once.op()).op(), once.op()) < 1e-14);

  Matrix eps = random_operator(BasisLabel::spin(4), 21).matrix();
  eps *= 1e-6 / eps.norm();
  const auto perturbed = physical_projection({rho.basis(), rho.op().matrix() + eps});
  CHECK(trace_distance(perturbed.op(), rho.op()) < 2e-6);
  CHECK_THROWS_AS(physical_projection(-1.0 * HilbertOperator::identity(b)), DomainError);
}

TEST_CASE("trace distance and hermiticity defect") {
  const auto b = BasisLabel::spin(1);
  const auto up = StateVector::basis_state(b, 0).projector();
  const auto down = StateVector::basis_state(b, 1).projector();
  CHECK(trace_distance(up, down) == Approx(1.0));
  CHECK(trace_distance(up, up) == 0.0);
  CHECK(hermiticity_defect(spin_jy(3)) == 0.0);
  CHECK(hermiticity_defect(boson_annihilation(3)) > 0.0);
}
