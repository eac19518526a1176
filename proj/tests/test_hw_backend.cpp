#include "support.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "phasekit/diagnostics.hpp"
#include "phasekit/errors.hpp"
#include "phasekit/hw_backend.hpp"
#include "phasekit/sw_core.hpp"

using namespace phasekit;
using doctest::Approx;

TEST_CASE("displacement_matrix frozen values") {
  const cplx xi(0.6, -0.8);
  const auto d = displacement_matrix(xi, 10);
  CHECK(std::abs(d(0, 0) - std::exp(-0.5 * std::norm(xi))) < 1e-15);
  CHECK(std::abs(d(1, 0) - xi * std::exp(-0.5 * std::norm(xi))) < 1e-15);
  CHECK(testing::max_diff(displacement_matrix(0.0, 10), HilbertOperator::identity(BasisLabel::fock(10))) == 0.0);
}

TEST_CASE("displacement_matrix matches the matrix exponential on the retained block") {
  // Exponentiate on a much larger space so the block n <= 30 is converged.
  const int big = 160, n = 30;
  for (cplx xi : {cplx(0.3, 0.2), cplx(-1.5, 0.7), cplx(2.2, -1.9)}) {
    const Matrix a = boson_annihilation(big).matrix();
    const Matrix gen = xi * a.adjoint() - std::conj(xi) * a;
    const Matrix ref = gen.exp();
    const auto d = displacement_matrix(xi, n);
    CHECK(testing::max_diff(d.matrix(), ref.topLeftCorner(n + 1, n + 1)) < 1e-12);
  }
}

TEST_CASE("displacement group law on the trusted block") {
  const int n_max = 40, trusted = 20;
  const cplx g(0.4, -0.3), xi(-0.7, 0.5);
  const Matrix lhs = displacement_matrix(g, n_max).matrix() * displacement_matrix(xi, n_max).matrix() *
                     displacement_matrix(-g, n_max).matrix();
  const Matrix rhs = std::exp(g * std::conj(xi) - std::conj(g) * xi) * displacement_matrix(xi, n_max).matrix();
  CHECK(testing::max_diff(lhs.topLeftCorner(trusted + 1, trusted + 1), rhs.topLeftCorner(trusted + 1, trusted + 1)) < 1e-9);
}

TEST_CASE("coherent states") {
  const auto vac = coherent_state_planar(0.0, 10);
  CHECK(vac.amplitudes()(0) == cplx(1.0));
  CHECK(vac.amplitudes().tail(10).norm() == 0.0);
  CHECK(coherent_state_planar(2.0, 40).norm() == Approx(1.0).epsilon(1e-12));
  const cplx a(0.5, 0.3), b(-0.2, 0.9);
  const cplx ov = coherent_state_planar(a, 40).amplitudes().dot(coherent_state_planar(b, 40).amplitudes());
  CHECK(std::norm(ov) == Approx(std::exp(-std::norm(a - b))).epsilon(1e-12));
  WarningCapture cap;
  coherent_state_planar(cplx(5.0, 0.0), 20);
  CHECK(cap.contains("leakage"));
  CHECK(coherent_leakage(cplx(5.0, 0.0), 20) > 1e-8);
}

TEST_CASE("planar harmonic and tau") {
  const cplx xi(0.8, -1.1), al(-0.4, 0.25);
  CHECK(planar_harmonic(0.0, al) == cplx(1.0));
  CHECK(std::abs(planar_harmonic(xi, al)) == Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(std::conj(planar_harmonic(xi, al)) - planar_harmonic(-xi, al)) < 1e-15);
  CHECK(tau_planar(0.0) == 1.0);
  CHECK(tau_planar(1.0) == Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(tau_planar(xi) == tau_planar(-xi));
}

TEST_CASE("<alpha|D(xi)|alpha> / tau^{1/2} = Y(xi, alpha)") {
  const cplx al(0.6, -0.2);
  const auto v = coherent_state_planar(al, 40).amplitudes();
  for (cplx xi : {cplx(0.3, 0.1), cplx(-1.2, 0.4), cplx(0.0, 2.0)}) {
    const cplx e = v.dot(displacement_matrix(xi, 40).matrix() * v);
    CHECK(std::abs(e / std::sqrt(tau_planar(xi)) - planar_harmonic(xi, al)) < 1e-9);
  }
}

TEST_CASE("planar kernel frozen values") {
  const auto q0 = sw_kernel_planar(12, 0.0, -1.0);
  CHECK(testing::max_diff(q0, StateVector::basis_state(BasisLabel::fock(12), 0).projector()) < 1e-15);
  const auto w0 = sw_kernel_planar(12, 0.0, 0.0);
  for (int n = 0; n <= 12; ++n) CHECK(w0(n, n).real() == Approx(n % 2 ? -2.0 : 2.0).epsilon(1e-15));
  CHECK(std::abs(w0.matrix().trace()) > 0.0);
  // Tr Delta = 1 for s < 0 once the geometric series has converged.
  for (double s : {-1.0, -0.6, -0.3}) {
    const auto k = sw_kernel_planar(120, cplx(0.3, 0.2), s);
    CHECK(std::abs(k.trace() - 1.0) < 1e-10);
  }
  CHECK_THROWS_AS(sw_kernel_planar(12, 0.0, 0.5), IllConditioned);
}

TEST_CASE("planar kernel equals the displaced parity construction") {
  const int n_max = 40, pad = 160;
  for (double s : {-1.0, -0.5, 0.0}) {
    const cplx al(0.9, -0.6);
    const double q = (s + 1.0) / (s - 1.0);
    Matrix diag = Matrix::Zero(pad + 1, pad + 1);
    for (int n = 0; n <= pad; ++n) diag(n, n) = std::pow(q, n);
    const Matrix d = displacement_matrix(al, pad).matrix();
    const Matrix ref = (2.0 / (1.0 - s)) * d * diag * d.adjoint();
    const auto k = sw_kernel_planar(n_max, al, s);
    CHECK(testing::max_diff(k.matrix(), ref.topLeftCorner(n_max + 1, n_max + 1)) < 1e-12);
    CHECK(hermiticity_defect(k) == 0.0);
  }
}

TEST_CASE("coherent-state anchor at n_max = 40") {
  HwBackend b(40);
  for (cplx al : {cplx(0.0, 0.0), cplx(1.0, 0.5), cplx(-2.0, 1.0)}) {
    const auto k = b.sw_kernel(PlanarPoint{al}, -1.0);
    const auto p = coherent_state_planar(al, 40).projector();
    CHECK(testing::max_diff(k, p) < 1e-8);
  }
}

TEST_CASE("backend plumbing") {
  HwBackend b(8);
  CHECK(b.id() == "hw:n_max=8");
  CHECK(b.harmonic_count() == b.xi_grid().size());
  double sign = 0.0;
  for (std::size_t k : {std::size_t(5), std::size_t(700), std::size_t(9000)}) {
    const std::size_t c = b.conjugate_slot(k, sign);
    const PhasePoint p = PlanarPoint{cplx(0.3, -0.7)};
    CHECK(std::abs(b.harmonic(c, p) - sign * std::conj(b.harmonic(k, p))) < 1e-14);
  }
  const auto g = b.representative(PlanarPoint{cplx(1.0, 2.0)});
  const auto p = b.act(g, PlanarPoint{cplx(0.0, 0.0)});
  CHECK(std::abs(std::get<PlanarPoint>(p).alpha - cplx(1.0, 2.0)) == 0.0);
}
