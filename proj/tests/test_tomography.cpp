#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "phasekit/errors.hpp"
#include "phasekit/hw_backend.hpp"
#include "phasekit/su2_backend.hpp"
#include "phasekit/tomography.hpp"

using namespace phasekit;
using doctest::Approx;

namespace {

std::vector<MeasurementRecord> only(const std::vector<MeasurementRecord>& rs, const RulerLabel& u) {
  std::vector<MeasurementRecord> out;
  for (const auto& r : rs)
    if (same_ruler(r.ruler, u)) out.push_back(r);
  return out;
}

double dot(const SphericalPoint& a, const SphericalPoint& b) {
  return std::sin(a.theta) * std::sin(b.theta) * std::cos(a.phi - b.phi) +
         std::cos(a.theta) * std::cos(b.theta);
}

}  // namespace

TEST_CASE("displaced projectors") {
  Su2Backend b(3);
  const SphericalPoint p{1.0, 0.5};
  const auto g = displaced_projector(b, reference_ruler(b), p);
  CHECK(testing::max_diff(g, b.sw_kernel(p, -1.0)) < 1e-13);
  const auto gm = displaced_projector(b, SpinMu{-1}, p);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gm.matrix());
  CHECK(es.eigenvalues()(3) == Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(es.eigenvalues()(0)) < 1e-13);
  CHECK(std::abs(gm.trace() - 1.0) < 1e-13);
  Matrix sum = Matrix::Zero(4, 4);
  for (std::size_t i = 0; i < b.grid().size(); ++i)
    sum += b.grid().weights[i] * displaced_projector(b, SpinMu{1}, b.grid().nodes[i]).matrix();
  CHECK(testing::max_diff(sum, Matrix::Identity(4, 4)) < 1e-12);
  std::mt19937_64 rng(4);
  const auto el = b.random_group_element(rng);
  const auto u = b.group_operator(el);
  CHECK(testing::max_diff(displaced_projector(b, SpinMu{1}, b.act(el, p)), u * displaced_projector(b, SpinMu{1}, p) * adjoint(u)) < 1e-12);
  HwBackend h(20);
  CHECK(testing::max_diff(displaced_projector(h, FockN{0}, PlanarPoint{cplx(0.4, 0.1)}),
                          coherent_state_planar(cplx(0.4, 0.1), 20).projector()) < 1e-14);
}

TEST_CASE("exact simulation of a coherent state") {
  Su2Backend b(4);
  const SphericalPoint p0{0.9, 2.2};
  const auto rho = DensityMatrix::pure(b.coherent_state(p0));
  const auto rs = simulate_measurements(b, rho, {reference_ruler(b)}, b.grid(), 0, 1.0, 1);
  REQUIRE(rs.size() == b.grid().size());
  for (const auto& r : rs)
    CHECK(r.probability == Approx(std::pow((1.0 + dot(std::get<SphericalPoint>(r.omega), p0)) / 2.0, 4)).epsilon(1e-12));
}

TEST_CASE("completeness at fixed point and non-negativity") {
  Su2Backend b(3);
  const auto rho = random_density(b.basis(), 4, 3);
  const auto set = complete_ruler_set(b);
  const auto rs = simulate_measurements(b, rho, set, b.grid(), 0, 1.0, 1);
  for (std::size_t i = 0; i < b.grid().size(); ++i) {
    double sum = 0.0;
    for (std::size_t r = 0; r < set.size(); ++r) {
      CHECK(rs[i * set.size() + r].probability >= 0.0);
      sum += rs[i * set.size() + r].probability;
    }
    CHECK(sum == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("simulation errors and determinism") {
  Su2Backend b(2);
  const auto rho = random_density(b.basis(), 3, 1);
  CHECK_THROWS_AS(simulate_measurements(b, rho, {SpinMu{2}}, b.grid(), 0, 0.0, 1), DomainError);
  CHECK_THROWS_AS(simulate_measurements(b, rho, {SpinMu{2}}, b.grid(), -1, 1.0, 1), DomainError);
  CHECK_THROWS_AS(simulate_measurements(b, rho, {SpinMu{2}}, b.grid(), 100, 1.0, 1), DomainError);
  CHECK_THROWS_AS(simulate_measurements(b, rho, {SpinMu{2}}, b.grid(), 0, 0.5, 1), DomainError);
  const auto a = simulate_measurements(b, rho, complete_ruler_set(b), b.grid(), 10000, 1.0, 42);
  const auto c = simulate_measurements(b, rho, complete_ruler_set(b), b.grid(), 10000, 1.0, 42);
  const auto d = simulate_measurements(b, rho, complete_ruler_set(b), b.grid(), 10000, 1.0, 43);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].probability == c[i].probability;
    differ = differ || a[i].probability != d[i].probability;
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("shot noise stays within the binomial bound") {
  Su2Backend b(2);
  const auto rho = random_density(b.basis(), 3, 2);
  const long long shots = 100000;
  const auto exact = simulate_measurements(b, rho, complete_ruler_set(b), b.grid(), 0, 1.0, 5);
  const auto noisy = simulate_measurements(b, rho, complete_ruler_set(b), b.grid(), shots, 1.0, 5);
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double p = exact[i].probability;
    const double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-12) / shots);
    worst = std::max(worst, std::abs(noisy[i].probability - p) / sigma);
    CHECK(noisy[i].shots == shots);
  }
  CHECK(worst < 6.0);
}

TEST_CASE("photon thinning") {
  std::vector<double> p{0.1, 0.2, 0.3, 0.25, 0.15};
  CHECK(thin_photon_distribution(p, 1.0) == p);
  const auto t = thin_photon_distribution(p, 0.6);
  double sum = 0.0;
  for (double v : t) sum += v;
  CHECK(sum == Approx(1.0).epsilon(1e-12));
  CHECK(t[4] == Approx(0.15 * std::pow(0.6, 4)).epsilon(1e-14));
  CHECK(t[3] == Approx(0.25 * std::pow(0.6, 3) + 4 * 0.15 * std::pow(0.6, 3) * 0.4).epsilon(1e-14));
  // A thinned coherent state is coherent with amplitude sqrt(eta) alpha.
  const int n = 60;
  const auto coh = coherent_state_planar(cplx(1.5, 0.0), n).amplitudes();
  std::vector<double> pn(n + 1);
  for (int k = 0; k <= n; ++k) pn[k] = std::norm(coh(k));
  const auto thinned = thin_photon_distribution(pn, 0.8);
  const auto ref = coherent_state_planar(cplx(1.5 * std::sqrt(0.8), 0.0), n).amplitudes();
  for (int k = 0; k <= 20; ++k) CHECK(std::abs(thinned[k] - std::norm(ref(k))) < 1e-14);
  CHECK_THROWS_AS(thin_photon_distribution(p, 1.2), DomainError);
}

TEST_CASE("kappa frozen values and defining relation") {
  Su2Backend half(1);
  CHECK(kappa_coefficient(half, SpinMu{-1}, SphericalLM{1, 0}) == Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(kappa_coefficient(half, SpinMu{1}, SphericalLM{1, 0}) == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  Su2Backend one(2);
  CHECK(std::abs(kappa_coefficient(one, SpinMu{0}, SphericalLM{1, 0})) < 1e-15);
  for (int two_j : {1, 2, 3, 4}) {
    Su2Backend b(two_j);
    const auto kt = kappa_table(b, reference_ruler(b));
    for (std::size_t k = 0; k < b.harmonic_count(); ++k) CHECK(kt[k] == Approx(std::sqrt(b.tau(k))).epsilon(1e-13));
    std::mt19937_64 rng(two_j);
    for (int two_mu = -two_j; two_mu <= two_j; two_mu += 2) {
      const auto ka = kappa_table(b, SpinMu{two_mu});
      const auto v = ruler_state(b, SpinMu{two_mu}).amplitudes();
      const SphericalPoint p{0.3 + 0.4 * (two_mu + two_j), 1.7};
      const Matrix t = b.displacement(p).matrix();
      for (std::size_t k = 0; k < b.harmonic_count(); ++k) {
        const cplx lhs = v.dot(t.adjoint() * b.tensor_operator(k).matrix() * t * v);
        CHECK(std::abs(lhs - ka[k] * b.harmonic(k, p)) < 1e-10);
      }
    }
  }
  HwBackend h(40);
  const cplx xi(0.7, -0.4);
  CHECK(kappa_coefficient(h, FockN{0}, PlanarXi{xi}) == Approx(std::exp(-0.5 * std::norm(xi))).epsilon(1e-15));
  CHECK(kappa_coefficient(h, FockN{7}, PlanarXi{0.0}) == Approx(1.0).epsilon(1e-15));
  for (int n : {0, 1, 3}) {
    const auto v = StateVector::basis_state(h.basis(), n).amplitudes();
    const PlanarPoint p{cplx(0.2, 0.3)};
    const Matrix t = h.displacement(p).matrix();
    const cplx lhs = v.dot(t.adjoint() * displacement_matrix(xi, 40).matrix() * t * v);
    CHECK(std::abs(lhs - kappa_coefficient(h, FockN{n}, PlanarXi{xi}) * planar_harmonic(xi, p.alpha)) < 1e-9);
  }
}

TEST_CASE("coefficient reconstruction from exact data") {
  Su2Backend b(3);
  const auto rho = random_density(b.basis(), 4, 12);
  const auto rs = simulate_measurements(b, rho, {SpinMu{3}}, b.grid(), 0, 1.0, 1);
  const auto c = reconstruct_coeffs(b, rs);
  const auto truth = b.decompose(rho.op());
  for (std::size_t k = 0; k < truth.size(); ++k) CHECK(std::abs(c.coeffs.value[k] - truth[k]) < 1e-11);
  CHECK(c.skipped.empty());
  const auto mixed = DensityMatrix::from_operator((1.0 / 4.0) * HilbertOperator::identity(b.basis()));
  const auto cm = reconstruct_coeffs(b, simulate_measurements(b, mixed, {SpinMu{-1}}, b.grid(), 0, 1.0, 1));
  for (std::size_t k = 1; k < truth.size(); ++k)
    if (cm.present[k]) CHECK(std::abs(cm.coeffs.value[k]) < 1e-12);
  CHECK(std::abs(cm.coeffs.value[0] - 0.5) < 1e-12);
  const auto rec = merge_and_reconstruct_density(b, {c}, &rho);
  REQUIRE(rec.trace_distance.has_value());
  CHECK(*rec.trace_distance < 1e-10);
  CHECK(rec.coverage == 1.0);
}

TEST_CASE("kappa zeros are skipped and reported") {
  Su2Backend b(2);
  const auto rho = random_density(b.basis(), 3, 6);
  const auto rs = simulate_measurements(b, rho, complete_ruler_set(b), b.grid(), 0, 1.0, 1);
  const auto c0 = reconstruct_coeffs(b, only(rs, SpinMu{0}));
  REQUIRE(c0.skipped.size() == 3);
  for (const auto& nu : c0.skipped) CHECK(std::get<SphericalLM>(nu).l == 1);
  CHECK_THROWS_AS(merge_and_reconstruct_density(b, {c0}), CoverageError);
  try {
    merge_and_reconstruct_density(b, {c0});
  } catch (const CoverageError& e) {
    CHECK(std::string(e.what()).find("l=1") != std::string::npos);
  }
  const auto c1 = reconstruct_coeffs(b, only(rs, SpinMu{2}));
  const auto rec = merge_and_reconstruct_density(b, {c0, c1}, &rho);
  CHECK(*rec.trace_distance < 1e-10);
  CHECK(rec.skipped.size() == 3);
  const auto all = reconstruct_all(b, rs);
  CHECK(all.size() == 3);
  CHECK(*merge_and_reconstruct_density(b, all, &rho).trace_distance < 1e-10);
  ReconstructOptions huge;
  huge.kappa_floor = 10.0;
  CHECK_THROWS_AS(reconstruct_coeffs(b, only(rs, SpinMu{0}), huge), CoverageError);
}

TEST_CASE("coverage errors name the missing region") {
  Su2Backend b(2);
  const auto rho = random_density(b.basis(), 2, 9);
  auto rs = simulate_measurements(b, rho, {SpinMu{2}}, b.grid(), 0, 1.0, 1);
  rs.erase(rs.begin() + 20, rs.begin() + 30);
  try {
    reconstruct_coeffs(b, rs);
    FAIL("expected a coverage error");
  } catch (const CoverageError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("missing region") != std::string::npos);
    CHECK(msg.find("theta") != std::string::npos);
  }
  auto dup = simulate_measurements(b, rho, {SpinMu{2}}, b.grid(), 0, 1.0, 1);
  dup.push_back(dup.front());
  CHECK_THROWS_AS(reconstruct_coeffs(b, dup), DomainError);
}

TEST_CASE("shot-limited reconstruction improves with shots") {
  Su2Backend b(1);
  const auto rho = random_density(b.basis(), 2, 77);
  auto dist = [&](long long shots, std::uint64_t seed) {
    const auto rs = simulate_measurements(b, rho, complete_ruler_set(b), b.grid(), shots, 1.0, seed);
    return *merge_and_reconstruct_density(b, reconstruct_all(b, rs), &rho).trace_distance;
  };
  std::vector<double> lo, hi;
  for (std::uint64_t seed = 1; seed <= 9; ++seed) {
    lo.push_back(dist(10000, seed));
    hi.push_back(dist(1000000, seed));
  }
  std::sort(lo.begin(), lo.end());
  std::sort(hi.begin(), hi.end());
  const double ratio = lo[4] / hi[4];
  CHECK(ratio > 5.0);
  CHECK(ratio < 20.0);
  const auto rs = simulate_measurements(b, rho, complete_ruler_set(b), b.grid(), 1000, 1.0, 3);
  const auto c = reconstruct_coeffs(b, only(rs, SpinMu{1}));
  CHECK(c.shots == 1000);
  CHECK(c.variance[1] > 0.0);
}

TEST_CASE("QPD reconstruction") {
  Su2Backend b(3);
  const auto rho = random_density(b.basis(), 3, 31);
  const auto rs = simulate_measurements(b, rho, {SpinMu{3}}, b.grid(), 0, 1.0, 1);
  for (double s : {-1.0, 0.0, 1.0}) {
    const auto direct = sw_symbol(b, rho.op(), s);
    const auto h = reconstruct_qpd(b, rs, s);
    const auto k = reconstruct_qpd_kernel(b, rs, s);
    for (std::size_t i = 0; i < direct.values.size(); ++i) {
      CHECK(std::abs(h.values[i] - direct.values[i]) < 1e-9);
      CHECK(std::abs(k.values[i] - direct.values[i]) < 1e-9);
    }
  }
  const auto mixed = DensityMatrix::from_operator(0.25 * HilbertOperator::identity(b.basis()));
  const auto f = reconstruct_qpd(b, simulate_measurements(b, mixed, {SpinMu{1}}, b.grid(), 0, 1.0, 1), 0.5);
  for (const auto& v : f.values) CHECK(std::abs(v - 0.25) < 1e-12);
  Su2Backend even(2);
  const auto r0 = simulate_measurements(even, random_density(even.basis(), 3, 2), {SpinMu{0}}, even.grid(), 0, 1.0, 1);
  CHECK_THROWS_AS(reconstruct_qpd(even, r0, 0.0), CoverageError);
  CHECK_THROWS_AS(reconstruct_qpd_kernel(even, r0, 0.0), CoverageError);
}

TEST_CASE("photon-counting series") {
  CHECK(photon_series_ratio(0.0, 1.0) == Approx(-1.0).epsilon(1e-15));
  CHECK(photon_series_ratio(-0.5, 1.0) == Approx((0.5) / (-1.5)).epsilon(1e-15));
  for (double s : {-0.9, -0.3, 0.2}) CHECK(photon_series_ratio(s, 1.0) == Approx((s + 1.0) / (s - 1.0)).epsilon(1e-14));
  CHECK(photon_series_ratio(0.0, 0.8) == Approx(-1.5).epsilon(1e-15));
  // Vacuum at the origin: W = 2.
  CHECK(photon_counting_series({1.0, 0.0, 0.0}, 0.0, 1.0).value == Approx(2.0));
  // Fock |1> at the origin: W = -2.
  CHECK(photon_counting_series({0.0, 1.0, 0.0}, 0.0, 1.0).value == Approx(-2.0));
  // Growing terms are rejected.
  CHECK_THROWS_AS(photon_counting_series({0.1, 0.2, 0.3, 0.4}, 0.0, 0.5), DivergentSeries);
  // Lossy series on a thinned coherent state reproduces the lossless W.
  HwBackend h(40);
  const cplx a0(0.5, 0.0);
  const auto rho = DensityMatrix::pure(coherent_state_planar(a0, 40));
  std::vector<RulerLabel> rulers;
  for (int n = 0; n <= 30; ++n) rulers.emplace_back(FockN{n});
  QuadratureGrid pts;
  pts.kind = GridKind::Planar;
  for (double x : {0.0, 0.3, 0.7}) {
    pts.nodes.push_back(PlanarPoint{cplx(x, 0.2)});
    pts.weights.push_back(1.0);
  }
  const auto rs = simulate_measurements(h, rho, rulers, pts, 0, 0.8, 1);
  const auto series = reconstruct_qpd_photon_counting(rs, 0.0);
  REQUIRE(series.size() == 3);
  for (const auto& sp : series) {
    const double d2 = std::norm(std::get<PlanarPoint>(sp.omega).alpha - a0);
    CHECK(sp.series.value == Approx(2.0 * std::exp(-2.0 * d2)).epsilon(1e-8));
  }
  auto gap = rs;
  gap.erase(gap.begin() + 3);
  CHECK_THROWS_AS(reconstruct_qpd_photon_counting(gap, 0.0), CoverageError);
}

TEST_CASE("operational convolution") {
  Su2Backend b(2);
  const auto rho = random_density(b.basis(), 3, 50);
  const auto ru = random_density(b.basis(), 1, 51);
  for (double s : {-1.0, 0.0, 0.5}) CHECK(operational_convolution_check(b, rho, ru, s, 16).max_abs_diff < 1e-9);
  HwBackend h(30);
  const auto c1 = DensityMatrix::pure(coherent_state_planar(cplx(0.3, -0.2), 30));
  const auto c0 = DensityMatrix::pure(StateVector::basis_state(h.basis(), 0));
  CHECK(operational_convolution_check(h, c1, c0, 0.0, 8).max_abs_diff < 1e-6);
  CHECK_THROWS_AS(operational_convolution_check(h, c1, c0, -1.0, 8), DomainError);
}

TEST_CASE("Wehrl entropy") {
  Su2Backend b(2, 3);
  const auto coh = DensityMatrix::pure(b.coherent_state(SphericalPoint{0.0, 0.0}));
  const auto mixed = DensityMatrix::from_operator((1.0 / 3.0) * HilbertOperator::identity(b.basis()));
  const auto fine = sphere_grid_nodes(2, 400, 64);
  auto q = [&](const DensityMatrix& r) {
    std::vector<double> p(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i)
      p[i] = displaced_projector(b, reference_ruler(b), fine.nodes[i]).matrix().cwiseProduct(r.op().matrix().transpose()).sum().real();
    return p;
  };
  const double sc = wehrl_entropy(fine, q(coh));
  CHECK(sc == Approx(2.0 / 3.0).epsilon(1e-8));
  const double sm = wehrl_entropy(fine, q(mixed));
  CHECK(sm > sc);
  CHECK(sm == Approx(std::log(3.0)).epsilon(1e-12));
  std::vector<double> bad(fine.size(), 0.1);
  bad[3] = -1e-6;
  CHECK_THROWS_AS(wehrl_entropy(fine, bad), DomainError);
}

TEST_CASE("localization operators") {
  Su2Backend b(2);
  const auto& g = b.grid();
  const auto one = localization_operator(b, SpinMu{0}, std::vector<double>(g.size(), 1.0));
  CHECK(testing::max_diff(one, HilbertOperator::identity(b.basis())) < 1e-10);
  std::vector<double> upper(g.size()), lower(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool up = std::get<SphericalPoint>(g.nodes[i]).theta < std::numbers::pi / 2;
    upper[i] = up ? 1.0 : 0.0;
    lower[i] = up ? 0.0 : 1.0;
  }
  const auto zu = localization_operator(b, SpinMu{2}, upper), zl = localization_operator(b, SpinMu{2}, lower);
  CHECK(testing::max_diff(zu + zl, HilbertOperator::identity(b.basis())) < 1e-10);
  CHECK(hermiticity_defect(zu) == 0.0);
  CHECK(testing::max_diff(localization_operator(b, SpinMu{2}, std::vector<double>(g.size(), 0.0)),
                          HilbertOperator::zero(b.basis())) == 0.0);
  CHECK_THROWS_AS(localization_operator(b, SpinMu{2}, std::vector<double>(3, 1.0)), DomainError);
}

TEST_CASE("completeness distance") {
  Su2Backend b(1);
  const auto r = random_density(b.basis(), 2, 1);
  const auto same = completeness_distance(b, r, r, reference_ruler(b));
  CHECK(same.trace_distance < 1e-14);
  CHECK(same.sup_p_gap < 1e-14);
  const auto up = DensityMatrix::pure(StateVector::basis_state(b.basis(), 0));
  const auto down = DensityMatrix::pure(StateVector::basis_state(b.basis(), 1));
  CHECK(completeness_distance(b, up, down, reference_ruler(b)).sup_p_gap > 0.4);
}

TEST_CASE("ruler change transports probabilities") {
  Su2Backend b(3);
  const auto rho = random_density(b.basis(), 4, 14);
  const auto pv = records_on_grid(b.grid(), simulate_measurements(b, rho, {SpinMu{3}}, b.grid(), 0, 1.0, 1));
  const auto pu = records_on_grid(b.grid(), simulate_measurements(b, rho, {SpinMu{-1}}, b.grid(), 0, 1.0, 1));
  const auto moved = ruler_change(b, pv, SpinMu{3}, SpinMu{-1});
  for (std::size_t i = 0; i < pu.size(); ++i) CHECK(std::abs(moved[i] - pu[i]) < 1e-9);
  Su2Backend even(2);
  const std::vector<double> flat(even.grid().size(), 1.0 / 3.0);
  CHECK_THROWS_AS(ruler_change(even, flat, SpinMu{0}, SpinMu{2}), CoverageError);
}

TEST_CASE("r-function coefficients") {
  Su2Backend b(1);
  const auto rho = random_density(b.basis(), 2, 3);
  const auto c = reconstruct_coeffs(b, simulate_measurements(b, rho, {SpinMu{1}}, b.grid(), 0, 1.0, 1));
  const auto r = rfunction_coefficients(b, c);
  const auto kt = kappa_table(b, SpinMu{1});
  for (std::size_t k = 0; k < r.size(); ++k) CHECK(std::abs(r[k] - c.coeffs.value[k] / kt[k]) < 1e-14);
}
