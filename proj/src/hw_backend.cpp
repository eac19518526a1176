#include "phasekit/hw_backend.hpp"

#include <cmath>
#include <numbers>

#include "phasekit/errors.hpp"
#include "phasekit/diagnostics.hpp"

namespace phasekit {
namespace {

const PlanarPoint& planar(const PhasePoint& p, const char* what) {
  const auto* q = std::get_if<PlanarPoint>(&p);
  if (!q) throw DomainError(std::string(what) + ": expected a planar phase-space point");
  return *q;
}

// Writes the k-th off-diagonal band of a matrix whose lower entries are
// E_n e^{i k arg} at (n+k, n). The recurrence for E_n is supplied by the
// caller through 'step', which returns E_{n+1} from (n, E_n, E_{n-1}).
template <class Step>
void fill_band(Matrix& m, int k, double e0, cplx phase, bool antihermitian_sign, Step step) {
  const int d = static_cast<int>(m.rows());
  double prev = 0.0;
  double curr = e0;
  for (int n = 0; n + k < d; ++n) {
    const cplx lower = curr * phase;
    m(n + k, n) = lower;
    if (k > 0) {
      cplx upper = std::conj(lower);
      if (antihermitian_sign && (k % 2 == 1)) upper = -upper;
      m(n, n + k) = upper;
    }
    const double next = step(n, curr, prev);
    prev = curr;
    curr = next;
  }
}

double ratio(int n, int k) {
  return std::sqrt((n + 1.0) / (n + 1.0 + k));
}

}  // namespace

HilbertOperator displacement_matrix(cplx xi, int n_max) {
  const BasisLabel b = BasisLabel::fock(n_max);
  Matrix m = Matrix::Zero(b.dim(), b.dim());
  const double r = std::abs(xi);
  const double x = r * r;
  const double arg = std::arg(xi);
  for (int k = 0; k <= n_max; ++k) {
    double e0;
    if (k == 0)
      e0 = std::exp(-0.5 * x);
    else if (r == 0.0)
      e0 = 0.0;
    else
      e0 = std::exp(-0.5 * x + k * std::log(r) - 0.5 * std::lgamma(k + 1.0));
    // <n+k|D|n> = sqrt(n!/(n+k)!) xi^k e^{-x/2} L_n^k(x); the band above the
    // diagonal carries (-xi^*)^k.
    fill_band(m, k, e0, std::polar(1.0, k * arg), true, [&](int n, double en, double em) {
      const double rn = ratio(n, k);
      const double back = n > 0 ? (n + k) * ratio(n - 1, k) * em : 0.0;
      return rn * ((2.0 * n + 1.0 + k - x) * en - back) / (n + 1.0);
    });
  }
  return {b, std::move(m)};
}

StateVector coherent_state_planar(cplx alpha, int n_max, bool warn_on_leakage) {
  const BasisLabel b = BasisLabel::fock(n_max);
  Vector v(b.dim());
  v(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n <= n_max; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  StateVector psi(b, std::move(v));
  if (warn_on_leakage) {
    const double leak = 1.0 - psi.norm() * psi.norm();
    if (leak > 1e-8)
      warn("leakage", "coherent state |alpha|=" + std::to_string(std::abs(alpha)) +
                          " loses norm beyond n_max=" + std::to_string(n_max), leak);
  }
  return psi;
}

double coherent_leakage(cplx alpha, int n_max) {
  const double n = coherent_state_planar(alpha, n_max, false).norm();
  return std::max(0.0, 1.0 - n * n);
}

cplx planar_harmonic(cplx xi, cplx alpha) {
  // xi alpha^* - xi^* alpha = 2i Im(xi alpha^*)
  return std::polar(1.0, 2.0 * std::imag(xi * std::conj(alpha)));
}

double tau_planar(cplx xi) { return std::exp(-std::norm(xi)); }

HilbertOperator sw_kernel_planar(int n_max, cplx alpha, double s) {
  if (s > 0.0)
    throw IllConditioned(
        "planar kernel with s > 0 is not a bounded operator; use the harmonic route "
        "(sw_symbol with an explicit xi cutoff)");
  if (s < -1.0) throw DomainError("planar kernel: s must lie in [-1, 0]");
  const BasisLabel b = BasisLabel::fock(n_max);
  Matrix m = Matrix::Zero(b.dim(), b.dim());

  const double one_minus_s = 1.0 - s;
  const double q = (s + 1.0) / (s - 1.0);
  const double a2 = std::norm(alpha);
  const double z = 4.0 * a2 / (one_minus_s * one_minus_s);
  const double c = 2.0 * std::sqrt(a2) / one_minus_s;
  const double arg = std::arg(alpha);
  const double log_front = std::log(2.0 / one_minus_s) - 2.0 * a2 / one_minus_s;

  // <n+k|Delta|n> = (2/(1-s)) sqrt(n!/(n+k)!) (2 alpha/(1-s))^k e^{-2|alpha|^2/(1-s)} M_n,
  // M_n = q^n L_n^k(4|alpha|^2/(1-s^2)), which stays finite at s = -1.
  for (int k = 0; k <= n_max; ++k) {
    double e0;
    if (k == 0)
      e0 = std::exp(log_front);
    else if (c == 0.0)
      e0 = 0.0;
    else
      e0 = std::exp(log_front + k * std::log(c) - 0.5 * std::lgamma(k + 1.0));
    fill_band(m, k, e0, std::polar(1.0, k * arg), false, [&](int n, double en, double em) {
      const double rn = ratio(n, k);
      const double back = n > 0 ? (n + k) * q * q * ratio(n - 1, k) * em : 0.0;
      return rn * (((2.0 * n + 1.0 + k) * q + z) * en - back) / (n + 1.0);
    });
  }
  return {b, std::move(m)};
}

QuadratureGrid default_planar_grid() { return planar_grid(7.0, 96, 96); }

HwBackend::HwBackend(int n_max) : HwBackend(n_max, default_planar_grid(), default_planar_grid()) {}

HwBackend::HwBackend(int n_max, QuadratureGrid alpha_grid, QuadratureGrid xi_grid)
    : n_max_(n_max), alpha_grid_(std::move(alpha_grid)), xi_grid_(std::move(xi_grid)) {
  if (n_max < 1) throw DomainError("HwBackend: n_max must be >= 1");
  if (alpha_grid_.kind != GridKind::Planar || xi_grid_.kind != GridKind::Planar)
    throw DomainError("HwBackend: grids must be planar");
}

std::string HwBackend::id() const { return "hw:n_max=" + std::to_string(n_max_); }

cplx HwBackend::xi(std::size_t k) const {
  return std::get<PlanarPoint>(xi_grid_.nodes.at(k)).alpha;
}

HarmonicIndex HwBackend::harmonic_index(std::size_t k) const { return PlanarXi{xi(k)}; }

double HwBackend::tau(std::size_t k) const { return tau_planar(xi(k)); }

cplx HwBackend::harmonic(std::size_t k, const PhasePoint& p) const {
  return planar_harmonic(xi(k), planar(p, "harmonic").alpha);
}

std::size_t HwBackend::conjugate_slot(std::size_t k, double& sign) const {
  if (xi_grid_.n_phi % 2 != 0)
    throw DomainError("conjugate_slot: xi grid needs an even number of angles");
  const std::size_t ring = k / xi_grid_.n_phi;
  const std::size_t a = k % xi_grid_.n_phi;
  sign = 1.0;
  return ring * xi_grid_.n_phi + (a + xi_grid_.n_phi / 2) % xi_grid_.n_phi;
}

HilbertOperator HwBackend::tensor_operator(std::size_t k) const {
  return displacement_matrix(xi(k), n_max_);
}

StateVector HwBackend::coherent_state(const PhasePoint& p) const {
  return coherent_state_planar(planar(p, "coherent_state").alpha, n_max_, false);
}

HilbertOperator HwBackend::sw_kernel(const PhasePoint& p, double s) const {
  return sw_kernel_planar(n_max_, planar(p, "sw_kernel").alpha, s);
}

HilbertOperator HwBackend::displacement(const PhasePoint& p) const {
  return displacement_matrix(planar(p, "displacement").alpha, n_max_);
}

HilbertOperator HwBackend::group_operator(const GroupElement& g) const {
  const auto* shift = std::get_if<PlanarShift>(&g);
  if (!shift) throw DomainError("HwBackend: group element must be a planar shift");
  return displacement_matrix(shift->gamma, n_max_);
}

PhasePoint HwBackend::act(const GroupElement& g, const PhasePoint& p) const {
  const auto* shift = std::get_if<PlanarShift>(&g);
  if (!shift) throw DomainError("HwBackend: group element must be a planar shift");
  return PlanarPoint{planar(p, "act").alpha + shift->gamma};
}

GroupElement HwBackend::random_group_element(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = std::sqrt(u(rng));
  const double a = 2.0 * std::numbers::pi * u(rng);
  return PlanarShift{std::polar(r, a)};
}

GroupElement HwBackend::representative(const PhasePoint& p) const {
  return PlanarShift{planar(p, "representative").alpha};
}

}  // namespace phasekit
