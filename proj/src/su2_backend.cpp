#include "phasekit/su2_backend.hpp"

#include <cmath>
#include <numbers>

#include "phasekit/errors.hpp"
#include "phasekit/parallel.hpp"
#include "phasekit/specfun.hpp"

namespace phasekit {

using specfun::HalfInteger;
using specfun::legendre_index;

namespace {

const SphericalPoint& spherical(const PhasePoint& p, const char* what) {
  const auto* q = std::get_if<SphericalPoint>(&p);
  if (!q) throw DomainError(std::string(what) + ": expected a spherical phase-space point");
  return *q;
}

void check_lm(int two_j, int l, int m, const char* what) {
  if (two_j < 0) throw DomainError(std::string(what) + ": two_j must be >= 0");
  if (l < 0 || l > two_j || std::abs(m) > l)
    throw DomainError(std::string(what) + ": need 0 <= l <= 2j and |m| <= l");
}

// Column range and values of the m >= 0 band of a Fano multipole.
std::vector<double> positive_band(int two_j, int l, int m) {
  const int d = two_j + 1;
  const double scale = std::sqrt((2.0 * l + 1.0) / (two_j + 1.0));
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(d - m));
  for (int col = m; col < d; ++col) {
    const int row = col - m;
    v.push_back(scale * specfun::clebsch_gordan(HalfInteger(two_j), HalfInteger(two_j - 2 * col),
                                                HalfInteger(2 * l), HalfInteger(2 * m),
                                                HalfInteger(two_j), HalfInteger(two_j - 2 * row)));
  }
  return v;
}

// Sum over harmonics of c_lm Y_lm / norm given a Legendre table at theta and
// the phases e^{i m phi}.
cplx harmonic_sum(const std::vector<cplx>& c, const std::vector<double>& p, int lmax,
                  const std::vector<cplx>& phase) {
  cplx sum = 0.0;
  for (int l = 0; l <= lmax; ++l) {
    const std::size_t base = static_cast<std::size_t>(l * l + l);
    sum += c[base] * p[legendre_index(l, 0)];
    for (int m = 1; m <= l; ++m) {
      const double plm = p[legendre_index(l, m)];
      const cplx pos = c[base + m] * phase[m];
      const cplx neg = c[base - m] * std::conj(phase[m]);
      sum += plm * (pos + ((m % 2 == 0) ? neg : -neg));
    }
  }
  return sum;
}

}  // namespace

StateVector spin_coherent_state(int two_j, double theta, double phi) {
  const BasisLabel b = BasisLabel::spin(two_j);
  Vector v(b.dim());
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const double lf = specfun::log_factorial(two_j);
  for (int i = 0; i <= two_j; ++i) {
    const double binom =
        std::exp(0.5 * (lf - specfun::log_factorial(i) - specfun::log_factorial(two_j - i)));
    const double mu = 0.5 * (two_j - 2 * i);
    v(i) = binom * std::pow(c, two_j - i) * std::pow(s, i) * std::polar(1.0, -mu * phi);
  }
  return {b, std::move(v)};
}

double tau_spin(int two_j, int l) {
  if (two_j < 0 || l < 0) throw DomainError("tau_spin: negative argument");
  if (l > two_j) return 0.0;
  using specfun::log_factorial;
  return std::exp(std::log(two_j + 1.0) + 2.0 * log_factorial(two_j) -
                  log_factorial(two_j + l + 1) - log_factorial(two_j - l));
}

HilbertOperator fano_multipole(int two_j, int l, int m) {
  check_lm(two_j, l, m, "fano_multipole");
  const BasisLabel b = BasisLabel::spin(two_j);
  Matrix out = Matrix::Zero(b.dim(), b.dim());
  const int am = std::abs(m);
  const auto band = positive_band(two_j, l, am);
  for (std::size_t i = 0; i < band.size(); ++i) {
    const int col = am + static_cast<int>(i);
    if (m >= 0)
      out(col - am, col) = band[i];
    else  // D_{l,-m} = (-1)^m D_lm^dagger
      out(col, col - am) = (am % 2 == 0) ? band[i] : -band[i];
  }
  return {b, std::move(out)};
}

cplx su2_harmonic(int two_j, int l, int m, double theta, double phi) {
  check_lm(two_j, l, m, "su2_harmonic");
  return std::sqrt(4.0 * std::numbers::pi / (two_j + 1.0)) *
         specfun::spherical_harmonic(l, m, theta, phi);
}

HilbertOperator rotation_operator(int two_j, double alpha, double beta, double gamma) {
  const BasisLabel b = BasisLabel::spin(two_j);
  Matrix u(b.dim(), b.dim());
  for (int r = 0; r <= two_j; ++r) {
    const int two_mp = two_j - 2 * r;
    for (int c = 0; c <= two_j; ++c) {
      const int two_m = two_j - 2 * c;
      // <mu'| e^{i beta Jy} |mu> = d^j_{mu' mu}(-beta)
      const double d = specfun::wigner_small_d(HalfInteger(two_j), HalfInteger(two_mp),
                                               HalfInteger(two_m), -beta);
      u(r, c) = d * std::polar(1.0, 0.5 * (alpha * two_mp + gamma * two_m));
    }
  }
  return {b, std::move(u)};
}

SphericalPoint rotate_point(const EulerAngles& g, const SphericalPoint& p) {
  double x = std::sin(p.theta) * std::cos(p.phi);
  double y = std::sin(p.theta) * std::sin(p.phi);
  double z = std::cos(p.theta);
  auto rz = [&](double a) {
    const double nx = x * std::cos(a) - y * std::sin(a);
    const double ny = x * std::sin(a) + y * std::cos(a);
    x = nx;
    y = ny;
  };
  auto ry = [&](double a) {
    const double nx = x * std::cos(a) + z * std::sin(a);
    const double nz = -x * std::sin(a) + z * std::cos(a);
    x = nx;
    z = nz;
  };
  // e^{i a Jz} acts on the sphere as a rotation by -a.
  rz(-g.gamma);
  ry(-g.beta);
  rz(-g.alpha);
  const double theta = std::atan2(std::hypot(x, y), z);
  double phi = std::atan2(y, x);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  if (phi >= 2.0 * std::numbers::pi) phi -= 2.0 * std::numbers::pi;
  return {theta, phi};
}

Su2Backend::Su2Backend(int two_j, int level) : Su2Backend(two_j, sphere_grid(two_j, level)) {}

Su2Backend::Su2Backend(int two_j, QuadratureGrid grid) : two_j_(two_j), grid_(std::move(grid)) {
  if (two_j < 0) throw DomainError("Su2Backend: two_j must be >= 0");
  if (grid_.kind != GridKind::Sphere || grid_.two_j != two_j)
    throw DomainError("Su2Backend: grid must be a sphere grid for the same j");
  norm_ = std::sqrt(4.0 * std::numbers::pi / (two_j + 1.0));
  build();
}

void Su2Backend::build() {
  const int lmax = two_j_;
  for (int l = 0; l <= lmax; ++l) {
    tau_.push_back(tau_spin(two_j_, l));
    for (int m = -l; m <= l; ++m) index_.push_back({l, m});
  }
  bands_.resize(index_.size());
  for (int l = 0; l <= lmax; ++l) {
    for (int m = 0; m <= l; ++m) {
      Band pos{m, m, positive_band(two_j_, l, m)};
      if (m > 0) {
        Band neg{-m, 0, pos.values};
        if (m % 2 == 1)
          for (double& v : neg.values) v = -v;
        bands_[slot(l, -m)] = std::move(neg);
      }
      bands_[slot(l, m)] = std::move(pos);
    }
  }
  const int d = two_j_ + 1;
  multipoles_.reserve(index_.size());
  for (const auto& band : bands_) {
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < band.values.size(); ++i) {
      const int col = band.first_col + static_cast<int>(i);
      m(col - band.m, col) = band.values[i];
    }
    multipoles_.emplace_back(basis(), std::move(m));
  }
  for (int r = 0; r < grid_.n_rings; ++r)
    ring_legendre_.push_back(specfun::normalized_legendre_table(lmax, grid_.ring_coord[r]));
  phase_table_.resize(static_cast<std::size_t>(grid_.n_phi) * (lmax + 1));
  for (int k = 0; k < grid_.n_phi; ++k)
    for (int m = 0; m <= lmax; ++m)
      phase_table_[static_cast<std::size_t>(k) * (lmax + 1) + m] = std::polar(1.0, m * grid_.phi(k));
}

const HilbertOperator& Su2Backend::multipole(int l, int m) const {
  check_lm(two_j_, l, m, "multipole");
  return multipoles_[slot(l, m)];
}

std::string Su2Backend::id() const { return "su2:two_j=" + std::to_string(two_j_); }

cplx Su2Backend::harmonic(std::size_t k, const PhasePoint& p) const {
  const auto& pt = spherical(p, "harmonic");
  const auto& lm = index_.at(k);
  return norm_ * specfun::spherical_harmonic(lm.l, lm.m, pt.theta, pt.phi);
}

std::size_t Su2Backend::conjugate_slot(std::size_t k, double& sign) const {
  const auto& lm = index_.at(k);
  sign = (std::abs(lm.m) % 2 == 0) ? 1.0 : -1.0;
  return slot(lm.l, -lm.m);
}

StateVector Su2Backend::coherent_state(const PhasePoint& p) const {
  const auto& pt = spherical(p, "coherent_state");
  return spin_coherent_state(two_j_, pt.theta, pt.phi);
}

HilbertOperator Su2Backend::sw_kernel(const PhasePoint& p, double s) const {
  const auto& pt = spherical(p, "sw_kernel");
  const int lmax = two_j_;
  const auto table = specfun::normalized_legendre_table(lmax, pt.theta);
  const int d = two_j_ + 1;
  Matrix out = Matrix::Zero(d, d);
  for (int l = 0; l <= lmax; ++l) {
    const double scale = std::pow(tau_[l], -0.5 * s) * norm_;
    for (int m = -l; m <= l; ++m) {
      const int am = std::abs(m);
      cplx y = table[legendre_index(l, am)] * std::polar(1.0, m * pt.phi);
      if (m < 0 && am % 2 == 1) y = -y;
      const Band& band = bands_[slot(l, m)];
      // Delta = sum tau^{-s/2} Y_lm D_lm^dagger; D^dagger puts band entry
      // (col - m, col) at (col, col - m).
      for (std::size_t i = 0; i < band.values.size(); ++i) {
        const int col = band.first_col + static_cast<int>(i);
        out(col, col - m) += scale * y * band.values[i];
      }
    }
  }
  Matrix herm = 0.5 * (out + out.adjoint());
  return {basis(), std::move(herm)};
}

HilbertOperator Su2Backend::displacement(const PhasePoint& p) const {
  const auto& pt = spherical(p, "displacement");
  return rotation_operator(two_j_, -pt.phi, -pt.theta, 0.0);
}

HilbertOperator Su2Backend::group_operator(const GroupElement& g) const {
  const auto* e = std::get_if<EulerAngles>(&g);
  if (!e) throw DomainError("Su2Backend: group element must be Euler angles");
  return rotation_operator(two_j_, e->alpha, e->beta, e->gamma);
}

PhasePoint Su2Backend::act(const GroupElement& g, const PhasePoint& p) const {
  const auto* e = std::get_if<EulerAngles>(&g);
  if (!e) throw DomainError("Su2Backend: group element must be Euler angles");
  return rotate_point(*e, spherical(p, "act"));
}

GroupElement Su2Backend::random_group_element(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = 2.0 * std::numbers::pi * u(rng);
  const double b = std::acos(2.0 * u(rng) - 1.0);
  const double c = 2.0 * std::numbers::pi * u(rng);
  return EulerAngles{a, b, c};
}

GroupElement Su2Backend::representative(const PhasePoint& p) const {
  const auto& pt = spherical(p, "representative");
  return EulerAngles{-pt.phi, -pt.theta, 0.0};
}

std::vector<cplx> Su2Backend::harmonics_at(const PhasePoint& p) const {
  const auto& pt = spherical(p, "harmonics_at");
  const auto table = specfun::normalized_legendre_table(two_j_, pt.theta);
  std::vector<cplx> y(index_.size());
  for (int l = 0; l <= two_j_; ++l)
    for (int m = 0; m <= l; ++m) {
      const cplx v = norm_ * table[legendre_index(l, m)] * std::polar(1.0, m * pt.phi);
      y[slot(l, m)] = v;
      if (m > 0) y[slot(l, -m)] = (m % 2 == 0) ? std::conj(v) : -std::conj(v);
    }
  return y;
}

std::vector<cplx> Su2Backend::decompose(const HilbertOperator& a) const {
  if (!(a.basis() == basis())) throw BasisMismatch("decompose: operator not on " + id());
  const Matrix& x = a.matrix();
  std::vector<cplx> c(index_.size());
  for (std::size_t k = 0; k < bands_.size(); ++k) {
    const Band& band = bands_[k];
    cplx sum = 0.0;
    for (std::size_t i = 0; i < band.values.size(); ++i) {
      const int col = band.first_col + static_cast<int>(i);
      sum += x(col - band.m, col) * band.values[i];
    }
    c[k] = sum;
  }
  return c;
}

HilbertOperator Su2Backend::assemble(const std::vector<cplx>& coeffs) const {
  if (coeffs.size() != index_.size()) throw DomainError("assemble: coefficient count");
  const int d = two_j_ + 1;
  Matrix out = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < bands_.size(); ++k) {
    const Band& band = bands_[k];
    for (std::size_t i = 0; i < band.values.size(); ++i) {
      const int col = band.first_col + static_cast<int>(i);
      out(col - band.m, col) += coeffs[k] * band.values[i];
    }
  }
  return {basis(), std::move(out)};
}

std::vector<cplx> Su2Backend::synthesize(const std::vector<cplx>& coeffs) const {
  if (coeffs.size() != index_.size()) throw DomainError("synthesize: coefficient count");
  const int lmax = two_j_;
  const std::size_t width = static_cast<std::size_t>(lmax) + 1;
  std::vector<cplx> values(grid_.size());
  parallel_for(static_cast<std::size_t>(grid_.n_rings), [&](std::size_t r) {
    const auto& p = ring_legendre_[r];
    std::vector<cplx> gp(width, 0.0);
    std::vector<cplx> gm(width, 0.0);
    for (int m = 0; m <= lmax; ++m) {
      for (int l = m; l <= lmax; ++l) {
        const double plm = p[legendre_index(l, m)];
        gp[m] += coeffs[slot(l, m)] * plm;
        if (m > 0) gm[m] += coeffs[slot(l, -m)] * plm;
      }
      if (m % 2 == 1) gm[m] = -gm[m];
    }
    for (int k = 0; k < grid_.n_phi; ++k) {
      const cplx* e = &phase_table_[static_cast<std::size_t>(k) * width];
      cplx sum = gp[0];
      for (int m = 1; m <= lmax; ++m) sum += gp[m] * e[m] + gm[m] * std::conj(e[m]);
      values[grid_.node_index(static_cast<int>(r), k)] = norm_ * sum;
    }
  });
  return values;
}

std::vector<cplx> Su2Backend::analyze(const std::vector<cplx>& values) const {
  if (values.size() != grid_.size()) throw DomainError("analyze: value count does not match grid");
  const int lmax = two_j_;
  const std::size_t width = static_cast<std::size_t>(lmax) + 1;
  std::vector<cplx> c(index_.size(), 0.0);
  for (int r = 0; r < grid_.n_rings; ++r) {
    std::vector<cplx> gp(width, 0.0);  // sum_k F e^{-i m phi_k}
    std::vector<cplx> gm(width, 0.0);  // sum_k F e^{+i m phi_k}
    for (int k = 0; k < grid_.n_phi; ++k) {
      const cplx f = values[grid_.node_index(r, k)];
      const cplx* e = &phase_table_[static_cast<std::size_t>(k) * width];
      for (int m = 0; m <= lmax; ++m) {
        gp[m] += f * std::conj(e[m]);
        gm[m] += f * e[m];
      }
    }
    const double w = grid_.ring_weight[r] * norm_;
    const auto& p = ring_legendre_[r];
    for (int l = 0; l <= lmax; ++l) {
      for (int m = 0; m <= l; ++m) {
        const double plm = w * p[legendre_index(l, m)];
        c[slot(l, m)] += plm * gp[m];
        // Y_{l,-m}^* = (-1)^m Pbar_lm e^{i m phi}
        if (m > 0) c[slot(l, -m)] += ((m % 2 == 0) ? plm : -plm) * gm[m];
      }
    }
  }
  return c;
}

cplx Su2Backend::synthesize_at(const std::vector<cplx>& coeffs, const PhasePoint& p) const {
  if (coeffs.size() != index_.size()) throw DomainError("synthesize_at: coefficient count");
  const auto& pt = spherical(p, "synthesize_at");
  const int lmax = two_j_;
  const auto table = specfun::normalized_legendre_table(lmax, pt.theta);
  std::vector<cplx> phase(static_cast<std::size_t>(lmax) + 1);
  for (int m = 0; m <= lmax; ++m) phase[m] = std::polar(1.0, m * pt.phi);
  return norm_ * harmonic_sum(coeffs, table, lmax, phase);
}

}  // namespace phasekit
