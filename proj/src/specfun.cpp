#include "phasekit/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "phasekit/errors.hpp"

namespace phasekit::specfun {
namespace {

constexpr int kTableSize = 4096;

// ln(k!) accumulated in extended precision; the per-step rounding is far
// below double resolution for every entry of the table.
const std::array<long double, kTableSize>& log_factorial_table() {
  static const auto table = [] {
    std::array<long double, kTableSize> t{};
    t[0] = 0.0L;
    for (int k = 1; k < kTableSize; ++k) t[k] = t[k - 1] + std::log(static_cast<long double>(k));
    return t;
  }();
  return table;
}

long double log_factorial_ld(int n) {
  if (n < kTableSize) return log_factorial_table()[static_cast<std::size_t>(n)];
  return std::lgamma(static_cast<long double>(n) + 1.0L);
}

// Integer value of a half-integer combination known to be integral.
int whole(int twice) { return twice / 2; }

void require_parity(HalfInteger j, HalfInteger m, const char* what) {
  if (j.two_x < 0) throw DomainError(std::string(what) + ": negative angular momentum");
  if ((j.two_x - m.two_x) % 2 != 0)
    throw DomainError(std::string(what) + ": projection parity does not match magnitude");
}

}  // namespace

bool is_valid_projection(HalfInteger j, HalfInteger m) {
  return j.two_x >= 0 && std::abs(m.two_x) <= j.two_x && (j.two_x - m.two_x) % 2 == 0;
}

double log_factorial(int n) {
  if (n < 0) throw DomainError("log_factorial: negative argument");
  return static_cast<double>(log_factorial_ld(n));
}

double clebsch_gordan(HalfInteger j1, HalfInteger m1, HalfInteger j2, HalfInteger m2,
                      HalfInteger j, HalfInteger m) {
  require_parity(j1, m1, "clebsch_gordan");
  require_parity(j2, m2, "clebsch_gordan");
  require_parity(j, m, "clebsch_gordan");

  if (m.two_x != m1.two_x + m2.two_x) return 0.0;
  if (std::abs(m1.two_x) > j1.two_x || std::abs(m2.two_x) > j2.two_x ||
      std::abs(m.two_x) > j.two_x)
    return 0.0;
  if (j.two_x < std::abs(j1.two_x - j2.two_x) || j.two_x > j1.two_x + j2.two_x) return 0.0;
  if ((j1.two_x + j2.two_x + j.two_x) % 2 != 0) return 0.0;

  // Racah's closed form; every factorial argument below is a non-negative
  // integer once the checks above have passed.
  const int a = whole(j1.two_x + j2.two_x - j.two_x);
  const int b = whole(j1.two_x - j2.two_x + j.two_x);
  const int c = whole(-j1.two_x + j2.two_x + j.two_x);
  const int d = whole(j1.two_x + j2.two_x + j.two_x) + 1;
  const int j1mm1 = whole(j1.two_x - m1.two_x);
  const int j1pm1 = whole(j1.two_x + m1.two_x);
  const int j2mm2 = whole(j2.two_x - m2.two_x);
  const int j2pm2 = whole(j2.two_x + m2.two_x);
  const int jmm = whole(j.two_x - m.two_x);
  const int jpm = whole(j.two_x + m.two_x);
  const int e = whole(j.two_x - j2.two_x + m1.two_x);
  const int f = whole(j.two_x - j1.two_x - m2.two_x);

  const long double log_prefactor =
      0.5L * (std::log(static_cast<long double>(j.two_x + 1)) + log_factorial_ld(a) +
              log_factorial_ld(b) + log_factorial_ld(c) - log_factorial_ld(d) +
              log_factorial_ld(jpm) + log_factorial_ld(jmm) + log_factorial_ld(j1mm1) +
              log_factorial_ld(j1pm1) + log_factorial_ld(j2mm2) + log_factorial_ld(j2pm2));

  const int k_min = std::max({0, -e, -f});
  const int k_max = std::min({a, j1mm1, j2pm2});
  long double sum = 0.0L;
  for (int k = k_min; k <= k_max; ++k) {
    const long double log_den = log_factorial_ld(k) + log_factorial_ld(a - k) +
                                log_factorial_ld(j1mm1 - k) + log_factorial_ld(j2pm2 - k) +
                                log_factorial_ld(e + k) + log_factorial_ld(f + k);
    const long double term = std::exp(log_prefactor - log_den);
    sum += (k % 2 == 0) ? term : -term;
  }
  return static_cast<double>(sum);
}

double laguerre_assoc(int n, int p, double x) {
  if (n < 0 || p < 0) throw DomainError("laguerre_assoc: negative degree or order");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double curr = 1.0 + p - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + p - x) * curr - (k + p) * prev) / (k + 1.0);
    prev = curr;
    curr = next;
  }
  return curr;
}

double legendre(int l, double x) {
  if (l < 0) throw DomainError("legendre: negative degree");
  if (!(x >= -1.0 && x <= 1.0)) throw DomainError("legendre: argument outside [-1, 1]");
  if (l == 0) return 1.0;
  double prev = 1.0;
  double curr = x;
  for (int k = 1; k < l; ++k) {
    const double next = ((2.0 * k + 1.0) * x * curr - k * prev) / (k + 1.0);
    prev = curr;
    curr = next;
  }
  return curr;
}

std::vector<double> normalized_legendre_table(int lmax, double theta) {
  if (lmax < 0) throw DomainError("normalized_legendre_table: negative lmax");
  std::vector<double> p(legendre_index(lmax, lmax) + 1, 0.0);
  const double x = std::cos(theta);
  const double sx = std::sin(theta);

  p[0] = 0.5 / std::sqrt(std::numbers::pi);
  for (int m = 1; m <= lmax; ++m) {
    // Diagonal carries the Condon-Shortley factor (-1)^m.
    p[legendre_index(m, m)] =
        -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sx * p[legendre_index(m - 1, m - 1)];
  }
  for (int m = 0; m < lmax; ++m) {
    p[legendre_index(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * p[legendre_index(m, m)];
    for (int l = m + 2; l <= lmax; ++l) {
      const double ll = static_cast<double>(l) * l;
      const double mm = static_cast<double>(m) * m;
      const double a = std::sqrt((4.0 * ll - 1.0) / (ll - mm));
      const double lp = static_cast<double>(l - 1) * (l - 1);
      const double b = std::sqrt((lp - mm) / (4.0 * lp - 1.0));
      p[legendre_index(l, m)] =
          a * (x * p[legendre_index(l - 1, m)] - b * p[legendre_index(l - 2, m)]);
    }
  }
  return p;
}

std::complex<double> spherical_harmonic(int l, int m, double theta, double phi) {
  if (l < 0 || std::abs(m) > l) throw DomainError("spherical_harmonic: |m| > l");
  const int am = std::abs(m);
  const auto table = normalized_legendre_table(l, theta);
  const std::complex<double> y = table[legendre_index(l, am)] * std::polar(1.0, am * phi);
  if (m >= 0) return y;
  return (am % 2 == 0) ? std::conj(y) : -std::conj(y);
}

double wigner_small_d(HalfInteger l, HalfInteger mp, HalfInteger m, double beta) {
  require_parity(l, mp, "wigner_small_d");
  require_parity(l, m, "wigner_small_d");
  if (std::abs(mp.two_x) > l.two_x || std::abs(m.two_x) > l.two_x)
    throw DomainError("wigner_small_d: projection exceeds magnitude");

  const int jpm = whole(l.two_x + m.two_x);
  const int jmm = whole(l.two_x - m.two_x);
  const int jpmp = whole(l.two_x + mp.two_x);
  const int jmmp = whole(l.two_x - mp.two_x);
  const int mp_minus_m = whole(mp.two_x - m.two_x);

  const long double half = static_cast<long double>(beta) / 2.0L;
  const long double c = std::cos(half);
  const long double s = std::sin(half);
  const long double log_norm = 0.5L * (log_factorial_ld(jpm) + log_factorial_ld(jmm) +
                                       log_factorial_ld(jpmp) + log_factorial_ld(jmmp));

  const int k_min = std::max(0, -mp_minus_m);
  const int k_max = std::min(jpm, jmmp);
  long double sum = 0.0L;
  for (int k = k_min; k <= k_max; ++k) {
    const long double log_den = log_factorial_ld(jpm - k) + log_factorial_ld(k) +
                                log_factorial_ld(jmmp - k) + log_factorial_ld(mp_minus_m + k);
    const int cos_power = jpm + jmmp - 2 * k;
    const int sin_power = 2 * k + mp_minus_m;
    long double term = std::exp(log_norm - log_den);
    term *= std::pow(c, cos_power) * std::pow(s, sin_power);
    sum += ((k + mp_minus_m) % 2 == 0) ? term : -term;
  }
  return static_cast<double>(sum);
}

}  // namespace phasekit::specfun
