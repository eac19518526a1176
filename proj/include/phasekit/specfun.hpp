#pragma once

// Special functions used by the phase-space backends: factorials,
// Clebsch-Gordan coefficients, orthogonal polynomials, spherical harmonics
// and Wigner small-d matrix elements. All routines are pure.

#include <compare>
#include <complex>
#include <cstddef>
#include <vector>

namespace phasekit::specfun {

/// Angular-momentum quantum number stored as twice its value, so that
/// j = 1/2 is HalfInteger{1}.
struct HalfInteger {
  int two_x = 0;

  constexpr HalfInteger() = default;
  constexpr explicit HalfInteger(int twice) : two_x(twice) {}

  static constexpr HalfInteger from_int(int x) { return HalfInteger(2 * x); }

  constexpr double value() const { return 0.5 * two_x; }
  constexpr bool is_integer() const { return two_x % 2 == 0; }
  constexpr auto operator<=>(const HalfInteger&) const = default;
};

constexpr HalfInteger operator-(HalfInteger h) { return HalfInteger(-h.two_x); }

/// True when |m| <= j and m differs from j by an integer.
bool is_valid_projection(HalfInteger j, HalfInteger m);

/// ln(n!) accurate to about one ulp of the result.
double log_factorial(int n);

/// <j1,m1; j2,m2 | j,m> in the Condon-Shortley convention.
/// Returns 0 when m != m1 + m2, when a projection exceeds its magnitude or
/// the triangle rule fails. Throws DomainError on a parity mismatch between
/// a magnitude and its projection, or on a negative magnitude.
double clebsch_gordan(HalfInteger j1, HalfInteger m1, HalfInteger j2,
                      HalfInteger m2, HalfInteger j, HalfInteger m);

/// Associated Laguerre polynomial L_n^p(x) by three-term recurrence.
double laguerre_assoc(int n, int p, double x);

/// Legendre polynomial P_l(x), -1 <= x <= 1 (Bonnet recurrence).
double legendre(int l, double x);

/// Orthonormal spherical harmonic Y_lm(theta, phi), Condon-Shortley phase.
std::complex<double> spherical_harmonic(int l, int m, double theta, double phi);

/// Index of (l, m >= 0) in the triangular table returned by
/// normalized_legendre_table.
constexpr std::size_t legendre_index(int l, int m) {
  return static_cast<std::size_t>(l) * static_cast<std::size_t>(l + 1) / 2 +
         static_cast<std::size_t>(m);
}

/// Table of normalized associated Legendre functions Pbar_lm(cos theta),
/// 0 <= m <= l <= lmax, such that Y_lm(theta, phi) = Pbar_lm e^{i m phi}.
std::vector<double> normalized_legendre_table(int lmax, double theta);

/// Wigner small-d element d^l_{mp,m}(beta) = <l,mp| exp(-i beta J_y) |l,m>.
double wigner_small_d(HalfInteger l, HalfInteger mp, HalfInteger m,
                      double beta);

}  // namespace phasekit::specfun
