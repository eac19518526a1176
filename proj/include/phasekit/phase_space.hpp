#pragma once

#include <complex>
#include <string>
#include <utility>
#include <variant>

namespace phasekit {

struct PlanarPoint {
  std::complex<double> alpha;
};

/// Point on the unit sphere, theta in [0, pi], phi in [0, 2 pi).
struct SphericalPoint {
  double theta = 0.0;
  double phi = 0.0;
};

using PhasePoint = std::variant<PlanarPoint, SphericalPoint>;

struct PlanarXi {
  std::complex<double> xi;
};

struct SphericalLM {
  int l = 0;
  int m = 0;
};

using HarmonicIndex = std::variant<PlanarXi, SphericalLM>;

/// (re alpha, im alpha) or (theta, phi).
inline std::pair<double, double> coordinates(const PhasePoint& p) {
  if (const auto* q = std::get_if<PlanarPoint>(&p)) return {q->alpha.real(), q->alpha.imag()};
  const auto& s = std::get<SphericalPoint>(p);
  return {s.theta, s.phi};
}

std::string describe(const PhasePoint& p);
std::string describe(const HarmonicIndex& nu);

}  // namespace phasekit
