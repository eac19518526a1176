#include "phasekit/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "phasekit/errors.hpp"

namespace phasekit {

std::string describe(const PhasePoint& p) {
  std::ostringstream os;
  os.precision(6);
  if (const auto* q = std::get_if<PlanarPoint>(&p))
    os << "alpha=(" << q->alpha.real() << "," << q->alpha.imag() << ")";
  else {
    const auto& s = std::get<SphericalPoint>(p);
    os << "theta=" << s.theta << ",phi=" << s.phi;
  }
  return os.str();
}

std::string describe(const HarmonicIndex& nu) {
  std::ostringstream os;
  if (const auto* x = std::get_if<PlanarXi>(&nu))
    os << "xi=(" << x->xi.real() << "," << x->xi.imag() << ")";
  else {
    const auto& lm = std::get<SphericalLM>(nu);
    os << "(l=" << lm.l << ",m=" << lm.m << ")";
  }
  return os.str();
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi's estimate, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = x;
    nodes[n - 1 - i] = -x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

double QuadratureGrid::phi(int k) const {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_phi);
}

std::string QuadratureGrid::describe() const {
  std::ostringstream os;
  if (kind == GridKind::Sphere)
    os << "sphere(two_j=" << two_j << ",n_theta=" << n_rings << ",n_phi=" << n_phi
       << ",band_limit=" << band_limit << ")";
  else
    os << "planar(r_max=" << r_max << ",n_r=" << n_rings << ",n_phi=" << n_phi << ")";
  return os.str();
}

QuadratureGrid sphere_grid_nodes(int two_j, int n_theta, int n_phi) {
  if (two_j < 0) throw DomainError("sphere_grid: two_j must be >= 0");
  if (n_theta < 1 || n_phi < 1) throw DomainError("sphere_grid: need positive node counts");
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre(n_theta, x, w);

  QuadratureGrid g;
  g.kind = GridKind::Sphere;
  g.two_j = two_j;
  g.n_rings = n_theta;
  g.n_phi = n_phi;
  g.band_limit = std::min(2 * n_theta - 1, n_phi - 1);
  const double measure = (two_j + 1.0) / (4.0 * std::numbers::pi);
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  g.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  g.weights.reserve(g.nodes.capacity());
  for (int r = 0; r < n_theta; ++r) {
    const double theta = std::acos(x[r]);
    const double wr = w[r] * dphi * measure;
    g.ring_coord.push_back(theta);
    g.ring_weight.push_back(wr);
    for (int k = 0; k < n_phi; ++k) {
      g.nodes.push_back(SphericalPoint{theta, g.phi(k)});
      g.weights.push_back(wr);
    }
  }
  g.total_measure = two_j + 1.0;
  return g;
}

QuadratureGrid sphere_grid(int two_j, int level) {
  if (level < 1 || level > 3) throw DomainError("sphere_grid: level must be 1, 2 or 3");
  if (two_j < 0) throw DomainError("sphere_grid: two_j must be >= 0");
  const int degree = level * two_j;
  // ceil(level * j) + 1 rings; 2 * level * 2j + 1 meridians.
  QuadratureGrid g = sphere_grid_nodes(two_j, (degree + 1) / 2 + 1, 2 * degree + 1);
  g.level = level;
  g.band_limit = degree;
  return g;
}

QuadratureGrid planar_grid(double r_max, int n_r, int n_phi) {
  if (!(r_max > 0.0)) throw DomainError("planar_grid: r_max must be positive");
  if (n_r < 1 || n_phi < 1) throw DomainError("planar_grid: need positive node counts");
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre(n_r, x, w);

  QuadratureGrid g;
  g.kind = GridKind::Planar;
  g.r_max = r_max;
  g.n_rings = n_r;
  g.n_phi = n_phi;
  g.nodes.reserve(static_cast<std::size_t>(n_r) * n_phi);
  g.weights.reserve(g.nodes.capacity());
  // Radii ascending.
  for (int i = n_r - 1; i >= 0; --i) {
    const double r = 0.5 * r_max * (x[i] + 1.0);
    const double wr = 0.5 * r_max * w[i];
    // (r dr dphi) / pi with a uniform phi rule of n_phi points.
    const double node_weight = wr * r * (2.0 / n_phi);
    g.ring_coord.push_back(r);
    g.ring_weight.push_back(node_weight);
    for (int k = 0; k < n_phi; ++k) {
      g.nodes.push_back(PlanarPoint{std::polar(r, g.phi(k))});
      g.weights.push_back(node_weight);
    }
  }
  g.total_measure = r_max * r_max;
  return g;
}

std::complex<double> integrate(const QuadratureGrid& grid,
                               const std::vector<std::complex<double>>& values) {
  if (grid.size() == 0) throw DomainError("integrate: empty grid");
  if (values.size() != grid.size())
    throw DomainError("integrate: " + std::to_string(values.size()) + " values for " +
                      std::to_string(grid.size()) + " nodes");
  std::complex<double> sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += grid.weights[i] * values[i];
  return sum;
}

double integrate(const QuadratureGrid& grid, const std::vector<double>& values) {
  if (grid.size() == 0) throw DomainError("integrate: empty grid");
  if (values.size() != grid.size())
    throw DomainError("integrate: " + std::to_string(values.size()) + " values for " +
                      std::to_string(grid.size()) + " nodes");
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += grid.weights[i] * values[i];
  return sum;
}

}  // namespace phasekit
