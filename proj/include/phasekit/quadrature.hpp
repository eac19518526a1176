#pragma once

// Product quadrature rules for the sphere (measure (2j+1)/(4 pi) dn) and the
// plane (measure d^2 alpha / pi). Nodes are stored ring by ring: node index
// ring * n_phi + k.

#include <complex>
#include <string>
#include <vector>

#include "phasekit/phase_space.hpp"

namespace phasekit {

enum class GridKind { Sphere, Planar };

struct QuadratureGrid {
  GridKind kind = GridKind::Sphere;
  std::vector<PhasePoint> nodes;
  std::vector<double> weights;
  double total_measure = 0.0;

  int n_rings = 0;                  // n_theta or n_r
  int n_phi = 0;
  std::vector<double> ring_coord;   // theta per ring, or radius per ring
  std::vector<double> ring_weight;  // weight of every node on the ring

  // Sphere metadata.
  int two_j = -1;
  int level = 0;
  int band_limit = -1;  // products of harmonics up to this total degree are exact

  // Plane metadata.
  double r_max = 0.0;

  std::size_t size() const { return nodes.size(); }
  std::size_t node_index(int ring, int k) const {
    return static_cast<std::size_t>(ring) * static_cast<std::size_t>(n_phi) +
           static_cast<std::size_t>(k);
  }
  double phi(int k) const;
  std::string describe() const;
};

/// Gauss-Legendre nodes and weights on [-1, 1], nodes in descending order.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Sphere grid for spin j = two_j / 2 exact for harmonic products up to total
/// degree level * 2j. level must be 1, 2 or 3.
QuadratureGrid sphere_grid(int two_j, int level);

/// Sphere grid with explicit resolution, for integrands that are not band
/// limited (entropies, characteristic functions).
QuadratureGrid sphere_grid_nodes(int two_j, int n_theta, int n_phi);

/// Polar grid on the disk |alpha| <= r_max with measure d^2 alpha / pi.
QuadratureGrid planar_grid(double r_max, int n_r, int n_phi);

std::complex<double> integrate(const QuadratureGrid& grid,
                               const std::vector<std::complex<double>>& values);
double integrate(const QuadratureGrid& grid, const std::vector<double>& values);

}  // namespace phasekit
