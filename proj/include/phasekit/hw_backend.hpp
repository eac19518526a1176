#pragma once

// Heisenberg-Weyl group on a truncated Fock space |0>..|n_max>.
// Matrix elements are evaluated from closed forms, so every entry of the
// retained block equals its infinite-dimensional value; what truncation loses
// is the norm carried outside the block ("leakage").

#include "phasekit/backend.hpp"

namespace phasekit {

/// D(xi) restricted to the retained block. D(0) is the identity exactly.
HilbertOperator displacement_matrix(cplx xi, int n_max);

/// e^{-|alpha|^2/2} alpha^n / sqrt(n!). Emits a "leakage" warning when the
/// norm deficit exceeds 1e-8 and warn_on_leakage is set.
StateVector coherent_state_planar(cplx alpha, int n_max, bool warn_on_leakage = true);

/// 1 - ||P_block |alpha>||^2.
double coherent_leakage(cplx alpha, int n_max);

/// exp(xi alpha^* - xi^* alpha).
cplx planar_harmonic(cplx xi, cplx alpha);

/// exp(-|xi|^2).
double tau_planar(cplx xi);

/// Cahill-Glauber kernel (2/(1-s)) D(alpha) q^N D(alpha)^dagger with
/// q = (s+1)/(s-1), from its closed Laguerre form. Requires -1 <= s <= 0;
/// s > 0 throws IllConditioned.
HilbertOperator sw_kernel_planar(int n_max, cplx alpha, double s);

class HwBackend : public Backend {
 public:
  explicit HwBackend(int n_max);
  HwBackend(int n_max, QuadratureGrid alpha_grid, QuadratureGrid xi_grid);

  int n_max() const { return n_max_; }
  const QuadratureGrid& xi_grid() const { return xi_grid_; }

  std::string id() const override;
  BasisLabel basis() const override { return BasisLabel::fock(n_max_); }
  const QuadratureGrid& grid() const override { return alpha_grid_; }

  std::size_t harmonic_count() const override { return xi_grid_.size(); }
  HarmonicIndex harmonic_index(std::size_t k) const override;
  double harmonic_weight(std::size_t k) const override { return xi_grid_.weights[k]; }
  double tau(std::size_t k) const override;
  cplx harmonic(std::size_t k, const PhasePoint& p) const override;
  std::size_t conjugate_slot(std::size_t k, double& sign) const override;
  HilbertOperator tensor_operator(std::size_t k) const override;

  StateVector coherent_state(const PhasePoint& p) const override;
  HilbertOperator sw_kernel(const PhasePoint& p, double s) const override;
  HilbertOperator displacement(const PhasePoint& p) const override;
  HilbertOperator group_operator(const GroupElement& g) const override;
  PhasePoint act(const GroupElement& g, const PhasePoint& p) const override;
  GroupElement random_group_element(std::mt19937_64& rng) const override;
  GroupElement representative(const PhasePoint& p) const override;

  bool kernel_route_preferred(double s) const override { return s <= 0.0; }
  double harmonic_cutoff() const override { return xi_grid_.r_max; }

 private:
  cplx xi(std::size_t k) const;

  int n_max_;
  QuadratureGrid alpha_grid_;
  QuadratureGrid xi_grid_;
};

/// Defaults for the alpha and xi grids.
QuadratureGrid default_planar_grid();

}  // namespace phasekit
