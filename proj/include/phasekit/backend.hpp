#pragma once

// Group-generic interface implemented by the Heisenberg-Weyl and SU(2)
// backends. Harmonics are addressed by a dense slot k in [0, harmonic_count).

#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "phasekit/hilbert.hpp"
#include "phasekit/phase_space.hpp"
#include "phasekit/quadrature.hpp"

namespace phasekit {

/// SU(2) element e^{i alpha Jz} e^{i beta Jy} e^{i gamma Jz}.
struct EulerAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// Heisenberg-Weyl element acting as a shift alpha -> alpha + gamma.
struct PlanarShift {
  cplx gamma;
};

using GroupElement = std::variant<PlanarShift, EulerAngles>;

class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string id() const = 0;
  virtual BasisLabel basis() const = 0;
  virtual const QuadratureGrid& grid() const = 0;

  virtual std::size_t harmonic_count() const = 0;
  virtual HarmonicIndex harmonic_index(std::size_t k) const = 0;
  /// Measure attached to slot k: 1 for discrete index sets, the xi-grid
  /// weight for the planar index integral.
  virtual double harmonic_weight(std::size_t k) const = 0;
  virtual double tau(std::size_t k) const = 0;
  virtual cplx harmonic(std::size_t k, const PhasePoint& p) const = 0;
  /// Slot of the conjugate harmonic, Y_{conj(k)} = sign * Y_k^*.
  virtual std::size_t conjugate_slot(std::size_t k, double& sign) const = 0;
  virtual HilbertOperator tensor_operator(std::size_t k) const = 0;

  virtual StateVector coherent_state(const PhasePoint& p) const = 0;
  virtual HilbertOperator sw_kernel(const PhasePoint& p, double s) const = 0;
  /// T(Omega): maps the reference state to |Omega>.
  virtual HilbertOperator displacement(const PhasePoint& p) const = 0;
  virtual HilbertOperator group_operator(const GroupElement& g) const = 0;
  virtual PhasePoint act(const GroupElement& g, const PhasePoint& p) const = 0;
  virtual GroupElement random_group_element(std::mt19937_64& rng) const = 0;
  /// Group element g with g . Omega_0 = Omega, matching displacement(p).
  virtual GroupElement representative(const PhasePoint& p) const = 0;

  /// True when sw_kernel can be materialized for this s and symbols should be
  /// taken as traces against it.
  virtual bool kernel_route_preferred(double s) const = 0;
  /// Largest |xi| kept by the harmonic route; infinite for compact groups.
  virtual double harmonic_cutoff() const { return std::numeric_limits<double>::infinity(); }

  /// Tr(A D_k^dagger) for every slot.
  virtual std::vector<cplx> decompose(const HilbertOperator& a) const;
  /// Sum_k w_k c_k D_k.
  virtual HilbertOperator assemble(const std::vector<cplx>& coeffs) const;
  /// Sum_k w_k c_k Y_k at every grid node.
  virtual std::vector<cplx> synthesize(const std::vector<cplx>& coeffs) const;
  /// Integral of F Y_k^* over the grid, for every slot.
  virtual std::vector<cplx> analyze(const std::vector<cplx>& values) const;
  virtual cplx synthesize_at(const std::vector<cplx>& coeffs, const PhasePoint& p) const;
  /// Y_k(p) for every slot.
  virtual std::vector<cplx> harmonics_at(const PhasePoint& p) const;
};

}  // namespace phasekit
