#pragma once

// SU(2) phase space: the sphere, spin-j multiplet, Fano multipoles.
// Storage order of the multiplet is mu = j, j-1, ..., -j; harmonic slots are
// k = l^2 + l + m for 0 <= l <= 2j, |m| <= l.

#include "phasekit/backend.hpp"

namespace phasekit {

/// Amplitudes sqrt(C(2j, j+mu)) cos^{j+mu}(theta/2) sin^{j-mu}(theta/2) e^{-i mu phi}.
StateVector spin_coherent_state(int two_j, double theta, double phi);

/// (2j+1) [(2j)!]^2 / ((2j+l+1)! (2j-l)!) for l <= 2j, zero above.
double tau_spin(int two_j, int l);

/// Fano multipole with elements sqrt((2l+1)/(2j+1)) <j,k; l,m | j,q> at (q,k).
HilbertOperator fano_multipole(int two_j, int l, int m);

/// sqrt(4 pi / (2j+1)) Y_lm(theta, phi).
cplx su2_harmonic(int two_j, int l, int m, double theta, double phi);

/// e^{i alpha Jz} e^{i beta Jy} e^{i gamma Jz}.
HilbertOperator rotation_operator(int two_j, double alpha, double beta, double gamma);

/// Image of a point under the rotation represented by rotation_operator.
SphericalPoint rotate_point(const EulerAngles& g, const SphericalPoint& p);

class Su2Backend : public Backend {
 public:
  explicit Su2Backend(int two_j, int level = 3);
  Su2Backend(int two_j, QuadratureGrid grid);

  int two_j() const { return two_j_; }
  static std::size_t slot(int l, int m) {
    return static_cast<std::size_t>(l * l + l + m);
  }
  const HilbertOperator& multipole(int l, int m) const;

  std::string id() const override;
  BasisLabel basis() const override { return BasisLabel::spin(two_j_); }
  const QuadratureGrid& grid() const override { return grid_; }

  std::size_t harmonic_count() const override { return index_.size(); }
  HarmonicIndex harmonic_index(std::size_t k) const override { return index_.at(k); }
  double harmonic_weight(std::size_t) const override { return 1.0; }
  double tau(std::size_t k) const override { return tau_.at(static_cast<std::size_t>(index_.at(k).l)); }
  double tau_l(int l) const { return tau_.at(static_cast<std::size_t>(l)); }
  cplx harmonic(std::size_t k, const PhasePoint& p) const override;
  std::size_t conjugate_slot(std::size_t k, double& sign) const override;
  HilbertOperator tensor_operator(std::size_t k) const override { return multipoles_.at(k); }

  StateVector coherent_state(const PhasePoint& p) const override;
  HilbertOperator sw_kernel(const PhasePoint& p, double s) const override;
  HilbertOperator displacement(const PhasePoint& p) const override;
  HilbertOperator group_operator(const GroupElement& g) const override;
  PhasePoint act(const GroupElement& g, const PhasePoint& p) const override;
  GroupElement random_group_element(std::mt19937_64& rng) const override;
  GroupElement representative(const PhasePoint& p) const override;
  std::vector<cplx> harmonics_at(const PhasePoint& p) const override;

  bool kernel_route_preferred(double) const override { return false; }

  std::vector<cplx> decompose(const HilbertOperator& a) const override;
  HilbertOperator assemble(const std::vector<cplx>& coeffs) const override;
  std::vector<cplx> synthesize(const std::vector<cplx>& coeffs) const override;
  std::vector<cplx> analyze(const std::vector<cplx>& values) const override;
  cplx synthesize_at(const std::vector<cplx>& coeffs, const PhasePoint& p) const override;

 private:
  void build();
  // Values of D_lm on its band: entry i is at (i - m, i) for the column
  // range where both indices are valid.
  struct Band {
    int m = 0;
    int first_col = 0;
    std::vector<double> values;
  };

  int two_j_;
  QuadratureGrid grid_;
  std::vector<SphericalLM> index_;
  std::vector<double> tau_;
  std::vector<HilbertOperator> multipoles_;
  std::vector<Band> bands_;
  std::vector<std::vector<double>> ring_legendre_;  // per ring, normalized Legendre table
  std::vector<cplx> phase_table_;                   // e^{i m phi_k}, k-major, m = 0..2j
  double norm_;                                     // sqrt(4 pi / (2j+1))
};

}  // namespace phasekit
