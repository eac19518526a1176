#pragma once

// Displaced-projector tomography: simulated measurements, kappa coefficients,
// harmonic inversion to a density matrix or a quasiprobability grid, the
// photon-counting series, Wehrl entropy and localization operators.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "phasekit/backend.hpp"
#include "phasekit/sw_core.hpp"

namespace phasekit {

struct FockN {
  int n = 0;
};
struct SpinMu {
  int two_mu = 0;
};
struct Custom {
  StateVector state;
};
using RulerLabel = std::variant<FockN, SpinMu, Custom>;

std::string describe(const RulerLabel& u);
bool same_ruler(const RulerLabel& a, const RulerLabel& b);
/// |u> on the backend's basis; throws DomainError when the label does not fit.
StateVector ruler_state(const Backend& b, const RulerLabel& u);
/// The reference state |psi_0>: |0> for the plane, |j, j> for the sphere.
RulerLabel reference_ruler(const Backend& b);
/// Every Fock state |0>..|n_max> or every |j, mu>.
std::vector<RulerLabel> complete_ruler_set(const Backend& b);

struct MeasurementRecord {
  PhasePoint omega;
  RulerLabel ruler;
  double probability = 0.0;
  long long shots = 0;  // 0 means exact
  double eta = 1.0;
};

/// T(Omega) |u><u| T(Omega)^dagger.
HilbertOperator displaced_projector(const Backend& b, const RulerLabel& u, const PhasePoint& omega);

/// p_n(eta) = sum_{m >= n} C(m,n) eta^n (1-eta)^{m-n} p_m. Same length as p;
/// eta = 1 returns p unchanged.
std::vector<double> thin_photon_distribution(const std::vector<double>& p, double eta);

/// Exact records over the grid, or multinomial frequencies when shots > 0.
/// Each node draws from its own stream derive_seed(seed, node). On the plane
/// the counts falling outside the retained Fock block form an overflow
/// category that is sampled but not recorded. eta < 1 is only accepted on
/// the plane with Fock rulers.
std::vector<MeasurementRecord> simulate_measurements(const Backend& b, const DensityMatrix& rho,
                                                     const std::vector<RulerLabel>& rulers,
                                                     const QuadratureGrid& grid, long long shots,
                                                     double eta, std::uint64_t seed);

/// kappa_nu^(u) with T(Omega)^dagger D_nu T(Omega) expanded against |u>.
/// Plane: e^{-|xi|^2/2} L_n(|xi|^2) for |n>, <u|D(xi)|u> for custom states
/// (which must give a real value). Sphere: <j,mu; l,0 | j,mu>, J_z
/// eigenstates only.
double kappa_coefficient(const Backend& b, const RulerLabel& u, const HarmonicIndex& nu);
std::vector<double> kappa_table(const Backend& b, const RulerLabel& u);

struct ReconstructOptions {
  double kappa_floor = 1e-8;
};

/// Harmonic coefficients recovered from one ruler.
struct RulerCoefficients {
  RulerLabel ruler;
  HarmonicCoefficients coeffs;
  std::vector<bool> present;     // false where |kappa| < kappa_floor
  std::vector<double> variance;  // shot-noise variance estimate, 0 for exact data
  std::vector<HarmonicIndex> skipped;
  long long shots = 0;
};

/// Values of one ruler's records ordered by grid node. Throws CoverageError
/// naming the missing region when a node has no record.
std::vector<double> records_on_grid(const QuadratureGrid& grid,
                                    const std::vector<MeasurementRecord>& records);

/// R_nu = kappa_nu^{-1} integral p_u Y_nu^*.
RulerCoefficients reconstruct_coeffs(const Backend& b,
                                     const std::vector<MeasurementRecord>& records,
                                     const ReconstructOptions& options = {});

struct DensityReconstruction {
  HilbertOperator raw;
  DensityMatrix rho;
  double coverage = 0.0;
  std::vector<HarmonicIndex> skipped;  // skipped by at least one ruler
  double hermiticity_defect = 0.0;
  std::optional<double> trace_distance;
  std::size_t n_rulers = 0;
};

/// Averages coefficients over rulers (inverse variance when every
/// contributing set has shots, uniform otherwise), assembles and projects.
DensityReconstruction merge_and_reconstruct_density(const Backend& b,
                                                    const std::vector<RulerCoefficients>& sets,
                                                    const DensityMatrix* truth = nullptr);

/// Groups records by ruler and runs reconstruct_coeffs on each group.
std::vector<RulerCoefficients> reconstruct_all(const Backend& b,
                                               const std::vector<MeasurementRecord>& records,
                                               const ReconstructOptions& options = {});

/// P(Omega; s) from one ruler's records via tau^{-s/2} kappa^{-1} scaling of
/// the harmonic content. On the sphere every kappa must clear the floor; on
/// the plane indices below the floor are dropped with a warning.
QPDGrid reconstruct_qpd(const Backend& b, const std::vector<MeasurementRecord>& records, double s,
                        const ReconstructOptions& options = {});

/// Sphere only: integral of the Legendre kernel
/// sum_l (2l+1)/(2j+1) P_l(n.n') / (kappa_l tau_l^{s/2}) against p_mu.
QPDGrid reconstruct_qpd_kernel(const Backend& b, const std::vector<MeasurementRecord>& records,
                               double s, const ReconstructOptions& options = {});

/// (2 + eta (s-1)) / (eta (s-1)); (s+1)/(s-1) at eta = 1.
double photon_series_ratio(double s, double eta);

struct SeriesValue {
  double value = 0.0;
  double last_term = 0.0;  // magnitude of the final retained term
  int terms = 0;
};

/// 2/(1-s) sum_n r^n p_n. Throws DivergentSeries when the retained terms
/// are still growing at the cutoff.
SeriesValue photon_counting_series(const std::vector<double>& p, double s, double eta);

struct SeriesPoint {
  PhasePoint omega;
  SeriesValue series;
};

/// Photon-counting reconstruction at every point carried by the records.
/// Each point needs Fock rulers 0..n_cut without gaps.
std::vector<SeriesPoint> reconstruct_qpd_photon_counting(
    const std::vector<MeasurementRecord>& records, double s);

struct ConvolutionReport {
  double max_abs_diff = 0.0;
  std::size_t n_points = 0;
};

/// Compares Tr[rho Gamma_u(Omega)] with the convolution
/// integral P_rho(g_Omega . Omega'; s) P_u(Omega'; -s). The plane requires
/// s = 0. At most max_points outer points are used.
ConvolutionReport operational_convolution_check(const Backend& b, const DensityMatrix& rho,
                                                const DensityMatrix& rho_u, double s,
                                                std::size_t max_points = 64);

/// -integral p ln p with 0 ln 0 = 0. Values below -1e-12 throw DomainError.
double wehrl_entropy(const QuadratureGrid& grid, const std::vector<double>& p);
double wehrl_entropy(const Backend& b, const std::vector<MeasurementRecord>& records);

/// Z_u(f) = integral f Gamma_u over the grid.
HilbertOperator localization_operator(const Backend& b, const RulerLabel& u,
                                      const std::vector<double>& f,
                                      const QuadratureGrid& grid);
HilbertOperator localization_operator(const Backend& b, const RulerLabel& u,
                                      const std::vector<double>& f);

struct CompletenessDistance {
  double trace_distance = 0.0;
  double sup_p_gap = 0.0;
};

CompletenessDistance completeness_distance(const Backend& b, const DensityMatrix& rho1,
                                           const DensityMatrix& rho2, const RulerLabel& u);

/// p_v on the grid -> p_u on the grid through kappa^(u) / kappa^(v).
std::vector<double> ruler_change(const Backend& b, const std::vector<double>& p_v,
                                 const RulerLabel& v, const RulerLabel& u,
                                 const ReconstructOptions& options = {});

/// Coefficients kappa^{-1} R_nu of the dual function r_u; zero where skipped.
std::vector<cplx> rfunction_coefficients(const Backend& b, const RulerCoefficients& c);

}  // namespace phasekit
