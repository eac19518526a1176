#pragma once

// Stratonovich-Weyl correspondence on top of a Backend: symbols, the inverse
// map, harmonic transforms, s-conversion, twisted products and the postulate
// verifier.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "phasekit/backend.hpp"

namespace phasekit {

struct HarmonicCoefficients {
  std::string backend_id;
  std::vector<HarmonicIndex> index;
  std::vector<cplx> value;   // Tr(A D_nu^dagger)
  std::vector<double> weight;
};

/// Symbol values on the backend grid.
struct QPDGrid {
  std::string backend_id;
  double s = 0.0;
  std::vector<cplx> values;
  std::string route;  // "kernel" or "harmonic"
  double xi_cutoff = std::numeric_limits<double>::infinity();
  /// Size of the scaled harmonic content on the outermost xi ring; a proxy
  /// for what the cutoff drops. Zero for compact groups.
  double dropped_mass = 0.0;

  double max_imag() const;
};

HarmonicCoefficients harmonic_decompose(const Backend& b, const HilbertOperator& a);
HilbertOperator harmonic_synthesize(const Backend& b, const HarmonicCoefficients& c);

/// F_A(Omega; s) on the backend grid. Kernel route where the backend can
/// materialize Delta(Omega; s), harmonic route otherwise.
QPDGrid sw_symbol(const Backend& b, const HilbertOperator& a, double s);
/// Same as sw_symbol for several operators, sharing kernel evaluations.
std::vector<QPDGrid> sw_symbols(const Backend& b, const std::vector<HilbertOperator>& ops,
                                double s);
/// Forced harmonic route (tau^{-s/2} scaling of Tr(A D^dagger), synthesized).
QPDGrid sw_symbol_harmonic(const Backend& b, const HilbertOperator& a, double s);
/// Forced kernel route, Tr[A Delta(Omega; s)] at every node.
QPDGrid sw_symbol_kernel(const Backend& b, const HilbertOperator& a, double s);
/// F_A at an arbitrary point.
cplx sw_symbol_at(const Backend& b, const HilbertOperator& a, const PhasePoint& p, double s);

/// A = integral of F(Omega; s) Delta(Omega; -s).
HilbertOperator inverse_weyl(const Backend& b, const QPDGrid& f);

/// Sum_nu tau^{-(s-s')/2} Y_nu(Omega) Y_nu^*(Omega').
cplx kernel_overlap(const Backend& b, double s, double s_prime, const PhasePoint& p,
                    const PhasePoint& q);
/// Tr[Delta(Omega; s) Delta(Omega'; -s')] from materialized kernels.
cplx kernel_overlap_trace(const Backend& b, double s, double s_prime, const PhasePoint& p,
                          const PhasePoint& q);
/// F(s') -> F(s) by rescaling harmonic content.
QPDGrid transport_symbol(const Backend& b, const QPDGrid& f, double s_target);

/// F_A(s') * F_B(s'') -> F_AB(s), operator route.
QPDGrid twisted_product(const Backend& b, const QPDGrid& fa, const QPDGrid& fb, double s);
/// Tr[Delta(Omega; s) Delta(Omega'; -s') Delta(Omega''; -s'')].
cplx trikernel(const Backend& b, double s, double s1, double s2, const PhasePoint& p,
               const PhasePoint& p1, const PhasePoint& p2);
/// Twisted product as the literal double integral against the trikernel.
/// Cost grows with the cube of the grid size; meant for checking.
QPDGrid twisted_product_trikernel(const Backend& b, const QPDGrid& fa, const QPDGrid& fb,
                                  double s);
/// -i (W_A * W_B - W_B * W_A) for two s = 0 grids.
QPDGrid moyal_bracket(const Backend& b, const QPDGrid& wa, const QPDGrid& wb);

/// <phi_m| Delta(Omega; s) |phi_n>.
cplx delta_basis_fn(const Backend& b, int m, int n, const PhasePoint& p, double s);

struct VerifyOptions {
  int n_operators = 50;
  int n_group_elements = 20;
  /// Random operators fill only the leading block of this size; -1 for all.
  int operator_support = -1;
  std::size_t max_covariance_nodes = 512;
  /// s values for the traciality check; empty means every s in the list for
  /// which both s and -s have a symbol route.
  std::vector<double> traciality_s;
};

struct PostulateViolation {
  double s = 0.0;
  double reality = 0.0;
  double standardization = 0.0;
  double covariance = 0.0;
  std::optional<double> traciality;
};

struct PostulateReport {
  std::string backend_id;
  std::uint64_t seed = 0;
  int n_operators = 0;
  int n_group_elements = 0;
  int operator_support = -1;
  std::vector<PostulateViolation> rows;

  double max_violation() const;
};

/// Violations are measured relative to the size of the quantities compared,
/// err / max(1, scale), so that large P symbols are judged by rounding. F_I = 1
/// is judged against the largest tau^{-s/2}. On the plane F_I = 1 is checked
/// only for s < 0 and only where coherent states stay inside the block.
PostulateReport verify_sw_postulates(const Backend& b, const std::vector<double>& s_list,
                                     std::uint64_t seed, const VerifyOptions& options = {});

}  // namespace phasekit
