#include "phasekit/backend.hpp"

#include "phasekit/errors.hpp"
#include "phasekit/parallel.hpp"

namespace phasekit {

std::vector<cplx> Backend::decompose(const HilbertOperator& a) const {
  if (!(a.basis() == basis())) throw BasisMismatch("decompose: operator not on " + id());
  std::vector<cplx> c(harmonic_count());
  parallel_for(c.size(), [&](std::size_t k) {
    c[k] = trace_product(a, adjoint(tensor_operator(k)));
  });
  return c;
}

HilbertOperator Backend::assemble(const std::vector<cplx>& coeffs) const {
  if (coeffs.size() != harmonic_count()) throw DomainError("assemble: coefficient count");
  Matrix m = Matrix::Zero(basis().dim(), basis().dim());
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] == cplx(0.0)) continue;
    m += (harmonic_weight(k) * coeffs[k]) * tensor_operator(k).matrix();
  }
  return {basis(), std::move(m)};
}

std::vector<cplx> Backend::synthesize(const std::vector<cplx>& coeffs) const {
  if (coeffs.size() != harmonic_count()) throw DomainError("synthesize: coefficient count");
  const auto& g = grid();
  std::vector<cplx> values(g.size());
  parallel_for(g.size(), [&](std::size_t i) { values[i] = synthesize_at(coeffs, g.nodes[i]); });
  return values;
}

std::vector<cplx> Backend::analyze(const std::vector<cplx>& values) const {
  const auto& g = grid();
  if (values.size() != g.size()) throw DomainError("analyze: value count does not match grid");
  std::vector<cplx> c(harmonic_count());
  parallel_for(c.size(), [&](std::size_t k) {
    cplx sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (values[i] == cplx(0.0)) continue;
      sum += g.weights[i] * values[i] * std::conj(harmonic(k, g.nodes[i]));
    }
    c[k] = sum;
  });
  return c;
}

cplx Backend::synthesize_at(const std::vector<cplx>& coeffs, const PhasePoint& p) const {
  cplx sum = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] == cplx(0.0)) continue;
    sum += harmonic_weight(k) * coeffs[k] * harmonic(k, p);
  }
  return sum;
}

std::vector<cplx> Backend::harmonics_at(const PhasePoint& p) const {
  std::vector<cplx> y(harmonic_count());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = harmonic(k, p);
  return y;
}

}  // namespace phasekit
