#include "phasekit/sw_core.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "phasekit/diagnostics.hpp"
#include "phasekit/errors.hpp"
#include "phasekit/parallel.hpp"
#include "phasekit/specfun.hpp"
#include "phasekit/su2_backend.hpp"

namespace phasekit {
namespace {

void require_backend(const Backend& b, const QPDGrid& f, const char* what) {
  if (f.backend_id != b.id())
    throw BasisMismatch(std::string(what) + ": grid from " + f.backend_id + ", backend " + b.id());
  if (f.values.size() != b.grid().size())
    throw DomainError(std::string(what) + ": grid size does not match backend grid");
}

bool compact(const Backend& b) { return std::isinf(b.harmonic_cutoff()); }

bool has_symbol_route(const Backend& b, double s) {
  return compact(b) || b.kernel_route_preferred(s);
}

// Smallest n such that a vanishes outside its leading n x n block.
int support_size(const Matrix& a) {
  int n = 0;
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      if (a(r, c) != cplx(0.0)) n = std::max<int>(n, static_cast<int>(std::max(r, c)) + 1);
  return n;
}

// Tr(A K) restricted to the leading n x n block of A.
cplx block_trace(const Matrix& a, const Matrix& k, int n) {
  cplx sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sum += a(i, j) * k(j, i);
  return sum;
}

double scale_of(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return std::max(1.0, m);
}

// Harmonic content of A scaled by tau^{-s/2}; reports the outermost-ring mass
// for planar backends.
std::vector<cplx> scaled_coefficients(const Backend& b, const HilbertOperator& a, double s,
                                      double& dropped) {
  std::vector<cplx> c = b.decompose(a);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::pow(b.tau(k), -0.5 * s);
  dropped = 0.0;
  if (!compact(b) && !c.empty()) {
    // Slots are stored ring by ring with growing |xi|; the tail is the outer ring.
    auto radius = [&](std::size_t k) { return std::abs(std::get<PlanarXi>(b.harmonic_index(k)).xi); };
    const double outer = radius(c.size() - 1);
    for (std::size_t k = c.size(); k-- > 0 && std::abs(radius(k) - outer) < 1e-12;)
      dropped += b.harmonic_weight(k) * std::abs(c[k]);
  }
  return c;
}

// Evaluates F_A(.; s) at arbitrary points, precomputing what the route needs.
class SymbolEvaluator {
 public:
  SymbolEvaluator(const Backend& b, const HilbertOperator& a, double s)
      : b_(b), a_(a), s_(s), kernel_(b.kernel_route_preferred(s)) {
    if (kernel_)
      support_ = support_size(a.matrix());
    else {
      double dropped = 0.0;
      coeffs_ = scaled_coefficients(b, a, s, dropped);
    }
  }

  cplx at(const PhasePoint& p) const {
    if (kernel_) return block_trace(a_.matrix(), b_.sw_kernel(p, s_).matrix(), support_);
    return b_.synthesize_at(coeffs_, p);
  }

 private:
  const Backend& b_;
  const HilbertOperator& a_;
  double s_;
  bool kernel_;
  int support_ = 0;
  std::vector<cplx> coeffs_;
};

}  // namespace

double QPDGrid::max_imag() const {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, std::abs(v.imag()));
  return m;
}

HarmonicCoefficients harmonic_decompose(const Backend& b, const HilbertOperator& a) {
  HarmonicCoefficients c;
  c.backend_id = b.id();
  c.value = b.decompose(a);
  c.index.reserve(c.value.size());
  c.weight.reserve(c.value.size());
  for (std::size_t k = 0; k < c.value.size(); ++k) {
    c.index.push_back(b.harmonic_index(k));
    c.weight.push_back(b.harmonic_weight(k));
  }
  return c;
}

HilbertOperator harmonic_synthesize(const Backend& b, const HarmonicCoefficients& c) {
  if (c.backend_id != b.id()) throw BasisMismatch("harmonic_synthesize: coefficients from " + c.backend_id);
  return b.assemble(c.value);
}

QPDGrid sw_symbol_kernel(const Backend& b, const HilbertOperator& a, double s) {
  return sw_symbols(b, {a}, s).front();
}

QPDGrid sw_symbol_harmonic(const Backend& b, const HilbertOperator& a, double s) {
  if (!(a.basis() == b.basis())) throw BasisMismatch("sw_symbol: operator not on " + b.id());
  QPDGrid f;
  f.backend_id = b.id();
  f.s = s;
  f.route = "harmonic";
  f.xi_cutoff = b.harmonic_cutoff();
  const auto c = scaled_coefficients(b, a, s, f.dropped_mass);
  f.values = b.synthesize(c);
  if (!compact(b) && f.dropped_mass > 1e-8)
    warn("regularization",
         "harmonic content at the xi cutoff " + std::to_string(b.harmonic_cutoff()) +
             " has not decayed for s=" + std::to_string(s),
         f.dropped_mass);
  return f;
}

std::vector<QPDGrid> sw_symbols(const Backend& b, const std::vector<HilbertOperator>& ops,
                                double s) {
  for (const auto& a : ops)
    if (!(a.basis() == b.basis())) throw BasisMismatch("sw_symbol: operator not on " + b.id());
  if (!b.kernel_route_preferred(s)) {
    std::vector<QPDGrid> out;
    out.reserve(ops.size());
    for (const auto& a : ops) out.push_back(sw_symbol_harmonic(b, a, s));
    return out;
  }
  const auto& g = b.grid();
  std::vector<QPDGrid> out(ops.size());
  std::vector<int> support(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    out[i].backend_id = b.id();
    out[i].s = s;
    out[i].route = "kernel";
    out[i].values.resize(g.size());
    support[i] = support_size(ops[i].matrix());
  }
  parallel_for(g.size(), [&](std::size_t node) {
    const HilbertOperator k = b.sw_kernel(g.nodes[node], s);
    for (std::size_t i = 0; i < ops.size(); ++i)
      out[i].values[node] = block_trace(ops[i].matrix(), k.matrix(), support[i]);
  });
  return out;
}

QPDGrid sw_symbol(const Backend& b, const HilbertOperator& a, double s) {
  if (b.kernel_route_preferred(s)) return sw_symbol_kernel(b, a, s);
  return sw_symbol_harmonic(b, a, s);
}

cplx sw_symbol_at(const Backend& b, const HilbertOperator& a, const PhasePoint& p, double s) {
  return SymbolEvaluator(b, a, s).at(p);
}

HilbertOperator inverse_weyl(const Backend& b, const QPDGrid& f) {
  require_backend(b, f, "inverse_weyl");
  for (const auto& v : f.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw DomainError("inverse_weyl: non-finite symbol values");
  const auto& g = b.grid();
  if (b.kernel_route_preferred(-f.s)) {
    const int d = b.basis().dim();
    Matrix acc = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (f.values[i] == cplx(0.0)) continue;
      acc += (g.weights[i] * f.values[i]) * b.sw_kernel(g.nodes[i], -f.s).matrix();
    }
    return {b.basis(), std::move(acc)};
  }
  if (!compact(b) && f.s < 0.0)
    warn("regularization", "inverse map from s<0 on a planar backend amplifies large-xi content",
         std::exp(-0.5 * f.s * b.harmonic_cutoff() * b.harmonic_cutoff()));
  std::vector<cplx> c = b.analyze(f.values);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::pow(b.tau(k), 0.5 * f.s);
  return b.assemble(c);
}

cplx kernel_overlap(const Backend& b, double s, double s_prime, const PhasePoint& p,
                    const PhasePoint& q) {
  const double expo = -0.5 * (s - s_prime);
  if (const auto* su2 = dynamic_cast<const Su2Backend*>(&b)) {
    const auto& a = std::get<SphericalPoint>(p);
    const auto& c = std::get<SphericalPoint>(q);
    double x = std::sin(a.theta) * std::sin(c.theta) * std::cos(a.phi - c.phi) +
               std::cos(a.theta) * std::cos(c.theta);
    x = std::clamp(x, -1.0, 1.0);
    const int two_j = su2->two_j();
    double sum = 0.0;
    for (int l = 0; l <= two_j; ++l)
      sum += std::pow(su2->tau_l(l), expo) * (2.0 * l + 1.0) / (two_j + 1.0) *
             specfun::legendre(l, x);
    return sum;
  }
  if (!compact(b) && s - s_prime > 0.0)
    warn("regularization", "kernel_overlap with s > s' truncated at the xi cutoff",
         std::exp(0.5 * (s - s_prime) * b.harmonic_cutoff() * b.harmonic_cutoff()));
  cplx sum = 0.0;
  for (std::size_t k = 0; k < b.harmonic_count(); ++k)
    sum += b.harmonic_weight(k) * std::pow(b.tau(k), expo) * b.harmonic(k, p) *
           std::conj(b.harmonic(k, q));
  return sum;
}

cplx kernel_overlap_trace(const Backend& b, double s, double s_prime, const PhasePoint& p,
                          const PhasePoint& q) {
  return trace_product(b.sw_kernel(p, s), b.sw_kernel(q, -s_prime));
}

QPDGrid transport_symbol(const Backend& b, const QPDGrid& f, double s_target) {
  require_backend(b, f, "transport_symbol");
  if (!compact(b) && s_target > f.s)
    warn("regularization", "transport toward larger s truncated at the xi cutoff",
         std::exp(0.5 * (s_target - f.s) * b.harmonic_cutoff() * b.harmonic_cutoff()));
  std::vector<cplx> c = b.analyze(f.values);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::pow(b.tau(k), -0.5 * (s_target - f.s));
  QPDGrid out;
  out.backend_id = b.id();
  out.s = s_target;
  out.route = "harmonic";
  out.xi_cutoff = b.harmonic_cutoff();
  out.values = b.synthesize(c);
  return out;
}

QPDGrid twisted_product(const Backend& b, const QPDGrid& fa, const QPDGrid& fb, double s) {
  const HilbertOperator a = inverse_weyl(b, fa);
  const HilbertOperator c = inverse_weyl(b, fb);
  return sw_symbol(b, a * c, s);
}

cplx trikernel(const Backend& b, double s, double s1, double s2, const PhasePoint& p,
               const PhasePoint& p1, const PhasePoint& p2) {
  const Matrix m = b.sw_kernel(p, s).matrix() * b.sw_kernel(p1, -s1).matrix() *
                   b.sw_kernel(p2, -s2).matrix();
  return m.trace();
}

QPDGrid twisted_product_trikernel(const Backend& b, const QPDGrid& fa, const QPDGrid& fb,
                                  double s) {
  require_backend(b, fa, "twisted_product_trikernel");
  require_backend(b, fb, "twisted_product_trikernel");
  const auto& g = b.grid();
  const std::size_t n = g.size();
  if (n > 4000) throw DomainError("twisted_product_trikernel: grid too large for the triple sum");
  std::vector<Matrix> ks(n), ka(n), kb(n);
  for (std::size_t i = 0; i < n; ++i) {
    ks[i] = b.sw_kernel(g.nodes[i], s).matrix();
    ka[i] = b.sw_kernel(g.nodes[i], -fa.s).matrix();
    kb[i] = b.sw_kernel(g.nodes[i], -fb.s).matrix();
  }
  QPDGrid out;
  out.backend_id = b.id();
  out.s = s;
  out.route = "trikernel";
  out.values.assign(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    cplx total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const cplx wa = g.weights[j] * fa.values[j];
      if (wa == cplx(0.0)) continue;
      const Matrix pij = ks[i] * ka[j];
      cplx inner = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        // L(i, j, k) = Tr(P_ij Delta_k)
        const cplx l = pij.cwiseProduct(kb[k].transpose()).sum();
        inner += l * (g.weights[k] * fb.values[k]);
      }
      total += wa * inner;
    }
    out.values[i] = total;
  });
  return out;
}

QPDGrid moyal_bracket(const Backend& b, const QPDGrid& wa, const QPDGrid& wb) {
  if (wa.s != 0.0 || wb.s != 0.0) throw DomainError("moyal_bracket: both grids must have s = 0");
  const QPDGrid ab = twisted_product(b, wa, wb, 0.0);
  const QPDGrid ba = twisted_product(b, wb, wa, 0.0);
  QPDGrid out = ab;
  const cplx minus_i(0.0, -1.0);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = minus_i * (ab.values[i] - ba.values[i]);
  return out;
}

cplx delta_basis_fn(const Backend& b, int m, int n, const PhasePoint& p, double s) {
  const int d = b.basis().dim();
  if (m < 0 || n < 0 || m >= d || n >= d) throw DomainError("delta_basis_fn: index out of range");
  return b.sw_kernel(p, s)(m, n);
}

double PostulateReport::max_violation() const {
  double m = 0.0;
  for (const auto& r : rows) {
    m = std::max({m, r.reality, r.standardization, r.covariance});
    if (r.traciality) m = std::max(m, *r.traciality);
  }
  return m;
}

PostulateReport verify_sw_postulates(const Backend& b, const std::vector<double>& s_list,
                                     std::uint64_t seed, const VerifyOptions& options) {
  if (options.n_operators < 1 || options.n_group_elements < 1)
    throw DomainError("verify_sw_postulates: need at least one operator and one group element");
  PostulateReport report;
  report.backend_id = b.id();
  report.seed = seed;
  report.n_operators = options.n_operators;
  report.n_group_elements = options.n_group_elements;
  report.operator_support = options.operator_support;

  const BasisLabel basis = b.basis();
  std::vector<HilbertOperator> ops;
  std::vector<HilbertOperator> adjoints;
  for (int i = 0; i < options.n_operators; ++i) {
    ops.push_back(random_operator(basis, derive_seed(seed, static_cast<std::uint64_t>(i)),
                                  options.operator_support));
    adjoints.push_back(adjoint(ops.back()));
  }
  std::mt19937_64 rng(derive_seed(seed, 0xC0FFEEULL));
  std::vector<GroupElement> group;
  for (int i = 0; i < options.n_group_elements; ++i) group.push_back(b.random_group_element(rng));

  // Transformed operators T^dagger A T, paired op i with element i mod n_g.
  std::vector<HilbertOperator> moved;
  for (int i = 0; i < options.n_operators; ++i) {
    const HilbertOperator t = b.group_operator(group[i % options.n_group_elements]);
    moved.push_back(adjoint(t) * ops[i] * t);
  }

  const auto& g = b.grid();
  const std::size_t stride =
      std::max<std::size_t>(1, (g.size() + options.max_covariance_nodes - 1) /
                                   std::max<std::size_t>(1, options.max_covariance_nodes));
  std::vector<std::size_t> cov_nodes;
  for (std::size_t i = 0; i < g.size(); i += stride) cov_nodes.push_back(i);

  auto tracial = [&](double s) {
    if (!options.traciality_s.empty())
      return std::find(options.traciality_s.begin(), options.traciality_s.end(), s) !=
             options.traciality_s.end();
    return has_symbol_route(b, s) && has_symbol_route(b, -s);
  };

  const HilbertOperator identity = HilbertOperator::identity(basis);
  const std::vector<cplx> block_q =
      compact(b) ? std::vector<cplx>() : sw_symbol(b, identity, -1.0).values;
  for (double s : s_list) {
    PostulateViolation row;
    row.s = s;
    const auto syms = sw_symbols(b, ops, s);
    const auto syms_adj = sw_symbols(b, adjoints, s);

    // Reality: F_{A^dagger} = F_A^*, and the kernel itself is hermitian.
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const double scale = scale_of(syms[i].values);
      for (std::size_t k = 0; k < g.size(); ++k)
        row.reality = std::max(row.reality,
                               std::abs(syms_adj[i].values[k] - std::conj(syms[i].values[k])) / scale);
    }
    if (has_symbol_route(b, s) && (compact(b) || b.kernel_route_preferred(s))) {
      for (std::size_t k : cov_nodes) {
        if (!compact(b) || b.basis().dim() <= 64) {
          const HilbertOperator delta = b.sw_kernel(g.nodes[k], s);
          const double scale = std::max(1.0, delta.matrix().cwiseAbs().maxCoeff());
          row.reality = std::max(row.reality, hermiticity_defect(delta) / scale);
        }
      }
    }

    // Standardization: integral of F_A is Tr A, and F_I = 1.
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const cplx integral = integrate(g, syms[i].values);
      row.standardization = std::max(row.standardization, std::abs(integral - ops[i].trace()) /
                                                              scale_of(syms[i].values));
    }
    {
      // On a truncated space F_I = 1 only where coherent states stay inside the block,
      // and only for s < 0, where the trace of the kernel converges absolutely.
      const bool planar_ok = !compact(b) && s < 0.0;
      // Rounding in the coefficients of I is amplified by the gain of the s-map.
      double gain = 1.0;
      if (compact(b))
        for (std::size_t k = 0; k < b.harmonic_count(); ++k)
          if (b.tau(k) > 0.0) gain = std::max(gain, std::pow(b.tau(k), -0.5 * s));
      const QPDGrid one = (compact(b) || planar_ok) ? sw_symbol(b, identity, s) : QPDGrid{};
      for (std::size_t k = 0; k < one.values.size(); ++k)
        if (compact(b) || 1.0 - block_q[k].real() < 1e-12)
          row.standardization = std::max(row.standardization, std::abs(one.values[k] - 1.0) / gain);
    }

    // Covariance: F_A(g . Omega) = F_{T^dagger A T}(Omega).
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const GroupElement& el = group[i % group.size()];
      const SymbolEvaluator direct(b, ops[i], s);
      const SymbolEvaluator shifted(b, moved[i], s);
      const double scale = scale_of(syms[i].values);
      std::vector<double> err(cov_nodes.size(), 0.0);
      parallel_for(cov_nodes.size(), [&](std::size_t c) {
        const PhasePoint& p = g.nodes[cov_nodes[c]];
        err[c] = std::abs(shifted.at(p) - direct.at(b.act(el, p))) / scale;
      });
      for (double e : err) row.covariance = std::max(row.covariance, e);
    }

    // Traciality: integral of F_A(s) F_B(-s) is Tr(AB).
    if (tracial(s)) {
      const auto neg = (s == 0.0) ? syms : sw_symbols(b, ops, -s);
      double worst = 0.0;
      for (std::size_t i = 0; i < ops.size(); ++i) {
        const std::size_t j = (i + 1) % ops.size();
        cplx integral = 0.0;
        double magnitude = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
          const cplx term = g.weights[k] * syms[i].values[k] * neg[j].values[k];
          integral += term;
          magnitude += std::abs(term);
        }
        const cplx exact = trace_product(ops[i], ops[j]);
        worst = std::max(worst, std::abs(integral - exact) / std::max(1.0, magnitude));
      }
      row.traciality = worst;
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace phasekit
