#include "phasekit/tomography.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

#include "phasekit/diagnostics.hpp"
#include "phasekit/errors.hpp"
#include "phasekit/hw_backend.hpp"
#include "phasekit/parallel.hpp"
#include "phasekit/specfun.hpp"
#include "phasekit/su2_backend.hpp"

namespace phasekit {

using specfun::HalfInteger;

namespace {

bool is_planar(const Backend& b) { return b.basis().kind == BasisKind::Fock; }

void require_basis(const Backend& b, const BasisLabel& basis, const char* what) {
  if (!(basis == b.basis()))
    throw BasisMismatch(std::string(what) + ": " + basis.describe() + " is not the basis of " +
                        b.id());
}

// Hashable key for a phase-space point; coordinates written with 17
// significant digits read back bit-exactly, so the rounding only guards
// against cosmetic differences.
struct PointKey {
  long long a;
  long long b;
  bool operator==(const PointKey&) const = default;
};
struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const {
    return std::hash<long long>()(k.a) * 1000003u ^ std::hash<long long>()(k.b);
  }
};
PointKey key_of(const PhasePoint& p) {
  const auto [c1, c2] = coordinates(p);
  return {std::llround(c1 * 1e10), std::llround(c2 * 1e10)};
}

double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

// T(Omega)^dagger rho T(Omega).
Matrix displaced_state(const Backend& b, const DensityMatrix& rho, const PhasePoint& omega) {
  const Matrix t = b.displacement(omega).matrix();
  return t.adjoint() * rho.op().matrix() * t;
}

bool complete_set(const Backend& b, const std::vector<RulerLabel>& rulers) {
  std::vector<bool> seen(static_cast<std::size_t>(b.basis().dim()), false);
  std::size_t count = 0;
  for (const auto& u : rulers) {
    int idx = -1;
    if (const auto* f = std::get_if<FockN>(&u); f && is_planar(b))
      idx = f->n;
    else if (const auto* m = std::get_if<SpinMu>(&u); m && !is_planar(b))
      idx = spin_index(b.basis().param, m->two_mu);
    if (idx < 0 || idx >= b.basis().dim() || seen[static_cast<std::size_t>(idx)]) return false;
    seen[static_cast<std::size_t>(idx)] = true;
    ++count;
  }
  if (is_planar(b)) {
    // Overflow bucket closes any leading block |0>..|K>.
    for (std::size_t i = 0; i < count; ++i)
      if (!seen[i]) return false;
    return count > 0;
  }
  return count == seen.size();
}

std::string region_message(const QuadratureGrid& grid, const std::vector<std::size_t>& missing) {
  double lo1 = std::numeric_limits<double>::infinity(), hi1 = -lo1, lo2 = lo1, hi2 = -lo1;
  for (auto i : missing) {
    const auto [c1, c2] = coordinates(grid.nodes[i]);
    lo1 = std::min(lo1, c1);
    hi1 = std::max(hi1, c1);
    lo2 = std::min(lo2, c2);
    hi2 = std::max(hi2, c2);
  }
  const bool sphere = grid.kind == GridKind::Sphere;
  std::ostringstream os;
  os << "records cover " << grid.size() - missing.size() << " of " << grid.size()
     << " grid nodes; missing region " << (sphere ? "theta" : "re_alpha") << " in [" << lo1 << ", "
     << hi1 << "], " << (sphere ? "phi" : "im_alpha") << " in [" << lo2 << ", " << hi2
     << "], first missing node " << describe(grid.nodes[missing.front()]);
  return os.str();
}

std::string index_list(const Backend& b, const std::vector<std::size_t>& slots) {
  std::ostringstream os;
  const std::size_t shown = std::min<std::size_t>(slots.size(), 8);
  for (std::size_t i = 0; i < shown; ++i) os << (i ? ", " : "") << describe(b.harmonic_index(slots[i]));
  if (slots.size() > shown) os << ", ... (" << slots.size() << " in total)";
  return os.str();
}

const RulerLabel& common_ruler(const std::vector<MeasurementRecord>& records, const char* what) {
  if (records.empty()) throw CoverageError(std::string(what) + ": no records");
  for (const auto& r : records)
    if (!same_ruler(r.ruler, records.front().ruler))
      throw DomainError(std::string(what) + ": records mix rulers " + describe(records.front().ruler) +
                        " and " + describe(r.ruler));
  return records.front().ruler;
}

void require_lossless(const std::vector<MeasurementRecord>& records, const char* what) {
  for (const auto& r : records)
    if (r.eta != 1.0)
      throw DomainError(std::string(what) +
                        ": lossy records are handled by the photon-counting series");
}

// Legendre polynomials P_0..P_lmax at x.
void legendre_all(int lmax, double x, std::vector<double>& p) {
  p.assign(static_cast<std::size_t>(lmax) + 1, 0.0);
  p[0] = 1.0;
  if (lmax >= 1) p[1] = x;
  for (int l = 1; l < lmax; ++l)
    p[static_cast<std::size_t>(l) + 1] =
        ((2.0 * l + 1.0) * x * p[static_cast<std::size_t>(l)] - l * p[static_cast<std::size_t>(l) - 1]) /
        (l + 1.0);
}

}  // namespace

std::string describe(const RulerLabel& u) {
  if (const auto* f = std::get_if<FockN>(&u)) return "fock:" + std::to_string(f->n);
  if (const auto* m = std::get_if<SpinMu>(&u)) return "spin:two_mu=" + std::to_string(m->two_mu);
  return "custom:" + std::get<Custom>(u).state.basis().describe();
}

bool same_ruler(const RulerLabel& a, const RulerLabel& b) {
  if (a.index() != b.index()) return false;
  if (const auto* f = std::get_if<FockN>(&a)) return f->n == std::get<FockN>(b).n;
  if (const auto* m = std::get_if<SpinMu>(&a)) return m->two_mu == std::get<SpinMu>(b).two_mu;
  const auto& x = std::get<Custom>(a).state;
  const auto& y = std::get<Custom>(b).state;
  return x.basis() == y.basis() && x.amplitudes() == y.amplitudes();
}

StateVector ruler_state(const Backend& b, const RulerLabel& u) {
  const BasisLabel basis = b.basis();
  if (const auto* f = std::get_if<FockN>(&u)) {
    if (!is_planar(b)) throw DomainError("ruler " + describe(u) + " needs a Fock basis");
    if (f->n < 0 || f->n > basis.param)
      throw DomainError("ruler " + describe(u) + " outside " + basis.describe());
    return StateVector::basis_state(basis, f->n);
  }
  if (const auto* m = std::get_if<SpinMu>(&u)) {
    if (is_planar(b)) throw DomainError("ruler " + describe(u) + " needs a spin basis");
    if (!specfun::is_valid_projection(HalfInteger(basis.param), HalfInteger(m->two_mu)))
      throw DomainError("ruler " + describe(u) + " outside " + basis.describe());
    return StateVector::basis_state(basis, spin_index(basis.param, m->two_mu));
  }
  const auto& s = std::get<Custom>(u).state;
  require_basis(b, s.basis(), "ruler_state");
  if (std::abs(s.norm() - 1.0) > 1e-10) throw DomainError("custom ruler state is not normalized");
  return s;
}

RulerLabel reference_ruler(const Backend& b) {
  if (is_planar(b)) return FockN{0};
  return SpinMu{b.basis().param};
}

std::vector<RulerLabel> complete_ruler_set(const Backend& b) {
  std::vector<RulerLabel> out;
  const int p = b.basis().param;
  for (int i = 0; i <= p; ++i) {
    if (is_planar(b))
      out.emplace_back(FockN{i});
    else
      out.emplace_back(SpinMu{p - 2 * i});
  }
  return out;
}

HilbertOperator displaced_projector(const Backend& b, const RulerLabel& u, const PhasePoint& omega) {
  const StateVector v(b.basis(), b.displacement(omega).matrix() * ruler_state(b, u).amplitudes());
  return v.projector();
}

std::vector<double> thin_photon_distribution(const std::vector<double>& p, double eta) {
  if (!(eta > 0.0) || eta > 1.0) throw DomainError("thinning: eta must lie in (0, 1]");
  if (eta == 1.0) return p;
  const double le = std::log(eta);
  const double l1 = std::log1p(-eta);
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t n = 0; n < p.size(); ++n) {
    double sum = 0.0;
    for (std::size_t m = n; m < p.size(); ++m) {
      if (p[m] == 0.0) continue;
      const int mi = static_cast<int>(m), ni = static_cast<int>(n);
      const double lw = specfun::log_factorial(mi) - specfun::log_factorial(ni) -
                        specfun::log_factorial(mi - ni) + ni * le + (mi - ni) * l1;
      sum += std::exp(lw) * p[m];
    }
    out[n] = sum;
  }
  return out;
}

std::vector<MeasurementRecord> simulate_measurements(const Backend& b, const DensityMatrix& rho,
                                                     const std::vector<RulerLabel>& rulers,
                                                     const QuadratureGrid& grid, long long shots,
                                                     double eta, std::uint64_t seed) {
  require_basis(b, rho.basis(), "simulate_measurements");
  if (!(eta > 0.0) || eta > 1.0) throw DomainError("simulate_measurements: eta must lie in (0, 1]");
  if (shots < 0) throw DomainError("simulate_measurements: shots must be >= 0");
  if (rulers.empty()) throw DomainError("simulate_measurements: empty ruler set");
  std::vector<StateVector> states;
  for (const auto& u : rulers) states.push_back(ruler_state(b, u));
  const bool all_fock = std::all_of(rulers.begin(), rulers.end(),
                                    [](const RulerLabel& u) { return std::holds_alternative<FockN>(u); });
  if (eta < 1.0 && !(is_planar(b) && all_fock))
    throw DomainError("simulate_measurements: eta < 1 needs a Fock backend and Fock rulers");
  if (shots > 0 && !complete_set(b, rulers))
    throw DomainError(
        "simulate_measurements: sampling needs a complete ruler set (every |j,mu>, or Fock "
        "states |0>..|K>)");

  const std::size_t nr = rulers.size();
  // Basis index of each J_z or number eigenstate ruler, -1 for custom states.
  std::vector<int> slot(nr, -1);
  for (std::size_t r = 0; r < nr; ++r) {
    if (const auto* f = std::get_if<FockN>(&rulers[r])) slot[r] = f->n;
    if (const auto* m = std::get_if<SpinMu>(&rulers[r])) slot[r] = spin_index(b.basis().param, m->two_mu);
  }
  std::vector<MeasurementRecord> out(grid.size() * nr);
  parallel_for(grid.size(), [&](std::size_t i) {
    const PhasePoint& omega = grid.nodes[i];
    const Matrix m = displaced_state(b, rho, omega);
    std::vector<double> p(nr);
    std::vector<double> diag(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index k = 0; k < m.rows(); ++k) diag[static_cast<std::size_t>(k)] = m(k, k).real();
    if (eta < 1.0) diag = thin_photon_distribution(diag, eta);
    for (std::size_t r = 0; r < nr; ++r) {
      if (slot[r] >= 0)
        p[r] = diag[static_cast<std::size_t>(slot[r])];
      else
        p[r] = states[r].amplitudes().dot(m * states[r].amplitudes()).real();
    }
    if (shots > 0) {
      std::mt19937_64 rng(derive_seed(seed, i));
      long long remaining = shots;
      double mass = 1.0;
      for (std::size_t r = 0; r < nr; ++r) {
        const double pr = clamp01(p[r]);
        long long c = 0;
        if (remaining > 0 && mass > 0.0) {
          const double q = std::min(1.0, pr / mass);
          std::binomial_distribution<long long> draw(remaining, q);
          c = draw(rng);
        }
        remaining -= c;
        mass -= pr;
        p[r] = static_cast<double>(c) / static_cast<double>(shots);
      }
      // Whatever remains went to the overflow bucket (plane) or is zero.
    }
    for (std::size_t r = 0; r < nr; ++r)
      out[i * nr + r] = MeasurementRecord{omega, rulers[r], clamp01(p[r]), shots, eta};
  });
  return out;
}

double kappa_coefficient(const Backend& b, const RulerLabel& u, const HarmonicIndex& nu) {
  if (is_planar(b)) {
    const auto* x = std::get_if<PlanarXi>(&nu);
    if (!x) throw DomainError("kappa_coefficient: expected a planar harmonic index");
    if (const auto* f = std::get_if<FockN>(&u)) {
      ruler_state(b, u);
      const double r2 = std::norm(x->xi);
      return std::exp(-0.5 * r2) * specfun::laguerre_assoc(f->n, 0, r2);
    }
    if (std::holds_alternative<SpinMu>(u)) throw DomainError("ruler " + describe(u) + " needs a spin basis");
    const auto s = ruler_state(b, u);
    const cplx k = s.amplitudes().dot(displacement_matrix(x->xi, b.basis().param).matrix() * s.amplitudes());
    if (std::abs(k.imag()) > 1e-10 * std::max(1.0, std::abs(k)))
      throw DomainError("kappa_coefficient: custom ruler gives a complex kappa at " + describe(nu));
    return k.real();
  }
  const auto* lm = std::get_if<SphericalLM>(&nu);
  if (!lm) throw DomainError("kappa_coefficient: expected a spherical harmonic index");
  const int two_j = b.basis().param;
  if (lm->l < 0 || lm->l > two_j || std::abs(lm->m) > lm->l)
    throw DomainError("kappa_coefficient: index " + describe(nu) + " outside the band");
  int two_mu = 0;
  if (const auto* m = std::get_if<SpinMu>(&u)) {
    ruler_state(b, u);
    two_mu = m->two_mu;
  } else if (std::holds_alternative<Custom>(u)) {
    const auto s = ruler_state(b, u);
    Eigen::Index idx = 0;
    const double top = s.amplitudes().cwiseAbs2().maxCoeff(&idx);
    if (top < 1.0 - 1e-12)
      throw DomainError("kappa_coefficient: custom spin rulers must be J_z eigenstates");
    two_mu = two_j - 2 * static_cast<int>(idx);
  } else {
    throw DomainError("ruler " + describe(u) + " needs a Fock basis");
  }
  return specfun::clebsch_gordan(HalfInteger(two_j), HalfInteger(two_mu), HalfInteger(2 * lm->l),
                                 HalfInteger(0), HalfInteger(two_j), HalfInteger(two_mu));
}

std::vector<double> kappa_table(const Backend& b, const RulerLabel& u) {
  std::vector<double> k(b.harmonic_count());
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = kappa_coefficient(b, u, b.harmonic_index(i));
  return k;
}

std::vector<double> records_on_grid(const QuadratureGrid& grid,
                                    const std::vector<MeasurementRecord>& records) {
  std::unordered_map<PointKey, std::size_t, PointKeyHash> where;
  where.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) where.emplace(key_of(grid.nodes[i]), i);
  std::vector<double> values(grid.size(), 0.0);
  std::vector<bool> seen(grid.size(), false);
  for (const auto& r : records) {
    const auto it = where.find(key_of(r.omega));
    if (it == where.end())
      throw DomainError("record at " + describe(r.omega) + " is not a node of " + grid.describe());
    if (seen[it->second]) throw DomainError("duplicate record at " + describe(r.omega));
    seen[it->second] = true;
    values[it->second] = r.probability;
  }
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!seen[i]) missing.push_back(i);
  if (!missing.empty()) throw CoverageError(region_message(grid, missing));
  return values;
}

RulerCoefficients reconstruct_coeffs(const Backend& b, const std::vector<MeasurementRecord>& records,
                                     const ReconstructOptions& options) {
  const RulerLabel& u = common_ruler(records, "reconstruct_coeffs");
  require_lossless(records, "reconstruct_coeffs");
  const auto& grid = b.grid();
  const auto p = records_on_grid(grid, records);
  const auto kappa = kappa_table(b, u);
  const std::vector<cplx> values(p.begin(), p.end());
  const auto a = b.analyze(values);

  RulerCoefficients out{u, {}, {}, {}, {}, records.front().shots};
  for (const auto& r : records)
    if (r.shots != out.shots) throw DomainError("reconstruct_coeffs: records mix shot counts");
  const std::size_t n = b.harmonic_count();
  out.coeffs.backend_id = b.id();
  out.coeffs.value.assign(n, 0.0);
  out.present.assign(n, false);
  out.variance.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    out.coeffs.index.push_back(b.harmonic_index(k));
    out.coeffs.weight.push_back(b.harmonic_weight(k));
    if (std::abs(kappa[k]) < options.kappa_floor) {
      out.skipped.push_back(b.harmonic_index(k));
      continue;
    }
    out.present[k] = true;
    out.coeffs.value[k] = a[k] / kappa[k];
  }
  if (out.skipped.size() == n)
    throw CoverageError("empty reconstruction: every kappa of " + describe(u) + " is below " +
                        std::to_string(options.kappa_floor));

  if (out.shots > 0) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = clamp01(p[i]) * (1.0 - clamp01(p[i])) / static_cast<double>(out.shots);
      if (v == 0.0) continue;
      const double w2v = grid.weights[i] * grid.weights[i] * v;
      const auto y = b.harmonics_at(grid.nodes[i]);
      for (std::size_t k = 0; k < n; ++k)
        if (out.present[k]) out.variance[k] += w2v * std::norm(y[k]);
    }
    for (std::size_t k = 0; k < n; ++k)
      if (out.present[k]) out.variance[k] /= kappa[k] * kappa[k];
  }
  return out;
}

std::vector<RulerCoefficients> reconstruct_all(const Backend& b,
                                               const std::vector<MeasurementRecord>& records,
                                               const ReconstructOptions& options) {
  std::vector<std::vector<MeasurementRecord>> groups;
  for (const auto& r : records) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return same_ruler(g.front().ruler, r.ruler); });
    if (it == groups.end())
      groups.push_back({r});
    else
      it->push_back(r);
  }
  std::vector<RulerCoefficients> out;
  for (const auto& g : groups) out.push_back(reconstruct_coeffs(b, g, options));
  return out;
}

DensityReconstruction merge_and_reconstruct_density(const Backend& b,
                                                    const std::vector<RulerCoefficients>& sets,
                                                    const DensityMatrix* truth) {
  if (sets.empty()) throw CoverageError("merge_and_reconstruct_density: no coefficient sets");
  const std::size_t n = b.harmonic_count();
  for (const auto& s : sets)
    if (s.coeffs.backend_id != b.id() || s.coeffs.value.size() != n)
      throw BasisMismatch("merge_and_reconstruct_density: coefficients from " + s.coeffs.backend_id +
                          " do not match " + b.id());
  std::vector<cplx> merged(n, 0.0);
  std::vector<std::size_t> uncovered;
  std::vector<bool> skipped(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    bool weighted = true;
    int count = 0;
    for (const auto& s : sets) {
      if (!s.present[k]) {
        skipped[k] = true;
        continue;
      }
      ++count;
      if (s.shots <= 0 || !(s.variance[k] > 0.0)) weighted = false;
    }
    if (count == 0) {
      uncovered.push_back(k);
      continue;
    }
    cplx sum = 0.0;
    double wsum = 0.0;
    for (const auto& s : sets) {
      if (!s.present[k]) continue;
      const double w = weighted ? 1.0 / s.variance[k] : 1.0;
      sum += w * s.coeffs.value[k];
      wsum += w;
    }
    merged[k] = sum / wsum;
  }
  if (!uncovered.empty())
    throw CoverageError("uncovered harmonic indices: " + index_list(b, uncovered) +
                        "; add a ruler whose kappa is nonzero there");

  HilbertOperator raw = b.assemble(merged);
  DensityMatrix rho = physical_projection(raw);
  std::vector<HarmonicIndex> skipped_list;
  for (std::size_t k = 0; k < n; ++k)
    if (skipped[k]) skipped_list.push_back(b.harmonic_index(k));
  std::optional<double> td;
  if (truth) {
    require_basis(b, truth->basis(), "merge_and_reconstruct_density");
    td = trace_distance(rho.op(), truth->op());
  }
  const double defect = hermiticity_defect(raw);
  return DensityReconstruction{std::move(raw), std::move(rho), 1.0, std::move(skipped_list),
                               defect, td, sets.size()};
}

QPDGrid reconstruct_qpd(const Backend& b, const std::vector<MeasurementRecord>& records, double s,
                        const ReconstructOptions& options) {
  const RulerLabel& u = common_ruler(records, "reconstruct_qpd");
  require_lossless(records, "reconstruct_qpd");
  const auto p = records_on_grid(b.grid(), records);
  const auto kappa = kappa_table(b, u);
  auto c = b.analyze(std::vector<cplx>(p.begin(), p.end()));
  std::vector<std::size_t> low;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (std::abs(kappa[k]) < options.kappa_floor) {
      low.push_back(k);
      c[k] = 0.0;
      continue;
    }
    c[k] *= std::pow(b.tau(k), -0.5 * s) / kappa[k];
  }
  QPDGrid f;
  f.backend_id = b.id();
  f.s = s;
  f.route = "harmonic";
  f.xi_cutoff = b.harmonic_cutoff();
  if (!low.empty()) {
    if (!is_planar(b))
      throw CoverageError("ruler " + describe(u) + " has kappa below the floor at " +
                          index_list(b, low) + "; merge rulers to recover these indices");
    warn("regularization",
         std::to_string(low.size()) + " xi nodes with kappa below the floor were dropped",
         static_cast<double>(low.size()));
  }
  if (is_planar(b) && !c.empty()) {
    auto radius = [&](std::size_t k) { return std::abs(std::get<PlanarXi>(b.harmonic_index(k)).xi); };
    const double outer = radius(c.size() - 1);
    for (std::size_t k = c.size(); k-- > 0 && std::abs(radius(k) - outer) < 1e-12;)
      f.dropped_mass += b.harmonic_weight(k) * std::abs(c[k]);
  }
  f.values = b.synthesize(c);
  return f;
}

QPDGrid reconstruct_qpd_kernel(const Backend& b, const std::vector<MeasurementRecord>& records,
                               double s, const ReconstructOptions& options) {
  const auto* su2 = dynamic_cast<const Su2Backend*>(&b);
  if (!su2) throw DomainError("reconstruct_qpd_kernel: the Legendre kernel needs the sphere");
  const RulerLabel& u = common_ruler(records, "reconstruct_qpd_kernel");
  require_lossless(records, "reconstruct_qpd_kernel");
  const auto& grid = b.grid();
  const auto p = records_on_grid(grid, records);
  const int two_j = su2->two_j();
  std::vector<double> g(static_cast<std::size_t>(two_j) + 1);
  std::vector<std::size_t> low;
  for (int l = 0; l <= two_j; ++l) {
    const double kappa = kappa_coefficient(b, u, SphericalLM{l, 0});
    if (std::abs(kappa) < options.kappa_floor) {
      low.push_back(Su2Backend::slot(l, 0));
      continue;
    }
    g[static_cast<std::size_t>(l)] =
        (2.0 * l + 1.0) / (two_j + 1.0) / (kappa * std::pow(su2->tau_l(l), 0.5 * s));
  }
  if (!low.empty())
    throw CoverageError("ruler " + describe(u) + " has kappa below the floor at " + index_list(b, low));

  std::vector<std::array<double, 3>> n(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& q = std::get<SphericalPoint>(grid.nodes[i]);
    n[i] = {std::sin(q.theta) * std::cos(q.phi), std::sin(q.theta) * std::sin(q.phi), std::cos(q.theta)};
  }
  QPDGrid f;
  f.backend_id = b.id();
  f.s = s;
  f.route = "kernel";
  f.values.assign(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t i) {
    std::vector<double> leg;
    double sum = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double x = std::clamp(n[i][0] * n[k][0] + n[i][1] * n[k][1] + n[i][2] * n[k][2], -1.0, 1.0);
      legendre_all(two_j, x, leg);
      double kern = 0.0;
      for (int l = 0; l <= two_j; ++l) kern += g[static_cast<std::size_t>(l)] * leg[static_cast<std::size_t>(l)];
      sum += grid.weights[k] * kern * p[k];
    }
    f.values[i] = sum;
  });
  return f;
}

double photon_series_ratio(double s, double eta) {
  if (!(eta > 0.0) || eta > 1.0) throw DomainError("photon_series_ratio: eta must lie in (0, 1]");
  if (!(s < 1.0)) throw DomainError("photon_series_ratio: s must be < 1");
  return (2.0 + eta * (s - 1.0)) / (eta * (s - 1.0));
}

SeriesValue photon_counting_series(const std::vector<double>& p, double s, double eta) {
  const double r = photon_series_ratio(s, eta);
  if (p.empty()) throw CoverageError("photon_counting_series: no photon-number probabilities");
  const double pre = 2.0 / (1.0 - s);
  double sum = 0.0, rn = 1.0, prev = 0.0, last = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double t = rn * p[n];
    sum += t;
    prev = last;
    last = std::abs(t);
    rn *= r;
  }
  SeriesValue v{pre * sum, pre * last, static_cast<int>(p.size())};
  if (p.size() >= 2 && last > prev && v.last_term > 1e-12)
    throw DivergentSeries("photon-counting series still growing at n_cut = " +
                          std::to_string(p.size() - 1) + " (last term " +
                          std::to_string(v.last_term) + ", ratio " + std::to_string(r) + ")");
  return v;
}

std::vector<SeriesPoint> reconstruct_qpd_photon_counting(const std::vector<MeasurementRecord>& records,
                                                         double s) {
  struct Group {
    PhasePoint omega;
    double eta;
    std::map<int, double> p;
  };
  std::vector<Group> groups;
  std::unordered_map<PointKey, std::size_t, PointKeyHash> where;
  for (const auto& r : records) {
    const auto* f = std::get_if<FockN>(&r.ruler);
    if (!f) throw DomainError("photon-counting series needs Fock rulers, got " + describe(r.ruler));
    const auto key = key_of(r.omega);
    auto it = where.find(key);
    if (it == where.end()) {
      it = where.emplace(key, groups.size()).first;
      groups.push_back({r.omega, r.eta, {}});
    }
    Group& g = groups[it->second];
    if (g.eta != r.eta) throw DomainError("records at " + describe(r.omega) + " mix efficiencies");
    if (!g.p.emplace(f->n, r.probability).second)
      throw DomainError("duplicate fock:" + std::to_string(f->n) + " record at " + describe(r.omega));
  }
  std::vector<SeriesPoint> out(groups.size());
  parallel_for(groups.size(), [&](std::size_t i) {
    const Group& g = groups[i];
    std::vector<double> p;
    for (const auto& [n, v] : g.p) {
      if (n != static_cast<int>(p.size()))
        throw CoverageError("photon numbers at " + describe(g.omega) + " have a gap at n = " +
                            std::to_string(p.size()));
      p.push_back(v);
    }
    out[i] = SeriesPoint{g.omega, photon_counting_series(p, s, g.eta)};
  });
  return out;
}

ConvolutionReport operational_convolution_check(const Backend& b, const DensityMatrix& rho,
                                                const DensityMatrix& rho_u, double s,
                                                std::size_t max_points) {
  require_basis(b, rho.basis(), "operational_convolution_check");
  require_basis(b, rho_u.basis(), "operational_convolution_check");
  if (is_planar(b) && s != 0.0)
    throw DomainError("operational_convolution_check: the plane needs s = 0");
  const auto& grid = b.grid();
  const QPDGrid pu = sw_symbol(b, rho_u.op(), -s);
  const std::size_t stride = std::max<std::size_t>(1, (grid.size() + max_points - 1) / std::max<std::size_t>(1, max_points));
  std::vector<std::size_t> outer;
  for (std::size_t i = 0; i < grid.size(); i += stride) outer.push_back(i);
  std::vector<double> diff(outer.size());
  parallel_for(outer.size(), [&](std::size_t o) {
    const PhasePoint& omega = grid.nodes[outer[o]];
    const Matrix t = b.displacement(omega).matrix();
    const double direct = (rho.op().matrix() * t * rho_u.op().matrix() * t.adjoint()).trace().real();
    const GroupElement g = b.representative(omega);
    cplx conv = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (pu.values[k] == cplx(0.0)) continue;
      conv += grid.weights[k] * sw_symbol_at(b, rho.op(), b.act(g, grid.nodes[k]), s) * pu.values[k];
    }
    diff[o] = std::abs(conv - direct);
  });
  ConvolutionReport rep;
  rep.n_points = outer.size();
  for (double d : diff) rep.max_abs_diff = std::max(rep.max_abs_diff, d);
  return rep;
}

double wehrl_entropy(const QuadratureGrid& grid, const std::vector<double>& p) {
  if (p.size() != grid.size()) throw DomainError("wehrl_entropy: value count does not match grid");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < -1e-12)
      throw DomainError("wehrl_entropy: negative probability " + std::to_string(p[i]) + " at " +
                        describe(grid.nodes[i]));
    if (p[i] <= 0.0) continue;
    sum -= grid.weights[i] * p[i] * std::log(p[i]);
  }
  return sum;
}

double wehrl_entropy(const Backend& b, const std::vector<MeasurementRecord>& records) {
  common_ruler(records, "wehrl_entropy");
  return wehrl_entropy(b.grid(), records_on_grid(b.grid(), records));
}

HilbertOperator localization_operator(const Backend& b, const RulerLabel& u,
                                      const std::vector<double>& f, const QuadratureGrid& grid) {
  if (f.size() != grid.size()) throw DomainError("localization_operator: value count does not match grid");
  const Vector a = ruler_state(b, u).amplitudes();
  const int d = b.basis().dim();
  Matrix z = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (f[i] == 0.0) continue;
    const Vector v = b.displacement(grid.nodes[i]).matrix() * a;
    z.noalias() += (grid.weights[i] * f[i]) * (v * v.adjoint());
  }
  return {b.basis(), 0.5 * (z + z.adjoint())};
}

HilbertOperator localization_operator(const Backend& b, const RulerLabel& u,
                                      const std::vector<double>& f) {
  return localization_operator(b, u, f, b.grid());
}

CompletenessDistance completeness_distance(const Backend& b, const DensityMatrix& rho1,
                                           const DensityMatrix& rho2, const RulerLabel& u) {
  require_basis(b, rho1.basis(), "completeness_distance");
  require_basis(b, rho2.basis(), "completeness_distance");
  CompletenessDistance out;
  out.trace_distance = trace_distance(rho1.op(), rho2.op());
  const Matrix diff = rho1.op().matrix() - rho2.op().matrix();
  const Vector a = ruler_state(b, u).amplitudes();
  const auto& grid = b.grid();
  std::vector<double> gap(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const Vector v = b.displacement(grid.nodes[i]).matrix() * a;
    gap[i] = std::abs(v.dot(diff * v).real());
  });
  for (double g : gap) out.sup_p_gap = std::max(out.sup_p_gap, g);
  return out;
}

std::vector<double> ruler_change(const Backend& b, const std::vector<double>& p_v,
                                 const RulerLabel& v, const RulerLabel& u,
                                 const ReconstructOptions& options) {
  if (p_v.size() != b.grid().size()) throw DomainError("ruler_change: value count does not match grid");
  const auto kv = kappa_table(b, v);
  const auto ku = kappa_table(b, u);
  auto c = b.analyze(std::vector<cplx>(p_v.begin(), p_v.end()));
  std::vector<std::size_t> bad;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (std::abs(kv[k]) < options.kappa_floor) {
      if (std::abs(ku[k]) >= options.kappa_floor) bad.push_back(k);
      c[k] = 0.0;
      continue;
    }
    c[k] *= ku[k] / kv[k];
  }
  if (!bad.empty())
    throw CoverageError("ruler_change: " + describe(v) + " carries no information at " + index_list(b, bad));
  const auto values = b.synthesize(c);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i].real();
  return out;
}

std::vector<cplx> rfunction_coefficients(const Backend& b, const RulerCoefficients& c) {
  const auto kappa = kappa_table(b, c.ruler);
  std::vector<cplx> r(kappa.size(), 0.0);
  for (std::size_t k = 0; k < r.size(); ++k)
    if (c.present[k]) r[k] = c.coeffs.value[k] / kappa[k];
  return r;
}

}  // namespace phasekit
