#include "phasekit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "phasekit/errors.hpp"

namespace phasekit::io {

namespace {

json grid_descriptor(const QuadratureGrid& g) {
  json j;
  if (g.kind == GridKind::Sphere) {
    j = {{"kind", "sphere"}, {"two_j", g.two_j}, {"level", g.level}, {"n_theta", g.n_rings},
         {"n_phi", g.n_phi}};
  } else {
    j = {{"kind", "planar"}, {"r_max", g.r_max}, {"n_r", g.n_rings}, {"n_phi", g.n_phi}};
  }
  j["nodes"] = g.size();
  return j;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& field, const char* name, long line) {
  const std::string t = trim(field);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw FormatError(std::string(name) + " is not a number: '" + t + "'", line);
  return v;
}

long long parse_int(const std::string& field, const char* name, long line) {
  const std::string t = trim(field);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw FormatError(std::string(name) + " is not an integer: '" + t + "'", line);
  return v;
}

const char* kind_name(BasisKind k) { return k == BasisKind::Fock ? "fock" : "spin"; }

}  // namespace

json operator_to_json(const HilbertOperator& a) {
  json entries = json::array();
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) entries.push_back({a(r, c).real(), a(r, c).imag()});
  return {{"basis", {{"kind", kind_name(a.basis().kind)}, {"param", a.basis().param}}},
          {"entries", std::move(entries)}};
}

HilbertOperator operator_from_json(const json& j) {
  try {
    const auto& basis = j.at("basis");
    const std::string kind = basis.at("kind").get<std::string>();
    const int param = basis.at("param").get<int>();
    if (param < 0) throw FormatError("basis param must be >= 0");
    BasisLabel b;
    if (kind == "fock")
      b = BasisLabel::fock(param);
    else if (kind == "spin")
      b = BasisLabel::spin(param);
    else
      throw FormatError("basis kind must be \"fock\" or \"spin\", got \"" + kind + "\"");
    const auto& e = j.at("entries");
    const std::size_t d = static_cast<std::size_t>(b.dim());
    if (!e.is_array() || e.size() != d * d)
      throw FormatError("expected " + std::to_string(d * d) + " entries for " + b.describe());
    Matrix m(b.dim(), b.dim());
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!e[i].is_array() || e[i].size() != 2)
        throw FormatError("entry " + std::to_string(i) + " is not a [re, im] pair");
      m(static_cast<Eigen::Index>(i / d), static_cast<Eigen::Index>(i % d)) =
          cplx(e[i][0].get<double>(), e[i][1].get<double>());
    }
    return {b, std::move(m)};
  } catch (const json::exception& ex) {
    throw FormatError(std::string("operator file: ") + ex.what());
  }
}

json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& ex) {
    throw FormatError(path + ": " + ex.what());
  }
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw IoError("write to " + path + " failed");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_operator(const std::string& path, const HilbertOperator& a) {
  write_json(path, operator_to_json(a));
}

HilbertOperator read_operator(const std::string& path) { return operator_from_json(read_json(path)); }

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string config_hash(const json& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string sidecar_path(const std::string& csv_path) { return csv_path + ".json"; }

std::string grid_csv(const QuadratureGrid& grid) {
  std::string out = grid.kind == GridKind::Sphere ? "theta,phi,weight\n" : "re_alpha,im_alpha,weight\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [c1, c2] = coordinates(grid.nodes[i]);
    out += format_double(c1) + "," + format_double(c2) + "," + format_double(grid.weights[i]) + "\n";
  }
  return out;
}

std::string qpd_csv(const QuadratureGrid& grid, const QPDGrid& f) {
  if (f.values.size() != grid.size()) throw DomainError("qpd_csv: value count does not match grid");
  std::string out = "coord1,coord2,weight,re_value,im_value\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [c1, c2] = coordinates(grid.nodes[i]);
    out += format_double(c1) + "," + format_double(c2) + "," + format_double(grid.weights[i]) + "," +
           format_double(f.values[i].real()) + "," + format_double(f.values[i].imag()) + "\n";
  }
  return out;
}

json qpd_sidecar(const Backend& b, const QPDGrid& f) {
  json j = {{"backend", b.id()},
            {"s", f.s},
            {"grid", grid_descriptor(b.grid())},
            {"route", f.route},
            {"max_imag", f.max_imag()}};
  if (std::isfinite(f.xi_cutoff)) {
    j["xi_cutoff"] = f.xi_cutoff;
    j["dropped_mass"] = f.dropped_mass;
  }
  return j;
}

std::string records_csv(const std::vector<MeasurementRecord>& records) {
  std::string out = "coord1,coord2,ruler_kind,ruler_index,probability,shots,eta\n";
  std::vector<const StateVector*> custom;
  for (const auto& r : records) {
    const auto [c1, c2] = coordinates(r.omega);
    std::string kind;
    long long index = 0;
    if (const auto* f = std::get_if<FockN>(&r.ruler)) {
      kind = "fock";
      index = f->n;
    } else if (const auto* m = std::get_if<SpinMu>(&r.ruler)) {
      kind = "spin";
      index = m->two_mu;
    } else {
      kind = "custom";
      const auto& s = std::get<Custom>(r.ruler).state;
      auto it = std::find_if(custom.begin(), custom.end(), [&](const StateVector* c) {
        return c->amplitudes() == s.amplitudes();
      });
      index = it - custom.begin();
      if (it == custom.end()) custom.push_back(&s);
    }
    out += format_double(c1) + "," + format_double(c2) + "," + kind + "," + std::to_string(index) +
           "," + format_double(r.probability) + "," + std::to_string(r.shots) + "," +
           format_double(r.eta) + "\n";
  }
  return out;
}

json records_sidecar(const Backend& b, const std::vector<MeasurementRecord>& records,
                     std::uint64_t seed) {
  json custom = json::array();
  std::vector<const StateVector*> seen;
  for (const auto& r : records) {
    const auto* c = std::get_if<Custom>(&r.ruler);
    if (!c) continue;
    if (std::any_of(seen.begin(), seen.end(),
                    [&](const StateVector* s) { return s->amplitudes() == c->state.amplitudes(); }))
      continue;
    seen.push_back(&c->state);
    json amps = json::array();
    for (Eigen::Index i = 0; i < c->state.amplitudes().size(); ++i)
      amps.push_back({c->state.amplitudes()(i).real(), c->state.amplitudes()(i).imag()});
    custom.push_back(std::move(amps));
  }
  return {{"backend", b.id()}, {"grid", grid_descriptor(b.grid())}, {"seed", seed},
          {"custom_rulers", std::move(custom)}};
}

std::vector<MeasurementRecord> parse_records_csv(const std::string& text, const Backend& b,
                                                 const json& sidecar) {
  if (sidecar.is_object() && sidecar.contains("backend") &&
      sidecar.at("backend").get<std::string>() != b.id())
    throw FormatError("records were produced for " + sidecar.at("backend").get<std::string>() +
                      ", not " + b.id());
  std::vector<StateVector> custom;
  if (sidecar.is_object() && sidecar.contains("custom_rulers")) {
    for (const auto& amps : sidecar.at("custom_rulers")) {
      if (!amps.is_array() || static_cast<int>(amps.size()) != b.basis().dim())
        throw FormatError("custom ruler in sidecar has the wrong dimension");
      Vector v(b.basis().dim());
      for (std::size_t i = 0; i < amps.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = cplx(amps[i].at(0).get<double>(), amps[i].at(1).get<double>());
      custom.emplace_back(b.basis(), std::move(v));
    }
  }
  const bool sphere = b.grid().kind == GridKind::Sphere;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw FormatError("empty records file", 1);
  ++lineno;
  if (trim(line) != "coord1,coord2,ruler_kind,ruler_index,probability,shots,eta")
    throw FormatError("header must be coord1,coord2,ruler_kind,ruler_index,probability,shots,eta", 1);
  std::vector<MeasurementRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7)
      throw FormatError("expected 7 fields, found " + std::to_string(f.size()), lineno);
    MeasurementRecord r;
    const double c1 = parse_double(f[0], "coord1", lineno);
    const double c2 = parse_double(f[1], "coord2", lineno);
    if (sphere) {
      if (c1 < 0.0 || c1 > std::numbers::pi) throw FormatError("theta outside [0, pi]", lineno);
      r.omega = SphericalPoint{c1, c2};
    } else {
      r.omega = PlanarPoint{cplx(c1, c2)};
    }
    const std::string kind = trim(f[2]);
    const long long index = parse_int(f[3], "ruler_index", lineno);
    if (kind == "fock") {
      r.ruler = FockN{static_cast<int>(index)};
    } else if (kind == "spin") {
      r.ruler = SpinMu{static_cast<int>(index)};
    } else if (kind == "custom") {
      if (index < 0 || index >= static_cast<long long>(custom.size()))
        throw FormatError("custom ruler " + std::to_string(index) + " is not listed in the sidecar",
                          lineno);
      r.ruler = Custom{custom[static_cast<std::size_t>(index)]};
    } else {
      throw FormatError("ruler_kind must be fock, spin or custom, got '" + kind + "'", lineno);
    }
    try {
      ruler_state(b, r.ruler);
    } catch (const Error& ex) {
      throw FormatError(ex.what(), lineno);
    }
    r.probability = parse_double(f[4], "probability", lineno);
    if (!(r.probability >= 0.0 && r.probability <= 1.0))
      throw FormatError("probability outside [0, 1]", lineno);
    r.shots = parse_int(f[5], "shots", lineno);
    if (r.shots < 0) throw FormatError("shots must be >= 0", lineno);
    r.eta = parse_double(f[6], "eta", lineno);
    if (!(r.eta > 0.0 && r.eta <= 1.0)) throw FormatError("eta outside (0, 1]", lineno);
    out.push_back(std::move(r));
  }
  if (out.empty()) throw FormatError("records file has no data rows", lineno);
  return out;
}

std::vector<MeasurementRecord> read_records(const std::string& csv_path, const Backend& b) {
  json sidecar;
  std::ifstream probe(sidecar_path(csv_path));
  if (probe) sidecar = read_json(sidecar_path(csv_path));
  try {
    return parse_records_csv(read_text(csv_path), b, sidecar);
  } catch (const FormatError& ex) {
    throw ex.in_file(csv_path);
  }
}

json reconstruction_report(const DensityReconstruction& r) {
  json skipped = json::array();
  for (const auto& nu : r.skipped) skipped.push_back(describe(nu));
  json j = {{"coverage", r.coverage},
            {"skipped_indices", std::move(skipped)},
            {"hermiticity_defect", r.hermiticity_defect},
            {"n_rulers", r.n_rulers},
            {"projection_distance", trace_distance(r.raw, r.rho.op())}};
  j["trace_distance_if_truth_known"] = r.trace_distance ? json(*r.trace_distance) : json(nullptr);
  return j;
}

json postulate_report(const PostulateReport& r) {
  json rows = json::array();
  for (const auto& v : r.rows) {
    rows.push_back({{"s", v.s},
                    {"reality", v.reality},
                    {"standardization", v.standardization},
                    {"covariance", v.covariance},
                    {"traciality", v.traciality ? json(*v.traciality) : json(nullptr)}});
  }
  return {{"backend", r.backend_id},
          {"seed", r.seed},
          {"n_operators", r.n_operators},
          {"n_group_elements", r.n_group_elements},
          {"operator_support", r.operator_support},
          {"max_violation", r.max_violation()},
          {"rows", std::move(rows)}};
}

}  // namespace phasekit::io
