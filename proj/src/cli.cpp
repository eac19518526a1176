#include "phasekit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>

#include "phasekit/diagnostics.hpp"
#include "phasekit/hw_backend.hpp"
#include "phasekit/io.hpp"
#include "phasekit/su2_backend.hpp"
#include "phasekit/sw_core.hpp"
#include "phasekit/tomography.hpp"

namespace phasekit::cli {

using nlohmann::json;

namespace {

bool planar(const RunConfig& c) { return c.group == "hw"; }

double to_double(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError(what + ": '" + text + "' is not a number");
  }
  if (pos != text.size()) throw ConfigError(what + ": '" + text + "' is not a number");
  return v;
}

long long to_integer(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError(what + ": '" + text + "' is not an integer");
  }
  if (pos != text.size()) throw ConfigError(what + ": '" + text + "' is not an integer");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

template <class T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

// Two numbers after a "kind:" prefix.
std::pair<double, double> pair_arg(const std::string& text, const std::string& what) {
  const auto parts = split_list(text);
  if (parts.size() != 2) throw ConfigError(what + " needs two comma-separated numbers");
  return {to_double(parts[0], what), to_double(parts[1], what)};
}

HilbertOperator state_operator(const Backend& b, const RunConfig& c, const std::string& spec) {
  if (spec.empty()) throw ConfigError("no state given (use --state)");
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const BasisLabel basis = b.basis();
  if (spec == "identity")
    return (1.0 / basis.dim()) * HilbertOperator::identity(basis);
  if (kind == "coherent") {
    const auto [x, y] = pair_arg(arg, "coherent state");
    const PhasePoint p = planar(c) ? PhasePoint(PlanarPoint{cplx(x, y)}) : PhasePoint(SphericalPoint{x, y});
    return DensityMatrix::pure(b.coherent_state(p)).op();
  }
  if (kind == "fock" || kind == "spin") {
    if ((kind == "fock") != planar(c)) throw ConfigError("state '" + spec + "' does not fit group " + c.group);
    const int i = static_cast<int>(to_integer(arg, "basis state"));
    try {
      return ruler_state(b, kind == "fock" ? RulerLabel(FockN{i}) : RulerLabel(SpinMu{i})).projector();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (kind == "random") {
    const auto parts = split_list(arg);
    if (parts.size() != 2) throw ConfigError("random state needs rank,seed");
    const int rank = static_cast<int>(to_integer(parts[0], "random rank"));
    if (rank < 1 || rank > basis.dim()) throw ConfigError("random rank outside [1, dim]");
    return random_density(basis, rank, static_cast<std::uint64_t>(to_integer(parts[1], "random seed"))).op();
  }
  HilbertOperator a = io::read_operator(spec);
  if (!(a.basis() == basis))
    throw ConfigError("state file " + spec + " is on " + a.basis().describe() + ", backend is " + b.id());
  return a;
}

DensityMatrix state_density(const Backend& b, const RunConfig& c, const std::string& spec) {
  try {
    return DensityMatrix::from_operator(state_operator(b, c, spec));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("state is not a density matrix: ") + e.what());
  }
}

std::vector<RulerLabel> parse_rulers(const Backend& b, const RunConfig& c) {
  const std::string& spec = c.ruler;
  if (spec == "all") return complete_ruler_set(b);
  if (spec == "reference") return {reference_ruler(b)};
  std::vector<RulerLabel> out;
  auto make = [&](long long i) -> RulerLabel {
    RulerLabel u = planar(c) ? RulerLabel(FockN{static_cast<int>(i)}) : RulerLabel(SpinMu{static_cast<int>(i)});
    try {
      ruler_state(b, u);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    return u;
  };
  if (spec.rfind("upto:", 0) == 0) {
    if (!planar(c)) throw ConfigError("ruler 'upto:K' needs group hw");
    const long long k = to_integer(spec.substr(5), "ruler cutoff");
    for (long long n = 0; n <= k; ++n) out.push_back(make(n));
    return out;
  }
  if (spec.rfind("list:", 0) == 0) {
    for (const auto& item : split_list(spec.substr(5))) out.push_back(make(to_integer(item, "ruler index")));
    if (out.empty()) throw ConfigError("empty ruler list");
    return out;
  }
  throw ConfigError("ruler must be all, reference, upto:K or list:i,j,...");
}

std::vector<double> s_values(const RunConfig& c, std::vector<double> fallback) {
  return c.s.empty() ? fallback : c.s;
}

std::string out_path(const RunConfig& c, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(c.output, ec);
  if (ec) throw IoError("cannot create output directory " + c.output + ": " + ec.message());
  return (std::filesystem::path(c.output) / name).string();
}

struct Context {
  const RunConfig& config;
  std::string hash;
  std::ostream& out;
};

json stamp(const Context& ctx, const std::string& command) {
  return {{"command", command}, {"config_hash", ctx.hash}};
}

int cmd_verify(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto b = make_backend(c);
  const auto s = s_values(c, planar(c) ? std::vector<double>{-1.0, -0.5, 0.0}
                                       : std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
  VerifyOptions opt;
  opt.n_operators = c.operators;
  opt.n_group_elements = c.group_elements;
  opt.operator_support = c.support > 0 ? c.support : (planar(c) ? std::min(10, c.n_max) : -1);
  const double tol = c.tolerance > 0.0 ? c.tolerance : (planar(c) ? 1e-6 : 1e-10);
  const auto report = verify_sw_postulates(*b, s, c.seed, opt);
  json j = stamp(ctx, "verify");
  j["tolerance"] = tol;
  j["report"] = io::postulate_report(report);
  const bool ok = report.max_violation() < tol;
  j["passed"] = ok;
  io::write_json(out_path(c, "verify.json"), j);
  for (const auto& row : report.rows) {
    ctx.out << "s=" << io::format_double(row.s) << " reality=" << row.reality
            << " standardization=" << row.standardization << " covariance=" << row.covariance;
    if (row.traciality) ctx.out << " traciality=" << *row.traciality;
    ctx.out << "\n";
  }
  ctx.out << (ok ? "PASS" : "FAIL") << " max violation " << report.max_violation() << " (tolerance "
          << tol << ")\n";
  return ok ? kOk : kToleranceFailure;
}

int cmd_qpd(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto b = make_backend(c);
  const HilbertOperator a = state_operator(*b, c, c.state);
  for (double s : s_values(c, planar(c) ? std::vector<double>{-1.0, 0.0} : std::vector<double>{-1.0, 0.0, 1.0})) {
    const QPDGrid f = sw_symbol(*b, a, s);
    const std::string path = out_path(c, "qpd_s" + io::format_double(s) + ".csv");
    io::write_text(path, io::qpd_csv(b->grid(), f));
    json side = io::qpd_sidecar(*b, f);
    side.update(stamp(ctx, "qpd"));
    side["state"] = c.state;
    io::write_json(io::sidecar_path(path), side);
    ctx.out << "wrote " << path << " (route " << f.route << ")\n";
  }
  return kOk;
}

int cmd_simulate(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto b = make_backend(c);
  const DensityMatrix rho = state_density(*b, c, c.state);
  const auto rulers = parse_rulers(*b, c);
  const auto records = simulate_measurements(*b, rho, rulers, b->grid(), c.shots, c.eta, c.seed);
  const std::string path = out_path(c, "records.csv");
  io::write_text(path, io::records_csv(records));
  json side = io::records_sidecar(*b, records, c.seed);
  side.update(stamp(ctx, "simulate"));
  io::write_json(io::sidecar_path(path), side);
  ctx.out << "wrote " << records.size() << " records to " << path << "\n";
  return kOk;
}

int cmd_reconstruct(const Context& ctx) {
  const RunConfig& c = ctx.config;
  if (c.records.empty()) throw ConfigError("reconstruct needs --records");
  const auto b = make_backend(c);
  const auto records = io::read_records(c.records, *b);
  const bool lossy = std::any_of(records.begin(), records.end(), [](const auto& r) { return r.eta != 1.0; });
  if (lossy) {
    // Only the photon-counting series accepts lossy data.
    for (double s : s_values(c, {0.0})) {
      const auto pts = reconstruct_qpd_photon_counting(records, s);
      std::string csv = "coord1,coord2,value,last_term,terms\n";
      for (const auto& p : pts) {
        const auto [c1, c2] = coordinates(p.omega);
        csv += io::format_double(c1) + "," + io::format_double(c2) + "," + io::format_double(p.series.value) +
               "," + io::format_double(p.series.last_term) + "," + std::to_string(p.series.terms) + "\n";
      }
      const std::string path = out_path(c, "series_s" + io::format_double(s) + ".csv");
      io::write_text(path, csv);
      json side = stamp(ctx, "reconstruct");
      side["backend"] = b->id();
      side["s"] = s;
      side["route"] = "photon-counting series";
      io::write_json(io::sidecar_path(path), side);
      ctx.out << "wrote " << path << "\n";
    }
    return kOk;
  }
  ReconstructOptions opt;
  opt.kappa_floor = c.kappa_floor;
  const auto sets = reconstruct_all(*b, records, opt);
  std::optional<DensityMatrix> truth;
  if (!c.truth.empty()) truth.emplace(state_density(*b, c, c.truth));
  const auto rec = merge_and_reconstruct_density(*b, sets, truth ? &*truth : nullptr);
  json report = io::reconstruction_report(rec);
  report.update(stamp(ctx, "reconstruct"));
  report["backend"] = b->id();
  io::write_json(out_path(c, "reconstruction.json"), report);
  io::write_operator(out_path(c, "reconstructed_state.json"), rec.rho.op());
  for (double s : c.s) {
    const QPDGrid f = sw_symbol(*b, rec.rho.op(), s);
    const std::string path = out_path(c, "reconstructed_qpd_s" + io::format_double(s) + ".csv");
    io::write_text(path, io::qpd_csv(b->grid(), f));
    json side = io::qpd_sidecar(*b, f);
    side.update(stamp(ctx, "reconstruct"));
    io::write_json(io::sidecar_path(path), side);
  }
  ctx.out << "coverage " << rec.coverage << ", " << rec.skipped.size() << " indices skipped by some ruler"
          << ", hermiticity defect " << rec.hermiticity_defect << "\n";
  if (rec.trace_distance) {
    ctx.out << "trace distance to truth " << *rec.trace_distance << "\n";
    if (c.tolerance > 0.0 && !(*rec.trace_distance < c.tolerance)) {
      ctx.out << "FAIL trace distance above tolerance " << c.tolerance << "\n";
      return kToleranceFailure;
    }
  }
  return kOk;
}

int cmd_entropy(const Context& ctx) {
  RunConfig c = ctx.config;
  if (c.ruler == "all") c.ruler = "reference";
  const auto b = make_backend(c);
  const DensityMatrix rho = state_density(*b, c, c.state);
  const auto rulers = parse_rulers(*b, c);
  if (rulers.size() != 1) throw ConfigError("entropy needs a single ruler");
  const auto records = simulate_measurements(*b, rho, rulers, b->grid(), 0, 1.0, c.seed);
  const double s = wehrl_entropy(*b, records);
  json j = stamp(ctx, "entropy");
  j["backend"] = b->id();
  j["ruler"] = describe(rulers.front());
  j["entropy"] = s;
  io::write_json(out_path(c, "entropy.json"), j);
  ctx.out << "entropy " << io::format_double(s) << "\n";
  return kOk;
}

int cmd_grid_export(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const auto b = make_backend(c);
  const std::string path = out_path(c, "grid.csv");
  io::write_text(path, io::grid_csv(b->grid()));
  json side = stamp(ctx, "grid-export");
  side["backend"] = b->id();
  side["grid"] = b->grid().describe();
  side["total_measure"] = b->grid().total_measure;
  io::write_json(io::sidecar_path(path), side);
  ctx.out << "wrote " << b->grid().size() << " nodes to " << path << "\n";
  return kOk;
}

}  // namespace

json to_json(const RunConfig& c) {
  return {{"group", c.group},
          {"two_j", c.two_j},
          {"n_max", c.n_max},
          {"level", c.level},
          {"n_theta", c.n_theta},
          {"sphere_n_phi", c.sphere_n_phi},
          {"r_max", c.r_max},
          {"n_r", c.n_r},
          {"n_phi", c.n_phi},
          {"s", c.s},
          {"state", c.state},
          {"ruler", c.ruler},
          {"shots", c.shots},
          {"eta", c.eta},
          {"seed", c.seed},
          {"tolerance", c.tolerance},
          {"operators", c.operators},
          {"group_elements", c.group_elements},
          {"support", c.support},
          {"records", c.records},
          {"truth", c.truth},
          {"kappa_floor", c.kappa_floor}};
}

RunConfig from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "group") c.group = field<std::string>(j, "group");
    else if (key == "two_j") c.two_j = field<int>(j, "two_j");
    else if (key == "j") c.two_j = value.is_string() ? parse_two_j(value.get<std::string>())
                                                      : parse_two_j(io::format_double(field<double>(j, "j")));
    else if (key == "n_max") c.n_max = field<int>(j, "n_max");
    else if (key == "level") c.level = field<int>(j, "level");
    else if (key == "n_theta") c.n_theta = field<int>(j, "n_theta");
    else if (key == "sphere_n_phi") c.sphere_n_phi = field<int>(j, "sphere_n_phi");
    else if (key == "r_max") c.r_max = field<double>(j, "r_max");
    else if (key == "n_r") c.n_r = field<int>(j, "n_r");
    else if (key == "n_phi") c.n_phi = field<int>(j, "n_phi");
    else if (key == "s") c.s = field<std::vector<double>>(j, "s");
    else if (key == "state") c.state = field<std::string>(j, "state");
    else if (key == "ruler") c.ruler = field<std::string>(j, "ruler");
    else if (key == "shots") c.shots = field<long long>(j, "shots");
    else if (key == "eta") c.eta = field<double>(j, "eta");
    else if (key == "seed") c.seed = field<std::uint64_t>(j, "seed");
    else if (key == "output") c.output = field<std::string>(j, "output");
    else if (key == "tolerance") c.tolerance = field<double>(j, "tolerance");
    else if (key == "operators") c.operators = field<int>(j, "operators");
    else if (key == "group_elements") c.group_elements = field<int>(j, "group_elements");
    else if (key == "support") c.support = field<int>(j, "support");
    else if (key == "records") c.records = field<std::string>(j, "records");
    else if (key == "truth") c.truth = field<std::string>(j, "truth");
    else if (key == "kappa_floor") c.kappa_floor = field<double>(j, "kappa_floor");
    else throw ConfigError("unknown config field '" + key + "'");
  }
  if (c.group != "su2" && c.group != "hw") throw ConfigError("group must be su2 or hw, got '" + c.group + "'");
  if (c.two_j < 0) throw ConfigError("j must be >= 0");
  if (c.n_max < 1) throw ConfigError("n_max must be >= 1");
  if (c.level < 1 || c.level > 3) throw ConfigError("level must be 1, 2 or 3");
  if (c.shots < 0) throw ConfigError("shots must be >= 0");
  if (!(c.eta > 0.0 && c.eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
  if (c.operators < 1 || c.group_elements < 1) throw ConfigError("operators and group_elements must be >= 1");
  if (!(c.r_max > 0.0) || c.n_r < 1 || c.n_phi < 1) throw ConfigError("planar grid needs positive sizes");
  if (c.n_theta < 0 || c.sphere_n_phi < 0) throw ConfigError("sphere grid sizes must be >= 0");
  return c;
}

int parse_two_j(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    if (text.substr(slash + 1) != "2") throw ConfigError("j must be an integer or half-integer, got '" + text + "'");
    const long long num = to_integer(text.substr(0, slash), "j");
    if (num < 0) throw ConfigError("j must be >= 0");
    return static_cast<int>(num);
  }
  const double v = to_double(text, "j");
  const double twice = 2.0 * v;
  if (!(v >= 0.0) || twice != std::round(twice) || twice > 1e6)
    throw ConfigError("j must be a nonnegative integer or half-integer, got '" + text + "'");
  return static_cast<int>(twice);
}

std::unique_ptr<Backend> make_backend(const RunConfig& c) {
  if (planar(c))
    return std::make_unique<HwBackend>(c.n_max, planar_grid(c.r_max, c.n_r, c.n_phi), default_planar_grid());
  if (c.n_theta > 0) {
    const int nphi = c.sphere_n_phi > 0 ? c.sphere_n_phi : std::max(64, 4 * c.two_j + 1);
    return std::make_unique<Su2Backend>(c.two_j, sphere_grid_nodes(c.two_j, c.n_theta, nphi));
  }
  return std::make_unique<Su2Backend>(c.two_j, c.level);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quasiprobability distributions and displaced-projector tomography", "phasekit"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  struct Flag {
    std::string key;
    CLI::Option* opt;
    std::string value;
  };
  std::vector<std::unique_ptr<Flag>> flags;
  auto add = [&](const std::string& name, const std::string& key, const std::string& help) {
    auto f = std::make_unique<Flag>();
    f->key = key;
    f->opt = app.add_option("--" + name, f->value, help);
    flags.push_back(std::move(f));
  };
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its fields");
  add("group", "group", "su2 or hw");
  add("j", "j", "spin j, e.g. 2 or 3/2");
  add("two-j", "two_j", "twice the spin j");
  add("nmax", "n_max", "Fock cutoff");
  add("level", "level", "sphere grid exactness level (1, 2 or 3)");
  add("n-theta", "n_theta", "explicit sphere grid: theta nodes");
  add("sphere-n-phi", "sphere_n_phi", "explicit sphere grid: phi nodes");
  add("r-max", "r_max", "planar grid radius");
  add("n-r", "n_r", "planar grid radial nodes");
  add("n-phi", "n_phi", "planar grid angular nodes");
  add("s", "s", "comma-separated s values");
  add("state", "state", "coherent:a,b | fock:n | spin:2mu | random:rank,seed | identity | file.json");
  add("ruler", "ruler", "all | reference | upto:K | list:i,j,...");
  add("shots", "shots", "shots per grid node, 0 for exact");
  add("eta", "eta", "detection efficiency in (0, 1]");
  add("seed", "seed", "master seed");
  add("out", "output", "output directory");
  add("tolerance", "tolerance", "pass threshold");
  add("operators", "operators", "random operators for verify");
  add("group-elements", "group_elements", "random group elements for verify");
  add("support", "support", "random operators live on the leading block of this size");
  add("records", "records", "records CSV for reconstruct");
  add("truth", "truth", "true state for reconstruct, same forms as --state");
  add("kappa-floor", "kappa_floor", "smallest |kappa| used in reconstruction");

  std::map<std::string, std::function<int(const Context&)>> commands = {
      {"verify", cmd_verify},   {"qpd", cmd_qpd},         {"simulate", cmd_simulate},
      {"reconstruct", cmd_reconstruct}, {"entropy", cmd_entropy}, {"grid-export", cmd_grid_export}};
  const std::map<std::string, std::string> help = {
      {"verify", "check the Stratonovich-Weyl postulates on random operators"},
      {"qpd", "write quasiprobability grids of a state"},
      {"simulate", "simulate displaced-projector measurements"},
      {"reconstruct", "reconstruct a state from measurement records"},
      {"entropy", "Wehrl entropy of an operational distribution"},
      {"grid-export", "write the backend quadrature grid"}};
  for (const auto& [name, text] : help) app.add_subcommand(name, text);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    json cfg = config_path.empty() ? json::object() : io::read_json(config_path);
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& f : flags) {
      if (f->opt->count() == 0) continue;
      if (f->key == "s") {
        json list = json::array();
        for (const auto& item : split_list(f->value)) list.push_back(to_double(item, "--s"));
        cfg["s"] = list;
      } else if (f->key == "j") {
        cfg.erase("two_j");
        cfg["j"] = f->value;
      } else if (f->key == "group" || f->key == "state" || f->key == "ruler" || f->key == "output" ||
                 f->key == "records" || f->key == "truth") {
        cfg[f->key] = f->value;
      } else if (f->key == "r_max" || f->key == "eta" || f->key == "tolerance" || f->key == "kappa_floor") {
        cfg[f->key] = to_double(f->value, "--" + f->opt->get_name());
      } else {
        const long long v = to_integer(f->value, f->opt->get_name());
        if (f->key == "seed") {
          if (v < 0) throw ConfigError("seed must be >= 0");
          cfg[f->key] = static_cast<std::uint64_t>(v);
        } else {
          cfg[f->key] = v;
        }
      }
      if (f->key == "two_j") cfg.erase("j");
    }
    const RunConfig config = from_json(cfg);
    const std::string hash = io::config_hash({{"command", command}, {"config", to_json(config)}});
    const Context ctx{config, hash, out};
    return commands.at(command)(ctx);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace phasekit::cli
