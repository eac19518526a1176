#include "support.hpp"

#include <filesystem>
#include <sstream>

#include "phasekit/cli.hpp"
#include "phasekit/io.hpp"

using namespace phasekit;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::istringstream in(io::read_text(path));
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("parse_two_j") {
  CHECK(cli::parse_two_j("3/2") == 3);
  CHECK(cli::parse_two_j("1.5") == 3);
  CHECK(cli::parse_two_j("2") == 4);
  CHECK(cli::parse_two_j("0") == 0);
  CHECK_THROWS_AS(cli::parse_two_j("3/4"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_two_j("1.3"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_two_j("-1"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_two_j("abc"), cli::ConfigError);
}

TEST_CASE("config json round trip") {
  cli::RunConfig c;
  c.group = "hw";
  c.n_max = 12;
  c.s = {-1.0, 0.0};
  c.seed = 77;
  const auto back = cli::from_json(cli::to_json(c));
  CHECK(back.group == "hw");
  CHECK(back.n_max == 12);
  CHECK(back.s == c.s);
  CHECK(back.seed == 77);
  CHECK_THROWS_AS(cli::from_json({{"bogus", 1}}), cli::ConfigError);
  CHECK_THROWS_AS(cli::from_json({{"group", "so3"}}), cli::ConfigError);
  CHECK_THROWS_AS(cli::from_json({{"n_max", "ten"}}), cli::ConfigError);
}

TEST_CASE("verify exits 0 on SU(2) and 2 on malformed j") {
  const auto dir = testing::scratch_dir("cli_verify");
  const auto r = run({"verify", "--group", "su2", "--j", "2", "--out", dir});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
  const auto report = io::read_json(dir + "/verify.json");
  CHECK(report["config_hash"].get<std::string>().size() == 16);
  CHECK(report["report"].dump().find("traciality") != std::string::npos);
  const auto bad = run({"verify", "--group", "su2", "--j", "2/3", "--out", dir});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("j") != std::string::npos);
  CHECK(run({"verify", "--nosuchflag"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"verify", "--group", "su2", "--j", "1", "--tolerance", "1e-30", "--operators", "3", "--group-elements", "2", "--out", dir}).code == 1);
}

TEST_CASE("verify on the plane") {
  const auto dir = testing::scratch_dir("cli_verify_hw");
  const auto r = run({"verify", "--group", "hw", "--nmax", "30", "--operators", "5", "--group-elements", "3",
                      "--s", "-1,0", "--out", dir});
  CHECK(r.code == 0);
  const auto report = io::read_json(dir + "/verify.json");
  CHECK(report["tolerance"].get<double>() == 1e-6);
}

TEST_CASE("qpd of Fock |1> has W(0) = -2") {
  const auto dir = testing::scratch_dir("cli_qpd");
  const auto r = run({"qpd", "--group", "hw", "--nmax", "20", "--state", "fock:1", "--s", "0", "--r-max", "4",
                      "--n-r", "20", "--n-phi", "8", "--out", dir});
  REQUIRE(r.code == 0);
  const auto rows = read_csv(dir + "/qpd_s0.csv");
  double nearest = 1e9, w = 0.0, wmin = 1e9;
  for (const auto& row : rows) {
    const double r2 = row[0] * row[0] + row[1] * row[1];
    wmin = std::min(wmin, row[3]);
    if (r2 < nearest) {
      nearest = r2;
      w = row[3];
    }
  }
  CHECK(w == doctest::Approx(-2.0 * (1.0 - 4.0 * nearest) * std::exp(-2.0 * nearest)).epsilon(1e-10));
  CHECK(wmin < -1.9);
  CHECK(std::filesystem::exists(dir + "/qpd_s0.csv.json"));
}

TEST_CASE("qpd of the identity state is constant") {
  const auto dir = testing::scratch_dir("cli_identity");
  const auto r = run({"qpd", "--group", "su2", "--j", "3/2", "--state", "identity", "--s", "-1,0,1", "--out", dir});
  REQUIRE(r.code == 0);
  for (const char* name : {"qpd_s-1.csv", "qpd_s0.csv", "qpd_s1.csv"})
    for (const auto& row : read_csv(dir + "/" + name)) CHECK(row[3] == doctest::Approx(0.25).epsilon(1e-12));
  io::write_operator(dir + "/state.json", HilbertOperator::identity(BasisLabel::spin(3)));
  CHECK(run({"qpd", "--group", "su2", "--j", "3/2", "--state", dir + "/state.json", "--s", "0", "--out", dir}).code == 0);
  for (const auto& row : read_csv(dir + "/qpd_s0.csv")) CHECK(row[3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coherent-state Q grid peaks at the coherent point") {
  const auto dir = testing::scratch_dir("cli_qpeak");
  REQUIRE(run({"qpd", "--group", "su2", "--j", "2", "--state", "coherent:0,0", "--s", "-1", "--out", dir}).code == 0);
  // The maximum sits on the ring closest to the north pole, with value cos^{4j}(theta/2).
  double best = 0.0, best_theta = 0.0, min_theta = 10.0;
  for (const auto& row : read_csv(dir + "/qpd_s-1.csv")) {
    min_theta = std::min(min_theta, row[0]);
    if (row[3] > best) {
      best = row[3];
      best_theta = row[0];
    }
  }
  CHECK(best_theta == min_theta);
  CHECK(best == doctest::Approx(std::pow(std::cos(min_theta / 2.0), 8)).epsilon(1e-12));
}

TEST_CASE("missing state file is an I/O error") {
  const auto dir = testing::scratch_dir("cli_missing");
  const auto r = run({"qpd", "--group", "su2", "--j", "1", "--state", dir + "/nope.json", "--out", dir});
  CHECK(r.code == 3);
  CHECK(r.err.find("nope.json") != std::string::npos);
  CHECK(run({"qpd", "--config", dir + "/absent.json"}).code == 3);
}

TEST_CASE("simulate then reconstruct") {
  const auto dir = testing::scratch_dir("cli_pipeline");
  REQUIRE(run({"simulate", "--group", "su2", "--j", "1", "--state", "random:3,5", "--out", dir}).code == 0);
  const auto r = run({"reconstruct", "--group", "su2", "--j", "1", "--records", dir + "/records.csv",
                      "--truth", "random:3,5", "--tolerance", "1e-10", "--s", "0", "--out", dir});
  CHECK(r.code == 0);
  const auto report = io::read_json(dir + "/reconstruction.json");
  CHECK(report["trace_distance_if_truth_known"].get<double>() < 1e-10);
  CHECK(report["coverage"].get<double>() == 1.0);
  CHECK(std::filesystem::exists(dir + "/reconstructed_state.json"));
  CHECK(std::filesystem::exists(dir + "/reconstructed_qpd_s0.csv"));
  // A different truth fails the tolerance.
  CHECK(run({"reconstruct", "--group", "su2", "--j", "1", "--records", dir + "/records.csv", "--truth",
             "random:3,6", "--tolerance", "1e-10", "--out", dir}).code == 1);
}

TEST_CASE("simulate is deterministic") {
  const auto a = testing::scratch_dir("cli_det_a");
  const auto b = testing::scratch_dir("cli_det_b");
  const auto c = testing::scratch_dir("cli_det_c");
  for (const auto& dir : {a, b})
    REQUIRE(run({"simulate", "--group", "su2", "--j", "1", "--state", "random:2,1", "--shots", "10000", "--seed", "9", "--out", dir}).code == 0);
  REQUIRE(run({"simulate", "--group", "su2", "--j", "1", "--state", "random:2,1", "--shots", "10000", "--seed", "10", "--out", c}).code == 0);
  CHECK(io::read_text(a + "/records.csv") == io::read_text(b + "/records.csv"));
  CHECK(io::read_text(a + "/records.csv.json") == io::read_text(b + "/records.csv.json"));
  CHECK(io::read_text(a + "/records.csv") != io::read_text(c + "/records.csv"));
}

TEST_CASE("reconstruct with missing coverage names the region") {
  const auto dir = testing::scratch_dir("cli_coverage");
  REQUIRE(run({"simulate", "--group", "su2", "--j", "1", "--state", "random:2,2", "--ruler", "list:2", "--out", dir}).code == 0);
  std::istringstream in(io::read_text(dir + "/records.csv"));
  std::string line, kept;
  int n = 0;
  while (std::getline(in, line)) {
    if (n < 1 || n > 25) kept += line + "\n";
    ++n;
  }
  io::write_text(dir + "/records.csv", kept);
  const auto r = run({"reconstruct", "--group", "su2", "--j", "1", "--records", dir + "/records.csv", "--out", dir});
  CHECK(r.code == 2);
  CHECK(r.err.find("missing region") != std::string::npos);
}

TEST_CASE("schema violations report the line") {
  const auto dir = testing::scratch_dir("cli_schema");
  io::write_text(dir + "/records.csv", "coord1,coord2,ruler_kind,ruler_index,probability,shots,eta\n0.1,0.2,spin,2,7,0,1\n");
  const auto r = run({"reconstruct", "--group", "su2", "--j", "1", "--records", dir + "/records.csv", "--out", dir});
  CHECK(r.code == 3);
  CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("config file with flag override") {
  const auto dir = testing::scratch_dir("cli_config");
  io::write_json(dir + "/cfg.json", {{"group", "su2"}, {"two_j", 1}, {"state", "identity"}, {"s", {0.0}}});
  REQUIRE(run({"qpd", "--config", dir + "/cfg.json", "--out", dir}).code == 0);
  CHECK(read_csv(dir + "/qpd_s0.csv").front()[3] == doctest::Approx(0.5));
  REQUIRE(run({"qpd", "--config", dir + "/cfg.json", "--j", "1", "--out", dir}).code == 0);
  CHECK(read_csv(dir + "/qpd_s0.csv").front()[3] == doctest::Approx(1.0 / 3.0));
  io::write_json(dir + "/bad.json", {{"group", "su2"}, {"colour", "red"}});
  CHECK(run({"qpd", "--config", dir + "/bad.json", "--out", dir}).code == 2);
}

TEST_CASE("entropy and grid export") {
  const auto dir = testing::scratch_dir("cli_entropy");
  const auto r = run({"entropy", "--group", "su2", "--j", "1/2", "--state", "coherent:0.4,1.1", "--n-theta", "400", "--out", dir});
  REQUIRE(r.code == 0);
  CHECK(io::read_json(dir + "/entropy.json")["entropy"].get<double>() == doctest::Approx(0.5).epsilon(1e-8));
  REQUIRE(run({"grid-export", "--group", "su2", "--j", "1", "--level", "2", "--out", dir}).code == 0);
  CHECK(io::read_text(dir + "/grid.csv").rfind("theta,phi,weight\n", 0) == 0);
}

TEST_CASE("lossy records use the photon-counting series") {
  const auto dir = testing::scratch_dir("cli_lossy");
  REQUIRE(run({"simulate", "--group", "hw", "--nmax", "30", "--state", "coherent:0.5,0", "--ruler", "upto:25",
               "--eta", "0.9", "--r-max", "1", "--n-r", "2", "--n-phi", "4", "--out", dir}).code == 0);
  const auto r = run({"reconstruct", "--group", "hw", "--nmax", "30", "--records", dir + "/records.csv", "--s", "0",
                      "--r-max", "1", "--n-r", "2", "--n-phi", "4", "--out", dir});
  REQUIRE(r.code == 0);
  for (const auto& row : read_csv(dir + "/series_s0.csv")) {
    const double d2 = (row[0] - 0.5) * (row[0] - 0.5) + row[1] * row[1];
    CHECK(row[2] == doctest::Approx(2.0 * std::exp(-2.0 * d2)).epsilon(1e-8));
  }
  CHECK(run({"simulate", "--group", "su2", "--j", "1", "--state", "identity", "--eta", "0.5", "--out", dir}).code == 2);
}
