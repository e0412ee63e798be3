#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hodgeflow/cli/commands.hpp"
#include "hodgeflow/cli/config.hpp"
#include "oracles.hpp"

using namespace hodgeflow;
using namespace hodgeflow::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("hodgeflow-test-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path file(const std::string &name, const std::string &contents) const {
    const auto p = path_ / name;
    std::ofstream(p) << contents;
    return p;
  }
  fs::path operator/(const std::string &name) const { return path_ / name; }

private:
  fs::path path_;
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string &text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
      cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

} // namespace

TEST_CASE("format_number round-trips") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-2.5e-300) == "-2.5e-300");
  CHECK(format_number(-0.0) == "0");
  oracle::Random rng(51);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-1e3, 1e3) * std::pow(10.0, rng.integer(-20, 20));
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("config parsing diagnostics name the field") {
  auto expect_field = [](const std::string &text, const std::string &field) {
    try {
      parse_scenario(parse_document(text, "cfg.json"));
      FAIL("expected a config error");
    } catch (const ConfigError &e) {
      CHECK(e.field() == field);
    }
  };
  expect_field(R"({"x0": [1], "dt": 0.1, "steps": 1})", "dim");
  expect_field(R"({"dim": 2, "dissipated": [[{"coeff": 1, "exponents": [2]}]], "rates": [0],
                   "x0": [1, 0], "dt": 0.1, "steps": 1})",
               "dissipated[0][0].exponents");
  expect_field(R"({"dim": 2, "dissipated": [[{"coeff": 1, "exponents": [2, 0]}]],
                   "x0": [1, 0], "dt": 0.1, "steps": 1})",
               "rates");
  expect_field(R"({"dim": 2, "dissipated": [[{"coeff": 1, "exponents": [2, 0]}]], "rates": [0],
                   "x0": [1, 0], "dt": -1, "steps": 1})",
               "dt");
  expect_field(R"({"dim": 2, "dissipated": [[{"coeff": 1, "exponents": [2, 0]}]], "rates": [0],
                   "metric": {"diagonal": [1, -1]}, "x0": [1, 0], "dt": 1, "steps": 1})",
               "metric");
  expect_field("{\n\"dim\": 2,\n\"x0\": [1, 0\n}", "cfg.json:4");

  const auto cfg = parse_scenario(parse_document(
      R"({"dim": 2, "metric": {"matrix": [[2, 0], [0, 1]]},
          "dissipated": [{"terms": [{"coeff": 0.5, "exponents": [2, 0]}]}], "rates": [-1.5],
          "x0": [1, 0], "dt": 0.01, "steps": 3, "tolerance": 1e-4})",
      "inline"));
  CHECK(cfg.tolerance == 1e-4);
  CHECK(cfg.scenario.rates[0](Point::Zero(2)) == -1.5);
  CHECK(cfg.scenario.metric.at(Point::Zero(2)).matrix()(0, 0) == 2.0);
}

TEST_CASE("every built-in scenario parses") {
  for (const auto &name : builtin_scenario_names()) {
    CAPTURE(name);
    const auto cfg = resolve_scenario(name);
    CHECK(cfg.name == name);
    CHECK_NOTHROW(cfg.scenario.validate());
  }
  CHECK_THROWS_AS(resolve_scenario("no-such-scenario"), ConfigError);
}

TEST_CASE("solve") {
  TempDir dir;
  std::ostringstream out, err;
  auto input = dir.file("sys.json", R"({"dim": 4, "v": [[1, 0, 0, 0]],
      "w": [[0, 1, 0, 0], [0, 0, 1, 0]], "lambda": [1, 2]})");
  REQUIRE(cmd_solve({input, std::nullopt}, out, err) == kExitOk);
  auto doc = json::parse(out.str());
  const auto u0 = doc["particular"].get<std::vector<double>>();
  CHECK(u0 == std::vector<double>{0, 1, 2, 0});
  REQUIRE(doc["basis"].size() == 1);
  const auto b = doc["basis"][0].get<std::vector<double>>();
  CHECK(std::abs(b[0]) + std::abs(b[1]) + std::abs(b[2]) == 0.0);
  CHECK(std::abs(b[3]) == doctest::Approx(1.0));
  CHECK(doc["residuals"]["passed"] == true);

  out.str("");
  input = dir.file("unique.json", R"({"dim": 2, "w": [[1, 0], [0, 1]], "lambda": [3, -1]})");
  const auto output = dir / "unique-out.json";
  REQUIRE(cmd_solve({input, output}, out, err) == kExitOk);
  doc = json::parse(slurp(output));
  CHECK(doc["basis"].empty());
  CHECK(doc["note"] == "unique solution");

  std::ostringstream err2;
  input = dir.file("dep.json", R"({"dim": 3, "v": [[1, 2, 3]], "w": [[2, 4, 6]], "lambda": [1]})");
  CHECK(cmd_solve({input, std::nullopt}, out, err2) == kExitRankError);
  CHECK(err2.str().find("smallest singular value") != std::string::npos);

  std::ostringstream err3;
  input = dir.file("bad.json", R"({"dim": 3, "w": [[1, 0]], "lambda": [1]})");
  CHECK(cmd_solve({input, std::nullopt}, out, err3) == kExitInputError);
  CHECK(err3.str().find("w[0]") != std::string::npos);

  CHECK(cmd_solve({dir / "missing.json", std::nullopt}, out, err3) == kExitInputError);
}

TEST_CASE("generators") {
  TempDir dir;
  std::ostringstream out, err;
  auto points = dir.file("pts.json", "[[1, 0], [0.5, -0.5]]");
  REQUIRE(cmd_generators({"damped-radial", points, std::nullopt}, out, err) == kExitOk);
  auto rows = read_csv(out.str());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"x_1", "x_2", "X0_1", "X0_2", "g1_1", "g1_2", "res_D_1", "flagged"});
  CHECK(std::stod(rows[1][2]) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(std::stod(rows[1][3])) <= 1e-15);
  CHECK(rows[1].back() == "0");

  out.str("");
  points = dir.file("top.json", R"({"points": [[1, 1, 1], [0.3, -0.2, 0.5], [0, 0, 0]]})");
  const auto csv = dir / "top.csv";
  CHECK(cmd_generators({"euler-top", points, csv}, out, err) == kExitRankError);
  CHECK(err.str().find("points[2]") != std::string::npos);
  rows = read_csv(slurp(csv));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"x_1", "x_2", "x_3", "g1_1", "g1_2", "g1_3", "flagged"});
  for (int r = 1; r <= 2; ++r) {
    Point x(3);
    for (int i = 0; i < 3; ++i)
      x(i) = std::stod(rows[r][i]);
    const auto cfg = resolve_scenario("euler-top");
    const Eigen::VectorXd expected =
        oracle::cross(euclidean_gradient(cfg.scenario.conserved[0], x),
                      euclidean_gradient(cfg.scenario.conserved[1], x));
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(std::stod(rows[r][3 + i]) - expected(i)) <= 1e-12);
    CHECK(rows[r].back() == "0");
  }
  CHECK(rows[3].back() == "1");
  CHECK(rows[3].size() == rows[0].size());

  std::ostringstream err2;
  points = dir.file("wrong.json", "[[1, 0, 0]]");
  CHECK(cmd_generators({"damped-radial", points, std::nullopt}, out, err2) == kExitInputError);
  CHECK(err2.str().find("points[0]") != std::string::npos);
}

TEST_CASE("integrate then check") {
  TempDir dir;
  for (const auto &name : builtin_scenario_names()) {
    CAPTURE(name);
    std::ostringstream out, err;
    const auto first = dir / (name + "-a.csv");
    const auto second = dir / (name + "-b.csv");
    REQUIRE(cmd_integrate({name, first}, out, err) == kExitOk);
    REQUIRE(cmd_integrate({name, second}, out, err) == kExitOk);
    CHECK(slurp(first) == slurp(second));
    CHECK_FALSE(fs::exists(first.string() + ".tmp"));

    std::ostringstream report;
    CHECK(cmd_check({first, name, std::nullopt}, report, err) == kExitOk);
    CHECK(report.str().find("result: PASS") != std::string::npos);
  }
}

TEST_CASE("damped-radial trajectory values") {
  TempDir dir;
  std::ostringstream out, err;
  const auto csv = dir / "damped.csv";
  REQUIRE(cmd_integrate({"damped-radial", csv}, out, err) == kExitOk);
  const auto rows = read_csv(slurp(csv));
  REQUIRE(rows.size() == 1002);
  CHECK(rows[0] == std::vector<std::string>{"t", "x_1", "x_2", "D_1", "h_1"});
  CHECK(rows[1][0] == "0");
  CHECK(std::stod(rows.back()[0]) == doctest::Approx(1.0));
  CHECK(std::abs(std::stod(rows.back()[3]) - 0.5 * std::exp(-2.0)) < 1e-6);

  // Zero-rate variant keeps D constant.
  const auto cfg = dir.file("still.json", R"({"dim": 2,
      "dissipated": [[{"coeff": 0.5, "exponents": [2, 0]}, {"coeff": 0.5, "exponents": [0, 2]}]],
      "rates": [0], "x0": [1, 0], "dt": 0.001, "steps": 1000})");
  const auto still_csv = dir / "still.csv";
  REQUIRE(cmd_integrate({cfg.string(), still_csv}, out, err) == kExitOk);
  const auto still = read_csv(slurp(still_csv));
  for (std::size_t r = 1; r < still.size(); ++r)
    CHECK(std::abs(std::stod(still[r][3]) - 0.5) < 1e-8);
}

TEST_CASE("check rejects corrupted and mismatched input") {
  TempDir dir;
  std::ostringstream out, err;
  const auto csv = dir / "damped.csv";
  REQUIRE(cmd_integrate({"damped-radial", csv}, out, err) == kExitOk);
  auto rows = read_csv(slurp(csv));

  auto write_rows = [&](const std::string &name, const std::vector<std::vector<std::string>> &rs) {
    std::string text;
    for (const auto &r : rs) {
      for (std::size_t c = 0; c < r.size(); ++c)
        text += (c ? "," : "") + r[c];
      text += '\n';
    }
    return dir.file(name, text);
  };

  auto corrupted = rows;
  corrupted[500][1] = format_number(std::stod(corrupted[500][1]) + 0.01);
  std::ostringstream report;
  CHECK(cmd_check({write_rows("corrupt.csv", corrupted), "damped-radial", std::nullopt}, report,
                  err) == kExitAuditFail);
  CHECK(report.str().find("result: FAIL") != std::string::npos);

  std::ostringstream err2;
  CHECK(cmd_check({csv, "euler-top", std::nullopt}, out, err2) == kExitInputError);
  CHECK(err2.str().find("row 0") != std::string::npos);

  auto garbage = rows;
  garbage[7][2] = "abc";
  std::ostringstream err3;
  CHECK(cmd_check({write_rows("garbage.csv", garbage), "damped-radial", std::nullopt}, out,
                  err3) == kExitInputError);
  CHECK(err3.str().find("row 7, column 3") != std::string::npos);

  // A loose tolerance lets the corrupted run through.
  CHECK(cmd_check({write_rows("corrupt2.csv", corrupted), "damped-radial", 1.0}, out, err) ==
        kExitOk);
}

TEST_CASE("integrate reports divergence with a partial file") {
  TempDir dir;
  const auto cfg = dir.file("blowup.json", R"({"dim": 1,
      "dissipated": [[{"coeff": 0.5, "exponents": [2]}]],
      "rates": [[{"coeff": 1, "exponents": [6]}]],
      "x0": [1], "dt": 0.5, "steps": 100})");
  std::ostringstream out, err;
  const auto csv = dir / "blowup.csv";
  CHECK(cmd_integrate({cfg.string(), csv}, out, err) == kExitDiverged);
  CHECK(err.str().find("diverged at step") != std::string::npos);
  const auto rows = read_csv(slurp(csv));
  CHECK(rows.size() >= 2);
  CHECK(rows.size() < 102);
}
