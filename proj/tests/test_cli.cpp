#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dini/cli.hpp"

using nlohmann::json;
using namespace dini;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dini");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string problem(const std::string& name) { return std::string(DINI_PROBLEMS_DIR) + "/" + name; }

std::string run_binary(const std::string& args, int& status) {
  std::string cmd = std::string(DINI_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  status = pclose(pipe);
  return out;
}

}  // namespace

TEST_CASE("implicit on the circle") {
  auto r = run_cli({"implicit", "--spec", problem("circle.json"), "--query", "0", "--query", "0.3", "--query", "0.6"});
  CHECK(r.code == 0);
  auto doc = json::parse(r.out);
  REQUIRE(doc["rows"].size() == 3);
  const auto& row = doc["rows"][2];
  CHECK(row["query"][0].get<double>() == 0.6);
  CHECK(std::fabs(row["value"][0].get<double>() - 0.8) <= 1e-10);
  CHECK(std::fabs(row["jacobian"][0][0].get<double>() + 0.75) <= 1e-8);
  CHECK(row["residual"].get<double>() <= 1e-11);
  CHECK(row["diagnostics"]["status"] == "ok");
  CHECK(row["box"]["validated"] == true);
  CHECK(doc["failures"] == 0);
}

TEST_CASE("seed off the zero set is a spec error") {
  auto r = run_cli({"implicit", "--spec", problem("off_zero_set.json")});
  CHECK(r.code == 1);
  auto doc = json::parse(r.out);
  CHECK(doc["error"]["kind"] == "SeedNotOnZeroSet");
  CHECK(!r.err.empty());
}

TEST_CASE("implicit on the quadratic pair") {
  auto r = run_cli({"implicit", "--spec", problem("quadratic_pair.json"), "--query", "1"});
  CHECK(r.code == 0);
  auto row = json::parse(r.out)["rows"][0];
  CHECK(std::fabs(row["value"][0].get<double>() - 1) <= 1e-9);
  CHECK(std::fabs(row["value"][1].get<double>() - 1) <= 1e-9);
  CHECK(std::fabs(row["jacobian"][0][0].get<double>() - 1.0 / 3) <= 1e-8);
  CHECK(std::fabs(row["jacobian"][1][0].get<double>() - 1.0 / 3) <= 1e-8);
  CHECK(row["box"]["depth"] == 2);
}

TEST_CASE("invert") {
  auto e = run_cli({"invert", "--spec", problem("exp.json"), "--query", "1"});
  CHECK(e.code == 0);
  auto row = json::parse(e.out)["rows"][0];
  CHECK(std::fabs(row["value"][0].get<double>()) <= 1e-12);
  CHECK(std::fabs(row["jacobian"][0][0].get<double>() - 1) <= 1e-10);

  auto c = run_cli({"invert", "--spec", problem("complex_square.json"), "--query", "0,2"});
  CHECK(c.code == 0);
  auto crow = json::parse(c.out)["rows"][0];
  CHECK(std::fabs(crow["value"][0].get<double>() - 1) <= 1e-9);
  CHECK(std::fabs(crow["value"][1].get<double>() - 1) <= 1e-9);
  const double expected[2][2] = {{0.25, 0.25}, {-0.25, 0.25}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::fabs(crow["jacobian"][i][j].get<double>() - expected[i][j]) <= 1e-8);

  auto outside = run_cli({"invert", "--spec", problem("complex_square.json"), "--query", "0,2", "--query", "5,5"});
  CHECK(outside.code == 2);
  auto doc = json::parse(outside.out);
  CHECK(doc["failures"] == 1);
  CHECK(doc["rows"][0]["diagnostics"]["status"] == "ok");
  CHECK(doc["rows"][1]["diagnostics"]["kind"] == "OutsideBox");
  CHECK(doc["rows"][1]["value"].is_null());
}

TEST_CASE("verify") {
  auto l3 = run_cli({"verify", "--spec", problem("cube_mvt.json"), "--lemma", "lemma3"});
  CHECK(l3.code == 0);
  auto w = json::parse(l3.out)["report"]["witness"][0].get<double>();
  CHECK(std::fabs(w - 1 / std::sqrt(3.0)) <= 1e-8);

  auto l1 = run_cli({"verify", "--spec", problem("identity.json"), "--lemma", "lemma1"});
  CHECK(l1.code == 0);
  CHECK(json::parse(l1.out)["report"]["passed"] == true);

  auto l4 = run_cli({"verify", "--spec", problem("singular_seed.json"), "--lemma", "lemma4"});
  CHECK(l4.code == 1);
  CHECK(json::parse(l4.out)["error"]["kind"] == "DegenerateJacobian");

  auto l2 = run_cli({"verify", "--spec", problem("chain_rule.json"), "--lemma", "lemma2", "--seed", "5"});
  CHECK(l2.code == 0);
  CHECK(json::parse(l2.out)["report"]["seed"] == 5);

  auto bad = run_cli({"verify", "--spec", problem("identity.json"), "--lemma", "lemma9"});
  CHECK(bad.code == 1);
  auto missing = run_cli({"verify", "--spec", problem("identity.json"), "--lemma", "lemma3"});
  CHECK(missing.code == 1);
}

TEST_CASE("csv output") {
  auto r = run_cli({"implicit", "--spec", problem("quadratic_pair.json"), "--grid", "0.9:1.1:3", "--out", "csv"});
  CHECK(r.code == 0);
  std::istringstream in(r.out);
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "query_1,value_1,value_2,jacobian_1_1,jacobian_2_1,residual,status,error_kind,message");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);

  auto inv = run_cli({"invert", "--spec", problem("complex_square.json"), "--query", "0,2", "--out", "csv"});
  std::istringstream in2(inv.out);
  std::getline(in2, header);
  CHECK(header.find("jacobian_1_1,jacobian_1_2,jacobian_2_1,jacobian_2_2") != std::string::npos);
}

TEST_CASE("query and grid parsing") {
  CHECK(cli::parse_query("1, -2.5,3e-1") == Vector{1, -2.5, 0.3});
  CHECK_THROWS_AS(cli::parse_query("1,,2"), cli::SpecError);
  CHECK_THROWS_AS(cli::parse_query("abc"), cli::SpecError);
  auto axis = cli::parse_grid_axis("-1:1:5");
  CHECK(axis.lo == -1);
  CHECK(axis.hi == 1);
  CHECK(axis.steps == 5);
  CHECK_THROWS_AS(cli::parse_grid_axis("0:1"), cli::SpecError);
  CHECK_THROWS_AS(cli::parse_grid_axis("0:1:0"), cli::SpecError);
  CHECK_THROWS_AS(cli::parse_grid_axis("0:1:2.5"), cli::SpecError);
  auto pts = cli::expand_queries({Vector{9, 9}}, {cli::GridAxis{0, 1, 2}, cli::GridAxis{5, 5, 1}});
  REQUIRE(pts.size() == 3);
  CHECK(pts[0] == Vector{9, 9});
  CHECK(pts[1] == Vector{0, 5});
  CHECK(pts[2] == Vector{1, 5});
}

TEST_CASE("spec errors") {
  CHECK(run_cli({"implicit", "--spec", problem("does_not_exist.json")}).code == 1);
  CHECK(run_cli({"implicit"}).code == 1);
  CHECK(run_cli({"implicit", "--spec", problem("circle.json"), "--out", "xml"}).code == 1);
  CHECK(run_cli({"implicit", "--spec", problem("circle.json"), "--grid", "0:1"}).code == 1);
  CHECK(run_cli({"implicit", "--spec", problem("circle.json"), "--box-halfwidth", "-1"}).code == 1);
  CHECK(run_cli({"implicit", "--spec", problem("complex_square.json")}).code == 1);
  CHECK_THROWS_AS(cli::parse_problem(json::parse(R"({"functions": ["x"], "bogus": 1})")), cli::SpecError);
  CHECK_THROWS_AS(cli::parse_problem(json::parse(R"({"functions": "x"})")), cli::SpecError);
  CHECK_THROWS_AS(cli::parse_problem(json::parse(R"({"options": {"grid_density": 1}})")), cli::SpecError);
  auto syntax = run_cli({"implicit", "--spec", problem("circle.json"), "--query", "1,2"});
  CHECK(syntax.code == 2);
  CHECK(json::parse(syntax.out)["rows"][0]["diagnostics"]["kind"] == "DimensionMismatch");
}

TEST_CASE("overrides are applied") {
  auto r = run_cli({"implicit", "--spec", problem("circle.json"), "--tol-root", "1e-6", "--box-halfwidth", "0.4",
                    "--seed", "17"});
  CHECK(r.code == 0);
  auto doc = json::parse(r.out);
  CHECK(doc["options"]["tol_root"] == 1e-6);
  CHECK(doc["options"]["box_halfwidth"] == 0.4);
  CHECK(doc["options"]["random_seed"] == 17);
  CHECK(doc["rows"][0]["box"]["x_hi"][0].get<double>() <= 0.4);
}

TEST_CASE("uniqueness diagnostics per row") {
  auto r = run_cli({"implicit", "--spec", problem("quadratic_pair_scan.json"), "--query", "1"});
  CHECK(r.code == 0);
  auto u = json::parse(r.out)["rows"][0]["diagnostics"]["uniqueness"];
  CHECK(u["passed"] == true);
  CHECK(u["zeros"] == 1);
}

TEST_CASE("thread fan-out keeps input order and bytes") {
  auto one = run_cli({"implicit", "--spec", problem("quadratic_pair.json"), "--grid", "0.85:1.15:7", "--jobs", "1"});
  auto four = run_cli({"implicit", "--spec", problem("quadratic_pair.json"), "--grid", "0.85:1.15:7", "--jobs", "4"});
  CHECK(one.code == four.code);
  CHECK(one.out == four.out);
  auto doc = json::parse(four.out);
  for (std::size_t i = 1; i < doc["rows"].size(); ++i)
    CHECK(doc["rows"][i]["query"][0].get<double>() > doc["rows"][i - 1]["query"][0].get<double>());
}

TEST_CASE("repeated binary runs are byte identical") {
  const std::vector<std::string> invocations = {
      "implicit --spec " + problem("circle.json") + " --grid -0.7:0.7:15 --out csv",
      "implicit --spec " + problem("quadratic_pair_scan.json") + " --query 0.95 --query 1.05 --seed 3",
      "invert --spec " + problem("complex_square.json") + " --grid -0.2:0.2:3 --grid 1.8:2.2:3",
      "verify --spec " + problem("complex_square.json") + " --lemma lemma4 --seed 11",
      "verify --spec " + problem("chain_rule.json") + " --lemma lemma2 --seed 4 --out csv",
  };
  for (const auto& args : invocations) {
    CAPTURE(args);
    int s1 = 0, s2 = 0;
    auto a = run_binary(args, s1);
    auto b = run_binary(args, s2);
    CHECK(s1 == s2);
    CHECK(!a.empty());
    CHECK(a == b);
  }
}
