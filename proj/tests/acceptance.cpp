// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dini/errors.hpp"
#include "dini/implicit_system.hpp"
#include "dini/inverse.hpp"
#include "dini/scalar_implicit.hpp"
#include "dini/verify.hpp"
#include "support/corpus.hpp"
#include "support/oracles.hpp"

using namespace dini;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] criterion %d: %s | %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

SystemSolution build(const corpus::System& s) {
  return SystemSolution::build(parse(s.functions, s.variables), corpus::split(s), s.options);
}

ImplicitSolution circle_solution() {
  auto c = corpus::circle();
  return ImplicitSolution::build(parse(c.functions, c.variables), corpus::split(c),
                                 ImplicitOptions{c.options.box, c.options.solve});
}

Outcome criterion1() {
  auto t0 = Clock::now();
  auto s = circle_solution();
  double y = s.solve_at(Vector{0.6});
  double g = s.gradient_at(Vector{0.6})[0];
  double elapsed = seconds_since(t0);
  double y_ref = std::sqrt(1 - 0.6 * 0.6);
  double g_ref = -0.6 / y_ref;
  double ey = std::fabs(y - y_ref), eg = std::fabs(g - g_ref);
  return {ey <= 1e-10 && eg <= 1e-8 && elapsed < 1.0,
          "|f(0.6)-0.8|=" + sci(ey) + " (<=1e-10), |f'(0.6)+0.75|=" + sci(eg) + " (<=1e-8), " + sci(elapsed) +
              " s (<1)"};
}

Outcome criterion2() {
  auto t0 = Clock::now();
  auto q = corpus::quadratic_pair();
  auto s = build(q);
  auto y = s.solve_at(Vector{1});
  auto j = s.jacobian_at(Vector{1});
  double elapsed = seconds_since(t0);
  double ey = std::max(std::fabs(y[0] - 1), std::fabs(y[1] - 1));
  double ej = std::max(std::fabs(j(0, 0) - 1.0 / 3), std::fabs(j(1, 0) - 1.0 / 3));
  // Central differences of solve_at as the second, independent check on the Jacobian.
  const double h = 1e-6;
  auto yp = s.solve_at(Vector{1 + h});
  auto ym = s.solve_at(Vector{1 - h});
  double efd = std::max(std::fabs((yp[0] - ym[0]) / (2 * h) - 1.0 / 3), std::fabs((yp[1] - ym[1]) / (2 * h) - 1.0 / 3));
  return {ey <= 1e-9 && ej <= 1e-8 && efd <= 1e-5 && elapsed < 5.0,
          "|y-(1,1)|=" + sci(ey) + " (<=1e-9), |J-1/3|=" + sci(ej) + " (<=1e-8), FD check " + sci(efd) + ", " +
              sci(elapsed) + " s (<5)"};
}

Outcome criterion3() {
  auto systems = corpus::all();
  std::size_t points = 0;
  double worst = 0.0;
  bool has_m[4] = {false, false, false, false};
  bool ok = true;
  std::string per;
  for (const auto& s : systems) {
    auto sol = build(s);
    has_m[sol.m()] = true;
    auto grid = corpus::interior_grid(sol, 10);
    if (grid.size() < 10) ok = false;
    double sys_worst = 0.0;
    for (const auto& x : grid) {
      auto j = sol.jacobian_at(x);
      const double h = 1e-6;
      for (std::size_t c = 0; c < x.dim(); ++c) {
        auto fd = oracle::central_difference([&](const oracle::Vec& p) { return sol.solve_at(Vector(p)).values(); },
                                             x.values(), c, h);
        for (std::size_t r = 0; r < sol.m(); ++r) sys_worst = std::max(sys_worst, std::fabs(j(r, c) - fd[r]));
      }
      ++points;
    }
    worst = std::max(worst, sys_worst);
    per += (per.empty() ? "" : ", ") + s.name + " m=" + std::to_string(sol.m()) + ":" + sci(sys_worst);
  }
  ok = ok && systems.size() >= 5 && has_m[1] && has_m[2] && has_m[3] && worst <= 1e-5;
  return {ok, std::to_string(systems.size()) + " systems, " + std::to_string(points) + " points, max |J-FD|=" +
                  sci(worst) + " (<=1e-5) [" + per + "]"};
}

Outcome criterion4() {
  auto f = parse({"x1^2 - x2^2", "2*x1*x2"}, {"x1", "x2"});
  auto inv = LocalInverse::build(f, Vector{1, 1});
  auto x = inv.invert_at(Vector{0, 2});
  double ex = std::max(std::fabs(x[0] - 1), std::fabs(x[1] - 1));
  auto jg = inv.inverse_jacobian_at(Vector{0, 2});
  // Hand inverse of JF(1,1) = [[2,-2],[2,2]] (det 8).
  const double ref[2][2] = {{0.25, 0.25}, {-0.25, 0.25}};
  double ej = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) ej = std::max(ej, std::fabs(jg(i, j) - ref[i][j]));
  auto [lo, hi] = inv.y_box();
  double worst = 0.0;
  int count = 0;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      Vector y{lo[0] + (hi[0] - lo[0]) * (a + 1) / 6.0, lo[1] + (hi[1] - lo[1]) * (b + 1) / 6.0};
      auto g = inv.invert_at(y);
      // F evaluated by hand, not through the library.
      double r0 = g[0] * g[0] - g[1] * g[1] - y[0];
      double r1 = 2 * g[0] * g[1] - y[1];
      worst = std::max({worst, std::fabs(r0), std::fabs(r1)});
      ++count;
    }
  return {ex <= 1e-9 && ej <= 1e-8 && worst <= 1e-9 && count == 25,
          "|G(0,2)-(1,1)|=" + sci(ex) + " (<=1e-9), |JG-ref|=" + sci(ej) + " (<=1e-8), max round trip on " +
              std::to_string(count) + " points " + sci(worst) + " (<=1e-9)"};
}

Outcome criterion5() {
  bool ok = true;
  std::string detail;
  {
    auto s = circle_solution();
    std::size_t checked = 0;
    double dev = 0.0;
    for (double x : {-0.6, -0.3, 0.0, 0.3, 0.6}) {
      auto scan = s.uniqueness_scan(Vector{x}, 10000);
      double ref = s.solve_at(Vector{x});
      if (scan.sign_changes != 1 || scan.roots.size() != 1) {
        ok = false;
        continue;
      }
      dev = std::max(dev, std::fabs(scan.roots[0] - ref));
      ++checked;
    }
    ok = ok && dev <= 10 * s.options().tol_root;
    detail += "circle: " + std::to_string(checked) + "/5 queries with one crossing in 10^4 samples, max dev " +
              sci(dev) + " (<=" + sci(10 * s.options().tol_root) + ")";
  }
  {
    auto s = build(corpus::quadratic_pair());
    std::size_t checked = 0;
    double dev = 0.0;
    for (double x : {0.9, 0.95, 1.0, 1.05, 1.1}) {
      if (!s.contains(Vector{x})) {
        ok = false;
        continue;
      }
      auto rep = s.verify_uniqueness(Vector{x}, 100000, 2024);
      if (rep.zeros.size() != 1 || !rep.passed) {
        ok = false;
        continue;
      }
      dev = std::max(dev, rep.max_deviation);
      ++checked;
    }
    ok = ok && dev <= 10 * s.options().tol_sys;
    detail += "; quadratic pair: " + std::to_string(checked) + "/5 queries with one cluster in 10^5 samples, max dev " +
              sci(dev) + " (<=" + sci(10 * s.options().tol_sys) + ")";
  }
  return {ok, detail};
}

Outcome criterion6() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  int bound_pass = 0;
  for (int t = 0; t < 1000; ++t) {
    Matrix m(dim(rng), dim(rng));
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
    bound_pass += check_operator_bound(m, 16, static_cast<std::uint64_t>(t)).passed ? 1 : 0;
  }

  oracle::ExprGenerator gen({"a", "b", "c"}, 607);
  std::uniform_int_distribution<std::size_t> cols(1, 3);
  double chain_worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    auto f = parse({gen.smooth(3), gen.polynomial(3)}, {"a", "b", "c"});
    Matrix m(3, cols(rng));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
    Vector y{u(rng), u(rng), u(rng)};
    Vector x(m.cols());
    for (std::size_t k = 0; k < x.dim(); ++k) x[k] = u(rng);
    chain_worst = std::max(chain_worst, check_chain_rule(f, m, y, {x}).max_discrepancy);
  }

  auto w = mvt_witness(parse({"x^3"}, {"x"}), Vector{0}, Vector{1});
  double ew = w.found ? std::fabs(w.witness[0] - 1 / std::sqrt(3.0)) : INFINITY;

  auto r = injectivity_radius(parse({"x1^2 - x2^2", "2*x1*x2"}, {"x1", "x2"}), Vector{1, 1});
  bool inj = r.radius > 0 && r.pairwise_passed && r.pairs == 2000;

  bool ok = bound_pass == 1000 && chain_worst <= 1e-10 && ew <= 1e-8 && inj;
  return {ok, "operator bound " + std::to_string(bound_pass) + "/1000, chain rule max " + sci(chain_worst) +
                  " (<=1e-10) on 100 triples, |c-1/sqrt(3)|=" + sci(ew) + " (<=1e-8), r=" + sci(r.radius) +
                  " pairwise " + (r.pairwise_passed ? "pass" : "fail") + " on " + std::to_string(r.pairs) +
                  " pairs"};
}

Outcome criterion7() {
  std::size_t compared = 0, skipped = 0;
  double worst = 0.0;
  for (const auto& s : {corpus::circle(), corpus::quadratic_pair()}) {
    auto sol = build(s);
    auto seed = corpus::split(s);
    for (const auto& x : corpus::interior_grid(sol, 21, 0.95)) {
      auto ref = oracle::damped_newton(s.field, x.values(), seed.y.values());
      if (!ref) {
        ++skipped;
        continue;
      }
      auto y = sol.solve_at(x);
      for (std::size_t k = 0; k < y.dim(); ++k) worst = std::max(worst, std::fabs(y[k] - (*ref)[k]));
      ++compared;
    }
  }
  return {compared >= 40 && worst <= 1e-7, std::to_string(compared) + " grid points compared, " +
                                               std::to_string(skipped) + " without Newton convergence, max |diff|=" +
                                               sci(worst) + " (<=1e-7)"};
}

std::string capture(const std::string& cmd, int& status) {
  FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!pipe) throw std::runtime_error("cannot run " + cmd);
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  status = pclose(pipe);
  return out;
}

Outcome criterion8(const std::string& cli, const std::string& problems) {
  const std::vector<std::string> runs = {
      "implicit --spec " + problems + "/circle.json --grid -0.7:0.7:29",
      "implicit --spec " + problems + "/quadratic_pair_scan.json --query 0.95 --query 1 --seed 99",
      "implicit --spec " + problems + "/quadratic_pair.json --grid 0.85:1.15:7 --out csv --jobs 4",
      "invert --spec " + problems + "/complex_square.json --grid -0.2:0.2:5 --grid 1.8:2.2:5",
      "verify --spec " + problems + "/identity.json --lemma lemma1 --seed 8",
      "verify --spec " + problems + "/chain_rule.json --lemma lemma2 --seed 8",
      "verify --spec " + problems + "/cube_mvt.json --lemma lemma3",
      "verify --spec " + problems + "/complex_square.json --lemma lemma4 --seed 8",
  };
  std::size_t identical = 0;
  for (const auto& args : runs) {
    int s1 = 0, s2 = 0;
    auto a = capture(cli + " " + args, s1);
    auto b = capture(cli + " " + args, s2);
    if (!a.empty() && a == b && s1 == s2) ++identical;
  }
  return {identical == runs.size(),
          std::to_string(identical) + "/" + std::to_string(runs.size()) + " invocations byte-identical across runs"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli, problems;
  for (int i = 1; i + 1 < argc; i += 2) {
    std::string key = argv[i];
    if (key == "--cli") cli = argv[i + 1];
    else if (key == "--problems") problems = argv[i + 1];
  }
  if (cli.empty() || problems.empty()) {
    std::fprintf(stderr, "usage: acceptance --cli PATH --problems DIR\n");
    return 2;
  }

  report(1, "circle benchmark", criterion1);
  report(2, "quadratic-pair benchmark", criterion2);
  report(3, "Jacobian formula vs central differences", criterion3);
  report(4, "inverse round trip, complex square", criterion4);
  report(5, "uniqueness scans", criterion5);
  report(6, "lemma suite", criterion6);
  report(7, "Newton oracle equivalence", criterion7);
  report(8, "CLI determinism", [&] { return criterion8(cli, problems); });

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
