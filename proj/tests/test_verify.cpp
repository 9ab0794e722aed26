#include <doctest.h>

#include <cmath>
#include <random>

#include "dini/errors.hpp"
#include "dini/verify.hpp"
#include "support/oracles.hpp"

using namespace dini;

TEST_CASE("operator bound") {
  auto id = check_operator_bound(Matrix::identity(2), 200, 1);
  CHECK(id.passed);
  CHECK(id.max_ratio <= 1 / std::sqrt(2.0) + 1e-15);
  CHECK(id.max_ratio >= 1 / std::sqrt(2.0) - 1e-15);
  CHECK(id.seed == 1);
  auto zero = check_operator_bound(Matrix(3, 2), 50, 2);
  CHECK(zero.passed);
  CHECK(zero.max_ratio == 0.0);
  auto e1 = check_operator_bound(Matrix{{1, 0}, {0, 0}}, 1000, 3);
  CHECK(e1.passed);
  CHECK(e1.max_ratio > 0.99);
}

TEST_CASE("operator bound on 1000 random matrices") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  for (int t = 0; t < 1000; ++t) {
    Matrix m(dim(rng), dim(rng));
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
    CHECK(check_operator_bound(m, 20, static_cast<std::uint64_t>(t)).passed);
  }
}

TEST_CASE("operator bound is deterministic per seed") {
  Matrix m{{1, 2}, {3, -4}};
  CHECK(check_operator_bound(m, 100, 9).max_ratio == check_operator_bound(m, 100, 9).max_ratio);
}

TEST_CASE("chain rule") {
  auto f = parse({"sin(a) * b", "a^2 + exp(b)"}, {"a", "b"});
  std::vector<Vector> xs = {Vector{0.1, 0.2}, Vector{-0.4, 0.9}};
  auto same = check_chain_rule(f, Matrix::identity(2), Vector{0, 0}, xs);
  CHECK(same.passed);
  CHECK(same.max_discrepancy <= 1e-15);

  auto g = parse({"x1^2 + x2"}, {"x1", "x2"});
  std::vector<Vector> ts = {Vector{0.3}, Vector{-1.2}, Vector{2}};
  auto r = check_chain_rule(g, Matrix{{2}, {0}}, Vector{0, 1}, ts);
  CHECK(r.passed);
  CHECK(r.max_discrepancy <= 1e-12);

  CHECK_THROWS_AS(check_chain_rule(g, Matrix{{1, 0, 0}}, Vector{0, 1}, ts), DimensionMismatch);
  CHECK_THROWS_AS(check_chain_rule(g, Matrix{{2}, {0}}, Vector{0}, ts), DimensionMismatch);
}

TEST_CASE("chain rule on 100 random triples") {
  oracle::ExprGenerator gen({"a", "b", "c"}, 42);
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<std::size_t> cols(1, 3);
  for (int t = 0; t < 100; ++t) {
    auto f = parse({gen.smooth(3), gen.polynomial(3)}, {"a", "b", "c"});
    Matrix m(3, cols(rng));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
    Vector y{u(rng), u(rng), u(rng)};
    std::vector<Vector> xs;
    for (int s = 0; s < 5; ++s) {
      Vector x(m.cols());
      for (std::size_t k = 0; k < x.dim(); ++k) x[k] = u(rng);
      xs.push_back(x);
    }
    auto r = check_chain_rule(f, m, y, xs);
    CHECK(r.max_discrepancy <= 1e-10);
  }
}

TEST_CASE("mean value witness") {
  auto sq = mvt_witness(parse({"x^2"}, {"x"}), Vector{0}, Vector{1});
  CHECK(sq.found);
  CHECK(std::fabs(sq.witness[0] - 0.5) <= 1e-10);
  auto affine = mvt_witness(parse({"3*x - 2*y + 1"}, {"x", "y"}), Vector{0, 0}, Vector{1, 2});
  CHECK(affine.found);
  CHECK(affine.t == 0.5);
  CHECK(affine.residual == 0.0);
  auto cube = mvt_witness(parse({"x^3"}, {"x"}), Vector{0}, Vector{1});
  CHECK(cube.found);
  CHECK(std::fabs(cube.witness[0] - 1 / std::sqrt(3.0)) <= 1e-8);
  CHECK(cube.residual <= 1e-10);
  auto multi = mvt_witness(parse({"sin(x) * y"}, {"x", "y"}), Vector{0, 1}, Vector{1, 2});
  CHECK(multi.found);
  CHECK(multi.residual <= 1e-10);
  CHECK_THROWS_AS(mvt_witness(parse({"x", "x"}, {"x"}), Vector{0}, Vector{1}), DimensionMismatch);
}

TEST_CASE("injectivity radius") {
  auto lin = injectivity_radius(parse({"2*x + y", "x - y"}, {"x", "y"}), Vector{0, 0});
  CHECK(lin.radius == 0.5);
  CHECK(lin.bliss_passed);
  CHECK(lin.pairwise_passed);
  CHECK_FALSE(lin.certifying);

  InjectivityOptions o;
  o.initial_radius = 3.0;
  auto sq = injectivity_radius(parse({"x1^2"}, {"x1"}), Vector{1}, o);
  CHECK(sq.radius == 0.75);
  CHECK(sq.halvings == 2);
  CHECK(sq.bliss_passed);

  auto cs = injectivity_radius(parse({"x1^2 - x2^2", "2*x1*x2"}, {"x1", "x2"}), Vector{1, 1});
  CHECK(cs.radius > 0);
  CHECK(cs.pairwise_passed);
  CHECK(cs.pairs == 2000);

  CHECK_THROWS_AS(injectivity_radius(parse({"x1^2", "x2"}, {"x1", "x2"}), Vector{0, 1}), DegenerateJacobian);
  CHECK_THROWS_AS(injectivity_radius(parse({"x1*x2"}, {"x1", "x2"}), Vector{0, 1}), NotSquare);
}

TEST_CASE("injectivity radius is deterministic and self-consistent") {
  auto f = parse({"x1 + x2^3", "x2 - x1^3"}, {"x1", "x2"});
  InjectivityOptions o;
  o.seed = 77;
  auto a = injectivity_radius(f, Vector{0.5, 0.5}, o);
  auto b = injectivity_radius(f, Vector{0.5, 0.5}, o);
  CHECK(a.radius == b.radius);
  CHECK(a.min_abs_det == b.min_abs_det);
  CHECK(a.seed == 77);
  CHECK(a.pairwise_passed);
}
