#include "dini/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "dini/errors.hpp"

namespace dini {

OperatorBoundReport check_operator_bound(const Matrix& m, std::size_t trials, std::uint64_t seed) {
  OperatorBoundReport report;
  report.trials = trials;
  report.seed = seed;
  report.hs_norm = hs_norm(m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(m.cols());
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t k = 0; k < v.dim(); ++k) v[k] = normal(rng);
    const double len = norm(v.span());
    if (report.hs_norm == 0.0 || len == 0.0) continue;
    const double ratio = norm(matvec(m, v.span()).span()) / (report.hs_norm * len);
    report.max_ratio = std::max(report.max_ratio, ratio);
  }
  report.passed = report.max_ratio <= 1.0 + 1e-12;
  return report;
}

ChainRuleReport check_chain_rule(const ExprFunction& f, const Matrix& m, std::span<const double> y,
                                 const std::vector<Vector>& x_samples) {
  if (m.rows() != f.num_variables() || y.size() != f.num_variables()) {
    throw DimensionMismatch("M must be " + std::to_string(f.num_variables()) + "xk and y of dimension " +
                            std::to_string(f.num_variables()));
  }
  std::vector<std::string> names;
  for (std::size_t k = 0; k < m.cols(); ++k) names.push_back("t" + std::to_string(k + 1));
  const Vector zero(m.cols());
  const ExprFunction g = f.substitute(affine_replacements(y, m, zero.span()), names);

  ChainRuleReport report;
  for (const Vector& x : x_samples) {
    if (x.dim() != m.cols()) throw DimensionMismatch("sample dimension must be " + std::to_string(m.cols()));
    const Matrix direct = g.jacobian(x.span());
    const Vector image = Vector(y) + matvec(m, x.span());
    const Matrix product = f.jacobian(image.span()) * m;
    for (std::size_t i = 0; i < direct.rows(); ++i)
      for (std::size_t j = 0; j < direct.cols(); ++j)
        report.max_discrepancy = std::max(report.max_discrepancy, std::fabs(direct(i, j) - product(i, j)));
    ++report.samples;
  }
  report.passed = report.max_discrepancy <= 1e-10;
  return report;
}

WitnessReport mvt_witness(const ExprFunction& f, std::span<const double> a, std::span<const double> b,
                          const MvtOptions& options) {
  if (f.num_components() != 1) throw DimensionMismatch("mean-value witness needs a scalar function");
  if (a.size() != f.num_variables() || b.size() != f.num_variables()) {
    throw DimensionMismatch("segment endpoints must have " + std::to_string(f.num_variables()) + " coordinates");
  }
  if (std::equal(a.begin(), a.end(), b.begin())) throw std::invalid_argument("segment endpoints coincide");
  if (options.grid < 2) throw std::invalid_argument("grid needs at least two points");

  const Vector va(a), vb(b);
  const Vector dir = vb - va;
  const double rise = f.eval_component(0, b) - f.eval_component(0, a);
  auto point = [&](double t) { return va + t * dir; };
  auto g = [&](double t) { return f.directional(point(t).span(), dir.span())[0] - rise; };

  WitnessReport report;
  auto finish = [&](double t, double residual) {
    report.found = true;
    report.t = t;
    report.witness = point(t);
    report.residual = residual;
    return report;
  };

  std::vector<double> ts(options.grid), gs(options.grid);
  for (std::size_t k = 0; k < options.grid; ++k) {
    ts[k] = k + 1 == options.grid ? 1.0 : static_cast<double>(k) / static_cast<double>(options.grid - 1);
    gs[k] = g(ts[k]);
  }
  report.samples_used = options.grid;

  if (std::all_of(gs.begin(), gs.end(), [&](double v) { return std::fabs(v) <= options.tol; })) {
    ++report.samples_used;
    return finish(0.5, std::fabs(g(0.5)));
  }
  for (std::size_t k = 0; k < options.grid; ++k) {
    if (std::fabs(gs[k]) <= options.tol) return finish(ts[k], std::fabs(gs[k]));
    if (k + 1 == options.grid || !((gs[k] < 0.0) != (gs[k + 1] < 0.0))) continue;
    double lo = ts[k], hi = ts[k + 1];
    const double s = gs[k] < 0.0 ? 1.0 : -1.0;
    for (;;) {
      const double mid = lo + 0.5 * (hi - lo);
      const double v = g(mid);
      ++report.samples_used;
      if (std::fabs(v) <= options.tol) return finish(mid, std::fabs(v));
      if (mid <= lo || mid >= hi) break;
      (s * v < 0.0 ? lo : hi) = mid;
    }
    const double t = lo + 0.5 * (hi - lo);
    const double residual = std::fabs(g(t));
    if (residual <= options.tol) return finish(t, residual);
    report.t = t;
    report.residual = residual;
    report.witness = point(t);
    return report;
  }
  double best = std::numeric_limits<double>::infinity();
  for (double v : gs) best = std::min(best, std::fabs(v));
  throw NoSignChange("no sign change of the mean-value defect on a " + std::to_string(options.grid) +
                     "-point grid; min |g| = " + number_text(best));
}

namespace {

Vector sample_ball(std::span<const double> center, double r, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = center.size();
  Vector dir(n);
  double len = 0.0;
  while (len == 0.0) {
    for (std::size_t k = 0; k < n; ++k) dir[k] = normal(rng);
    len = norm(dir.span());
  }
  // Radius r * U^(1/n) but strictly inside the open ball.
  const double rho = r * std::pow(unit(rng), 1.0 / static_cast<double>(n)) * (1.0 - 1e-12);
  Vector out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = center[k] + rho * dir[k] / len;
  return out;
}

}  // namespace

InjectivityReport injectivity_radius(const ExprFunction& f, std::span<const double> p,
                                     const InjectivityOptions& options) {
  const std::size_t n = f.num_variables();
  if (f.num_components() != n) throw NotSquare("injectivity radius needs a square map");
  if (p.size() != n) throw DimensionMismatch("point dimension does not match F");

  const Matrix jp = f.jacobian(p);
  const LuFactorization lu = lu_factor(jp);
  const double det_p = det(jp);
  if (lu.singular || !(std::fabs(det_p) >= 1e-12)) {
    throw DegenerateJacobian("det JF(p) = " + number_text(det_p));
  }

  InjectivityReport report;
  report.seed = options.seed;
  report.det_sign = det_p > 0.0 ? 1 : -1;
  report.tuples = options.tuples;
  report.pairs = options.pairs;
  std::mt19937_64 rng(options.seed);

  for (double r = options.initial_radius; r >= options.min_radius; r *= 0.5) {
    // Mixed-row Jacobians: row i is grad F_i at its own point c_i.
    std::vector<Matrix> mixed(options.tuples, Matrix(n, n));
    for (std::size_t i = 0; i < n; ++i) {
      PointBatch batch(n, options.tuples);
      for (std::size_t t = 0; t < options.tuples; ++t) batch.set(t, sample_ball(p, r, rng).span());
      std::vector<double> value(options.tuples), deriv(options.tuples);
      for (std::size_t j = 0; j < n; ++j) {
        f.partial_batch(i, batch, j, value, deriv);
        for (std::size_t t = 0; t < options.tuples; ++t) mixed[t](i, j) = deriv[t];
      }
    }
    double min_abs_det = std::numeric_limits<double>::infinity();
    bool bliss = true;
    for (const Matrix& mtx : mixed) {
      const double d = det(mtx);
      if (!std::isfinite(d) || report.det_sign * d < 1e-12) bliss = false;
      min_abs_det = std::min(min_abs_det, std::isfinite(d) ? std::fabs(d) : 0.0);
    }

    // Direct pairwise separation.
    PointBatch first(n, options.pairs), second(n, options.pairs);
    std::vector<double> gap(options.pairs);
    for (std::size_t t = 0; t < options.pairs; ++t) {
      Vector a = sample_ball(p, r, rng);
      Vector b = sample_ball(p, r, rng);
      while (a == b) b = sample_ball(p, r, rng);
      first.set(t, a.span());
      second.set(t, b.span());
      gap[t] = norm((a - b).span());
    }
    std::vector<double> dist2(options.pairs, 0.0), fa(options.pairs), fb(options.pairs);
    for (std::size_t i = 0; i < n; ++i) {
      f.eval_batch(i, first, fa);
      f.eval_batch(i, second, fb);
      for (std::size_t t = 0; t < options.pairs; ++t) dist2[t] += (fa[t] - fb[t]) * (fa[t] - fb[t]);
    }
    double min_ratio = std::numeric_limits<double>::infinity();
    bool pairwise = true;
    for (std::size_t t = 0; t < options.pairs; ++t) {
      const double sep = std::sqrt(dist2[t]);
      if (!(sep > 1e-12 * gap[t])) pairwise = false;
      min_ratio = std::min(min_ratio, std::isfinite(sep) ? sep / gap[t] : 0.0);
    }

    report.radius = r;
    report.min_abs_det = min_abs_det;
    report.min_separation_ratio = min_ratio;
    report.bliss_passed = bliss;
    report.pairwise_passed = pairwise;
    if (bliss && pairwise) return report;
    ++report.halvings;
  }
  throw RadiusUnderflow("no radius above " + std::to_string(options.min_radius) +
                        " passed the mixed-row determinant and pairwise checks");
}

}  // namespace dini
