#include "dini/implicit_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dini/errors.hpp"

namespace dini {

std::pair<ExprFunction, Matrix> normalize(const ExprFunction& f, const SplitPoint& seed) {
  const std::size_t n = seed.n();
  const std::size_t m = seed.m();
  const auto [fx, fy] = jacobian_split(f, seed);
  Matrix j_inv = inverse(fy);

  // Block map diag(I_n, J^{-1}) centred at (0; b), offset (0; b).
  const std::size_t d = n + m;
  Matrix a(d, d);
  Vector offset(d), center(d);
  for (std::size_t k = 0; k < n; ++k) a(k, k) = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    offset[n + i] = seed.y[i];
    center[n + i] = seed.y[i];
    for (std::size_t k = 0; k < m; ++k) a(n + i, n + k) = j_inv(i, k);
  }
  std::vector<std::string> names = f.variables();
  for (std::size_t i = 0; i < m; ++i) names[n + i] = "z_" + names[n + i];
  ExprFunction g = f.substitute(affine_replacements(offset.span(), a, center.span()), std::move(names));
  return {std::move(g), std::move(j_inv)};
}

// ---------------------------------------------------------------------------

struct SystemSolution::Level {
  std::size_t index = 1;
  std::size_t n = 0;
  std::size_t m = 0;
  MapPtr f;          // inputs (x; y)
  SplitPoint seed;
  Matrix normalizer;    // y = b + normalizer (z - b)
  Matrix denormalizer;  // z = b + denormalizer (y - b)
  std::shared_ptr<const ImplicitSolution> head;
  std::shared_ptr<const Level> tail;

  Vector solve(std::span<const double> x) const;
  Vector sample(std::mt19937_64& rng) const;
  bool contains(std::span<const double> y) const;
  // centre and half-widths of the axis-aligned bounds of the y-region
  std::pair<Vector, Vector> bounds() const;

  Vector to_y(const Vector& z) const {
    return seed.y + matvec(normalizer, (z - seed.y).span());
  }
};

namespace {

template <class Fn>
auto at_level(std::size_t index, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (Error& e) {
    e.tag_level(index);
    throw;
  }
}

/// R(x; z') = G_{2..m}(x; phi(x, z'); z') where z_1 = phi(x, z') solves G_1 = 0.
class ReducedMap final : public DifferentiableMap {
 public:
  ReducedMap(MapPtr g, std::shared_ptr<const ImplicitSolution> head, std::size_t n, std::size_t m,
             std::size_t level)
      : g_(std::move(g)), head_(std::move(head)), n_(n), m_(m), level_(level) {}

  std::size_t num_inputs() const override { return n_ + m_ - 1; }
  std::size_t num_outputs() const override { return m_ - 1; }

  Vector value(std::span<const double> p) const override {
    const Vector v = g_->value(lift(p).span());
    return Vector(std::span<const double>(v.span().subspan(1)));
  }

  double component(std::size_t i, std::span<const double> p) const override {
    return g_->component(i + 1, lift(p).span());
  }

  Matrix jacobian(std::span<const double> p) const override {
    const Matrix jg = g_->jacobian(lift(p).span());
    const double d1 = jg(0, n_);
    Matrix out(m_ - 1, n_ + m_ - 1);
    for (std::size_t k = 0; k < n_ + m_ - 1; ++k) {
      const std::size_t col = k < n_ ? k : k + 1;
      const double dphi = -jg(0, col) / d1;
      for (std::size_t i = 1; i < m_; ++i) out(i - 1, k) = jg(i, col) + jg(i, n_) * dphi;
    }
    return out;
  }

 private:
  // (x; z') -> (x; phi(x, z'); z')
  Vector lift(std::span<const double> p) const {
    const double phi = at_level(level_, [&] { return head_->solve_at(p); });
    Vector q(n_ + m_);
    std::copy_n(p.begin(), n_, q.span().begin());
    q[n_] = phi;
    std::copy(p.begin() + static_cast<std::ptrdiff_t>(n_), p.end(), q.span().begin() + static_cast<std::ptrdiff_t>(n_ + 1));
    return q;
  }

  MapPtr g_;
  std::shared_ptr<const ImplicitSolution> head_;
  std::size_t n_;
  std::size_t m_;
  std::size_t level_;
};

std::shared_ptr<const SystemSolution::Level> build_level(MapPtr f, const SplitPoint& seed,
                                                         const SystemOptions& options, std::size_t index,
                                                         const ExprFunction* expr) {
  auto level = std::make_shared<SystemSolution::Level>();
  level->index = index;
  level->n = seed.n();
  level->m = seed.m();
  level->f = f;
  level->seed = seed;
  const std::size_t n = level->n;
  const std::size_t m = level->m;
  const ImplicitOptions scalar{options.box, options.solve};

  if (m == 1) {
    level->normalizer = Matrix::identity(1);
    level->denormalizer = Matrix::identity(1);
    level->head = at_level(index, [&] {
      return std::make_shared<const ImplicitSolution>(ImplicitSolution::build(f, seed, scalar));
    });
    return level;
  }

  // Normalize so that the seed Jacobian of the dependent block is the identity.
  MapPtr g;
  at_level(index, [&] {
    if (expr != nullptr) {
      auto [normalized, j_inv] = normalize(*expr, seed);
      level->normalizer = std::move(j_inv);
      g = as_map(std::move(normalized));
    } else {
      const Matrix j = f->jacobian(seed.joined().span()).columns(n, m);
      level->normalizer = inverse(j);
      g = std::make_shared<const AffineReparam>(f, n, seed.y, level->normalizer);
    }
    level->denormalizer = inverse(level->normalizer);
    return 0;
  });

  // G_1 with independent block (x; z') and dependent z_1.
  std::vector<std::size_t> order(n + m);
  std::iota(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), std::size_t{0});
  for (std::size_t l = 0; l + 1 < m; ++l) order[n + l] = n + 1 + l;
  order[n + m - 1] = n;
  auto first = std::make_shared<const ComponentView>(g, 0, std::move(order));

  const Vector rest(std::span<const double>(seed.y.span().subspan(1)));
  const SplitPoint head_seed{concat(seed.x, rest), Vector{seed.y[0]}};
  level->head = at_level(index, [&] {
    return std::make_shared<const ImplicitSolution>(ImplicitSolution::build(first, head_seed, scalar));
  });

  auto reduced = std::make_shared<const ReducedMap>(g, level->head, n, m, index);
  level->tail = build_level(reduced, SplitPoint{seed.x, rest}, options, index + 1, nullptr);
  return level;
}

}  // namespace

Vector SystemSolution::Level::solve(std::span<const double> x) const {
  if (m == 1) return Vector{at_level(index, [&] { return head->solve_at(x); })};
  const Vector rest = tail->solve(x);
  const double z1 = at_level(index, [&] { return head->solve_at(concat(x, rest).span()); });
  Vector z(m);
  z[0] = z1;
  std::copy(rest.begin(), rest.end(), z.span().begin() + 1);
  return to_y(z);
}

Vector SystemSolution::Level::sample(std::mt19937_64& rng) const {
  const SolutionBox& box = head->box();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double z1 = box.y_lo + (box.y_hi - box.y_lo) * unit(rng);
  if (m == 1) return Vector{z1};
  const Vector rest = tail->sample(rng);
  Vector z(m);
  z[0] = z1;
  std::copy(rest.begin(), rest.end(), z.span().begin() + 1);
  return to_y(z);
}

bool SystemSolution::Level::contains(std::span<const double> y) const {
  const SolutionBox& box = head->box();
  if (m == 1) return box.y_lo <= y[0] && y[0] <= box.y_hi;
  const Vector z = seed.y + matvec(denormalizer, (Vector(y) - seed.y).span());
  if (!(box.y_lo <= z[0] && z[0] <= box.y_hi)) return false;
  return tail->contains(z.span().subspan(1));
}

std::pair<Vector, Vector> SystemSolution::Level::bounds() const {
  const SolutionBox& box = head->box();
  Vector center(m), half(m);
  center[0] = 0.5 * (box.y_lo + box.y_hi);
  half[0] = 0.5 * (box.y_hi - box.y_lo);
  if (m == 1) return {center, half};
  const auto [tc, th] = tail->bounds();
  std::copy(tc.begin(), tc.end(), center.span().begin() + 1);
  std::copy(th.begin(), th.end(), half.span().begin() + 1);
  Vector y_center = to_y(center);
  Vector y_half(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k) y_half[i] += std::fabs(normalizer(i, k)) * half[k];
  return {std::move(y_center), std::move(y_half)};
}

// ---------------------------------------------------------------------------

SystemSolution SystemSolution::build(const ExprFunction& f, const SplitPoint& seed, const SystemOptions& options) {
  const std::size_t m = seed.m();
  if (m == 0) throw DimensionMismatch("no dependent variables");
  if (m > options.max_depth) {
    throw DimensionMismatch("m = " + std::to_string(m) + " exceeds the configured maximum depth " +
                            std::to_string(options.max_depth));
  }
  const auto [fx, fy] = jacobian_split(f, seed);
  const Vector residual = f.eval(seed.joined().span());
  if (!(max_abs(residual.span()) <= options.box.tol_seed)) {
    throw SeedNotOnZeroSet("|F(a, b)|_inf = " + number_text(max_abs(residual.span())) + " exceeds " +
                           number_text(options.box.tol_seed));
  }
  if (lu_factor(fy).singular) throw SingularMatrix("dF/dy(a, b) is singular");

  auto root = build_level(as_map(f), seed, options, 1, &f);
  return SystemSolution(f, std::move(root), options);
}

std::size_t SystemSolution::n() const noexcept { return root_->n; }
std::size_t SystemSolution::m() const noexcept { return root_->m; }
const SplitPoint& SystemSolution::seed() const noexcept { return root_->seed; }
const Matrix& SystemSolution::normalizer() const noexcept { return root_->normalizer; }

const ImplicitSolution& SystemSolution::level_solution(std::size_t index) const {
  const Level* level = root_.get();
  while (level != nullptr && level->index != index) level = level->tail.get();
  if (level == nullptr) throw DimensionMismatch("no recursion level " + std::to_string(index));
  return *level->head;
}

Vector SystemSolution::solve_at(std::span<const double> x) const {
  if (x.size() != n()) {
    throw DimensionMismatch("expected " + std::to_string(n()) + " independent values, got " +
                            std::to_string(x.size()));
  }
  return root_->solve(x);
}

Matrix SystemSolution::jacobian_at(std::span<const double> x) const {
  const Vector y = solve_at(x);
  const auto [fx, fy] = jacobian_split(f_, SplitPoint{Vector(x), y});
  return -solve(fy, fx);
}

std::pair<Vector, Vector> SystemSolution::x_box() const {
  Vector lo(n(), -std::numeric_limits<double>::infinity());
  Vector hi(n(), std::numeric_limits<double>::infinity());
  for (const Level* level = root_.get(); level != nullptr; level = level->tail.get()) {
    const SolutionBox& box = level->head->box();
    for (std::size_t k = 0; k < n(); ++k) {
      lo[k] = std::max(lo[k], box.x_lo[k]);
      hi[k] = std::min(hi[k], box.x_hi[k]);
    }
  }
  return {lo, hi};
}

bool SystemSolution::contains(std::span<const double> x) const {
  const auto [lo, hi] = x_box();
  if (x.size() != n()) return false;
  for (std::size_t k = 0; k < n(); ++k) {
    if (!(lo[k] < x[k] && x[k] < hi[k])) return false;
  }
  return true;
}

std::pair<Vector, Vector> SystemSolution::y_bounds() const {
  const auto [center, half] = root_->bounds();
  return {center - half, center + half};
}

bool SystemSolution::y_region_contains(std::span<const double> y) const {
  return y.size() == m() && root_->contains(y);
}

Vector SystemSolution::sample_y(std::mt19937_64& rng) const { return root_->sample(rng); }

namespace {

// Damped Newton on y -> F(x, y); returns the zero when the residual reaches tol.
std::optional<Vector> polish(const ExprFunction& f, std::span<const double> x, Vector y, double tol) {
  const std::size_t n = x.size();
  const std::size_t m = y.dim();
  auto residual = [&](const Vector& v) { return f.eval(concat(x, v).span()); };
  try {
    Vector r = residual(y);
    double rn = max_abs(r.span());
    std::size_t converged_steps = 0;
    for (int iter = 0; iter < 60; ++iter) {
      if (rn <= tol && ++converged_steps > 2) break;
      const Matrix fy = f.jacobian(concat(x, y).span()).columns(n, m);
      const Vector step = solve(fy, r.span());
      double t = 1.0;
      for (int halving = 0; halving < 30; ++halving, t *= 0.5) {
        const Vector trial = y - t * step;
        Vector rt;
        try {
          rt = residual(trial);
        } catch (const DomainError&) {
          continue;
        }
        const double rtn = max_abs(rt.span());
        if (rtn < rn || rtn <= tol) {
          y = trial;
          r = std::move(rt);
          rn = rtn;
          break;
        }
      }
      if (max_abs(step.span()) * t <= 1e-16 * (1.0 + max_abs(y.span()))) break;
    }
    if (rn <= tol) return y;
  } catch (const Error&) {
  }
  return std::nullopt;
}

}  // namespace

UniquenessReport SystemSolution::verify_uniqueness(std::span<const double> x, std::size_t samples,
                                                   std::uint64_t seed) const {
  UniquenessReport report;
  report.samples = samples;
  report.seed = seed;
  report.tol_sys = options_.tol_sys;
  report.solver_value = solve_at(x);

  const std::size_t nn = n();
  const std::size_t mm = m();
  std::mt19937_64 rng(seed);
  PointBatch batch(nn + mm, samples);
  for (std::size_t t = 0; t < samples; ++t) {
    const Vector y = sample_y(rng);
    for (std::size_t k = 0; k < nn; ++k) batch.column(k)[t] = x[k];
    for (std::size_t i = 0; i < mm; ++i) batch.column(nn + i)[t] = y[i];
  }

  std::vector<double> residual(samples, 0.0);
  std::vector<double> values(samples);
  for (std::size_t i = 0; i < mm; ++i) {
    f_.eval_batch(i, batch, values);
    for (std::size_t t = 0; t < samples; ++t) {
      const double v = std::isnan(values[t]) ? std::numeric_limits<double>::infinity() : std::fabs(values[t]);
      residual[t] = std::max(residual[t], v);
    }
  }
  report.near_zero_samples = static_cast<std::size_t>(
      std::count_if(residual.begin(), residual.end(), [&](double r) { return r <= options_.tol_sys; }));

  // Typical sample spacing and the residual a sample that close to a zero can show.
  const auto [lo, hi] = y_bounds();
  double volume = 1.0;
  for (std::size_t i = 0; i < mm; ++i) volume *= std::max(hi[i] - lo[i], 1e-300);
  const double spacing = std::pow(volume / static_cast<double>(std::max<std::size_t>(samples, 1)),
                                  1.0 / static_cast<double>(mm)) * std::sqrt(static_cast<double>(mm));
  const auto [fx, fy] = jacobian_split(f_, SplitPoint{Vector(x), report.solver_value});
  const double threshold = 4.0 * std::max(hs_norm(fy), 1.0) * spacing;

  std::vector<std::size_t> order;
  for (std::size_t t = 0; t < samples; ++t) {
    if (residual[t] <= threshold) order.push_back(t);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return residual[a] < residual[b]; });

  constexpr double kClusterRadius = 1e-6;
  constexpr std::size_t kMaxPolish = 2000;
  std::size_t polished = 0;
  for (std::size_t t : order) {
    if (polished == kMaxPolish) break;
    const Vector start = batch.point(t);
    const Vector y0(std::span<const double>(start.span().subspan(nn)));
    const bool near_known = std::any_of(report.zeros.begin(), report.zeros.end(), [&](const ZeroCluster& z) {
      return max_abs((z.location - y0).span()) <= 2.0 * spacing;
    });
    if (near_known) continue;
    ++polished;
    const auto zero = polish(f_, x, y0, options_.tol_sys);
    if (!zero || !y_region_contains(zero->span())) continue;
    auto it = std::find_if(report.zeros.begin(), report.zeros.end(), [&](const ZeroCluster& z) {
      return max_abs((z.location - *zero).span()) <= kClusterRadius;
    });
    if (it == report.zeros.end()) {
      report.zeros.push_back({*zero, 1});
    } else {
      ++it->hits;
    }
  }
  report.candidates = polished;

  for (const auto& z : report.zeros) {
    report.max_deviation = std::max(report.max_deviation, max_abs((z.location - report.solver_value).span()));
  }
  report.passed = !report.zeros.empty() && report.max_deviation <= 10.0 * options_.tol_sys;
  return report;
}

}  // namespace dini
