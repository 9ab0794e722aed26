#include <algorithm>
#include <atomic>
#include <charconv>
#include <functional>
#include <iostream>
#include <random>
#include <thread>

#include <CLI11.hpp>

#include "dini/cli.hpp"
#include "dini/errors.hpp"
#include "dini/inverse.hpp"
#include "dini/verify.hpp"

namespace dini::cli {

using nlohmann::json;

namespace {

constexpr int kJsonIndent = 2;

json to_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

json to_json(const Matrix& m) {
  json a = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) a.push_back(to_json(m.row(i)));
  return a;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json error_json(const std::exception& e) {
  json d;
  if (const auto* de = dynamic_cast<const Error*>(&e)) {
    d["kind"] = de->kind();
    if (de->level()) d["level"] = *de->level();
  } else if (dynamic_cast<const SpecError*>(&e)) {
    d["kind"] = "SpecError";
  } else {
    d["kind"] = "InternalError";
  }
  d["message"] = e.what();
  return d;
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, count);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  for (auto& t : workers) t.join();
}

struct Row {
  Vector query;
  bool ok = false;
  Vector value;
  Matrix jacobian;
  double residual = 0.0;
  json diagnostics;
};

struct Table {
  std::string command;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  json box;
  json header;
  std::vector<Row> rows;
};

int finish(const Table& t, OutputFormat format, std::ostream& out) {
  std::size_t failures = 0;
  for (const auto& r : t.rows) failures += r.ok ? 0 : 1;
  int code = failures ? kPointFailure : kSuccess;

  if (format == OutputFormat::kJson) {
    json doc = t.header;
    doc["command"] = t.command;
    json rows = json::array();
    for (const auto& r : t.rows) {
      json j;
      j["query"] = to_json(r.query);
      j["value"] = r.ok ? to_json(r.value) : json(nullptr);
      j["jacobian"] = r.ok ? to_json(r.jacobian) : json(nullptr);
      j["residual"] = r.ok ? json(r.residual) : json(nullptr);
      j["box"] = t.box;
      j["diagnostics"] = r.diagnostics;
      rows.push_back(std::move(j));
    }
    doc["rows"] = std::move(rows);
    doc["failures"] = failures;
    doc["exit_code"] = code;
    out << doc.dump(kJsonIndent) << '\n';
    return code;
  }

  std::vector<std::string> head;
  for (std::size_t k = 0; k < t.in_dim; ++k) head.push_back("query_" + std::to_string(k + 1));
  for (std::size_t k = 0; k < t.out_dim; ++k) head.push_back("value_" + std::to_string(k + 1));
  for (std::size_t i = 0; i < t.out_dim; ++i)
    for (std::size_t j = 0; j < t.in_dim; ++j)
      head.push_back("jacobian_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  for (const char* h : {"residual", "status", "error_kind", "message"}) head.emplace_back(h);
  for (std::size_t k = 0; k < head.size(); ++k) out << (k ? "," : "") << head[k];
  out << '\n';
  for (const auto& r : t.rows) {
    std::vector<std::string> cells;
    for (std::size_t k = 0; k < t.in_dim; ++k) cells.push_back(k < r.query.dim() ? fmt(r.query[k]) : "");
    for (std::size_t k = 0; k < t.out_dim; ++k) cells.push_back(r.ok ? fmt(r.value[k]) : "");
    for (std::size_t i = 0; i < t.out_dim; ++i)
      for (std::size_t j = 0; j < t.in_dim; ++j) cells.push_back(r.ok ? fmt(r.jacobian(i, j)) : "");
    cells.push_back(r.ok ? fmt(r.residual) : "");
    cells.push_back(r.diagnostics.value("status", ""));
    cells.push_back(r.ok ? "" : r.diagnostics.value("kind", ""));
    cells.push_back(r.ok ? "" : csv_quote(r.diagnostics.value("message", "")));
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << '\n';
  }
  return code;
}

void write_failure(const std::string& command, const std::exception& e, OutputFormat format,
                   std::ostream& out) {
  json d = error_json(e);
  if (format == OutputFormat::kJson) {
    json doc;
    doc["command"] = command;
    doc["error"] = d;
    doc["exit_code"] = static_cast<int>(kSpecError);
    out << doc.dump(kJsonIndent) << '\n';
  } else {
    out << "status,error_kind,message\n"
        << "error," << d["kind"].get<std::string>() << "," << csv_quote(d["message"].get<std::string>()) << '\n';
  }
}

json box_json(const std::pair<Vector, Vector>& x_box, const std::pair<Vector, Vector>& y_box,
              std::size_t depth) {
  json b;
  b["x_lo"] = to_json(x_box.first);
  b["x_hi"] = to_json(x_box.second);
  b["y_lo"] = to_json(y_box.first);
  b["y_hi"] = to_json(y_box.second);
  b["depth"] = depth;
  b["validated"] = true;
  return b;
}

json options_json(const ProblemSpec& spec) {
  const auto& o = spec.system;
  json j;
  j["box_halfwidth"] = o.box.half_width;
  if (!o.box.x_half_widths.empty()) j["x_half_widths"] = o.box.x_half_widths;
  if (o.box.y_half_width) j["y_half_width"] = *o.box.y_half_width;
  j["grid_density"] = o.box.grid_density;
  j["tol_root"] = o.solve.tol_root;
  j["tol_sys"] = o.tol_sys;
  j["random_seed"] = spec.random_seed;
  j["uniqueness_samples"] = spec.uniqueness_samples;
  return j;
}

void check_system_shape(const ProblemSpec& spec) {
  if (spec.functions.empty()) throw SpecError("spec has no functions");
  if (spec.split_n == 0 || spec.split_n >= spec.variables.size())
    throw SpecError("split_n must satisfy 1 <= split_n < number of variables");
  if (spec.variables.size() - spec.split_n != spec.functions.size())
    throw SpecError("expected " + std::to_string(spec.variables.size() - spec.split_n) +
                    " functions for split_n=" + std::to_string(spec.split_n) + ", got " +
                    std::to_string(spec.functions.size()));
  if (spec.seed.dim() != spec.variables.size())
    throw SpecError("seed has " + std::to_string(spec.seed.dim()) + " entries, expected " +
                    std::to_string(spec.variables.size()));
}

SplitPoint split(const Vector& p, std::size_t n) {
  auto s = p.span();
  return SplitPoint{Vector(s.subspan(0, n)), Vector(s.subspan(n))};
}

json uniqueness_json(const SystemSolution& sol, std::span<const double> x, const ProblemSpec& spec) {
  json u;
  if (sol.m() == 1) {
    auto scan = sol.level_solution(1).uniqueness_scan(x, spec.uniqueness_samples);
    u["samples"] = scan.samples;
    u["zeros"] = scan.sign_changes;
    u["passed"] = scan.passed;
  } else {
    auto rep = sol.verify_uniqueness(x, spec.uniqueness_samples, spec.random_seed);
    u["samples"] = rep.samples;
    u["seed"] = rep.seed;
    u["zeros"] = rep.zeros.size();
    u["max_deviation"] = rep.max_deviation;
    u["passed"] = rep.passed;
  }
  return u;
}

}  // namespace

int run_implicit(const ProblemSpec& spec, const std::vector<Vector>& queries_in, OutputFormat format,
                 std::ostream& out) {
  std::optional<SystemSolution> sol;
  std::optional<ExprFunction> f;
  try {
    check_system_shape(spec);
    f = spec.function();
    sol = SystemSolution::build(*f, split(spec.seed, spec.split_n), spec.system);
  } catch (const std::exception& e) {
    write_failure("implicit", e, format, out);
    return kSpecError;
  }
  std::vector<Vector> queries = queries_in;
  if (queries.empty()) queries.push_back(sol->seed().x);

  Table t;
  t.command = "implicit";
  t.in_dim = sol->n();
  t.out_dim = sol->m();
  t.box = box_json(sol->x_box(), sol->y_bounds(), sol->depth());
  t.header["functions"] = spec.functions;
  t.header["variables"] = spec.variables;
  t.header["split_n"] = spec.split_n;
  t.header["seed"] = to_json(spec.seed);
  t.header["options"] = options_json(spec);
  t.rows.resize(queries.size());

  parallel_for(queries.size(), spec.jobs, [&](std::size_t i) {
    Row& r = t.rows[i];
    r.query = queries[i];
    try {
      if (r.query.dim() != sol->n())
        throw DimensionMismatch("query has " + std::to_string(r.query.dim()) + " entries, expected " +
                                std::to_string(sol->n()));
      r.value = sol->solve_at(r.query);
      r.jacobian = sol->jacobian_at(r.query);
      r.residual = max_abs(f->eval(concat(r.query, r.value)));
      r.diagnostics["status"] = "ok";
      if (spec.uniqueness_samples) r.diagnostics["uniqueness"] = uniqueness_json(*sol, r.query, spec);
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.diagnostics = error_json(e);
      r.diagnostics["status"] = "error";
    }
  });
  return finish(t, format, out);
}

int run_invert(const ProblemSpec& spec, const std::vector<Vector>& queries_in, OutputFormat format,
               std::ostream& out) {
  std::optional<LocalInverse> inv;
  std::optional<ExprFunction> f;
  try {
    if (spec.functions.empty()) throw SpecError("spec has no functions");
    if (spec.seed.dim() != spec.variables.size())
      throw SpecError("seed has " + std::to_string(spec.seed.dim()) + " entries, expected " +
                      std::to_string(spec.variables.size()));
    f = spec.function();
    inv = LocalInverse::build(*f, spec.seed, spec.system);
  } catch (const std::exception& e) {
    write_failure("invert", e, format, out);
    return kSpecError;
  }
  std::vector<Vector> queries = queries_in;
  if (queries.empty()) queries.push_back(inv->q());

  const auto& sys = inv->system();
  Table t;
  t.command = "invert";
  t.in_dim = sys.n();
  t.out_dim = sys.m();
  t.box = box_json(sys.x_box(), sys.y_bounds(), sys.depth());
  t.header["functions"] = spec.functions;
  t.header["variables"] = spec.variables;
  t.header["seed"] = to_json(spec.seed);
  t.header["image_of_seed"] = to_json(inv->q());
  t.header["options"] = options_json(spec);
  t.rows.resize(queries.size());

  parallel_for(queries.size(), spec.jobs, [&](std::size_t i) {
    Row& r = t.rows[i];
    r.query = queries[i];
    try {
      if (r.query.dim() != sys.n())
        throw DimensionMismatch("query has " + std::to_string(r.query.dim()) + " entries, expected " +
                                std::to_string(sys.n()));
      r.value = inv->invert_at(r.query);
      r.jacobian = inv->inverse_jacobian_at(r.query);
      r.residual = max_abs(f->eval(r.value) - r.query);
      r.diagnostics["status"] = "ok";
      if (spec.uniqueness_samples) r.diagnostics["uniqueness"] = uniqueness_json(sys, r.query, spec);
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.diagnostics = error_json(e);
      r.diagnostics["status"] = "error";
    }
  });
  return finish(t, format, out);
}

namespace {

json verify_lemma1(const ProblemSpec& spec, bool& passed) {
  if (!spec.matrix) throw SpecError("lemma1 needs 'matrix'");
  auto r = check_operator_bound(*spec.matrix, spec.trials, spec.random_seed);
  passed = r.passed;
  return {{"trials", r.trials}, {"seed", r.seed}, {"hs_norm", r.hs_norm}, {"max_ratio", r.max_ratio},
          {"passed", r.passed}};
}

json verify_lemma2(const ProblemSpec& spec, bool& passed) {
  if (!spec.matrix) throw SpecError("lemma2 needs 'matrix'");
  if (!spec.point) throw SpecError("lemma2 needs 'point'");
  auto f = spec.function();
  std::vector<Vector> samples = spec.samples;
  if (samples.empty()) {
    std::mt19937_64 rng(spec.random_seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t s = 0; s < spec.sample_count; ++s) {
      Vector t(spec.matrix->cols());
      for (std::size_t k = 0; k < t.dim(); ++k) t[k] = u(rng);
      samples.push_back(std::move(t));
    }
  }
  auto r = check_chain_rule(f, *spec.matrix, *spec.point, samples);
  passed = r.passed;
  return {{"samples", r.samples}, {"seed", spec.random_seed}, {"max_discrepancy", r.max_discrepancy},
          {"passed", r.passed}};
}

json verify_lemma3(const ProblemSpec& spec, bool& passed) {
  if (!spec.a || !spec.b) throw SpecError("lemma3 needs 'a' and 'b'");
  auto f = spec.function();
  MvtOptions o;
  o.grid = spec.mvt_grid;
  auto r = mvt_witness(f, *spec.a, *spec.b, o);
  passed = r.found;
  return {{"found", r.found}, {"t", r.t}, {"witness", to_json(r.witness)}, {"residual", r.residual},
          {"samples_used", r.samples_used}, {"passed", r.found}};
}

json verify_lemma4(const ProblemSpec& spec, bool& passed) {
  if (spec.seed.empty()) throw SpecError("lemma4 needs 'seed'");
  auto f = spec.function();
  InjectivityOptions o;
  o.initial_radius = spec.initial_radius;
  o.tuples = spec.tuples;
  o.pairs = spec.pairs;
  o.seed = spec.random_seed;
  auto r = injectivity_radius(f, spec.seed, o);
  passed = r.bliss_passed && r.pairwise_passed;
  return {{"radius", r.radius},
          {"seed", r.seed},
          {"halvings", r.halvings},
          {"tuples", r.tuples},
          {"pairs", r.pairs},
          {"det_sign", r.det_sign},
          {"min_abs_det", r.min_abs_det},
          {"min_separation_ratio", r.min_separation_ratio},
          {"bliss_passed", r.bliss_passed},
          {"pairwise_passed", r.pairwise_passed},
          {"certifying", r.certifying},
          {"passed", passed}};
}

std::string flat(const json& v) {
  if (v.is_array()) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + flat(v[k]);
    return s;
  }
  if (v.is_number_float()) return fmt(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

int run_verify(const ProblemSpec& spec, const std::string& lemma, OutputFormat format, std::ostream& out) {
  json report;
  bool passed = false;
  int code = kSuccess;
  try {
    if (lemma == "lemma1") report = verify_lemma1(spec, passed);
    else if (lemma == "lemma2") report = verify_lemma2(spec, passed);
    else if (lemma == "lemma3") report = verify_lemma3(spec, passed);
    else if (lemma == "lemma4") report = verify_lemma4(spec, passed);
    else throw SpecError("unknown lemma '" + lemma + "', expected lemma1..lemma4");
    code = passed ? kSuccess : kPointFailure;
  } catch (const NoSignChange& e) {
    report = error_json(e);
    report["passed"] = false;
    code = kPointFailure;
  } catch (const RadiusUnderflow& e) {
    report = error_json(e);
    report["passed"] = false;
    code = kPointFailure;
  } catch (const std::exception& e) {
    write_failure("verify", e, format, out);
    return kSpecError;
  }

  if (format == OutputFormat::kJson) {
    json doc;
    doc["command"] = "verify";
    doc["lemma"] = lemma;
    doc["report"] = report;
    doc["exit_code"] = code;
    out << doc.dump(kJsonIndent) << '\n';
  } else {
    std::string head = "lemma", row = lemma;
    for (const auto& [key, value] : report.items()) {
      head += "," + key;
      row += "," + csv_quote(flat(value));
    }
    out << head << '\n' << row << '\n';
  }
  return code;
}

int run(const RunRequest& req, std::ostream& out, std::ostream& err) {
  ProblemSpec spec;
  std::vector<Vector> queries;
  try {
    spec = load_problem(req.spec_path);
    if (req.tol_root) spec.system.solve.tol_root = *req.tol_root;
    if (req.tol_sys) spec.system.tol_sys = *req.tol_sys;
    if (req.seed) spec.random_seed = *req.seed;
    if (req.box_halfwidth) {
      if (*req.box_halfwidth <= 0.0) throw SpecError("--box-halfwidth must be positive");
      spec.system.box.half_width = *req.box_halfwidth;
      spec.system.box.x_half_widths.clear();
      spec.system.box.y_half_width.reset();
    }
    if (req.jobs) spec.jobs = *req.jobs;
    std::vector<Vector> points;
    for (const auto& q : req.queries) points.push_back(parse_query(q));
    std::vector<GridAxis> grid;
    for (const auto& g : req.grid) grid.push_back(parse_grid_axis(g));
    queries = expand_queries(points, grid);
  } catch (const std::exception& e) {
    err << "dini " << req.command << ": " << e.what() << '\n';
    write_failure(req.command, e, req.format, out);
    return kSpecError;
  }

  int code = kSpecError;
  if (req.command == "implicit") code = run_implicit(spec, queries, req.format, out);
  else if (req.command == "invert") code = run_invert(spec, queries, req.format, out);
  else code = run_verify(spec, req.lemma, req.format, out);
  if (code == kSpecError) err << "dini " << req.command << ": spec error, see output\n";
  else if (code == kPointFailure) err << "dini " << req.command << ": one or more failures, see output\n";
  return code;
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Local implicit and inverse function solver"};
  app.require_subcommand(1);
  RunRequest req;
  std::string format = "json";
  std::optional<double> tol_root, tol_sys, box_halfwidth;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--spec", req.spec_path, "Problem spec (JSON)")->required();
    sub->add_option("--out", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--tol-root", tol_root, "Bisection tolerance");
    sub->add_option("--tol-sys", tol_sys, "System residual tolerance");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--box-halfwidth", box_halfwidth, "Initial box half-width h0 on every axis");
    sub->add_option("--jobs", jobs, "Worker threads (0 = hardware concurrency)");
  };
  auto add_queries = [&](CLI::App* sub) {
    sub->add_option("--query", req.queries, "Query point v1,v2,... (repeatable)")->allow_extra_args(false);
    sub->add_option("--grid", req.grid, "lo:hi:steps, one per independent axis")->allow_extra_args(false);
  };

  auto* implicit = app.add_subcommand("implicit", "Evaluate the implicit function and its Jacobian");
  add_common(implicit);
  add_queries(implicit);
  auto* invert = app.add_subcommand("invert", "Evaluate the local inverse and its Jacobian");
  add_common(invert);
  add_queries(invert);
  auto* verify = app.add_subcommand("verify", "Run a lemma check");
  add_common(verify);
  verify->add_option("--lemma", req.lemma, "lemma1 | lemma2 | lemma3 | lemma4")
      ->required()
      ->check(CLI::IsMember({"lemma1", "lemma2", "lemma3", "lemma4"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kSpecError;
  }

  req.command = implicit->parsed() ? "implicit" : invert->parsed() ? "invert" : "verify";
  req.format = format == "csv" ? OutputFormat::kCsv : OutputFormat::kJson;
  req.tol_root = tol_root;
  req.tol_sys = tol_sys;
  req.seed = seed;
  req.box_halfwidth = box_halfwidth;
  req.jobs = jobs;
  return run(req, out, err);
}

}  // namespace dini::cli
