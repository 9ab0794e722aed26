#include <charconv>
#include <fstream>
#include <sstream>

#include "dini/cli.hpp"
#include "dini/errors.hpp"

namespace dini::cli {

using nlohmann::json;

namespace {

double to_double(const json& v, const std::string& field) {
  if (!v.is_number()) throw SpecError("field '" + field + "' must be a number");
  return v.get<double>();
}

std::size_t to_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw SpecError("field '" + field + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

Vector to_vector(const json& v, const std::string& field) {
  if (!v.is_array()) throw SpecError("field '" + field + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(to_double(e, field));
  return Vector(std::move(out));
}

Matrix to_matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw SpecError("field '" + field + "' must be a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : v) rows.push_back(to_vector(r, field).values());
  for (const auto& r : rows)
    if (r.size() != rows.front().size() || r.empty()) throw SpecError("field '" + field + "' has ragged rows");
  return Matrix::from_rows(rows);
}

std::vector<std::string> to_strings(const json& v, const std::string& field) {
  if (!v.is_array()) throw SpecError("field '" + field + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw SpecError("field '" + field + "' must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

void read_options(const json& o, ProblemSpec& spec) {
  if (!o.is_object()) throw SpecError("field 'options' must be an object");
  auto& box = spec.system.box;
  for (const auto& [key, value] : o.items()) {
    if (key == "box_halfwidth") box.half_width = to_double(value, key);
    else if (key == "x_half_widths") box.x_half_widths = to_vector(value, key).values();
    else if (key == "y_half_width") box.y_half_width = to_double(value, key);
    else if (key == "grid_density") box.grid_density = to_count(value, key);
    else if (key == "max_shrink") box.max_shrink = to_count(value, key);
    else if (key == "tol_seed") box.tol_seed = to_double(value, key);
    else if (key == "tol_root") spec.system.solve.tol_root = to_double(value, key);
    else if (key == "max_iter") spec.system.solve.max_iter = to_count(value, key);
    else if (key == "tol_sys") spec.system.tol_sys = to_double(value, key);
    else if (key == "max_depth") spec.system.max_depth = to_count(value, key);
    else if (key == "random_seed") spec.random_seed = value.get<std::uint64_t>();
    else if (key == "uniqueness_samples") spec.uniqueness_samples = to_count(value, key);
    else if (key == "jobs") spec.jobs = to_count(value, key);
    else throw SpecError("unknown option '" + key + "'");
  }
  if (box.half_width <= 0.0) throw SpecError("box_halfwidth must be positive");
  if (box.grid_density < 2) throw SpecError("grid_density must be at least 2");
}

}  // namespace

ExprFunction ProblemSpec::function() const { return ExprFunction::parse(functions, variables); }

ProblemSpec parse_problem(const json& doc) {
  if (!doc.is_object()) throw SpecError("spec must be a JSON object");
  ProblemSpec spec;
  for (const auto& [key, value] : doc.items()) {
    if (key == "functions") spec.functions = to_strings(value, key);
    else if (key == "variables") spec.variables = to_strings(value, key);
    else if (key == "split_n") spec.split_n = to_count(value, key);
    else if (key == "seed") spec.seed = to_vector(value, key);
    else if (key == "options") read_options(value, spec);
    else if (key == "matrix") spec.matrix = to_matrix(value, key);
    else if (key == "point") spec.point = to_vector(value, key);
    else if (key == "a") spec.a = to_vector(value, key);
    else if (key == "b") spec.b = to_vector(value, key);
    else if (key == "samples") {
      if (value.is_number_integer()) {
        spec.sample_count = to_count(value, key);
      } else {
        if (!value.is_array()) throw SpecError("field 'samples' must be a count or an array of points");
        for (const auto& p : value) spec.samples.push_back(to_vector(p, key));
      }
    } else if (key == "trials") spec.trials = to_count(value, key);
    else if (key == "mvt_grid") spec.mvt_grid = to_count(value, key);
    else if (key == "initial_radius") spec.initial_radius = to_double(value, key);
    else if (key == "tuples") spec.tuples = to_count(value, key);
    else if (key == "pairs") spec.pairs = to_count(value, key);
    else if (key == "name" || key == "description") continue;
    else throw SpecError("unknown field '" + key + "'");
  }
  return spec;
}

ProblemSpec load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw SpecError("invalid JSON in '" + path + "': " + e.what());
  }
  return parse_problem(doc);
}

namespace {

double parse_number(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw SpecError("cannot parse number '" + s + "' in " + context);
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

GridAxis parse_grid_axis(const std::string& text) {
  auto parts = split(text, ':');
  if (parts.size() != 3) throw SpecError("grid axis '" + text + "' must be lo:hi:steps");
  GridAxis axis{parse_number(parts[0], "--grid"), parse_number(parts[1], "--grid"), 0};
  double steps = parse_number(parts[2], "--grid");
  if (steps < 1 || steps != static_cast<double>(static_cast<std::size_t>(steps)))
    throw SpecError("grid steps in '" + text + "' must be a positive integer");
  axis.steps = static_cast<std::size_t>(steps);
  return axis;
}

Vector parse_query(const std::string& text) {
  std::vector<double> values;
  for (const auto& part : split(text, ',')) values.push_back(parse_number(part, "--query"));
  if (values.empty()) throw SpecError("empty --query");
  return Vector(std::move(values));
}

std::vector<Vector> expand_queries(const std::vector<Vector>& queries, const std::vector<GridAxis>& grid) {
  std::vector<Vector> out = queries;
  if (grid.empty()) return out;
  std::size_t total = 1;
  for (const auto& a : grid) total *= a.steps;
  for (std::size_t flat = 0; flat < total; ++flat) {
    Vector p(grid.size());
    std::size_t rest = flat;
    for (std::size_t k = grid.size(); k-- > 0;) {
      const auto& a = grid[k];
      std::size_t i = rest % a.steps;
      rest /= a.steps;
      p[k] = a.steps == 1 ? a.lo : a.lo + (a.hi - a.lo) * static_cast<double>(i) / static_cast<double>(a.steps - 1);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace dini::cli
