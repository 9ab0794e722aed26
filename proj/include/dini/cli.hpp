#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dini/expr.hpp"
#include "dini/implicit_system.hpp"
#include "dini/linalg.hpp"

namespace dini::cli {

enum ExitCode : int { kSuccess = 0, kSpecError = 1, kPointFailure = 2 };

/// Parsed problem file. Fields not used by a command are ignored.
struct ProblemSpec {
  std::vector<std::string> functions;
  std::vector<std::string> variables;
  std::size_t split_n = 0;
  Vector seed;

  SystemOptions system;
  std::uint64_t random_seed = 0;
  std::size_t uniqueness_samples = 0;  // 0 disables the per-row scan
  std::size_t jobs = 0;                // 0 means hardware concurrency

  // verify inputs
  std::optional<Matrix> matrix;
  std::optional<Vector> point;
  std::optional<Vector> a;
  std::optional<Vector> b;
  std::vector<Vector> samples;
  std::size_t sample_count = 100;
  std::size_t trials = 1000;
  std::size_t mvt_grid = 1024;
  double initial_radius = 0.5;
  std::size_t tuples = 2000;
  std::size_t pairs = 2000;

  ExprFunction function() const;
};

/// Throws SpecError on malformed input.
ProblemSpec parse_problem(const nlohmann::json& doc);
ProblemSpec load_problem(const std::string& path);

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses "lo:hi:steps".
struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t steps = 1;
};
GridAxis parse_grid_axis(const std::string& text);
Vector parse_query(const std::string& text);

/// Queries first, then the tensor grid in row-major order (last axis fastest).
std::vector<Vector> expand_queries(const std::vector<Vector>& queries, const std::vector<GridAxis>& grid);

enum class OutputFormat { kJson, kCsv };

struct RunRequest {
  std::string command;  // implicit | invert | verify
  std::string spec_path;
  std::vector<std::string> queries;
  std::vector<std::string> grid;
  OutputFormat format = OutputFormat::kJson;
  std::optional<double> tol_root;
  std::optional<double> tol_sys;
  std::optional<std::uint64_t> seed;
  std::optional<double> box_halfwidth;
  std::optional<std::size_t> jobs;
  std::string lemma;
};

int run(const RunRequest& request, std::ostream& out, std::ostream& err);
int run_implicit(const ProblemSpec& spec, const std::vector<Vector>& queries, OutputFormat format,
                 std::ostream& out);
int run_invert(const ProblemSpec& spec, const std::vector<Vector>& queries, OutputFormat format,
               std::ostream& out);
int run_verify(const ProblemSpec& spec, const std::string& lemma, OutputFormat format, std::ostream& out);

/// argv front end used by the dini executable.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dini::cli
