#pragma once

// End-to-end orchestration: JSON run configs, solves, error metrics against
// a known exact solution, convergence studies, and CSV output.
//
// Config schema (flat JSON object, unknown keys rejected):
//   a, b            interval, 0 < a < b
//   alpha           order in (0, 1)
//   N               expansion order >= 2
//   k               grid nodes >= 3
//   x_a, x_b        boundary values
//   lagrangian      expression over t, x, Dx
//   exact_solution  optional expression over t
//   grad_tol        optional, > 0 (default 1e-6)
//   max_iterations  optional, > 0 (default 5000)
//   output_path     optional CSV path ("" = do not write)

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hadamard/nlp_solver.hpp"
#include "hadamard/problem.hpp"

namespace hadamard {

/// Process exit statuses of the CLI.
enum class ExitStatus : int {
  Success = 0,
  ConfigError = 2,
  NonConvergence = 3,
  EvaluationError = 4,
};

struct RunConfig {
  double a = 0.0;
  double b = 0.0;
  double alpha = 0.0;
  int N = 0;
  double x_a = 0.0;
  double x_b = 0.0;
  std::string lagrangian;
  std::optional<std::string> exact_solution;
  int k = 0;
  SolverOptions solver;
  std::string output_path;
};

/// Throws ConfigError naming the key and the violated constraint.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Builds and validates the problem (parses both expressions).
/// Throws ConfigError.
ProblemSpec to_problem(const RunConfig& config);
/// Range checks plus to_problem(). Throws ConfigError.
void validate(const RunConfig& config);

struct ReportRow {
  double t;
  double x_numeric;
  std::optional<double> x_exact;
  std::optional<double> abs_err;
};

struct SolveReport {
  RunConfig config;
  double J_approx = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::string diagnostic;
  std::vector<ReportRow> rows;
  std::optional<double> E_k;               ///< max abs_err over rows
  std::optional<double> bound_diagnostic;  ///< functional_error_bound at the solution
  std::vector<double> history;             ///< accepted objective values
  double seconds = 0.0;
};

/// Solve from the linear initial guess. Writes the CSV to
/// config.output_path when it is non-empty. Solver non-convergence is
/// reported, not thrown; evaluation errors propagate as EvalError.
SolveReport run_solve(const RunConfig& config);

/// "t,x_numeric,x_exact,abs_err", %.17g, LF line endings.
void write_report_csv(const SolveReport& report, const std::filesystem::path& path);
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

struct StudyRow {
  int k;
  int N;
  double E_k;  ///< NaN when unavailable
  double J_approx;
  int iterations;
  bool converged;
};

/// Runs every (k, N) pair, k-major. Per-cell failures are recorded in-row
/// (converged = false). Cells run concurrently under OpenMP; the table
/// order does not depend on completion order.
std::vector<StudyRow> convergence_study(const RunConfig& config, const std::vector<int>& k_list,
                                        const std::vector<int>& N_list);

/// "k,N,E_k,J_approx,iterations,converged".
void write_study_csv(const std::vector<StudyRow>& rows, const std::filesystem::path& path);

}  // namespace hadamard
