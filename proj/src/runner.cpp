#include "hadamard/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "hadamard/errors.hpp"
#include "hadamard/hadamard_operators.hpp"
#include "hadamard/transcription.hpp"
#include "json.hpp"

namespace hadamard {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {"a", "b", "alpha", "N", "k", "x_a", "x_b",
                                          "lagrangian", "exact_solution", "grad_tol",
                                          "max_iterations", "output_path"};

const json& require(const json& doc, const std::string& key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ConfigError(key, "missing required key");
  return *it;
}

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(key, "expected a finite number");
  return x;
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError(key, "integer out of range");
  }
  return static_cast<int>(x);
}

std::string as_text(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

dsl::Expr parse_field(const std::string& key, const std::string& text, dsl::VariableSet allowed) {
  try {
    return dsl::parse(text, allowed);
  } catch (const PositionedError& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

RunConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("<document>", "expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKnownKeys.contains(key)) throw ConfigError(key, "unknown key");
  }

  RunConfig c;
  c.a = as_real(require(doc, "a"), "a");
  c.b = as_real(require(doc, "b"), "b");
  c.alpha = as_real(require(doc, "alpha"), "alpha");
  c.N = as_int(require(doc, "N"), "N");
  c.k = as_int(require(doc, "k"), "k");
  c.x_a = as_real(require(doc, "x_a"), "x_a");
  c.x_b = as_real(require(doc, "x_b"), "x_b");
  c.lagrangian = as_text(require(doc, "lagrangian"), "lagrangian");
  if (doc.contains("exact_solution")) c.exact_solution = as_text(doc["exact_solution"], "exact_solution");
  if (doc.contains("grad_tol")) c.solver.grad_tol = as_real(doc["grad_tol"], "grad_tol");
  if (doc.contains("max_iterations")) c.solver.max_iterations = as_int(doc["max_iterations"], "max_iterations");
  if (doc.contains("output_path")) c.output_path = as_text(doc["output_path"], "output_path");
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate(const RunConfig& c) {
  if (!(c.a > 0.0)) throw ConfigError("a", "must be > 0");
  if (!(c.b > c.a)) throw ConfigError("b", "must be > a");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
  if (c.N < 2) throw ConfigError("N", "must be >= 2");
  if (c.k < 3) throw ConfigError("k", "must be >= 3");
  if (!(c.solver.grad_tol > 0.0)) throw ConfigError("grad_tol", "must be > 0");
  if (c.solver.max_iterations <= 0) throw ConfigError("max_iterations", "must be > 0");
  if (c.solver.memory <= 0) throw ConfigError("memory", "must be > 0");
  to_problem(c);
}

ProblemSpec to_problem(const RunConfig& c) {
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
  ProblemSpec spec{c.a, c.b, FractionalOrder(c.alpha), c.N, c.x_a, c.x_b,
                   parse_field("lagrangian", c.lagrangian, dsl::kLagrangianVariables),
                   std::nullopt};
  if (c.exact_solution) {
    spec.exact_solution = parse_field("exact_solution", *c.exact_solution, dsl::kSolutionVariables);
  }
  try {
    spec.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(c.exact_solution ? "exact_solution" : "a", e.what());
  } catch (const EvalError& e) {
    throw ConfigError("exact_solution", e.what());
  }
  return spec;
}

SolveReport run_solve(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const ProblemSpec spec = to_problem(config);
  const Grid grid = make_grid(config.a, config.b, config.k);
  const Transcription transcription(spec, grid, expansion_coefficients(spec.alpha, spec.N));

  const Solution sol = minimize(
      [&](std::span<const double> x) { return transcription.objective(x); },
      [&](std::span<const double> x) { return transcription.gradient(x); },
      initial_guess(spec, grid), config.solver);

  SolveReport report;
  report.config = config;
  report.J_approx = sol.value;
  report.iterations = sol.iterations;
  report.converged = sol.converged;
  report.gradient_norm = sol.gradient_norm;
  report.diagnostic = sol.diagnostic;
  report.history = sol.history;

  const std::vector<double> x = transcription.full_trajectory(sol.point);
  report.rows.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    ReportRow row{grid[i], x[i], std::nullopt, std::nullopt};
    if (spec.exact_solution) {
      try {
        row.x_exact = dsl::evaluate(*spec.exact_solution, {grid[i], 0.0, 0.0});
      } catch (const EvalError& e) {
        throw EvalError("exact solution: " + e.message(), e.position(), i);
      }
      row.abs_err = std::abs(x[i] - *row.x_exact);
      report.E_k = std::max(report.E_k.value_or(0.0), *row.abs_err);
    }
    report.rows.push_back(row);
  }

  const std::vector<double> dx = derivative_samples(x, grid);
  const std::vector<double> d2x = derivative_samples(dx, grid);
  try {
    report.bound_diagnostic = functional_error_bound(x, dx, d2x, spec, grid);
  } catch (const EvalError&) {
    // Diagnostic only; a domain failure in the perturbed Lagrangian leaves it unset.
  }

  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!config.output_path.empty()) write_report_csv(report, config.output_path);
  return report;
}

void write_report_csv(const SolveReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t,x_numeric,x_exact,abs_err\n";
  for (const auto& row : report.rows) {
    out << format_real(row.t) << ',' << format_real(row.x_numeric) << ',';
    if (row.x_exact) out << format_real(*row.x_exact);
    out << ',';
    if (row.abs_err) out << format_real(*row.abs_err);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "t,x_numeric,x_exact,abs_err") throw std::runtime_error("unexpected CSV header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 4) throw std::runtime_error("malformed CSV row: " + line);
    ReportRow row{std::stod(fields[0]), std::stod(fields[1]), std::nullopt, std::nullopt};
    if (!fields[2].empty()) row.x_exact = std::stod(fields[2]);
    if (!fields[3].empty()) row.abs_err = std::stod(fields[3]);
    rows.push_back(row);
  }
  return rows;
}

std::vector<StudyRow> convergence_study(const RunConfig& config, const std::vector<int>& k_list,
                                        const std::vector<int>& N_list) {
  if (k_list.empty()) throw ConfigError("k_list", "must not be empty");
  if (N_list.empty()) throw ConfigError("n_list", "must not be empty");
  if (!config.exact_solution) throw ConfigError("exact_solution", "required for a convergence study");
  for (int k : k_list) {
    if (k < 3) throw ConfigError("k_list", "every k must be >= 3");
  }
  for (int n : N_list) {
    if (n < 2) throw ConfigError("n_list", "every N must be >= 2");
  }
  validate(config);

  std::vector<StudyRow> rows;
  for (int k : k_list) {
    for (int n : N_list) {
      rows.push_back({k, n, std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN(), 0, false});
    }
  }

  const auto cells = static_cast<long>(rows.size());
#pragma omp parallel for schedule(dynamic)
  for (long c = 0; c < cells; ++c) {
    auto& row = rows[static_cast<std::size_t>(c)];
    RunConfig cell = config;
    cell.k = row.k;
    cell.N = row.N;
    cell.output_path.clear();
    try {
      const SolveReport r = run_solve(cell);
      row.E_k = r.E_k.value_or(std::numeric_limits<double>::quiet_NaN());
      row.J_approx = r.J_approx;
      row.iterations = r.iterations;
      row.converged = r.converged;
    } catch (const std::exception&) {
      row.converged = false;
    }
  }
  return rows;
}

void write_study_csv(const std::vector<StudyRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "k,N,E_k,J_approx,iterations,converged\n";
  for (const auto& r : rows) {
    out << r.k << ',' << r.N << ',' << format_real(r.E_k) << ',' << format_real(r.J_approx) << ','
        << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace hadamard
