#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hadamard/problem.hpp"

namespace hadamard {

struct SolverOptions {
  double grad_tol = 1e-6;  ///< stop when max |g_i| <= grad_tol
  int max_iterations = 5000;
  int memory = 10;  ///< L-BFGS history length
};

struct Solution {
  std::vector<double> point;
  double value = 0.0;
  double gradient_norm = 0.0;  ///< max-norm
  int iterations = 0;
  bool converged = false;
  std::string diagnostic;
  /// Objective value at x0 followed by every accepted iterate.
  std::vector<double> history;
};

using Objective = std::function<double(std::span<const double>)>;
using Gradient = std::function<std::vector<double>(std::span<const double>)>;

/// Limited-memory BFGS with backtracking Armijo line search (c1 = 1e-4,
/// factor 0.5, unit initial step). EvalError/DomainError raised by f at a
/// trial point rejects the step. Deterministic.
Solution minimize(const Objective& f, const Gradient& g, std::vector<double> x0,
                  const SolverOptions& opts = {});

/// Linear interpolation between (a, x_a) and (b, x_b) at interior nodes.
std::vector<double> initial_guess(const ProblemSpec& spec, const Grid& grid);

}  // namespace hadamard
