#include "hadamard/nlp_solver.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "hadamard/errors.hpp"

namespace hadamard {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr double kMinStep = 1e-16;

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct Correction {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion: returns -H g.
std::vector<double> lbfgs_direction(const std::deque<Correction>& memory,
                                    std::span<const double> g) {
  std::vector<double> q(g.begin(), g.end());
  std::vector<double> alpha(memory.size());
  for (std::size_t m = memory.size(); m-- > 0;) {
    const auto& c = memory[m];
    alpha[m] = c.rho * dot(c.s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[m] * c.y[i];
  }
  const auto& last = memory.back();
  const double scale = dot(last.s, last.y) / dot(last.y, last.y);
  for (double& v : q) v *= scale;
  for (std::size_t m = 0; m < memory.size(); ++m) {
    const auto& c = memory[m];
    const double beta = c.rho * dot(c.y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[m] - beta) * c.s[i];
  }
  for (double& v : q) v = -v;
  return q;
}

std::vector<double> steepest_descent(std::span<const double> g) {
  const double norm = std::sqrt(dot(g, g));
  std::vector<double> d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) d[i] = -g[i] / norm;
  return d;
}

}  // namespace

Solution minimize(const Objective& f, const Gradient& g, std::vector<double> x0,
                  const SolverOptions& opts) {
  if (!(opts.grad_tol > 0.0) || opts.max_iterations <= 0 || opts.memory <= 0) {
    throw ArgumentError("solver options must be positive");
  }
  Solution sol;
  sol.point = std::move(x0);
  sol.value = f(sol.point);
  std::vector<double> grad = g(sol.point);
  sol.history.push_back(sol.value);

  std::deque<Correction> memory;
  std::vector<double> trial(sol.point.size());

  while (true) {
    sol.gradient_norm = max_norm(grad);
    if (sol.gradient_norm <= opts.grad_tol) {
      sol.converged = true;
      return sol;
    }
    if (sol.iterations >= opts.max_iterations) {
      sol.diagnostic = "iteration budget exhausted";
      return sol;
    }

    std::vector<double> direction =
        memory.empty() ? steepest_descent(grad) : lbfgs_direction(memory, grad);
    double slope = dot(direction, grad);
    if (!(slope < 0.0)) {
      memory.clear();
      direction = steepest_descent(grad);
      slope = dot(direction, grad);
    }

    double step = 1.0;
    double trial_value = 0.0;
    std::vector<double> trial_grad;
    while (true) {
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = sol.point[i] + step * direction[i];
      bool ok = false;
      try {
        trial_value = f(trial);
        if (std::isfinite(trial_value) && trial_value <= sol.value + kArmijo * step * slope) {
          trial_grad = g(trial);
          ok = true;
        }
      } catch (const EvalError&) {
      } catch (const DomainError&) {
      }
      if (ok) break;
      step *= kBacktrack;
      if (step < kMinStep) {
        sol.diagnostic = "line search step underflow";
        return sol;
      }
    }

    Correction c{std::vector<double>(trial.size()), std::vector<double>(trial.size()), 0.0};
    for (std::size_t i = 0; i < trial.size(); ++i) {
      c.s[i] = trial[i] - sol.point[i];
      c.y[i] = trial_grad[i] - grad[i];
    }
    const double sy = dot(c.s, c.y);
    // Skip updates that would break positive definiteness.
    if (sy > 1e-12 * std::sqrt(dot(c.s, c.s) * dot(c.y, c.y))) {
      c.rho = 1.0 / sy;
      memory.push_back(std::move(c));
      if (memory.size() > static_cast<std::size_t>(opts.memory)) memory.pop_front();
    }

    std::swap(sol.point, trial);
    sol.value = trial_value;
    grad = std::move(trial_grad);
    sol.history.push_back(sol.value);
    ++sol.iterations;
  }
}

std::vector<double> initial_guess(const ProblemSpec& spec, const Grid& grid) {
  std::vector<double> x(grid.size() - 2);
  const double slope = (spec.x_b - spec.x_a) / (spec.b - spec.a);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = spec.x_a + slope * (grid[i + 1] - spec.a);
  return x;
}

}  // namespace hadamard
