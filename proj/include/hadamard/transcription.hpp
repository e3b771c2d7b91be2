#pragma once

// Direct transcription of the expanded problem. The trajectory x is sampled
// on a uniform grid with both boundary values pinned; u = x' comes from
// finite differences and the moments V_p from cumulative quadrature, so the
// dynamics x' = u, V_p' = (p-1) ln(t/a)^{p-2} x/t, V_p(a) = 0 hold by
// construction and only the k-2 interior samples remain as unknowns.

#include <span>
#include <vector>

#include "hadamard/compiled_expr.hpp"
#include "hadamard/hadamard_operators.hpp"
#include "hadamard/problem.hpp"

namespace hadamard {

/// Central differences inside, second-order one-sided stencils at both ends.
/// Exact for quadratics.
std::vector<double> derivative_samples(std::span<const double> x, const Grid& grid);

struct DiscreteTrajectory {
  Grid grid;
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> d;  ///< D~ at the nodes, d[0] == 0
  std::vector<MomentTrajectory> moments;  ///< p = 2..N
};

/// Precomputed transcription of one (problem, grid, coefficients) triple.
/// Immutable after construction; all members are safe to call concurrently.
class Transcription {
 public:
  Transcription(const ProblemSpec& spec, Grid grid, ExpansionCoefficients coeffs,
                MomentRule rule = MomentRule::ProductLog);

  std::size_t dimension() const { return grid_.size() - 2; }
  const Grid& grid() const { return grid_; }
  const ProblemSpec& spec() const { return spec_; }
  const ExpansionCoefficients& coefficients() const { return coeffs_; }
  /// Trapezoid weights with the singular node t = a zeroed.
  const std::vector<double>& quadrature_weights() const { return weights_; }

  /// Interior samples with both boundary values attached.
  std::vector<double> full_trajectory(std::span<const double> interior) const;

  DiscreteTrajectory assemble(std::span<const double> interior) const;

  /// sum_{i>=1} w_i L(t_i, x_i, d_i). Throws EvalError carrying the node.
  double objective(std::span<const double> interior) const;

  /// Central finite differences, step 1e-6 (1 + |x_j|) per coordinate.
  /// D~ is linear in x, so each perturbed objective is formed incrementally:
  /// only nodes i >= j - 1 change, and their D~ moves by an exact linear
  /// increment. Coordinates are distributed over OpenMP threads; the result
  /// does not depend on the thread count.
  std::vector<double> gradient(std::span<const double> interior) const;

  /// Reference for gradient(): one full objective evaluation per perturbed
  /// point, single-threaded. Agrees with gradient() to rounding.
  std::vector<double> gradient_serial(std::span<const double> interior) const;

 private:
  struct Scratch {
    std::vector<double> x;
    std::vector<double> moments;  // running V_p, p = 2..N
  };
  struct Linearization {
    std::vector<double> x;
    std::vector<double> d;
    std::vector<double> moment_step;  // [p-2] lo + hi, reused per coordinate
  };

  double lagrangian_at(std::size_t i, double x, double d) const;
  double objective_full(std::span<const double> x, Scratch& scratch) const;
  double partial_full(std::span<const double> interior, std::size_t j, Scratch& scratch) const;
  double partial_incremental(const Linearization& base, std::size_t j) const;

  ProblemSpec spec_;
  Grid grid_;
  ExpansionCoefficients coeffs_;
  std::vector<dsl::CompiledExpr> node_lagrangian_;  // specialized at t_i
  std::vector<MomentWeights> moment_weights_;  // p = 2..N
  std::vector<double> weights_;
  // Per-node factors of D~: A L^{-alpha}, B L^{1-alpha} t, C_p L^{1-alpha-p}.
  std::vector<double> x_factor_;
  std::vector<double> u_factor_;
  std::vector<double> v_factor_;  // row-major [node][p-2]
};

DiscreteTrajectory assemble(std::span<const double> interior_x, const ProblemSpec& spec,
                            const Grid& grid, const ExpansionCoefficients& coeffs);

double objective(std::span<const double> interior_x, const ProblemSpec& spec, const Grid& grid,
                 const ExpansionCoefficients& coeffs);

std::vector<double> objective_gradient(std::span<const double> interior_x, const ProblemSpec& spec,
                                       const Grid& grid, const ExpansionCoefficients& coeffs);

}  // namespace hadamard
