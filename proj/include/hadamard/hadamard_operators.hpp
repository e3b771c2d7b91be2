#pragma once

// Left Hadamard fractional derivative of order alpha in (0, 1): exact oracles
// and the integer-order expansion
//
//   D~x(t) = A L^{-alpha} x(t) + B L^{1-alpha} t x'(t) + sum_{p=2}^N C_p L^{1-alpha-p} V_p(t),
//   L = ln(t/a),  V_p(t) = int_a^t (p-1) ln(tau/a)^{p-2} x(tau)/tau dtau,
//
// together with its pointwise error majorant and the induced bound on a
// variational functional.

#include <functional>
#include <span>
#include <vector>

#include "hadamard/problem.hpp"

namespace hadamard {

struct ExpansionCoefficients {
  FractionalOrder alpha;
  int order;              ///< N >= 2
  double A;
  double B;
  std::vector<double> C;  ///< C_p for p = 2..N, stored at index p - 2

  double c(int p) const { return C.at(static_cast<std::size_t>(p - 2)); }
};

/// Throws ArgumentError for N < 2. Ratios of Gammas are summed in the log
/// domain once N > 20.
ExpansionCoefficients expansion_coefficients(FractionalOrder alpha, int N);

/// Exact derivative of x(tau) = ln(tau/a)^beta:
/// Gamma(beta+1) / Gamma(beta+1-alpha) * ln(t/a)^{beta-alpha}.
double exact_derivative_logpower(double beta, FractionalOrder alpha, double a, double t);

using ScalarFunction = std::function<double(double)>;

/// Exact derivative of a C^1 function from its integrated-by-parts form
///   x(a) L^{-alpha} / Gamma(1-alpha) + 1/Gamma(1-alpha) int_a^t ln(t/tau)^{-alpha} x'(tau) dtau,
/// integrated in w = ln(t/tau)^{1-alpha} (which absorbs the endpoint
/// singularity) by adaptive Gauss-Kronrod. Absolute error <= tol, tol >= 1e-10.
/// Throws AccuracyError when the subdivision budget runs out.
double exact_derivative_quadrature(const ScalarFunction& x, const ScalarFunction& dx,
                                   FractionalOrder alpha, double a, double t, double tol);

enum class MomentRule {
  /// x linear in s = ln(tau/a) between nodes, weight (p-1) s^{p-2} integrated
  /// exactly. Exact for x = c0 + c1 ln(t/a).
  ProductLog,
  /// Plain trapezoid on (p-1) ln(tau/a)^{p-2} x(tau)/tau.
  Trapezoid,
};

/// Per-interval weights of a moment rule: V[i+1] = V[i] + lo[i] x[i] + hi[i] x[i+1].
struct MomentWeights {
  int p;
  MomentRule rule;
  std::vector<double> lo;
  std::vector<double> hi;
};

MomentWeights moment_weights(const Grid& grid, int p, MomentRule rule = MomentRule::ProductLog);

struct MomentTrajectory {
  int p;
  std::vector<double> values;  ///< values[0] == 0
};

MomentTrajectory moment_values(std::span<const double> x, const Grid& grid, int p,
                               MomentRule rule = MomentRule::ProductLog);
/// Same, with precomputed weights.
MomentTrajectory moment_values(std::span<const double> x, const MomentWeights& weights);

/// D~ at every node. Node 0 (t = a) is singular and set to 0; it carries zero
/// weight in every downstream quadrature. `moments` must cover p = 2..N.
std::vector<double> approximate_derivative(std::span<const double> x, std::span<const double> u,
                                           std::span<const MomentTrajectory> moments,
                                           const ExpansionCoefficients& coeffs, const Grid& grid);

struct PointwiseErrorBound {
  std::vector<double> values;
  double curvature_max;  ///< max over sampled tau of |x'(tau) + tau x''(tau)|
};

/// E~(x, t_i) = max_{j<=i} |x'(t_j) + t_j x''(t_j)|
///              * exp((1-alpha)^2 + 1 - alpha) / (Gamma(2-alpha) (1-alpha) N^{1-alpha})
///              * ln(t_i/a)^{1-alpha} (t_i - a).
/// The max is a running max over sampled nodes; values[0] == 0.
PointwiseErrorBound pointwise_error_bound(std::span<const double> dx, std::span<const double> d2x,
                                          FractionalOrder alpha, int N, const Grid& grid);

/// Diagnostic estimate of M * int_a^b E~(x,t) dt with
/// M = max_i |d/dDx L(t_i, x_i, D~_i)| by central differences (step
/// 1e-6 (1 + |D~|)) over nodes i >= 1. D~ is built from x, the supplied dx
/// samples, and product-rule moments. Not a certified enclosure.
double functional_error_bound(std::span<const double> x, std::span<const double> dx,
                              std::span<const double> d2x, const ProblemSpec& problem,
                              const Grid& grid);

}  // namespace hadamard
