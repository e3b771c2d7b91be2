#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hadamard/lagrangian_dsl.hpp"

namespace hadamard {

/// Order alpha of the left Hadamard derivative, restricted to (0, 1).
class FractionalOrder {
 public:
  /// Throws ArgumentError unless 0 < alpha < 1.
  explicit FractionalOrder(double alpha);
  double value() const noexcept { return alpha_; }

 private:
  double alpha_;
};

/// Uniform grid t_i = a + i*h on [a, b] with k >= 3 nodes. t_0 = a and
/// t_{k-1} = b exactly.
struct Grid {
  double a = 0.0;
  double b = 0.0;
  double h = 0.0;
  std::vector<double> nodes;

  std::size_t size() const noexcept { return nodes.size(); }
  double operator[](std::size_t i) const { return nodes[i]; }
};

/// Throws ArgumentError unless 0 < a < b and k >= 3.
Grid make_grid(double a, double b, int k);

/// Minimize int_a^b L(t, x, D^alpha x) dt subject to x(a) = x_a, x(b) = x_b.
struct ProblemSpec {
  double a;
  double b;
  FractionalOrder alpha;
  int N;  ///< expansion order
  double x_a;
  double x_b;
  dsl::Expr lagrangian;                  ///< over {t, x, Dx}
  std::optional<dsl::Expr> exact_solution;  ///< over {t}

  /// Checks ranges, variable sets, and that an exact solution (if any) meets
  /// both boundary values within 1e-9. Throws ArgumentError.
  void validate() const;
};

}  // namespace hadamard
