#pragma once

#include <cstddef>
#include <vector>

#include "hadamard/lagrangian_dsl.hpp"

namespace hadamard::dsl {

namespace detail {
double apply_binary(char op, double l, double r, std::size_t position);
double apply_function(Function f, double v, std::size_t position);
}  // namespace detail

/// Flat postfix form of an Expr for the hot loops of the objective.
///
/// Subtrees without variables are folded to constants at compile time (so
/// gamma(1.5) costs nothing per node). Results and errors match
/// evaluate(expr, env) bit for bit.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e);
  /// Specialization at a fixed time: subtrees depending only on t are folded
  /// too. Evaluating it at (t, x, Dx) matches the general form bit for bit.
  CompiledExpr(const Expr& e, double fixed_t);

  double operator()(const Env& env) const;
  double operator()(double t, double x, double Dx) const { return (*this)({t, x, Dx}); }

  std::size_t size() const { return code_.size(); }

 private:
  enum class Op : unsigned char { Const, T, X, Dx, Neg, Add, Sub, Mul, Div, Pow, Call };
  struct Instr {
    Op op;
    Function function{};
    std::size_t position = 0;
    double value = 0.0;
  };

  void emit(const Node& n);
  bool is_constant(const Node& n) const;
  void finish();

  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
  bool time_fixed_ = false;
  double fixed_t_ = 0.0;
};

}  // namespace hadamard::dsl
