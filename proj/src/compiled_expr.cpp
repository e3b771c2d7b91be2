#include "hadamard/compiled_expr.hpp"

#include <array>
#include <numbers>

#include "hadamard/errors.hpp"

namespace hadamard::dsl {

CompiledExpr::CompiledExpr(const Expr& e) {
  emit(e.root());
  finish();
}

CompiledExpr::CompiledExpr(const Expr& e, double fixed_t) : time_fixed_(true), fixed_t_(fixed_t) {
  emit(e.root());
  finish();
}

void CompiledExpr::finish() {
  std::size_t depth = 0;
  for (const auto& ins : code_) {
    switch (ins.op) {
      case Op::Const: case Op::T: case Op::X: case Op::Dx: ++depth; break;
      case Op::Neg: case Op::Call: break;
      default: --depth; break;
    }
    max_depth_ = std::max(max_depth_, depth);
  }
}

bool CompiledExpr::is_constant(const Node& n) const {
  if (n.kind == NodeKind::Var) return time_fixed_ && n.variable == Variable::T;
  return (!n.lhs || is_constant(*n.lhs)) && (!n.rhs || is_constant(*n.rhs));
}

void CompiledExpr::emit(const Node& n) {
  if (n.kind != NodeKind::Number && is_constant(n)) {
    // Fold variable-free subtrees unless they fail; a failure is left for run
    // time so it surfaces from evaluation with the same position.
    const Expr sub(std::shared_ptr<const Node>(std::shared_ptr<const Node>{}, &n));
    try {
      code_.push_back({Op::Const, {}, n.position, evaluate(sub, Env{fixed_t_, 0.0, 0.0})});
      return;
    } catch (const EvalError&) {
    }
  }
  switch (n.kind) {
    case NodeKind::Number: code_.push_back({Op::Const, {}, n.position, n.number}); return;
    case NodeKind::Pi: code_.push_back({Op::Const, {}, n.position, std::numbers::pi}); return;
    case NodeKind::Var: {
      Op op = Op::T;
      if (n.variable == Variable::X) op = Op::X;
      if (n.variable == Variable::Dx) op = Op::Dx;
      code_.push_back({op, {}, n.position, 0.0});
      return;
    }
    case NodeKind::Negate:
      emit(*n.lhs);
      code_.push_back({Op::Neg, {}, n.position, 0.0});
      return;
    case NodeKind::Binary: {
      emit(*n.lhs);
      emit(*n.rhs);
      Op op = Op::Add;
      switch (n.op) {
        case '+': op = Op::Add; break;
        case '-': op = Op::Sub; break;
        case '*': op = Op::Mul; break;
        case '/': op = Op::Div; break;
        case '^': op = Op::Pow; break;
      }
      code_.push_back({op, {}, n.position, 0.0});
      return;
    }
    case NodeKind::Call:
      emit(*n.lhs);
      code_.push_back({Op::Call, n.function, n.position, 0.0});
      return;
  }
}

double CompiledExpr::operator()(const Env& env) const {
  constexpr std::size_t kInline = 32;
  std::array<double, kInline> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (max_depth_ > kInline) {
    large.resize(max_depth_);
    stack = large.data();
  }
  std::size_t top = 0;
  for (const auto& ins : code_) {
    switch (ins.op) {
      case Op::Const: stack[top++] = ins.value; break;
      case Op::T: stack[top++] = env.t; break;
      case Op::X: stack[top++] = env.x; break;
      case Op::Dx: stack[top++] = env.Dx; break;
      case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::Add: --top; stack[top - 1] = stack[top - 1] + stack[top]; break;
      case Op::Sub: --top; stack[top - 1] = stack[top - 1] - stack[top]; break;
      case Op::Mul: --top; stack[top - 1] = stack[top - 1] * stack[top]; break;
      case Op::Div:
        --top;
        stack[top - 1] = detail::apply_binary('/', stack[top - 1], stack[top], ins.position);
        break;
      case Op::Pow:
        --top;
        stack[top - 1] = detail::apply_binary('^', stack[top - 1], stack[top], ins.position);
        break;
      case Op::Call:
        stack[top - 1] = detail::apply_function(ins.function, stack[top - 1], ins.position);
        break;
    }
  }
  return stack[0];
}

}  // namespace hadamard::dsl
