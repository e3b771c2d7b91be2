#pragma once

// Expression language for Lagrangians L(t, x, Dx) and exact solutions x(t).
//
// Grammar (lowest to highest precedence):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := atom ('^' unary)?          right-associative
//   atom    := number | 'pi' | variable | function '(' expr ')' | '(' expr ')'
//   function: ln exp sqrt sin cos abs gamma
//   variable: t x Dx
//
// Unary minus binds looser than '^', so "-2^2" is -4. There is no implicit
// multiplication. Identifiers are case-sensitive.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hadamard::dsl {

enum class TokenKind { Number, Identifier, Operator, LeftParen, RightParen, Comma };

struct Token {
  TokenKind kind;
  std::string lexeme;
  std::size_t position;  // 0-based character offset

  bool operator==(const Token&) const = default;
};

std::vector<Token> tokenize(std::string_view source);

enum class Variable : std::uint8_t { T = 1, X = 2, Dx = 4 };

/// Bit set of allowed variables.
class VariableSet {
 public:
  constexpr VariableSet() = default;
  constexpr VariableSet(std::initializer_list<Variable> vars) {
    for (auto v : vars) bits_ |= static_cast<std::uint8_t>(v);
  }
  constexpr bool contains(Variable v) const {
    return (bits_ & static_cast<std::uint8_t>(v)) != 0;
  }
  constexpr VariableSet& insert(Variable v) {
    bits_ |= static_cast<std::uint8_t>(v);
    return *this;
  }
  constexpr bool operator==(const VariableSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

inline constexpr VariableSet kLagrangianVariables{Variable::T, Variable::X, Variable::Dx};
inline constexpr VariableSet kSolutionVariables{Variable::T};

enum class Function : std::uint8_t { Ln, Exp, Sqrt, Sin, Cos, Abs, Gamma };

enum class NodeKind : std::uint8_t { Number, Var, Pi, Negate, Binary, Call };

struct Node {
  NodeKind kind;
  std::size_t position;
  double number = 0.0;          // Number
  Variable variable{};          // Var
  char op = 0;                  // Binary: + - * / ^
  Function function{};          // Call
  std::shared_ptr<const Node> lhs;  // Negate/Call operand, Binary left
  std::shared_ptr<const Node> rhs;  // Binary right
};

/// Immutable expression tree. Cheap to copy.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  const Node& root() const { return *root_; }
  bool empty() const { return root_ == nullptr; }
  /// Variables referenced anywhere in the tree.
  VariableSet variables() const;

 private:
  std::shared_ptr<const Node> root_;
};

struct Env {
  double t = 0.0;
  double x = 0.0;
  double Dx = 0.0;
};

Expr parse(std::span<const Token> tokens, VariableSet allowed);
/// tokenize + parse.
Expr parse(std::string_view source, VariableSet allowed);

/// Throws EvalError (with the offending node's offset) on ln/sqrt/gamma domain
/// violations, division by zero, and non-real powers.
double evaluate(const Expr& e, const Env& env);

/// Fully parenthesized source that parses back to the same tree.
std::string to_string(const Expr& e);

/// Structural equality (ignores source positions).
bool structurally_equal(const Expr& lhs, const Expr& rhs);

std::string_view function_name(Function f);

}  // namespace hadamard::dsl
