#include "hadamard/lagrangian_dsl.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hadamard/compiled_expr.hpp"
#include "hadamard/errors.hpp"
#include "hadamard/special_functions.hpp"

namespace hadamard::dsl {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Length of the longest decimal literal starting at `pos`, 0 if none.
std::size_t scan_number(std::string_view s, std::size_t pos) {
  std::size_t i = pos;
  std::size_t mantissa_digits = 0;
  while (i < s.size() && is_digit(s[i])) ++i, ++mantissa_digits;
  if (i < s.size() && s[i] == '.') {
    std::size_t j = i + 1;
    std::size_t frac = 0;
    while (j < s.size() && is_digit(s[j])) ++j, ++frac;
    if (mantissa_digits + frac > 0) {
      i = j;
      mantissa_digits += frac;
    }
  }
  if (mantissa_digits == 0) return 0;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
    std::size_t exp_digits = 0;
    while (j < s.size() && is_digit(s[j])) ++j, ++exp_digits;
    if (exp_digits > 0) i = j;
  }
  return i - pos;
}

bool lookup_function(std::string_view name, Function& out) {
  static constexpr std::pair<std::string_view, Function> table[] = {
      {"ln", Function::Ln},   {"exp", Function::Exp}, {"sqrt", Function::Sqrt},
      {"sin", Function::Sin}, {"cos", Function::Cos}, {"abs", Function::Abs},
      {"gamma", Function::Gamma}};
  for (const auto& [n, f] : table) {
    if (n == name) {
      out = f;
      return true;
    }
  }
  return false;
}

bool lookup_variable(std::string_view name, Variable& out) {
  if (name == "t") out = Variable::T;
  else if (name == "x") out = Variable::X;
  else if (name == "Dx") out = Variable::Dx;
  else return false;
  return true;
}

std::string_view variable_name(Variable v) {
  switch (v) {
    case Variable::T: return "t";
    case Variable::X: return "x";
    case Variable::Dx: return "Dx";
  }
  return "?";
}

class Parser {
 public:
  Parser(std::span<const Token> tokens, VariableSet allowed)
      : tokens_(tokens), allowed_(allowed) {}

  Expr run() {
    if (tokens_.empty()) throw ParseError("empty expression", 0);
    auto root = expr();
    if (!at_end()) throw ParseError("unexpected token '" + peek().lexeme + "'", peek().position);
    return Expr(std::move(root));
  }

 private:
  using NodePtr = std::shared_ptr<const Node>;

  bool at_end() const { return index_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[index_]; }
  std::size_t end_position() const {
    const auto& last = tokens_.back();
    return last.position + last.lexeme.size();
  }
  bool peek_op(char c) const {
    return !at_end() && peek().kind == TokenKind::Operator && peek().lexeme[0] == c;
  }
  const Token& expect(TokenKind kind, std::string_view what) {
    if (at_end()) throw ParseError("unexpected end of input, expected " + std::string(what), end_position());
    if (peek().kind != kind) {
      throw ParseError("expected " + std::string(what) + ", found '" + peek().lexeme + "'",
                       peek().position);
    }
    return tokens_[index_++];
  }

  static NodePtr binary(char op, std::size_t pos, NodePtr l, NodePtr r) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Binary;
    n->position = pos;
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodePtr expr() {
    auto lhs = term();
    while (peek_op('+') || peek_op('-')) {
      const Token& op = tokens_[index_++];
      lhs = binary(op.lexeme[0], op.position, lhs, term());
    }
    return lhs;
  }

  NodePtr term() {
    auto lhs = unary();
    while (peek_op('*') || peek_op('/')) {
      const Token& op = tokens_[index_++];
      lhs = binary(op.lexeme[0], op.position, lhs, unary());
    }
    return lhs;
  }

  NodePtr unary() {
    if (peek_op('-')) {
      const Token& op = tokens_[index_++];
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::Negate;
      n->position = op.position;
      n->lhs = unary();
      return n;
    }
    return power();
  }

  NodePtr power() {
    auto base = atom();
    if (peek_op('^')) {
      const Token& op = tokens_[index_++];
      // Exponent may carry its own unary minus: 2^-1.
      return binary('^', op.position, base, unary());
    }
    return base;
  }

  NodePtr atom() {
    if (at_end()) throw ParseError("unexpected end of input", end_position());
    const Token& tok = peek();
    switch (tok.kind) {
      case TokenKind::Number: {
        ++index_;
        auto n = std::make_shared<Node>();
        n->kind = NodeKind::Number;
        n->position = tok.position;
        n->number = std::strtod(tok.lexeme.c_str(), nullptr);
        return n;
      }
      case TokenKind::LeftParen: {
        ++index_;
        auto inner = expr();
        expect(TokenKind::RightParen, "')'");
        return inner;
      }
      case TokenKind::Identifier: {
        ++index_;
        auto n = std::make_shared<Node>();
        n->position = tok.position;
        Function f;
        Variable v;
        if (lookup_function(tok.lexeme, f)) {
          expect(TokenKind::LeftParen, "'(' after function name");
          n->kind = NodeKind::Call;
          n->function = f;
          n->lhs = expr();
          expect(TokenKind::RightParen, "')'");
          return n;
        }
        if (tok.lexeme == "pi") {
          n->kind = NodeKind::Pi;
          return n;
        }
        if (lookup_variable(tok.lexeme, v)) {
          if (!allowed_.contains(v)) {
            throw ParseError("variable '" + tok.lexeme + "' is not allowed here", tok.position);
          }
          n->kind = NodeKind::Var;
          n->variable = v;
          return n;
        }
        throw ParseError("unknown identifier '" + tok.lexeme + "'", tok.position);
      }
      default:
        throw ParseError("unexpected token '" + tok.lexeme + "'", tok.position);
    }
  }

  std::span<const Token> tokens_;
  VariableSet allowed_;
  std::size_t index_ = 0;
};

void collect(const Node& n, VariableSet& vars) {
  if (n.kind == NodeKind::Var) vars.insert(n.variable);
  if (n.lhs) collect(*n.lhs, vars);
  if (n.rhs) collect(*n.rhs, vars);
}

[[noreturn]] void eval_fail(const std::string& what, const Node& n) {
  throw EvalError(what, n.position);
}

double eval_node(const Node& n, const Env& env) {
  switch (n.kind) {
    case NodeKind::Number: return n.number;
    case NodeKind::Pi: return std::numbers::pi;
    case NodeKind::Var:
      switch (n.variable) {
        case Variable::T: return env.t;
        case Variable::X: return env.x;
        case Variable::Dx: return env.Dx;
      }
      break;
    case NodeKind::Negate: return -eval_node(*n.lhs, env);
    case NodeKind::Binary: {
      const double l = eval_node(*n.lhs, env);
      const double r = eval_node(*n.rhs, env);
      return detail::apply_binary(n.op, l, r, n.position);
    }
    case NodeKind::Call:
      return detail::apply_function(n.function, eval_node(*n.lhs, env), n.position);
  }
  eval_fail("malformed expression node", n);
}

void print(const Node& n, std::ostringstream& out) {
  switch (n.kind) {
    case NodeKind::Number: {
      char buf[32];
      auto res = std::to_chars(buf, buf + sizeof buf, n.number);
      out << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
      return;
    }
    case NodeKind::Pi: out << "pi"; return;
    case NodeKind::Var: out << variable_name(n.variable); return;
    case NodeKind::Negate:
      out << "(-";
      print(*n.lhs, out);
      out << ')';
      return;
    case NodeKind::Binary:
      out << '(';
      print(*n.lhs, out);
      out << ' ' << n.op << ' ';
      print(*n.rhs, out);
      out << ')';
      return;
    case NodeKind::Call:
      out << function_name(n.function) << '(';
      print(*n.lhs, out);
      out << ')';
      return;
  }
}

bool equal_nodes(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Number: return a.number == b.number;
    case NodeKind::Pi: return true;
    case NodeKind::Var: return a.variable == b.variable;
    case NodeKind::Negate: return equal_nodes(*a.lhs, *b.lhs);
    case NodeKind::Binary:
      return a.op == b.op && equal_nodes(*a.lhs, *b.lhs) && equal_nodes(*a.rhs, *b.rhs);
    case NodeKind::Call: return a.function == b.function && equal_nodes(*a.lhs, *b.lhs);
  }
  return false;
}

}  // namespace

double detail::apply_binary(char op, double l, double r, std::size_t position) {
  switch (op) {
    case '+': return l + r;
    case '-': return l - r;
    case '*': return l * r;
    case '/':
      if (r == 0.0) throw EvalError("division by zero", position);
      return l / r;
    case '^': {
      if (l == 0.0 && r < 0.0) throw EvalError("zero raised to a negative power", position);
      if (l < 0.0 && r != std::trunc(r)) {
        throw EvalError("negative base raised to a non-integer power", position);
      }
      return std::pow(l, r);
    }
    default: throw EvalError(std::string("unknown operator '") + op + "'", position);
  }
}

double detail::apply_function(Function f, double v, std::size_t position) {
  switch (f) {
    case Function::Ln:
      if (!(v > 0.0)) throw EvalError("ln of non-positive value", position);
      return std::log(v);
    case Function::Exp: return std::exp(v);
    case Function::Sqrt:
      if (v < 0.0) throw EvalError("sqrt of negative value", position);
      return std::sqrt(v);
    case Function::Sin: return std::sin(v);
    case Function::Cos: return std::cos(v);
    case Function::Abs: return std::abs(v);
    case Function::Gamma:
      try {
        return hadamard::gamma(v);
      } catch (const DomainError&) {
        throw EvalError("gamma pole", position);
      }
  }
  throw EvalError("unknown function", position);
}

std::vector<Token> tokenize(std::string_view source) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < source.size()) {
    const char c = source[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (const std::size_t len = scan_number(source, i); len > 0) {
      std::string lexeme(source.substr(i, len));
      if (!std::isfinite(std::strtod(lexeme.c_str(), nullptr))) {
        throw LexError("numeric literal out of range", i);
      }
      out.push_back({TokenKind::Number, std::move(lexeme), i});
      i += len;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i + 1;
      while (j < source.size() && is_ident_char(source[j])) ++j;
      out.push_back({TokenKind::Identifier, std::string(source.substr(i, j - i)), i});
      i = j;
      continue;
    }
    switch (c) {
      case '+': case '-': case '*': case '/': case '^':
        out.push_back({TokenKind::Operator, std::string(1, c), i});
        break;
      case '(': out.push_back({TokenKind::LeftParen, "(", i}); break;
      case ')': out.push_back({TokenKind::RightParen, ")", i}); break;
      case ',': out.push_back({TokenKind::Comma, ",", i}); break;
      default: throw LexError(std::string("illegal character '") + c + "'", i);
    }
    ++i;
  }
  return out;
}

VariableSet Expr::variables() const {
  VariableSet vars;
  if (root_) collect(*root_, vars);
  return vars;
}

Expr parse(std::span<const Token> tokens, VariableSet allowed) {
  return Parser(tokens, allowed).run();
}

Expr parse(std::string_view source, VariableSet allowed) {
  const auto tokens = tokenize(source);
  return parse(std::span<const Token>(tokens), allowed);
}

double evaluate(const Expr& e, const Env& env) { return eval_node(e.root(), env); }

std::string to_string(const Expr& e) {
  std::ostringstream out;
  print(e.root(), out);
  return out.str();
}

bool structurally_equal(const Expr& lhs, const Expr& rhs) {
  return equal_nodes(lhs.root(), rhs.root());
}

std::string_view function_name(Function f) {
  switch (f) {
    case Function::Ln: return "ln";
    case Function::Exp: return "exp";
    case Function::Sqrt: return "sqrt";
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Abs: return "abs";
    case Function::Gamma: return "gamma";
  }
  return "?";
}

}  // namespace hadamard::dsl
