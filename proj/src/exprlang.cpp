#include "genqm/exprlang.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "genqm/error.hpp"

namespace genqm::expr {

namespace {

constexpr double kBranchTolerance = 1e-12;
constexpr int kMaxExponent = 1024;

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

struct Token {
  enum Kind { Number, Ident, Op, LParen, RParen, End } kind = End;
  std::size_t offset = 0;
  std::size_t length = 0;
  double number = 0.0;
  char op = '\0';
  std::string_view text;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { advance(); }

  Expr parse_all() {
    if (tok_.kind == Token::End) {
      throw ParseError(ErrorCode::Syntax, tok_.offset, "empty expression");
    }
    NodePtr root = parse_expr();
    if (tok_.kind != Token::End) {
      fail("expected operator or end of input");
    }
    return Expr(root);
  }

 private:
  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(ErrorCode::Syntax, tok_.offset, "syntax error: " + expected);
  }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::End;
      return;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) {
        ++end;
      }
      tok_.kind = Token::Ident;
      tok_.text = src_.substr(pos_, end - pos_);
      tok_.length = end - pos_;
      pos_ = end;
      return;
    }
    switch (c) {
      case '+': case '-': case '*': case '/': case '^':
        tok_.kind = Token::Op;
        tok_.op = c;
        break;
      case '(':
        tok_.kind = Token::LParen;
        break;
      case ')':
        tok_.kind = Token::RParen;
        break;
      default:
        throw ParseError(ErrorCode::Syntax, pos_,
                         std::string("syntax error: unexpected character '") + c + "'");
    }
    tok_.length = 1;
    ++pos_;
  }

  void lex_number() {
    std::size_t end = pos_;
    auto digits = [&] {
      std::size_t start = end;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
      return end - start;
    };
    std::size_t mantissa = digits();
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      mantissa += digits();
    }
    if (mantissa == 0) {
      throw ParseError(ErrorCode::Syntax, pos_, "syntax error: malformed number");
    }
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t save = end;
      ++end;
      if (end < src_.size() && (src_[end] == '+' || src_[end] == '-')) ++end;
      if (digits() == 0) {
        throw ParseError(ErrorCode::Syntax, save, "syntax error: malformed exponent in number");
      }
    }
    double value = 0.0;
    const auto* first = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, src_.data() + end, value);
    if (ec != std::errc() || ptr != src_.data() + end || !std::isfinite(value)) {
      throw ParseError(ErrorCode::Syntax, pos_, "syntax error: number out of range");
    }
    tok_.kind = Token::Number;
    tok_.number = value;
    tok_.length = end - pos_;
    pos_ = end;
  }

  bool at_op(char c) const { return tok_.kind == Token::Op && tok_.op == c; }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (at_op('+') || at_op('-')) {
      const NodeKind kind = at_op('+') ? NodeKind::Add : NodeKind::Sub;
      advance();
      NodePtr rhs = parse_term();
      lhs = make(Node{.kind = kind, .lhs = lhs, .rhs = rhs});
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (at_op('*') || at_op('/')) {
      const NodeKind kind = at_op('*') ? NodeKind::Mul : NodeKind::Div;
      advance();
      NodePtr rhs = parse_unary();
      lhs = make(Node{.kind = kind, .lhs = lhs, .rhs = rhs});
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (at_op('-')) {
      advance();
      return make(Node{.kind = NodeKind::Negate, .lhs = parse_unary()});
    }
    if (at_op('+')) {
      advance();
      return parse_unary();
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (!at_op('^')) return base;
    advance();
    const int n = parse_exponent();
    if (at_op('^')) fail("chained '^' needs parentheses");
    return make(Node{.kind = NodeKind::Pow, .exponent = n, .lhs = base});
  }

  int parse_exponent() {
    int sign = 1;
    if (at_op('-') || at_op('+')) {
      if (at_op('-')) sign = -1;
      advance();
    }
    if (tok_.kind == Token::LParen) {
      advance();
      const int inner = parse_exponent();
      if (tok_.kind != Token::RParen) {
        throw ParseError(ErrorCode::NonIntegerExponent, tok_.offset,
                         "exponent must be an integer constant");
      }
      advance();
      return sign * inner;
    }
    if (tok_.kind != Token::Number) {
      if (tok_.kind == Token::End) fail("expected integer exponent");
      throw ParseError(ErrorCode::NonIntegerExponent, tok_.offset,
                       "exponent must be an integer constant");
    }
    const double v = tok_.number;
    if (v != std::floor(v) || v > kMaxExponent) {
      throw ParseError(ErrorCode::NonIntegerExponent, tok_.offset,
                       "exponent must be an integer constant");
    }
    advance();
    return sign * static_cast<int>(v);
  }

  NodePtr parse_primary() {
    switch (tok_.kind) {
      case Token::Number: {
        NodePtr n = make(Node{.kind = NodeKind::Literal, .literal = tok_.number});
        advance();
        return n;
      }
      case Token::LParen: {
        advance();
        NodePtr inner = parse_expr();
        if (tok_.kind != Token::RParen) fail("expected ')'");
        advance();
        return inner;
      }
      case Token::Ident:
        return parse_identifier();
      case Token::End:
        fail("expected operand");
      default:
        fail("expected operand");
    }
  }

  NodePtr parse_identifier() {
    const std::string_view name = tok_.text;
    const std::size_t at = tok_.offset;
    if (name == "x") {
      advance();
      return make(Node{.kind = NodeKind::Variable});
    }
    if (name == "pi" || name == "i") {
      advance();
      return make(Node{.kind = NodeKind::Constant,
                       .constant = name == "pi" ? NamedConstant::Pi : NamedConstant::I});
    }
    static constexpr Function kFunctions[] = {Function::Exp,  Function::Sin,  Function::Cos,
                                              Function::Sinh, Function::Cosh, Function::Tanh,
                                              Function::Sqrt};
    for (Function f : kFunctions) {
      if (name == function_name(f)) {
        advance();
        if (tok_.kind != Token::LParen) fail("expected '(' after function name");
        advance();
        NodePtr arg = parse_expr();
        if (tok_.kind != Token::RParen) fail("expected ')'");
        advance();
        return make(Node{.kind = NodeKind::Call, .function = f, .lhs = arg});
      }
    }
    throw ParseError(ErrorCode::UnknownIdentifier, at,
                     "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
};

bool equal_nodes(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Literal:
      return a.literal == b.literal;
    case NodeKind::Constant:
      return a.constant == b.constant;
    case NodeKind::Variable:
      return true;
    case NodeKind::Negate:
      return equal_nodes(*a.lhs, *b.lhs);
    case NodeKind::Pow:
      return a.exponent == b.exponent && equal_nodes(*a.lhs, *b.lhs);
    case NodeKind::Call:
      return a.function == b.function && equal_nodes(*a.lhs, *b.lhs);
    default:
      return equal_nodes(*a.lhs, *b.lhs) && equal_nodes(*a.rhs, *b.rhs);
  }
}

void print(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Literal: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.literal);
      out += buf;
      return;
    }
    case NodeKind::Constant:
      out += n.constant == NamedConstant::Pi ? "pi" : "i";
      return;
    case NodeKind::Variable:
      out += 'x';
      return;
    case NodeKind::Negate:
      out += "(-";
      print(*n.lhs, out);
      out += ')';
      return;
    case NodeKind::Pow:
      out += '(';
      print(*n.lhs, out);
      out += '^';
      out += std::to_string(n.exponent);
      out += ')';
      return;
    case NodeKind::Call:
      out += function_name(n.function);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
    default: {
      static constexpr const char* kOps[] = {" + ", " - ", " * ", " / "};
      out += '(';
      print(*n.lhs, out);
      out += kOps[static_cast<int>(n.kind) - static_cast<int>(NodeKind::Add)];
      print(*n.rhs, out);
      out += ')';
      return;
    }
  }
}

complex ipow(complex z, int k) {
  complex result(1.0, 0.0);
  while (k > 0) {
    if (k & 1) result *= z;
    z *= z;
    k >>= 1;
  }
  return result;
}

Jet2 chain(const Jet2& f, complex g0, complex g1, complex g2) {
  return {g0, g1 * f.d1, g2 * f.d1 * f.d1 + g1 * f.d2};
}

Jet2 eval_node(const Node& n, double x) {
  switch (n.kind) {
    case NodeKind::Literal:
      return {n.literal, 0.0, 0.0};
    case NodeKind::Constant:
      return {n.constant == NamedConstant::Pi ? complex(M_PI, 0.0) : complex(0.0, 1.0), 0.0, 0.0};
    case NodeKind::Variable:
      return {x, 1.0, 0.0};
    case NodeKind::Negate: {
      const Jet2 a = eval_node(*n.lhs, x);
      return {-a.value, -a.d1, -a.d2};
    }
    case NodeKind::Add: {
      const Jet2 a = eval_node(*n.lhs, x);
      const Jet2 b = eval_node(*n.rhs, x);
      return {a.value + b.value, a.d1 + b.d1, a.d2 + b.d2};
    }
    case NodeKind::Sub: {
      const Jet2 a = eval_node(*n.lhs, x);
      const Jet2 b = eval_node(*n.rhs, x);
      return {a.value - b.value, a.d1 - b.d1, a.d2 - b.d2};
    }
    case NodeKind::Mul: {
      const Jet2 a = eval_node(*n.lhs, x);
      const Jet2 b = eval_node(*n.rhs, x);
      return {a.value * b.value, a.d1 * b.value + a.value * b.d1,
              a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2};
    }
    case NodeKind::Div: {
      const Jet2 a = eval_node(*n.lhs, x);
      const Jet2 b = eval_node(*n.rhs, x);
      if (b.value == complex(0.0, 0.0)) throw EvalError("division by zero", x);
      const complex q = a.value / b.value;
      const complex q1 = (a.d1 - q * b.d1) / b.value;
      const complex q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.value;
      return {q, q1, q2};
    }
    case NodeKind::Pow: {
      const Jet2 f = eval_node(*n.lhs, x);
      const int k = n.exponent;
      if (k == 0) return {1.0, 0.0, 0.0};
      if (k < 0 && f.value == complex(0.0, 0.0)) {
        throw EvalError("division by zero (negative power of zero)", x);
      }
      // g(u) = u^k and its first two derivatives at u = f.value.
      complex g0, g1, g2;
      if (k > 0) {
        g0 = ipow(f.value, k);
        g1 = static_cast<double>(k) * ipow(f.value, k - 1);
        g2 = k >= 2 ? static_cast<double>(k) * (k - 1) * ipow(f.value, k - 2) : complex(0.0);
      } else {
        const complex inv = 1.0 / f.value;
        g0 = ipow(inv, -k);
        g1 = static_cast<double>(k) * g0 * inv;
        g2 = static_cast<double>(k) * (k - 1) * g0 * inv * inv;
      }
      return chain(f, g0, g1, g2);
    }
    case NodeKind::Call: {
      const Jet2 f = eval_node(*n.lhs, x);
      const complex u = f.value;
      switch (n.function) {
        case Function::Exp: {
          const complex e = std::exp(u);
          return chain(f, e, e, e);
        }
        case Function::Sin:
          return chain(f, std::sin(u), std::cos(u), -std::sin(u));
        case Function::Cos:
          return chain(f, std::cos(u), -std::sin(u), -std::cos(u));
        case Function::Sinh:
          return chain(f, std::sinh(u), std::cosh(u), std::sinh(u));
        case Function::Cosh:
          return chain(f, std::cosh(u), std::sinh(u), std::cosh(u));
        case Function::Tanh: {
          const complex t = std::tanh(u);
          const complex s = 1.0 - t * t;
          return chain(f, t, s, -2.0 * t * s);
        }
        case Function::Sqrt: {
          if (u == complex(0.0, 0.0)) throw EvalError("division by zero (sqrt derivative at 0)", x);
          if (std::abs(u.imag()) <= kBranchTolerance && u.real() < 0.0) {
            throw EvalError("sqrt argument on the negative real axis", x);
          }
          const complex s = std::sqrt(u);
          return chain(f, s, 0.5 / s, -0.25 / (s * u));
        }
      }
    }
  }
  throw EvalError("corrupt expression node", x);
}

}  // namespace

int arity(NodeKind kind) {
  switch (kind) {
    case NodeKind::Literal:
    case NodeKind::Constant:
    case NodeKind::Variable:
      return 0;
    case NodeKind::Negate:
    case NodeKind::Pow:
    case NodeKind::Call:
      return 1;
    default:
      return 2;
  }
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.empty() || b.empty()) return a.empty() == b.empty();
  return equal_nodes(a.root(), b.root());
}

Expr parse(std::string_view source) { return Parser(source).parse_all(); }

std::string to_string(const Expr& e) {
  std::string out;
  if (!e.empty()) print(e.root(), out);
  return out;
}

Jet2 eval_jet(const Expr& e, double x) {
  if (!std::isfinite(x)) throw EvalError("non-finite evaluation point", x);
  const Jet2 j = eval_node(e.root(), x);
  auto finite = [](complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
  if (!finite(j.value) || !finite(j.d1) || !finite(j.d2)) {
    throw EvalError("non-finite result", x);
  }
  return j;
}

complex eval(const Expr& e, double x) { return eval_jet(e, x).value; }

Expr literal(double v) { return Expr(make(Node{.kind = NodeKind::Literal, .literal = v})); }

Expr constant(NamedConstant c) {
  return Expr(make(Node{.kind = NodeKind::Constant, .constant = c}));
}

Expr variable() { return Expr(make(Node{.kind = NodeKind::Variable})); }

Expr negate(Expr a) {
  return Expr(make(Node{.kind = NodeKind::Negate, .lhs = a.node_ptr()}));
}

Expr binary(NodeKind kind, Expr a, Expr b) {
  return Expr(make(Node{.kind = kind,
                        .lhs = a.node_ptr(),
                        .rhs = b.node_ptr()}));
}

Expr power(Expr base, int exponent) {
  return Expr(make(Node{.kind = NodeKind::Pow,
                        .exponent = exponent,
                        .lhs = base.node_ptr()}));
}

Expr call(Function f, Expr arg) {
  return Expr(make(
      Node{.kind = NodeKind::Call, .function = f, .lhs = arg.node_ptr()}));
}

std::string_view function_name(Function f) {
  switch (f) {
    case Function::Exp: return "exp";
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Sinh: return "sinh";
    case Function::Cosh: return "cosh";
    case Function::Tanh: return "tanh";
    case Function::Sqrt: return "sqrt";
  }
  return "?";
}

}  // namespace genqm::expr
