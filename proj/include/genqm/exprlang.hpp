#pragma once

// Expression language for the auxiliary function A(x) and the potential V(x).
//
// Grammar (whitespace is insignificant):
//
//   expr     = term { ("+" | "-") term } ;
//   term     = unary { ("*" | "/") unary } ;
//   unary    = ("-" | "+") unary | power ;
//   power    = primary [ "^" exponent ] ;
//   exponent = [ "-" | "+" ] ( integer | "(" exponent ")" ) ;
//   primary  = number | "x" | "pi" | "i" | function "(" expr ")" | "(" expr ")" ;
//   function = "exp" | "sin" | "cos" | "sinh" | "cosh" | "tanh" | "sqrt" ;
//
// Exponents are integer constants; "x^2^3" must be written "(x^2)^3".

#include <complex>
#include <memory>
#include <string>
#include <string_view>

namespace genqm::expr {

using complex = std::complex<double>;

enum class NodeKind { Literal, Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
enum class NamedConstant { Pi, I };
enum class Function { Exp, Sin, Cos, Sinh, Cosh, Tanh, Sqrt };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::Literal;
  double literal = 0.0;
  NamedConstant constant = NamedConstant::Pi;
  Function function = Function::Exp;
  int exponent = 0;
  NodePtr lhs;  // sole operand of Negate, Pow and Call
  NodePtr rhs;
};

/// Number of child nodes a node of `kind` carries.
int arity(NodeKind kind);

/// Immutable expression tree. Copies share structure.
class Expr {
 public:
  Expr() = default;
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  const Node& root() const { return *root_; }
  const NodePtr& node_ptr() const { return root_; }
  bool empty() const { return root_ == nullptr; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  NodePtr root_;
};

/// f(x), f'(x) and f''(x) at one point.
struct Jet2 {
  complex value;
  complex d1;
  complex d2;
};

Expr parse(std::string_view source);

/// Fully parenthesized text that parses back to a structurally equal tree.
std::string to_string(const Expr& e);

/// Forward-mode second-order evaluation. Throws EvalError on division by
/// zero, on a sqrt argument on the non-positive real axis, or on a
/// non-finite result.
Jet2 eval_jet(const Expr& e, double x);

/// Value only.
complex eval(const Expr& e, double x);

// Builders, mostly for tests and programmatic construction.
Expr literal(double v);
Expr constant(NamedConstant c);
Expr variable();
Expr negate(Expr a);
Expr binary(NodeKind kind, Expr a, Expr b);
Expr power(Expr base, int exponent);
Expr call(Function f, Expr arg);

std::string_view function_name(Function f);

}  // namespace genqm::expr
