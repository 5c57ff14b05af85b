#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pullbound {

// Scalar expression language used for user-supplied drifts and radial
// profiles. Grammar, with precedence ^ > unary - > * / > + - and
// right-associative ^:
//
//   expr    := term (('+' | '-') term)*
//   term    := factor (('*' | '/') factor)*
//   factor  := '-' factor | power
//   power   := primary ('^' factor)?
//   primary := number | variable | fn1 '(' expr ')'
//            | fn2 '(' expr ',' expr ')' | '(' expr ')'
//   fn1     := exp | tanh | abs | sgn      fn2 := min | max
//
// sgn(0) = 0. Domain faults (0^-1, division by zero, ...) follow IEEE
// arithmetic; consumers treat non-finite values as evaluation failure.

enum class BinaryOp { add, sub, mul, div, pow };
enum class UnaryFn { neg, exp, tanh, abs, sgn };
enum class BinaryFn { min, max };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  struct Literal {
    double value;
  };
  struct Variable {};
  struct Unary {
    UnaryFn fn;
    ExprPtr arg;
  };
  struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
  };
  struct Call2 {
    BinaryFn fn;
    ExprPtr a;
    ExprPtr b;
  };

  std::variant<Literal, Variable, Unary, Binary, Call2> node;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset, std::vector<std::string> expected);

  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

// Parses source against the single allowed variable name. Throws ParseError
// with the byte offset of the offending token and the token set that would
// have been accepted there.
ExprPtr parse_expr(std::string_view source, std::string_view variable = "x");

double eval(const Expr& e, double x);

// Emits a source string that parses back to a structurally identical tree
// (for trees whose literals are non-negative, which is everything the parser
// itself can produce). variable must match the name the reparse will use.
std::string render(const Expr& e, std::string_view variable = "x");

bool operator==(const Expr& a, const Expr& b);
inline bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

ExprPtr make_literal(double v);
ExprPtr make_variable();
ExprPtr make_unary(UnaryFn fn, ExprPtr arg);
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_call2(BinaryFn fn, ExprPtr a, ExprPtr b);

}  // namespace pullbound
