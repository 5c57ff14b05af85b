#include "pullbound/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pullbound {

namespace {

std::string describe(const std::string& what, std::size_t offset,
                     const std::vector<std::string>& expected) {
  std::ostringstream os;
  os << what << " at byte " << offset;
  if (!expected.empty()) {
    os << " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) os << ", ";
      os << expected[i];
    }
    os << ")";
  }
  return os.str();
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t offset,
                       std::vector<std::string> expected)
    : std::runtime_error(describe(what, offset, expected)),
      offset_(offset),
      expected_(std::move(expected)) {}

ExprPtr make_literal(double v) { return std::make_shared<Expr>(Expr{Expr::Literal{v}}); }
ExprPtr make_variable() { return std::make_shared<Expr>(Expr{Expr::Variable{}}); }
ExprPtr make_unary(UnaryFn fn, ExprPtr arg) {
  return std::make_shared<Expr>(Expr{Expr::Unary{fn, std::move(arg)}});
}
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<Expr>(Expr{Expr::Binary{op, std::move(lhs), std::move(rhs)}});
}
ExprPtr make_call2(BinaryFn fn, ExprPtr a, ExprPtr b) {
  return std::make_shared<Expr>(Expr{Expr::Call2{fn, std::move(a), std::move(b)}});
}

namespace {

enum class TokKind { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };

struct Token {
  TokKind kind;
  std::size_t offset;
  double value = 0.0;     // number
  std::string_view text;  // ident
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = TokKind::end;
      return;
    }
    const char c = src_[pos_];
    switch (c) {
      case '+': tok_.kind = TokKind::plus; ++pos_; return;
      case '-': tok_.kind = TokKind::minus; ++pos_; return;
      case '*': tok_.kind = TokKind::star; ++pos_; return;
      case '/': tok_.kind = TokKind::slash; ++pos_; return;
      case '^': tok_.kind = TokKind::caret; ++pos_; return;
      case '(': tok_.kind = TokKind::lparen; ++pos_; return;
      case ')': tok_.kind = TokKind::rparen; ++pos_; return;
      case ',': tok_.kind = TokKind::comma; ++pos_; return;
      default: break;
    }
    if ((c >= '0' && c <= '9') || c == '.') {
      double v = 0.0;
      const char* first = src_.data() + pos_;
      const char* last = src_.data() + src_.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr == first) {
        throw ParseError("malformed number", pos_, {"number"});
      }
      tok_.kind = TokKind::number;
      tok_.value = v;
      pos_ += static_cast<std::size_t>(ptr - first);
      return;
    }
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             ((src_[pos_] >= 'a' && src_[pos_] <= 'z') || (src_[pos_] >= 'A' && src_[pos_] <= 'Z') ||
              (src_[pos_] >= '0' && src_[pos_] <= '9') || src_[pos_] == '_')) {
      ++pos_;
      }
      tok_.kind = TokKind::ident;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_,
                     {"number", "identifier", "operator"});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
};

class Parser {
 public:
  Parser(std::string_view src, std::string_view variable) : lex_(src), variable_(variable) {}

  ExprPtr parse() {
    ExprPtr e = parse_expr_rule();
    const Token& t = lex_.peek();
    if (t.kind != TokKind::end) {
      throw ParseError("trailing input", t.offset, {"operator", "end of input"});
    }
    return e;
  }

 private:
  ExprPtr parse_expr_rule() {
    ExprPtr lhs = parse_term();
    while (true) {
      const TokKind k = lex_.peek().kind;
      if (k == TokKind::plus || k == TokKind::minus) {
        lex_.take();
        ExprPtr rhs = parse_term();
        lhs = make_binary(k == TokKind::plus ? BinaryOp::add : BinaryOp::sub, std::move(lhs),
                          std::move(rhs));
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    while (true) {
      const TokKind k = lex_.peek().kind;
      if (k == TokKind::star || k == TokKind::slash) {
        lex_.take();
        ExprPtr rhs = parse_factor();
        lhs = make_binary(k == TokKind::star ? BinaryOp::mul : BinaryOp::div, std::move(lhs),
                          std::move(rhs));
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_factor() {
    if (lex_.peek().kind == TokKind::minus) {
      lex_.take();
      return make_unary(UnaryFn::neg, parse_factor());
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (lex_.peek().kind == TokKind::caret) {
      lex_.take();
      // Exponent admits a leading minus, and ^ chains to the right.
      ExprPtr exponent = parse_factor();
      return make_binary(BinaryOp::pow, std::move(base), std::move(exponent));
    }
    return base;
  }

  ExprPtr parse_primary() {
    const Token t = lex_.take();
    switch (t.kind) {
      case TokKind::number:
        return make_literal(t.value);
      case TokKind::lparen: {
        ExprPtr e = parse_expr_rule();
        expect(TokKind::rparen, "')'");
        return e;
      }
      case TokKind::ident:
        return parse_ident(t);
      default:
        throw ParseError("unexpected token", t.offset,
                         {"number", std::string("'") + std::string(variable_) + "'", "function",
                          "'('", "'-'"});
    }
  }

  ExprPtr parse_ident(const Token& t) {
    if (t.text == variable_) return make_variable();
    if (t.text == "exp") return parse_call1(UnaryFn::exp);
    if (t.text == "tanh") return parse_call1(UnaryFn::tanh);
    if (t.text == "abs") return parse_call1(UnaryFn::abs);
    if (t.text == "sgn") return parse_call1(UnaryFn::sgn);
    if (t.text == "min") return parse_call2(BinaryFn::min);
    if (t.text == "max") return parse_call2(BinaryFn::max);
    throw ParseError("unknown identifier '" + std::string(t.text) + "'", t.offset,
                     {std::string("'") + std::string(variable_) + "'", "exp", "tanh", "abs", "sgn",
                      "min", "max"});
  }

  ExprPtr parse_call1(UnaryFn fn) {
    expect(TokKind::lparen, "'('");
    ExprPtr a = parse_expr_rule();
    expect(TokKind::rparen, "')'");
    return make_unary(fn, std::move(a));
  }

  ExprPtr parse_call2(BinaryFn fn) {
    expect(TokKind::lparen, "'('");
    ExprPtr a = parse_expr_rule();
    expect(TokKind::comma, "','");
    ExprPtr b = parse_expr_rule();
    expect(TokKind::rparen, "')'");
    return make_call2(fn, std::move(a), std::move(b));
  }

  void expect(TokKind kind, const char* what) {
    const Token t = lex_.take();
    if (t.kind != kind) {
      throw ParseError("unexpected token", t.offset, {what});
    }
  }

  Lexer lex_;
  std::string_view variable_;
};

}  // namespace

ExprPtr parse_expr(std::string_view source, std::string_view variable) {
  return Parser(source, variable).parse();
}

double eval(const Expr& e, double x) {
  struct Visitor {
    double x;
    double operator()(const Expr::Literal& n) const { return n.value; }
    double operator()(const Expr::Variable&) const { return x; }
    double operator()(const Expr::Unary& n) const {
      const double v = eval(*n.arg, x);
      switch (n.fn) {
        case UnaryFn::neg: return -v;
        case UnaryFn::exp: return std::exp(v);
        case UnaryFn::tanh: return std::tanh(v);
        case UnaryFn::abs: return std::fabs(v);
        case UnaryFn::sgn: return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      }
      return 0.0;
    }
    double operator()(const Expr::Binary& n) const {
      const double a = eval(*n.lhs, x);
      const double b = eval(*n.rhs, x);
      switch (n.op) {
        case BinaryOp::add: return a + b;
        case BinaryOp::sub: return a - b;
        case BinaryOp::mul: return a * b;
        case BinaryOp::div: return a / b;
        case BinaryOp::pow: return std::pow(a, b);
      }
      return 0.0;
    }
    double operator()(const Expr::Call2& n) const {
      const double a = eval(*n.a, x);
      const double b = eval(*n.b, x);
      return n.fn == BinaryFn::min ? std::fmin(a, b) : std::fmax(a, b);
    }
  };
  return std::visit(Visitor{x}, e.node);
}

namespace {

// Precedence levels used by the renderer; atoms and calls are self-delimiting.
constexpr int kPrecAddSub = 1;
constexpr int kPrecMulDiv = 2;
constexpr int kPrecNeg = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

int precedence(const Expr& e) {
  struct Visitor {
    int operator()(const Expr::Literal&) const { return kPrecAtom; }
    int operator()(const Expr::Variable&) const { return kPrecAtom; }
    int operator()(const Expr::Unary& n) const {
      return n.fn == UnaryFn::neg ? kPrecNeg : kPrecAtom;
    }
    int operator()(const Expr::Binary& n) const {
      switch (n.op) {
        case BinaryOp::add:
        case BinaryOp::sub: return kPrecAddSub;
        case BinaryOp::mul:
        case BinaryOp::div: return kPrecMulDiv;
        case BinaryOp::pow: return kPrecPow;
      }
      return kPrecAtom;
    }
    int operator()(const Expr::Call2&) const { return kPrecAtom; }
  };
  return std::visit(Visitor{}, e.node);
}

void render_to(const Expr& e, std::string_view variable, std::string& out);

void render_child(const Expr& child, int min_prec, std::string_view variable, std::string& out) {
  if (precedence(child) < min_prec) {
    out += '(';
    render_to(child, variable, out);
    out += ')';
  } else {
    render_to(child, variable, out);
  }
}

void render_number(double v, std::string& out) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

void render_to(const Expr& e, std::string_view variable, std::string& out) {
  struct Visitor {
    std::string_view variable;
    std::string& out;
    void operator()(const Expr::Literal& n) const { render_number(n.value, out); }
    void operator()(const Expr::Variable&) const { out += variable; }
    void operator()(const Expr::Unary& n) const {
      switch (n.fn) {
        case UnaryFn::neg:
          out += '-';
          render_child(*n.arg, kPrecNeg, variable, out);
          return;
        case UnaryFn::exp: out += "exp("; break;
        case UnaryFn::tanh: out += "tanh("; break;
        case UnaryFn::abs: out += "abs("; break;
        case UnaryFn::sgn: out += "sgn("; break;
      }
      render_to(*n.arg, variable, out);
      out += ')';
    }
    void operator()(const Expr::Binary& n) const {
      switch (n.op) {
        case BinaryOp::add:
          render_child(*n.lhs, kPrecAddSub, variable, out);
          out += " + ";
          render_child(*n.rhs, kPrecAddSub + 1, variable, out);
          return;
        case BinaryOp::sub:
          render_child(*n.lhs, kPrecAddSub, variable, out);
          out += " - ";
          render_child(*n.rhs, kPrecAddSub + 1, variable, out);
          return;
        case BinaryOp::mul:
          render_child(*n.lhs, kPrecMulDiv, variable, out);
          out += "*";
          render_child(*n.rhs, kPrecMulDiv + 1, variable, out);
          return;
        case BinaryOp::div:
          render_child(*n.lhs, kPrecMulDiv, variable, out);
          out += "/";
          render_child(*n.rhs, kPrecMulDiv + 1, variable, out);
          return;
        case BinaryOp::pow:
          render_child(*n.lhs, kPrecAtom, variable, out);
          out += "^";
          render_child(*n.rhs, kPrecNeg, variable, out);
          return;
      }
    }
    void operator()(const Expr::Call2& n) const {
      out += (n.fn == BinaryFn::min) ? "min(" : "max(";
      render_to(*n.a, variable, out);
      out += ", ";
      render_to(*n.b, variable, out);
      out += ')';
    }
  };
  std::visit(Visitor{variable, out}, e.node);
}

}  // namespace

std::string render(const Expr& e, std::string_view variable) {
  std::string out;
  render_to(e, variable, out);
  return out;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  struct Visitor {
    const Expr& b;
    bool operator()(const Expr::Literal& n) const {
      return n.value == std::get<Expr::Literal>(b.node).value;
    }
    bool operator()(const Expr::Variable&) const { return true; }
    bool operator()(const Expr::Unary& n) const {
      const auto& o = std::get<Expr::Unary>(b.node);
      return n.fn == o.fn && *n.arg == *o.arg;
    }
    bool operator()(const Expr::Binary& n) const {
      const auto& o = std::get<Expr::Binary>(b.node);
      return n.op == o.op && *n.lhs == *o.lhs && *n.rhs == *o.rhs;
    }
    bool operator()(const Expr::Call2& n) const {
      const auto& o = std::get<Expr::Call2>(b.node);
      return n.fn == o.fn && *n.a == *o.a && *n.b == *o.b;
    }
  };
  return std::visit(Visitor{b}, a.node);
}

}  // namespace pullbound
