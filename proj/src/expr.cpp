#include "expmap/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <vector>

#include "expmap/errors.hpp"

namespace expmap {

namespace detail {

enum class Op {
  kConst,
  kVarX,
  kVarA,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kPow,
  kAbs,
  kMin,
  kMax,
};

struct ExprNode {
  Op op;
  double value = 0.0;  // kConst
  int exponent = 0;    // kPow
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
};

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_const(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kConst;
  n->value = v;
  return n;
}

bool is_const(const NodePtr& n, double v) {
  return n->op == Op::kConst && n->value == v;
}

double ipow(double base, int e) {
  if (e == 0) return 1.0;
  bool inv = e < 0;
  unsigned long long k = inv ? -(long long)e : (long long)e;
  double acc = 1.0, b = base;
  while (k) {
    if (k & 1) acc *= b;
    b *= b;
    k >>= 1;
  }
  return inv ? 1.0 / acc : acc;
}

// Construction with constant folding and the identity folds that keep
// derivative and composition trees from bloating.
NodePtr make_binary(Op op, NodePtr l, NodePtr r) {
  const bool lc = l->op == Op::kConst, rc = r->op == Op::kConst;
  if (lc && rc) {
    switch (op) {
      case Op::kAdd: return make_const(l->value + r->value);
      case Op::kSub: return make_const(l->value - r->value);
      case Op::kMul: return make_const(l->value * r->value);
      case Op::kDiv: return make_const(l->value / r->value);
      case Op::kMin: return make_const(std::fmin(l->value, r->value));
      case Op::kMax: return make_const(std::fmax(l->value, r->value));
      default: break;
    }
  }
  switch (op) {
    case Op::kAdd:
      if (is_const(l, 0.0)) return r;
      if (is_const(r, 0.0)) return l;
      break;
    case Op::kSub:
      if (is_const(r, 0.0)) return l;
      break;
    case Op::kMul:
      if (is_const(l, 1.0)) return r;
      if (is_const(r, 1.0)) return l;
      if (is_const(l, 0.0) || is_const(r, 0.0)) return make_const(0.0);
      break;
    case Op::kDiv:
      if (is_const(r, 1.0)) return l;
      break;
    default:
      break;
  }
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

NodePtr make_neg(NodePtr e) {
  if (e->op == Op::kConst) return make_const(-e->value);
  if (e->op == Op::kNeg) return e->lhs;
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kNeg;
  n->lhs = std::move(e);
  return n;
}

NodePtr make_pow(NodePtr base, int exponent) {
  if (exponent == 1) return base;
  if (exponent == 0) return make_const(1.0);
  if (base->op == Op::kConst) return make_const(ipow(base->value, exponent));
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kPow;
  n->exponent = exponent;
  n->lhs = std::move(base);
  return n;
}

NodePtr make_abs(NodePtr e) {
  if (e->op == Op::kConst) return make_const(std::fabs(e->value));
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kAbs;
  n->lhs = std::move(e);
  return n;
}

// --- generic evaluation over a scalar-like type -----------------------------

inline double sv(double x) { return x; }
inline double sv(const Dual& x) { return x.v; }
inline double sv(const Dual2& x) { return x.v; }

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
inline Dual operator/(Dual a, Dual b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

inline Dual2 operator+(Dual2 a, Dual2 b) {
  return {a.v + b.v, a.d + b.d, a.dd + b.dd};
}
inline Dual2 operator-(Dual2 a, Dual2 b) {
  return {a.v - b.v, a.d - b.d, a.dd - b.dd};
}
inline Dual2 operator-(Dual2 a) { return {-a.v, -a.d, -a.dd}; }
inline Dual2 operator*(Dual2 a, Dual2 b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d,
          a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd};
}
inline Dual2 operator/(Dual2 a, Dual2 b) {
  const double v = a.v / b.v;
  const double d = (a.d - v * b.d) / b.v;
  const double dd = (a.dd - 2.0 * d * b.d - v * b.dd) / b.v;
  return {v, d, dd};
}

template <class T>
T generic_pow(const T& base, int e) {
  if (e == 0) return T{} + T{1.0};  // never reached: folded at construction
  bool inv = e < 0;
  unsigned long long k = inv ? -(long long)e : (long long)e;
  T acc = base;
  --k;
  T b = base;
  while (k) {
    if (k & 1) acc = acc * b;
    b = b * b;
    k >>= 1;
  }
  if (inv) {
    T one{};
    one = one + T{1.0};
    return one / acc;
  }
  return acc;
}

template <>
double generic_pow<double>(const double& base, int e) {
  return ipow(base, e);
}

inline double generic_abs(double x) { return std::fabs(x); }
inline Dual generic_abs(Dual x) {
  return x.v < 0 ? Dual{-x.v, -x.d} : Dual{x.v, x.d};
}
inline Dual2 generic_abs(Dual2 x) {
  return x.v < 0 ? Dual2{-x.v, -x.d, -x.dd} : x;
}

template <class T>
T generic_min(const T& a, const T& b) {
  return sv(a) <= sv(b) ? a : b;
}
template <class T>
T generic_max(const T& a, const T& b) {
  return sv(a) >= sv(b) ? a : b;
}

template <class T>
T lift(double c) {
  T t{};
  t = t + T{c};
  return t;
}
template <>
double lift<double>(double c) { return c; }

template <class T>
T eval_node(const ExprNode* n, const T& x, const T& a) {
  switch (n->op) {
    case Op::kConst: return lift<T>(n->value);
    case Op::kVarX: return x;
    case Op::kVarA: return a;
    case Op::kAdd: return eval_node(n->lhs.get(), x, a) + eval_node(n->rhs.get(), x, a);
    case Op::kSub: return eval_node(n->lhs.get(), x, a) - eval_node(n->rhs.get(), x, a);
    case Op::kMul: return eval_node(n->lhs.get(), x, a) * eval_node(n->rhs.get(), x, a);
    case Op::kDiv: return eval_node(n->lhs.get(), x, a) / eval_node(n->rhs.get(), x, a);
    case Op::kNeg: return -eval_node(n->lhs.get(), x, a);
    case Op::kPow: return generic_pow(eval_node(n->lhs.get(), x, a), n->exponent);
    case Op::kAbs: return generic_abs(eval_node(n->lhs.get(), x, a));
    case Op::kMin:
      return generic_min(eval_node(n->lhs.get(), x, a), eval_node(n->rhs.get(), x, a));
    case Op::kMax:
      return generic_max(eval_node(n->lhs.get(), x, a), eval_node(n->rhs.get(), x, a));
  }
  return lift<T>(0.0);
}

bool depends_on(const ExprNode* n, Op var) {
  switch (n->op) {
    case Op::kConst: return false;
    case Op::kVarX: return var == Op::kVarX;
    case Op::kVarA: return var == Op::kVarA;
    default:
      if (n->lhs && depends_on(n->lhs.get(), var)) return true;
      if (n->rhs && depends_on(n->rhs.get(), var)) return true;
      return false;
  }
}

// Structural linearity in x: degree <= 1 and no x inside abs/min/max,
// divisions by x, or powers of x.
bool linear_in_x(const ExprNode* n) {
  switch (n->op) {
    case Op::kConst:
    case Op::kVarA:
    case Op::kVarX:
      return true;
    case Op::kAdd:
    case Op::kSub:
      return linear_in_x(n->lhs.get()) && linear_in_x(n->rhs.get());
    case Op::kNeg:
      return linear_in_x(n->lhs.get());
    case Op::kMul: {
      const bool lx = depends_on(n->lhs.get(), Op::kVarX);
      const bool rx = depends_on(n->rhs.get(), Op::kVarX);
      if (lx && rx) return false;
      if (lx) return linear_in_x(n->lhs.get());
      if (rx) return linear_in_x(n->rhs.get());
      return true;
    }
    case Op::kDiv:
      if (depends_on(n->rhs.get(), Op::kVarX)) return false;
      return linear_in_x(n->lhs.get());
    case Op::kPow:
      return !depends_on(n->lhs.get(), Op::kVarX);
    case Op::kAbs:
    case Op::kMin:
    case Op::kMax:
      return !depends_on(n, Op::kVarX);
  }
  return false;
}

NodePtr subst(const NodePtr& n, Op var, const NodePtr& replacement) {
  switch (n->op) {
    case Op::kConst: return n;
    case Op::kVarX: return var == Op::kVarX ? replacement : n;
    case Op::kVarA: return var == Op::kVarA ? replacement : n;
    case Op::kNeg: return make_neg(subst(n->lhs, var, replacement));
    case Op::kPow: return make_pow(subst(n->lhs, var, replacement), n->exponent);
    case Op::kAbs: return make_abs(subst(n->lhs, var, replacement));
    default:
      return make_binary(n->op, subst(n->lhs, var, replacement),
                         subst(n->rhs, var, replacement));
  }
}

bool same(const ExprNode* a, const ExprNode* b) {
  if (a == b) return true;
  if (a->op != b->op) return false;
  switch (a->op) {
    case Op::kConst:
      // bit-level comparison, so 0.0 and -0.0 stay distinguishable
      return a->value == b->value &&
             std::signbit(a->value) == std::signbit(b->value);
    case Op::kVarX:
    case Op::kVarA:
      return true;
    case Op::kPow:
      return a->exponent == b->exponent && same(a->lhs.get(), b->lhs.get());
    case Op::kNeg:
    case Op::kAbs:
      return same(a->lhs.get(), b->lhs.get());
    default:
      return same(a->lhs.get(), b->lhs.get()) && same(a->rhs.get(), b->rhs.get());
  }
}

std::string number_to_string(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void print(const ExprNode* n, std::string& out) {
  switch (n->op) {
    case Op::kConst:
      out += number_to_string(n->value);
      return;
    case Op::kVarX: out += 'x'; return;
    case Op::kVarA: out += 'a'; return;
    case Op::kNeg:
      out += "(-";
      print(n->lhs.get(), out);
      out += ')';
      return;
    case Op::kPow:
      out += '(';
      print(n->lhs.get(), out);
      out += '^';
      out += std::to_string(n->exponent);
      out += ')';
      return;
    case Op::kAbs:
      out += "abs(";
      print(n->lhs.get(), out);
      out += ')';
      return;
    case Op::kMin:
    case Op::kMax:
      out += n->op == Op::kMin ? "min(" : "max(";
      print(n->lhs.get(), out);
      out += ", ";
      print(n->rhs.get(), out);
      out += ')';
      return;
    default: {
      out += '(';
      print(n->lhs.get(), out);
      switch (n->op) {
        case Op::kAdd: out += " + "; break;
        case Op::kSub: out += " - "; break;
        case Op::kMul: out += " * "; break;
        case Op::kDiv: out += " / "; break;
        default: break;
      }
      print(n->rhs.get(), out);
      out += ')';
      return;
    }
  }
}

// --- parser ------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr run() {
    auto e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    int line = 1, col = 1;
    for (size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(msg, line, col);
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        lhs = make_binary(Op::kAdd, lhs, parse_term());
      } else if (eat('-')) {
        lhs = make_binary(Op::kSub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    auto lhs = parse_unary();
    for (;;) {
      if (eat('*')) {
        lhs = make_binary(Op::kMul, lhs, parse_unary());
      } else if (eat('/')) {
        lhs = make_binary(Op::kDiv, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (eat('-')) return make_neg(parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    auto base = parse_primary();
    if (eat('^')) return make_pow(base, parse_int());
    return base;
  }

  int parse_int() {
    skip_ws();
    size_t start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
    while (pos_ < text_.size() && std::isdigit((unsigned char)text_[pos_])) ++pos_;
    int value = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_ || pos_ == start) {
      pos_ = start;
      fail("expected integer exponent after '^'");
    }
    return value;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit((unsigned char)c) || c == '.') return parse_number();
    if (std::isalpha((unsigned char)c) || c == '_') return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    size_t start = pos_;
    double value = 0.0;
    auto res =
        std::from_chars(text_.data() + start, text_.data() + text_.size(), value);
    if (res.ec != std::errc()) fail("malformed number");
    pos_ = res.ptr - text_.data();
    return make_const(value);
  }

  NodePtr parse_ident() {
    size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum((unsigned char)text_[pos_]) ||
                                   text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x") {
      auto n = std::make_shared<ExprNode>();
      n->op = Op::kVarX;
      return n;
    }
    if (name == "a") {
      auto n = std::make_shared<ExprNode>();
      n->op = Op::kVarA;
      return n;
    }
    if (name == "abs" || name == "min" || name == "max") {
      if (!eat('(')) {
        pos_ = start;
        fail("expected '(' after function name");
      }
      auto first = parse_expr();
      if (name == "abs") {
        if (!eat(')')) fail("expected ')'");
        return make_abs(first);
      }
      if (!eat(',')) fail("expected ',' in min/max");
      auto second = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return make_binary(name == "min" ? Op::kMin : Op::kMax, first, second);
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "' (only x, a, abs, min, max)");
  }

  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace detail

using detail::ExprNode;

Expr::Expr() : node_(detail::make_const(0.0)) {}

Expr Expr::constant(double value) { return Expr(detail::make_const(value)); }

Expr Expr::var_x() {
  auto n = std::make_shared<ExprNode>();
  n->op = detail::Op::kVarX;
  return Expr(std::move(n));
}

Expr Expr::var_a() {
  auto n = std::make_shared<ExprNode>();
  n->op = detail::Op::kVarA;
  return Expr(std::move(n));
}

Expr Expr::parse(std::string_view text) {
  return Expr(detail::Parser(text).run());
}

double Expr::eval(double x, double a) const {
  return detail::eval_node<double>(node_.get(), x, a);
}

Dual Expr::eval_dx(double x, double a) const {
  return detail::eval_node<Dual>(node_.get(), Dual{x, 1.0}, Dual{a, 0.0});
}

Dual Expr::eval_da(double x, double a) const {
  return detail::eval_node<Dual>(node_.get(), Dual{x, 0.0}, Dual{a, 1.0});
}

Dual2 Expr::eval_dxx(double x, double a) const {
  return detail::eval_node<Dual2>(node_.get(), Dual2{x, 1.0, 0.0},
                                  Dual2{a, 0.0, 0.0});
}

bool Expr::depends_on_x() const {
  return detail::depends_on(node_.get(), detail::Op::kVarX);
}

bool Expr::depends_on_a() const {
  return detail::depends_on(node_.get(), detail::Op::kVarA);
}

std::optional<std::pair<double, double>> Expr::affine_in_x(double a) const {
  if (!detail::linear_in_x(node_.get())) return std::nullopt;
  const double intercept = eval(0.0, a);
  const double slope = eval_dx(0.0, a).d;
  if (!std::isfinite(intercept) || !std::isfinite(slope)) return std::nullopt;
  return std::make_pair(slope, intercept);
}

Expr Expr::subst_x(const Expr& replacement) const {
  return Expr(detail::subst(node_, detail::Op::kVarX, replacement.node_));
}

Expr Expr::subst_a(const Expr& replacement) const {
  return Expr(detail::subst(node_, detail::Op::kVarA, replacement.node_));
}

std::string Expr::to_string() const {
  std::string out;
  detail::print(node_.get(), out);
  return out;
}

bool Expr::same_tree(const Expr& other) const {
  return detail::same(node_.get(), other.node_.get());
}

Expr operator+(const Expr& l, const Expr& r) {
  return Expr(detail::make_binary(detail::Op::kAdd, l.node_, r.node_));
}
Expr operator-(const Expr& l, const Expr& r) {
  return Expr(detail::make_binary(detail::Op::kSub, l.node_, r.node_));
}
Expr operator*(const Expr& l, const Expr& r) {
  return Expr(detail::make_binary(detail::Op::kMul, l.node_, r.node_));
}
Expr operator/(const Expr& l, const Expr& r) {
  return Expr(detail::make_binary(detail::Op::kDiv, l.node_, r.node_));
}
Expr operator-(const Expr& e) { return Expr(detail::make_neg(e.node_)); }
Expr pow(const Expr& base, int exponent) {
  return Expr(detail::make_pow(base.node_, exponent));
}
Expr abs(const Expr& e) { return Expr(detail::make_abs(e.node_)); }
Expr min(const Expr& l, const Expr& r) {
  return Expr(detail::make_binary(detail::Op::kMin, l.node_, r.node_));
}
Expr max(const Expr& l, const Expr& r) {
  return Expr(detail::make_binary(detail::Op::kMax, l.node_, r.node_));
}

}  // namespace expmap
