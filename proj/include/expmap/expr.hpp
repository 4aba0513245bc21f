#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace expmap {

namespace detail {
struct ExprNode;
}

// Value together with a directional derivative; used for dual-number
// evaluation of expressions, which stays exact at abs/min/max away from
// their kinks.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};

// Value with first and second directional derivative.
struct Dual2 {
  double v = 0.0;
  double d = 0.0;
  double dd = 0.0;
};

// Immutable arithmetic expression over the variables x and a.
//
// Supported surface: literals, + - * /, unary minus, integer powers, and
// abs/min/max. Construction folds constants and the cheap algebraic
// identities (e+0, 1*e, 0*e, e^1, ...), so structurally equal inputs fold
// to structurally equal trees.
class Expr {
 public:
  Expr();  // the constant 0

  static Expr constant(double value);
  static Expr var_x();
  static Expr var_a();

  // Parses the grammar documented in the README:
  //   expr  := term (('+'|'-') term)*
  //   term  := unary (('*'|'/') unary)*
  //   unary := '-' unary | power
  //   power := primary ['^' integer]
  //   primary := number | 'x' | 'a' | ('abs'|'min'|'max') '(' args ')'
  //            | '(' expr ')'
  // Throws ParseError with a 1-based position on malformed input.
  static Expr parse(std::string_view text);

  double eval(double x, double a) const;
  Dual eval_dx(double x, double a) const;   // value and d/dx
  Dual eval_da(double x, double a) const;   // value and d/da
  Dual2 eval_dxx(double x, double a) const;  // value, d/dx, d2/dx2

  double deriv_x(double x, double a) const { return eval_dx(x, a).d; }
  double deriv_a(double x, double a) const { return eval_da(x, a).d; }

  bool depends_on_x() const;
  bool depends_on_a() const;

  // Slope and intercept when the expression is structurally affine in x
  // (for the given a); nullopt otherwise.
  std::optional<std::pair<double, double>> affine_in_x(double a) const;

  Expr subst_x(const Expr& replacement) const;
  Expr subst_a(const Expr& replacement) const;

  // Fully parenthesized form; parse(to_string()) rebuilds an identical tree.
  std::string to_string() const;

  bool same_tree(const Expr& other) const;

  friend Expr operator+(const Expr& l, const Expr& r);
  friend Expr operator-(const Expr& l, const Expr& r);
  friend Expr operator*(const Expr& l, const Expr& r);
  friend Expr operator/(const Expr& l, const Expr& r);
  friend Expr operator-(const Expr& e);
  friend Expr pow(const Expr& base, int exponent);
  friend Expr abs(const Expr& e);
  friend Expr min(const Expr& l, const Expr& r);
  friend Expr max(const Expr& l, const Expr& r);

 private:
  explicit Expr(std::shared_ptr<const detail::ExprNode> node)
      : node_(std::move(node)) {}
  std::shared_ptr<const detail::ExprNode> node_;
};

inline Expr operator+(const Expr& l, double r) { return l + Expr::constant(r); }
inline Expr operator+(double l, const Expr& r) { return Expr::constant(l) + r; }
inline Expr operator-(const Expr& l, double r) { return l - Expr::constant(r); }
inline Expr operator-(double l, const Expr& r) { return Expr::constant(l) - r; }
inline Expr operator*(const Expr& l, double r) { return l * Expr::constant(r); }
inline Expr operator*(double l, const Expr& r) { return Expr::constant(l) * r; }
inline Expr operator/(const Expr& l, double r) { return l / Expr::constant(r); }
inline Expr operator/(double l, const Expr& r) { return Expr::constant(l) / r; }

}  // namespace expmap
