#pragma once

#include <optional>
#include <string>
#include <vector>

#include "expmap/expr.hpp"
#include "expmap/interval_set.hpp"
#include "expmap/tolerances.hpp"

namespace expmap {

// Declared derivative bounds of a map: lambda <= |T'| <= Lambda on every
// branch, T' Lipschitz with constant `lipschitz` on each closed cell. The
// constructor audits these on a per-branch grid.
struct MapBounds {
  double lambda = 0.0;
  double Lambda = 0.0;
  double lipschitz = 0.0;
};

// One monotone branch of a piecewise map, restricted to the open cell
// (left, right) but continuously extended to its closure.
struct Branch {
  double left = 0.0;
  double right = 0.0;
  Expr f;
  bool increasing = true;
  double f_left = 0.0;   // value of the continuous extension at `left`
  double f_right = 0.0;  // value at `right`
  // set when f is structurally affine in x: (slope, intercept)
  std::optional<std::pair<double, double>> affine;

  double image_lo() const { return increasing ? f_left : f_right; }
  double image_hi() const { return increasing ? f_right : f_left; }
  Interval image() const { return {image_lo(), image_hi()}; }
};

// Piecewise expanding map of [-1,1]. Branch expressions are in x only
// (any parameter has been substituted before construction). Immutable
// after construction; all member functions are const and thread-safe.
class PiecewiseMap {
 public:
  // Throws InvalidMap when breakpoints are unordered, a branch fails the
  // declared bounds on the audit grid, a branch is not monotone, or an
  // image leaves [-1,1]. With audit=false only breakpoint ordering and
  // branch images are checked.
  PiecewiseMap(std::vector<double> breakpoints, std::vector<Expr> branch_exprs,
               MapBounds bounds, bool audit = true,
               const Tolerances& tol = Tolerances::global());

  int branch_count() const { return static_cast<int>(branches_.size()); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const Branch& branch(int k) const { return branches_[k]; }
  const std::vector<Branch>& branches() const { return branches_; }
  const MapBounds& bounds() const { return bounds_; }
  const Tolerances& tol() const { return tol_; }
  bool all_affine() const { return all_affine_; }

  // 0-based branch index of the cell containing x; throws BreakpointHit
  // when |x - b_i| < tol.breakpoint and on x outside (-1,1).
  int locate(double x) const;

  // Branch index by upper_bound only, no breakpoint tolerance; y is
  // clamped into [-1,1] first. For interior geometry work, not orbits.
  int locate_closed(double y) const;

  double eval(double x) const;        // T(x); throws BreakpointHit
  double deriv(double x) const;       // T'(x); throws BreakpointHit
  double branch_eval(int k, double x) const;   // closed-cell extension
  double branch_deriv(int k, double x) const;

  // Monotone inverse of branch k on its closed cell. Bisection to the
  // configured width plus two Newton polish steps; affine branches are
  // inverted in closed form. y must lie in the closed branch image.
  double invert_in_branch(int k, double y) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<Branch> branches_;
  MapBounds bounds_;
  Tolerances tol_;
  bool all_affine_ = false;
};

// Orbit x0, T(x0), ..., up to n steps. If some orbit point lies within the
// breakpoint tolerance the orbit stops there and `truncated_at` holds that
// point's index.
struct Orbit {
  std::vector<double> points;
  std::optional<int> truncated_at;
};

Orbit iterate(const PiecewiseMap& map, double x0, int n);

// Cell of a dynamical partition: the open interval (left, right) together
// with its length-j itinerary word and the endpoint values of T^j on it.
// Words store raw branch indices as bytes, 1-based.
struct PartitionCell {
  double left = 0.0;
  double right = 0.0;
  double img_left = 0.0;   // T^j at left (continuous extension)
  double img_right = 0.0;  // T^j at right
  std::string word;

  double img_lo() const { return std::min(img_left, img_right); }
  double img_hi() const { return std::max(img_left, img_right); }
  double length() const { return right - left; }
};

struct Partition {
  int depth = 0;
  std::vector<PartitionCell> cells;
};

// The partition into maximal open intervals of continuity: one cell per
// branch, words of length 1.
Partition branch_partition(const PiecewiseMap& map);

// Partition of T^depth, built by pulling breakpoints back through the
// branch words with bracketed monotone solves. Throws CellCountExceeded
// when p^depth passes the guard or the cell budget is hit.
Partition refine_partition(const PiecewiseMap& map, int depth,
                           std::size_t max_cells = Tolerances::global().max_cells);

// T^{|word|}(x) along a fixed branch word (closed-cell extensions).
double word_eval(const PiecewiseMap& map, const std::string& word, double x);
// Derivative of the same composition at x.
double word_deriv(const PiecewiseMap& map, const std::string& word, double x);

// Affine change of variables from [u,v] onto the reference domain [-1,1].
// Breakpoints are numeric, branch expressions in x; derivative bounds are
// unchanged, the Lipschitz constant rescales by (v-u)/2.
PiecewiseMap conjugate_to_reference(const std::vector<double>& breakpoints,
                                    const std::vector<Expr>& branch_exprs,
                                    double u, double v, MapBounds bounds,
                                    bool audit = true);

// "1 2 1" style rendering of a word.
std::string word_display(const std::string& word);

// Equally spaced graph samples of one branch, endpoints included.
std::vector<std::pair<double, double>> sample_branch_graph(
    const PiecewiseMap& map, int k, int points);

}  // namespace expmap
