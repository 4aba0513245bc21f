#pragma once

#include <optional>
#include <string>
#include <vector>

#include "expmap/expr.hpp"
#include "expmap/interval_set.hpp"
#include "expmap/map.hpp"

namespace expmap {

// Declared family-level bounds, audited on the verification grid:
// lambda <= |d/dx T_a| <= Lambda, |d/da T_a(x)| <= eta, |b_i'(a)| <= zeta,
// T_a' Lipschitz in x with constant `lipschitz`.
struct FamilyBounds {
  double lambda = 0.0;
  double Lambda = 0.0;
  double lipschitz = 0.0;
  double eta = 0.0;
  double zeta = 0.0;
};

// Optional metadata carried by family definition files.
struct FamilyHints {
  std::optional<double> delta;       // large-image half width at depth 1
  std::optional<int> a6_m;           // iterate count for the image check
  std::optional<double> a6_delta;    // delta for the image check
};

// A parametrised family a -> T_a on the reference domain [-1,1], given by
// breakpoint expressions b_i(a), branch expressions f_i(a,x) and a point
// expression X(a). Immutable; construction validates instantiation on a
// verification grid over the parameter interval.
class MapFamily {
 public:
  MapFamily(Interval param_interval, std::vector<Expr> breakpoint_exprs,
            std::vector<Expr> branch_exprs, Expr point, FamilyBounds bounds,
            std::string name = "", int verify_grid = 33,
            FamilyHints hints = {});

  const Interval& param_interval() const { return param_interval_; }
  int branch_count() const { return static_cast<int>(branch_exprs_.size()); }
  const std::vector<Expr>& breakpoint_exprs() const { return breakpoint_exprs_; }
  const std::vector<Expr>& branch_exprs() const { return branch_exprs_; }
  const Expr& point_expr() const { return point_; }
  const FamilyBounds& bounds() const { return bounds_; }
  const std::string& name() const { return name_; }
  const FamilyHints& hints() const { return hints_; }
  int verify_grid() const { return verify_grid_; }

  bool contains_param(double a) const {
    return a >= param_interval_.lo && a <= param_interval_.hi;
  }

  // T_a as a PiecewiseMap (parameter substituted into the expressions).
  // audit=false skips the per-branch derivative audit; ordering and image
  // checks still run. Throws on a outside the parameter interval.
  PiecewiseMap instantiate(double a, bool audit = true) const;

  double point(double a) const { return point_.eval(0.0, a); }
  double point_deriv(double a) const { return point_.eval_da(0.0, a).d; }

  // A clone with a different point expression and/or parameter interval.
  MapFamily with_point(Expr point, std::optional<Interval> interval = {},
                       std::string name = "") const;

 private:
  Interval param_interval_;
  std::vector<Expr> breakpoint_exprs_;
  std::vector<Expr> branch_exprs_;
  Expr point_;
  FamilyBounds bounds_;
  std::string name_;
  int verify_grid_;
  FamilyHints hints_;
};

// xi_j(a) = T_a^j(X(a)). Throws OrbitTruncated when the orbit meets a
// breakpoint before step j.
double xi(const MapFamily& family, double a, int j);

// Forward recursion xi_{k+1}' = dT/da(xi_k) + T'(xi_k) xi_k' with exact
// expression derivatives. Throws NonSmoothPoint when the orbit of X(a)
// passes within tolerance of a breakpoint (a sits at a Q_j boundary).
double xi_deriv(const MapFamily& family, double a, int j);

// Branch itinerary of X(a) for j steps (bytes, 1-based).
std::string point_itinerary(const MapFamily& family, double a, int j);

// Cells of Q_depth: maximal open parameter intervals on which xi_depth is
// smooth, with the itinerary of X(a) attached.
struct ParamCell {
  double left = 0.0;
  double right = 0.0;
  std::string itinerary;
};

struct ParamPartition {
  int depth = 0;
  std::vector<ParamCell> cells;
  std::vector<std::string> warnings;  // merged root clusters etc.
};

ParamPartition param_partition(const MapFamily& family, int depth,
                               int subsamples = 512);

// Ratio report for |xi_j'(a) / (T_a^j)'(X(a))|.
struct Assumption1Report {
  struct PerDepth {
    int j = 0;
    double ratio_min = 0.0;
    double ratio_max = 0.0;
    int samples = 0;
  };
  std::vector<PerDepth> per_depth;
  bool degenerate = false;  // ratios identically ~0 for j >= 1
  bool stabilized = false;  // envelope stops growing over the last depths
  int skipped = 0;          // grid points at Q_j boundaries
};

Assumption1Report check_assumption_1(const MapFamily& family, int j_max,
                                     int grid = 64);

// inf_a |xi_{j0}'(a)|  >=  sup_{a,x} |dT_a/da(x)| / (lambda - 1) + 2 L,
// evaluated on grids with a 1% deflation of the left side and inflation of
// the right side.
struct Assumption2Report {
  int j0 = 0;
  double lhs = 0.0;  // deflated inf |xi_{j0}'|
  double rhs = 0.0;  // inflated sup-term
  double margin = 0.0;
  bool pass = false;
  int skipped = 0;
};

Assumption2Report check_assumption_2(const MapFamily& family, int j0,
                                     int grid = 4096);

// Family with the point function replaced by xi_j, i.e. X~(a) = T_a^j(X(a)),
// composed symbolically along the (constant) itinerary of X on the given
// subinterval (default: the family's whole interval). Throws NonSmoothPoint
// when the itinerary is not constant there.
MapFamily boost_point(const MapFamily& family, int j,
                      std::optional<Interval> subinterval = {});

// Stationary-density bounds per grid parameter (Ulam discretization).
struct DensityBoundsReport {
  struct Row {
    double a = 0.0;
    double min = 0.0;          // over all of [-1,1]
    double max = 0.0;
    double support_min = 0.0;  // over bins carrying mass
    bool converged = true;
    bool pass = false;         // min >= gamma && max <= 1/gamma
  };
  std::vector<Row> rows;
  double gamma = 0.0;
  int bins = 0;
  bool pass = false;  // every row passes
  double min_over_grid = 0.0;
};

DensityBoundsReport check_density_bounds(const MapFamily& family, int grid,
                                         int bins, double gamma);

}  // namespace expmap
