#include "expmap/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "expmap/density.hpp"
#include "expmap/errors.hpp"
#include "expmap/parallel.hpp"

namespace expmap {

MapFamily::MapFamily(Interval param_interval, std::vector<Expr> breakpoint_exprs,
                     std::vector<Expr> branch_exprs, Expr point,
                     FamilyBounds bounds, std::string name, int verify_grid,
                     FamilyHints hints)
    : param_interval_(param_interval),
      breakpoint_exprs_(std::move(breakpoint_exprs)),
      branch_exprs_(std::move(branch_exprs)),
      point_(std::move(point)),
      bounds_(bounds),
      name_(std::move(name)),
      verify_grid_(std::max(2, verify_grid)),
      hints_(hints) {
  if (param_interval_.empty()) throw SemanticError("empty parameter interval");
  if (breakpoint_exprs_.size() != branch_exprs_.size() + 1) {
    throw SemanticError("need p+1 breakpoint expressions for p branches");
  }
  if (!(bounds_.lambda > 1.0)) {
    throw SemanticError("expansion bound lambda must exceed 1");
  }

  // Audit on the verification grid: instantiation must give a valid map,
  // X(a) must stay inside [-1,1], and the eta/zeta declarations must hold.
  const int n = verify_grid_;
  for (int i = 0; i < n; ++i) {
    const double a =
        param_interval_.lo + (param_interval_.hi - param_interval_.lo) *
                                 (i + 0.5) / n;
    PiecewiseMap map = instantiate(a, true);
    const double X = point_.eval(0.0, a);
    if (X < -1.0 - 1e-9 || X > 1.0 + 1e-9) {
      throw InvalidMap("X(a) leaves [-1,1] at a = " + std::to_string(a));
    }
    for (std::size_t b = 0; b < breakpoint_exprs_.size(); ++b) {
      const double slope = breakpoint_exprs_[b].eval(0.0, a);
      (void)slope;
      const double db = breakpoint_exprs_[b].eval_da(0.0, a).d;
      if (std::fabs(db) > bounds_.zeta * (1.0 + 1e-9) + 1e-12) {
        throw InvalidMap("breakpoint " + std::to_string(b) +
                         " moves faster than the declared zeta at a = " +
                         std::to_string(a));
      }
    }
    for (int k = 0; k < map.branch_count(); ++k) {
      const Branch& br = map.branch(k);
      for (int g = 0; g <= 16; ++g) {
        const double x = br.left + (br.right - br.left) * g / 16.0;
        const double da = branch_exprs_[k].eval_da(x, a).d;
        if (std::fabs(da) > bounds_.eta * (1.0 + 1e-9) + 1e-12) {
          throw InvalidMap("branch " + std::to_string(k) +
                           " exceeds the declared eta at a = " +
                           std::to_string(a));
        }
      }
    }
  }
}

PiecewiseMap MapFamily::instantiate(double a, bool audit) const {
  if (!contains_param(a)) {
    throw Error("parameter " + std::to_string(a) +
                " outside the family interval [" +
                std::to_string(param_interval_.lo) + ", " +
                std::to_string(param_interval_.hi) + "]");
  }
  std::vector<double> bps;
  bps.reserve(breakpoint_exprs_.size());
  for (const Expr& e : breakpoint_exprs_) bps.push_back(e.eval(0.0, a));
  const Expr a_const = Expr::constant(a);
  std::vector<Expr> exprs;
  exprs.reserve(branch_exprs_.size());
  for (const Expr& e : branch_exprs_) exprs.push_back(e.subst_a(a_const));
  return PiecewiseMap(std::move(bps), std::move(exprs),
                      MapBounds{bounds_.lambda, bounds_.Lambda, bounds_.lipschitz},
                      audit);
}

MapFamily MapFamily::with_point(Expr point, std::optional<Interval> interval,
                                std::string name) const {
  return MapFamily(interval.value_or(param_interval_), breakpoint_exprs_,
                   branch_exprs_, std::move(point), bounds_,
                   name.empty() ? name_ : std::move(name), verify_grid_, hints_);
}

double xi(const MapFamily& family, double a, int j) {
  const PiecewiseMap map = family.instantiate(a, false);
  double x = family.point(a);
  for (int step = 0; step < j; ++step) {
    int k;
    try {
      k = map.locate(x);
    } catch (const BreakpointHit&) {
      throw OrbitTruncated(step);
    }
    x = map.branch_eval(k, x);
  }
  return x;
}

double xi_deriv(const MapFamily& family, double a, int j) {
  const PiecewiseMap map = family.instantiate(a, false);
  double x = family.point(a);
  double d = family.point_deriv(a);
  for (int step = 0; step < j; ++step) {
    int k;
    try {
      k = map.locate(x);
    } catch (const BreakpointHit&) {
      throw NonSmoothPoint("xi_" + std::to_string(j) +
                           " is not smooth at a = " + std::to_string(a) +
                           " (orbit meets a breakpoint at step " +
                           std::to_string(step) + ")");
    }
    const Expr& f = family.branch_exprs()[k];
    const double dx = f.eval_dx(x, a).d;
    const double da = f.eval_da(x, a).d;
    d = da + dx * d;
    x = map.branch_eval(k, x);
  }
  return d;
}

std::string point_itinerary(const MapFamily& family, double a, int j) {
  const PiecewiseMap map = family.instantiate(a, false);
  double x = family.point(a);
  std::string word;
  word.reserve(j);
  for (int step = 0; step < j; ++step) {
    int k;
    try {
      k = map.locate(x);
    } catch (const BreakpointHit&) {
      throw OrbitTruncated(step);
    }
    word.push_back(static_cast<char>(k + 1));
    x = map.branch_eval(k, x);
  }
  return word;
}

namespace {

// xi_i(a) - b_k(a) per sample, used to find the Q-partition splits by
// sign-change bracketing; NaN marks samples whose orbit truncated early.
double xi_minus_breakpoint(const MapFamily& family, double a, int i, int k) {
  try {
    const double v = xi(family, a, i);
    return v - family.breakpoint_exprs()[k].eval(0.0, a);
  } catch (const OrbitTruncated&) {
    return std::numeric_limits<double>::quiet_NaN();
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

double bisect_param(const MapFamily& family, int i, int k, double lo, double hi,
                    double flo) {
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = xi_minus_breakpoint(family, mid, i, k);
    if (std::isnan(fm)) break;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ParamPartition param_partition(const MapFamily& family, int depth,
                               int subsamples) {
  ParamPartition result;
  result.depth = depth;
  const double tol = 1e-9;
  std::vector<Interval> cells = {family.param_interval()};
  for (int i = 0; i < depth; ++i) {
    std::vector<Interval> next;
    for (const Interval& cell : cells) {
      std::vector<double> roots;
      const int p = static_cast<int>(family.breakpoint_exprs().size());
      for (int k = 0; k < p; ++k) {
        double prev_a = 0.0, prev_f = std::numeric_limits<double>::quiet_NaN();
        for (int s = 0; s <= subsamples; ++s) {
          const double a = cell.lo + (cell.hi - cell.lo) * (s + 0.5) /
                                         (subsamples + 1);
          const double f = xi_minus_breakpoint(family, a, i, k);
          if (!std::isnan(prev_f) && !std::isnan(f) &&
              (f < 0.0) != (prev_f < 0.0)) {
            roots.push_back(bisect_param(family, i, k, prev_a, a, prev_f));
          }
          prev_a = a;
          prev_f = f;
        }
      }
      std::sort(roots.begin(), roots.end());
      std::vector<double> kept;
      for (double r : roots) {
        if (!kept.empty() && r - kept.back() < tol) {
          result.warnings.push_back("merged root cluster near a = " +
                                    std::to_string(r) + " (depth " +
                                    std::to_string(i + 1) + ")");
          continue;
        }
        kept.push_back(r);
      }
      double lo = cell.lo;
      for (double r : kept) {
        if (r - lo > tol) next.push_back({lo, r});
        lo = r;
      }
      if (cell.hi - lo > tol) next.push_back({lo, cell.hi});
    }
    cells = std::move(next);
  }
  for (const Interval& cell : cells) {
    ParamCell pc;
    pc.left = cell.lo;
    pc.right = cell.hi;
    try {
      pc.itinerary = point_itinerary(family, 0.5 * (cell.lo + cell.hi), depth);
    } catch (const OrbitTruncated&) {
      result.warnings.push_back("cell midpoint orbit truncated near a = " +
                                std::to_string(0.5 * (cell.lo + cell.hi)));
    }
    result.cells.push_back(std::move(pc));
  }
  return result;
}

Assumption1Report check_assumption_1(const MapFamily& family, int j_max,
                                     int grid) {
  Assumption1Report report;
  report.per_depth.resize(j_max + 1);
  for (int j = 0; j <= j_max; ++j) {
    report.per_depth[j].j = j;
    report.per_depth[j].ratio_min = std::numeric_limits<double>::infinity();
    report.per_depth[j].ratio_max = 0.0;
  }
  const Interval I = family.param_interval();
  for (int g = 0; g < grid; ++g) {
    const double a = I.lo + (I.hi - I.lo) * (g + 0.5) / grid;
    PiecewiseMap map = family.instantiate(a, false);
    double x = family.point(a);
    double d = family.point_deriv(a);
    double denom = 1.0;
    // j = 0: ratio is |X'(a)| by convention (empty derivative product)
    {
      auto& row = report.per_depth[0];
      const double r = std::fabs(d);
      row.ratio_min = std::min(row.ratio_min, r);
      row.ratio_max = std::max(row.ratio_max, r);
      ++row.samples;
    }
    bool truncated = false;
    for (int j = 1; j <= j_max; ++j) {
      int k;
      try {
        k = map.locate(x);
      } catch (const BreakpointHit&) {
        truncated = true;
        break;
      }
      const Expr& f = family.branch_exprs()[k];
      const double dx = f.eval_dx(x, a).d;
      const double da = f.eval_da(x, a).d;
      d = da + dx * d;
      denom *= dx;
      x = map.branch_eval(k, x);
      auto& row = report.per_depth[j];
      const double r = std::fabs(d / denom);
      row.ratio_min = std::min(row.ratio_min, r);
      row.ratio_max = std::max(row.ratio_max, r);
      ++row.samples;
    }
    if (truncated) ++report.skipped;
  }
  double overall_max = 0.0;
  for (int j = 1; j <= j_max; ++j) {
    overall_max = std::max(overall_max, report.per_depth[j].ratio_max);
  }
  report.degenerate = overall_max < 1e-14;
  // Envelope e_j = max/min; stabilized when the late envelope does not grow
  // past the early one.
  auto envelope = [&](int j) {
    const auto& row = report.per_depth[j];
    if (row.samples == 0 || row.ratio_min <= 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    return row.ratio_max / row.ratio_min;
  };
  if (report.degenerate) {
    report.stabilized = true;
  } else if (j_max >= 4) {
    const int half = j_max / 2;
    double early = 0.0, late = 0.0;
    for (int j = 1; j <= half; ++j) early = std::max(early, envelope(j));
    for (int j = half + 1; j <= j_max; ++j) late = std::max(late, envelope(j));
    report.stabilized = late <= 1.25 * early;
  } else {
    report.stabilized = true;
  }
  return report;
}

Assumption2Report check_assumption_2(const MapFamily& family, int j0,
                                     int grid) {
  Assumption2Report report;
  report.j0 = j0;
  const Interval I = family.param_interval();
  double inf_xi = std::numeric_limits<double>::infinity();
  double sup_da = 0.0;
  for (int g = 0; g < grid; ++g) {
    const double a = I.lo + (I.hi - I.lo) * (g + 0.5) / grid;
    try {
      inf_xi = std::min(inf_xi, std::fabs(xi_deriv(family, a, j0)));
    } catch (const NonSmoothPoint&) {
      ++report.skipped;
    }
  }
  const int a_grid = std::max(8, grid / 64);
  for (int g = 0; g < a_grid; ++g) {
    const double a = I.lo + (I.hi - I.lo) * (g + 0.5) / a_grid;
    PiecewiseMap map = family.instantiate(a, false);
    for (int k = 0; k < map.branch_count(); ++k) {
      const Branch& br = map.branch(k);
      for (int s = 0; s <= 64; ++s) {
        const double x = br.left + (br.right - br.left) * s / 64.0;
        sup_da = std::max(sup_da,
                          std::fabs(family.branch_exprs()[k].eval_da(x, a).d));
      }
    }
  }
  report.lhs = inf_xi * 0.99;
  report.rhs = (sup_da / (family.bounds().lambda - 1.0) +
                2.0 * family.bounds().lipschitz) *
               1.01;
  report.margin = report.lhs - report.rhs;
  report.pass = report.margin >= 0.0;
  return report;
}

MapFamily boost_point(const MapFamily& family, int j,
                      std::optional<Interval> subinterval) {
  Interval I = subinterval.value_or(family.param_interval());
  if (j == 0) {
    return subinterval ? family.with_point(family.point_expr(), I,
                                           family.name())
                       : family;
  }
  // The itinerary of X must be constant on I for xi_j to be smooth there.
  std::string word;
  const int probes = 17;
  for (int i = 0; i < probes; ++i) {
    const double a = I.lo + (I.hi - I.lo) * (i + 0.5) / probes;
    std::string w;
    try {
      w = point_itinerary(family, a, j);
    } catch (const OrbitTruncated& e) {
      throw NonSmoothPoint("xi_" + std::to_string(j) +
                           " not smooth on the subinterval: orbit truncated at "
                           "a = " + std::to_string(a) + ", step " +
                           std::to_string(e.step));
    }
    if (i == 0) {
      word = w;
    } else if (w != word) {
      throw NonSmoothPoint(
          "itinerary of X changes inside the subinterval; split it along "
          "the parameter partition first");
    }
  }
  Expr boosted = family.point_expr();
  for (char c : word) {
    boosted = family.branch_exprs()[static_cast<int>(c) - 1].subst_x(boosted);
  }
  return family.with_point(std::move(boosted), I,
                           family.name().empty()
                               ? std::string()
                               : family.name() + "+boost" + std::to_string(j));
}

DensityBoundsReport check_density_bounds(const MapFamily& family, int grid,
                                         int bins, double gamma) {
  DensityBoundsReport report;
  report.gamma = gamma;
  report.bins = bins;
  report.rows.resize(grid);
  const Interval I = family.param_interval();
  parallel_for(grid, [&](int g) {
    auto& row = report.rows[g];
    row.a = I.lo + (I.hi - I.lo) * (g + 0.5) / grid;
    try {
      const PiecewiseMap map = family.instantiate(row.a, false);
      const UlamDensity density = stationary_density(ulam_matrix(map, bins));
      const DensityBounds b = density_bounds(density);
      row.min = b.min;
      row.max = b.max;
      row.support_min = b.support_min;
      row.pass = row.min >= gamma && row.max <= 1.0 / gamma;
    } catch (const NonConvergence&) {
      row.converged = false;
      row.pass = false;
    }
  });
  report.pass = true;
  report.min_over_grid = std::numeric_limits<double>::infinity();
  for (const auto& row : report.rows) {
    report.pass = report.pass && row.pass;
    report.min_over_grid = std::min(report.min_over_grid, row.min);
  }
  return report;
}

}  // namespace expmap
