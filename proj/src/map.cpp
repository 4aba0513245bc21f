#include "expmap/map.hpp"

#include <algorithm>
#include <cmath>

#include "expmap/errors.hpp"

namespace expmap {

namespace {

constexpr int kAuditGrid = 1024;  // derivative samples per branch

double clamp_to_domain(double y, double slack) {
  if (y > 1.0) {
    if (y > 1.0 + slack) {
      throw InvalidMap("branch image leaves [-1,1]: value " + std::to_string(y));
    }
    return 1.0;
  }
  if (y < -1.0) {
    if (y < -1.0 - slack) {
      throw InvalidMap("branch image leaves [-1,1]: value " + std::to_string(y));
    }
    return -1.0;
  }
  return y;
}

}  // namespace

PiecewiseMap::PiecewiseMap(std::vector<double> breakpoints,
                           std::vector<Expr> branch_exprs, MapBounds bounds,
                           bool audit, const Tolerances& tol)
    : breakpoints_(std::move(breakpoints)), bounds_(bounds), tol_(tol) {
  if (breakpoints_.size() < 2 || branch_exprs.size() + 1 != breakpoints_.size()) {
    throw InvalidMap("need p+1 breakpoints for p branches");
  }
  if (std::fabs(breakpoints_.front() + 1.0) > 1e-9 ||
      std::fabs(breakpoints_.back() - 1.0) > 1e-9) {
    throw InvalidMap("breakpoints must start at -1 and end at 1");
  }
  breakpoints_.front() = -1.0;
  breakpoints_.back() = 1.0;
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i + 1] - breakpoints_[i] > 2.0 * tol_.breakpoint)) {
      throw InvalidMap("breakpoints collide or are out of order near b_" +
                       std::to_string(i));
    }
  }

  const double image_slack = 1e-9;
  all_affine_ = true;
  branches_.reserve(branch_exprs.size());
  for (std::size_t k = 0; k < branch_exprs.size(); ++k) {
    Branch br;
    br.left = breakpoints_[k];
    br.right = breakpoints_[k + 1];
    br.f = std::move(branch_exprs[k]);
    br.f_left = clamp_to_domain(br.f.eval(br.left, 0.0), image_slack);
    br.f_right = clamp_to_domain(br.f.eval(br.right, 0.0), image_slack);
    br.increasing = br.f_right >= br.f_left;
    br.affine = br.f.affine_in_x(0.0);
    if (!br.affine) all_affine_ = false;

    if (audit) {
      const double lo_bound = bounds_.lambda * (1.0 - 1e-9);
      const double hi_bound = bounds_.Lambda * (1.0 + 1e-9);
      const double lip_bound = bounds_.lipschitz * (1.0 + 1e-9) + 1e-9;
      for (int i = 0; i <= kAuditGrid; ++i) {
        const double x = br.left + (br.right - br.left) * i / kAuditGrid;
        const Dual2 d = br.f.eval_dxx(x, 0.0);
        if (!std::isfinite(d.v) || !std::isfinite(d.d)) {
          throw InvalidMap("branch " + std::to_string(k) +
                           " does not evaluate on its cell");
        }
        if (std::fabs(d.d) < lo_bound || std::fabs(d.d) > hi_bound) {
          throw InvalidMap("branch " + std::to_string(k) +
                           " violates derivative bounds at x = " +
                           std::to_string(x) + " (|f'| = " +
                           std::to_string(std::fabs(d.d)) + ")");
        }
        if ((d.d > 0.0) != br.increasing) {
          throw InvalidMap("branch " + std::to_string(k) +
                           " is not monotone on its cell");
        }
        if (std::fabs(d.dd) > lip_bound) {
          throw InvalidMap("branch " + std::to_string(k) +
                           " violates the declared Lipschitz constant of T' "
                           "(|f''| = " + std::to_string(std::fabs(d.dd)) + ")");
        }
        clamp_to_domain(d.v, image_slack);
      }
    }
    branches_.push_back(std::move(br));
  }
}

int PiecewiseMap::locate(double x) const {
  if (x <= -1.0 || x >= 1.0) {
    throw BreakpointHit(x, x <= -1.0 ? -1.0 : 1.0);
  }
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  int k = static_cast<int>(it - breakpoints_.begin()) - 1;
  k = std::clamp(k, 0, branch_count() - 1);
  const double d_left = x - breakpoints_[k];
  const double d_right = breakpoints_[k + 1] - x;
  if (d_left < tol_.breakpoint) throw BreakpointHit(x, breakpoints_[k]);
  if (d_right < tol_.breakpoint) throw BreakpointHit(x, breakpoints_[k + 1]);
  return k;
}

int PiecewiseMap::locate_closed(double y) const {
  y = std::clamp(y, -1.0, 1.0);
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), y);
  int k = static_cast<int>(it - breakpoints_.begin()) - 1;
  return std::clamp(k, 0, branch_count() - 1);
}

double PiecewiseMap::eval(double x) const { return branch_eval(locate(x), x); }

double PiecewiseMap::deriv(double x) const { return branch_deriv(locate(x), x); }

double PiecewiseMap::branch_eval(int k, double x) const {
  const Branch& br = branches_[k];
  if (br.affine) return br.affine->first * x + br.affine->second;
  return br.f.eval(x, 0.0);
}

double PiecewiseMap::branch_deriv(int k, double x) const {
  const Branch& br = branches_[k];
  if (br.affine) return br.affine->first;
  return br.f.eval_dx(x, 0.0).d;
}

double PiecewiseMap::invert_in_branch(int k, double y) const {
  const Branch& br = branches_[k];
  if (br.affine) {
    return (y - br.affine->second) / br.affine->first;
  }
  double lo = br.left, hi = br.right;
  double flo = br.f_left - y;
  double fhi = br.f_right - y;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw RootSolveFailure("inverse target outside branch image (y = " +
                           std::to_string(y) + ", branch " + std::to_string(k) +
                           ")");
  }
  while (hi - lo > tol_.bisect_width) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = br.f.eval(mid, 0.0) - y;
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 2; ++i) {
    const Dual d = br.f.eval_dx(x, 0.0);
    if (d.d == 0.0) break;
    const double next = x - (d.v - y) / d.d;
    if (next >= br.left && next <= br.right) x = next;
  }
  return x;
}

Orbit iterate(const PiecewiseMap& map, double x0, int n) {
  Orbit orbit;
  orbit.points.reserve(static_cast<std::size_t>(n) + 1);
  orbit.points.push_back(x0);
  for (int step = 0; step < n; ++step) {
    int k;
    try {
      k = map.locate(orbit.points.back());
    } catch (const BreakpointHit&) {
      orbit.truncated_at = static_cast<int>(orbit.points.size()) - 1;
      return orbit;
    }
    orbit.points.push_back(map.branch_eval(k, orbit.points.back()));
  }
  return orbit;
}

Partition branch_partition(const PiecewiseMap& map) {
  Partition part;
  part.depth = 1;
  part.cells.reserve(map.branch_count());
  for (int k = 0; k < map.branch_count(); ++k) {
    const Branch& br = map.branch(k);
    PartitionCell cell;
    cell.left = br.left;
    cell.right = br.right;
    cell.img_left = br.f_left;
    cell.img_right = br.f_right;
    cell.word.push_back(static_cast<char>(k + 1));
    part.cells.push_back(std::move(cell));
  }
  return part;
}

double word_eval(const PiecewiseMap& map, const std::string& word, double x) {
  double y = x;
  for (char c : word) y = map.branch_eval(static_cast<int>(c) - 1, y);
  return y;
}

double word_deriv(const PiecewiseMap& map, const std::string& word, double x) {
  double y = x;
  double d = 1.0;
  for (char c : word) {
    const int k = static_cast<int>(c) - 1;
    d *= map.branch_deriv(k, y);
    y = map.branch_eval(k, y);
  }
  return d;
}

namespace {

// Preimage of `target` under T^j restricted to (cell.left, cell.right),
// where T^j follows cell.word. The bracket is guaranteed because target
// lies strictly between the cell's image endpoint values.
double pull_back(const PiecewiseMap& map, const PartitionCell& cell,
                 double target) {
  double lo = cell.left, hi = cell.right;
  double flo = cell.img_left - target;
  const double fhi = cell.img_right - target;
  if ((flo < 0.0) == (fhi < 0.0)) {
    throw RootSolveFailure("lost bracket while refining a partition cell");
  }
  if (map.all_affine()) {
    // exact composition of affine branches
    double slope = 1.0, intercept = 0.0;
    for (char c : cell.word) {
      const auto& aff = *map.branch(static_cast<int>(c) - 1).affine;
      slope *= aff.first;
      intercept = aff.first * intercept + aff.second;
    }
    // word(x) = slope * (x - cell.left) + img_left, solved directly
    const double x = cell.left + (target - cell.img_left) / slope;
    return std::clamp(x, cell.left, cell.right);
  }
  const double width = map.tol().bisect_width;
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = word_eval(map, cell.word, mid) - target;
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 2; ++i) {
    const double d = word_deriv(map, cell.word, x);
    if (d == 0.0) break;
    const double next = x - (word_eval(map, cell.word, x) - target) / d;
    if (next >= cell.left && next <= cell.right) x = next;
  }
  return x;
}

}  // namespace

Partition refine_partition(const PiecewiseMap& map, int depth,
                           std::size_t max_cells) {
  if (depth < 1) throw Error("partition depth must be >= 1");
  const double log_cells =
      depth * std::log2(std::max(2.0, map.bounds().Lambda));
  if (log_cells > 60.0) {
    throw CellCountExceeded("depth " + std::to_string(depth) +
                            " exceeds the 2^60 cell guard");
  }

  const auto& bps = map.breakpoints();
  const double tol = map.tol().breakpoint;
  Partition part = branch_partition(map);
  for (int level = 1; level < depth; ++level) {
    Partition next;
    next.depth = level + 1;
    next.cells.reserve(part.cells.size() * 2);
    for (const PartitionCell& cell : part.cells) {
      const double lo = cell.img_lo(), hi = cell.img_hi();
      // interior breakpoints strictly inside the image
      std::vector<double> targets;
      for (std::size_t i = 1; i + 1 < bps.size(); ++i) {
        if (bps[i] > lo + tol && bps[i] < hi - tol) targets.push_back(bps[i]);
      }
      if (targets.empty()) {
        PartitionCell child = cell;
        const int k = map.locate_closed(0.5 * (lo + hi));
        child.img_left = map.branch_eval(k, cell.img_left);
        child.img_right = map.branch_eval(k, cell.img_right);
        child.word.push_back(static_cast<char>(k + 1));
        next.cells.push_back(std::move(child));
      } else {
        const bool inc = cell.img_right >= cell.img_left;
        if (!inc) std::reverse(targets.begin(), targets.end());
        std::vector<double> cuts;       // interior cut points in x
        std::vector<double> cut_values; // exact image values at the cuts
        cuts.reserve(targets.size());
        for (double b : targets) {
          cuts.push_back(pull_back(map, cell, b));
          cut_values.push_back(b);
        }
        double x_lo = cell.left;
        double v_lo = cell.img_left;
        for (std::size_t i = 0; i <= cuts.size(); ++i) {
          const double x_hi = i < cuts.size() ? cuts[i] : cell.right;
          const double v_hi = i < cuts.size() ? cut_values[i] : cell.img_right;
          if (x_hi - x_lo > tol) {
            PartitionCell child;
            child.left = x_lo;
            child.right = x_hi;
            child.word = cell.word;
            const int k = map.locate_closed(0.5 * (v_lo + v_hi));
            child.word.push_back(static_cast<char>(k + 1));
            child.img_left = map.branch_eval(k, v_lo);
            child.img_right = map.branch_eval(k, v_hi);
            next.cells.push_back(std::move(child));
          }
          x_lo = x_hi;
          v_lo = v_hi;
        }
      }
      if (next.cells.size() > max_cells) {
        throw CellCountExceeded("refinement exceeded the cell budget of " +
                                std::to_string(max_cells));
      }
    }
    part = std::move(next);
  }
  return part;
}

PiecewiseMap conjugate_to_reference(const std::vector<double>& breakpoints,
                                    const std::vector<Expr>& branch_exprs,
                                    double u, double v, MapBounds bounds,
                                    bool audit) {
  if (!(u < v)) throw Error("conjugation needs u < v");
  if (u == -1.0 && v == 1.0) {
    return PiecewiseMap(breakpoints, branch_exprs, bounds, audit);
  }
  const double scale = 2.0 / (v - u);
  // h(x) = scale * (x - u) - 1, h^{-1}(y) = u + (y + 1) / scale
  const Expr hinv =
      Expr::constant(u) + (Expr::var_x() + 1.0) * Expr::constant(1.0 / scale);
  std::vector<double> new_bps;
  new_bps.reserve(breakpoints.size());
  for (double b : breakpoints) new_bps.push_back(scale * (b - u) - 1.0);
  std::vector<Expr> new_exprs;
  new_exprs.reserve(branch_exprs.size());
  for (const Expr& f : branch_exprs) {
    new_exprs.push_back((f.subst_x(hinv) - u) * scale - 1.0);
  }
  bounds.lipschitz = bounds.lipschitz / scale;
  return PiecewiseMap(std::move(new_bps), std::move(new_exprs), bounds, audit);
}

std::string word_display(const std::string& word) {
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(static_cast<int>(word[i]));
  }
  return out;
}

std::vector<std::pair<double, double>> sample_branch_graph(
    const PiecewiseMap& map, int k, int points) {
  std::vector<std::pair<double, double>> samples;
  const Branch& br = map.branch(k);
  samples.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double x = br.left + (br.right - br.left) * i / (points - 1);
    samples.emplace_back(x, map.branch_eval(k, x));
  }
  return samples;
}

}  // namespace expmap
