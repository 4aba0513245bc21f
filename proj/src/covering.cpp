#include "expmap/covering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

#include "expmap/errors.hpp"

namespace expmap {

IntervalUnion map_image(const PiecewiseMap& map, const IntervalUnion& u) {
  std::vector<Interval> images;
  for (const Interval& part : u.parts()) {
    for (int k = 0; k < map.branch_count(); ++k) {
      const Branch& br = map.branch(k);
      const double lo = std::max(part.lo, br.left);
      const double hi = std::min(part.hi, br.right);
      if (hi <= lo) continue;
      const double ya = map.branch_eval(k, lo);
      const double yb = map.branch_eval(k, hi);
      images.push_back({std::min(ya, yb), std::max(ya, yb)});
    }
  }
  return IntervalUnion::of(std::move(images), u.merge_tol());
}

IntervalUnion tilde_image(const PiecewiseMap& map, const IntervalUnion& u) {
  const double slack = map.tol().containment;
  std::vector<Interval> images;
  for (int k = 0; k < map.branch_count(); ++k) {
    const Branch& br = map.branch(k);
    if (u.contains_interval({br.left, br.right}, slack)) {
      images.push_back(br.image());
    }
  }
  return IntervalUnion::of(std::move(images), u.merge_tol());
}

namespace {

bool residual_negligible(const IntervalUnion& leftover, int branch_count,
                         int n, const Tolerances& tol) {
  return leftover.total_length() < tol.residual_total &&
         leftover.component_count() <=
             static_cast<std::size_t>(branch_count) * (n + 1) &&
         leftover.max_component_length() < tol.residual_component;
}

}  // namespace

CoveringResult weakly_covering_N(const PiecewiseMap& map, Interval omega,
                                 int n_max) {
  int cell = -1;
  for (int k = 0; k < map.branch_count(); ++k) {
    const Branch& br = map.branch(k);
    if (std::fabs(br.left - omega.lo) < 1e-9 &&
        std::fabs(br.right - omega.hi) < 1e-9) {
      cell = k;
      break;
    }
  }
  if (cell < 0) throw Error("omega must be a branch cell of the map");
  return weakly_covering_cell(map, cell, n_max);
}

namespace {

// Bitmask of the branch cells fully contained in u; the tilde chain is a
// function of this set alone, so a revisit with unchanged residual means
// the chain is periodic and the accumulated union will never grow again.
std::uint64_t contained_cells_mask(const PiecewiseMap& map,
                                   const IntervalUnion& u) {
  std::uint64_t mask = 0;
  const double slack = map.tol().containment;
  const int p = std::min(map.branch_count(), 64);
  for (int k = 0; k < p; ++k) {
    const Branch& br = map.branch(k);
    if (u.contains_interval({br.left, br.right}, slack)) {
      mask |= std::uint64_t(1) << k;
    }
  }
  return mask;
}

}  // namespace

CoveringResult weakly_covering_cell(const PiecewiseMap& map, int cell_index,
                                    int n_max) {
  const Tolerances& tol = map.tol();
  const Branch& br = map.branch(cell_index);
  IntervalUnion chain(Interval{br.left, br.right}, tol.merge);
  IntervalUnion accumulated = chain;
  std::map<std::uint64_t, double> seen;
  const bool track = map.branch_count() <= 64;
  for (int n = 1; n <= n_max; ++n) {
    chain = tilde_image(map, chain);
    accumulated = accumulated.unite(chain);
    const IntervalUnion leftover = accumulated.complement();
    const double residual = leftover.total_length();
    if (residual_negligible(leftover, map.branch_count(), n, tol)) {
      return {n, residual, leftover.component_count()};
    }
    if (chain.empty()) throw NotCoveringWithin(n_max, residual);
    if (track) {
      const std::uint64_t mask = contained_cells_mask(map, chain);
      auto it = seen.find(mask);
      if (it != seen.end() && residual >= it->second - tol.merge) {
        throw NotCoveringWithin(n_max, residual);
      }
      seen[mask] = residual;
    }
  }
  throw NotCoveringWithin(n_max, accumulated.complement().total_length());
}

Assumption5Report check_assumption_5(const PiecewiseMap& map, int n_max) {
  Assumption5Report report;
  for (int k = 0; k < map.branch_count(); ++k) {
    const CoveringResult res = weakly_covering_cell(map, k, n_max);
    report.cells.push_back({k, res.n, res.residual_length});
    report.max_n = std::max(report.max_n, res.n);
  }
  return report;
}

Assumption6Report check_assumption_6(const MapFamily& family, int m,
                                     double delta, int grid) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error("assumption 6 needs delta in (0,1)");
  }
  Assumption6Report report;
  report.m = m;
  report.delta = delta;
  report.image_margin = std::numeric_limits<double>::infinity();
  report.observed_inf_deriv = std::numeric_limits<double>::infinity();
  const double slack = 1e-12;
  const Interval I = family.param_interval();
  bool images_ok = true;
  for (int g = 0; g < grid; ++g) {
    const double a = I.lo + (I.hi - I.lo) * (g + 0.5) / grid;
    const PiecewiseMap map = family.instantiate(a, false);
    const Partition part = refine_partition(map, m);
    for (const PartitionCell& cell : part.cells) {
      const double margin =
          std::min(cell.img_hi() - delta, -delta - cell.img_lo());
      report.image_margin = std::min(report.image_margin, margin);
      if (margin < -slack) {
        images_ok = false;
        if (report.witnesses.size() < 16) {
          report.witnesses.push_back("a = " + std::to_string(a) + ", word [" +
                                     word_display(cell.word) + "]");
        }
      }
      // inf |(T^m)'| on the cell, sampled
      for (int s = 1; s <= 8; ++s) {
        const double x =
            cell.left + (cell.right - cell.left) * s / 9.0;
        report.observed_inf_deriv = std::min(
            report.observed_inf_deriv, std::fabs(word_deriv(map, cell.word, x)));
      }
    }
  }
  report.images_ok = images_ok;
  report.required_inf_deriv = 1.0 + 1.0 / delta;
  report.deriv_margin = report.observed_inf_deriv - report.required_inf_deriv;
  report.pass = images_ok && report.deriv_margin > 0.0;
  return report;
}

}  // namespace expmap
