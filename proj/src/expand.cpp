#include "expmap/expand.hpp"

#include <algorithm>
#include <cmath>

#include "expmap/errors.hpp"

namespace expmap {

const char* expand_case_name(ExpandCase c) {
  switch (c) {
    case ExpandCase::kInterior: return "interior";
    case ExpandCase::kFull: return "full";
    case ExpandCase::kTouchesLow: return "touches-1";
    case ExpandCase::kTouchesHigh: return "touches+1";
  }
  return "?";
}

ExpandCase classify_branch_image(const Branch& branch, double touch_tol) {
  const bool low = branch.image_lo() <= -1.0 + touch_tol;
  const bool high = branch.image_hi() >= 1.0 - touch_tol;
  if (low && high) return ExpandCase::kFull;
  if (low) return ExpandCase::kTouchesLow;
  if (high) return ExpandCase::kTouchesHigh;
  return ExpandCase::kInterior;
}

namespace {

Expr apply_case(const Expr& f, ExpandCase tag, const Expr& s) {
  switch (tag) {
    case ExpandCase::kInterior:
      return s * f;
    case ExpandCase::kFull:
      return f;
    case ExpandCase::kTouchesLow:
      return ((s + 1.0) / 2.0) * f + (s - 1.0) / 2.0;
    case ExpandCase::kTouchesHigh:
      return ((s + 1.0) / 2.0) * f - (s - 1.0) / 2.0;
  }
  return f;
}

double apply_case_value(double y, ExpandCase tag, double s) {
  switch (tag) {
    case ExpandCase::kInterior: return s * y;
    case ExpandCase::kFull: return y;
    case ExpandCase::kTouchesLow: return 0.5 * (s + 1.0) * y + 0.5 * (s - 1.0);
    case ExpandCase::kTouchesHigh: return 0.5 * (s + 1.0) * y - 0.5 * (s - 1.0);
  }
  return y;
}

}  // namespace

ExpandedBranch expand_branch(const Branch& branch, double s, double touch_tol) {
  if (s < 1.0) throw Error("expansion is only defined for s >= 1");
  const ExpandCase tag = classify_branch_image(branch, touch_tol);
  const double lo = apply_case_value(branch.image_lo(), tag, s);
  const double hi = apply_case_value(branch.image_hi(), tag, s);
  if (lo < -1.0 - 1e-12 || hi > 1.0 + 1e-12) {
    throw ScaleTooLarge("s = " + std::to_string(s) +
                        " pushes the branch image to [" + std::to_string(lo) +
                        ", " + std::to_string(hi) + "]");
  }
  ExpandedBranch out;
  out.tag = tag;
  out.scale = s;
  out.branch = branch;
  out.branch.f = apply_case(branch.f, tag, Expr::constant(s));
  out.branch.f_left = std::clamp(apply_case_value(branch.f_left, tag, s), -1.0, 1.0);
  out.branch.f_right = std::clamp(apply_case_value(branch.f_right, tag, s), -1.0, 1.0);
  out.branch.affine = out.branch.f.affine_in_x(0.0);
  return out;
}

PiecewiseMap expand_map(const PiecewiseMap& map, double s) {
  std::vector<Expr> exprs;
  exprs.reserve(map.branch_count());
  for (int k = 0; k < map.branch_count(); ++k) {
    exprs.push_back(expand_branch(map.branch(k), s, map.tol().touch).branch.f);
  }
  MapBounds bounds = map.bounds();
  bounds.Lambda *= s;
  bounds.lipschitz *= s;
  return PiecewiseMap(map.breakpoints(), std::move(exprs), bounds,
                      /*audit=*/false, map.tol());
}

double max_scale_branch(const Branch& branch, double ceiling, double touch_tol) {
  const ExpandCase tag = classify_branch_image(branch, touch_tol);
  const double lo = branch.image_lo(), hi = branch.image_hi();
  double s = ceiling;
  switch (tag) {
    case ExpandCase::kFull:
      return ceiling;
    case ExpandCase::kInterior:
      if (lo < 0.0) s = std::min(s, -1.0 / lo);
      if (hi > 0.0) s = std::min(s, 1.0 / hi);
      return s;
    case ExpandCase::kTouchesLow:
      // (s+1)/2 hi + (s-1)/2 <= 1  =>  s <= (3 - hi) / (1 + hi)
      return std::min(s, (3.0 - hi) / (1.0 + hi));
    case ExpandCase::kTouchesHigh:
      // (s+1)/2 lo - (s-1)/2 >= -1  =>  s <= (3 + lo) / (1 - lo)
      return std::min(s, (3.0 + lo) / (1.0 - lo));
  }
  return s;
}

double max_scale(const PiecewiseMap& map, double ceiling) {
  double s = ceiling;
  for (int k = 0; k < map.branch_count(); ++k) {
    s = std::min(s, max_scale_branch(map.branch(k), ceiling, map.tol().touch));
  }
  return s;
}

PerturbationConstants compute_constants(double lambda, double Lambda,
                                        double eta, double zeta, double delta,
                                        double eps, double s0) {
  if (!(lambda > 1.0)) throw Infeasible("need lambda > 1");
  const double threshold = 1.0 / (lambda - 1.0);
  if (!(delta > threshold)) {
    throw Infeasible("delta = " + std::to_string(delta) +
                     " does not exceed 1/(lambda-1) = " +
                     std::to_string(threshold));
  }
  PerturbationConstants c;
  c.lambda = lambda;
  c.Lambda = Lambda;
  c.eta = eta;
  c.zeta = zeta;
  c.delta = delta;
  c.eps = eps;
  c.s0 = s0;
  c.alpha0 =
      2.0 * (lambda * eta / (lambda - 1.0) + Lambda * zeta) / (delta - threshold);
  return c;
}

PerturbedFamily perturbed_family(const MapFamily& family, double a0,
                                 double alpha, int grid) {
  if (!(alpha > 0.0)) throw Error("alpha must be positive");
  const Interval I = family.param_interval();
  if (!family.contains_param(a0)) {
    throw Error("a0 outside the family's parameter interval");
  }
  // s0 and the case tags over the usable range, both from the grid
  double s0 = std::numeric_limits<double>::infinity();
  std::vector<ExpandCase> tags;
  for (int g = 0; g <= grid; ++g) {
    const double a = a0 + (I.hi - a0) * g / grid;
    const PiecewiseMap map = family.instantiate(a, false);
    s0 = std::min(s0, max_scale(map));
    std::vector<ExpandCase> here;
    here.reserve(map.branch_count());
    for (int k = 0; k < map.branch_count(); ++k) {
      here.push_back(classify_branch_image(map.branch(k), map.tol().touch));
    }
    if (g == 0) {
      tags = std::move(here);
    } else if (here != tags) {
      throw InvalidMap(
          "branch image case changes with the parameter; the expansion "
          "operator needs case-stable families");
    }
  }
  if (!(s0 > 1.0)) {
    throw ScaleTooLarge("family admits no expansion (s0 = " +
                        std::to_string(s0) + ")");
  }
  const double eps_max = std::min(1.0, s0 - 1.0) / alpha;
  const double hi = std::min(I.hi, a0 + eps_max);
  if (!(hi > a0)) {
    throw Infeasible("empty perturbation window at a0 = " + std::to_string(a0));
  }

  // s(a) = 1 + (a - a0) alpha, symbolically in a
  const Expr s_expr =
      1.0 + (Expr::var_a() - Expr::constant(a0)) * Expr::constant(alpha);
  std::vector<Expr> exprs;
  exprs.reserve(family.branch_exprs().size());
  for (std::size_t k = 0; k < family.branch_exprs().size(); ++k) {
    exprs.push_back(apply_case(family.branch_exprs()[k], tags[k], s_expr));
  }
  const double s_up = 1.0 + alpha * (hi - a0);
  FamilyBounds bounds = family.bounds();
  bounds.Lambda *= s_up * (1.0 + 1e-12);
  bounds.lipschitz *= s_up;
  bounds.eta = alpha + s_up * bounds.eta;

  PerturbedFamily out{
      MapFamily({a0, hi}, family.breakpoint_exprs(), std::move(exprs),
                family.point_expr(), bounds,
                family.name().empty() ? "" : family.name() + "+expand",
                family.verify_grid(), family.hints()),
      alpha,
      a0,
      s0,
      hi - a0,
      std::move(tags)};
  return out;
}

ExpandDemo expand_demo(const PiecewiseMap& map, double s,
                       int points_per_branch) {
  ExpandDemo demo;
  demo.s = s;
  for (int k = 0; k < map.branch_count(); ++k) {
    const ExpandedBranch expanded = expand_branch(map.branch(k), s, map.tol().touch);
    ExpandDemo::BranchGraph graph;
    graph.branch = k;
    graph.tag = expanded.tag;
    graph.original_image = map.branch(k).image();
    graph.expanded_image = expanded.branch.image();
    graph.original = sample_branch_graph(map, k, points_per_branch);
    graph.expanded.reserve(points_per_branch);
    for (const auto& [x, y] : graph.original) {
      graph.expanded.emplace_back(x, apply_case_value(y, expanded.tag, s));
    }
    demo.branches.push_back(std::move(graph));
  }
  return demo;
}

}  // namespace expmap
