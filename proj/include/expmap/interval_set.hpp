#pragma once

#include <vector>

#include "expmap/tolerances.hpp"

namespace expmap {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool empty() const { return hi <= lo; }
};

// Finite union of disjoint open subintervals of [-1,1]. Components whose
// gap is below the merge tolerance are coalesced, so stored gaps always
// exceed it.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  explicit IntervalUnion(Interval iv, double merge_tol = Tolerances::global().merge);
  static IntervalUnion of(std::vector<Interval> parts,
                          double merge_tol = Tolerances::global().merge);

  const std::vector<Interval>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  std::size_t component_count() const { return parts_.size(); }
  double total_length() const;
  double max_component_length() const;

  // (iv.lo, iv.hi) contained in one component, with `slack` forgiveness at
  // both endpoints.
  bool contains_interval(const Interval& iv, double slack) const;
  bool contains_point(double x) const;

  IntervalUnion unite(const IntervalUnion& other) const;

  // Complement within [domain.lo, domain.hi]; endpoints within merge_tol of
  // the domain edge are snapped onto it first.
  IntervalUnion complement(Interval domain = {-1.0, 1.0}) const;

  bool subset_of(const IntervalUnion& other, double slack) const;

  double merge_tol() const { return merge_tol_; }

 private:
  std::vector<Interval> parts_;
  double merge_tol_ = Tolerances::global().merge;
  void normalize();
};

}  // namespace expmap
