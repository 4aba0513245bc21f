#include "expmap/interval_set.hpp"

#include <algorithm>
#include <cmath>

namespace expmap {

IntervalUnion::IntervalUnion(Interval iv, double merge_tol)
    : merge_tol_(merge_tol) {
  if (!iv.empty()) parts_.push_back(iv);
}

IntervalUnion IntervalUnion::of(std::vector<Interval> parts, double merge_tol) {
  IntervalUnion u;
  u.merge_tol_ = merge_tol;
  u.parts_ = std::move(parts);
  u.normalize();
  return u;
}

void IntervalUnion::normalize() {
  std::erase_if(parts_, [](const Interval& iv) { return iv.empty(); });
  std::sort(parts_.begin(), parts_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  merged.reserve(parts_.size());
  for (const Interval& iv : parts_) {
    if (!merged.empty() && iv.lo <= merged.back().hi + merge_tol_) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }
  parts_ = std::move(merged);
}

double IntervalUnion::total_length() const {
  double sum = 0.0;
  for (const Interval& iv : parts_) sum += iv.length();
  return sum;
}

double IntervalUnion::max_component_length() const {
  double m = 0.0;
  for (const Interval& iv : parts_) m = std::max(m, iv.length());
  return m;
}

bool IntervalUnion::contains_interval(const Interval& iv, double slack) const {
  for (const Interval& part : parts_) {
    if (part.lo <= iv.lo + slack && iv.hi <= part.hi + slack) return true;
    if (part.lo > iv.lo + slack) break;
  }
  return false;
}

bool IntervalUnion::contains_point(double x) const {
  for (const Interval& part : parts_) {
    if (part.lo < x && x < part.hi) return true;
    if (part.lo >= x) break;
  }
  return false;
}

IntervalUnion IntervalUnion::unite(const IntervalUnion& other) const {
  std::vector<Interval> all = parts_;
  all.insert(all.end(), other.parts_.begin(), other.parts_.end());
  return of(std::move(all), merge_tol_);
}

IntervalUnion IntervalUnion::complement(Interval domain) const {
  std::vector<Interval> gaps;
  double cursor = domain.lo;
  for (Interval iv : parts_) {
    double lo = std::max(iv.lo, domain.lo);
    double hi = std::min(iv.hi, domain.hi);
    if (hi <= lo) continue;
    if (lo - domain.lo < merge_tol_) lo = domain.lo;
    if (domain.hi - hi < merge_tol_) hi = domain.hi;
    if (lo > cursor) gaps.push_back({cursor, lo});
    cursor = std::max(cursor, hi);
  }
  if (cursor < domain.hi) gaps.push_back({cursor, domain.hi});
  return of(std::move(gaps), merge_tol_);
}

bool IntervalUnion::subset_of(const IntervalUnion& other, double slack) const {
  for (const Interval& iv : parts_) {
    if (!other.contains_interval(iv, slack)) return false;
  }
  return true;
}

}  // namespace expmap
