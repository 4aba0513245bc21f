#pragma once

#include <vector>

#include "expmap/family.hpp"
#include "expmap/interval_set.hpp"
#include "expmap/map.hpp"

namespace expmap {

// Ordinary forward image T(U), computed per branch from monotone endpoint
// evaluation.
IntervalUnion map_image(const PiecewiseMap& map, const IntervalUnion& u);

// Restricted image: the union of T over partition cells fully contained
// in U (with the containment slack). Always a subset of map_image.
IntervalUnion tilde_image(const PiecewiseMap& map, const IntervalUnion& u);

struct CoveringResult {
  int n = 0;                   // smallest step count that covered
  double residual_length = 0.0;
  std::size_t residual_components = 0;
};

// Smallest N <= n_max such that omega cup T~(omega) cup ... cup T~^N(omega)
// leaves only a negligible complement: total length below the residual
// tolerance, at most p*(N+1) components, each shorter than the component
// tolerance. omega must coincide with a branch cell. Throws
// NotCoveringWithin when the budget runs out or the chain stalls.
CoveringResult weakly_covering_N(const PiecewiseMap& map, Interval omega,
                                 int n_max);
CoveringResult weakly_covering_cell(const PiecewiseMap& map, int cell_index,
                                    int n_max);

struct Assumption5Report {
  struct PerCell {
    int cell = 0;
    int n = 0;
    double residual_length = 0.0;
  };
  std::vector<PerCell> cells;
  int max_n = 0;
};

// Runs weakly_covering_cell on every branch cell; propagates
// NotCoveringWithin from the first failing cell.
Assumption5Report check_assumption_5(const PiecewiseMap& map, int n_max = 64);

struct Assumption6Report {
  int m = 0;
  double delta = 0.0;
  bool images_ok = false;      // every P_m cell image contains (-delta, delta)
  double image_margin = 0.0;   // worst slack of that containment
  double required_inf_deriv = 0.0;  // 1 + 1/delta
  double observed_inf_deriv = 0.0;  // grid estimate of inf |(T_a^m)'|
  double deriv_margin = 0.0;
  bool pass = false;
  std::vector<std::string> witnesses;  // failing (a, word) pairs
};

// Checks that (-delta, delta) sits inside every P_m(a) image over the
// parameter grid and that delta > 1 / (inf |(T_a^m)'| - 1).
Assumption6Report check_assumption_6(const MapFamily& family, int m,
                                     double delta, int grid = 17);

}  // namespace expmap
