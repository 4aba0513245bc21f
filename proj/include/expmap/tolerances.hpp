#pragma once

#include <cstddef>

namespace expmap {

// Numeric tolerances shared across the library. The defaults form the
// "default" profile; EXPMAP_TOL_PROFILE=tight|loose scales the geometric
// tolerances down/up by 100x for experiments.
struct Tolerances {
  double breakpoint = 1e-12;       // |x - b_i| below this counts as a hit
  double merge = 1e-12;            // interval-union gap merging
  double containment = 1e-12;      // slack for cell-inside-union tests
  double touch = 1e-10;            // image endpoint near +-1 counts as touching
  double bisect_width = 1e-13;     // bracket width before Newton polish
  double residual_total = 1e-9;    // covering leftover: total length
  double residual_component = 1e-6;  // covering leftover: per component
  double nested_slack = 1e-10;     // cylinder image containment slack
  double cylinder_flag = 1e-10;    // cylinders shorter than this get flagged
  double power_iter = 1e-12;       // L1 stop for density iteration
  double fixed_point = 1e-10;      // acceptable residual of the density

  std::size_t max_cells = std::size_t(1) << 24;  // partition refinement budget

  // Profile selected through EXPMAP_TOL_PROFILE, read once per process.
  static const Tolerances& global();
};

}  // namespace expmap
