#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "expmap/map.hpp"

namespace expmap {

// Branch itinerary of x for m steps: the cells visited by x, T(x), ...,
// T^{m-1}(x), as 1-based bytes. Throws OrbitTruncated at breakpoints.
std::string itinerary(const PiecewiseMap& map, double x, int m);

// Depth-m truncation of the admissible word set: the words realized by
// nonempty cells of the depth-m partition. Prefix-closed by construction.
struct WordSet {
  int depth = 0;
  std::set<std::string> words;
  int flagged_short = 0;  // cylinders shorter than the flag tolerance

  bool contains(const std::string& w) const { return words.count(w) > 0; }
};

WordSet word_set(const PiecewiseMap& map, int m,
                 std::size_t max_cells = Tolerances::global().max_cells);

// Word-indexed view of a partition. Words are unique per cell for
// piecewise monotone maps, so this is a bijection onto admissible words.
struct CylinderTable {
  int depth = 0;
  std::vector<PartitionCell> cells;
  std::unordered_map<std::string, std::size_t> index;

  static CylinderTable build(Partition part);
  const PartitionCell* find(const std::string& word) const;
};

// Nested-subshift check between two maps with the same branch count:
// (a) every depth-m word of `inner` is admissible for `outer`;
// (b) for each word w, the image of the inner cylinder under T_inner^m is
//     contained in the image of the outer cylinder with the same word
//     (the symbolic correspondence), up to the containment slack.
// Also records the observed image distances and length ratios of the
// correspondence.
struct NestedReport {
  int depth = 0;
  std::size_t words_inner = 0;
  std::size_t words_outer = 0;
  bool word_inclusion = false;
  bool image_containment = false;
  std::vector<std::string> missing_words;         // display form, capped
  std::vector<std::string> containment_failures;  // display form + gap, capped
  std::size_t missing_count = 0;
  std::size_t containment_failure_count = 0;
  double max_image_distance = 0.0;  // Hausdorff distance between images
  double max_length_ratio = 0.0;    // |T_inner^m w| / |T_outer^m w|
  double worst_gap = 0.0;           // largest containment violation
  int flagged_short = 0;

  bool pass() const { return word_inclusion && image_containment; }
};

NestedReport check_nested(const PiecewiseMap& inner, const PiecewiseMap& outer,
                          int depth,
                          double slack = Tolerances::global().nested_slack);

// Minimum cell length of the depth-t0 partition.
double min_cylinder_length(const PiecewiseMap& map, int t0_steps);

}  // namespace expmap
