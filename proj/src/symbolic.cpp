#include "expmap/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "expmap/errors.hpp"

namespace expmap {

std::string itinerary(const PiecewiseMap& map, double x, int m) {
  std::string word;
  word.reserve(m);
  for (int step = 0; step < m; ++step) {
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

WordSet word_set(const PiecewiseMap& map, int m, std::size_t max_cells) {
  const Partition part = refine_partition(map, m, max_cells);
  WordSet out;
  out.depth = m;
  const double flag = map.tol().cylinder_flag;
  for (const PartitionCell& cell : part.cells) {
    if (cell.length() < flag) ++out.flagged_short;
    out.words.insert(cell.word);
  }
  return out;
}

CylinderTable CylinderTable::build(Partition part) {
  CylinderTable table;
  table.depth = part.depth;
  table.cells = std::move(part.cells);
  table.index.reserve(table.cells.size() * 2);
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    table.index.emplace(table.cells[i].word, i);
  }
  return table;
}

const PartitionCell* CylinderTable::find(const std::string& word) const {
  auto it = index.find(word);
  return it == index.end() ? nullptr : &cells[it->second];
}

NestedReport check_nested(const PiecewiseMap& inner, const PiecewiseMap& outer,
                          int depth, double slack) {
  if (inner.branch_count() != outer.branch_count()) {
    throw Error("nested check needs maps with the same branch count");
  }
  constexpr std::size_t kMaxLogged = 32;
  NestedReport report;
  report.depth = depth;

  const Partition inner_part = refine_partition(inner, depth);
  const CylinderTable outer_table =
      CylinderTable::build(refine_partition(outer, depth));
  report.words_inner = inner_part.cells.size();
  report.words_outer = outer_table.cells.size();

  const double flag = inner.tol().cylinder_flag;
  for (const PartitionCell& cell : inner_part.cells) {
    if (cell.length() < flag) ++report.flagged_short;
    const PartitionCell* mate = outer_table.find(cell.word);
    if (!mate) {
      ++report.missing_count;
      if (report.missing_words.size() < kMaxLogged) {
        report.missing_words.push_back(word_display(cell.word));
      }
      continue;
    }
    const double lo0 = cell.img_lo(), hi0 = cell.img_hi();
    const double lo1 = mate->img_lo(), hi1 = mate->img_hi();
    report.max_image_distance =
        std::max(report.max_image_distance,
                 std::max(std::fabs(lo0 - lo1), std::fabs(hi0 - hi1)));
    const double len1 = hi1 - lo1;
    if (len1 > 0.0) {
      report.max_length_ratio =
          std::max(report.max_length_ratio, (hi0 - lo0) / len1);
    }
    const double gap = std::max(lo1 - lo0, hi0 - hi1);
    if (gap > slack) {
      ++report.containment_failure_count;
      report.worst_gap = std::max(report.worst_gap, gap);
      if (report.containment_failures.size() < kMaxLogged) {
        report.containment_failures.push_back(
            word_display(cell.word) + " (gap " + std::to_string(gap) + ")");
      }
    }
  }
  report.word_inclusion = report.missing_count == 0;
  report.image_containment = report.containment_failure_count == 0;
  return report;
}

double min_cylinder_length(const PiecewiseMap& map, int t0_steps) {
  const Partition part = refine_partition(map, t0_steps);
  double m = std::numeric_limits<double>::infinity();
  for (const PartitionCell& cell : part.cells) m = std::min(m, cell.length());
  return m;
}

}  // namespace expmap
