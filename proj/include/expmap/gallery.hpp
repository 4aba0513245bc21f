#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "expmap/expr.hpp"
#include "expmap/family.hpp"

namespace expmap {

// Finite prefix of a scaled-family template: a map T of [0, b_last] into
// [0,1], smooth and monotone between consecutive breakpoints, |T'| >= lambda0.
struct ScaledTemplate {
  std::vector<double> breakpoints;  // 0 = b_0 < b_1 < ...
  std::vector<Expr> branches;       // expressions in x on (b_i, b_{i+1})
  double lambda0 = 1.0;             // inf |T'|
};

// The family T_a(x) = T(a x) on [0,1], conjugated onto the reference
// domain. The branch count must be constant over I, so I may not cross a
// template breakpoint; with delta supplied, I must also sit above
// a0 = (1 + 1/delta) / lambda0.
MapFamily build_scaled_family(const ScaledTemplate& tpl, Interval I,
                              Expr point_on_unit,
                              std::optional<double> delta = {},
                              std::string name = "");

// Checks the scaled-family hypotheses for a window of half width delta
// around 1/2:
//  (1) ((1-delta)/2, (1+delta)/2) inside every stored branch image,
//  (2) I above a0 = (1 + 1/delta) / lambda0,
//  (3) some full branch whose cell stays inside the window for all a in I.
// On a pass the induced image condition needs inf |T_a'| > 1 + 1/delta,
// reported through the margin fields.
struct CorollaryReport {
  bool pass = false;
  int witness = -1;  // index of the full branch found inside the window
  double a0 = 0.0;
  bool windows_ok = false;
  bool interval_ok = false;
  double required_inf_deriv = 0.0;  // 1 + 1/delta
  double observed_inf_deriv = 0.0;  // lambda0 * inf I
  double margin = 0.0;
  std::vector<std::string> notes;
};

CorollaryReport corollary_check(const ScaledTemplate& tpl, double delta,
                                Interval I);

// Bundled families covering the pass and fail paths of every checker.
struct GalleryEntry {
  std::string name;
  std::string description;
  nlohmann::ordered_json document;  // family definition file content
};

const std::vector<GalleryEntry>& gallery();
const GalleryEntry& gallery_entry(const std::string& name);
MapFamily gallery_family(const std::string& name);

// The template behind the bundled scaled family, for the corollary tests.
ScaledTemplate gallery_scaled_template();

}  // namespace expmap
