#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "expmap/family.hpp"

namespace expmap {

// Family definition files are JSON documents:
//   {
//     "name": "...",                      (optional)
//     "description": "...",               (optional)
//     "domain": [u, v],
//     "param_interval": [lo, hi],
//     "breakpoints": ["expr in a", ...],  (p+1 entries)
//     "branches": ["expr in a and x", ...],
//     "point_X": "expr in a",
//     "bounds": {"lambda": .., "Lambda": .., "L": .., "eta": .., "zeta": ..},
//     "delta": d,                         (optional, image half width)
//     "assumption6": {"m": .., "delta": ..},   (optional)
//     "verify_grid": n                    (optional)
//   }
// Unknown keys are rejected. Families on a domain other than [-1,1] are
// conjugated onto it (lambda and Lambda are unchanged; L, eta and zeta
// rescale with the change of variables).
MapFamily parse_family_file(const std::string& text);
MapFamily parse_family_json(const nlohmann::json& doc);

// Canonical document of a family (always on the reference domain).
// Parsing it back yields expression trees identical to the family's.
nlohmann::ordered_json family_to_json(const MapFamily& family);
std::string family_to_text(const MapFamily& family);

// Conjugates a family given on [u,v] onto [-1,1]. Bounds are given for the
// original domain and rescale internally.
MapFamily conjugate_family_to_reference(Interval param_interval,
                                        std::vector<Expr> breakpoint_exprs,
                                        std::vector<Expr> branch_exprs,
                                        Expr point, FamilyBounds bounds,
                                        double u, double v,
                                        std::string name = "",
                                        FamilyHints hints = {});

}  // namespace expmap
