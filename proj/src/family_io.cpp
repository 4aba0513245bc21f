#include "expmap/family_io.hpp"

#include <cmath>
#include <set>

#include "expmap/errors.hpp"

namespace expmap {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void require_keys(const json& obj, const std::set<std::string>& required,
                  const std::set<std::string>& optional,
                  const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!required.count(item.key()) && !optional.count(item.key())) {
      throw SemanticError("unknown key '" + item.key() + "' in " + where);
    }
  }
  for (const std::string& key : required) {
    if (!obj.contains(key)) {
      throw SemanticError("missing key '" + key + "' in " + where);
    }
  }
}

Expr parse_expr_field(const json& value, const std::string& where) {
  if (!value.is_string()) {
    throw SemanticError(where + " must be an expression string");
  }
  try {
    return Expr::parse(value.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError("in " + where + ": " + e.what(), e.line, e.column);
  }
}

Interval parse_interval_field(const json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
      !value[1].is_number()) {
    throw SemanticError(where + " must be a two-number array");
  }
  return {value[0].get<double>(), value[1].get<double>()};
}

double number_field(const json& obj, const std::string& key,
                    const std::string& where) {
  if (!obj.at(key).is_number()) {
    throw SemanticError("'" + key + "' in " + where + " must be a number");
  }
  return obj.at(key).get<double>();
}

}  // namespace

MapFamily conjugate_family_to_reference(Interval param_interval,
                                        std::vector<Expr> breakpoint_exprs,
                                        std::vector<Expr> branch_exprs,
                                        Expr point, FamilyBounds bounds,
                                        double u, double v, std::string name,
                                        FamilyHints hints) {
  if (u == -1.0 && v == 1.0) {
    return MapFamily(param_interval, std::move(breakpoint_exprs),
                     std::move(branch_exprs), std::move(point), bounds,
                     std::move(name), 33, hints);
  }
  if (!(u < v)) throw SemanticError("family domain needs u < v");
  const double scale = 2.0 / (v - u);
  const Expr hinv =
      Expr::constant(u) + (Expr::var_x() + 1.0) * Expr::constant(1.0 / scale);
  auto h_of = [&](const Expr& e) {
    return (e - Expr::constant(u)) * Expr::constant(scale) - 1.0;
  };
  std::vector<Expr> bps;
  bps.reserve(breakpoint_exprs.size());
  for (const Expr& b : breakpoint_exprs) bps.push_back(h_of(b));
  std::vector<Expr> branches;
  branches.reserve(branch_exprs.size());
  for (const Expr& f : branch_exprs) branches.push_back(h_of(f.subst_x(hinv)));
  bounds.lipschitz /= scale;
  bounds.eta *= scale;
  bounds.zeta *= scale;
  return MapFamily(param_interval, std::move(bps), std::move(branches),
                   h_of(point), bounds, std::move(name), 33, hints);
}

MapFamily parse_family_json(const json& doc) {
  if (!doc.is_object()) throw SemanticError("family document must be an object");
  require_keys(doc,
               {"domain", "param_interval", "breakpoints", "branches",
                "point_X", "bounds"},
               {"name", "description", "delta", "assumption6", "verify_grid"},
               "the family document");
  const Interval domain = parse_interval_field(doc["domain"], "'domain'");
  const Interval param_interval =
      parse_interval_field(doc["param_interval"], "'param_interval'");

  if (!doc["breakpoints"].is_array() || !doc["branches"].is_array()) {
    throw SemanticError("'breakpoints' and 'branches' must be arrays");
  }
  std::vector<Expr> bps, branches;
  for (std::size_t i = 0; i < doc["breakpoints"].size(); ++i) {
    bps.push_back(parse_expr_field(doc["breakpoints"][i],
                                   "breakpoints[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < doc["branches"].size(); ++i) {
    branches.push_back(parse_expr_field(doc["branches"][i],
                                        "branches[" + std::to_string(i) + "]"));
  }
  if (bps.size() != branches.size() + 1) {
    throw SemanticError("need one more breakpoint than branches");
  }
  Expr point = parse_expr_field(doc["point_X"], "'point_X'");

  const json& b = doc["bounds"];
  require_keys(b, {"lambda", "Lambda", "L", "eta", "zeta"}, {}, "'bounds'");
  FamilyBounds bounds;
  bounds.lambda = number_field(b, "lambda", "'bounds'");
  bounds.Lambda = number_field(b, "Lambda", "'bounds'");
  bounds.lipschitz = number_field(b, "L", "'bounds'");
  bounds.eta = number_field(b, "eta", "'bounds'");
  bounds.zeta = number_field(b, "zeta", "'bounds'");

  FamilyHints hints;
  if (doc.contains("delta")) {
    hints.delta = number_field(doc, "delta", "the family document");
  }
  if (doc.contains("assumption6")) {
    const json& a6 = doc["assumption6"];
    require_keys(a6, {"m", "delta"}, {}, "'assumption6'");
    if (!a6["m"].is_number_integer()) {
      throw SemanticError("assumption6.m must be an integer");
    }
    hints.a6_m = a6["m"].get<int>();
    hints.a6_delta = number_field(a6, "delta", "'assumption6'");
  }
  std::string name = doc.contains("name") ? doc["name"].get<std::string>() : "";

  try {
    MapFamily family = conjugate_family_to_reference(
        param_interval, std::move(bps), std::move(branches), std::move(point),
        bounds, domain.lo, domain.hi, std::move(name), hints);
    if (doc.contains("verify_grid")) {
      // verification already ran at the default resolution; rerun denser
      const int grid = doc["verify_grid"].get<int>();
      if (grid > 33) {
        return MapFamily(family.param_interval(), family.breakpoint_exprs(),
                         family.branch_exprs(), family.point_expr(),
                         family.bounds(), family.name(), grid, family.hints());
      }
    }
    return family;
  } catch (const InvalidMap& e) {
    throw SemanticError(e.what());
  }
}

MapFamily parse_family_file(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // recover 1-based line/column from the byte offset
    int line = 1, col = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(std::string("invalid JSON: ") + e.what(), line, col);
  }
  return parse_family_json(doc);
}

ordered_json family_to_json(const MapFamily& family) {
  ordered_json doc;
  if (!family.name().empty()) doc["name"] = family.name();
  doc["domain"] = {-1.0, 1.0};
  doc["param_interval"] = {family.param_interval().lo,
                           family.param_interval().hi};
  std::vector<std::string> bps, branches;
  for (const Expr& e : family.breakpoint_exprs()) bps.push_back(e.to_string());
  for (const Expr& e : family.branch_exprs()) branches.push_back(e.to_string());
  doc["breakpoints"] = bps;
  doc["branches"] = branches;
  doc["point_X"] = family.point_expr().to_string();
  doc["bounds"] = {{"lambda", family.bounds().lambda},
                   {"Lambda", family.bounds().Lambda},
                   {"L", family.bounds().lipschitz},
                   {"eta", family.bounds().eta},
                   {"zeta", family.bounds().zeta}};
  if (family.hints().delta) doc["delta"] = *family.hints().delta;
  if (family.hints().a6_delta) {
    doc["assumption6"] = {{"m", family.hints().a6_m.value_or(1)},
                          {"delta", *family.hints().a6_delta}};
  }
  return doc;
}

std::string family_to_text(const MapFamily& family) {
  return family_to_json(family).dump(2) + "\n";
}

}  // namespace expmap
