#include "expmap/gallery.hpp"

#include <algorithm>
#include <cmath>

#include "expmap/errors.hpp"
#include "expmap/family_io.hpp"

namespace expmap {

MapFamily build_scaled_family(const ScaledTemplate& tpl, Interval I,
                              Expr point_on_unit, std::optional<double> delta,
                              std::string name) {
  if (tpl.breakpoints.size() != tpl.branches.size() + 1 ||
      tpl.breakpoints.empty() || tpl.breakpoints.front() != 0.0) {
    throw SemanticError("template needs breakpoints 0 = b_0 < b_1 < ... and "
                        "one branch per gap");
  }
  if (I.empty() || I.lo <= 0.0) throw SemanticError("invalid scale interval");
  if (delta) {
    const double a0 = (1.0 + 1.0 / *delta) / tpl.lambda0;
    if (I.lo < a0 - 1e-12) {
      throw Error("interval starts below a0 = " + std::to_string(a0));
    }
  }
  // branch count must be constant on I: no template breakpoint inside it
  int m = -1;
  for (std::size_t i = 0; i < tpl.breakpoints.size(); ++i) {
    if (tpl.breakpoints[i] < I.lo) m = static_cast<int>(i);
  }
  if (m < 0 || m + 1 >= static_cast<int>(tpl.breakpoints.size()) ||
      tpl.breakpoints[m + 1] < I.hi) {
    throw InvalidMap("a template breakpoint crosses x = 1 inside the "
                     "parameter interval; shrink I or extend the template");
  }

  // T_a(x) = T(a x) on [0,1]: breakpoints b_i / a, branches f_i(a x)
  const Expr ax = Expr::var_a() * Expr::var_x();
  std::vector<Expr> bps;
  bps.push_back(Expr::constant(0.0));
  for (int i = 1; i <= m; ++i) {
    bps.push_back(Expr::constant(tpl.breakpoints[i]) / Expr::var_a());
  }
  bps.push_back(Expr::constant(1.0));
  std::vector<Expr> branches;
  for (int i = 0; i <= m; ++i) branches.push_back(tpl.branches[i].subst_x(ax));

  // derivative data from a template grid, for the declared bounds
  double sup_deriv = 0.0, sup_second = 0.0;
  for (std::size_t k = 0; k < tpl.branches.size(); ++k) {
    const double lo = tpl.breakpoints[k], hi = tpl.breakpoints[k + 1];
    for (int g = 0; g <= 64; ++g) {
      const double x = lo + (hi - lo) * g / 64.0;
      const Dual2 d = tpl.branches[k].eval_dxx(x, 0.0);
      sup_deriv = std::max(sup_deriv, std::fabs(d.d));
      sup_second = std::max(sup_second, std::fabs(d.dd));
    }
  }
  FamilyBounds unit_bounds;
  unit_bounds.lambda = I.lo * tpl.lambda0 * (1.0 - 1e-12);
  unit_bounds.Lambda = I.hi * sup_deriv * (1.0 + 1e-9);
  unit_bounds.lipschitz = I.hi * I.hi * sup_second * (1.0 + 1e-9);
  // d/da T(a x) = x T'(a x), |x| <= 1 on the unit domain
  unit_bounds.eta = sup_deriv * (1.0 + 1e-9);
  // d/da (b_i / a) = -b_i / a^2
  unit_bounds.zeta = tpl.breakpoints[m] / (I.lo * I.lo) * (1.0 + 1e-9);

  return conjugate_family_to_reference(
      I, std::move(bps), std::move(branches), point_on_unit, unit_bounds, 0.0,
      1.0, std::move(name));
}

CorollaryReport corollary_check(const ScaledTemplate& tpl, double delta,
                                Interval I) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must be in (0,1)");
  CorollaryReport report;
  const double w_lo = (1.0 - delta) / 2.0, w_hi = (1.0 + delta) / 2.0;
  report.a0 = (1.0 + 1.0 / delta) / tpl.lambda0;
  report.interval_ok = I.lo >= report.a0 - 1e-12;
  if (!report.interval_ok) {
    report.notes.push_back("interval starts below a0 = " +
                           std::to_string(report.a0));
  }

  // (1) the window sits inside every stored branch image
  report.windows_ok = true;
  std::vector<bool> full(tpl.branches.size(), false);
  for (std::size_t k = 0; k < tpl.branches.size(); ++k) {
    const double lo = tpl.breakpoints[k], hi = tpl.breakpoints[k + 1];
    const double ya = tpl.branches[k].eval(lo, 0.0);
    const double yb = tpl.branches[k].eval(hi, 0.0);
    const double img_lo = std::min(ya, yb), img_hi = std::max(ya, yb);
    if (img_lo > w_lo + 1e-12 || img_hi < w_hi - 1e-12) {
      report.windows_ok = false;
      report.notes.push_back("branch " + std::to_string(k) +
                             " image misses the window");
    }
    full[k] = img_lo <= 1e-9 && img_hi >= 1.0 - 1e-9;
  }

  // (3) a full branch whose rescaled cell stays inside the window on I
  for (std::size_t k = 0; k < tpl.branches.size(); ++k) {
    if (!full[k]) continue;
    const double cell_lo = tpl.breakpoints[k] / I.hi;   // smallest over a
    const double cell_hi = tpl.breakpoints[k + 1] / I.lo;  // largest over a
    if (cell_lo >= w_lo - 1e-12 && cell_hi <= w_hi + 1e-12) {
      report.witness = static_cast<int>(k);
      break;
    }
  }
  if (report.witness < 0) {
    report.notes.push_back("no full branch stays inside the window over I");
  }

  // The covering argument also needs the window inside the image of the
  // truncated last branch of T_a, i.e. of T on (b_m, a); the image only
  // grows with a, so checking at inf I suffices.
  bool truncated_ok = true;
  {
    int m = -1;
    for (std::size_t i = 0; i < tpl.breakpoints.size(); ++i) {
      if (tpl.breakpoints[i] < I.lo) m = static_cast<int>(i);
    }
    if (m < 0 || m >= static_cast<int>(tpl.branches.size())) {
      truncated_ok = false;
      report.notes.push_back("interval not covered by the stored template");
    } else {
      const double ya = tpl.branches[m].eval(tpl.breakpoints[m], 0.0);
      const double yb = tpl.branches[m].eval(std::min(I.lo, tpl.breakpoints[m + 1]), 0.0);
      const double img_lo = std::min(ya, yb), img_hi = std::max(ya, yb);
      if (img_lo > w_lo + 1e-12 || img_hi < w_hi - 1e-12) {
        truncated_ok = false;
        report.notes.push_back(
            "truncated last branch misses the window at a = inf I; iterated "
            "cell images can stall there");
      }
    }
  }

  report.required_inf_deriv = 1.0 + 1.0 / delta;
  report.observed_inf_deriv = tpl.lambda0 * I.lo;
  report.margin = report.observed_inf_deriv - report.required_inf_deriv;
  report.pass = report.windows_ok && report.interval_ok && truncated_ok &&
                report.witness >= 0 && report.margin >= 0.0;
  return report;
}

namespace {

using nlohmann::ordered_json;

ordered_json bounds_json(double lambda, double Lambda, double L, double eta,
                         double zeta) {
  ordered_json j;
  j["lambda"] = lambda;
  j["Lambda"] = Lambda;
  j["L"] = L;
  j["eta"] = eta;
  j["zeta"] = zeta;
  return j;
}

std::vector<GalleryEntry> build_gallery() {
  std::vector<GalleryEntry> entries;

  {
    ordered_json doc;
    doc["name"] = "doubling";
    doc["description"] =
        "two full affine branches of slope 2; the parameter only moves the "
        "tracked point X(a) = a";
    doc["domain"] = {-1.0, 1.0};
    doc["param_interval"] = {-0.9, 0.9};
    doc["breakpoints"] = {"-1", "0", "1"};
    doc["branches"] = {"2 * x + 1", "2 * x - 1"};
    doc["point_X"] = "a";
    doc["bounds"] = bounds_json(2.0, 2.0, 0.0, 0.0, 0.0);
    doc["assumption6"] = {{"m", 2}, {"delta", 0.4}};
    entries.push_back({"doubling", doc["description"], doc});
  }

  {
    ordered_json doc;
    doc["name"] = "full3";
    doc["description"] = "three full affine branches of slope 3";
    doc["domain"] = {-1.0, 1.0};
    doc["param_interval"] = {-1.0, 1.0};
    doc["breakpoints"] = {"-1", "(-1) / 3", "1 / 3", "1"};
    doc["branches"] = {"3 * x + 2", "3 * x", "3 * x - 2"};
    doc["point_X"] = "a / 2";
    doc["bounds"] = bounds_json(3.0, 3.0, 0.0, 0.0, 0.0);
    doc["assumption6"] = {{"m", 1}, {"delta", 0.6}};
    entries.push_back({"full3", doc["description"], doc});
  }

  {
    ordered_json doc;
    doc["name"] = "interior3";
    doc["description"] =
        "three branches with interior images (-0.9, 0.9); the expansion and "
        "nesting test bed";
    doc["domain"] = {-1.0, 1.0};
    doc["param_interval"] = {0.0, 0.3};
    doc["breakpoints"] = {"-1", "(-1) / 3", "1 / 3", "1"};
    doc["branches"] = {"(2.7 + 0.05 * a) * (x + 2 / 3)",
                       "(2.7 + 0.05 * a) * x",
                       "(2.7 + 0.05 * a) * (x - 2 / 3)"};
    doc["point_X"] = "0.1 + 0.2 * a";
    doc["bounds"] = bounds_json(2.7, 2.72, 0.0, 0.017, 0.0);
    doc["delta"] = 0.85;
    doc["assumption6"] = {{"m", 1}, {"delta", 0.85}};
    entries.push_back({"interior3", doc["description"], doc});
  }

  {
    ordered_json doc;
    doc["name"] = "mixedcase";
    doc["description"] =
        "one branch per expansion case: interior, full, touching -1, "
        "touching +1";
    doc["domain"] = {-1.0, 1.0};
    doc["param_interval"] = {0.0, 1.0};
    doc["breakpoints"] = {"-1", "-0.5", "0", "0.5", "1"};
    doc["branches"] = {"2 * (x + 0.75)", "4 * x + 1", "1.5 * x - 1",
                       "1.5 * (x - 0.5) + 0.25"};
    doc["point_X"] = "0.3";
    doc["bounds"] = bounds_json(1.5, 4.0, 0.0, 0.0, 0.0);
    entries.push_back({"mixedcase", doc["description"], doc});
  }

  {
    ordered_json doc;
    doc["name"] = "negctrl";
    doc["description"] =
        "negative control: (0,1) is invariant, so iterated cell images "
        "never cover and the density degenerates on half the domain";
    doc["domain"] = {-1.0, 1.0};
    doc["param_interval"] = {-0.5, 0.5};
    doc["breakpoints"] = {"-1", "0", "0.5", "1"};
    doc["branches"] = {"1.5 * x + 0.5", "2 * x", "2 * x - 1"};
    doc["point_X"] = "-0.7";
    doc["bounds"] = bounds_json(1.5, 2.0, 0.0, 0.0, 0.0);
    entries.push_back({"negctrl", doc["description"], doc});
  }

  {
    ordered_json doc;
    doc["name"] = "forbidden";
    doc["description"] =
        "two branches with a forbidden transition (cell 1 never follows "
        "itself); for symbolic tests";
    doc["domain"] = {-1.0, 1.0};
    doc["param_interval"] = {-1.0, 1.0};
    doc["breakpoints"] = {"-1", "-0.5", "1"};
    doc["branches"] = {"2 * x + 1.6", "(4 / 3) * (x + 0.5) - 1"};
    doc["point_X"] = "a / 4";
    doc["bounds"] = bounds_json(1.3, 2.0, 0.0, 0.0, 0.0);
    entries.push_back({"forbidden", doc["description"], doc});
  }

  {
    // The scaled family lives on [0,1] in its definition file; the parser
    // moves it onto the reference domain. The interval starts at 1.13 so
    // that the truncated last branch already covers the window (0.3, 0.7).
    ordered_json doc;
    doc["name"] = "fig1beta";
    doc["description"] =
        "scaled family T_a(x) = T(a x) built from a sawtooth template with "
        "full branches and window branches; passes the scaled-family "
        "checker with delta = 2/5";
    doc["domain"] = {0.0, 1.0};
    doc["param_interval"] = {1.13, 1.19};
    doc["breakpoints"] = {"0",        "0.25 / a", "0.4 / a", "0.65 / a",
                          "0.8 / a",  "0.95 / a", "1"};
    doc["branches"] = {"4 * (a * x)",
                       "4.2 * (a * x - 0.25) + 0.2",
                       "4 * (a * x - 0.4)",
                       "4.2 * (a * x - 0.65) + 0.2",
                       "4.2 * (a * x - 0.8) + 0.2",
                       "4 * (a * x - 0.95)"};
    doc["point_X"] = "a - 0.5";
    doc["bounds"] = bounds_json(4.0, 5.05, 0.0, 4.21, 0.75);
    doc["delta"] = 0.4;
    doc["assumption6"] = {{"m", 1}, {"delta", 0.4}};
    entries.push_back({"fig1beta", doc["description"], doc});
  }

  return entries;
}

}  // namespace

const std::vector<GalleryEntry>& gallery() {
  static const std::vector<GalleryEntry> entries = build_gallery();
  return entries;
}

const GalleryEntry& gallery_entry(const std::string& name) {
  for (const GalleryEntry& e : gallery()) {
    if (e.name == name) return e;
  }
  throw Error("no bundled family named '" + name + "'");
}

MapFamily gallery_family(const std::string& name) {
  return parse_family_json(gallery_entry(name).document);
}

ScaledTemplate gallery_scaled_template() {
  ScaledTemplate tpl;
  tpl.breakpoints = {0.0, 0.25, 0.4, 0.65, 0.8, 0.95, 1.2};
  tpl.branches = {Expr::parse("4 * x"),
                  Expr::parse("4.2 * (x - 0.25) + 0.2"),
                  Expr::parse("4 * (x - 0.4)"),
                  Expr::parse("4.2 * (x - 0.65) + 0.2"),
                  Expr::parse("4.2 * (x - 0.8) + 0.2"),
                  Expr::parse("4 * (x - 0.95)")};
  tpl.lambda0 = 4.0;
  return tpl;
}

}  // namespace expmap
