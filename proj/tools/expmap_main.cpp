// Command line front end: family checks, densities, parameter sweeps,
// nesting verification and expansion demos over family definition files.
//
// Exit codes: 0 success, 1 runtime error, 2 a check reported violations,
// 3 perturbation hypotheses infeasible, 4 usage or file errors.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "expmap/covering.hpp"
#include "expmap/density.hpp"
#include "expmap/errors.hpp"
#include "expmap/expand.hpp"
#include "expmap/family.hpp"
#include "expmap/family_io.hpp"
#include "expmap/gallery.hpp"
#include "expmap/symbolic.hpp"
#include "expmap/typicality.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolations = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitUsage = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw expmap::Error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw expmap::Error("cannot write '" + path + "'");
  out << content;
}

expmap::MapFamily load_family(const std::string& path) {
  return expmap::parse_family_file(read_file(path));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// delta for the branch-image window: declared in the file, or the largest
// symmetric window inside every branch image over a parameter grid
double resolve_delta(const expmap::MapFamily& family) {
  if (family.hints().delta) return *family.hints().delta;
  const expmap::Interval I = family.param_interval();
  double delta = 1.0;
  for (int g = 0; g < 9; ++g) {
    const double a = I.lo + (I.hi - I.lo) * (g + 0.5) / 9;
    const expmap::PiecewiseMap map = family.instantiate(a, false);
    for (int k = 0; k < map.branch_count(); ++k) {
      delta = std::min(delta, -map.branch(k).image_lo());
      delta = std::min(delta, map.branch(k).image_hi());
    }
  }
  return delta;
}

int cmd_check(const std::string& family_path, int grid, int j_max, int j0_max,
              int bins, double gamma, int n_max, const std::string& out) {
  const expmap::MapFamily family = load_family(family_path);
  ordered_json reports = ordered_json::array();
  bool all_pass = true;

  {
    const expmap::Assumption1Report r =
        expmap::check_assumption_1(family, j_max, grid);
    ordered_json j;
    j["assumption"] = "derivative-ratio";
    j["grid"] = grid;
    j["pass"] = !r.degenerate && r.stabilized;
    j["degenerate"] = r.degenerate;
    j["stabilized"] = r.stabilized;
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.per_depth) {
      rows.push_back({{"j", row.j},
                      {"ratio_min", row.ratio_min},
                      {"ratio_max", row.ratio_max}});
    }
    j["ratios"] = rows;
    all_pass = all_pass && j["pass"].get<bool>();
    reports.push_back(j);
  }

  {
    ordered_json j;
    j["assumption"] = "derivative-growth";
    j["grid"] = 4096;
    bool passed = false;
    ordered_json rows = ordered_json::array();
    for (int j0 = 0; j0 <= j0_max && !passed; ++j0) {
      const expmap::Assumption2Report r = expmap::check_assumption_2(family, j0);
      rows.push_back({{"j0", r.j0},
                      {"lhs", r.lhs},
                      {"rhs", r.rhs},
                      {"margin", r.margin},
                      {"pass", r.pass}});
      passed = r.pass;
    }
    j["rows"] = rows;
    j["pass"] = passed;
    all_pass = all_pass && passed;
    reports.push_back(j);
  }

  {
    const expmap::DensityBoundsReport r =
        expmap::check_density_bounds(family, grid, bins, gamma);
    ordered_json j;
    j["assumption"] = "density-bounds";
    j["grid"] = grid;
    j["bins"] = bins;
    j["gamma"] = gamma;
    j["pass"] = r.pass;
    j["min_over_grid"] = r.min_over_grid;
    ordered_json witnesses = ordered_json::array();
    for (const auto& row : r.rows) {
      if (!row.pass && witnesses.size() < 8) {
        witnesses.push_back({{"a", row.a},
                             {"min", row.min},
                             {"max", row.max},
                             {"converged", row.converged}});
      }
    }
    j["witnesses"] = witnesses;
    all_pass = all_pass && r.pass;
    reports.push_back(j);
  }

  {
    ordered_json j;
    j["assumption"] = "weak-covering";
    j["grid"] = std::min(grid, 9);
    bool pass = true;
    int max_n = 0;
    ordered_json witnesses = ordered_json::array();
    const expmap::Interval I = family.param_interval();
    for (int g = 0; g < std::min(grid, 9); ++g) {
      const double a = I.lo + (I.hi - I.lo) * (g + 0.5) / std::min(grid, 9);
      try {
        const expmap::Assumption5Report r =
            expmap::check_assumption_5(family.instantiate(a, false), n_max);
        max_n = std::max(max_n, r.max_n);
      } catch (const expmap::NotCoveringWithin& e) {
        pass = false;
        if (witnesses.size() < 8) {
          witnesses.push_back({{"a", a}, {"residual", e.residual}});
        }
      }
    }
    j["pass"] = pass;
    j["max_n"] = max_n;
    j["witnesses"] = witnesses;
    all_pass = all_pass && pass;
    reports.push_back(j);
  }

  {
    ordered_json j;
    j["assumption"] = "large-image";
    const int m = family.hints().a6_m.value_or(1);
    const double delta = family.hints().a6_delta.value_or(resolve_delta(family));
    j["m"] = m;
    j["delta"] = delta;
    try {
      const expmap::Assumption6Report r =
          expmap::check_assumption_6(family, m, delta, std::min(grid, 9));
      j["grid"] = std::min(grid, 9);
      j["pass"] = r.pass;
      j["image_margin"] = r.image_margin;
      j["required_inf_deriv"] = r.required_inf_deriv;
      j["observed_inf_deriv"] = r.observed_inf_deriv;
      j["margin"] = r.deriv_margin;
      j["witnesses"] = r.witnesses;
      all_pass = all_pass && r.pass;
    } catch (const expmap::Error& e) {
      j["pass"] = false;
      j["error"] = e.what();
      all_pass = false;
    }
    reports.push_back(j);
  }

  ordered_json doc;
  doc["family"] = family.name().empty() ? family_path : family.name();
  doc["pass"] = all_pass;
  doc["reports"] = reports;
  write_output(out, doc.dump(2) + "\n");
  return all_pass ? kExitOk : kExitViolations;
}

int cmd_density(const std::string& family_path, double a, int bins,
                std::optional<double> sup_norm, const std::string& out,
                const std::string& report_path) {
  const expmap::MapFamily family = load_family(family_path);
  const expmap::PiecewiseMap map = family.instantiate(a);
  const expmap::TransferMatrix transfer = expmap::ulam_matrix(map, bins);
  const expmap::UlamDensity density = expmap::stationary_density(transfer);
  const expmap::DensityBounds bounds = expmap::density_bounds(density);

  std::string text;
  text.reserve(bins * 48);
  for (int i = 0; i < bins; ++i) {
    text += fmt(density.bin_center(i));
    text += ' ';
    text += fmt(density.value(i));
    text += '\n';
  }
  write_output(out, text);

  ordered_json report;
  report["a"] = a;
  report["bins"] = bins;
  report["min"] = bounds.min;
  report["max"] = bounds.max;
  report["support_min"] = bounds.support_min;
  report["support_fraction"] = bounds.support_fraction;
  report["total_variation"] = bounds.total_variation;
  report["fixed_point_residual"] = expmap::fixed_point_residual(transfer, density);
  try {
    const expmap::Assumption5Report cover = expmap::check_assumption_5(map, 64);
    report["covering_n"] = cover.max_n;
    report["density_lower_bound"] =
        expmap::liverani_lower_bound(map, cover.max_n, sup_norm);
    // the sup norm in the bound is ambiguous; say which reading was used
    report["lower_bound_sup_norm"] =
        sup_norm ? *sup_norm : map.bounds().Lambda;
    report["lower_bound_note"] =
        "sup norm taken as the derivative bound Lambda unless overridden";
  } catch (const expmap::NotCoveringWithin&) {
    report["covering_n"] = nullptr;
    report["lower_bound_note"] = "map is not weakly covering";
  }
  const std::string rendered = report.dump(2) + "\n";
  if (report_path.empty()) {
    std::cerr << rendered;
  } else {
    write_output(report_path, rendered);
  }
  return kExitOk;
}

int cmd_sweep(const std::string& family_path, const expmap::SweepOptions& opts,
              const std::string& csv_path, const std::string& summary_path) {
  const expmap::MapFamily family = load_family(family_path);
  const expmap::SweepReport report = expmap::sweep(family, opts);
  write_output(csv_path, expmap::sweep_csv(report));

  ordered_json summary;
  summary["family"] = family.name().empty() ? family_path : family.name();
  summary["grid"] = opts.grid;
  summary["n"] = opts.n;
  summary["bins"] = opts.bins;
  summary["threshold"] = opts.threshold;
  summary["passed"] = report.passed;
  summary["pass_fraction"] = report.pass_fraction;
  summary["warnings"] = report.warnings;
  const std::string rendered = summary.dump(2) + "\n";
  if (summary_path.empty()) {
    std::cerr << rendered;
  } else {
    write_output(summary_path, rendered);
  }
  return kExitOk;
}

int cmd_nested(const std::string& family_path, double a0, double alpha,
               double t1, int depth, std::optional<double> delta_override,
               const std::string& out) {
  const expmap::MapFamily family = load_family(family_path);
  const double delta = delta_override.value_or(resolve_delta(family));
  ordered_json doc;
  doc["family"] = family.name().empty() ? family_path : family.name();
  doc["a0"] = a0;
  doc["alpha"] = alpha;
  doc["t1"] = t1;
  doc["depth"] = depth;
  doc["delta"] = delta;

  expmap::PerturbationConstants constants;
  try {
    constants =
        expmap::compute_constants(family.bounds().lambda, family.bounds().Lambda,
                                  family.bounds().eta, family.bounds().zeta,
                                  delta);
  } catch (const expmap::Infeasible& e) {
    doc["infeasible"] = true;
    doc["reason"] = e.what();
    write_output(out, doc.dump(2) + "\n");
    return kExitInfeasible;
  }
  doc["alpha0"] = constants.alpha0;
  if (alpha < constants.alpha0) {
    doc["warning"] = "alpha below alpha0; nesting is not guaranteed";
  }

  const expmap::PerturbedFamily perturbed =
      expmap::perturbed_family(family, a0, alpha);
  doc["s0"] = perturbed.s0;
  doc["window"] = perturbed.eps_max;
  if (t1 <= a0 || t1 > a0 + perturbed.eps_max) {
    doc["infeasible"] = true;
    doc["reason"] = "t1 outside the admissible window (a0, a0 + window]";
    write_output(out, doc.dump(2) + "\n");
    return kExitInfeasible;
  }

  const expmap::PiecewiseMap inner = perturbed.family.instantiate(a0, false);
  const expmap::PiecewiseMap outer = perturbed.family.instantiate(t1, false);
  const expmap::NestedReport report = expmap::check_nested(inner, outer, depth);
  doc["words_inner"] = report.words_inner;
  doc["words_outer"] = report.words_outer;
  doc["word_inclusion"] = report.word_inclusion;
  doc["image_containment"] = report.image_containment;
  doc["missing_words"] = report.missing_words;
  doc["containment_failures"] = report.containment_failures;
  doc["max_image_distance"] = report.max_image_distance;
  doc["max_length_ratio"] = report.max_length_ratio;
  doc["pass"] = report.pass();
  write_output(out, doc.dump(2) + "\n");
  return report.pass() ? kExitOk : kExitViolations;
}

int cmd_expand_demo(const std::string& family_path, double a, double s,
                    int points, const std::string& out) {
  const expmap::MapFamily family = load_family(family_path);
  const expmap::PiecewiseMap map = family.instantiate(a);
  const expmap::ExpandDemo demo = expmap::expand_demo(map, s, points);
  std::string text;
  for (const auto& graph : demo.branches) {
    text += "# branch " + std::to_string(graph.branch + 1) + " original\n";
    for (const auto& [x, y] : graph.original) {
      text += fmt(x);
      text += ' ';
      text += fmt(y);
      text += '\n';
    }
    text += "\n# branch " + std::to_string(graph.branch + 1) + " expanded (" +
            expmap::expand_case_name(graph.tag) + ")\n";
    for (const auto& [x, y] : graph.expanded) {
      text += fmt(x);
      text += ' ';
      text += fmt(y);
      text += '\n';
    }
    text += '\n';
  }
  write_output(out, text);
  return kExitOk;
}

int cmd_examples(bool list, const std::string& name, bool all,
                 const std::string& out_dir) {
  if (list) {
    for (const expmap::GalleryEntry& entry : expmap::gallery()) {
      std::cout << entry.name << ": " << entry.description << "\n";
    }
    return kExitOk;
  }
  auto emit = [&](const expmap::GalleryEntry& entry) {
    const std::string path = out_dir + "/" + entry.name + ".json";
    write_output(path, entry.document.dump(2) + "\n");
    std::cout << path << "\n";
  };
  if (all) {
    for (const expmap::GalleryEntry& entry : expmap::gallery()) emit(entry);
    return kExitOk;
  }
  emit(expmap::gallery_entry(name));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piecewise expanding interval map toolkit"};
  app.require_subcommand(1);

  std::string family_path, out, report_path, csv_path, summary_path;
  std::string example_name, out_dir = ".";
  int grid = 17, j_max = 10, j0_max = 6, bins = 4096, n_max = 64, depth = 12;
  int points = 64;
  double a = 0.0, gamma = 0.01, s = 1.2, a0 = 0.0, alpha = 1.0, t1 = 0.0;
  double delta = -1.0;
  expmap::SweepOptions sweep_opts;

  CLI::App* check = app.add_subcommand("check", "run the family checkers");
  check->add_option("family", family_path)->required();
  check->add_option("--grid", grid, "parameter grid size");
  check->add_option("--jmax", j_max, "depth for the ratio report");
  check->add_option("--j0max", j0_max, "largest j0 tried for the growth check");
  check->add_option("--bins", bins, "bins for the density check");
  check->add_option("--gamma", gamma, "density floor");
  check->add_option("--nmax", n_max, "covering step budget");
  check->add_option("--out", out, "report path (default stdout)");

  CLI::App* density = app.add_subcommand("density", "stationary density");
  density->add_option("family", family_path)->required();
  density->add_option("--a", a, "parameter value")->required();
  density->add_option("--bins", bins, "bin count");
  double sup_norm_opt = -1.0;
  density->add_option("--sup-norm", sup_norm_opt,
                      "sup norm for the lower bound (default Lambda)");
  density->add_option("--out", out, "density table path (default stdout)");
  density->add_option("--report", report_path, "bounds record path (default stderr)");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "typicality sweep");
  sweep_cmd->add_option("family", family_path)->required();
  sweep_cmd->add_option("--grid", sweep_opts.grid, "parameter count");
  sweep_cmd->add_option("--n", sweep_opts.n, "orbit length");
  sweep_cmd->add_option("--bins", sweep_opts.bins, "histogram bins");
  sweep_cmd->add_option("--threshold", sweep_opts.threshold, "ks pass threshold");
  sweep_cmd->add_option("--dither", sweep_opts.dither,
                        "orbit dither amplitude (0 disables)");
  sweep_cmd->add_option("--seed", sweep_opts.seed, "dither seed");
  sweep_cmd->add_option("--csv", csv_path, "row output path (default stdout)");
  sweep_cmd->add_option("--summary", summary_path,
                        "summary path (default stderr)");

  CLI::App* nested = app.add_subcommand("nested", "nesting check");
  nested->add_option("family", family_path)->required();
  nested->add_option("--a0", a0, "base parameter")->required();
  nested->add_option("--alpha", alpha, "scale speed")->required();
  nested->add_option("--t1", t1, "comparison parameter")->required();
  nested->add_option("--depth", depth, "word depth");
  nested->add_option("--delta", delta, "image half width (default from file)");
  nested->add_option("--out", out, "report path (default stdout)");

  CLI::App* demo = app.add_subcommand("expand-demo", "graphs of T and E_s T");
  demo->add_option("family", family_path)->required();
  demo->add_option("--a", a, "parameter value")->required();
  demo->add_option("--s", s, "expansion scale");
  demo->add_option("--points", points, "samples per branch");
  demo->add_option("--out", out, "output path (default stdout)");

  CLI::App* examples = app.add_subcommand("examples", "bundled families");
  CLI::App* examples_list = examples->add_subcommand("list", "list names");
  CLI::App* examples_emit = examples->add_subcommand("emit", "write files");
  examples_emit->add_option("name", example_name, "family name");
  bool emit_all = false;
  examples_emit->add_flag("--all", emit_all, "emit every bundled family");
  examples_emit->add_option("--out", out_dir, "output directory");
  examples->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (check->parsed()) {
      return cmd_check(family_path, grid, j_max, j0_max, bins, gamma, n_max, out);
    }
    if (density->parsed()) {
      std::optional<double> sup;
      if (sup_norm_opt > 0.0) sup = sup_norm_opt;
      return cmd_density(family_path, a, bins, sup, out, report_path);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(family_path, sweep_opts, csv_path, summary_path);
    }
    if (nested->parsed()) {
      std::optional<double> d;
      if (delta > 0.0) d = delta;
      return cmd_nested(family_path, a0, alpha, t1, depth, d, out);
    }
    if (demo->parsed()) {
      return cmd_expand_demo(family_path, a, s, points, out);
    }
    if (examples->parsed()) {
      if (examples_emit->parsed() && !emit_all && example_name.empty()) {
        std::cerr << "examples emit: need a family name or --all\n";
        return kExitUsage;
      }
      return cmd_examples(examples_list->parsed(), example_name, emit_all,
                          out_dir);
    }
  } catch (const expmap::Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const expmap::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const expmap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
