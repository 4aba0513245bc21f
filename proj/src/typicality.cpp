#include "expmap/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "expmap/covering.hpp"
#include "expmap/errors.hpp"
#include "expmap/parallel.hpp"

namespace expmap {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// deterministic dither in [-amp, amp), a pure function of (seed, step)
double dither_value(std::uint64_t seed, long step, double amp) {
  const std::uint64_t h = splitmix64(seed ^ static_cast<std::uint64_t>(step));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0,1)
  return amp * (2.0 * u - 1.0);
}

// One orbit step under the statistics policy. Returns false when the orbit
// must truncate (second breakpoint hit).
struct OrbitEngine {
  const PiecewiseMap& map;
  std::uint64_t seed;
  double dither = 0.0;
  int hits = 0;

  bool step(double& x, long index) {
    const auto& bps = map.breakpoints();
    auto it = std::upper_bound(bps.begin(), bps.end(), x);
    int k = static_cast<int>(it - bps.begin()) - 1;
    k = std::clamp(k, 0, map.branch_count() - 1);
    const double tol = map.tol().breakpoint;
    // nudge off breakpoints: once per orbit, then truncate
    double left = x - bps[k], right = bps[k + 1] - x;
    if (left < tol || right < tol) {
      if (++hits > 1) return false;
      if (left < tol) {
        x = bps[k] + tol;
      } else {
        x = bps[k + 1] - tol;
      }
      if (k == 0 && x < bps.front() + tol) x = bps.front() + tol;
    }
    double y = map.branch_eval(k, x);
    if (dither > 0.0) y += dither_value(seed, index, dither);
    const double cap = 1.0 - tol;
    x = std::clamp(y, -cap, cap);
    return true;
  }
};

long resolve_burnin(const OrbitOptions& options) {
  if (options.burnin >= 0) return options.burnin;
  return static_cast<long>(std::floor(std::sqrt(static_cast<double>(options.n))));
}

}  // namespace

Eigen::VectorXd OrbitStatistics::mass_over_n() const {
  return n > 0 ? (counts / static_cast<double>(n)).eval() : counts;
}

Eigen::VectorXd OrbitStatistics::normalized() const {
  const double total = counts.sum();
  return total > 0.0 ? (counts / total).eval() : counts;
}

OrbitStatistics orbit_statistics(const MapFamily& family, double a,
                                 const OrbitOptions& options) {
  const PiecewiseMap map = family.instantiate(a, false);
  OrbitStatistics stats;
  stats.a = a;
  stats.n = options.n;
  stats.burnin = std::min<long>(resolve_burnin(options), options.n);
  stats.counts = Eigen::VectorXd::Zero(options.bins);
  OrbitEngine engine{map, options.seed, options.dither, 0};
  double x = family.point(a);
  for (long j = 1; j <= options.n; ++j) {
    if (!engine.step(x, j)) {
      stats.truncated = true;
      break;
    }
    if (j > stats.burnin) {
      int bin = static_cast<int>(std::floor((x + 1.0) * options.bins / 2.0));
      bin = std::clamp(bin, 0, options.bins - 1);
      stats.counts[bin] += 1.0;
      ++stats.kept;
    }
  }
  stats.breakpoint_hits = engine.hits;
  return stats;
}

BirkhoffResult birkhoff_F(const MapFamily& family, double a, Interval B,
                          long n, const OrbitOptions& options) {
  const PiecewiseMap map = family.instantiate(a, false);
  BirkhoffResult result;
  OrbitEngine engine{map, options.seed, options.dither, 0};
  double x = family.point(a);
  for (long j = 1; j <= n; ++j) {
    if (!engine.step(x, j)) {
      result.truncated = true;
      break;
    }
    ++result.used;
    if (x > B.lo && x < B.hi) ++result.hits;
  }
  result.value = n > 0 ? static_cast<double>(result.hits) / n : 0.0;
  return result;
}

double ks_distance(const Eigen::VectorXd& empirical_mass,
                   const UlamDensity& density) {
  if (empirical_mass.size() != density.mass.size()) {
    throw Error("ks_distance needs matching bin grids");
  }
  double cdf_a = 0.0, cdf_b = 0.0, worst = 0.0;
  for (Eigen::Index i = 0; i < empirical_mass.size(); ++i) {
    cdf_a += empirical_mass[i];
    cdf_b += density.mass[i];
    worst = std::max(worst, std::fabs(cdf_a - cdf_b));
  }
  return worst;
}

SweepReport sweep(const MapFamily& family, const SweepOptions& options) {
  SweepReport report;
  report.options = options;
  report.rows.resize(options.grid);

  // Preflight: covering and large-image checks at a few parameters, as
  // warnings only.
  const Interval I = family.param_interval();
  for (double frac : {0.25, 0.5, 0.75}) {
    const double a = I.lo + (I.hi - I.lo) * frac;
    try {
      check_assumption_5(family.instantiate(a, false), options.covering_n_max);
    } catch (const Error& e) {
      report.warnings.push_back("covering check failed at a = " +
                                std::to_string(a) + ": " + e.what());
    }
  }
  if (family.hints().a6_delta) {
    try {
      const Assumption6Report a6 = check_assumption_6(
          family, family.hints().a6_m.value_or(1), *family.hints().a6_delta, 5);
      if (!a6.pass) {
        report.warnings.push_back("large-image check failed (margin " +
                                  std::to_string(a6.deriv_margin) + ")");
      }
    } catch (const Error& e) {
      report.warnings.push_back(std::string("large-image check error: ") +
                                e.what());
    }
  }

  parallel_for(options.grid, [&](int g) {
    SweepRow& row = report.rows[g];
    row.a = I.lo + (I.hi - I.lo) * (g + 0.5) / options.grid;
    OrbitOptions orbit;
    orbit.n = options.n;
    orbit.bins = options.bins;
    orbit.dither = options.dither;
    orbit.seed = options.seed + static_cast<std::uint64_t>(g) * 0x9E3779B9ull;
    try {
      const OrbitStatistics stats = orbit_statistics(family, row.a, orbit);
      if (stats.truncated) row.flags.push_back("truncated");
      const PiecewiseMap map = family.instantiate(row.a, false);
      const UlamDensity density =
          stationary_density(ulam_matrix(map, options.bins));
      const DensityBounds bounds = density_bounds(density);
      row.min_density = bounds.min;
      row.max_density = bounds.max;
      if (bounds.min < options.reference_floor) {
        row.flags.push_back("reference_unreliable");
      }
      row.ks = ks_distance(stats.normalized(), density);
      if (row.ks >= options.threshold) row.flags.push_back("ks_fail");
      row.ok = row.flags.empty();
    } catch (const NonConvergence&) {
      row.flags.push_back("nonconvergent");
      row.ks = std::numeric_limits<double>::quiet_NaN();
    } catch (const Error& e) {
      row.flags.push_back(std::string("error: ") + e.what());
      row.ks = std::numeric_limits<double>::quiet_NaN();
    }
  });

  for (const SweepRow& row : report.rows) {
    if (std::isfinite(row.ks) && row.ks < options.threshold) ++report.passed;
  }
  report.pass_fraction =
      options.grid > 0 ? static_cast<double>(report.passed) / options.grid : 0.0;
  return report;
}

std::string sweep_csv(const SweepReport& report) {
  std::string out = "a,ks,min_density,max_density,flags\n";
  char buf[128];
  for (const SweepRow& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,", row.a, row.ks,
                  row.min_density, row.max_density);
    out += buf;
    if (row.flags.empty()) {
      out += "ok";
    } else {
      for (std::size_t i = 0; i < row.flags.size(); ++i) {
        if (i) out += ';';
        out += row.flags[i];
      }
    }
    out += '\n';
  }
  return out;
}

LimsupReport limsup_bound_check(const MapFamily& family, double a,
                                const std::vector<Interval>& intervals,
                                const std::vector<long>& lengths, double C,
                                double slack, const OrbitOptions& options) {
  LimsupReport report;
  report.a = a;
  report.slack = slack;
  if (C <= 0.0) {
    const PiecewiseMap map = family.instantiate(a, false);
    const UlamDensity density = stationary_density(ulam_matrix(map, 2048));
    const DensityBounds bounds = density_bounds(density);
    C = 1.0 / std::max(bounds.min, 1e-6);
  }
  report.C = C;
  const long n_max = lengths.empty()
                         ? 0
                         : *std::max_element(lengths.begin(), lengths.end());
  // one orbit, prefix counts per interval
  const PiecewiseMap map = family.instantiate(a, false);
  OrbitEngine engine{map, options.seed, options.dither, 0};
  double x = family.point(a);
  std::vector<std::vector<long>> hits(intervals.size(),
                                      std::vector<long>(n_max + 1, 0));
  long reached = 0;
  for (long j = 1; j <= n_max; ++j) {
    if (!engine.step(x, j)) break;
    for (std::size_t b = 0; b < intervals.size(); ++b) {
      hits[b][j] = hits[b][j - 1] + ((x > intervals[b].lo && x < intervals[b].hi) ? 1 : 0);
    }
    reached = j;
  }
  // truncated tails keep their prefix counts
  for (std::size_t b = 0; b < intervals.size(); ++b) {
    for (long j = reached + 1; j <= n_max; ++j) hits[b][j] = hits[b][reached];
  }
  report.pass = true;
  for (std::size_t b = 0; b < intervals.size(); ++b) {
    for (long n : lengths) {
      LimsupReport::Row row;
      row.B = intervals[b];
      row.n = n;
      row.value = n > 0 ? static_cast<double>(hits[b][std::min(n, n_max)]) / n : 0.0;
      row.bound = C * intervals[b].length() + slack;
      row.ok = row.value <= row.bound;
      report.pass = report.pass && row.ok;
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace expmap
