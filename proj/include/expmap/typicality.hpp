#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "expmap/density.hpp"
#include "expmap/family.hpp"

namespace expmap {

// Orbit engine policy for statistics runs. Orbits that land within the
// breakpoint tolerance are nudged past the breakpoint once and truncated on
// a second hit. `dither` adds a deterministic, counter-hashed perturbation
// of that amplitude after every step; it is far below every geometric
// tolerance but keeps binary-exact arithmetic (dyadic affine branches) from
// draining the orbit's entropy. Set it to 0 for raw iteration.
struct OrbitOptions {
  long n = 0;              // iterates of interest (after x0)
  long burnin = -1;        // discarded prefix; -1 means floor(sqrt(n))
  int bins = 4096;
  double dither = 1e-14;
  std::uint64_t seed = 0x9E3779B97F4A7C15ull;
};

struct OrbitStatistics {
  double a = 0.0;
  long n = 0;
  long burnin = 0;
  long kept = 0;           // histogrammed iterates
  bool truncated = false;
  int breakpoint_hits = 0;
  Eigen::VectorXd counts;  // per-bin visit counts after burn-in

  // histogram mass normalized by n (documents truncation as missing mass)
  Eigen::VectorXd mass_over_n() const;
  // histogram normalized to total mass 1 (for distribution comparison)
  Eigen::VectorXd normalized() const;
};

OrbitStatistics orbit_statistics(const MapFamily& family, double a,
                                 const OrbitOptions& options);

// Visit frequency of xi_1..xi_n to the interval B.
struct BirkhoffResult {
  double value = 0.0;  // count / n
  long hits = 0;
  long used = 0;       // orbit steps actually taken
  bool truncated = false;
};

BirkhoffResult birkhoff_F(const MapFamily& family, double a, Interval B,
                          long n, const OrbitOptions& options = {});

// Sup distance between the cumulative distributions of a histogram (mass
// per bin, same grid) and an Ulam density.
double ks_distance(const Eigen::VectorXd& empirical_mass,
                   const UlamDensity& density);

struct SweepOptions {
  int grid = 200;
  long n = 200000;
  int bins = 4096;
  double threshold = 0.02;
  double dither = 1e-14;
  std::uint64_t seed = 0x9E3779B97F4A7C15ull;
  int covering_n_max = 64;
  double reference_floor = 1e-6;  // density min below this flags the row
};

struct SweepRow {
  double a = 0.0;
  double ks = 0.0;
  double min_density = 0.0;
  double max_density = 0.0;
  bool ok = false;                  // ks < threshold and reference reliable
  std::vector<std::string> flags;   // truncated, nonconvergent, ...
};

struct SweepReport {
  SweepOptions options;
  std::vector<SweepRow> rows;
  int passed = 0;
  double pass_fraction = 0.0;
  std::vector<std::string> warnings;  // preflight assumption checks
};

// Per-parameter orbit histogram vs Ulam density. Assumption preflight
// failures become warnings, per-parameter failures become row flags;
// neither is fatal.
SweepReport sweep(const MapFamily& family, const SweepOptions& options);

std::string sweep_csv(const SweepReport& report);

// F_n(a) against C |B| for a list of intervals and orbit lengths.
// C <= 0 means "use the reciprocal of the observed density minimum".
struct LimsupReport {
  struct Row {
    Interval B;
    long n = 0;
    double value = 0.0;  // F_n(a; B)
    double bound = 0.0;  // C |B| + slack
    bool ok = false;
  };
  double a = 0.0;
  double C = 0.0;
  double slack = 0.0;
  std::vector<Row> rows;
  bool pass = false;
};

LimsupReport limsup_bound_check(const MapFamily& family, double a,
                                const std::vector<Interval>& intervals,
                                const std::vector<long>& lengths, double C,
                                double slack = 0.01,
                                const OrbitOptions& options = {});

}  // namespace expmap
