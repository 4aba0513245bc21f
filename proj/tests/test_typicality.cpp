#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "expmap/density.hpp"
#include "expmap/errors.hpp"
#include "expmap/gallery.hpp"
#include "expmap/typicality.hpp"

using namespace expmap;

TEST_CASE("birkhoff frequencies") {
  const MapFamily F = gallery_family("doubling");
  OrbitOptions opts;
  opts.n = 100000;

  // the whole interval is always hit
  const BirkhoffResult whole = birkhoff_F(F, 0.2, {-1.0, 1.0}, 10000, opts);
  CHECK_FALSE(whole.truncated);
  CHECK(whole.value == doctest::Approx(1.0));

  // a width-zero window is never hit
  CHECK(birkhoff_F(F, 0.2, {0.3, 0.3}, 1000, opts).value ==
        doctest::Approx(0.0));

  // uniform invariant density: half the mass sits in (0,1)
  const BirkhoffResult half = birkhoff_F(F, 0.2, {0.0, 1.0}, 100000, opts);
  CHECK(half.value == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("frequencies are additive over disjoint windows") {
  const MapFamily F = gallery_family("doubling");
  OrbitOptions opts;
  const long n = 20000;
  const double f1 = birkhoff_F(F, 0.37, {-0.8, -0.2}, n, opts).value;
  const double f2 = birkhoff_F(F, 0.37, {-0.2, 0.4}, n, opts).value;
  const double f12 = birkhoff_F(F, 0.37, {-0.8, 0.4}, n, opts).value;
  CHECK(f1 + f2 == doctest::Approx(f12).epsilon(1e-3));
  CHECK(f1 >= 0.0);
  CHECK(f1 <= 1.0);
}

TEST_CASE("ks distance basics") {
  const MapFamily F = gallery_family("doubling");
  const PiecewiseMap T = F.instantiate(0.2, false);
  const UlamDensity d = stationary_density(ulam_matrix(T, 256));

  // identical distributions
  CHECK(ks_distance(d.mass, d) == doctest::Approx(0.0));

  // point mass at the domain center against the uniform density: gap 1/2
  Eigen::VectorXd point = Eigen::VectorXd::Zero(256);
  point[128] = 1.0;
  CHECK(ks_distance(point, d) == doctest::Approx(0.5).epsilon(0.01));

  // stratified draws from the density itself stay close
  const int samples = 100000;
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(256);
  {
    // inverse CDF of the bin masses at stratified levels
    Eigen::VectorXd cdf(256);
    double acc = 0.0;
    for (int i = 0; i < 256; ++i) {
      acc += d.mass[i];
      cdf[i] = acc;
    }
    int bin = 0;
    for (int s = 0; s < samples; ++s) {
      const double u = (s + 0.5) / samples;
      while (bin < 255 && cdf[bin] < u) ++bin;
      hist[bin] += 1.0 / samples;
    }
  }
  CHECK(ks_distance(hist, d) < 0.01);

  // mismatched grids are rejected
  Eigen::VectorXd other = Eigen::VectorXd::Zero(128);
  CHECK_THROWS_AS(ks_distance(other, d), Error);
}

TEST_CASE("orbit statistics histogram the tail of the orbit") {
  const MapFamily F = gallery_family("doubling");
  OrbitOptions opts;
  opts.n = 50000;
  opts.bins = 512;
  const OrbitStatistics stats = orbit_statistics(F, 0.33, opts);
  CHECK(stats.burnin == long(std::floor(std::sqrt(50000.0))));
  CHECK(stats.kept == opts.n - stats.burnin);
  CHECK(stats.normalized().sum() == doctest::Approx(1.0));
  CHECK(stats.mass_over_n().sum() ==
        doctest::Approx(double(stats.kept) / opts.n));
  // uniform sanity: no bin grossly overweight
  CHECK(stats.normalized().maxCoeff() < 0.05);
}

TEST_CASE("the exact doubling orbit needs the dither") {
  const MapFamily F = gallery_family("doubling");
  OrbitOptions raw;
  raw.n = 50000;
  raw.dither = 0.0;
  // binary-exact iteration drains the orbit onto the breakpoint
  const OrbitStatistics collapsed = orbit_statistics(F, 0.2, raw);
  CHECK(collapsed.truncated);

  OrbitOptions dithered = raw;
  dithered.dither = 1e-14;
  const OrbitStatistics alive = orbit_statistics(F, 0.2, dithered);
  CHECK_FALSE(alive.truncated);
  CHECK(alive.kept == dithered.n - alive.burnin);
}

TEST_CASE("sweep over a small grid") {
  const MapFamily F = gallery_family("doubling");
  SweepOptions opts;
  opts.grid = 10;
  opts.n = 20000;
  opts.bins = 512;
  opts.threshold = 0.05;
  const SweepReport report = sweep(F, opts);
  REQUIRE(report.rows.size() == 10);
  CHECK(report.warnings.empty());
  for (const SweepRow& row : report.rows) {
    CHECK(row.ks < 0.05);
    CHECK(row.min_density == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(row.ok);
  }
  CHECK(report.passed == 10);
  CHECK(report.pass_fraction == doctest::Approx(1.0));

  // byte-identical reruns
  const SweepReport again = sweep(F, opts);
  CHECK(sweep_csv(report) == sweep_csv(again));

  // csv shape: header + one row per grid point
  const std::string csv = sweep_csv(report);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
  CHECK(csv.rfind("a,ks,min_density,max_density,flags\n", 0) == 0);
}

TEST_CASE("sweep flags unreliable references") {
  const MapFamily F = gallery_family("negctrl");
  SweepOptions opts;
  opts.grid = 3;
  opts.n = 20000;
  opts.bins = 256;
  const SweepReport report = sweep(F, opts);
  CHECK_FALSE(report.warnings.empty());  // covering preflight fails
  for (const SweepRow& row : report.rows) {
    bool flagged = false;
    for (const std::string& f : row.flags) {
      flagged = flagged || f == "reference_unreliable";
    }
    CHECK(flagged);
  }
}

TEST_CASE("visit frequencies against the window size") {
  const MapFamily F = gallery_family("doubling");
  std::vector<Interval> windows;
  for (int k = 1; k <= 7; ++k) {
    const double w = std::pow(2.0, -k);
    windows.push_back({0.1, 0.1 + w});
  }
  const LimsupReport r =
      limsup_bound_check(F, 0.33, windows, {20000, 100000}, 1.0, 0.01);
  CHECK(r.pass);
  for (const auto& row : r.rows) {
    // uniform density: F_n(B) is about |B|/2, well below C |B| + slack
    CHECK(row.value <= row.bound);
    CHECK(row.value == doctest::Approx(row.B.length() / 2).epsilon(0.5));
  }

  // the whole domain: F_n = 1 <= C * 2 for any C >= 1/2
  const LimsupReport whole =
      limsup_bound_check(F, 0.33, {{-1.0, 1.0}}, {5000}, 0.5, 0.0);
  CHECK(whole.pass);

  // automatic C from the density bounds
  const LimsupReport autoc =
      limsup_bound_check(F, 0.33, {{0.0, 0.5}}, {20000}, -1.0, 0.01);
  CHECK(autoc.C == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(autoc.pass);
}

TEST_CASE("frequencies agree with the invariant measure within the ks gap") {
  const MapFamily F = gallery_family("doubling");
  OrbitOptions opts;
  opts.n = 200000;
  opts.bins = 1024;
  const OrbitStatistics stats = orbit_statistics(F, 0.41, opts);
  const PiecewiseMap T = F.instantiate(0.41, false);
  const UlamDensity d = stationary_density(ulam_matrix(T, 1024));
  const double ks = ks_distance(stats.normalized(), d);
  for (const Interval B : {Interval{-0.5, 0.0}, Interval{0.0, 0.25},
                           Interval{-0.9, 0.8}}) {
    const double fn = birkhoff_F(F, 0.41, B, opts.n, opts).value;
    const double mu = B.length() / 2.0;  // uniform reference
    CHECK(std::fabs(fn - mu) <= 3.0 * ks + 0.01);
  }
}
