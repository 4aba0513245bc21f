#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "expmap/covering.hpp"
#include "expmap/density.hpp"
#include "expmap/errors.hpp"
#include "expmap/expand.hpp"
#include "expmap/gallery.hpp"
#include "test_util.hpp"

using namespace expmap;
using namespace expmap::testutil;

TEST_CASE("two-bin doubling matrix") {
  const TransferMatrix M = ulam_matrix(make_doubling(), 2);
  // each half maps onto the whole interval uniformly
  const Eigen::MatrixXd dense = Eigen::MatrixXd(M.matrix);
  CHECK(dense(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dense(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dense(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dense(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("columns are stochastic") {
  for (const char* name : {"doubling", "full3", "interior3", "mixedcase",
                           "negctrl", "forbidden", "fig1beta"}) {
    const MapFamily family = gallery_family(name);
    const Interval I = family.param_interval();
    const PiecewiseMap T = family.instantiate(0.5 * (I.lo + I.hi), false);
    const TransferMatrix M = ulam_matrix(T, 64);
    const Eigen::VectorXd sums =
        Eigen::RowVectorXd::Ones(64) * M.matrix;
    for (int j = 0; j < 64; ++j) {
      CHECK(std::fabs(sums[j] - 1.0) < 1e-12);
    }
  }
  // nonaffine branches exercise the bisection inverse
  const TransferMatrix M = ulam_matrix(make_nonaffine(), 128);
  const Eigen::VectorXd sums = Eigen::RowVectorXd::Ones(128) * M.matrix;
  for (int j = 0; j < 128; ++j) {
    CHECK(std::fabs(sums[j] - 1.0) < 1e-10);
  }
}

TEST_CASE("doubling density is uniform") {
  for (int bins : {64, 512}) {
    const TransferMatrix M = ulam_matrix(make_doubling(), bins);
    const UlamDensity d = stationary_density(M);
    CHECK(d.mass.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < bins; ++i) {
      CHECK(d.value(i) == doctest::Approx(0.5).epsilon(1e-9));
    }
    CHECK(fixed_point_residual(M, d) < 1e-10);
  }
}

TEST_CASE("invariant subinterval produces a degenerate density") {
  const MapFamily family = gallery_family("negctrl");
  const PiecewiseMap T = family.instantiate(0.0, false);
  const UlamDensity d = stationary_density(ulam_matrix(T, 512));
  const DensityBounds b = density_bounds(d);
  CHECK(b.min == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(b.support_min > 0.0);
  CHECK(b.support_fraction < 0.6);  // mass lives on roughly half the domain
  // the mass sits inside (0,1)
  double left_mass = 0.0;
  for (int i = 0; i < 256; ++i) left_mass += d.mass[i];
  CHECK(left_mass < 1e-9);
}

TEST_CASE("density bounds bracket the mean value") {
  for (const char* name : {"doubling", "full3", "fig1beta"}) {
    const MapFamily family = gallery_family(name);
    const Interval I = family.param_interval();
    const PiecewiseMap T = family.instantiate(0.5 * (I.lo + I.hi), false);
    const DensityBounds b = density_bounds(stationary_density(ulam_matrix(T, 256)));
    CHECK(b.min <= 0.5 + 1e-12);
    CHECK(b.max >= 0.5 - 1e-12);
  }
}

TEST_CASE("bin refinement is stable") {
  const MapFamily family = gallery_family("fig1beta");
  const PiecewiseMap T = family.instantiate(1.15, false);
  const UlamDensity coarse = stationary_density(ulam_matrix(T, 1 << 11));
  const UlamDensity fine = stationary_density(ulam_matrix(T, 1 << 12));
  // L1 distance between the two resolutions, on the coarse grid
  double dist = 0.0;
  for (int i = 0; i < coarse.bins; ++i) {
    dist += std::fabs(coarse.mass[i] - fine.mass[2 * i] - fine.mass[2 * i + 1]);
  }
  CHECK(dist < 5e-3);
}

TEST_CASE("expanded maps keep convergent densities") {
  const MapFamily family = gallery_family("fig1beta");
  const PiecewiseMap T = family.instantiate(1.15, false);
  double prev_support_min = 0.0;
  for (double s : {1.0, 1.05, 1.1}) {
    const PiecewiseMap E = expand_map(T, s);
    const UlamDensity d = stationary_density(ulam_matrix(E, 1024));
    const DensityBounds b = density_bounds(d);
    // a common gamma window holds across the scales
    CHECK(b.support_min > 0.05);
    CHECK(b.max < 1.0 / 0.05);
    prev_support_min = b.support_min;
  }
  (void)prev_support_min;
}

TEST_CASE("covering lower bound") {
  const PiecewiseMap T = make_doubling();
  const Assumption5Report cover = check_assumption_5(T, 16);
  const double bound = liverani_lower_bound(T, cover.max_n);
  CHECK(bound == doctest::Approx(0.125));
  const UlamDensity d = stationary_density(ulam_matrix(T, 512));
  CHECK(bound <= density_bounds(d).min + 1e-12);

  // geometric decay in the covering time
  CHECK(liverani_lower_bound(T, 5) == doctest::Approx(0.25 * std::pow(2.0, -5)));
  // explicit sup-norm override
  CHECK(liverani_lower_bound(T, 1, 4.0) == doctest::Approx(0.0625));

  // the bound stays below the computed minimum on the covering gallery maps
  for (const char* name : {"full3", "fig1beta"}) {
    const MapFamily family = gallery_family(name);
    const Interval I = family.param_interval();
    const PiecewiseMap M = family.instantiate(0.5 * (I.lo + I.hi), false);
    const Assumption5Report rep = check_assumption_5(M, 32);
    const UlamDensity dm = stationary_density(ulam_matrix(M, 1024));
    CHECK(liverani_lower_bound(M, rep.max_n) <=
          density_bounds(dm).min + 1e-12);
  }
}
