#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "expmap/covering.hpp"
#include "expmap/errors.hpp"
#include "expmap/expand.hpp"
#include "expmap/gallery.hpp"
#include "expmap/interval_set.hpp"
#include "test_util.hpp"

using namespace expmap;
using namespace expmap::testutil;

TEST_CASE("interval union normalization") {
  const IntervalUnion u =
      IntervalUnion::of({{0.2, 0.5}, {-0.5, 0.1}, {0.1 - 1e-13, 0.15}});
  REQUIRE(u.component_count() == 2);
  CHECK(u.total_length() == doctest::Approx(0.95));
  CHECK(u.contains_point(0.0));
  CHECK_FALSE(u.contains_point(0.17));
  CHECK(u.contains_interval({-0.4, 0.12}, 1e-12));
  CHECK_FALSE(u.contains_interval({-0.4, 0.3}, 1e-12));
}

TEST_CASE("complement within the domain") {
  const IntervalUnion u = IntervalUnion::of({{-1.0, -0.25}, {0.25, 1.0}});
  const IntervalUnion gap = u.complement();
  REQUIRE(gap.component_count() == 1);
  CHECK(gap.total_length() == doctest::Approx(0.5));

  // overlapping pieces cover everything
  const IntervalUnion full = IntervalUnion::of({{-1.0, 0.1}, {-0.2, 1.0}});
  CHECK(full.complement().empty());

  // endpoints within merge tolerance snap onto the domain edge
  const IntervalUnion nearly =
      IntervalUnion::of({{-1.0 + 5e-13, 1.0 - 5e-13}});
  CHECK(nearly.complement().total_length() == doctest::Approx(0.0));
}

TEST_CASE("tilde image pushes only full cells") {
  const PiecewiseMap T = make_doubling();
  const IntervalUnion left(Interval{-1.0, 0.0});
  const IntervalUnion image = tilde_image(T, left);
  REQUIRE(image.component_count() == 1);
  CHECK(image.parts()[0].lo == doctest::Approx(-1.0));
  CHECK(image.parts()[0].hi == doctest::Approx(1.0));

  // no full cell inside: empty result
  CHECK(tilde_image(T, IntervalUnion(Interval{-0.7, 0.6})).empty());
}

TEST_CASE("tilde image is below the ordinary image") {
  for (const char* name : {"doubling", "full3", "interior3", "mixedcase",
                           "negctrl", "forbidden", "fig1beta"}) {
    const MapFamily family = gallery_family(name);
    const Interval I = family.param_interval();
    const PiecewiseMap T = family.instantiate(0.5 * (I.lo + I.hi), false);
    for (int k = 0; k < T.branch_count(); ++k) {
      const Branch& br = T.branch(k);
      IntervalUnion tilde(Interval{br.left, br.right});
      IntervalUnion ordinary = tilde;
      for (int n = 1; n <= 8; ++n) {
        tilde = tilde_image(T, tilde);
        ordinary = map_image(T, ordinary);
        CHECK(tilde.subset_of(ordinary, 1e-9));
      }
    }
  }
}

TEST_CASE("tilde image is monotone in the set") {
  const MapFamily family = gallery_family("fig1beta");
  const PiecewiseMap T = family.instantiate(1.15, false);
  const IntervalUnion small(Interval{-0.8, 0.1});
  const IntervalUnion big = IntervalUnion::of({{-0.9, 0.2}, {0.4, 0.9}});
  CHECK(tilde_image(T, small).subset_of(tilde_image(T, big), 1e-12));
}

TEST_CASE("weak covering times") {
  const PiecewiseMap T = make_doubling();
  const CoveringResult left = weakly_covering_N(T, {-1.0, 0.0}, 16);
  CHECK(left.n == 1);
  const CoveringResult right = weakly_covering_N(T, {0.0, 1.0}, 16);
  CHECK(right.n == 1);
  CHECK_THROWS_AS(weakly_covering_N(T, {-0.5, 0.5}, 16), Error);

  const Assumption5Report r2 = check_assumption_5(T, 16);
  CHECK(r2.max_n == 1);

  const MapFamily full3 = gallery_family("full3");
  const Assumption5Report r3 =
      check_assumption_5(full3.instantiate(0.0, false), 16);
  CHECK(r3.max_n == 1);
}

TEST_CASE("invariant subinterval defeats covering") {
  const MapFamily family = gallery_family("negctrl");
  const PiecewiseMap T = family.instantiate(0.0, false);
  // the middle cell stays inside (0,1) forever
  CHECK_THROWS_AS(weakly_covering_cell(T, 1, 64), NotCoveringWithin);
  CHECK_THROWS_AS(check_assumption_5(T, 64), NotCoveringWithin);
}

TEST_CASE("covering survives the expansion operator") {
  const MapFamily family = gallery_family("fig1beta");
  const PiecewiseMap T = family.instantiate(1.15, false);
  for (double s : {1.0, 1.1}) {
    const PiecewiseMap E = expand_map(T, s);
    // cellwise: T(P) inside E_s T(P), so the tilde chain is monotone
    for (int k = 0; k < T.branch_count(); ++k) {
      const Branch& br = T.branch(k);
      const IntervalUnion u(Interval{br.left, br.right});
      CHECK(tilde_image(T, u).subset_of(tilde_image(E, u), 1e-9));
    }
    const Assumption5Report before = check_assumption_5(T, 32);
    const Assumption5Report after = check_assumption_5(E, 32);
    for (std::size_t i = 0; i < before.cells.size(); ++i) {
      CHECK(after.cells[i].n <= before.cells[i].n);
    }
  }
}

TEST_CASE("large image check") {
  // full-branch map with slope 3 and one step: images are (-1,1), and
  // 0.6 > 1/(3-1)
  const MapFamily full3 = gallery_family("full3");
  const Assumption6Report six = check_assumption_6(full3, 1, 0.6, 5);
  CHECK(six.images_ok);
  CHECK(six.pass);
  CHECK(six.observed_inf_deriv == doctest::Approx(3.0).epsilon(1e-6));

  // slope 2 with m = 1 needs delta > 1, impossible for delta < 1
  const MapFamily doubling = gallery_family("doubling");
  const Assumption6Report fail = check_assumption_6(doubling, 1, 0.9, 5);
  CHECK(fail.images_ok);
  CHECK_FALSE(fail.pass);
  CHECK(fail.required_inf_deriv == doctest::Approx(1.0 + 1.0 / 0.9));
  CHECK(fail.deriv_margin < 0.0);

  // doubling passes at m = 2 with delta = 0.4: inf |(T^2)'| = 4 > 1 + 1/0.4
  const Assumption6Report two = check_assumption_6(doubling, 2, 0.4, 5);
  CHECK(two.pass);
  CHECK(two.observed_inf_deriv == doctest::Approx(4.0).epsilon(1e-6));
}
