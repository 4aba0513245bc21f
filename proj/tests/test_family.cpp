#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "expmap/errors.hpp"
#include "expmap/family.hpp"
#include "expmap/gallery.hpp"
#include "test_util.hpp"

using namespace expmap;
using namespace expmap::testutil;

namespace {

// doubling family: constant in a, tracked point X(a) = a
MapFamily doubling_family() { return gallery_family("doubling"); }

// family with genuine parameter dependence in the branches
MapFamily interior_family() { return gallery_family("interior3"); }

}  // namespace

TEST_CASE("instantiation") {
  const MapFamily F = doubling_family();
  const PiecewiseMap T = F.instantiate(0.3);
  CHECK(T.eval(-0.5) == doctest::Approx(0.0));

  // constant-in-a family: identical maps at different parameters
  const PiecewiseMap T2 = F.instantiate(-0.7);
  for (int i = 1; i < 30; ++i) {
    const double x = -1.0 + 2.0 * (i + 0.41) / 30.0;
    CHECK(T.eval(x) == T2.eval(x));
  }

  CHECK_THROWS_AS(F.instantiate(2.0), Error);
}

TEST_CASE("xi follows the orbit of the tracked point") {
  const MapFamily F = doubling_family();
  CHECK(xi(F, 0.37, 0) == doctest::Approx(0.37));
  // X(0.2) = 0.2 iterates 0.2 -> -0.6 -> -0.2 -> 0.6
  CHECK(xi(F, 0.2, 3) == doctest::Approx(0.6));
  // consistency with a single map evaluation
  const PiecewiseMap T = F.instantiate(0.2, false);
  CHECK(xi(F, 0.2, 1) == doctest::Approx(T.eval(0.2)));
  // orbit through a breakpoint truncates
  CHECK_THROWS_AS(xi(F, -0.5, 2), OrbitTruncated);
}

TEST_CASE("xi_deriv base cases") {
  const MapFamily F = doubling_family();
  // j = 0: X'(a) = 1
  CHECK(xi_deriv(F, 0.23, 0) == doctest::Approx(1.0));
  // branches are constant in a, so xi_j' = 2^j X'
  CHECK(xi_deriv(F, 0.23, 3) == doctest::Approx(8.0));

  // constant point, parameter-dependent branch: xi_1' = dT/da(X)
  const MapFamily G = interior_family().with_point(Expr::constant(0.05));
  const double a = 0.11;
  const double expected =
      G.branch_exprs()[1].eval_da(0.05, a).d;  // X sits in the middle cell
  CHECK(xi_deriv(G, a, 1) == doctest::Approx(expected));
}

TEST_CASE("xi_deriv agrees with centered differences") {
  int checked = 0;
  for (const MapFamily& F : {doubling_family(), interior_family()}) {
    const Interval I = F.param_interval();
    for (int i = 0; i < 40; ++i) {
      const double a = I.lo + (I.hi - I.lo) * (i + 0.5) / 40.0;
      for (int j : {1, 2, 4, 6}) {
        const double h = 1e-5 * std::pow(2.8, -j);
        double d, fd;
        try {
          d = xi_deriv(F, a, j);
          const std::string w0 = point_itinerary(F, a - h, j);
          const std::string w1 = point_itinerary(F, a + h, j);
          if (w0 != w1) continue;  // straddles a parameter-partition boundary
          fd = (xi(F, a + h, j) - xi(F, a - h, j)) / (2 * h);
        } catch (const Error&) {
          continue;
        }
        CHECK(std::fabs(d - fd) <= 1e-5 * (1.0 + std::fabs(d)));
        ++checked;
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("parameter partition") {
  const MapFamily F = doubling_family();
  // depth 0: the whole interval
  const ParamPartition q0 = param_partition(F, 0);
  REQUIRE(q0.cells.size() == 1);
  CHECK(q0.cells[0].left == doctest::Approx(-0.9));
  CHECK(q0.cells[0].right == doctest::Approx(0.9));

  // X(a) = a crosses the breakpoint 0 at a = 0
  const ParamPartition q1 = param_partition(F, 1);
  REQUIRE(q1.cells.size() == 2);
  CHECK(q1.cells[0].right == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(q1.cells[1].left == doctest::Approx(0.0).epsilon(1e-9));

  // refinement property: every deeper cell sits inside a coarser one
  const ParamPartition q2 = param_partition(F, 2);
  CHECK(q2.cells.size() >= q1.cells.size());
  for (const ParamCell& fine : q2.cells) {
    int parents = 0;
    for (const ParamCell& coarse : q1.cells) {
      if (fine.left >= coarse.left - 1e-9 && fine.right <= coarse.right + 1e-9) {
        ++parents;
      }
    }
    CHECK(parents == 1);
  }
  // itineraries are constant per cell
  for (const ParamCell& cell : q2.cells) {
    const double third = cell.left + (cell.right - cell.left) / 3.0;
    CHECK(point_itinerary(F, third, 2) == cell.itinerary);
  }
}

TEST_CASE("ratio report") {
  // X(a) = a, branches constant in a: xi_j' / (T^j)'(X) is exactly 1
  const Assumption1Report r = check_assumption_1(doubling_family(), 8, 32);
  CHECK_FALSE(r.degenerate);
  CHECK(r.stabilized);
  CHECK(r.per_depth[0].ratio_min == doctest::Approx(1.0));
  for (int j = 1; j <= 8; ++j) {
    CHECK(r.per_depth[j].ratio_min == doctest::Approx(1.0));
    CHECK(r.per_depth[j].ratio_max == doctest::Approx(1.0));
  }

  // constant point and constant-in-a branches: the ratio degenerates to 0
  const MapFamily flat =
      gallery_family("full3").with_point(Expr::constant(0.19));
  const Assumption1Report d = check_assumption_1(flat, 6, 16);
  CHECK(d.degenerate);
  CHECK(d.per_depth[0].ratio_max == doctest::Approx(0.0));
}

TEST_CASE("growth condition") {
  // doubling family: sup |dT/da| = 0 and L = 0, so j0 = 0 passes with
  // margin 0.99 |X'| = 0.99
  const Assumption2Report r = check_assumption_2(doubling_family(), 0, 512);
  CHECK(r.pass);
  CHECK(r.lhs == doctest::Approx(0.99));
  CHECK(r.rhs == doctest::Approx(0.0));

  // scaled family: expansion makes some j0 pass
  const MapFamily beta = gallery_family("fig1beta");
  bool found = false;
  for (int j0 = 0; j0 <= 3 && !found; ++j0) {
    const Assumption2Report rb = check_assumption_2(beta, j0, 256);
    if (rb.pass) {
      found = true;
      CHECK(j0 <= 2);
    }
  }
  CHECK(found);
}

TEST_CASE("margins do not shrink under boosting") {
  // restrict to a subinterval where the depth-2 itinerary of X is constant
  const Interval sub{0.0, 0.1};
  const MapFamily F = interior_family().with_point(
      interior_family().point_expr(), sub);
  const Assumption2Report before = check_assumption_2(F, 0, 256);
  const MapFamily boosted = boost_point(F, 2, sub);
  const Assumption2Report after = check_assumption_2(boosted, 0, 256);
  // |xi_2'| grew by roughly lambda^2, so the margin must not decrease
  CHECK(after.margin >= before.margin);
  CHECK(after.lhs > before.lhs);
}

TEST_CASE("boosting composes the point with the map") {
  const MapFamily F = doubling_family();
  // j = 0 returns the family unchanged
  const MapFamily same = boost_point(F, 0);
  CHECK(same.point_expr().same_tree(F.point_expr()));

  // on (0.1, 0.4) the itinerary of X is constant for two steps
  const Interval sub{0.1, 0.4};
  const MapFamily boosted = boost_point(F, 2, sub);
  for (int i = 0; i < 12; ++i) {
    const double a = sub.lo + (sub.hi - sub.lo) * (i + 0.5) / 12.0;
    for (int k : {0, 1, 2}) {
      CHECK(xi(boosted, a, k) == doctest::Approx(xi(F, a, 2 + k)).epsilon(1e-12));
    }
  }

  // the itinerary changes across a = 0, so boosting the whole interval fails
  CHECK_THROWS_AS(boost_point(F, 1), NonSmoothPoint);
}

TEST_CASE("density bounds per parameter") {
  const DensityBoundsReport r =
      check_density_bounds(doubling_family(), 5, 512, 0.4);
  CHECK(r.pass);
  for (const auto& row : r.rows) {
    CHECK(row.min == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(row.max == doctest::Approx(0.5).epsilon(1e-6));
  }

  // invariant-subinterval control: density degenerates, gamma flags it
  const DensityBoundsReport bad =
      check_density_bounds(gallery_family("negctrl"), 3, 512, 0.01);
  CHECK_FALSE(bad.pass);
  CHECK(bad.min_over_grid < 0.01);
  for (const auto& row : bad.rows) {
    CHECK(row.support_min > 0.0);  // positive on its support
  }
}

TEST_CASE("density bounds are stable under bin refinement") {
  const MapFamily beta = gallery_family("fig1beta");
  const DensityBoundsReport coarse = check_density_bounds(beta, 3, 1 << 11, 0.01);
  const DensityBoundsReport fine = check_density_bounds(beta, 3, 1 << 12, 0.01);
  for (std::size_t i = 0; i < coarse.rows.size(); ++i) {
    CHECK(std::fabs(coarse.rows[i].min - fine.rows[i].min) < 0.05);
    CHECK(std::fabs(coarse.rows[i].max - fine.rows[i].max) < 0.05);
  }
}

TEST_CASE("family audits reject bad declarations") {
  // eta declared too small for the actual parameter dependence
  CHECK_THROWS_AS(
      MapFamily({0.0, 0.3},
                {Expr::parse("-1"), Expr::parse("(-1)/3"), Expr::parse("1/3"),
                 Expr::parse("1")},
                {Expr::parse("(2.7 + 0.05 * a) * (x + 2/3)"),
                 Expr::parse("(2.7 + 0.05 * a) * x"),
                 Expr::parse("(2.7 + 0.05 * a) * (x - 2/3)")},
                Expr::parse("0.1"), FamilyBounds{2.7, 2.72, 0.0, 1e-6, 0.0}),
      InvalidMap);
  // lambda must exceed 1
  CHECK_THROWS_AS(MapFamily({0.0, 1.0}, {Expr::parse("-1"), Expr::parse("1")},
                            {Expr::parse("0.5 * x")}, Expr::parse("0"),
                            FamilyBounds{0.5, 0.5, 0.0, 0.0, 0.0}),
                  SemanticError);
}
