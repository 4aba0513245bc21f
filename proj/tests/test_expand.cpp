#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "expmap/covering.hpp"
#include "expmap/errors.hpp"
#include "expmap/expand.hpp"
#include "expmap/gallery.hpp"
#include "test_util.hpp"

using namespace expmap;
using namespace expmap::testutil;

namespace {

Branch make_branch(const char* expr, double left, double right) {
  Branch br;
  br.left = left;
  br.right = right;
  br.f = Expr::parse(expr);
  br.f_left = br.f.eval(left, 0.0);
  br.f_right = br.f.eval(right, 0.0);
  br.increasing = br.f_right >= br.f_left;
  br.affine = br.f.affine_in_x(0.0);
  return br;
}

}  // namespace

TEST_CASE("case formulas") {
  // interior: 0.5 x on (-1,1), s = 1.2 -> 0.6 x
  const Branch interior = make_branch("0.5 * x", -1.0, 1.0);
  const ExpandedBranch e1 = expand_branch(interior, 1.2);
  CHECK(e1.tag == ExpandCase::kInterior);
  CHECK(e1.branch.f.eval(0.5, 0.0) == doctest::Approx(0.3));

  // full image: untouched for every s
  const Branch full = make_branch("x", -1.0, 1.0);
  const ExpandedBranch e2 = expand_branch(full, 1.7);
  CHECK(e2.tag == ExpandCase::kFull);
  CHECK(e2.branch.f.same_tree(full.f));

  // touching -1: 1.5 x + 0.5 on (-1, 0) has image (-1, 0.5); with s = 1.2
  // the formula gives 1.1 f + 0.1, fixing -1 and sending 0.5 to 0.65
  const Branch low = make_branch("1.5 * x + 0.5", -1.0, 0.0);
  const ExpandedBranch e3 = expand_branch(low, 1.2);
  CHECK(e3.tag == ExpandCase::kTouchesLow);
  CHECK(e3.branch.f_left == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(e3.branch.f_right == doctest::Approx(0.65));

  // touching +1 mirrors it
  const Branch high = make_branch("1.5 * x - 0.5", 0.0, 1.0);
  const ExpandedBranch e4 = expand_branch(high, 1.2);
  CHECK(e4.tag == ExpandCase::kTouchesHigh);
  CHECK(e4.branch.f_right == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e4.branch.f_left == doctest::Approx(-0.65));
}

TEST_CASE("admissible scale per case") {
  // image (-0.5, 0.5): s0 = 2
  CHECK(max_scale_branch(make_branch("0.5 * x", -1.0, 1.0)) ==
        doctest::Approx(2.0));
  // full branches are unconstrained
  CHECK(max_scale_branch(make_branch("x", -1.0, 1.0), 1e9) ==
        doctest::Approx(1e9));
  // image (-1, 0.5): (s+1)/2 * 0.5 + (s-1)/2 = 1 at s = 5/3
  CHECK(max_scale_branch(make_branch("1.5 * x + 0.5", -1.0, 0.0)) ==
        doctest::Approx(5.0 / 3.0));
  // exceeding it throws
  CHECK_THROWS_AS(expand_branch(make_branch("1.5 * x + 0.5", -1.0, 0.0), 1.7),
                  ScaleTooLarge);
}

TEST_CASE("identity at s = 1") {
  const MapFamily mixed = gallery_family("mixedcase");
  const PiecewiseMap T = mixed.instantiate(0.5, false);
  const PiecewiseMap E1 = expand_map(T, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double x = -1.0 + 2.0 * (i + 0.31) / 200.0;
    CHECK(E1.eval(x) == T.eval(x));
  }
}

TEST_CASE("expansion preserves breakpoints and grows derivatives") {
  const MapFamily mixed = gallery_family("mixedcase");
  const PiecewiseMap T = mixed.instantiate(0.5, false);
  const double s = 1.2;
  const PiecewiseMap E = expand_map(T, s);
  REQUIRE(E.breakpoints() == T.breakpoints());
  for (int k = 0; k < T.branch_count(); ++k) {
    const ExpandCase tag = classify_branch_image(T.branch(k));
    const double factor = tag == ExpandCase::kInterior ? s
                          : tag == ExpandCase::kFull   ? 1.0
                                                       : 0.5 * (s + 1.0);
    for (int i = 1; i < 16; ++i) {
      const double x = T.branch(k).left +
                       (T.branch(k).right - T.branch(k).left) * i / 16.0;
      CHECK(std::fabs(E.branch_deriv(k, x)) ==
            doctest::Approx(factor * std::fabs(T.branch_deriv(k, x)))
                .epsilon(1e-12));
      CHECK(std::fabs(E.branch_deriv(k, x)) >=
            std::fabs(T.branch_deriv(k, x)) - 1e-12);
    }
  }
}

TEST_CASE("images nest in the scale") {
  const MapFamily mixed = gallery_family("mixedcase");
  const PiecewiseMap T = mixed.instantiate(0.5, false);
  const double scales[] = {1.0, 1.05, 1.1, 1.2};
  for (int k = 0; k < T.branch_count(); ++k) {
    for (int i = 0; i + 1 < 4; ++i) {
      const ExpandedBranch a = expand_branch(T.branch(k), scales[i]);
      const ExpandedBranch b = expand_branch(T.branch(k), scales[i + 1]);
      CHECK(a.branch.image_lo() >= b.branch.image_lo() - 1e-12);
      CHECK(a.branch.image_hi() <= b.branch.image_hi() + 1e-12);
    }
  }
}

TEST_CASE("perturbation constants") {
  const PerturbationConstants c = compute_constants(4.0, 4.0, 1.0, 0.0, 0.9);
  // 2 * (4/3) / (0.9 - 1/3)
  CHECK(c.alpha0 == doctest::Approx(4.70588).epsilon(1e-4));
  CHECK(c.K(1.0) == doctest::Approx((1.0 + 1.0) / 3.0));

  // slope 2: the threshold is 1, no delta below 1 works
  CHECK_THROWS_AS(compute_constants(2.0, 2.0, 0.0, 0.0, 0.99), Infeasible);

  // no parameter dependence: any positive alpha works
  const PerturbationConstants z = compute_constants(3.0, 3.0, 0.0, 0.0, 0.8);
  CHECK(z.alpha0 == doctest::Approx(0.0));
  CHECK(z.K(2.0) == doctest::Approx(1.0));
}

TEST_CASE("perturbed family") {
  const MapFamily F = gallery_family("interior3");
  const PerturbedFamily pf = perturbed_family(F, 0.01, 0.5);
  CHECK(pf.s0 > 1.05);
  CHECK(pf.eps_max == doctest::Approx(std::min(1.0, pf.s0 - 1.0) / 0.5));

  // at a = a0 the scale is 1 and the map is the original
  const PiecewiseMap S0 = pf.family.instantiate(0.01, false);
  const PiecewiseMap T0 = F.instantiate(0.01, false);
  for (int i = 0; i < 100; ++i) {
    const double x = -1.0 + 2.0 * (i + 0.43) / 100.0;
    CHECK(S0.eval(x) == doctest::Approx(T0.eval(x)).epsilon(1e-15));
  }

  // deeper in the window the branches really expand
  const double a1 = 0.01 + pf.eps_max / 2;
  const PiecewiseMap S1 = pf.family.instantiate(a1, false);
  const PiecewiseMap T1 = F.instantiate(a1, false);
  for (int k = 0; k < T1.branch_count(); ++k) {
    CHECK(S1.branch(k).image_hi() > T1.branch(k).image_hi() + 1e-6);
  }

  // all-full families are untouched by the expansion
  const MapFamily full3 = gallery_family("full3");
  const PerturbedFamily pfull = perturbed_family(full3, -0.5, 1.0);
  const double mid = -0.5 + pfull.eps_max / 3;
  const PiecewiseMap Sf = pfull.family.instantiate(mid, false);
  const PiecewiseMap Tf = full3.instantiate(mid, false);
  for (int i = 0; i < 60; ++i) {
    const double x = -1.0 + 2.0 * (i + 0.39) / 60.0;
    CHECK(Sf.eval(x) == Tf.eval(x));
  }

  // the scaled gallery family keeps its covering times under perturbation
  const MapFamily beta = gallery_family("fig1beta");
  const PerturbedFamily pbeta = perturbed_family(beta, 1.14, 0.8);
  const double aa = 1.14 + pbeta.eps_max / 2;
  const Assumption5Report before =
      check_assumption_5(beta.instantiate(aa, false), 32);
  const Assumption5Report after =
      check_assumption_5(pbeta.family.instantiate(aa, false), 32);
  CHECK(after.max_n <= before.max_n);
}

TEST_CASE("expand demo reports containment") {
  const MapFamily mixed = gallery_family("mixedcase");
  const PiecewiseMap T = mixed.instantiate(0.5, false);
  const ExpandDemo demo = expand_demo(T, 1.2, 33);
  REQUIRE(demo.branches.size() == 4);
  for (const auto& g : demo.branches) {
    if (g.tag == ExpandCase::kFull) {
      CHECK(g.expanded_image.lo == doctest::Approx(g.original_image.lo));
      CHECK(g.expanded_image.hi == doctest::Approx(g.original_image.hi));
    } else {
      // strict containment of the original image
      CHECK(g.expanded_image.lo <= g.original_image.lo + 1e-12);
      CHECK(g.expanded_image.hi >= g.original_image.hi - 1e-12);
      CHECK(g.expanded_image.length() > g.original_image.length() + 1e-9);
    }
  }
}
