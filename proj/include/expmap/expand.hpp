#pragma once

#include <limits>
#include <string>
#include <vector>

#include "expmap/family.hpp"
#include "expmap/map.hpp"

namespace expmap {

// The four rescaling cases, keyed by which domain boundary the closure of
// the branch image touches.
enum class ExpandCase {
  kInterior,    // closure inside (-1,1): f~ = s f
  kFull,        // image equals (-1,1):   f~ = f
  kTouchesLow,  // -1 in the closure:     f~ = (s+1)/2 f + (s-1)/2
  kTouchesHigh  // +1 in the closure:     f~ = (s+1)/2 f - (s-1)/2
};

const char* expand_case_name(ExpandCase c);

ExpandCase classify_branch_image(const Branch& branch,
                                 double touch_tol = Tolerances::global().touch);

struct ExpandedBranch {
  Branch branch;
  ExpandCase tag = ExpandCase::kInterior;
  double scale = 1.0;
};

// Applies the case formula to one branch. Throws ScaleTooLarge when the
// rescaled image leaves [-1,1] (s above the branch's admissible maximum).
ExpandedBranch expand_branch(const Branch& branch, double s,
                             double touch_tol = Tolerances::global().touch);

// Branchwise expansion; breakpoints (and hence the branch partition) are
// untouched.
PiecewiseMap expand_map(const PiecewiseMap& map, double s);

// Largest admissible scale for one branch / the whole map, from the image
// endpoints; full branches are unconstrained and report `ceiling`.
double max_scale_branch(const Branch& branch, double ceiling = 1e9,
                        double touch_tol = Tolerances::global().touch);
double max_scale(const PiecewiseMap& map, double ceiling = 1e9);

// Constants from the admissibility analysis of the perturbation
// s(t) = 1 + alpha t. Feasibility needs delta > 1/(lambda-1); alpha0 uses
// the conservative bound 1 + alpha*eps <= 2 (valid while alpha*eps <= 1):
//   alpha0 = 2 (lambda eta / (lambda-1) + Lambda zeta) / (delta - 1/(lambda-1))
struct PerturbationConstants {
  double lambda = 0.0, Lambda = 0.0, eta = 0.0, zeta = 0.0, delta = 0.0;
  double eps = 0.0;  // as supplied; only K depends on it
  double s0 = std::numeric_limits<double>::infinity();
  double alpha0 = 0.0;

  // speed bound on the pulled-back points: K = (alpha + (1+alpha eps) eta)/(lambda-1)
  double K(double alpha) const {
    return (alpha + (1.0 + alpha * eps) * eta) / (lambda - 1.0);
  }
  // admissible parameter window for a given alpha: min(1, s0-1)/alpha
  double window(double alpha) const {
    return std::min(1.0, s0 - 1.0) / alpha;
  }
};

PerturbationConstants compute_constants(
    double lambda, double Lambda, double eta, double zeta, double delta,
    double eps = 0.0, double s0 = std::numeric_limits<double>::infinity());

// The family a -> E_{1 + (a-a0) alpha} T_a on [a0, a0 + window], window =
// min(1, s0-1)/alpha with s0 taken as the grid minimum of max_scale over
// the usable part of the parameter interval. Case tags must be constant
// in a (audited on the grid; a violation is a hard error).
struct PerturbedFamily {
  MapFamily family;
  double alpha = 0.0;
  double a0 = 0.0;
  double s0 = 0.0;
  double eps_max = 0.0;  // window length actually used
  std::vector<ExpandCase> tags;
};

PerturbedFamily perturbed_family(const MapFamily& family, double a0,
                                 double alpha, int grid = 33);

// Graph samples of each branch of T and E_s T, for the demo output.
struct ExpandDemo {
  struct BranchGraph {
    int branch = 0;
    ExpandCase tag = ExpandCase::kInterior;
    Interval original_image;
    Interval expanded_image;
    std::vector<std::pair<double, double>> original;
    std::vector<std::pair<double, double>> expanded;
  };
  double s = 1.0;
  std::vector<BranchGraph> branches;
};

ExpandDemo expand_demo(const PiecewiseMap& map, double s, int points_per_branch = 64);

}  // namespace expmap
