#include "expmap/tolerances.hpp"

#include <cstdlib>
#include <string>

namespace expmap {

namespace {

Tolerances make_profile() {
  Tolerances t;
  const char* profile = std::getenv("EXPMAP_TOL_PROFILE");
  if (!profile) return t;
  const std::string p(profile);
  double scale = 1.0;
  if (p == "tight") scale = 0.01;
  if (p == "loose") scale = 100.0;
  t.breakpoint *= scale;
  t.merge *= scale;
  t.containment *= scale;
  t.touch *= scale;
  t.nested_slack *= scale;
  t.cylinder_flag *= scale;
  return t;
}

}  // namespace

const Tolerances& Tolerances::global() {
  static const Tolerances t = make_profile();
  return t;
}

}  // namespace expmap
