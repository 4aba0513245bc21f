#pragma once

#include <stdexcept>
#include <string>

namespace expmap {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation requested at (or within tolerance of) a breakpoint, where the
// map is left undefined.
struct BreakpointHit : Error {
  BreakpointHit(double x, double breakpoint)
      : Error("map undefined at breakpoint: x = " + std::to_string(x) +
              ", breakpoint = " + std::to_string(breakpoint)),
        x(x),
        breakpoint(breakpoint) {}
  double x;
  double breakpoint;
};

// Map data failed validation (breakpoint order, expansion bounds, image
// containment, monotonicity).
struct InvalidMap : Error {
  using Error::Error;
};

// Partition refinement would exceed the configured cell budget.
struct CellCountExceeded : Error {
  using Error::Error;
};

// A bracketed monotone solve lost its bracket; usually means the branch
// data is not actually monotone.
struct RootSolveFailure : Error {
  using Error::Error;
};

// An orbit reached a breakpoint before completing the requested length.
// `step` is the index of the orbit point that sits on the breakpoint.
struct OrbitTruncated : Error {
  explicit OrbitTruncated(int step)
      : Error("orbit hit a breakpoint at step " + std::to_string(step)),
        step(step) {}
  int step;
};

// Parameter value sits on (or within tolerance of) a boundary of the
// smoothness partition in parameter space.
struct NonSmoothPoint : Error {
  using Error::Error;
};

// Stationary-density iteration failed to settle; typically signals
// near-decomposable dynamics.
struct NonConvergence : Error {
  using Error::Error;
};

// Requested expansion scale pushes a branch image outside [-1,1].
struct ScaleTooLarge : Error {
  using Error::Error;
};

// Perturbation constants are not defined for the given data
// (delta <= 1/(lambda-1)).
struct Infeasible : Error {
  using Error::Error;
};

// Iterated cell images did not cover the interval within the step budget.
struct NotCoveringWithin : Error {
  explicit NotCoveringWithin(int n_max, double residual)
      : Error("images failed to cover within " + std::to_string(n_max) +
              " steps (residual length " + std::to_string(residual) + ")"),
        n_max(n_max),
        residual(residual) {}
  int n_max;
  double residual;
};

// A word admissible for one map has no counterpart cylinder in another.
struct MissingCounterpart : Error {
  explicit MissingCounterpart(std::string word_display)
      : Error("no cylinder with word [" + word_display + "]"),
        word(std::move(word_display)) {}
  std::string word;
};

// Text could not be parsed; positions are 1-based.
struct ParseError : Error {
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line(line),
        column(column) {}
  int line;
  int column;
};

// Structurally valid input with inconsistent content.
struct SemanticError : Error {
  using Error::Error;
};

}  // namespace expmap
