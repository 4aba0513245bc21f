#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>

#include "expmap/map.hpp"

namespace expmap {

// Ulam matrix on a uniform grid of `bins` cells over [-1,1]:
// entry (i,j) is the fraction of bin j that T maps into bin i, so columns
// sum to 1.
struct TransferMatrix {
  int bins = 0;
  Eigen::SparseMatrix<double> matrix;
};

// Entries are computed from exact monotone-branch preimage lengths
// (bin boundaries pulled back through each branch), not sampling.
TransferMatrix ulam_matrix(const PiecewiseMap& map, int bins);

// Piecewise constant probability density on the same grid; `mass` sums
// to 1, density values are mass * bins / 2.
struct UlamDensity {
  int bins = 0;
  Eigen::VectorXd mass;

  double value(int i) const { return mass[i] * bins / 2.0; }
  double bin_center(int i) const { return -1.0 + 2.0 * (i + 0.5) / bins; }
};

// Power iteration from the uniform vector until successive iterates differ
// by less than `tol` in L1. Throws NonConvergence at the iteration cap,
// which in practice flags near-decomposable dynamics.
UlamDensity stationary_density(const TransferMatrix& transfer,
                               double tol = Tolerances::global().power_iter,
                               int max_iter = 20000);

// L1 residual ||M d - d||_1 of a density under the matrix.
double fixed_point_residual(const TransferMatrix& transfer,
                            const UlamDensity& density);

struct DensityBounds {
  double min = 0.0;          // over every bin
  double max = 0.0;
  double support_min = 0.0;  // over bins with mass above the floor
  double support_fraction = 0.0;
  double total_variation = 0.0;  // observed TV of the bin values
};

DensityBounds density_bounds(const UlamDensity& density,
                             double support_mass_floor = 1e-12);

// Lower density bound 2^-2 * S^-N from the covering time N. The sup norm
// convention is ambiguous in the underlying estimate; S defaults to the
// derivative bound Lambda (the conservative reading) and reports should
// say which was used.
double liverani_lower_bound(const PiecewiseMap& map, int covering_n,
                            std::optional<double> sup_norm = {});

}  // namespace expmap
