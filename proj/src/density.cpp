#include "expmap/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "expmap/errors.hpp"

namespace expmap {

TransferMatrix ulam_matrix(const PiecewiseMap& map, int bins) {
  if (bins < 2) throw Error("ulam_matrix needs at least 2 bins");
  TransferMatrix result;
  result.bins = bins;
  const double width = 2.0 / bins;
  auto edge = [&](int i) { return -1.0 + width * i; };
  auto bin_of = [&](double y) {
    int i = static_cast<int>(std::floor((y + 1.0) / width));
    return std::clamp(i, 0, bins - 1);
  };

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(bins) * 4);
  for (int k = 0; k < map.branch_count(); ++k) {
    const Branch& br = map.branch(k);
    const double lo = br.image_lo(), hi = br.image_hi();
    if (hi - lo <= 0.0) continue;
    // image-side boundaries: lo, every interior bin edge, hi
    std::vector<double> ys;
    ys.push_back(lo);
    for (int i = bin_of(lo) + 1; i <= bin_of(hi); ++i) {
      const double e = edge(i);
      if (e > lo && e < hi) ys.push_back(e);
    }
    ys.push_back(hi);
    // preimages, ordered along the cell
    std::vector<double> xs;
    xs.reserve(ys.size());
    for (double y : ys) xs.push_back(map.invert_in_branch(k, y));
    if (!br.increasing) std::reverse(xs.begin(), xs.end());
    xs.front() = br.left;
    xs.back() = br.right;
    // each x-segment maps into one target bin; spread its length over the
    // source bins it crosses
    for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
      const double xa = xs[s], xb = xs[s + 1];
      if (xb - xa <= 0.0) continue;
      const std::size_t seg = br.increasing ? s : xs.size() - 2 - s;
      const int target = bin_of(0.5 * (ys[seg] + ys[seg + 1]));
      int j = bin_of(xa);
      double cursor = xa;
      while (cursor < xb) {
        const double j_hi = edge(j + 1);
        const double stop = std::min(xb, j_hi);
        if (stop > cursor) {
          triplets.emplace_back(target, j, (stop - cursor) / width);
        }
        cursor = stop;
        if (cursor >= xb) break;
        ++j;
        if (j >= bins) break;
      }
    }
  }
  result.matrix.resize(bins, bins);
  result.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return result;
}

UlamDensity stationary_density(const TransferMatrix& transfer, double tol,
                               int max_iter) {
  const int bins = transfer.bins;
  Eigen::VectorXd v = Eigen::VectorXd::Constant(bins, 1.0 / bins);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next = transfer.matrix * v;
    const double sum = next.sum();
    if (!(sum > 0.0)) throw NonConvergence("transfer iteration lost all mass");
    next /= sum;
    const double diff = (next - v).lpNorm<1>();
    v = std::move(next);
    if (diff < tol) {
      UlamDensity density;
      density.bins = bins;
      density.mass = std::move(v);
      return density;
    }
  }
  throw NonConvergence("stationary density did not converge within " +
                       std::to_string(max_iter) + " iterations");
}

double fixed_point_residual(const TransferMatrix& transfer,
                            const UlamDensity& density) {
  return (transfer.matrix * density.mass - density.mass).lpNorm<1>();
}

DensityBounds density_bounds(const UlamDensity& density,
                             double support_mass_floor) {
  DensityBounds bounds;
  bounds.min = std::numeric_limits<double>::infinity();
  bounds.support_min = std::numeric_limits<double>::infinity();
  int support = 0;
  double prev = 0.0;
  for (int i = 0; i < density.bins; ++i) {
    const double value = density.value(i);
    bounds.min = std::min(bounds.min, value);
    bounds.max = std::max(bounds.max, value);
    if (density.mass[i] > support_mass_floor) {
      bounds.support_min = std::min(bounds.support_min, value);
      ++support;
    }
    if (i) bounds.total_variation += std::fabs(value - prev);
    prev = value;
  }
  if (support == 0) bounds.support_min = 0.0;
  bounds.support_fraction = static_cast<double>(support) / density.bins;
  return bounds;
}

double liverani_lower_bound(const PiecewiseMap& map, int covering_n,
                            std::optional<double> sup_norm) {
  const double s = sup_norm.value_or(map.bounds().Lambda);
  return 0.25 * std::pow(s, -covering_n);
}

}  // namespace expmap
