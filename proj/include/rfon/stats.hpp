#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rfon {

using cplx = std::complex<double>;

/// Fixed-tree pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);
cplx pairwise_sum(std::span<const cplx> values);

struct MeanEstimate {
  double mean = 0.0;
  double stderr = 0.0;
  double tau_int = 0.5;
};

/// Integrated autocorrelation time with Sokal's automatic window (W >= c * tau).
double integrated_autocorrelation_time(std::span<const double> series, double window_c = 6.0);

/// Sample mean with an error inflated by 2 * tau_int.
MeanEstimate mean_with_autocorrelation(std::span<const double> series);

/// Per-block weighted sums of a vector of statistics. Blocks are contiguous ranges of
/// samples; quadrature rules produce a single deterministic "block" set without resampling.
struct BlockSums {
  std::vector<std::vector<cplx>> sums;  // [block][statistic]
  std::vector<double> weights;          // [block]
  bool resampled = true;

  std::size_t statistics() const { return sums.empty() ? 0 : sums.front().size(); }
  std::vector<cplx> means() const;
};

using Estimator = std::function<std::vector<double>(std::span<const cplx> means)>;

struct JackknifeResult {
  std::vector<double> value;   // bias-corrected when resampled
  std::vector<double> stderr;  // zeros when not resampled
  std::vector<double> plain;   // estimator applied to the full means
};

/// Delete-one-block jackknife of an arbitrary function of means.
JackknifeResult jackknife(const BlockSums& blocks, const Estimator& estimator);

/// Split [0, n) into at most max_blocks contiguous blocks; returns the block start offsets
/// (size = blocks + 1).
std::vector<std::size_t> block_bounds(std::size_t n, std::size_t max_blocks);

}  // namespace rfon
