#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rfon/engines.hpp"
#include "rfon/stats.hpp"

namespace rfon {

/// Independent disorder draws; sample i uses stream (base_seed, i).
struct MonteCarloAveraging {
  std::size_t samples = 1000;
  std::uint64_t base_seed = 1;
};

/// Tensor Gauss-Hermite rule over all V*N fields; only for V*N <= 8.
struct GaussHermiteAveraging {
  int nodes = 20;
};

/// Exact expectation for statistics that are affine (or quadratic) in the disorder;
/// only meaningful with the Gaussian engine.
struct AnalyticAveraging {};

using AveragingMode = std::variant<MonteCarloAveraging, GaussHermiteAveraging, AnalyticAveraging>;

std::string averaging_name(const AveragingMode& mode);

inline constexpr std::size_t kMaxGaussHermiteDims = 8;

struct DisorderAverager {
  AveragingMode mode = MonteCarloAveraging{};
  unsigned workers = 1;
  std::size_t max_blocks = 1000;
};

/// Number of disorder points the averager visits (throws for analytic mode or oversize GH).
std::size_t disorder_points(const DisorderAverager& averager, std::size_t dims);

/// Disorder point i and its weight (1 for Monte Carlo).
DisorderSample disorder_point(const Lattice& lattice, int components,
                              const DisorderAverager& averager, std::size_t i, double* weight);

using SampleStatistic = std::function<std::vector<cplx>(const DisorderSample&, std::size_t index)>;

/// Block sums of a statistic vector over the disorder ensemble. Rows are stored relative to
/// the first row, so constant statistics reduce to exact zeros with zero error.
struct CollectedStatistics {
  BlockSums blocks;
  std::vector<cplx> reference;
  std::size_t samples = 0;
  std::vector<std::vector<cplx>> rows;  // raw rows, only when requested

  /// Jackknife of estimator(means), with the reference added back to the means.
  JackknifeResult reduce(const Estimator& estimator) const;
  /// Jackknife of estimator(centered means, reference) for estimators that exploit centering.
  JackknifeResult reduce_centered(
      const std::function<std::vector<double>(std::span<const cplx>, std::span<const cplx>)>&
          estimator) const;
};

CollectedStatistics collect_statistics(const Lattice& lattice, int components,
                                       const DisorderAverager& averager,
                                       const SampleStatistic& statistic, bool keep_rows = false);

struct AverageResult {
  double mean = 0.0;
  std::optional<double> stderr;  // absent for quadrature
  std::size_t samples = 0;
};

/// E statistic(g) with a jackknife error over disorder samples.
AverageResult disorder_average(const Engine& engine, const DisorderAverager& averager,
                               const std::function<double(const DisorderSample&)>& statistic);

/// Writes collected raw rows as CSV (sample, stat index, Re, Im).
void write_rows_csv(const CollectedStatistics& collected, const std::string& path);

}  // namespace rfon
