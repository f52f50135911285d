#include "rfon/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rfon {
namespace {

template <typename T>
T pairwise(const T* data, std::size_t n) {
  if (n == 0) return T{};
  if (n <= 8) {
    T s = data[0];
    for (std::size_t i = 1; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise(data, half) + pairwise(data + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) { return pairwise(values.data(), values.size()); }
cplx pairwise_sum(std::span<const cplx> values) { return pairwise(values.data(), values.size()); }

double integrated_autocorrelation_time(std::span<const double> series, double window_c) {
  const std::size_t n = series.size();
  if (n < 4) return 0.5;
  const double mean = pairwise_sum(series) / static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = series[i] - mean;

  auto autocov = [&](std::size_t lag) {
    std::vector<double> prod(n - lag);
    for (std::size_t i = 0; i + lag < n; ++i) prod[i] = centered[i] * centered[i + lag];
    return pairwise_sum(prod) / static_cast<double>(n - lag);
  };
  const double c0 = autocov(0);
  if (c0 <= 0.0) return 0.5;

  double tau = 0.5;
  const std::size_t max_lag = n / 4;
  for (std::size_t lag = 1; lag < max_lag; ++lag) {
    tau += autocov(lag) / c0;
    if (static_cast<double>(lag) >= window_c * tau) break;
  }
  return std::max(tau, 0.5);
}

MeanEstimate mean_with_autocorrelation(std::span<const double> series) {
  MeanEstimate out;
  const std::size_t n = series.size();
  if (n == 0) return out;
  out.mean = pairwise_sum(series) / static_cast<double>(n);
  if (n < 2) return out;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (series[i] - out.mean) * (series[i] - out.mean);
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  out.tau_int = integrated_autocorrelation_time(series);
  out.stderr = std::sqrt(var * 2.0 * out.tau_int / static_cast<double>(n));
  return out;
}

std::vector<cplx> BlockSums::means() const {
  const std::size_t m = statistics();
  std::vector<cplx> out(m);
  const double total = pairwise_sum(weights);
  std::vector<cplx> column(sums.size());
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t b = 0; b < sums.size(); ++b) column[b] = sums[b][s];
    out[s] = pairwise_sum(column) / total;
  }
  return out;
}

JackknifeResult jackknife(const BlockSums& blocks, const Estimator& estimator) {
  if (blocks.sums.empty()) throw std::invalid_argument("jackknife needs at least one block");
  JackknifeResult out;
  const auto full_means = blocks.means();
  out.plain = estimator(full_means);
  const std::size_t outputs = out.plain.size();
  out.value = out.plain;
  out.stderr.assign(outputs, 0.0);

  const std::size_t nb = blocks.sums.size();
  if (!blocks.resampled || nb < 2) return out;

  const std::size_t m = blocks.statistics();
  const double total_weight = pairwise_sum(blocks.weights);
  std::vector<cplx> totals(m);
  for (std::size_t s = 0; s < m; ++s) totals[s] = full_means[s] * total_weight;

  // deviations[o][b] = theta_b - theta_full
  std::vector<std::vector<double>> deviations(outputs, std::vector<double>(nb));
  std::vector<cplx> loo(m);
  for (std::size_t b = 0; b < nb; ++b) {
    const double w = total_weight - blocks.weights[b];
    for (std::size_t s = 0; s < m; ++s) loo[s] = (totals[s] - blocks.sums[b][s]) / w;
    auto theta = estimator(loo);
    for (std::size_t o = 0; o < outputs; ++o) deviations[o][b] = theta[o] - out.plain[o];
  }

  const double factor = static_cast<double>(nb - 1);
  for (std::size_t o = 0; o < outputs; ++o) {
    const double mean_dev = pairwise_sum(deviations[o]) / static_cast<double>(nb);
    std::vector<double> sq(nb);
    for (std::size_t b = 0; b < nb; ++b)
      sq[b] = (deviations[o][b] - mean_dev) * (deviations[o][b] - mean_dev);
    out.stderr[o] = std::sqrt(factor / static_cast<double>(nb) * pairwise_sum(sq));
    out.value[o] = out.plain[o] - factor * mean_dev;
  }
  return out;
}

std::vector<std::size_t> block_bounds(std::size_t n, std::size_t max_blocks) {
  const std::size_t nb = std::max<std::size_t>(1, std::min(n, max_blocks));
  std::vector<std::size_t> bounds(nb + 1);
  for (std::size_t b = 0; b <= nb; ++b) bounds[b] = b * n / nb;
  return bounds;
}

}  // namespace rfon
