#include "rfon/averaging.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

#include "rfon/gauss_hermite.hpp"
#include "rfon/parallel.hpp"

namespace rfon {

std::string averaging_name(const AveragingMode& mode) {
  struct Visitor {
    std::string operator()(const MonteCarloAveraging&) const { return "monte_carlo"; }
    std::string operator()(const GaussHermiteAveraging&) const { return "gauss_hermite"; }
    std::string operator()(const AnalyticAveraging&) const { return "analytic"; }
  };
  return std::visit(Visitor{}, mode);
}

std::size_t disorder_points(const DisorderAverager& averager, std::size_t dims) {
  if (const auto* mc = std::get_if<MonteCarloAveraging>(&averager.mode)) {
    if (mc->samples < 2) throw std::invalid_argument("Monte Carlo averaging needs >= 2 samples");
    return mc->samples;
  }
  if (const auto* gh = std::get_if<GaussHermiteAveraging>(&averager.mode)) {
    if (dims > kMaxGaussHermiteDims)
      throw std::invalid_argument("Gauss-Hermite averaging is limited to V*N <= 8, got " +
                                  std::to_string(dims));
    if (gh->nodes < 1) throw std::invalid_argument("Gauss-Hermite needs >= 1 node");
    return tensor_size(gh->nodes, dims);
  }
  throw std::invalid_argument("analytic averaging has no sample points; use closed-form statistics");
}

DisorderSample disorder_point(const Lattice& lattice, int components,
                              const DisorderAverager& averager, std::size_t i, double* weight) {
  if (const auto* mc = std::get_if<MonteCarloAveraging>(&averager.mode)) {
    if (weight) *weight = 1.0;
    return draw_disorder(lattice, components, mc->base_seed, i);
  }
  const auto& gh = std::get<GaussHermiteAveraging>(averager.mode);
  const std::size_t dims = lattice.volume() * static_cast<std::size_t>(components);
  thread_local int cached_nodes = -1;
  thread_local GaussHermiteRule rule;
  if (cached_nodes != gh.nodes) {
    rule = gauss_hermite(gh.nodes);
    cached_nodes = gh.nodes;
  }
  std::vector<double> point(dims);
  const double w = tensor_point(rule, dims, i, point.data());
  if (weight) *weight = w;
  return DisorderSample(lattice, components, std::move(point), 0, i);
}

JackknifeResult CollectedStatistics::reduce(const Estimator& estimator) const {
  auto shifted = [&](std::span<const cplx> means) {
    std::vector<cplx> m(means.begin(), means.end());
    for (std::size_t s = 0; s < m.size(); ++s) m[s] += reference[s];
    return estimator(m);
  };
  return jackknife(blocks, shifted);
}

JackknifeResult CollectedStatistics::reduce_centered(
    const std::function<std::vector<double>(std::span<const cplx>, std::span<const cplx>)>&
        estimator) const {
  auto wrapped = [&](std::span<const cplx> means) { return estimator(means, reference); };
  return jackknife(blocks, wrapped);
}

CollectedStatistics collect_statistics(const Lattice& lattice, int components,
                                       const DisorderAverager& averager,
                                       const SampleStatistic& statistic, bool keep_rows) {
  const std::size_t dims = lattice.volume() * static_cast<std::size_t>(components);
  const std::size_t n = disorder_points(averager, dims);
  const bool resampled = std::holds_alternative<MonteCarloAveraging>(averager.mode);

  CollectedStatistics out;
  out.samples = n;
  const auto first = disorder_point(lattice, components, averager, 0, nullptr);
  out.reference = statistic(first, 0);
  const std::size_t m = out.reference.size();

  const auto bounds = block_bounds(n, averager.max_blocks);
  const std::size_t nb = bounds.size() - 1;
  out.blocks.sums.assign(nb, std::vector<cplx>(m));
  out.blocks.weights.assign(nb, 0.0);
  out.blocks.resampled = resampled;
  if (keep_rows) out.rows.resize(n);

  parallel_for(nb, averager.workers, [&](std::size_t b) {
    const std::size_t len = bounds[b + 1] - bounds[b];
    std::vector<std::vector<cplx>> terms(m, std::vector<cplx>(len));
    std::vector<double> weights(len);
    for (std::size_t i = bounds[b]; i < bounds[b + 1]; ++i) {
      double w = 1.0;
      auto sample = disorder_point(lattice, components, averager, i, &w);
      auto row = i == 0 ? out.reference : statistic(sample, i);
      if (row.size() != m) throw std::runtime_error("statistic changed length between samples");
      for (std::size_t s = 0; s < m; ++s) terms[s][i - bounds[b]] = w * (row[s] - out.reference[s]);
      weights[i - bounds[b]] = w;
      if (keep_rows) out.rows[i] = std::move(row);
    }
    for (std::size_t s = 0; s < m; ++s) out.blocks.sums[b][s] = pairwise_sum(terms[s]);
    out.blocks.weights[b] = pairwise_sum(weights);
  });
  return out;
}

AverageResult disorder_average(const Engine& engine, const DisorderAverager& averager,
                               const std::function<double(const DisorderSample&)>& statistic) {
  const auto& lattice = engine_lattice(engine);
  const int components = engine_params(engine).N;
  auto collected = collect_statistics(
      lattice, components, averager,
      [&](const DisorderSample& g, std::size_t) { return std::vector<cplx>{statistic(g)}; });
  const auto jk = collected.reduce([](std::span<const cplx> m) { return std::vector<double>{m[0].real()}; });
  AverageResult out;
  out.mean = jk.plain[0];
  out.samples = collected.samples;
  if (collected.blocks.resampled) out.stderr = jk.stderr[0];
  return out;
}

void write_rows_csv(const CollectedStatistics& collected, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "sample,statistic,re,im\n";
  for (std::size_t i = 0; i < collected.rows.size(); ++i)
    for (std::size_t s = 0; s < collected.rows[i].size(); ++s)
      out << i << ',' << s << ',' << collected.rows[i][s].real() << ','
          << collected.rows[i][s].imag() << '\n';
}

}  // namespace rfon
