#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rfon/cumulant.hpp"
#include "rfon/engines.hpp"

namespace rfon {
namespace {

constexpr std::size_t kFourierCacheVolume = 16;
constexpr std::size_t kChunk = 256;

}  // namespace

ExactEnumEngine::ExactEnumEngine(const Lattice& lattice, const ModelParams& params) {
  params.validate();
  if (params.N != 1 || !std::holds_alternative<Spherical>(params.measure))
    throw std::invalid_argument(
        "exact enumeration needs an Ising configuration space (N = 1, spherical measure)");
  const std::size_t v = lattice.volume();
  if (v > kMaxVolume)
    throw std::invalid_argument("exact enumeration limited to V <= 24, got V = " +
                                std::to_string(v));

  auto data = std::make_shared<Data>(Data{lattice, params, std::size_t{1} << v, {}, {}});
  data->exchange_weight.resize(data->configs);
  std::vector<double> phi(v);
  for (std::size_t c = 0; c < data->configs; ++c) {
    for (std::size_t x = 0; x < v; ++x) phi[x] = spin(c, x);
    data->exchange_weight[c] = -params.beta * exchange_energy(phi, 1, params.J, lattice);
  }
  if (v <= kFourierCacheVolume) {
    data->fourier.resize(data->configs * v);
    for (std::size_t c = 0; c < data->configs; ++c) {
      for (std::size_t x = 0; x < v; ++x) phi[x] = spin(c, x);
      auto ft = fourier_forward(std::span<const double>(phi), lattice, 1);
      std::copy(ft.values.begin(), ft.values.end(), data->fourier.begin() + c * v);
    }
  }
  data_ = std::move(data);
}

std::vector<double> ExactEnumEngine::configuration(std::size_t c) const {
  std::vector<double> phi(data_->lattice.volume());
  for (std::size_t x = 0; x < phi.size(); ++x) phi[x] = spin(c, x);
  return phi;
}

double ExactEnumEngine::gibbs_probabilities(std::span<const double> g,
                                            std::span<double> prob) const {
  const std::size_t v = data_->lattice.volume();
  if (g.size() != v || prob.size() != data_->configs)
    throw std::invalid_argument("gibbs_probabilities: shape mismatch");
  const double bh = data_->params.beta * data_->params.h;

  // P(c) = sum of g over up-spins, built from c with its lowest bit cleared.
  prob[0] = 0.0;
  for (std::size_t c = 1; c < data_->configs; ++c)
    prob[c] = prob[c & (c - 1)] + g[static_cast<std::size_t>(std::countr_zero(c))];
  double total_g = 0.0;
  for (double x : g) total_g += x;

  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < data_->configs; ++c) {
    prob[c] = data_->exchange_weight[c] + bh * (2.0 * prob[c] - total_g);
    peak = std::max(peak, prob[c]);
  }
  for (auto& p : prob) p = std::exp(p - peak);
  const double z = pairwise_sum(prob);
  for (auto& p : prob) p /= z;
  return peak + std::log(z);
}

ObservableTable ExactEnumEngine::tabulate(std::span<const ObservableSpec> observables) const {
  const auto& lattice = data_->lattice;
  const std::size_t v = lattice.volume();
  for (const auto& o : observables) validate(o, lattice, 1);

  ObservableTable table;
  table.columns = observables.size();
  table.values.resize(data_->configs * table.columns);
  std::vector<double> phi(v);
  std::vector<cplx> ft;
  for (std::size_t c = 0; c < data_->configs; ++c) {
    for (std::size_t x = 0; x < v; ++x) phi[x] = spin(c, x);
    std::span<const cplx> phi_tilde;
    if (!data_->fourier.empty()) {
      phi_tilde = {data_->fourier.data() + c * v, v};
    } else {
      bool need = std::any_of(observables.begin(), observables.end(), [](const auto& o) {
        return std::holds_alternative<MomentumSpin>(o);
      });
      if (need) {
        ft = fourier_forward(std::span<const double>(phi), lattice, 1).values;
        phi_tilde = ft;
      }
    }
    for (std::size_t j = 0; j < table.columns; ++j)
      table.values[c * table.columns + j] = evaluate(observables[j], phi, phi_tilde, 1);
  }
  return table;
}

void subset_moments(const ObservableTable& table, std::span<const double> prob,
                    std::span<const std::size_t> columns, std::span<cplx> out) {
  const std::size_t j = columns.size();
  const std::size_t masks = std::size_t{1} << j;
  if (out.size() != masks) throw std::invalid_argument("subset_moments: need 2^j outputs");
  const std::size_t configs = prob.size();

  // Chunked accumulation followed by a pairwise reduction over chunk sums.
  const std::size_t chunks = (configs + kChunk - 1) / kChunk;
  std::vector<std::vector<cplx>> partial(masks, std::vector<cplx>(chunks));
  std::vector<cplx> prod(masks);
  for (std::size_t ch = 0; ch < chunks; ++ch) {
    std::vector<cplx> acc(masks);
    const std::size_t end = std::min(configs, (ch + 1) * kChunk);
    for (std::size_t c = ch * kChunk; c < end; ++c) {
      prod[0] = 1.0;
      for (std::size_t m = 1; m < masks; ++m) {
        const int top = std::bit_width(m) - 1;
        prod[m] = prod[m & ~(std::size_t{1} << top)] * table.at(c, columns[top]);
      }
      for (std::size_t m = 0; m < masks; ++m) acc[m] += prob[c] * prod[m];
    }
    for (std::size_t m = 0; m < masks; ++m) partial[m][ch] = acc[m];
  }
  for (std::size_t m = 0; m < masks; ++m) out[m] = pairwise_sum(partial[m]);
}

ExactMoments exact_gibbs_moments(const ExactEnumEngine& engine, const DisorderSample& disorder,
                                 std::span<const ObservableSpec> observables, int max_order) {
  if (disorder.components() != 1 || disorder.volume() != engine.lattice().volume())
    throw std::invalid_argument("disorder sample does not match the exact engine");
  if (observables.size() > 20) throw std::invalid_argument("too many observables for subset moments");
  if (max_order < 1) throw std::invalid_argument("max_order must be >= 1");

  std::vector<double> prob(engine.configurations());
  ExactMoments out;
  out.log_z = engine.gibbs_probabilities(disorder.values(), prob);
  out.psi = out.log_z / static_cast<double>(engine.lattice().volume());

  const auto table = engine.tabulate(observables);
  std::vector<std::size_t> cols(observables.size());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
  out.subset_moments.resize(std::size_t{1} << cols.size());
  subset_moments(table, prob, cols, out.subset_moments);
  const cplx nan(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t m = 0; m < out.subset_moments.size(); ++m)
    if (std::popcount(m) > max_order) out.subset_moments[m] = nan;
  return out;
}

ExactState::ExactState(ExactEnumEngine engine, const DisorderSample& disorder)
    : engine_(std::move(engine)), prob_(engine_.configurations()) {
  if (disorder.components() != 1 || disorder.volume() != engine_.lattice().volume())
    throw std::invalid_argument("disorder sample does not match the exact engine");
  log_z_ = engine_.gibbs_probabilities(disorder.values(), prob_);
}

Estimate ExactState::cumulant(std::span<const ObservableSpec> observables) const {
  const int j = static_cast<int>(observables.size());
  if (j < 1 || j > kMaxCumulantOrder)
    throw std::invalid_argument("cumulant order must be in [1, 6]");
  const auto table = engine_.tabulate(observables);
  std::vector<std::size_t> cols(observables.size());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
  std::vector<cplx> moments(std::size_t{1} << j);
  subset_moments(table, prob_, cols, moments);
  return {connected_from_moments(moments, j), 0.0, 0.5};
}

Estimate ExactState::expectation(std::span<const ObservableSpec> monomial) const {
  const auto table = engine_.tabulate(monomial);
  std::vector<cplx> terms(prob_.size());
  for (std::size_t c = 0; c < prob_.size(); ++c) {
    cplx p = prob_[c];
    for (std::size_t j = 0; j < table.columns; ++j) p *= table.at(c, j);
    terms[c] = p;
  }
  return {pairwise_sum(terms), 0.0, 0.5};
}

}  // namespace rfon
