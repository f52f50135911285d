#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rfon/cumulant.hpp"
#include "rfon/engines.hpp"
#include "rfon/rng.hpp"

namespace rfon {
namespace {

constexpr double kDivergenceGuard = 1e8;  // |phi|^2 above this is rejected outright

void uniform_sphere(Rng& rng, std::normal_distribution<double>& normal, double* out, std::size_t n) {
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      out[c] = normal(rng);
      norm2 += out[c] * out[c];
    }
  } while (norm2 < 1e-300);
  const double inv = 1.0 / std::sqrt(norm2);
  for (std::size_t c = 0; c < n; ++c) out[c] *= inv;
}

}  // namespace

McmcEngine::McmcEngine(const Lattice& lattice, const ModelParams& params, McmcSchedule schedule)
    : lattice_(lattice), params_(params), schedule_(schedule) {
  params.validate();
  if (schedule.measurements == 0) throw std::invalid_argument("schedule needs measurement sweeps");
  if (schedule.stride == 0) throw std::invalid_argument("schedule stride must be >= 1");
  if (!(schedule.proposal_width > 0.0)) throw std::invalid_argument("proposal width must be > 0");
  if (schedule.blocks < 2) throw std::invalid_argument("schedule needs at least 2 jackknife blocks");
}

McmcResult McmcEngine::run(const DisorderSample& disorder, std::uint64_t seed,
                           std::span<const std::vector<ObservableSpec>> monomials) const {
  const std::size_t v = lattice_.volume();
  const auto n = static_cast<std::size_t>(params_.N);
  if (disorder.volume() != v || disorder.components() != params_.N)
    throw std::invalid_argument("disorder sample does not match the MCMC engine");

  auto rng = make_rng(seed, StreamTag::kSampler, {disorder.seed(), disorder.stream()});
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const bool spherical = std::holds_alternative<Spherical>(params_.measure);
  const auto* quartic = std::get_if<Quartic>(&params_.measure);
  const auto* gaussian = std::get_if<GaussianMass>(&params_.measure);
  const double width = schedule_.proposal_width;
  const double bj2 = 2.0 * params_.beta * params_.J;
  const double bh = params_.beta * params_.h;
  auto g = disorder.values();

  std::vector<double> phi(v * n);
  for (std::size_t x = 0; x < v; ++x) {
    if (spherical)
      uniform_sphere(rng, normal, &phi[x * n], n);
    else
      for (std::size_t c = 0; c < n; ++c) phi[x * n + c] = normal(rng) * 0.5;
  }

  std::vector<double> field(n), proposal(n);
  std::size_t accepted = 0, proposed = 0, guarded = 0;

  auto local_field = [&](std::size_t x) {
    for (std::size_t c = 0; c < n; ++c) field[c] = bh * g[x * n + c];
    for (std::size_t y : lattice_.neighbors(x))
      for (std::size_t c = 0; c < n; ++c) field[c] += bj2 * phi[y * n + c];
  };

  auto site_potential = [&](const double* s) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < n; ++c) r2 += s[c] * s[c];
    if (quartic) return quartic->u * (r2 - 1.0) * (r2 - 1.0);
    if (gaussian) return 0.5 * gaussian->mu * r2;
    return 0.0;
  };

  auto sweep = [&] {
    for (std::size_t x = 0; x < v; ++x) {
      local_field(x);
      double* s = &phi[x * n];
      double log_ratio = 0.0;
      if (spherical && n == 1) {
        proposal[0] = -s[0];
        log_ratio = -2.0 * field[0] * s[0];
      } else if (spherical) {
        uniform_sphere(rng, normal, proposal.data(), n);
        for (std::size_t c = 0; c < n; ++c) log_ratio += field[c] * (proposal[c] - s[c]);
      } else {
        double r2 = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
          proposal[c] = s[c] + width * normal(rng);
          r2 += proposal[c] * proposal[c];
        }
        if (!(r2 < kDivergenceGuard)) {
          ++guarded;
          ++proposed;
          continue;
        }
        for (std::size_t c = 0; c < n; ++c) log_ratio += field[c] * (proposal[c] - s[c]);
        log_ratio -= site_potential(proposal.data()) - site_potential(s);
        if (!std::isfinite(log_ratio)) {
          ++guarded;
          ++proposed;
          continue;
        }
      }
      ++proposed;
      if (log_ratio >= 0.0 || uniform(rng) < std::exp(log_ratio)) {
        std::copy(proposal.begin(), proposal.end(), s);
        ++accepted;
      }
    }
    if (spherical && n >= 2) {
      // Microcanonical reflection of each spin about its local field.
      for (std::size_t r = 0; r < schedule_.overrelaxation; ++r) {
        for (std::size_t x = 0; x < v; ++x) {
          local_field(x);
          double* s = &phi[x * n];
          double f2 = 0.0, fs = 0.0;
          for (std::size_t c = 0; c < n; ++c) {
            f2 += field[c] * field[c];
            fs += field[c] * s[c];
          }
          if (f2 < 1e-300) continue;
          for (std::size_t c = 0; c < n; ++c) s[c] = 2.0 * fs / f2 * field[c] - s[c];
        }
      }
    }
  };

  for (std::size_t i = 0; i < schedule_.thermalization; ++i) sweep();
  const std::size_t stored = schedule_.measurements / schedule_.stride;
  if (stored < 2 * schedule_.blocks)
    throw std::invalid_argument("too few stored configurations for the jackknife block count");
  std::vector<double> samples;
  samples.reserve(stored * v * n);
  for (std::size_t i = 0; i < stored; ++i) {
    for (std::size_t s = 0; s < schedule_.stride; ++s) sweep();
    samples.insert(samples.end(), phi.begin(), phi.end());
  }

  McmcResult out;
  out.state = std::make_shared<SampledState>(lattice_, params_.N, std::move(samples), schedule_.blocks);
  out.acceptance_rate = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 1.0;
  out.low_acceptance = out.acceptance_rate < 0.01;
  out.guard_rejections = guarded;
  for (const auto& m : monomials) out.estimates.push_back(out.state->expectation(m));
  return out;
}

McmcResult mcmc_estimate(const McmcEngine& engine, const DisorderSample& disorder,
                         std::span<const std::vector<ObservableSpec>> monomials,
                         std::uint64_t seed) {
  return engine.run(disorder, seed, monomials);
}

SampledState::SampledState(const Lattice& lattice, int components, std::vector<double> samples,
                           std::size_t blocks)
    : lattice_(lattice),
      dof_(lattice.volume() * static_cast<std::size_t>(components)),
      components_(components),
      count_(samples.size() / dof_),
      blocks_(blocks),
      samples_(std::move(samples)) {
  if (count_ * dof_ != samples_.size()) throw std::invalid_argument("ragged sample array");
  fourier_.resize(samples_.size());
  for (std::size_t s = 0; s < count_; ++s) {
    auto ft = fourier_forward(std::span<const double>(samples_.data() + s * dof_, dof_), lattice,
                              static_cast<std::size_t>(components));
    std::copy(ft.values.begin(), ft.values.end(), fourier_.begin() + s * dof_);
  }
}

std::vector<cplx> SampledState::column(const ObservableSpec& spec) const {
  validate(spec, lattice_, components_);
  std::vector<cplx> out(count_);
  for (std::size_t s = 0; s < count_; ++s)
    out[s] = evaluate(spec, std::span<const double>(samples_.data() + s * dof_, dof_),
                      std::span<const cplx>(fourier_.data() + s * dof_, dof_), components_);
  return out;
}

Estimate SampledState::cumulant(std::span<const ObservableSpec> observables) const {
  const int j = static_cast<int>(observables.size());
  if (j < 1 || j > kMaxCumulantOrder) throw std::invalid_argument("cumulant order must be in [1, 6]");
  std::vector<std::vector<cplx>> cols;
  for (const auto& o : observables) cols.push_back(column(o));

  const std::size_t masks = std::size_t{1} << j;
  const auto bounds = block_bounds(count_, blocks_);
  BlockSums sums;
  sums.sums.assign(bounds.size() - 1, std::vector<cplx>(masks));
  sums.weights.resize(bounds.size() - 1);
  std::vector<cplx> prod(masks);
  for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
    std::vector<std::vector<cplx>> terms(masks, std::vector<cplx>(bounds[b + 1] - bounds[b]));
    for (std::size_t s = bounds[b]; s < bounds[b + 1]; ++s) {
      prod[0] = 1.0;
      for (std::size_t m = 1; m < masks; ++m) {
        const int top = std::bit_width(m) - 1;
        prod[m] = prod[m & ~(std::size_t{1} << top)] * cols[top][s];
      }
      for (std::size_t m = 0; m < masks; ++m) terms[m][s - bounds[b]] = prod[m];
    }
    for (std::size_t m = 0; m < masks; ++m) sums.sums[b][m] = pairwise_sum(terms[m]);
    sums.weights[b] = static_cast<double>(bounds[b + 1] - bounds[b]);
  }
  auto estimator = [j](std::span<const cplx> means) {
    const cplx k = connected_from_moments(means, j);
    return std::vector<double>{k.real(), k.imag()};
  };
  const auto jk = jackknife(sums, estimator);
  Estimate e;
  e.value = {jk.plain[0], jk.plain[1]};
  e.stderr = std::hypot(jk.stderr[0], jk.stderr[1]);
  return e;
}

Estimate SampledState::expectation(std::span<const ObservableSpec> monomial) const {
  std::vector<cplx> prod(count_, cplx(1.0));
  for (const auto& o : monomial) {
    const auto col = column(o);
    for (std::size_t s = 0; s < count_; ++s) prod[s] *= col[s];
  }
  std::vector<double> re(count_), im(count_);
  for (std::size_t s = 0; s < count_; ++s) {
    re[s] = prod[s].real();
    im[s] = prod[s].imag();
  }
  const auto a = mean_with_autocorrelation(re);
  const auto b = mean_with_autocorrelation(im);
  return {cplx(a.mean, b.mean), std::hypot(a.stderr, b.stderr), std::max(a.tau_int, b.tau_int)};
}

}  // namespace rfon
