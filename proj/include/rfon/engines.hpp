#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rfon/lattice.hpp"
#include "rfon/model.hpp"
#include "rfon/observable.hpp"
#include "rfon/stats.hpp"

namespace rfon {

/// Value with a statistical error (0 for exact engines).
struct Estimate {
  cplx value = 0.0;
  double stderr = 0.0;
  double tau_int = 0.5;
};

/// Gibbs state <.>_g for one fixed disorder sample.
class GibbsState {
 public:
  virtual ~GibbsState() = default;
  /// Connected correlator <A_1; ...; A_j>_g, j <= 6.
  virtual Estimate cumulant(std::span<const ObservableSpec> observables) const = 0;
  /// Plain moment <A_1 ... A_j>_g.
  virtual Estimate expectation(std::span<const ObservableSpec> monomial) const = 0;
};

// ---------------------------------------------------------------------------
// Exact enumeration (N = 1, spherical measure, phi_x in {-1, +1})

/// Values of a list of observables on every configuration, row-major [config][column].
struct ObservableTable {
  std::size_t columns = 0;
  std::vector<cplx> values;
  cplx at(std::size_t config, std::size_t column) const { return values[config * columns + column]; }
};

class ExactEnumEngine {
 public:
  static constexpr std::size_t kMaxVolume = 24;

  ExactEnumEngine(const Lattice& lattice, const ModelParams& params);

  const Lattice& lattice() const { return data_->lattice; }
  const ModelParams& params() const { return data_->params; }
  std::size_t configurations() const { return data_->configs; }

  /// Spin at site x in configuration c: bit x set means +1.
  static double spin(std::size_t c, std::size_t x) { return (c >> x) & 1u ? 1.0 : -1.0; }
  std::vector<double> configuration(std::size_t c) const;

  /// Normalized Gibbs probabilities for the field values g (length V); returns log Z_L.
  double gibbs_probabilities(std::span<const double> g, std::span<double> prob) const;

  ObservableTable tabulate(std::span<const ObservableSpec> observables) const;

 private:
  struct Data {
    Lattice lattice;
    ModelParams params;
    std::size_t configs;
    std::vector<double> exchange_weight;  // -beta * exchange energy per config
    std::vector<cplx> fourier;            // cached transforms when V <= 16
  };
  std::shared_ptr<const Data> data_;
};

/// Mixed moments of selected table columns under the probabilities `prob`,
/// indexed by subset bitmask (size 2^columns.size()).
void subset_moments(const ObservableTable& table, std::span<const double> prob,
                    std::span<const std::size_t> columns, std::span<cplx> out);

struct ExactMoments {
  std::vector<cplx> subset_moments;  // NaN for subsets larger than max_order
  double log_z = 0.0;
  double psi = 0.0;  // log Z_L / V
};

/// Exact Gibbs moments of the observables (all subsets of size <= max_order),
/// together with log Z_L and psi_L.
ExactMoments exact_gibbs_moments(const ExactEnumEngine& engine, const DisorderSample& disorder,
                                 std::span<const ObservableSpec> observables, int max_order);

class ExactState final : public GibbsState {
 public:
  ExactState(ExactEnumEngine engine, const DisorderSample& disorder);
  Estimate cumulant(std::span<const ObservableSpec> observables) const override;
  Estimate expectation(std::span<const ObservableSpec> monomial) const override;
  double log_z() const { return log_z_; }
  std::span<const double> probabilities() const { return prob_; }

 private:
  ExactEnumEngine engine_;
  std::vector<double> prob_;
  double log_z_;
};

// ---------------------------------------------------------------------------
// Gaussian closed form (GaussianMass measure)

/// c + sum_i b_i g~_i: a statistic affine in the root-volume disorder transform.
/// Since g~ is a unitary image of i.i.d. normals, E F = c and E|F|^2 = |c|^2 + sum |b_i|^2.
struct LinearForm {
  cplx constant = 0.0;
  LinearTerms coefficients;  // index k * N + n into g~

  cplx evaluate(const MomentumField& g_tilde) const;
  double coefficient_norm2() const;
  cplx mean() const { return constant; }
  double second_moment() const { return std::norm(constant) + coefficient_norm2(); }
  double variance() const { return coefficient_norm2(); }
};

class GaussianEngine {
 public:
  /// Requires the GaussianMass measure with mu > 4 beta |J| d.
  GaussianEngine(const Lattice& lattice, const ModelParams& params);

  const Lattice& lattice() const { return lattice_; }
  const ModelParams& params() const { return params_; }
  double mass() const { return mu_; }

  /// K^(q) = mu - 2 beta J sum_{e} cos(q.e) = mu - 4 beta J sum_mu cos q_mu.
  double precision_symbol(std::size_t k) const;
  /// K = mu Id - 2 beta J A (A the adjacency matrix).
  Eigen::MatrixXd precision_matrix() const;

  /// <phi_x^n> = beta h (K^{-1} g^n)_x via a Cholesky solve; layout x * N + n.
  std::vector<double> mean_position(const DisorderSample& disorder) const;
  /// <phi~_q^n> = beta h g~_q^n / K^(q).
  MomentumField mean_momentum(const DisorderSample& disorder) const;
  /// Connected two-point in position space, K^{-1} (same for every component).
  Eigen::MatrixXd covariance_position() const;
  /// <phi~_q^n; phi~_p^m> = delta_nm delta_{p,-q} / K^(q).
  cplx covariance_momentum(std::size_t k, int n, std::size_t p, int m) const;

  /// Connected correlator of linear observables as a function of the disorder: order 1 is
  /// affine in g~, order 2 is constant, order >= 3 vanishes. Throws for nonlinear observables.
  LinearForm cumulant_form(std::span<const ObservableSpec> observables) const;

 private:
  Lattice lattice_;
  ModelParams params_;
  double mu_;
  std::vector<double> symbol_;
};

class GaussianState final : public GibbsState {
 public:
  GaussianState(GaussianEngine engine, const DisorderSample& disorder);
  Estimate cumulant(std::span<const ObservableSpec> observables) const override;
  Estimate expectation(std::span<const ObservableSpec> monomial) const override;

 private:
  GaussianEngine engine_;
  MomentumField g_tilde_;
};

// ---------------------------------------------------------------------------
// Markov chain Monte Carlo

struct McmcSchedule {
  std::size_t thermalization = 2000;  // sweeps
  std::size_t measurements = 20000;   // sweeps
  std::size_t stride = 1;             // sweeps between stored configurations
  double proposal_width = 0.8;        // Gaussian proposals (quartic / gaussian mass)
  std::size_t overrelaxation = 1;     // reflections per sweep (spherical, N >= 2)
  std::size_t blocks = 32;            // jackknife blocks for cumulant errors
};

/// Stored configurations from one chain; answers cumulants with blocked-jackknife errors
/// and moments with autocorrelation-corrected errors.
class SampledState final : public GibbsState {
 public:
  SampledState(const Lattice& lattice, int components, std::vector<double> samples,
               std::size_t blocks);
  Estimate cumulant(std::span<const ObservableSpec> observables) const override;
  Estimate expectation(std::span<const ObservableSpec> monomial) const override;
  std::size_t size() const { return count_; }

 private:
  std::vector<cplx> column(const ObservableSpec& spec) const;

  Lattice lattice_;
  std::size_t dof_;
  int components_;
  std::size_t count_;
  std::size_t blocks_;
  std::vector<double> samples_;
  std::vector<cplx> fourier_;
};

struct McmcResult {
  std::shared_ptr<SampledState> state;
  std::vector<Estimate> estimates;  // one per requested monomial
  double acceptance_rate = 1.0;
  bool low_acceptance = false;      // acceptance below 1%
  std::size_t guard_rejections = 0; // quartic proposals rejected as divergent
};

class McmcEngine {
 public:
  McmcEngine(const Lattice& lattice, const ModelParams& params, McmcSchedule schedule);

  const Lattice& lattice() const { return lattice_; }
  const ModelParams& params() const { return params_; }
  const McmcSchedule& schedule() const { return schedule_; }

  McmcResult run(const DisorderSample& disorder, std::uint64_t seed,
                 std::span<const std::vector<ObservableSpec>> monomials = {}) const;

 private:
  Lattice lattice_;
  ModelParams params_;
  McmcSchedule schedule_;
};

McmcResult mcmc_estimate(const McmcEngine& engine, const DisorderSample& disorder,
                         std::span<const std::vector<ObservableSpec>> monomials,
                         std::uint64_t seed);

// ---------------------------------------------------------------------------

using Engine = std::variant<ExactEnumEngine, GaussianEngine, McmcEngine>;

const Lattice& engine_lattice(const Engine& engine);
const ModelParams& engine_params(const Engine& engine);
std::string engine_name(const Engine& engine);

/// Gibbs state for one disorder sample; `sampler_seed` only matters for MCMC.
std::unique_ptr<GibbsState> gibbs_state(const Engine& engine, const DisorderSample& disorder,
                                        std::uint64_t sampler_seed);

}  // namespace rfon
