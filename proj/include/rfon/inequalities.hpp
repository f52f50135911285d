#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rfon/averaging.hpp"
#include "rfon/engines.hpp"

namespace rfon {

enum class Verdict { kHolds, kInconclusive, kViolated };

std::string verdict_name(Verdict v);
/// The more severe of two verdicts.
Verdict worst(Verdict a, Verdict b);

/// Relative slack used when a difference carries no statistical error.
inline constexpr double kExactTolerance = 1e-10;

/// One link "small <= large" of an inequality chain.
struct MarginCheck {
  std::string name;
  double difference = 0.0;       // large - small
  double stderr = 0.0;           // jackknife error of the difference
  std::optional<double> sigma;   // difference / stderr; absent for exact comparisons
  Verdict verdict = Verdict::kHolds;
};

/// Statistical verdict: below -3 sigma is a violation, a negative margin within 3 sigma is
/// inconclusive. Without an error bar the comparison is exact up to kExactTolerance * scale.
MarginCheck assess_margin(std::string name, double difference, double stderr, double scale);

struct InequalityReport {
  std::string name;
  std::vector<std::string> labels;  // e.g. lhs, mid, rhs
  std::vector<double> values;
  std::vector<double> errors;
  std::vector<MarginCheck> margins;  // links of the chain, these set the verdict
  std::vector<MarginCheck> extra;    // side checks reported alongside
  Verdict verdict = Verdict::kHolds;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::size_t samples = 0;
};

/// beta^{2l} h^{2l}/l! sum_P |E W_P|^2 <= Var <f_1; ...; f_k> <= beta^2 h^2 sum_{p,n} E|W_{p,f}|^2
/// with all members estimated on one disorder-sample set. Requires k >= 1, l >= 1,
/// l + k <= 6 and k + 1 <= 6.
InequalityReport check_theorem_chain(const Engine& engine, const DisorderAverager& averager, int l,
                                     std::span<const ObservableSpec> f,
                                     std::uint64_t sampler_seed = 0);

/// |E<phi~_q^m; phi~_{-q}^n>|^2 <= E|<phi~_q^m>|^2 / (beta h)^2
///   <= sum_{p, n'} E|<phi~_q^{n'}; phi~_p^m>|^2, plus the side bound
/// |E<phi~_q^m; phi~_{-q}^n>|^2 <= sum_{p, n'} |E<phi~_q^m; phi~_p^{n'}>|^2.
InequalityReport check_schwartz_soffer(const Engine& engine, const DisorderAverager& averager,
                                       std::size_t q, int m, int n,
                                       std::uint64_t sampler_seed = 0);

struct VarianceResult {
  double value = 0.0;
  std::optional<double> stderr;
  std::size_t samples = 0;
};

/// Var <f_1; ...; f_k>_g over the disorder ensemble.
VarianceResult variance_of_correlator(const Engine& engine, const DisorderAverager& averager,
                                      std::span<const ObservableSpec> f,
                                      std::uint64_t sampler_seed = 0);

}  // namespace rfon
