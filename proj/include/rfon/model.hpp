#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rfon/lattice.hpp"

namespace rfon {

/// Single-site weight e^{-u (|phi|^2 - 1)^2}.
struct Quartic {
  double u = 1.0;
};
/// Uniform measure on |phi| = 1; for N = 1 this is phi in {-1, +1}.
struct Spherical {};
/// Single-site weight e^{-mu |phi|^2 / 2}; makes the Gibbs measure Gaussian.
struct GaussianMass {
  double mu = 1.0;
};

using Measure = std::variant<Quartic, Spherical, GaussianMass>;

std::string measure_name(const Measure& measure);

struct ModelParams {
  double beta = 1.0;
  double h = 1.0;
  double J = 1.0;
  int N = 1;
  Measure measure = Spherical{};

  /// Throws std::invalid_argument on beta < 0, N < 1, u <= 0 or mu <= 0.
  void validate() const;
};

/// One realization of i.i.d. standard normal fields g_x^n, layout x * N + n.
class DisorderSample {
 public:
  DisorderSample(const Lattice& lattice, int components, std::vector<double> values,
                 std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::span<const double> values() const { return values_; }
  double at(std::size_t site, int n) const { return values_[site * components_ + n]; }
  int components() const { return components_; }
  std::size_t volume() const { return values_.size() / components_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Root-volume normalized transform g~_q^n.
  const MomentumField& fourier() const { return fourier_; }

  /// a * x + b * y; the transform is combined linearly instead of recomputed.
  static DisorderSample combine(double a, const DisorderSample& x, double b, const DisorderSample& y,
                                std::uint64_t seed = 0, std::uint64_t stream = 0);

 private:
  DisorderSample() = default;

  int components_ = 1;
  std::vector<double> values_;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  MomentumField fourier_;
};

/// Draws sample `stream` of the disorder ensemble seeded by `base_seed`.
DisorderSample draw_disorder(const Lattice& lattice, int components, std::uint64_t base_seed,
                             std::uint64_t stream);

DisorderSample zero_disorder(const Lattice& lattice, int components);

struct SpinConfig {
  std::vector<double> phi;  // layout x * N + n
};

/// H = -sum_{x,y} J_xy phi_x.phi_y - h sum_x g_x.phi_x over ordered pairs, so every
/// bond contributes twice to the exchange term.
double hamiltonian(const SpinConfig& config, const DisorderSample& disorder,
                   const ModelParams& params, const Lattice& lattice);

/// Exchange part only (no field term).
double exchange_energy(std::span<const double> phi, int components, double J,
                       const Lattice& lattice);

/// Disorder strength beta * Delta_G corresponding to (beta, h): beta^2 h^2.
double disorder_strength_map(double beta, double h);

enum class DisorderFormat { kBinary, kCsv };

/// Writes <stem>.bin or <stem>.csv plus the sidecar <stem>.json {seed, stream, V, N, ...}.
/// Returns the sidecar path.
std::filesystem::path save_disorder(const DisorderSample& sample, const std::filesystem::path& stem,
                                    DisorderFormat format);

/// Loads a sample from its sidecar; values reload bit-exactly.
DisorderSample load_disorder(const std::filesystem::path& sidecar, const Lattice& lattice);

}  // namespace rfon
