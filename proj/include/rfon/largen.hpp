#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfon/lattice.hpp"

namespace rfon {

/// Large-N replica-symmetric quantities. J = 1 throughout and the exchange is
/// -J Laplacian with one term per bond; lattice sums carry an explicit 1/V.
struct LargeNInput {
  double d = 5.0;
  int N = 10;
  double beta_delta_g = 1.0;
  double beta = 0.0;  // lattice saddle only
  std::optional<Lattice> lattice;
};

struct AsymptoticCoefficients {
  std::optional<double> c0;  // integer d only
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

struct ExponentSet {
  double eta = 0.0;
  double eta_bar = 0.0;
  double eta_prime = 0.0;
};

struct BarePropagator {
  double gc = 0.0;  // 1 / (-Lap + m^2)
  double gd = 0.0;  // 1 / (-Lap + m^2)^2
  /// Replica structure G^{ab} = gc delta_ab + betaDeltaG gd.
  double diagonal(double beta_delta_g) const { return gc + beta_delta_g * gd; }
  double off_diagonal(double beta_delta_g) const { return beta_delta_g * gd; }
};

/// Continuum mode uses Lap = -q^2.
BarePropagator bare_propagator_continuum(double q, double m2);
BarePropagator bare_propagator_lattice(const Lattice& lattice, std::size_t k, double m2);
BarePropagator bare_propagator_from_symbol(double laplacian, double m2);

/// How the k = 0 term is treated when m^2 -> 0.
enum class ZeroMode { kInclude, kExclude };

/// (1/V) sum_k [1/(-Lap_k + m^2) + betaDeltaG/(-Lap_k + m^2)^2]
double saddle_rhs(const Lattice& lattice, double m2, double beta_delta_g,
                  ZeroMode zero_mode = ZeroMode::kInclude);

class NoSaddleSolution : public std::runtime_error {
 public:
  NoSaddleSolution(const std::string& what, double critical_beta)
      : std::runtime_error(what), critical_beta_(critical_beta) {}
  /// RHS at m^2 -> 0+; beta at or above it is massless/critical.
  double critical_beta() const { return critical_beta_; }

 private:
  double critical_beta_;
};

struct SaddleSolution {
  double m2 = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Unique root of beta = saddle_rhs(m^2) by bisection; the RHS decreases strictly in m^2.
/// With the zero mode included the RHS diverges at m^2 -> 0 and a root always exists.
SaddleSolution solve_saddle(double beta, double beta_delta_g, const Lattice& lattice,
                            ZeroMode zero_mode = ZeroMode::kInclude);

/// The four convolutions (1/V) sum_q X(k - q) Y(q) of the polarization.
struct PolarizationPieces {
  double aa = 0.0;  // Gc * Gc
  double ab = 0.0;  // betaDeltaG Gc * Gd
  double ba = 0.0;  // betaDeltaG Gd * Gc
  double bb = 0.0;  // betaDeltaG^2 Gd * Gd
  double diagonal() const { return aa + ab + ba; }
  double off_diagonal() const { return bb; }
};

enum class PolarizationMethod { kAuto, kDirect, kFft };

inline constexpr std::size_t kPolarizationDirectLimit = 4096;

/// All momenta at once. kAuto sums directly for V <= 4096 and convolves by FFT above.
/// At m^2 = 0 the zero mode must be excluded.
std::vector<PolarizationPieces> polarization(const Lattice& lattice, double m2, double beta_delta_g,
                                             ZeroMode zero_mode = ZeroMode::kInclude,
                                             PolarizationMethod method = PolarizationMethod::kAuto);
PolarizationPieces polarization_at(const Lattice& lattice, std::size_t k, double m2,
                                   double beta_delta_g, ZeroMode zero_mode = ZeroMode::kInclude);

/// c1, c2, c3 from their Gamma-function forms; c0 = int_q 1/q^4 over [-pi, pi]^d / (2 pi)^d.
AsymptoticCoefficients continuum_coefficients(double d, double beta_delta_g);

/// int over [-pi, pi]^d / (2 pi)^d of 1/q^4 for integer d > 4, with an error estimate
/// from two quadrature orders.
struct CubatureResult {
  double value = 0.0;
  double error = 0.0;
};
CubatureResult brillouin_inverse_q4(int d);

/// Low-momentum Pi^{-1}: (2/(N c2)) (k^{6-d} delta - betaDeltaG (6-d)/2 k^{4-d}).
struct EpsilonPropagator {
  double diagonal = 0.0;
  double off = 0.0;
};
EpsilonPropagator epsilon_propagator(double k, double d, int N, double beta_delta_g);

struct AsymptoticCorrelators {
  double q = 0.0;
  double log_factor = 0.0;        // 1 + ((d-4)/N) log q
  double connected_2pt = 0.0;     // delta_{mn} / q^2 (1 + ...)
  double disconnected_2pt = 0.0;  // betaDeltaG / q^4 (1 + ...), replica off-diagonal part
  double disconnected_4pt = 0.0;  // sum_p E|<phi_q; phi_p>|^2
  double connected_4pt = 0.0;     // (4-d)/(4 betaDeltaG^2 N^2) log q / q^4
  double susceptibility_variance = 0.0;  // (eta' - 2 eta) log q / q^4
  /// (beta h)^4/2 sum_{p1,p2,n1,n2} |E<phi_p1; phi_p2; phi_q; phi_-q>|^2 = (4-d)/(8N) log q / q^4
  double susceptibility_lower = 0.0;
};

AsymptoticCorrelators asymptotic_correlators(double q, double d, int N, double beta_delta_g);

ExponentSet large_n_exponents(double d, int N);

struct AsymptoticCheck {
  std::string name;
  double q = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool breakdown = false;  // 1 + ((d-4)/N) log q <= 0
  bool pass = false;       // lhs <= rhs and no breakdown
  bool gating = true;      // false for checks that are only reported
};

struct LargeNReport {
  double d = 0.0;
  int N = 0;
  double beta_delta_g = 0.0;
  ExponentSet exponents;
  AsymptoticCoefficients coefficients;
  bool schwartz_soffer = false;  // 2 eta >= eta_bar
  std::vector<AsymptoticCorrelators> correlators;
  std::vector<AsymptoticCheck> checks;
  /// 2 eta >= eta_bar and every gating check.
  bool all_pass() const;
};

/// Exponents, the inequality between the connected four-point sum and 3!(beta h)^-6 E|<phi_q>|^2
/// (gating), and the Var chi sandwich (reported) over q_grid. Points where the log factor is not
/// positive are flagged as breakdowns and fail.
LargeNReport exponents_and_checks(double d, int N, double beta_delta_g,
                                  std::span<const double> q_grid);

/// n points log-spaced over [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace rfon
