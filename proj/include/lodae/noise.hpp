#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lodae/rng.hpp"
#include "lodae/simulator.hpp"

namespace lodae {

/// Time-correlated error mode. Before every shot the modulator state is
/// redrawn from its stationary law with probability `pSwitch`; the bursty
/// state (stationary mass `burstFraction`) multiplies eta by `burstScale` and
/// the calm state is rescaled so that the mean eta is unchanged.
struct Correlation {
  double pSwitch = 0.05;
  double burstScale = 3.0;
  double burstFraction = 0.1;
};

/// Effective depolarizing + readout model, one-parameter-per-depth:
///   1 - eta_d = (1 - betaReadout) * exp(-gamma_d)
class NoiseModel {
 public:
  NoiseModel(double betaReadout, std::vector<double> gammaByDepth, double leakProb = 0.0,
             std::optional<Correlation> correlation = std::nullopt);

  /// gamma_d linear from 0.035 (d = 0) to 0.35 (d = 7), extrapolated past 7,
  /// with betaReadout chosen so that the depth-0 noise floor under Haar inputs
  /// is 0.053.
  static NoiseModel reference_default(int maxDepth = 7);
  static NoiseModel noiseless(int maxDepth = 7);

  /// Exactly eta_0 at depth 0 from readout alone, gamma_d as given.
  static NoiseModel with_depth0_eta(double eta0, std::vector<double> gammaByDepth);

  double betaReadout() const { return beta_; }
  std::span<const double> gammaByDepth() const { return gamma_; }
  int maxDepth() const { return static_cast<int>(gamma_.size()) - 1; }
  double leakProb() const { return leak_; }
  const std::optional<Correlation>& correlation() const { return correlation_; }

  void setLeakProb(double p);
  void setCorrelation(std::optional<Correlation> c);

  /// -log(1 - eta_d): the single damping rate that reproduces eta_d with no
  /// separate readout term.
  std::vector<double> effectiveGammas() const;

 private:
  double beta_;
  std::vector<double> gamma_;
  double leak_;
  std::optional<Correlation> correlation_;
};

inline constexpr double kReferenceGamma0 = 0.035;
inline constexpr double kReferenceGamma7 = 0.35;
inline constexpr double kReferenceDepth0Floor = 0.053;

std::vector<double> reference_gammas(int maxDepth = 7);

double effective_eta(const NoiseModel& model, int depth);

/// (1 - (1 - eta) cos(2 (2d + 1) theta)) / 2.
double noisy_prob(double theta, int depth, const NoiseModel& model);
double noisy_prob_cosine(double theta, int depth, double eta);
/// p (1 - eta) + eta / 2.
double noisy_prob_linear(double idealProb, double eta);

/// Prior over the estimated probability p, used for noise-floor integrals.
struct PriorOverP {
  enum class Kind { UniformP, Point, Haar4, UniformTheta };
  Kind kind = Kind::UniformP;
  double point = 0.5;

  static PriorOverP uniform() { return {Kind::UniformP, 0.5}; }
  static PriorOverP at(double p) { return {Kind::Point, p}; }
  static PriorOverP haar4() { return {Kind::Haar4, 0.5}; }
  static PriorOverP uniformTheta() { return {Kind::UniformTheta, 0.5}; }
};

/// E_prior |1/2 - p| by quadrature.
double mean_abs_half_deviation(const PriorOverP& prior);

/// eta_d * E_prior |1/2 - p|.
double noise_floor(const NoiseModel& model, int depth, const PriorOverP& prior);

DepthCounts sample_noisy_shots(double theta, int depth, std::int64_t nShots,
                               const NoiseModel& model, Rng& rng);

/// Same, starting from the noiseless good-outcome probability (for example
/// taken from a statevector run).
DepthCounts sample_noisy_shots_from_prob(double idealProb, int depth, std::int64_t nShots,
                                         const NoiseModel& model, Rng& rng);

}  // namespace lodae
