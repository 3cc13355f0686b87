#include "lodae/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lodae/error.hpp"

namespace lodae {

NoiseModel::NoiseModel(double betaReadout, std::vector<double> gammaByDepth, double leakProb,
                       std::optional<Correlation> correlation)
    : beta_(betaReadout), gamma_(std::move(gammaByDepth)), leak_(0.0) {
  if (!(beta_ >= 0.0 && beta_ < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "betaReadout must lie in [0, 1)");
  }
  if (gamma_.empty()) fail(ErrorCode::kInvalidArgument, "gammaByDepth is empty");
  for (std::size_t d = 0; d < gamma_.size(); ++d) {
    if (!(gamma_[d] >= 0.0)) {
      fail(ErrorCode::kInvalidArgument, "gamma_d must be nonnegative");
    }
    if (d > 0 && gamma_[d] < gamma_[d - 1]) {
      fail(ErrorCode::kInvalidArgument, "gamma_d must be nondecreasing in depth");
    }
  }
  setLeakProb(leakProb);
  setCorrelation(correlation);
}

void NoiseModel::setLeakProb(double p) {
  if (!(p >= 0.0 && p < 1.0)) fail(ErrorCode::kInvalidArgument, "leakProb must lie in [0, 1)");
  leak_ = p;
}

void NoiseModel::setCorrelation(std::optional<Correlation> c) {
  if (c) {
    if (!(c->pSwitch >= 0.0 && c->pSwitch <= 1.0)) {
      fail(ErrorCode::kInvalidArgument, "correlation.pSwitch must lie in [0, 1]");
    }
    if (!(c->burstScale >= 1.0)) {
      fail(ErrorCode::kInvalidArgument, "correlation.burstScale must be >= 1");
    }
    if (!(c->burstFraction > 0.0 && c->burstFraction < 1.0) ||
        c->burstFraction * c->burstScale > 1.0) {
      fail(ErrorCode::kInvalidArgument,
           "correlation.burstFraction must lie in (0, 1) with burstFraction * burstScale <= 1");
    }
  }
  correlation_ = c;
}

std::vector<double> NoiseModel::effectiveGammas() const {
  std::vector<double> out(gamma_.size());
  for (std::size_t d = 0; d < gamma_.size(); ++d) out[d] = gamma_[d] - std::log1p(-beta_);
  return out;
}

std::vector<double> reference_gammas(int maxDepth) {
  if (maxDepth < 0) fail(ErrorCode::kInvalidArgument, "maxDepth must be nonnegative");
  std::vector<double> g(static_cast<std::size_t>(maxDepth) + 1);
  for (int d = 0; d <= maxDepth; ++d) {
    g[static_cast<std::size_t>(d)] = kReferenceGamma0 + (kReferenceGamma7 - kReferenceGamma0) * d / 7.0;
  }
  return g;
}

NoiseModel NoiseModel::reference_default(int maxDepth) {
  // E|1/2 - p| = 1/pi for p = (x.y)^2 with x, y Haar on S^3.
  const double eta0 = kReferenceDepth0Floor * std::numbers::pi;
  const double beta = 1.0 - (1.0 - eta0) * std::exp(kReferenceGamma0);
  return NoiseModel(beta, reference_gammas(maxDepth));
}

NoiseModel NoiseModel::noiseless(int maxDepth) {
  return NoiseModel(0.0, std::vector<double>(static_cast<std::size_t>(maxDepth) + 1, 0.0));
}

NoiseModel NoiseModel::with_depth0_eta(double eta0, std::vector<double> gammaByDepth) {
  if (gammaByDepth.empty()) fail(ErrorCode::kInvalidArgument, "gammaByDepth is empty");
  const double beta = 1.0 - (1.0 - eta0) * std::exp(gammaByDepth.front());
  return NoiseModel(beta, std::move(gammaByDepth));
}

double effective_eta(const NoiseModel& model, int depth) {
  if (depth < 0 || depth > model.maxDepth()) {
    fail(ErrorCode::kOutOfRange, "depth " + std::to_string(depth) + " outside noise model range");
  }
  return 1.0 - (1.0 - model.betaReadout()) *
                   std::exp(-model.gammaByDepth()[static_cast<std::size_t>(depth)]);
}

double noisy_prob_cosine(double theta, int depth, double eta) {
  return 0.5 * (1.0 - (1.0 - eta) * std::cos(2.0 * (2.0 * depth + 1.0) * theta));
}

double noisy_prob_linear(double idealProb, double eta) {
  return idealProb * (1.0 - eta) + 0.5 * eta;
}

double noisy_prob(double theta, int depth, const NoiseModel& model) {
  return noisy_prob_cosine(theta, depth, effective_eta(model, depth));
}

double mean_abs_half_deviation(const PriorOverP& prior) {
  constexpr int kNodes = 200000;
  double sum = 0.0;
  switch (prior.kind) {
    case PriorOverP::Kind::Point:
      return std::abs(0.5 - prior.point);
    case PriorOverP::Kind::UniformP:
      for (int i = 0; i < kNodes; ++i) {
        const double p = (i + 0.5) / kNodes;
        sum += std::abs(0.5 - p);
      }
      return sum / kNodes;
    case PriorOverP::Kind::UniformTheta:
      for (int i = 0; i < kNodes; ++i) {
        const double theta = (i + 0.5) / kNodes * std::numbers::pi / 2.0;
        const double s = std::sin(theta);
        sum += std::abs(0.5 - s * s);
      }
      return sum / kNodes;
    case PriorOverP::Kind::Haar4: {
      // x.y = sin(phi), phi in [-pi/2, pi/2], density (2/pi) cos^2(phi).
      const double h = std::numbers::pi / kNodes;
      for (int i = 0; i < kNodes; ++i) {
        const double phi = -std::numbers::pi / 2.0 + (i + 0.5) * h;
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        sum += (2.0 / std::numbers::pi) * c * c * std::abs(0.5 - s * s) * h;
      }
      return sum;
    }
  }
  return 0.0;
}

double noise_floor(const NoiseModel& model, int depth, const PriorOverP& prior) {
  return effective_eta(model, depth) * mean_abs_half_deviation(prior);
}

DepthCounts sample_noisy_shots(double theta, int depth, std::int64_t nShots,
                               const NoiseModel& model, Rng& rng) {
  return sample_noisy_shots_from_prob(analytic_success_prob(theta, depth), depth, nShots, model,
                                      rng);
}

DepthCounts sample_noisy_shots_from_prob(double idealProb, int depth, std::int64_t nShots,
                                         const NoiseModel& model, Rng& rng) {
  if (nShots < 0) fail(ErrorCode::kInvalidArgument, "sample_noisy_shots: negative shots");
  const double eta = effective_eta(model, depth);
  DepthCounts counts;
  counts.depth = depth;
  if (nShots == 0) return counts;

  const double leak = model.leakProb();
  if (!model.correlation()) {
    const std::int64_t kept = leak > 0.0 ? rng.binomial(nShots, 1.0 - leak) : nShots;
    counts.nDiscarded = nShots - kept;
    counts.nGood = rng.binomial(kept, noisy_prob_linear(idealProb, eta));
    counts.nBad = kept - counts.nGood;
    return counts;
  }

  const Correlation& c = *model.correlation();
  const double etaBurst = std::min(1.0, eta * c.burstScale);
  // calm state absorbs any clamping of the bursty one so the mean stays eta
  const double etaCalm = std::max(0.0, (eta - c.burstFraction * etaBurst) / (1.0 - c.burstFraction));
  const double pBurst = noisy_prob_linear(idealProb, etaBurst);
  const double pCalm = noisy_prob_linear(idealProb, etaCalm);
  bool bursty = rng.bernoulli(c.burstFraction);
  for (std::int64_t s = 0; s < nShots; ++s) {
    if (s > 0 && rng.bernoulli(c.pSwitch)) bursty = rng.bernoulli(c.burstFraction);
    if (leak > 0.0 && rng.bernoulli(leak)) {
      ++counts.nDiscarded;
      continue;
    }
    if (rng.bernoulli(bursty ? pBurst : pCalm)) {
      ++counts.nGood;
    } else {
      ++counts.nBad;
    }
  }
  return counts;
}

}  // namespace lodae
