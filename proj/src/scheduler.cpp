#include "lodae/scheduler.hpp"

#include <cmath>
#include <string>

#include "lodae/error.hpp"

namespace lodae {

Schedule power_law_schedule(const PowerLawConfig& config) {
  if (config.nShots < 1) fail(ErrorCode::kInvalidArgument, "power law: nShots must be >= 1");
  if (config.maxDepth < 0) fail(ErrorCode::kInvalidArgument, "power law: negative max depth");
  if (!(config.targetEps > 0.0)) fail(ErrorCode::kInvalidArgument, "power law: targetEps must be > 0");
  Schedule out;
  for (int d = 0; d <= config.maxDepth; ++d) {
    const double raw = static_cast<double>(config.nShots) * std::pow(2.0 * d + 1.0, config.nu);
    // guard exact products such as 500 * 3 against 1499.9999...
    const auto shots = static_cast<std::int64_t>(std::floor(raw * (1.0 + 1e-12)));
    out.push_back({d, shots});
  }
  return out;
}

std::int64_t schedule_oracle_calls(const Schedule& schedule) {
  std::int64_t total = 0;
  for (const auto& e : schedule) total += e.shots * (2 * static_cast<std::int64_t>(e.depth) + 1);
  return total;
}

double fisher_noisy(double nu, double nShots, int maxDepth, std::span<const double> gammaByDepth) {
  if (maxDepth < 0 || static_cast<std::size_t>(maxDepth) >= gammaByDepth.size()) {
    fail(ErrorCode::kOutOfRange, "fisher_noisy: gamma not defined up to depth " +
                                     std::to_string(maxDepth));
  }
  double sum = 0.0;
  for (int d = 0; d <= maxDepth; ++d) {
    sum += std::pow(2.0 * d + 1.0, nu + 2.0) *
           std::exp(-2.0 * gammaByDepth[static_cast<std::size_t>(d)]);
  }
  return nShots * sum;
}

double optimize_exponent(double targetEps, double nShots, int maxDepth,
                         std::span<const double> gammaByDepth, const ExponentSearch& search) {
  if (!(targetEps > 0.0)) fail(ErrorCode::kInvalidArgument, "optimize_exponent: eps must be > 0");
  if (!(search.lo < search.hi) || !(search.resolution > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "optimize_exponent: bad search range");
  }
  const double required = 1.0 / (targetEps * targetEps);
  auto feasible = [&](double nu) {
    return fisher_noisy(nu, nShots, maxDepth, gammaByDepth) >= required;
  };
  if (!feasible(search.hi)) {
    fail(ErrorCode::kInfeasible, "optimize_exponent: target eps " + std::to_string(targetEps) +
                                     " unreachable within the exponent range");
  }
  if (feasible(search.lo)) return search.lo;
  double lo = search.lo;  // infeasible
  double hi = search.hi;  // feasible
  while (hi - lo > search.resolution) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

DepthCounts subsample_without_replacement(const DepthCounts& pool, std::int64_t n, Rng& rng) {
  if (n < 0) fail(ErrorCode::kInvalidArgument, "subsample: negative size");
  if (n > pool.kept()) {
    fail(ErrorCode::kOutOfRange, "subsample: requested " + std::to_string(n) +
                                     " shots from a pool of " + std::to_string(pool.kept()));
  }
  DepthCounts out;
  out.depth = pool.depth;
  std::int64_t good = pool.nGood;
  std::int64_t remaining = pool.kept();
  for (std::int64_t i = 0; i < n; ++i) {
    const bool pickGood = rng.uniform() * static_cast<double>(remaining) < static_cast<double>(good);
    if (pickGood) {
      ++out.nGood;
      --good;
    } else {
      ++out.nBad;
    }
    --remaining;
  }
  return out;
}

}  // namespace lodae
