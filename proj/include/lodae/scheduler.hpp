#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lodae/rng.hpp"
#include "lodae/simulator.hpp"

namespace lodae {

struct PowerLawConfig {
  double nu = 0.0;
  std::int64_t nShots = 500;
  int maxDepth = 7;
  double targetEps = 0.01;
};

struct ScheduleEntry {
  int depth = 0;
  std::int64_t shots = 0;

  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

using Schedule = std::vector<ScheduleEntry>;

/// (d, floor(nShots (2d+1)^nu)) for d = 0..D; zero-shot entries are kept.
Schedule power_law_schedule(const PowerLawConfig& config);

std::int64_t schedule_oracle_calls(const Schedule& schedule);

/// nShots * sum_{d<=D} (2d+1)^(nu+2) exp(-2 gamma_d).
double fisher_noisy(double nu, double nShots, int maxDepth, std::span<const double> gammaByDepth);

struct ExponentSearch {
  double lo = -6.0;
  double hi = 6.0;
  double resolution = 1e-4;
};

/// Smallest nu in [lo, hi] (to `resolution`) with fisher_noisy >= eps^-2.
/// The oracle-call objective is increasing in nu, so this is the constrained
/// minimizer. Throws kInfeasible if even nu = hi falls short.
double optimize_exponent(double targetEps, double nShots, int maxDepth,
                         std::span<const double> gammaByDepth, const ExponentSearch& search = {});

/// Hypergeometric draw of n kept shots from the recorded pool.
DepthCounts subsample_without_replacement(const DepthCounts& pool, std::int64_t n, Rng& rng);

}  // namespace lodae
