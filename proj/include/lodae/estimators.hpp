#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lodae/noise.hpp"
#include "lodae/simulator.hpp"

namespace lodae {

enum class Algorithm { Direct, Mle, Crt, Hybrid, PowerLaw };

const char* algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct Estimate {
  Algorithm algorithm = Algorithm::Direct;
  int depth = 0;  // max depth, or schedule index for power-law runs
  double thetaHat = 0.0;
  double pHat = 0.0;
  std::int64_t oracleCalls = 0;
  std::string branch;  // hybrid: "mle" | "crt"; power law: schedule description
  std::vector<double> diagnostics;
};

/// Fills pHat = sin^2(theta).
Estimate make_estimate(Algorithm algorithm, int depth, double theta, std::int64_t oracleCalls);

std::int64_t oracle_calls(const DepthCounts& counts);
std::int64_t oracle_calls(std::span<const DepthCounts> counts);

/// Posterior over theta_k = pi k eps / 2, k in [0, 1/eps). Kept in log space
/// and renormalized (log-sum-exp = 0) after every update.
class PosteriorGrid {
 public:
  explicit PosteriorGrid(double epsilon);

  double epsilon() const { return epsilon_; }
  std::size_t size() const { return logWeights_.size(); }
  double theta(std::size_t k) const;

  std::span<const double> logWeights() const { return logWeights_; }
  std::vector<double> weights() const;

  /// Adds a log-likelihood per grid point, then renormalizes. Throws
  /// kNumerical when every point has zero likelihood.
  void accumulate(std::span<const double> logLikelihood);

  /// Index of the largest weight; ties go to the smaller index.
  std::size_t argmax() const;

 private:
  double epsilon_;
  std::vector<double> logWeights_;
};

/// Noiseless likelihood sin^2((2d+1)th)^good cos^2((2d+1)th)^bad, or with a
/// noise model the depolarized p_d(1)^good p_d(0)^bad.
PosteriorGrid bayesian_update(PosteriorGrid grid, int depth, const DepthCounts& counts,
                              const NoiseModel* noise = nullptr);

Estimate direct_estimate(const DepthCounts& counts);

inline constexpr double kDefaultEpsilon = 0.001;

Estimate mle_estimate(std::span<const DepthCounts> countsByDepth, double epsilon = kDefaultEpsilon,
                      const NoiseModel* noise = nullptr);

/// Unique v in [0, n1 n2) with v = r1 (mod n1), v = r2 (mod n2). Residues may
/// be negative.
std::int64_t crt_solve(std::int64_t r1, std::int64_t n1, std::int64_t r2, std::int64_t n2);

enum class CrtOffsets {
  Literal,   // (1,0) (0,1) (1,1) (0,2)
  Extended,  // {-1,0,1}^2
};

const char* crt_offsets_name(CrtOffsets o);
std::vector<std::pair<int, int>> crt_offset_pairs(CrtOffsets o);

struct CrtContext {
  int maxDepth = 0;
  std::int64_t n1 = 0;       // 2D - 1, residue from the depth-D circuit
  std::int64_t n2 = 0;       // 2D + 1, residue from the depth-(D-1) circuit
  std::int64_t modulus = 0;  // 4D^2 - 1
  double l = 0.0;            // (n1 / pi) asin(sqrt(p_D)) in [0, n1/2]
  double h = 0.0;            // (n2 / pi) asin(sqrt(p_{D-1})) in [0, n2/2]
  int s1 = 1;
  int s2 = 1;
  std::vector<std::int64_t> candidates;  // folded into [0, modulus/2]
  std::int64_t selected = 0;

  double thetaHat() const;
};

/// Two-modulus reconstruction from the success probabilities at depths D and
/// D-1 and a low-precision angle used for signs and the final selection.
CrtContext crt_reconstruct(double pD, double pDminus1, double thetaPrime, int maxDepth,
                           CrtOffsets offsets = CrtOffsets::Extended);

/// `lowDepth` is the depth <= lowDepthMax MLE estimate; its oracle calls are
/// included and pool depths it already covers are not counted twice.
Estimate crt_estimate(const DepthCounts& atD, const DepthCounts& atDminus1, const Estimate& lowDepth,
                      int maxDepth, CrtOffsets offsets = CrtOffsets::Extended,
                      int lowDepthMax = 2);

struct HybridCalibration {
  int depth = 0;
  double mleAvgDepth2 = 0.0;
  double crtExactAtD = 0.0;
  double betaHybrid = 1.0;

  double threshold() const;
};

/// CRT estimate unless |p0 - q0| exceeds betaHybrid |MLE_avg(2) - CRT_exact(D)|.
Estimate hybrid_estimate(const Estimate& mleLowDepth, const Estimate& crt,
                         const HybridCalibration& cal);

}  // namespace lodae
