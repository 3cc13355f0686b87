#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lodae/circuit.hpp"
#include "lodae/estimators.hpp"
#include "lodae/noise.hpp"
#include "lodae/rng.hpp"
#include "lodae/scheduler.hpp"

namespace lodae {

enum class VectorMode { Haar, UniformTheta };

const char* vector_mode_name(VectorMode m);

struct VectorPair {
  Vec4 x{};
  Vec4 y{};

  double innerProduct() const;
  /// asin(|x.y|), in [0, pi/2]. The success probability only depends on
  /// (x.y)^2, so the sign of the inner product is not identifiable.
  double theta() const;
};

VectorPair sample_vector_pair(Rng& rng, VectorMode mode);

/// Random pair with x.y = sin(theta).
VectorPair vector_pair_with_theta(Rng& rng, double theta);

struct HybridOptions {
  double betaHybrid = 1.0;
  int calibrationTrials = 50;
  bool tuneBeta = false;
  std::string calibrationFile;  // empty: calibrate at run time
};

struct PowerLawOptions {
  std::vector<double> targetEps;
  ExponentSearch search;
  bool useFittedGamma = true;
};

struct ExperimentConfig {
  int nTrials = 50;
  std::int64_t nShots = 500;
  int maxDepth = 7;
  double epsilon = kDefaultEpsilon;
  NoiseModel noise = NoiseModel::reference_default(7);
  std::vector<Algorithm> algorithms{Algorithm::Direct, Algorithm::Mle, Algorithm::Crt,
                                    Algorithm::Hybrid, Algorithm::PowerLaw};
  VectorMode vectorMode = VectorMode::Haar;
  std::uint64_t seed = 20211;
  bool mleNoiseAware = false;
  CrtOffsets crtOffsets = CrtOffsets::Extended;
  int crtLowDepth = 2;
  HybridOptions hybrid;
  PowerLawOptions powerLaw;
  int threads = 0;  // 0: hardware concurrency
  std::string outputDir = "out";

  ExperimentConfig();

  bool enabled(Algorithm a) const;
  /// Throws kConfig on any violated invariant.
  void validate() const;
};

/// Default power-law target errors: ten values log-spaced from 0.03 to 0.003.
std::vector<double> default_power_law_targets();

/// Recorded shots of one trial, one entry per depth 0..maxDepth.
struct ShotPool {
  std::vector<DepthCounts> byDepth;
};

/// Runs U^d on the statevector simulator for every depth and samples noisy
/// postselected shots from the resulting good-outcome probability.
ShotPool simulate_pool(const ExperimentConfig& config, const VectorPair& pair, Rng& rng);

struct PowerLawPlan {
  double targetEps = 0.0;
  double nu = 0.0;
  Schedule schedule;
  std::string error;  // non-empty if the target was infeasible
};

/// Everything a trial needs beyond its own shots.
struct TrialContext {
  std::vector<HybridCalibration> hybrid;  // indexed by D - 2
  std::vector<double> powerLawGamma;      // damping rates used by the power-law likelihood
  std::vector<PowerLawPlan> powerLawPlans;
};

struct TrialResult {
  int trialId = 0;
  double thetaTrue = 0.0;
  double pTrue = 0.0;
  std::vector<Estimate> estimates;
  std::vector<std::string> errors;
};

TrialResult evaluate_trial(const ExperimentConfig& config, int trialId, const VectorPair& pair,
                           const ShotPool& pool, const TrialContext& context, Rng& rng);

/// simulate_pool followed by evaluate_trial on the same stream.
TrialResult run_trial(const ExperimentConfig& config, const VectorPair& pair, Rng& rng,
                      const TrialContext& context = {});

/// One calibration per D in 2..maxDepth.
std::vector<HybridCalibration> calibrate_hybrid(const ExperimentConfig& config, int nCalibTrials,
                                                Rng& rng);

/// Noiseless CRT with exact probabilities and exact signs; error |p_hat - p|.
double crt_exact_error(double theta, int maxDepth, CrtOffsets offsets = CrtOffsets::Extended);

/// Least-squares fit of 1 - 2 r = exp(-gamma_d) cos(2 (2d+1) theta) per depth.
std::vector<double> fit_depolarizing(std::span<const std::vector<DepthCounts>> countsByTrial,
                                     std::span<const double> trueThetas);

PowerLawPlan plan_power_law(double targetEps, const ExperimentConfig& config,
                            std::span<const double> gamma);

struct AggregateRow {
  Algorithm algorithm = Algorithm::Direct;
  int depth = 0;
  int nTrials = 0;
  std::int64_t totalOracleCalls = 0;
  double meanOracleCalls = 0.0;
  double meanAbsErrP = 0.0;
  double stdErrP = 0.0;
  double meanAbsErrTheta = 0.0;
};

std::vector<AggregateRow> aggregate(std::span<const TrialResult> trials);

struct ExperimentResult {
  std::vector<VectorPair> pairs;
  std::vector<ShotPool> pools;
  std::vector<TrialResult> trials;
  std::vector<AggregateRow> aggregates;
  TrialContext context;
  std::optional<std::vector<double>> gammaFit;
  std::string gammaFitError;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

struct HistogramBin {
  int depth = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t count = 0;
};

/// abs_err_p histogram of CRT estimates per depth, 40 bins over [0, 0.5].
std::vector<HistogramBin> crt_error_histogram(std::span<const TrialResult> trials);

/// Writes trials.csv, aggregate.csv, crt_histogram.csv, counts.csv and
/// manifest.json under `dir`.
void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& dir);

struct ResourceRow {
  int t = 0;
  std::size_t rbsCount = 0;
  std::size_t rbsDepth = 0;
  std::size_t twoQubitCount = 0;
  std::size_t twoQubitDepth = 0;
};

std::vector<ResourceRow> resource_table(int maxDepth);
std::string resource_table_csv(int maxDepth);

/// Runs one experiment per value of `param` (max_depth, epsilon or shots),
/// each into dir/<param>=<value>, plus dir/sweep.csv.
void run_sweep(const ExperimentConfig& config, const std::string& param,
               std::span<const double> values, const std::filesystem::path& dir);

/// Parses counts.csv as written by emit_outputs.
struct CountsTable {
  std::vector<std::vector<DepthCounts>> countsByTrial;
  std::vector<double> thetas;
};
CountsTable read_counts_csv(const std::filesystem::path& path);

}  // namespace lodae
