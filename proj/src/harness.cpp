#include "lodae/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>

#include "lodae/config.hpp"
#include "lodae/error.hpp"

namespace lodae {

namespace {

// Stream ids; trial i uses kPoolStream + i etc.
constexpr std::uint64_t kPoolStream = 0;
constexpr std::uint64_t kCalibrationStream = std::uint64_t{1} << 40;
constexpr std::uint64_t kEvalStream = std::uint64_t{2} << 40;

template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max(1, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr firstError;
  std::mutex errorMutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(errorMutex);
          if (!firstError) firstError = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (firstError) std::rethrow_exception(firstError);
}

Vec4 random_unit(Rng& rng) {
  Vec4 v{};
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& c : v) {
      c = rng.normal();
      n2 += c * c;
    }
  } while (n2 < 1e-24);
  const double n = std::sqrt(n2);
  for (double& c : v) c /= n;
  return v;
}

double dot(const Vec4& a, const Vec4& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i) s += a[i] * b[i];
  return s;
}

double abs_err_theta(const Estimate& e, double thetaTrue) { return std::abs(e.thetaHat - thetaTrue); }

}  // namespace

const char* vector_mode_name(VectorMode m) {
  return m == VectorMode::Haar ? "haar" : "uniform-theta";
}

double VectorPair::innerProduct() const { return dot(x, y); }

double VectorPair::theta() const {
  return std::asin(std::min(1.0, std::abs(innerProduct())));
}

VectorPair vector_pair_with_theta(Rng& rng, double theta) {
  VectorPair p;
  p.x = random_unit(rng);
  // w: unit vector orthogonal to x
  Vec4 w{};
  double n2 = 0.0;
  do {
    w = random_unit(rng);
    const double proj = dot(w, p.x);
    n2 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      w[i] -= proj * p.x[i];
      n2 += w[i] * w[i];
    }
  } while (n2 < 1e-12);
  const double n = std::sqrt(n2);
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  for (std::size_t i = 0; i < 4; ++i) p.y[i] = s * p.x[i] + c * w[i] / n;
  return p;
}

VectorPair sample_vector_pair(Rng& rng, VectorMode mode) {
  if (mode == VectorMode::Haar) {
    VectorPair p;
    p.x = random_unit(rng);
    p.y = random_unit(rng);
    return p;
  }
  const double theta = rng.uniform() * std::numbers::pi / 2.0;
  return vector_pair_with_theta(rng, theta);
}

// ---------------------------------------------------------------------------

ExperimentConfig::ExperimentConfig() { powerLaw.targetEps = default_power_law_targets(); }

std::vector<double> default_power_law_targets() {
  std::vector<double> out;
  for (int i = 0; i < 10; ++i) out.push_back(0.03 * std::pow(0.1, i / 9.0));
  return out;
}

bool ExperimentConfig::enabled(Algorithm a) const {
  return std::find(algorithms.begin(), algorithms.end(), a) != algorithms.end();
}

void ExperimentConfig::validate() const {
  if (nTrials < 1) fail(ErrorCode::kConfig, "n_trials must be positive");
  if (nShots < 1) fail(ErrorCode::kConfig, "n_shots must be positive");
  if (maxDepth < 0) fail(ErrorCode::kConfig, "max_depth must be nonnegative");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail(ErrorCode::kConfig, "epsilon must lie in (0, 1)");
  if (noise.maxDepth() < maxDepth) {
    fail(ErrorCode::kConfig, "noise model defines fewer depths than max_depth");
  }
  if ((enabled(Algorithm::Crt) || enabled(Algorithm::Hybrid)) && maxDepth < 2) {
    fail(ErrorCode::kConfig, "crt and hybrid need max_depth >= 2");
  }
  if (crtLowDepth < 0 || crtLowDepth > maxDepth) {
    fail(ErrorCode::kConfig, "crt_low_depth must lie in [0, max_depth]");
  }
  if (hybrid.calibrationTrials < 1) fail(ErrorCode::kConfig, "hybrid.calibration_trials must be >= 1");
  if (!(hybrid.betaHybrid >= 0.0)) fail(ErrorCode::kConfig, "hybrid.beta_hybrid must be >= 0");
  for (double e : powerLaw.targetEps) {
    if (!(e > 0.0)) fail(ErrorCode::kConfig, "powerlaw.target_eps entries must be positive");
  }
}

// ---------------------------------------------------------------------------

ShotPool simulate_pool(const ExperimentConfig& config, const VectorPair& pair, Rng& rng) {
  ShotPool pool;
  for (int d = 0; d <= config.maxDepth; ++d) {
    const StateVector state = run_statevector(build_iterated_circuit(pair.x, pair.y, d));
    const double ideal = std::norm(state.amplitude(kGoodOutcome));
    pool.byDepth.push_back(
        sample_noisy_shots_from_prob(ideal, d, config.nShots, config.noise, rng));
  }
  return pool;
}

PowerLawPlan plan_power_law(double targetEps, const ExperimentConfig& config,
                            std::span<const double> gamma) {
  PowerLawPlan plan;
  plan.targetEps = targetEps;
  try {
    plan.nu = optimize_exponent(targetEps, static_cast<double>(config.nShots), config.maxDepth, gamma,
                                config.powerLaw.search);
    plan.schedule = power_law_schedule({plan.nu, config.nShots, config.maxDepth, targetEps});
  } catch (const Error& e) {
    plan.error = e.what();
  }
  return plan;
}

TrialResult evaluate_trial(const ExperimentConfig& config, int trialId, const VectorPair& pair,
                           const ShotPool& pool, const TrialContext& context, Rng& rng) {
  TrialResult r;
  r.trialId = trialId;
  r.thetaTrue = pair.theta();
  const double s = std::sin(r.thetaTrue);
  r.pTrue = s * s;
  const auto& counts = pool.byDepth;
  const NoiseModel* mleNoise = config.mleNoiseAware ? &config.noise : nullptr;

  auto guarded = [&](Algorithm a, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      r.errors.push_back(std::string(algorithm_name(a)) + ": " + e.what());
    }
  };

  if (config.enabled(Algorithm::Direct)) {
    guarded(Algorithm::Direct, [&] { r.estimates.push_back(direct_estimate(counts.at(0))); });
  }

  // MLE with max depth D uses depths 0..D of the pool.
  std::vector<std::optional<Estimate>> mleByDepth(static_cast<std::size_t>(config.maxDepth) + 1);
  auto mle_at = [&](int D) -> const Estimate& {
    auto& slot = mleByDepth[static_cast<std::size_t>(D)];
    if (!slot) {
      slot = mle_estimate(std::span(counts).first(static_cast<std::size_t>(D) + 1), config.epsilon,
                          mleNoise);
    }
    return *slot;
  };

  if (config.enabled(Algorithm::Mle)) {
    for (int D = 0; D <= config.maxDepth; ++D) {
      guarded(Algorithm::Mle, [&] { r.estimates.push_back(mle_at(D)); });
    }
  }

  const bool wantCrt = config.enabled(Algorithm::Crt);
  const bool wantHybrid = config.enabled(Algorithm::Hybrid);
  if (wantCrt || wantHybrid) {
    for (int D = 2; D <= config.maxDepth; ++D) {
      std::optional<Estimate> crt;
      guarded(Algorithm::Crt, [&] {
        const Estimate& low = mle_at(config.crtLowDepth);
        crt = crt_estimate(counts.at(static_cast<std::size_t>(D)),
                           counts.at(static_cast<std::size_t>(D) - 1), low, D, config.crtOffsets,
                           config.crtLowDepth);
      });
      if (!crt) continue;
      if (wantCrt) r.estimates.push_back(*crt);
      if (wantHybrid) {
        guarded(Algorithm::Hybrid, [&] {
          const auto idx = static_cast<std::size_t>(D - 2);
          if (idx >= context.hybrid.size()) fail(ErrorCode::kConfig, "missing hybrid calibration");
          r.estimates.push_back(hybrid_estimate(mle_at(config.crtLowDepth), *crt, context.hybrid[idx]));
        });
      }
    }
  }

  if (config.enabled(Algorithm::PowerLaw)) {
    guarded(Algorithm::PowerLaw, [&] {
      if (context.powerLawGamma.size() < static_cast<std::size_t>(config.maxDepth) + 1) {
        fail(ErrorCode::kConfig, "missing power-law damping rates");
      }
      const NoiseModel likelihood(0.0, {context.powerLawGamma.begin(),
                                        context.powerLawGamma.begin() + config.maxDepth + 1});
      for (std::size_t j = 0; j < context.powerLawPlans.size(); ++j) {
        const PowerLawPlan& plan = context.powerLawPlans[j];
        if (!plan.error.empty()) continue;
        std::vector<DepthCounts> sub;
        for (const auto& entry : plan.schedule) {
          const DepthCounts& full = counts.at(static_cast<std::size_t>(entry.depth));
          const std::int64_t n = std::min(entry.shots, full.kept());
          if (n > 0) sub.push_back(subsample_without_replacement(full, n, rng));
        }
        Estimate e = mle_estimate(sub, config.epsilon, &likelihood);
        e.algorithm = Algorithm::PowerLaw;
        e.depth = static_cast<int>(j);
        char tag[96];
        std::snprintf(tag, sizeof tag, "eps=%.6g;nu=%.4f", plan.targetEps, plan.nu);
        e.branch = tag;
        r.estimates.push_back(std::move(e));
      }
    });
  }
  return r;
}

TrialResult run_trial(const ExperimentConfig& config, const VectorPair& pair, Rng& rng,
                      const TrialContext& context) {
  const ShotPool pool = simulate_pool(config, pair, rng);
  return evaluate_trial(config, 0, pair, pool, context, rng);
}

double crt_exact_error(double theta, int maxDepth, CrtOffsets offsets) {
  const double pD = analytic_success_prob(theta, maxDepth);
  const double pDm1 = analytic_success_prob(theta, maxDepth - 1);
  const CrtContext ctx = crt_reconstruct(pD, pDm1, theta, maxDepth, offsets);
  const double s = std::sin(ctx.thetaHat());
  const double p = std::sin(theta);
  return std::abs(s * s - p * p);
}

std::vector<HybridCalibration> calibrate_hybrid(const ExperimentConfig& config, int nCalibTrials,
                                                Rng& rng) {
  if (nCalibTrials < 1) fail(ErrorCode::kInvalidArgument, "calibrate_hybrid: need >= 1 trial");
  if (config.maxDepth < 2) fail(ErrorCode::kInvalidArgument, "calibrate_hybrid: max depth < 2");
  const NoiseModel* mleNoise = config.mleNoiseAware ? &config.noise : nullptr;
  const auto nDepths = static_cast<std::size_t>(config.maxDepth - 1);

  struct Sample {
    double pTrue = 0.0;
    Estimate low;
    std::vector<std::optional<Estimate>> crt;
  };
  std::vector<Sample> samples;
  double mleErr = 0.0;
  std::vector<double> crtExact(nDepths, 0.0);
  for (int i = 0; i < nCalibTrials; ++i) {
    const VectorPair pair = sample_vector_pair(rng, config.vectorMode);
    const ShotPool pool = simulate_pool(config, pair, rng);
    Sample s;
    const double theta = pair.theta();
    s.pTrue = std::sin(theta) * std::sin(theta);
    s.low = mle_estimate(std::span(pool.byDepth).first(static_cast<std::size_t>(config.crtLowDepth) + 1),
                         config.epsilon, mleNoise);
    mleErr += std::abs(s.low.pHat - s.pTrue);
    for (int D = 2; D <= config.maxDepth; ++D) {
      crtExact[static_cast<std::size_t>(D - 2)] += crt_exact_error(theta, D, config.crtOffsets);
      if (config.hybrid.tuneBeta) {
        try {
          s.crt.push_back(crt_estimate(pool.byDepth[static_cast<std::size_t>(D)],
                                       pool.byDepth[static_cast<std::size_t>(D) - 1], s.low, D,
                                       config.crtOffsets, config.crtLowDepth));
        } catch (const Error&) {
          s.crt.push_back(std::nullopt);
        }
      }
    }
    samples.push_back(std::move(s));
  }

  std::vector<HybridCalibration> out;
  for (int D = 2; D <= config.maxDepth; ++D) {
    HybridCalibration cal;
    cal.depth = D;
    cal.mleAvgDepth2 = mleErr / nCalibTrials;
    cal.crtExactAtD = crtExact[static_cast<std::size_t>(D - 2)] / nCalibTrials;
    cal.betaHybrid = config.hybrid.betaHybrid;
    if (config.hybrid.tuneBeta) {
      double bestErr = std::numeric_limits<double>::infinity();
      for (int step = 0; step <= 40; ++step) {
        HybridCalibration trialCal = cal;
        trialCal.betaHybrid = 0.25 * step;
        double err = 0.0;
        for (const auto& s : samples) {
          const auto& crt = s.crt[static_cast<std::size_t>(D - 2)];
          const Estimate pick = crt ? hybrid_estimate(s.low, *crt, trialCal) : s.low;
          err += std::abs(pick.pHat - s.pTrue);
        }
        if (err < bestErr - 1e-15) {
          bestErr = err;
          cal.betaHybrid = trialCal.betaHybrid;
        }
      }
    }
    out.push_back(cal);
  }
  return out;
}

std::vector<double> fit_depolarizing(std::span<const std::vector<DepthCounts>> countsByTrial,
                                     std::span<const double> trueThetas) {
  if (countsByTrial.size() != trueThetas.size()) {
    fail(ErrorCode::kInvalidArgument, "fit_depolarizing: counts and thetas differ in length");
  }
  std::map<int, std::pair<double, double>> sums;  // depth -> (sum c y, sum c^2)
  std::map<int, int> trials;
  for (std::size_t i = 0; i < countsByTrial.size(); ++i) {
    for (const auto& c : countsByTrial[i]) {
      if (c.kept() == 0) continue;
      const double rate = static_cast<double>(c.nGood) / static_cast<double>(c.kept());
      const double cosine = std::cos(2.0 * (2.0 * c.depth + 1.0) * trueThetas[i]);
      auto& [cy, cc] = sums[c.depth];
      cy += cosine * (1.0 - 2.0 * rate);
      cc += cosine * cosine;
      ++trials[c.depth];
    }
  }
  if (sums.empty()) fail(ErrorCode::kInvalidArgument, "fit_depolarizing: no data");
  const int maxDepth = sums.rbegin()->first;
  std::vector<double> gamma(static_cast<std::size_t>(maxDepth) + 1, 0.0);
  for (int d = 0; d <= maxDepth; ++d) {
    if (trials[d] < 2) {
      fail(ErrorCode::kInvalidArgument,
           "fit_depolarizing: need at least 2 trials at depth " + std::to_string(d));
    }
    const auto [cy, cc] = sums[d];
    if (cc / trials[d] < 1e-6) {
      fail(ErrorCode::kNumerical, "fit_depolarizing: depth " + std::to_string(d) +
                                      " unidentifiable (all probabilities near 1/2)");
    }
    const double lambda = std::clamp(cy / cc, 1e-12, 1.0);
    gamma[static_cast<std::size_t>(d)] = -std::log(lambda);
  }
  return gamma;
}

// ---------------------------------------------------------------------------

std::vector<AggregateRow> aggregate(std::span<const TrialResult> trials) {
  struct Acc {
    std::vector<double> errP;
    double errTheta = 0.0;
    std::int64_t calls = 0;
  };
  std::map<std::pair<int, int>, Acc> groups;
  for (const auto& t : trials) {
    for (const auto& e : t.estimates) {
      auto& acc = groups[{static_cast<int>(e.algorithm), e.depth}];
      acc.errP.push_back(std::abs(e.pHat - t.pTrue));
      acc.errTheta += abs_err_theta(e, t.thetaTrue);
      acc.calls += e.oracleCalls;
    }
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, acc] : groups) {
    AggregateRow row;
    row.algorithm = static_cast<Algorithm>(key.first);
    row.depth = key.second;
    row.nTrials = static_cast<int>(acc.errP.size());
    const double n = static_cast<double>(row.nTrials);
    row.totalOracleCalls = acc.calls;
    row.meanOracleCalls = static_cast<double>(acc.calls) / n;
    double sum = 0.0;
    for (double e : acc.errP) sum += e;
    row.meanAbsErrP = sum / n;
    double var = 0.0;
    for (double e : acc.errP) var += (e - row.meanAbsErrP) * (e - row.meanAbsErrP);
    row.stdErrP = row.nTrials > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    row.meanAbsErrTheta = acc.errTheta / n;
    out.push_back(row);
  }
  return out;
}

std::vector<HistogramBin> crt_error_histogram(std::span<const TrialResult> trials) {
  constexpr int kBins = 40;
  constexpr double kMax = 0.5;
  std::map<int, std::vector<std::int64_t>> bins;
  for (const auto& t : trials) {
    for (const auto& e : t.estimates) {
      if (e.algorithm != Algorithm::Crt) continue;
      auto& b = bins[e.depth];
      if (b.empty()) b.assign(kBins, 0);
      const double err = std::abs(e.pHat - t.pTrue);
      const int k = std::min(kBins - 1, static_cast<int>(err / kMax * kBins));
      ++b[static_cast<std::size_t>(k)];
    }
  }
  std::vector<HistogramBin> out;
  for (const auto& [depth, b] : bins) {
    for (int k = 0; k < kBins; ++k) {
      out.push_back({depth, kMax * k / kBins, kMax * (k + 1) / kBins, b[static_cast<std::size_t>(k)]});
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  const int n = config.nTrials;
  result.pairs.resize(static_cast<std::size_t>(n));
  result.pools.resize(static_cast<std::size_t>(n));
  parallel_for(n, config.threads, [&](int i) {
    Rng rng(config.seed, kPoolStream + static_cast<std::uint64_t>(i));
    const auto idx = static_cast<std::size_t>(i);
    result.pairs[idx] = sample_vector_pair(rng, config.vectorMode);
    result.pools[idx] = simulate_pool(config, result.pairs[idx], rng);
  });

  if (config.enabled(Algorithm::PowerLaw)) {
    std::vector<double> gamma = config.noise.effectiveGammas();
    gamma.resize(static_cast<std::size_t>(config.maxDepth) + 1);
    if (config.powerLaw.useFittedGamma) {
      try {
        std::vector<std::vector<DepthCounts>> counts;
        std::vector<double> thetas;
        for (int i = 0; i < n; ++i) {
          counts.push_back(result.pools[static_cast<std::size_t>(i)].byDepth);
          thetas.push_back(result.pairs[static_cast<std::size_t>(i)].theta());
        }
        result.gammaFit = fit_depolarizing(counts, thetas);
        // the likelihood model requires nondecreasing rates
        gamma = *result.gammaFit;
        for (std::size_t d = 1; d < gamma.size(); ++d) gamma[d] = std::max(gamma[d], gamma[d - 1]);
      } catch (const Error& e) {
        result.gammaFitError = e.what();
      }
    }
    result.context.powerLawGamma = gamma;
    for (double eps : config.powerLaw.targetEps) {
      result.context.powerLawPlans.push_back(plan_power_law(eps, config, gamma));
    }
  }

  if (config.enabled(Algorithm::Hybrid)) {
    if (!config.hybrid.calibrationFile.empty()) {
      result.context.hybrid = calibration_from_json(Json::parse(
          [&] {
            std::ifstream in(config.hybrid.calibrationFile);
            if (!in) fail(ErrorCode::kIo, "cannot read " + config.hybrid.calibrationFile);
            return std::string(std::istreambuf_iterator<char>(in), {});
          }()));
    } else {
      Rng rng(config.seed, kCalibrationStream);
      result.context.hybrid = calibrate_hybrid(config, config.hybrid.calibrationTrials, rng);
    }
  }

  result.trials.resize(static_cast<std::size_t>(n));
  parallel_for(n, config.threads, [&](int i) {
    Rng rng(config.seed, kEvalStream + static_cast<std::uint64_t>(i));
    const auto idx = static_cast<std::size_t>(i);
    result.trials[idx] =
        evaluate_trial(config, i, result.pairs[idx], result.pools[idx], result.context, rng);
  });
  result.aggregates = aggregate(result.trials);
  return result;
}

std::vector<ResourceRow> resource_table(int maxDepth) {
  const Vec4 x{0.5, 0.5, 0.5, 0.5};
  const Vec4 y{0.1, 0.7, 0.1, 0.7};
  const double n = std::sqrt(0.01 + 0.49 + 0.01 + 0.49);
  const Vec4 yn{y[0] / n, y[1] / n, y[2] / n, y[3] / n};
  std::vector<ResourceRow> rows;
  for (int t = 0; t <= maxDepth; ++t) {
    const Circuit c = build_iterated_circuit(x, yn, t);
    const CompiledStats rbs = two_qubit_stats(c);
    const CompiledStats cz = compiled_stats(compile_to_two_qubit(c));
    rows.push_back({t, rbs.twoQubitCount, rbs.twoQubitDepth, cz.twoQubitCount, cz.twoQubitDepth});
  }
  return rows;
}

}  // namespace lodae
