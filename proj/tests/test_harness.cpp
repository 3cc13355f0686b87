#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "lodae/config.hpp"
#include "lodae/error.hpp"
#include "lodae/harness.hpp"

using namespace lodae;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lodae_test_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.nTrials = 6;
  c.nShots = 200;
  c.maxDepth = 4;
  c.epsilon = 0.002;
  c.noise = NoiseModel::reference_default(4);
  c.hybrid.calibrationTrials = 4;
  c.powerLaw.targetEps = {0.03, 0.01};
  c.threads = 2;
  return c;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("vector pairs") {
  Rng rng(51);
  for (int i = 0; i < 200; ++i) {
    for (auto mode : {VectorMode::Haar, VectorMode::UniformTheta}) {
      const VectorPair p = sample_vector_pair(rng, mode);
      double nx = 0, ny = 0;
      for (int k = 0; k < 4; ++k) {
        nx += p.x[static_cast<std::size_t>(k)] * p.x[static_cast<std::size_t>(k)];
        ny += p.y[static_cast<std::size_t>(k)] * p.y[static_cast<std::size_t>(k)];
      }
      CHECK(std::abs(nx - 1) < 1e-12);
      CHECK(std::abs(ny - 1) < 1e-12);
      CHECK(std::abs(p.innerProduct()) <= 1.0 + 1e-12);
      CHECK(p.theta() >= 0.0);
      CHECK(p.theta() <= pi / 2);
    }
  }
  const VectorPair top = vector_pair_with_theta(rng, pi / 2);
  CHECK(top.innerProduct() == doctest::Approx(1.0).epsilon(1e-12));
  const VectorPair mid = vector_pair_with_theta(rng, 0.3);
  CHECK(mid.innerProduct() == doctest::Approx(std::sin(0.3)).epsilon(1e-12));
  Rng a(52, 3), b(52, 3);
  const auto pa = sample_vector_pair(a, VectorMode::Haar);
  const auto pb = sample_vector_pair(b, VectorMode::Haar);
  CHECK(pa.x == pb.x);
  CHECK(pa.y == pb.y);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.epsilon = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.nTrials = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.maxDepth = 9;
  CHECK_THROWS_AS(c.validate(), Error);
  c = ExperimentConfig{};
  c.maxDepth = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c.algorithms = {Algorithm::Mle};
  c.crtLowDepth = 1;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config json round trip and rejection") {
  const ExperimentConfig c = config_from_json_text(R"({
    "n_trials": 3, "n_shots": 100, "max_depth": 3, "epsilon": 0.01,
    "algorithms": ["mle", "crt"], "vector_mode": "uniform-theta", "seed": 9,
    "noise": {"preset": "noiseless", "leak_prob": 0.01,
              "correlation": {"p_switch": 0.2, "burst_scale": 2.0, "burst_fraction": 0.2}},
    "hybrid": {"beta_hybrid": 0.5},
    "powerlaw": {"target_eps": [0.02], "nu_min": -4}
  })");
  CHECK(c.nTrials == 3);
  CHECK(c.nShots == 100);
  CHECK(c.maxDepth == 3);
  CHECK(c.algorithms == std::vector<Algorithm>{Algorithm::Mle, Algorithm::Crt});
  CHECK(c.vectorMode == VectorMode::UniformTheta);
  CHECK(c.seed == 9);
  CHECK(c.noise.betaReadout() == 0.0);
  CHECK(c.noise.leakProb() == 0.01);
  CHECK(c.noise.correlation()->burstScale == 2.0);
  CHECK(c.hybrid.betaHybrid == 0.5);
  CHECK(c.powerLaw.search.lo == -4.0);

  const ExperimentConfig again = config_from_json(config_to_json(c));
  CHECK(config_to_json(again).dump() == config_to_json(c).dump());

  CHECK_THROWS_AS(config_from_json_text(R"({"n_trial": 3})"), Error);
  CHECK_THROWS_AS(config_from_json_text(R"({"noise": {"beta": 0.1}})"), Error);
  CHECK_THROWS_AS(config_from_json_text(R"({"n_trials": "three"})"), Error);
  CHECK_THROWS_AS(config_from_json_text(R"({"algorithms": ["mle", "qpe"]})"), Error);
  CHECK_THROWS_AS(config_from_json_text(R"({"epsilon": 0})"), Error);
  CHECK_THROWS_AS(config_from_json_text("{not json"), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
  try {
    config_from_json_text(R"({"n_trial": 3})");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
  }
}

TEST_CASE("default config mirrors the documented defaults") {
  const ExperimentConfig c = config_from_json_text("{}");
  CHECK(c.nTrials == 50);
  CHECK(c.nShots == 500);
  CHECK(c.maxDepth == 7);
  CHECK(c.epsilon == 0.001);
  CHECK(c.algorithms.size() == 5);
  CHECK(c.hybrid.betaHybrid == 1.0);
  CHECK(c.powerLaw.targetEps.size() == 10);
  CHECK(c.powerLaw.targetEps.front() == doctest::Approx(0.03));
  CHECK(c.powerLaw.targetEps.back() == doctest::Approx(0.003));
}

TEST_CASE("noiseless mle trial is accurate") {
  ExperimentConfig c;
  c.noise = NoiseModel::noiseless(7);
  c.algorithms = {Algorithm::Mle};
  double worst = 0;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(60, static_cast<std::uint64_t>(seed));
    const VectorPair pair = vector_pair_with_theta(rng, pi / 8);
    const TrialResult r = run_trial(c, pair, rng);
    CHECK(r.pTrue == doctest::Approx(std::sin(pi / 8) * std::sin(pi / 8)).epsilon(1e-12));
    REQUIRE(r.estimates.size() == 8);
    worst = std::max(worst, std::abs(r.estimates.back().thetaHat - pi / 8));
  }
  // grid step plus several Cramer-Rao standard errors
  CHECK(worst <= 0.001 * pi / 2 + 5.0 / std::sqrt(500.0 * 680.0));
}

TEST_CASE("empty algorithm set gives no estimates") {
  ExperimentConfig c = small_config();
  c.algorithms.clear();
  Rng rng(61);
  const TrialResult r = run_trial(c, sample_vector_pair(rng, VectorMode::Haar), rng);
  CHECK(r.estimates.empty());
  CHECK(r.errors.empty());
}

TEST_CASE("direct sampling converges to the floor") {
  ExperimentConfig c;
  c.maxDepth = 0;
  c.algorithms = {Algorithm::Direct};
  c.noise = NoiseModel(0.2, {0.0});
  c.nShots = 200000;
  c.vectorMode = VectorMode::UniformTheta;
  double err = 0;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    Rng rng(62, static_cast<std::uint64_t>(i));
    // uniform prior on p
    const double p = rng.uniform();
    const VectorPair pair = vector_pair_with_theta(rng, std::asin(std::sqrt(p)));
    const TrialResult r = run_trial(c, pair, rng);
    err += std::abs(r.estimates.at(0).pHat - r.pTrue);
  }
  CHECK(err / n == doctest::Approx(noise_floor(c.noise, 0, PriorOverP::uniform())).epsilon(0.08));
}

TEST_CASE("estimator failures are isolated per algorithm") {
  ExperimentConfig c = small_config();
  c.noise = NoiseModel(0.0, {0.0, 0.0, 0.0, 0.0, 0.0}, 0.0);
  c.noise.setLeakProb(0.0);
  c.algorithms = {Algorithm::Direct, Algorithm::Hybrid, Algorithm::Mle};
  // no calibration in the context: hybrid fails, the rest still run
  Rng rng(63);
  const TrialResult r = run_trial(c, sample_vector_pair(rng, VectorMode::Haar), rng, TrialContext{});
  CHECK(r.errors.size() == 3);  // hybrid at D = 2, 3, 4
  std::size_t direct = 0, mle = 0;
  for (const auto& e : r.estimates) {
    direct += e.algorithm == Algorithm::Direct;
    mle += e.algorithm == Algorithm::Mle;
  }
  CHECK(direct == 1);
  CHECK(mle == 5);
}

TEST_CASE("calibration values") {
  ExperimentConfig c;
  c.noise = NoiseModel::noiseless(7);
  c.nShots = 20000;
  Rng rng(64);
  const auto cal = calibrate_hybrid(c, 40, rng);
  REQUIRE(cal.size() == 6);
  const double cramerRao = 1.0 / std::sqrt(20000.0 * (1 + 9 + 25));
  for (const auto& k : cal) {
    CHECK(std::isfinite(k.mleAvgDepth2));
    CHECK(k.betaHybrid == 1.0);
    CHECK(k.crtExactAtD >= 0.0);
  }
  // |dp| = |sin 2 theta| |dtheta| <= |dtheta|
  CHECK(cal[0].mleAvgDepth2 < 3 * cramerRao);
  CHECK(cal[0].mleAvgDepth2 > 0.1 * cramerRao);
  CHECK(cal[0].crtExactAtD <= std::sin(pi / 30));

  Rng one(65);
  const auto single = calibrate_hybrid(small_config(), 1, one);
  CHECK(single.size() == 3);
  for (const auto& k : single) {
    CHECK(std::isfinite(k.mleAvgDepth2));
    CHECK(std::isfinite(k.crtExactAtD));
  }
  CHECK_THROWS_AS(calibrate_hybrid(small_config(), 0, one), Error);
}

TEST_CASE("exact crt error over a theta sweep at depth two") {
  double worst = 0;
  for (int i = 0; i <= 20000; ++i) {
    const double theta = i * (pi / 2) / 20000;
    worst = std::max(worst, crt_exact_error(theta, 2));
  }
  CHECK(worst <= std::sin(pi / 15) * 1.0);
}

TEST_CASE("depolarizing fit") {
  const std::vector<double> gamma{0.1, 0.1, 0.1};
  const NoiseModel m(0.0, gamma);
  std::vector<std::vector<DepthCounts>> counts;
  std::vector<double> thetas;
  Rng rng(66);
  for (int i = 0; i < 50; ++i) {
    const double theta = rng.uniform() * pi / 2;
    std::vector<DepthCounts> row;
    for (int d = 0; d <= 2; ++d) row.push_back(sample_noisy_shots(theta, d, 100000, m, rng));
    counts.push_back(row);
    thetas.push_back(theta);
  }
  const auto fit = fit_depolarizing(counts, thetas);
  REQUIRE(fit.size() == 3);
  for (double g : fit) CHECK(std::abs(g - 0.1) < 0.01);

  const NoiseModel clean = NoiseModel::noiseless(2);
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (int d = 0; d <= 2; ++d)
      counts[i][static_cast<std::size_t>(d)] = sample_noisy_shots(thetas[i], d, 100000, clean, rng);
  for (double g : fit_depolarizing(counts, thetas)) CHECK(g < 0.005);

  // every theta at pi/4 at depth 0: cos(2 theta) = 0, nothing to fit
  std::vector<std::vector<DepthCounts>> flat{{{0, 50, 50, 0}}, {{0, 48, 52, 0}}};
  CHECK_THROWS_AS(fit_depolarizing(flat, std::vector<double>{pi / 4, pi / 4}), Error);
  std::vector<std::vector<DepthCounts>> lone{{{0, 50, 50, 0}}};
  CHECK_THROWS_AS(fit_depolarizing(lone, std::vector<double>{0.3}), Error);
}

TEST_CASE("depolarizing fit recovers the default model shape") {
  ExperimentConfig c;
  c.nTrials = 200;
  c.nShots = 5000;
  c.algorithms.clear();
  const ExperimentResult r = run_experiment(c);
  std::vector<std::vector<DepthCounts>> counts;
  std::vector<double> thetas;
  for (std::size_t i = 0; i < r.pools.size(); ++i) {
    counts.push_back(r.pools[i].byDepth);
    thetas.push_back(r.pairs[i].theta());
  }
  const auto fit = fit_depolarizing(counts, thetas);
  const auto truth = c.noise.effectiveGammas();
  for (std::size_t d = 0; d < fit.size(); ++d) CHECK(std::abs(fit[d] - truth[d]) < 0.03);
  CHECK(fit.back() > fit.front() + 0.2);
}

TEST_CASE("aggregation") {
  TrialResult a, b;
  a.trialId = 0;
  b.trialId = 1;
  a.pTrue = b.pTrue = 0.25;
  a.thetaTrue = b.thetaTrue = pi / 6;
  auto e = make_estimate(Algorithm::Mle, 1, std::asin(std::sqrt(0.26)), 30);
  a.estimates.push_back(e);
  e = make_estimate(Algorithm::Mle, 1, std::asin(std::sqrt(0.28)), 40);
  b.estimates.push_back(e);
  const std::vector<TrialResult> trials{a, b};
  const auto rows = aggregate(trials);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].nTrials == 2);
  CHECK(rows[0].meanAbsErrP == doctest::Approx(0.02));
  CHECK(rows[0].totalOracleCalls == 70);
  CHECK(rows[0].stdErrP == doctest::Approx(std::sqrt(2) * 0.01));
}

TEST_CASE("oracle accounting matches consumed shots") {
  ExperimentConfig c = small_config();
  const ExperimentResult r = run_experiment(c);
  for (const auto& row : r.aggregates) {
    std::int64_t sum = 0;
    for (const auto& t : r.trials)
      for (const auto& e : t.estimates)
        if (e.algorithm == row.algorithm && e.depth == row.depth) sum += e.oracleCalls;
    CHECK(row.totalOracleCalls == sum);
  }
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    const auto& pool = r.pools[i].byDepth;
    for (const auto& e : r.trials[i].estimates) {
      CHECK(std::abs(e.pHat - std::sin(e.thetaHat) * std::sin(e.thetaHat)) < 1e-12);
      if (e.algorithm == Algorithm::Mle) {
        std::int64_t want = 0;
        for (int d = 0; d <= e.depth; ++d) want += pool[static_cast<std::size_t>(d)].total() * (2 * d + 1);
        CHECK(e.oracleCalls == want);
      }
      if (e.algorithm == Algorithm::PowerLaw) {
        const auto& plan = r.context.powerLawPlans.at(static_cast<std::size_t>(e.depth));
        std::int64_t cap = 0;
        for (const auto& s : plan.schedule)
          cap += std::min(s.shots, pool[static_cast<std::size_t>(s.depth)].kept()) * (2 * s.depth + 1);
        CHECK(e.oracleCalls == cap);
      }
    }
  }
}

TEST_CASE("outputs and determinism") {
  ExperimentConfig c = small_config();
  const fs::path d1 = scratch("det1"), d2 = scratch("det2");
  c.threads = 1;
  emit_outputs(run_experiment(c), c, d1);
  c.threads = 4;
  emit_outputs(run_experiment(c), c, d2);
  // thread count changes nothing but the recorded config
  for (const char* f : {"trials.csv", "aggregate.csv", "crt_histogram.csv", "counts.csv"}) {
    REQUIRE(fs::exists(d1 / f));
    CHECK_MESSAGE(slurp(d1 / f) == slurp(d2 / f), f);
  }
  const fs::path d4 = scratch("det4");
  emit_outputs(run_experiment(c), c, d4);
  for (const char* f : {"trials.csv", "aggregate.csv", "crt_histogram.csv", "counts.csv", "manifest.json"}) {
    CHECK_MESSAGE(slurp(d2 / f) == slurp(d4 / f), f);
  }
  const std::string trials = slurp(d1 / "trials.csv");
  CHECK(trials.rfind(
            "algorithm,depth,oracle_calls,trial_id,theta_true,p_true,theta_hat,p_hat,abs_err_p,"
            "abs_err_theta,branch_tag\n",
            0) == 0);
  CHECK(trials.find('\r') == std::string::npos);
  const Json manifest = Json::parse(slurp(d1 / "manifest.json"));
  CHECK(manifest["seed"] == c.seed);
  CHECK(manifest.contains("hybrid_calibration"));
  CHECK(manifest.contains("gamma_fit"));
  CHECK(manifest["oracle_calls"]["mle"] == "cumulative over depths 0..D");

  const auto table = read_counts_csv(d1 / "counts.csv");
  CHECK(table.countsByTrial.size() == 6);
  CHECK(table.countsByTrial[0].size() == 5);

  c.seed += 1;
  const fs::path d3 = scratch("det3");
  emit_outputs(run_experiment(c), c, d3);
  CHECK(slurp(d1 / "counts.csv") != slurp(d3 / "counts.csv"));
}

TEST_CASE("one trial, one algorithm") {
  ExperimentConfig c = small_config();
  c.nTrials = 1;
  c.algorithms = {Algorithm::Direct};
  const fs::path d = scratch("one");
  emit_outputs(run_experiment(c), c, d);
  CHECK(count_lines(slurp(d / "trials.csv")) == 2);
  CHECK(count_lines(slurp(d / "aggregate.csv")) == 2);
}

TEST_CASE("unwritable output path") {
  ExperimentConfig c = small_config();
  c.nTrials = 1;
  c.algorithms = {Algorithm::Direct};
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "file";
  CHECK_THROWS_AS(emit_outputs(run_experiment(c), c, blocker / "sub"), Error);
  fs::remove(blocker);
}

TEST_CASE("calibration file round trip") {
  ExperimentConfig c = small_config();
  Rng rng(67);
  const auto cal = calibrate_hybrid(c, 3, rng);
  const fs::path p = scratch("cal.json");
  std::ofstream(p) << Json{{"hybrid_calibration", calibration_to_json(cal)}}.dump();
  c.hybrid.calibrationFile = p.string();
  c.algorithms = {Algorithm::Hybrid};
  const ExperimentResult r = run_experiment(c);
  REQUIRE(r.context.hybrid.size() == cal.size());
  for (std::size_t i = 0; i < cal.size(); ++i) CHECK(r.context.hybrid[i].crtExactAtD == cal[i].crtExactAtD);
  fs::remove(p);
}

TEST_CASE("resource table and sweep") {
  const std::string csv = resource_table_csv(7);
  CHECK(csv.find("7,46,31,92,62\n") != std::string::npos);
  CHECK(csv.find("0,4,3,8,6\n") != std::string::npos);

  ExperimentConfig c = small_config();
  c.algorithms = {Algorithm::Mle};
  const fs::path d = scratch("sweep");
  const std::vector<double> depths{2, 5};
  run_sweep(c, "max_depth", depths, d);
  CHECK(fs::exists(d / "sweep.csv"));
  CHECK(fs::exists(d / "max_depth=5" / "trials.csv"));
  const std::string s = slurp(d / "sweep.csv");
  CHECK(s.find("max_depth,5,mle,5,") != std::string::npos);
  CHECK_THROWS_AS(run_sweep(c, "colour", depths, d), Error);
}
