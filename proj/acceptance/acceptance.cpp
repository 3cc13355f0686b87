// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lodae/circuit.hpp"
#include "lodae/config.hpp"
#include "lodae/estimators.hpp"
#include "lodae/harness.hpp"
#include "lodae/noise.hpp"
#include "lodae/scheduler.hpp"
#include "lodae/simulator.hpp"

using namespace lodae;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

Vec4 random_unit(Rng& rng) {
  Vec4 v{};
  double n = 0;
  for (auto& c : v) {
    c = rng.normal();
    n += c * c;
  }
  n = std::sqrt(n);
  for (auto& c : v) c /= n;
  return v;
}

double mean_err(const ExperimentResult& r, Algorithm a, int depth) {
  for (const auto& row : r.aggregates)
    if (row.algorithm == a && row.depth == depth) return row.meanAbsErrP;
  return NAN;
}

std::vector<double> errors_at(const ExperimentResult& r, Algorithm a, int depth) {
  std::vector<double> out;
  for (const auto& t : r.trials)
    for (const auto& e : t.estimates)
      if (e.algorithm == a && e.depth == depth) out.push_back(std::abs(e.pHat - t.pTrue));
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

Outcome circuit_resources() {
  Rng rng(101);
  int bad = 0;
  for (int pair = 0; pair < 20; ++pair) {
    const Vec4 x = random_unit(rng), y = random_unit(rng);
    for (int t = 0; t <= 7; ++t) {
      const auto s = compiled_stats(compile_to_two_qubit(build_iterated_circuit(x, y, t)));
      bad += s.twoQubitCount != static_cast<std::size_t>(12 * t + 8) ||
             s.twoQubitDepth != static_cast<std::size_t>(8 * t + 6);
    }
  }
  const Vec4 x{0.5, 0.5, 0.5, 0.5};
  const auto s7 = compiled_stats(compile_to_two_qubit(build_iterated_circuit(x, x, 7)));
  return {bad == 0 && s7.twoQubitCount == 92 && s7.twoQubitDepth == 62,
          fmt("t=7: %zu gates, depth %zu; mismatches over 160 circuits: %d", s7.twoQubitCount,
              s7.twoQubitDepth, bad)};
}

Outcome gate_algebra() {
  Rng rng(102);
  double worst = 0, worstAdj = 0;
  for (int k = 0; k < 200; ++k) {
    const double a = (rng.uniform() * 2 - 1) * 2 * pi;
    // compose the decomposition on the simulator, column by column
    const Matrix4 want = rbs_unitary(a);
    const auto gates = decompose_rbs(a, 0, 1);
    for (int col = 0; col < 4; ++col) {
      Circuit c(kRegisterQubits);
      if (col & 2) c.append(Gate::x(0));
      if (col & 1) c.append(Gate::x(1));
      for (const auto& g : gates) c.append(g);
      const StateVector s = run_statevector(c);
      for (int row = 0; row < 4; ++row) {
        const auto amp = s.amplitude(static_cast<std::size_t>(row) << 2);
        worst = std::max(worst, std::abs(amp - want[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)]));
      }
    }
    const Matrix4 inv = rbs_unitary(-a);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        worstAdj = std::max(worstAdj, std::abs(inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                                               std::conj(want[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])));
  }
  return {worst <= 1e-12 && worstAdj <= 1e-12,
          fmt("max decomposition deviation %.2e, adjoint deviation %.2e over 200 angles", worst, worstAdj)};
}

Outcome simulator_vs_analytic() {
  Rng rng(103);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const Vec4 x = random_unit(rng), y = random_unit(rng);
    double ip = 0;
    for (std::size_t i = 0; i < 4; ++i) ip += x[i] * y[i];
    const double theta = std::asin(std::abs(ip));
    for (int t = 0; t <= 7; ++t) {
      const double p = std::norm(run_statevector(build_iterated_circuit(x, y, t)).amplitude(kGoodOutcome));
      worst = std::max(worst, std::abs(p - analytic_success_prob(theta, t)));
    }
  }
  return {worst <= 1e-9, fmt("max |p_sim - p_analytic| = %.2e over 100 pairs x t=0..7", worst)};
}

Outcome noiseless_mle() {
  const NoiseModel clean = NoiseModel::noiseless(7);
  Rng rng(104);
  double sum = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const double theta = rng.uniform() * pi / 2;
    std::vector<DepthCounts> counts;
    for (int d = 0; d <= 7; ++d) counts.push_back(sample_noisy_shots(theta, d, 500, clean, rng));
    sum += std::abs(mle_estimate(counts, kDefaultEpsilon).thetaHat - theta);
  }
  const double scale = 1.0 / std::sqrt(500.0 * 680.0);
  const double mean = sum / n;
  return {mean <= 3 * scale, fmt("mean |theta_hat - theta| = %.5f, bound 3 x %.5f = %.5f", mean, scale, 3 * scale)};
}

Outcome noise_floor_reproduction() {
  const NoiseModel model = NoiseModel::reference_default(0);
  const double target = noise_floor(model, 0, PriorOverP::haar4());
  const int trials = 2000;
  std::vector<double> errs;
  for (std::int64_t shots : {10, 100, 1000, 10000}) {
    double sum = 0;
    for (int i = 0; i < trials; ++i) {
      Rng rng(105, static_cast<std::uint64_t>(i));
      const Vec4 x = random_unit(rng), y = random_unit(rng);
      double ip = 0;
      for (std::size_t k = 0; k < 4; ++k) ip += x[k] * y[k];
      const double theta = std::asin(std::abs(ip));
      const DepthCounts c = sample_noisy_shots(theta, 0, shots, model, rng);
      sum += std::abs(direct_estimate(c).pHat - ip * ip);
    }
    errs.push_back(sum / trials);
  }
  const double rel = std::abs(errs[3] - target) / target;
  const double flat = std::abs(errs[2] - errs[3]) / errs[3];
  const bool decreasing = errs[0] > errs[1] && errs[1] > errs[3];
  return {rel <= 0.10 && flat <= 0.10 && decreasing,
          fmt("floor %.4f; mean error at 10/100/1e3/1e4 shots: %.4f %.4f %.4f %.4f; "
              "|err(1e4)-floor|/floor = %.3f; change 1e3->1e4 = %.3f",
              target, errs[0], errs[1], errs[2], errs[3], rel, flat)};
}

Outcome mle_under_noise() {
  ExperimentConfig c;
  c.algorithms = {Algorithm::Direct, Algorithm::Mle};
  c.mleNoiseAware = true;
  const ExperimentResult r = run_experiment(c);
  const double floor = mean_err(r, Algorithm::Direct, 0);
  int best = 0;
  for (int d = 1; d <= 7; ++d)
    if (mean_err(r, Algorithm::Mle, d) < mean_err(r, Algorithm::Mle, best)) best = d;
  const double bestErr = mean_err(r, Algorithm::Mle, best);
  const bool below = bestErr < floor;
  const bool deep = best >= 4;
  const bool magnitude = bestErr >= 0.0138 / 2 && bestErr <= 0.0138 * 2;

  // reference only: the same data with the noise-unaware likelihood
  c.mleNoiseAware = false;
  c.algorithms = {Algorithm::Mle};
  const ExperimentResult plain = run_experiment(c);
  int bestPlain = 0;
  for (int d = 1; d <= 7; ++d)
    if (mean_err(plain, Algorithm::Mle, d) < mean_err(plain, Algorithm::Mle, bestPlain)) bestPlain = d;

  return {below && deep && magnitude,
          fmt("noise-aware MLE best depth %d error %.4f vs depth-0 floor %.4f [%s]; best depth in 4..7 [%s]; "
              "within x2 of 0.0138 [%s]. (noise-unaware MLE on the same seed: depth %d, %.4f)",
              best, bestErr, floor, below ? "ok" : "no", deep ? "ok" : "no", magnitude ? "ok" : "no",
              bestPlain, mean_err(plain, Algorithm::Mle, bestPlain))};
}

Outcome crt_exactness() {
  int gridMiss = 0, gridTotal = 0, offMiss = 0;
  double worstRatio = 0;
  Rng rng(107);
  for (int D = 2; D <= 7; ++D) {
    const std::int64_t M = 4 * D * D - 1;
    for (std::int64_t v = 0; v <= M / 2; ++v) {
      const double theta = static_cast<double>(v) * pi / static_cast<double>(M);
      const auto ctx = crt_reconstruct(analytic_success_prob(theta, D), analytic_success_prob(theta, D - 1), theta, D);
      gridMiss += ctx.selected != v;
      ++gridTotal;
    }
    for (int i = 0; i < 500; ++i) {
      const double theta = rng.uniform() * pi / 2;
      const auto ctx = crt_reconstruct(analytic_success_prob(theta, D), analytic_success_prob(theta, D - 1), theta, D);
      const double ratio = std::abs(ctx.thetaHat() - theta) / (pi / static_cast<double>(M));
      worstRatio = std::max(worstRatio, ratio);
      offMiss += ratio > 1.0;
    }
  }
  return {gridMiss == 0 && offMiss == 0,
          fmt("grid points recovered %d/%d; off-grid worst error %.3f x pi/(4D^2-1) over 3000 draws",
              gridTotal - gridMiss, gridTotal, worstRatio)};
}

Outcome crt_under_noise() {
  ExperimentConfig c;
  c.nTrials = 200;
  c.algorithms = {Algorithm::Crt};
  const ExperimentResult r = run_experiment(c);
  int best = 2;
  std::string curve;
  for (int D = 2; D <= 7; ++D) {
    curve += fmt("%s%d:%.4f", D == 2 ? "" : " ", D, mean_err(r, Algorithm::Crt, D));
    if (mean_err(r, Algorithm::Crt, D) < mean_err(r, Algorithm::Crt, best)) best = D;
  }
  const bool small = best <= 4;
  const bool degrades = mean_err(r, Algorithm::Crt, 7) > mean_err(r, Algorithm::Crt, best);
  std::string tails;
  bool bimodal = true;
  for (int D : {5, 7}) {
    const auto errs = errors_at(r, Algorithm::Crt, D);
    const double width = median(errs) / 0.6745;
    const double frac = static_cast<double>(std::count_if(errs.begin(), errs.end(),
                                                          [&](double e) { return e > 3 * width; })) /
                        static_cast<double>(errs.size());
    bimodal = bimodal && frac >= 0.05;
    tails += fmt(" D=%d outliers %.1f%%", D, 100 * frac);
  }
  return {small && degrades && bimodal,
          fmt("mean error by D {%s}; argmin D=%d; D=7 above minimum [%s];%s", curve.c_str(), best,
              degrades ? "ok" : "no", tails.c_str())};
}

Outcome hybrid_improvement() {
  ExperimentConfig c;
  c.nTrials = 200;
  c.algorithms = {Algorithm::Mle, Algorithm::Crt, Algorithm::Hybrid};
  c.hybrid.tuneBeta = true;
  const ExperimentResult r = run_experiment(c);
  bool dominates = true;
  int best = 2;
  std::string curve;
  for (int D = 2; D <= 7; ++D) {
    const double h = mean_err(r, Algorithm::Hybrid, D), q = mean_err(r, Algorithm::Crt, D);
    dominates = dominates && h <= q;
    curve += fmt("%s%d:%.4f/%.4f", D == 2 ? "" : " ", D, h, q);
    if (h < mean_err(r, Algorithm::Hybrid, best)) best = D;
  }
  const double hBest = mean_err(r, Algorithm::Hybrid, best);
  const double mle2 = mean_err(r, Algorithm::Mle, 2);
  const bool improves = hBest < mle2;
  const bool magnitude = hBest >= 0.017 / 2 && hBest <= 0.017 * 2 && mle2 >= 0.018 / 2 && mle2 <= 0.018 * 2;
  return {dominates && improves && magnitude,
          fmt("hybrid/crt by D {%s}; hybrid <= crt everywhere [%s]; best hybrid D=%d %.4f vs depth-2 MLE %.4f [%s]; "
              "magnitudes within x2 of 0.017/0.018 [%s]",
              curve.c_str(), dominates ? "ok" : "no", best, hBest, mle2, improves ? "ok" : "no",
              magnitude ? "ok" : "no")};
}

Outcome power_law_optimizer() {
  const std::vector<double> g = reference_gammas(7);
  bool mono = true;
  for (int i = 1; i <= 120; ++i)
    mono = mono && fisher_noisy(-6 + 0.1 * i, 500, 7, g) > fisher_noisy(-6 + 0.1 * (i - 1), 500, 7, g);
  for (std::size_t d = 0; d < g.size(); ++d) {
    auto h = g;
    h[d] += 0.01;
    mono = mono && fisher_noisy(-1.0, 500, 7, h) < fisher_noisy(-1.0, 500, 7, g);
  }
  // reference root of 500 * sum (2d+1)^(nu+2) = 1e4 by plain bisection
  auto f = [](double nu) {
    double s = 0;
    for (int d = 0; d <= 7; ++d) s += std::pow(2.0 * d + 1.0, nu + 2.0);
    return 500 * s - 1e4;
  };
  double lo = -6, hi = 6;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) >= 0 ? hi : lo) = mid;
  }
  const std::vector<double> zero(8, 0.0);
  const double nu = optimize_exponent(0.01, 500, 7, zero);
  const bool binds = fisher_noisy(nu, 500, 7, zero) >= 1e4 && fisher_noisy(nu - 1e-3, 500, 7, zero) < 1e4;
  return {mono && std::abs(nu - hi) <= 1e-3 && binds,
          fmt("monotonicity [%s]; nu = %.4f vs reference %.4f; constraint binds [%s]", mono ? "ok" : "no", nu, hi,
              binds ? "ok" : "no")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "lodae_acceptance_det";
  fs::remove_all(base);
  ExperimentConfig c;
  for (const char* run : {"a", "b"}) emit_outputs(run_experiment(c), c, base / run);
  int differing = 0, files = 0;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    ++files;
    differing += slurp(entry.path()) != slurp(base / "b" / entry.path().filename());
  }
  fs::remove_all(base);
  return {files == 5 && differing == 0, fmt("%d files compared, %d differ", files, differing)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budgetSeconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "circuit resources", 1, circuit_resources},
      {2, "gate algebra", 1, gate_algebra},
      {3, "simulator vs analytic", 5, simulator_vs_analytic},
      {4, "noiseless MLE efficiency", 120, noiseless_mle},
      {5, "noise-floor reproduction", 60, noise_floor_reproduction},
      {6, "MLE beats baseline under noise", 300, mle_under_noise},
      {7, "CRT noiseless exactness", 30, crt_exactness},
      {8, "CRT under noise", 300, crt_under_noise},
      {9, "hybrid improvement", 300, hybrid_improvement},
      {10, "power-law optimizer", 1, power_law_optimizer},
      {11, "end-to-end determinism", 60, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool inTime = secs <= c.budgetSeconds;
    const bool pass = o.pass && inTime;
    failed += !pass;
    std::printf("[%s] criterion %d: %s: %s (%.2fs of %.0fs budget%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budgetSeconds, inTime ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
