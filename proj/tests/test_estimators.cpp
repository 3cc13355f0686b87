#include <numeric>
#include <numbers>

#include "doctest.h"
#include "lodae/error.hpp"
#include "lodae/estimators.hpp"
#include "test_support.hpp"

using namespace lodae;
using std::numbers::pi;

namespace {

std::int64_t brute_crt(std::int64_t r1, std::int64_t n1, std::int64_t r2, std::int64_t n2) {
  auto mod = [](std::int64_t a, std::int64_t n) { return ((a % n) + n) % n; };
  for (std::int64_t v = 0; v < n1 * n2; ++v)
    if (mod(v, n1) == mod(r1, n1) && mod(v, n2) == mod(r2, n2)) return v;
  return -1;
}

std::vector<DepthCounts> expected_counts(double theta, int maxDepth, std::int64_t n) {
  std::vector<DepthCounts> out;
  for (int d = 0; d <= maxDepth; ++d) {
    const auto good = static_cast<std::int64_t>(std::llround(n * analytic_success_prob(theta, d)));
    out.push_back({d, good, n - good, 0});
  }
  return out;
}

void check_consistent(const Estimate& e) {
  const double s = std::sin(e.thetaHat);
  CHECK(std::abs(e.pHat - s * s) < 1e-12);
}

}  // namespace

TEST_CASE("algorithm names round trip") {
  for (auto a : {Algorithm::Direct, Algorithm::Mle, Algorithm::Crt, Algorithm::Hybrid, Algorithm::PowerLaw}) {
    CHECK(parse_algorithm(algorithm_name(a)) == a);
  }
  CHECK(!parse_algorithm("qft"));
}

TEST_CASE("direct estimate examples") {
  auto e = direct_estimate({0, 500, 0, 0});
  CHECK(e.pHat == 1.0);
  CHECK(e.thetaHat == doctest::Approx(pi / 2));
  CHECK(e.oracleCalls == 500);
  e = direct_estimate({0, 0, 500, 0});
  CHECK(e.pHat == 0.0);
  CHECK(e.thetaHat == 0.0);
  e = direct_estimate({0, 250, 250, 7});
  CHECK(e.pHat == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(e.thetaHat == doctest::Approx(pi / 4).epsilon(1e-15));
  CHECK(e.oracleCalls == 507);
  CHECK_THROWS_AS(direct_estimate({0, 0, 0, 10}), Error);
}

TEST_CASE("posterior grid layout") {
  PosteriorGrid g(0.001);
  CHECK(g.size() == 1000);
  CHECK(g.theta(0) == 0.0);
  CHECK(g.theta(999) == doctest::Approx(pi * 999 * 0.001 / 2));
  CHECK(g.theta(999) < pi / 2);
  const auto w = g.weights();
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.argmax() == 0);
  CHECK(PosteriorGrid(0.25).size() == 4);
  CHECK(PosteriorGrid(0.3).size() == 4);
  CHECK_THROWS_AS(PosteriorGrid(0.0), Error);
  CHECK_THROWS_AS(PosteriorGrid(1.5), Error);
}

TEST_CASE("bayesian update examples") {
  PosteriorGrid g(0.01);
  const PosteriorGrid same = bayesian_update(g, 3, {3, 0, 0, 12});
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(same.logWeights()[k] == g.logWeights()[k]);

  const PosteriorGrid one = bayesian_update(g, 0, {0, 1, 0, 0});
  const auto w = one.weights();
  double z = 0;
  for (std::size_t k = 0; k < g.size(); ++k) z += std::sin(g.theta(k)) * std::sin(g.theta(k));
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(w[k] == doctest::Approx(std::sin(g.theta(k)) * std::sin(g.theta(k)) / z).epsilon(1e-9));
  }

  const NoiseModel flat(0.0, {0.0, INFINITY});
  const PosteriorGrid f = bayesian_update(g, 1, {1, 300, 200, 0}, &flat);
  const auto wf = f.weights();
  for (double v : wf) CHECK(v == doctest::Approx(1.0 / g.size()).epsilon(1e-12));
}

TEST_CASE("impossible likelihood everywhere is an error") {
  PosteriorGrid g(0.25);
  const std::vector<double> dead(g.size(), -INFINITY);
  CHECK_THROWS_AS(g.accumulate(dead), Error);
  std::vector<double> partial(g.size(), std::nan(""));
  partial[2] = -3.0;
  g.accumulate(partial);
  CHECK(g.argmax() == 2);
  CHECK(g.weights()[2] == doctest::Approx(1.0));
}

TEST_CASE("posterior stays normalized") {
  Rng rng(31);
  PosteriorGrid g(0.001);
  const NoiseModel m = NoiseModel::reference_default(7);
  for (int step = 0; step < 40; ++step) {
    const int d = step % 8;
    const std::int64_t good = static_cast<std::int64_t>(rng.uniform() * 500);
    g = bayesian_update(g, d, {d, good, 500 - good, 0}, step % 2 ? &m : nullptr);
    const auto w = g.weights();
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("mle examples") {
  const auto counts = expected_counts(pi / 8, 7, 500);
  const Estimate e = mle_estimate(counts, 0.001);
  CHECK(std::abs(e.thetaHat - pi / 8) <= 0.001 * pi / 2);
  check_consistent(e);
  std::int64_t calls = 0;
  for (int d = 0; d <= 7; ++d) calls += 500 * (2 * d + 1);
  CHECK(e.oracleCalls == calls);
  CHECK(e.depth == 7);

  const std::vector<DepthCounts> allGood{{0, 100, 0, 0}};
  CHECK(mle_estimate(allGood, 0.001).thetaHat == doctest::Approx(PosteriorGrid(0.001).theta(999)));
  const std::vector<DepthCounts> allBad{{0, 0, 100, 0}};
  CHECK(mle_estimate(allBad, 0.001).thetaHat == 0.0);
  CHECK_THROWS_AS(mle_estimate(std::vector<DepthCounts>{{0, 0, 0, 5}}, 0.001), Error);
  CHECK_THROWS_AS(mle_estimate(std::vector<DepthCounts>{}, 0.001), Error);
}

TEST_CASE("noiseless likelihood recovers grid points from exact counts") {
  const double eps = 0.001;
  PosteriorGrid grid(eps);
  for (int j = 0; j < 50; ++j) {
    const std::size_t k = 7 + 19 * static_cast<std::size_t>(j);
    const double theta = grid.theta(k);
    // counts exactly proportional to the probabilities: weight by fractional
    // log-likelihood via a large shot count
    std::vector<DepthCounts> c;
    for (int d = 0; d <= 7; ++d) {
      const double p = analytic_success_prob(theta, d);
      const std::int64_t n = 1000000;
      const auto good = static_cast<std::int64_t>(std::llround(n * p));
      c.push_back({d, good, n - good, 0});
    }
    CHECK(mle_estimate(c, eps).thetaHat == doctest::Approx(theta).epsilon(1e-12));
  }
}

TEST_CASE("noise-aware mle handles depolarized counts") {
  const NoiseModel m = NoiseModel::reference_default(7);
  const double theta = 0.61;
  std::vector<DepthCounts> c;
  for (int d = 0; d <= 7; ++d) {
    const std::int64_t n = 200000;
    const auto good = static_cast<std::int64_t>(std::llround(n * noisy_prob(theta, d, m)));
    c.push_back({d, good, n - good, 0});
  }
  const Estimate aware = mle_estimate(c, 0.001, &m);
  CHECK(std::abs(aware.thetaHat - theta) <= 0.001 * pi / 2);
  const Estimate naive = mle_estimate(c, 0.001);
  CHECK(std::abs(naive.thetaHat - theta) > std::abs(aware.thetaHat - theta));
}

TEST_CASE("crt solve examples") {
  CHECK(crt_solve(1, 3, 4, 5) == 4);
  CHECK(crt_solve(0, 3, 0, 5) == 0);
  CHECK(crt_solve(5, 13, 7, 15) == 187);
  CHECK(crt_solve(-1, 3, -1, 5) == 14);
  CHECK_THROWS_AS(crt_solve(1, 6, 1, 9), Error);
  CHECK_THROWS_AS(crt_solve(1, 0, 1, 9), Error);
}

TEST_CASE("crt solve round trip against brute force") {
  Rng rng(32);
  for (int i = 0; i < 1000; ++i) {
    const std::int64_t n1 = 3 + 2 * static_cast<std::int64_t>(rng.uniform() * 6);
    const std::int64_t n2 = n1 + 2;
    const auto v = static_cast<std::int64_t>(rng.uniform() * 1e6);
    const std::int64_t got = crt_solve(v % n1, n1, v % n2, n2);
    CHECK(got == v % (n1 * n2));
    CHECK(got == brute_crt(v % n1, n1, v % n2, n2));
  }
}

TEST_CASE("crt reconstruction: worked example") {
  const double theta = 2 * pi / 15;
  const auto ctx = crt_reconstruct(std::pow(std::sin(2 * pi / 3), 2), std::pow(std::sin(2 * pi / 5), 2),
                                   theta, 2);
  CHECK(ctx.n1 == 3);
  CHECK(ctx.n2 == 5);
  CHECK(ctx.modulus == 15);
  CHECK(ctx.selected == 2);
  CHECK(ctx.thetaHat() == doctest::Approx(theta).epsilon(1e-14));
  for (auto v : ctx.candidates) {
    CHECK(v >= 0);
    CHECK(v < ctx.modulus);
  }
}

TEST_CASE("crt reconstruction: exact on every grid point (extended offsets)") {
  for (int D = 2; D <= 7; ++D) {
    const std::int64_t M = 4 * D * D - 1;
    for (std::int64_t v = 0; v <= M / 2; ++v) {
      const double theta = static_cast<double>(v) * pi / static_cast<double>(M);
      const auto ctx = crt_reconstruct(analytic_success_prob(theta, D), analytic_success_prob(theta, D - 1),
                                       theta, D, CrtOffsets::Extended);
      CHECK_MESSAGE(ctx.selected == v, "D=" << D << " v=" << v);
    }
  }
}

TEST_CASE("crt reconstruction: literal offsets miss grid points") {
  int misses = 0, total = 0;
  for (int D = 2; D <= 7; ++D) {
    const std::int64_t M = 4 * D * D - 1;
    for (std::int64_t v = 0; v <= M / 2; ++v) {
      const double theta = static_cast<double>(v) * pi / static_cast<double>(M);
      const auto ctx = crt_reconstruct(analytic_success_prob(theta, D), analytic_success_prob(theta, D - 1),
                                       theta, D, CrtOffsets::Literal);
      misses += ctx.selected != v;
      ++total;
    }
  }
  CHECK(total == 278);
  CHECK(misses > 0);
}

TEST_CASE("crt reconstruction: off-grid error bound") {
  Rng rng(33);
  for (int D = 2; D <= 7; ++D) {
    const double M = 4.0 * D * D - 1;
    for (int i = 0; i < 500; ++i) {
      const double theta = rng.uniform() * pi / 2;
      const auto ctx = crt_reconstruct(analytic_success_prob(theta, D), analytic_success_prob(theta, D - 1),
                                       theta, D);
      CHECK(std::abs(ctx.thetaHat() - theta) <= pi / M);
    }
  }
}

TEST_CASE("crt estimate accounting and errors") {
  const double theta = 0.3;
  const auto counts = expected_counts(theta, 5, 1000);
  const Estimate low = mle_estimate(std::span(counts).first(3), 0.001);
  const Estimate e = crt_estimate(counts[5], counts[4], low, 5);
  check_consistent(e);
  CHECK(e.oracleCalls == low.oracleCalls + 1000 * 11 + 1000 * 9);
  CHECK(e.diagnostics.size() == 5);
  CHECK(std::abs(e.thetaHat - theta) < 0.05);
  const Estimate e2 = crt_estimate(counts[2], counts[1], low, 2);
  CHECK(e2.oracleCalls == low.oracleCalls);
  const Estimate e3 = crt_estimate(counts[3], counts[2], low, 3);
  CHECK(e3.oracleCalls == low.oracleCalls + 1000 * 7);
  CHECK_THROWS_AS(crt_estimate({5, 0, 0, 9}, counts[4], low, 5), Error);
  CHECK_THROWS_AS(crt_estimate(counts[1], counts[0], low, 1), Error);
}

TEST_CASE("hybrid examples") {
  auto with_p = [](Algorithm a, double p) {
    return make_estimate(a, 4, std::asin(std::sqrt(p)), 100);
  };
  HybridCalibration cal{4, 0.06, 0.01, 1.0};
  CHECK(cal.threshold() == doctest::Approx(0.05));
  auto e = hybrid_estimate(with_p(Algorithm::Mle, 0.30), with_p(Algorithm::Crt, 0.31), cal);
  CHECK(e.branch == "crt");
  CHECK(e.pHat == doctest::Approx(0.31));
  CHECK(e.algorithm == Algorithm::Hybrid);
  e = hybrid_estimate(with_p(Algorithm::Mle, 0.30), with_p(Algorithm::Crt, 0.60), cal);
  CHECK(e.branch == "mle");
  CHECK(e.pHat == doctest::Approx(0.30));
  cal.betaHybrid = 0.0;
  e = hybrid_estimate(with_p(Algorithm::Mle, 0.30), with_p(Algorithm::Crt, 0.3000001), cal);
  CHECK(e.branch == "mle");
  cal.mleAvgDepth2 = NAN;
  CHECK_THROWS_AS(hybrid_estimate(with_p(Algorithm::Mle, 0.3), with_p(Algorithm::Crt, 0.3), cal), Error);
}

TEST_CASE("hybrid dominates crt on outlier mixtures") {
  Rng rng(34);
  const HybridCalibration cal{5, 0.02, 0.003, 1.0};
  double errCrt = 0, errHybrid = 0;
  for (int i = 0; i < 2000; ++i) {
    const double p = rng.uniform();
    const double pm = std::clamp(p + 0.02 * rng.normal(), 0.0, 1.0);
    double pc = std::clamp(p + 0.003 * rng.normal(), 0.0, 1.0);
    if (rng.uniform() < 0.2) pc = rng.uniform();
    const auto mle = make_estimate(Algorithm::Mle, 2, std::asin(std::sqrt(pm)), 1);
    const auto crt = make_estimate(Algorithm::Crt, 5, std::asin(std::sqrt(pc)), 1);
    errCrt += std::abs(crt.pHat - p);
    errHybrid += std::abs(hybrid_estimate(mle, crt, cal).pHat - p);
  }
  CHECK(errHybrid <= errCrt);
}
