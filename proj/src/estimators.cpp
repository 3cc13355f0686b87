#include "lodae/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include "lodae/error.hpp"

namespace lodae {

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Direct: return "direct";
    case Algorithm::Mle: return "mle";
    case Algorithm::Crt: return "crt";
    case Algorithm::Hybrid: return "hybrid";
    case Algorithm::PowerLaw: return "powerlaw";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::Direct, Algorithm::Mle, Algorithm::Crt, Algorithm::Hybrid,
                 Algorithm::PowerLaw}) {
    if (name == algorithm_name(a)) return a;
  }
  return std::nullopt;
}

Estimate make_estimate(Algorithm algorithm, int depth, double theta, std::int64_t oracleCalls) {
  Estimate e;
  e.algorithm = algorithm;
  e.depth = depth;
  e.thetaHat = theta;
  const double s = std::sin(theta);
  e.pHat = s * s;
  e.oracleCalls = oracleCalls;
  return e;
}

std::int64_t oracle_calls(const DepthCounts& counts) {
  return counts.total() * (2 * static_cast<std::int64_t>(counts.depth) + 1);
}

std::int64_t oracle_calls(std::span<const DepthCounts> counts) {
  std::int64_t total = 0;
  for (const auto& c : counts) total += oracle_calls(c);
  return total;
}

// ---------------------------------------------------------------------------

PosteriorGrid::PosteriorGrid(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "epsilon must lie in (0, 1)");
  }
  const auto n = static_cast<std::size_t>(std::ceil(1.0 / epsilon - 1e-9));
  logWeights_.assign(n, -std::log(static_cast<double>(n)));
}

double PosteriorGrid::theta(std::size_t k) const {
  return std::numbers::pi * static_cast<double>(k) * epsilon_ / 2.0;
}

std::vector<double> PosteriorGrid::weights() const {
  std::vector<double> w(logWeights_.size());
  std::transform(logWeights_.begin(), logWeights_.end(), w.begin(),
                 [](double lw) { return std::exp(lw); });
  return w;
}

void PosteriorGrid::accumulate(std::span<const double> logLikelihood) {
  if (logLikelihood.size() != logWeights_.size()) {
    fail(ErrorCode::kInvalidArgument, "likelihood size does not match grid");
  }
  // work on a copy so a failed update leaves the grid untouched
  std::vector<double> next(logWeights_);
  double maxLog = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < next.size(); ++k) {
    next[k] += logLikelihood[k];
    if (std::isnan(next[k])) next[k] = -std::numeric_limits<double>::infinity();
    maxLog = std::max(maxLog, next[k]);
  }
  if (!std::isfinite(maxLog)) {
    fail(ErrorCode::kNumerical, "posterior underflow: counts inconsistent with every grid angle");
  }
  double sum = 0.0;
  for (double& lw : next) {
    lw -= maxLog;
    sum += std::exp(lw);
  }
  const double logSum = std::log(sum);
  for (double& lw : next) lw -= logSum;
  logWeights_ = std::move(next);
}

std::size_t PosteriorGrid::argmax() const {
  return static_cast<std::size_t>(
      std::max_element(logWeights_.begin(), logWeights_.end()) - logWeights_.begin());
}

namespace {

double count_log(std::int64_t n, double p) {
  if (n == 0) return 0.0;
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(n) * std::log(p);
}

}  // namespace

PosteriorGrid bayesian_update(PosteriorGrid grid, int depth, const DepthCounts& counts,
                              const NoiseModel* noise) {
  if (depth < 0) fail(ErrorCode::kInvalidArgument, "bayesian_update: negative depth");
  if (counts.kept() == 0) return grid;
  const double amplification = 2.0 * depth + 1.0;
  const double eta = noise ? effective_eta(*noise, depth) : 0.0;
  std::vector<double> ll(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double th = grid.theta(k);
    double pGood = 0.0;
    double pBad = 0.0;
    if (noise) {
      pGood = noisy_prob_cosine(th, depth, eta);
      pBad = 0.5 * (1.0 + (1.0 - eta) * std::cos(2.0 * amplification * th));
    } else {
      const double s = std::sin(amplification * th);
      const double c = std::cos(amplification * th);
      pGood = s * s;
      pBad = c * c;
    }
    ll[k] = count_log(counts.nGood, pGood) + count_log(counts.nBad, pBad);
  }
  grid.accumulate(ll);
  return grid;
}

Estimate direct_estimate(const DepthCounts& counts) {
  if (counts.kept() == 0) fail(ErrorCode::kInvalidArgument, "direct_estimate: all shots discarded");
  const double p = static_cast<double>(counts.nGood) / static_cast<double>(counts.kept());
  return make_estimate(Algorithm::Direct, counts.depth, std::asin(std::sqrt(p)),
                       oracle_calls(counts));
}

Estimate mle_estimate(std::span<const DepthCounts> countsByDepth, double epsilon,
                      const NoiseModel* noise) {
  PosteriorGrid grid(epsilon);
  std::int64_t kept = 0;
  int maxDepth = 0;
  for (const auto& c : countsByDepth) {
    grid = bayesian_update(std::move(grid), c.depth, c, noise);
    kept += c.kept();
    maxDepth = std::max(maxDepth, c.depth);
  }
  if (kept == 0) fail(ErrorCode::kInvalidArgument, "mle_estimate: no kept shots at any depth");
  return make_estimate(Algorithm::Mle, maxDepth, grid.theta(grid.argmax()),
                       oracle_calls(countsByDepth));
}

// ---------------------------------------------------------------------------

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t n) {
  const std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

// Returns (g, x) with a x = g (mod n).
std::pair<std::int64_t, std::int64_t> extended_gcd(std::int64_t a, std::int64_t b) {
  std::int64_t oldR = a, r = b, oldS = 1, s = 0;
  while (r != 0) {
    const std::int64_t q = oldR / r;
    std::tie(oldR, r) = std::make_pair(r, oldR - q * r);
    std::tie(oldS, s) = std::make_pair(s, oldS - q * s);
  }
  return {oldR, oldS};
}

int sign_of(double x) { return x < 0.0 ? -1 : 1; }

}  // namespace

std::int64_t crt_solve(std::int64_t r1, std::int64_t n1, std::int64_t r2, std::int64_t n2) {
  if (n1 <= 0 || n2 <= 0) fail(ErrorCode::kInvalidArgument, "crt_solve: moduli must be positive");
  const auto [g, inv] = extended_gcd(n1 % n2, n2);
  if (g != 1) fail(ErrorCode::kInvalidArgument, "crt_solve: moduli are not coprime");
  const std::int64_t a = floor_mod(r1, n1);
  const std::int64_t b = floor_mod(r2, n2);
  // v = a + n1 * k, with n1 k = b - a (mod n2)
  const std::int64_t k = floor_mod(floor_mod(b - a, n2) * floor_mod(inv, n2), n2);
  return a + n1 * k;
}

const char* crt_offsets_name(CrtOffsets o) {
  return o == CrtOffsets::Literal ? "literal" : "extended";
}

std::vector<std::pair<int, int>> crt_offset_pairs(CrtOffsets o) {
  if (o == CrtOffsets::Literal) return {{1, 0}, {0, 1}, {1, 1}, {0, 2}};
  std::vector<std::pair<int, int>> out;
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) out.emplace_back(a, b);
  }
  return out;
}

double CrtContext::thetaHat() const {
  return static_cast<double>(selected) * std::numbers::pi / static_cast<double>(modulus);
}

CrtContext crt_reconstruct(double pD, double pDminus1, double thetaPrime, int maxDepth,
                           CrtOffsets offsets) {
  if (maxDepth < 2) fail(ErrorCode::kInvalidArgument, "CRT needs maximum depth D >= 2");
  CrtContext ctx;
  ctx.maxDepth = maxDepth;
  ctx.n1 = 2 * maxDepth - 1;
  ctx.n2 = 2 * maxDepth + 1;
  ctx.modulus = ctx.n1 * ctx.n2;

  // For theta = v pi / M the depth-D circuit rotates by (2D+1) theta = v pi / n1,
  // so asin(sqrt(p_D)) is that angle folded into [0, pi/2]. Unfolding with the
  // sign of sin(2 (2D+1) theta') gives v mod n1; likewise for depth D-1 and n2.
  ctx.l = static_cast<double>(ctx.n1) / std::numbers::pi * std::asin(std::sqrt(std::clamp(pD, 0.0, 1.0)));
  ctx.h = static_cast<double>(ctx.n2) / std::numbers::pi *
          std::asin(std::sqrt(std::clamp(pDminus1, 0.0, 1.0)));
  ctx.s1 = sign_of(std::sin(2.0 * static_cast<double>(ctx.n2) * thetaPrime));
  ctx.s2 = sign_of(std::sin(2.0 * static_cast<double>(ctx.n1) * thetaPrime));

  const auto base1 = static_cast<std::int64_t>(std::floor(ctx.s1 * ctx.l));
  const auto base2 = static_cast<std::int64_t>(std::floor(ctx.s2 * ctx.h));
  const double sp = std::sin(thetaPrime);
  const double p0 = sp * sp;

  double best = std::numeric_limits<double>::infinity();
  for (const auto& [d1, d2] : crt_offset_pairs(offsets)) {
    std::int64_t v = crt_solve(base1 + d1, ctx.n1, base2 + d2, ctx.n2);
    v = std::min(v, ctx.modulus - v);
    ctx.candidates.push_back(v);
    const double s = std::sin(static_cast<double>(v) * std::numbers::pi / static_cast<double>(ctx.modulus));
    const double err = std::abs(s * s - p0);
    if (err < best) {
      best = err;
      ctx.selected = v;
    }
  }
  return ctx;
}

Estimate crt_estimate(const DepthCounts& atD, const DepthCounts& atDminus1, const Estimate& lowDepth,
                      int maxDepth, CrtOffsets offsets, int lowDepthMax) {
  if (atD.kept() == 0 || atDminus1.kept() == 0) {
    fail(ErrorCode::kInvalidArgument, "crt_estimate: no kept shots at depth D or D-1");
  }
  const double pD = static_cast<double>(atD.nGood) / static_cast<double>(atD.kept());
  const double pDm1 = static_cast<double>(atDminus1.nGood) / static_cast<double>(atDminus1.kept());
  const CrtContext ctx = crt_reconstruct(pD, pDm1, lowDepth.thetaHat, maxDepth, offsets);

  std::int64_t calls = lowDepth.oracleCalls;
  if (atD.depth > lowDepthMax) calls += oracle_calls(atD);
  if (atDminus1.depth > lowDepthMax) calls += oracle_calls(atDminus1);

  Estimate e = make_estimate(Algorithm::Crt, maxDepth, ctx.thetaHat(), calls);
  e.diagnostics = {ctx.l, ctx.h, static_cast<double>(ctx.s1), static_cast<double>(ctx.s2),
                   static_cast<double>(ctx.selected)};
  return e;
}

double HybridCalibration::threshold() const {
  return betaHybrid * std::abs(mleAvgDepth2 - crtExactAtD);
}

Estimate hybrid_estimate(const Estimate& mleLowDepth, const Estimate& crt,
                         const HybridCalibration& cal) {
  if (!std::isfinite(cal.mleAvgDepth2) || !std::isfinite(cal.crtExactAtD) ||
      !std::isfinite(cal.betaHybrid)) {
    fail(ErrorCode::kInvalidArgument, "hybrid calibration values must be finite");
  }
  const bool useMle = std::abs(mleLowDepth.pHat - crt.pHat) > cal.threshold();
  Estimate e = make_estimate(Algorithm::Hybrid, crt.depth,
                             useMle ? mleLowDepth.thetaHat : crt.thetaHat,
                             std::max(crt.oracleCalls, mleLowDepth.oracleCalls));
  e.branch = useMle ? "mle" : "crt";
  return e;
}

}  // namespace lodae
