#include "lodae/simulator.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "lodae/error.hpp"

namespace lodae {

namespace {

constexpr std::size_t bit_of(int q) { return std::size_t{1} << (kRegisterQubits - 1 - q); }

}  // namespace

bool is_unary(std::size_t index) { return std::popcount(index) == 1; }

StateVector::StateVector() { amps_[0] = 1.0; }

void StateVector::apply_single(int q, const std::array<Amplitude, 4>& m) {
  const std::size_t mask = bit_of(q);
  for (std::size_t i = 0; i < kStateDim; ++i) {
    if (i & mask) continue;
    const Amplitude a0 = amps_[i];
    const Amplitude a1 = amps_[i | mask];
    amps_[i] = m[0] * a0 + m[1] * a1;
    amps_[i | mask] = m[2] * a0 + m[3] * a1;
  }
}

void StateVector::apply_two(int a, int b, const Matrix4& m) {
  const std::size_t ma = bit_of(a);
  const std::size_t mb = bit_of(b);
  for (std::size_t i = 0; i < kStateDim; ++i) {
    if (i & (ma | mb)) continue;
    const std::array<std::size_t, 4> idx{i, i | mb, i | ma, i | ma | mb};
    std::array<Amplitude, 4> in{};
    for (int k = 0; k < 4; ++k) in[k] = amps_[idx[k]];
    for (int r = 0; r < 4; ++r) {
      Amplitude acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += m[r][k] * in[k];
      amps_[idx[r]] = acc;
    }
  }
}

void StateVector::apply(const Gate& gate) {
  const int a = gate.targets[0];
  const int b = gate.targets[1];
  switch (gate.kind) {
    case GateKind::PauliX:
      apply_single(a, {0.0, 1.0, 1.0, 0.0});
      return;
    case GateKind::PauliZ:
      apply_single(a, {1.0, 0.0, 0.0, -1.0});
      return;
    case GateKind::Hadamard: {
      const double s = std::numbers::sqrt2 / 2.0;
      apply_single(a, {s, s, s, -s});
      return;
    }
    case GateKind::RotY: {
      const double c = std::cos(gate.angle / 2.0);
      const double s = std::sin(gate.angle / 2.0);
      apply_single(a, {c, -s, s, c});
      return;
    }
    case GateKind::CZ: {
      Matrix4 m{};
      m[0][0] = m[1][1] = m[2][2] = 1.0;
      m[3][3] = -1.0;
      apply_two(a, b, m);
      return;
    }
    case GateKind::RBS:
      apply_two(a, b, rbs_unitary(gate.angle));
      return;
  }
  fail(ErrorCode::kInvalidArgument, "unsupported gate kind");
}

Distribution StateVector::probabilities() const {
  Distribution p{};
  for (std::size_t i = 0; i < kStateDim; ++i) p[i] = std::norm(amps_[i]);
  return p;
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

StateVector run_statevector(const Circuit& circuit) {
  if (circuit.numQubits() != kRegisterQubits) {
    fail(ErrorCode::kInvalidArgument, "run_statevector: only 4-qubit circuits are supported");
  }
  StateVector state;
  for (const auto& g : circuit.gates()) state.apply(g);
  return state;
}

double analytic_success_prob(double theta, int t) {
  if (t < 0) fail(ErrorCode::kInvalidArgument, "analytic_success_prob: negative depth");
  const double s = std::sin((2.0 * t + 1.0) * theta);
  return s * s;
}

DepthCounts sample_and_postselect(std::span<const double, kStateDim> distribution,
                                  std::int64_t nShots, Rng& rng, int depth) {
  if (nShots < 0) fail(ErrorCode::kInvalidArgument, "sample_and_postselect: negative shots");
  double total = 0.0;
  for (double p : distribution) {
    if (!(p >= -1e-12)) fail(ErrorCode::kInvalidArgument, "invalid distribution: negative entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidArgument, "invalid distribution: does not sum to one");
  }
  std::array<double, kStateDim> cdf{};
  double acc = 0.0;
  for (std::size_t i = 0; i < kStateDim; ++i) {
    acc += std::max(0.0, distribution[i]);
    cdf[i] = acc;
  }
  DepthCounts counts;
  counts.depth = depth;
  for (std::int64_t s = 0; s < nShots; ++s) {
    const double u = rng.uniform() * acc;
    std::size_t k = 0;
    while (k + 1 < kStateDim && (u >= cdf[k] || distribution[k] <= 0.0)) ++k;
    if (k == kGoodOutcome) {
      ++counts.nGood;
    } else if (is_unary(k)) {
      ++counts.nBad;
    } else {
      ++counts.nDiscarded;
    }
  }
  return counts;
}

}  // namespace lodae
