#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>

#include "lodae/circuit.hpp"
#include "lodae/rng.hpp"

namespace lodae {

using Amplitude = std::complex<double>;

inline constexpr std::size_t kStateDim = 16;

/// Basis index of a 4-qubit computational state; qubit 0 is the most
/// significant bit, so |1000> is index 8.
constexpr std::size_t basis_index(int q0, int q1, int q2, int q3) {
  return static_cast<std::size_t>((q0 << 3) | (q1 << 2) | (q2 << 1) | q3);
}

inline constexpr std::size_t kGoodOutcome = basis_index(1, 0, 0, 0);

bool is_unary(std::size_t index);

using Distribution = std::array<double, kStateDim>;

class StateVector {
 public:
  StateVector();  // |0000>

  const std::array<Amplitude, kStateDim>& amplitudes() const { return amps_; }
  Amplitude amplitude(std::size_t index) const { return amps_[index]; }

  void apply(const Gate& gate);

  Distribution probabilities() const;
  double norm() const;

 private:
  void apply_single(int q, const std::array<Amplitude, 4>& m);  // row-major 2x2
  void apply_two(int a, int b, const Matrix4& m);

  std::array<Amplitude, kStateDim> amps_{};
};

/// Executes from |0000>. Requires a 4-qubit circuit.
StateVector run_statevector(const Circuit& circuit);

double analytic_success_prob(double theta, int t);

/// Postselected tallies at one depth: good = |1000>, bad = other unary
/// outcomes, everything else discarded.
struct DepthCounts {
  int depth = 0;
  std::int64_t nGood = 0;
  std::int64_t nBad = 0;
  std::int64_t nDiscarded = 0;

  std::int64_t kept() const { return nGood + nBad; }
  std::int64_t total() const { return nGood + nBad + nDiscarded; }

  friend bool operator==(const DepthCounts&, const DepthCounts&) = default;
};

DepthCounts sample_and_postselect(std::span<const double, kStateDim> distribution,
                                  std::int64_t nShots, Rng& rng, int depth = 0);

}  // namespace lodae
