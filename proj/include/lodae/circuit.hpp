#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace lodae {

using Vec4 = std::array<double, 4>;
using Matrix4 = std::array<std::array<std::complex<double>, 4>, 4>;

enum class GateKind { PauliX, PauliZ, Hadamard, RotY, CZ, RBS };

const char* gate_name(GateKind kind);
bool is_two_qubit(GateKind kind);

/// One gate. Two-qubit gates use targets[0] as the first (more significant)
/// wire of their 4x4 matrix.
struct Gate {
  GateKind kind = GateKind::PauliX;
  std::array<int, 2> targets{0, -1};
  double angle = 0.0;

  int arity() const { return is_two_qubit(kind) ? 2 : 1; }

  static Gate x(int q) { return {GateKind::PauliX, {q, -1}, 0.0}; }
  static Gate z(int q) { return {GateKind::PauliZ, {q, -1}, 0.0}; }
  static Gate h(int q) { return {GateKind::Hadamard, {q, -1}, 0.0}; }
  static Gate ry(int q, double a) { return {GateKind::RotY, {q, -1}, a}; }
  static Gate cz(int a, int b) { return {GateKind::CZ, {a, b}, 0.0}; }
  static Gate rbs(int a, int b, double phi) { return {GateKind::RBS, {a, b}, phi}; }
};

class Circuit {
 public:
  explicit Circuit(int numQubits);

  int numQubits() const { return numQubits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  /// Throws kInvalidArgument if the gate's targets are out of range or repeated.
  void append(const Gate& gate);
  void append(const Circuit& other);

  /// Reversed order with every angle negated and no other change; valid for
  /// the gate set here since X, Z, H, CZ are self-inverse.
  Circuit adjoint() const;

  std::size_t count(GateKind kind) const;

 private:
  int numQubits_;
  std::vector<Gate> gates_;
};

inline constexpr int kRegisterQubits = 4;

Matrix4 rbs_unitary(double angle);

/// H (x) H, CZ, RotY(angle) (x) RotY(-angle), CZ, H (x) H.
std::vector<Gate> decompose_rbs(double angle, int a, int b);

/// Binary-tree angles of the 4-dim unary loader. Tree: top acts on (0,2),
/// left on (0,1), right on (2,3); cos multiplies the lower-index branch.
struct LoaderAngles {
  double top = 0.0;
  double left = 0.0;
  double right = 0.0;
};

LoaderAngles loader_angles(const Vec4& x);

/// X on qubit 0 followed by the three loader RBS gates.
Circuit build_loader(const LoaderAngles& angles);

/// Inner-product oracle A for (x, y): loader(x) followed by loader(y)^dagger
/// with the two middle layers fused, i.e. four RBS gates, RBS depth three.
Circuit build_oracle(const Vec4& x, const Vec4& y);

/// U^t with both reflections reduced to a Z on qubit 0. When
/// `mergeAcrossReflection` is set, every RBS-Z-RBS triple on the same pair is
/// fused into RBS(a - b) followed by Z, giving 6t + 4 RBS gates.
Circuit build_iterated_circuit(const Vec4& x, const Vec4& y, int t,
                               bool mergeAcrossReflection = true);

/// Peephole pass used by build_iterated_circuit.
Circuit merge_rbs_across_z(const Circuit& circuit);

/// Replaces each RBS by its CZ decomposition.
Circuit compile_to_two_qubit(const Circuit& circuit);

struct CompiledStats {
  std::size_t twoQubitCount = 0;
  std::size_t twoQubitDepth = 0;
};

/// ASAP layering over two-qubit gates only. Accepts RBS as a two-qubit gate
/// too, which gives the RBS-level depth of an uncompiled circuit.
CompiledStats two_qubit_stats(const Circuit& circuit);

/// Same as two_qubit_stats but requires a compiled circuit (no RBS).
CompiledStats compiled_stats(const Circuit& circuit);

}  // namespace lodae
