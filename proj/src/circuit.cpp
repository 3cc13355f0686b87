#include "lodae/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lodae/error.hpp"

namespace lodae {

const char* gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::PauliX: return "X";
    case GateKind::PauliZ: return "Z";
    case GateKind::Hadamard: return "H";
    case GateKind::RotY: return "RY";
    case GateKind::CZ: return "CZ";
    case GateKind::RBS: return "RBS";
  }
  return "?";
}

bool is_two_qubit(GateKind kind) {
  return kind == GateKind::CZ || kind == GateKind::RBS;
}

Circuit::Circuit(int numQubits) : numQubits_(numQubits) {
  if (numQubits <= 0) fail(ErrorCode::kInvalidArgument, "circuit needs at least one qubit");
}

void Circuit::append(const Gate& gate) {
  const int n = gate.arity();
  for (int i = 0; i < n; ++i) {
    if (gate.targets[i] < 0 || gate.targets[i] >= numQubits_) {
      fail(ErrorCode::kInvalidArgument,
           std::string(gate_name(gate.kind)) + " target " + std::to_string(gate.targets[i]) +
               " outside register of " + std::to_string(numQubits_));
    }
  }
  if (n == 2 && gate.targets[0] == gate.targets[1]) {
    fail(ErrorCode::kInvalidArgument,
         std::string(gate_name(gate.kind)) + " needs two distinct targets");
  }
  Gate g = gate;
  if (n == 1) g.targets[1] = -1;
  gates_.push_back(g);
}

void Circuit::append(const Circuit& other) {
  if (other.numQubits_ > numQubits_) fail(ErrorCode::kInvalidArgument, "register too small");
  for (const auto& g : other.gates_) append(g);
}

Circuit Circuit::adjoint() const {
  Circuit out(numQubits_);
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
    Gate g = *it;
    g.angle = -g.angle;
    out.gates_.push_back(g);
  }
  return out;
}

std::size_t Circuit::count(GateKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(gates_.begin(), gates_.end(), [kind](const Gate& g) { return g.kind == kind; }));
}

Matrix4 rbs_unitary(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Matrix4 m{};
  m[0][0] = 1.0;
  m[1][1] = c;
  m[1][2] = s;
  m[2][1] = -s;
  m[2][2] = c;
  m[3][3] = 1.0;
  return m;
}

std::vector<Gate> decompose_rbs(double angle, int a, int b) {
  if (a == b) fail(ErrorCode::kInvalidArgument, "decompose_rbs: identical targets");
  return {Gate::h(a),          Gate::h(b),           Gate::cz(a, b),
          Gate::ry(a, angle),  Gate::ry(b, -angle),  Gate::cz(a, b),
          Gate::h(a),          Gate::h(b)};
}

LoaderAngles loader_angles(const Vec4& x) {
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  if (norm2 == 0.0) fail(ErrorCode::kInvalidArgument, "loader_angles: zero vector");
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidArgument, "loader_angles: vector is not unit norm");
  }
  const double lower = std::hypot(x[0], x[1]);
  const double upper = std::hypot(x[2], x[3]);
  LoaderAngles out;
  out.top = std::atan2(upper, lower);
  // zero-norm branches keep angle 0
  out.left = lower > 0.0 ? std::atan2(x[1], x[0]) : 0.0;
  out.right = upper > 0.0 ? std::atan2(x[3], x[2]) : 0.0;
  return out;
}

Circuit build_loader(const LoaderAngles& angles) {
  Circuit c(kRegisterQubits);
  c.append(Gate::x(0));
  c.append(Gate::rbs(0, 2, angles.top));
  c.append(Gate::rbs(0, 1, angles.left));
  c.append(Gate::rbs(2, 3, angles.right));
  return c;
}

namespace {

// A without the leading X.
Circuit oracle_body(const LoaderAngles& ax, const LoaderAngles& ay) {
  Circuit c(kRegisterQubits);
  c.append(Gate::rbs(0, 2, ax.top));
  c.append(Gate::rbs(0, 1, ax.left - ay.left));
  c.append(Gate::rbs(2, 3, ax.right - ay.right));
  c.append(Gate::rbs(0, 2, -ay.top));
  return c;
}

}  // namespace

Circuit build_oracle(const Vec4& x, const Vec4& y) {
  Circuit c(kRegisterQubits);
  c.append(Gate::x(0));
  c.append(oracle_body(loader_angles(x), loader_angles(y)));
  return c;
}

Circuit build_iterated_circuit(const Vec4& x, const Vec4& y, int t, bool mergeAcrossReflection) {
  if (t < 0) fail(ErrorCode::kInvalidArgument, "build_iterated_circuit: negative depth");
  const Circuit body = oracle_body(loader_angles(x), loader_angles(y));
  const Circuit bodyDagger = body.adjoint();

  // U^t = (A S0 A^dag S_chi)^t A. On the unary subspace S_chi acts as Z on
  // qubit 0 and X S0 X as -Z, so up to a global phase each iteration is
  // body . Z . body^dag . Z.
  Circuit c(kRegisterQubits);
  c.append(Gate::x(0));
  c.append(body);
  for (int i = 0; i < t; ++i) {
    c.append(Gate::z(0));
    c.append(bodyDagger);
    c.append(Gate::z(0));
    c.append(body);
  }
  return mergeAcrossReflection ? merge_rbs_across_z(c) : c;
}

Circuit merge_rbs_across_z(const Circuit& circuit) {
  const auto& g = circuit.gates();
  Circuit out(circuit.numQubits());
  std::size_t i = 0;
  while (i < g.size()) {
    if (i + 2 < g.size() && g[i].kind == GateKind::RBS && g[i + 1].kind == GateKind::PauliZ &&
        g[i + 2].kind == GateKind::RBS && g[i].targets == g[i + 2].targets &&
        (g[i + 1].targets[0] == g[i].targets[0] || g[i + 1].targets[0] == g[i].targets[1])) {
      // RBS(b) Z RBS(a) = Z RBS(-b) RBS(a) = Z RBS(a - b), since Z on either
      // wire flips the sign of the rotation.
      out.append(Gate::rbs(g[i].targets[0], g[i].targets[1], g[i].angle - g[i + 2].angle));
      out.append(g[i + 1]);
      i += 3;
    } else {
      out.append(g[i]);
      ++i;
    }
  }
  return out;
}

Circuit compile_to_two_qubit(const Circuit& circuit) {
  Circuit out(circuit.numQubits());
  for (const auto& g : circuit.gates()) {
    if (g.kind == GateKind::RBS) {
      for (const auto& d : decompose_rbs(g.angle, g.targets[0], g.targets[1])) out.append(d);
    } else {
      out.append(g);
    }
  }
  return out;
}

CompiledStats two_qubit_stats(const Circuit& circuit) {
  std::vector<std::size_t> level(static_cast<std::size_t>(circuit.numQubits()), 0);
  CompiledStats stats;
  for (const auto& g : circuit.gates()) {
    if (!is_two_qubit(g.kind)) continue;
    auto& la = level[static_cast<std::size_t>(g.targets[0])];
    auto& lb = level[static_cast<std::size_t>(g.targets[1])];
    const std::size_t layer = std::max(la, lb) + 1;
    la = lb = layer;
    ++stats.twoQubitCount;
    stats.twoQubitDepth = std::max(stats.twoQubitDepth, layer);
  }
  return stats;
}

CompiledStats compiled_stats(const Circuit& circuit) {
  if (circuit.count(GateKind::RBS) != 0) {
    fail(ErrorCode::kInvalidArgument, "compiled_stats: circuit still contains RBS gates");
  }
  return two_qubit_stats(circuit);
}

}  // namespace lodae
