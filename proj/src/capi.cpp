#include "lodae/lodae.h"

#include <cstring>
#include <fstream>
#include <string>

#include "lodae/config.hpp"
#include "lodae/error.hpp"
#include "lodae/harness.hpp"

struct lodae_noise_model {
  lodae::NoiseModel model;
};

struct lodae_circuit {
  lodae::Circuit circuit;
};

struct lodae_experiment {
  lodae::ExperimentConfig config;
};

namespace {

thread_local std::string lastError;

template <typename Fn>
lodae_status guard(Fn&& fn) {
  lastError.clear();
  try {
    fn();
    return LODAE_OK;
  } catch (const lodae::Error& e) {
    lastError = e.what();
    return static_cast<lodae_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    lastError = "out of memory";
    return LODAE_INTERNAL;
  } catch (const std::exception& e) {
    lastError = e.what();
    return LODAE_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) lodae::fail(lodae::ErrorCode::kInvalidArgument, what);
}

lodae::Vec4 vec4(const double* v) { return {v[0], v[1], v[2], v[3]}; }

lodae_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    require(needed != nullptr, "needed must not be null");
    *needed = s.size() + 1;
    if (buf == nullptr || cap == 0) return;
    if (cap < s.size() + 1) lodae::fail(lodae::ErrorCode::kOutOfRange, "buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
  });
}

void write_json(const std::filesystem::path& dir, const char* name, const lodae::Json& j) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
  if (!out) lodae::fail(lodae::ErrorCode::kIo, "cannot write " + (dir / name).string());
  out << j.dump(2) << "\n";
  if (!out) lodae::fail(lodae::ErrorCode::kIo, "failed writing " + (dir / name).string());
}

}  // namespace

extern "C" {

const char* lodae_last_error_message(void) { return lastError.c_str(); }

const char* lodae_status_name(lodae_status status) {
  switch (status) {
    case LODAE_OK: return "ok";
    case LODAE_INVALID_ARGUMENT: return "invalid_argument";
    case LODAE_OUT_OF_RANGE: return "out_of_range";
    case LODAE_NUMERICAL: return "numerical";
    case LODAE_INFEASIBLE: return "infeasible";
    case LODAE_IO: return "io";
    case LODAE_CONFIG: return "config";
    case LODAE_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* lodae_version(void) { return "0.1.0"; }

lodae_status lodae_noise_create(double beta_readout, const double* gammas, size_t n_gamma,
                                double leak_prob, lodae_noise_model** out) {
  return guard([&] {
    require(out != nullptr && gammas != nullptr && n_gamma > 0, "noise_create: bad arguments");
    *out = new lodae_noise_model{
        lodae::NoiseModel(beta_readout, std::vector<double>(gammas, gammas + n_gamma), leak_prob)};
  });
}

lodae_status lodae_noise_create_reference_default(int max_depth, lodae_noise_model** out) {
  return guard([&] {
    require(out != nullptr && max_depth >= 0, "noise_create_reference_default: bad arguments");
    *out = new lodae_noise_model{lodae::NoiseModel::reference_default(max_depth)};
  });
}

lodae_status lodae_noise_set_correlation(lodae_noise_model* model, double p_switch,
                                         double burst_scale, double burst_fraction) {
  return guard([&] {
    require(model != nullptr, "null noise model");
    model->model.setCorrelation(lodae::Correlation{p_switch, burst_scale, burst_fraction});
  });
}

lodae_status lodae_noise_eta(const lodae_noise_model* model, int depth, double* eta) {
  return guard([&] {
    require(model != nullptr && eta != nullptr, "noise_eta: null argument");
    *eta = lodae::effective_eta(model->model, depth);
  });
}

void lodae_noise_destroy(lodae_noise_model* model) { delete model; }

lodae_status lodae_circuit_build_iterated(const double x[4], const double y[4], int t,
                                          lodae_circuit** out) {
  return guard([&] {
    require(x != nullptr && y != nullptr && out != nullptr, "circuit_build_iterated: null argument");
    *out = new lodae_circuit{lodae::build_iterated_circuit(vec4(x), vec4(y), t)};
  });
}

lodae_status lodae_circuit_compile(const lodae_circuit* circuit, lodae_circuit** out) {
  return guard([&] {
    require(circuit != nullptr && out != nullptr, "circuit_compile: null argument");
    *out = new lodae_circuit{lodae::compile_to_two_qubit(circuit->circuit)};
  });
}

lodae_status lodae_circuit_two_qubit_stats(const lodae_circuit* circuit, size_t* count,
                                           size_t* depth) {
  return guard([&] {
    require(circuit != nullptr && count != nullptr && depth != nullptr, "two_qubit_stats: null argument");
    const auto s = lodae::two_qubit_stats(circuit->circuit);
    *count = s.twoQubitCount;
    *depth = s.twoQubitDepth;
  });
}

lodae_status lodae_circuit_gate_count(const lodae_circuit* circuit, size_t* count) {
  return guard([&] {
    require(circuit != nullptr && count != nullptr, "gate_count: null argument");
    *count = circuit->circuit.size();
  });
}

lodae_status lodae_circuit_probabilities(const lodae_circuit* circuit, double out[16]) {
  return guard([&] {
    require(circuit != nullptr && out != nullptr, "probabilities: null argument");
    const auto p = lodae::run_statevector(circuit->circuit).probabilities();
    for (size_t i = 0; i < 16; ++i) out[i] = p[i];
  });
}

void lodae_circuit_destroy(lodae_circuit* circuit) { delete circuit; }

lodae_status lodae_mle_estimate(const lodae_counts* counts, size_t n, double epsilon,
                                const lodae_noise_model* noise, lodae_estimate* out) {
  return guard([&] {
    require(counts != nullptr && n > 0 && out != nullptr, "mle_estimate: bad arguments");
    std::vector<lodae::DepthCounts> c;
    for (size_t i = 0; i < n; ++i) {
      c.push_back({counts[i].depth, counts[i].n_good, counts[i].n_bad, counts[i].n_discarded});
    }
    const auto e = lodae::mle_estimate(c, epsilon, noise ? &noise->model : nullptr);
    *out = {e.thetaHat, e.pHat, e.oracleCalls, e.depth};
  });
}

lodae_status lodae_crt_solve(int64_t r1, int64_t n1, int64_t r2, int64_t n2, int64_t* out) {
  return guard([&] {
    require(out != nullptr, "crt_solve: null output");
    *out = lodae::crt_solve(r1, n1, r2, n2);
  });
}

lodae_status lodae_crt_reconstruct(double p_d, double p_d_minus_1, double theta_prime, int max_depth,
                                   double* theta_hat) {
  return guard([&] {
    require(theta_hat != nullptr, "crt_reconstruct: null output");
    *theta_hat = lodae::crt_reconstruct(p_d, p_d_minus_1, theta_prime, max_depth).thetaHat();
  });
}

lodae_status lodae_fisher_noisy(double nu, double n_shots, int max_depth, const double* gammas,
                                size_t n_gamma, double* out) {
  return guard([&] {
    require(out != nullptr && (gammas != nullptr || n_gamma == 0), "fisher_noisy: bad arguments");
    *out = lodae::fisher_noisy(nu, n_shots, max_depth, std::span<const double>(gammas, n_gamma));
  });
}

lodae_status lodae_optimize_exponent(double target_eps, double n_shots, int max_depth,
                                     const double* gammas, size_t n_gamma, double* nu) {
  return guard([&] {
    require(nu != nullptr && (gammas != nullptr || n_gamma == 0), "optimize_exponent: bad arguments");
    *nu = lodae::optimize_exponent(target_eps, n_shots, max_depth,
                                   std::span<const double>(gammas, n_gamma));
  });
}

lodae_status lodae_power_law_schedule(double nu, int64_t n_shots, int max_depth,
                                      lodae_schedule_entry* out, size_t cap, size_t* needed) {
  return guard([&] {
    require(needed != nullptr, "power_law_schedule: null needed");
    const auto s = lodae::power_law_schedule({nu, n_shots, max_depth, 1.0});
    *needed = s.size();
    if (out == nullptr) return;
    for (size_t i = 0; i < s.size() && i < cap; ++i) out[i] = {s[i].depth, s[i].shots};
  });
}

lodae_status lodae_experiment_create_default(lodae_experiment** out) {
  return guard([&] {
    require(out != nullptr, "null output");
    *out = new lodae_experiment{};
  });
}

lodae_status lodae_experiment_create_from_json(const char* json, lodae_experiment** out) {
  return guard([&] {
    require(json != nullptr && out != nullptr, "create_from_json: null argument");
    *out = new lodae_experiment{lodae::config_from_json_text(json)};
  });
}

lodae_status lodae_experiment_create_from_file(const char* path, lodae_experiment** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "create_from_file: null argument");
    *out = new lodae_experiment{lodae::load_config(path)};
  });
}

lodae_status lodae_experiment_set_seed(lodae_experiment* exp, uint64_t seed) {
  return guard([&] {
    require(exp != nullptr, "null experiment");
    exp->config.seed = seed;
  });
}

lodae_status lodae_experiment_set_output_dir(lodae_experiment* exp, const char* dir) {
  return guard([&] {
    require(exp != nullptr && dir != nullptr && *dir != '\0', "set_output_dir: bad arguments");
    exp->config.outputDir = dir;
  });
}

lodae_status lodae_experiment_set_algorithms(lodae_experiment* exp, const char* list) {
  return guard([&] {
    require(exp != nullptr && list != nullptr, "set_algorithms: null argument");
    auto algs = lodae::parse_algorithm_list(list);
    lodae::ExperimentConfig c = exp->config;
    c.algorithms = std::move(algs);
    c.validate();
    exp->config = std::move(c);
  });
}

lodae_status lodae_experiment_run(lodae_experiment* exp) {
  return guard([&] {
    require(exp != nullptr, "null experiment");
    const auto result = lodae::run_experiment(exp->config);
    lodae::emit_outputs(result, exp->config, exp->config.outputDir);
  });
}

lodae_status lodae_experiment_calibrate(lodae_experiment* exp) {
  return guard([&] {
    require(exp != nullptr, "null experiment");
    const auto& c = exp->config;
    c.validate();
    lodae::Rng rng(c.seed, std::uint64_t{1} << 40);
    const auto cal = lodae::calibrate_hybrid(c, c.hybrid.calibrationTrials, rng);
    lodae::Json j;
    j["seed"] = c.seed;
    j["calibration_trials"] = c.hybrid.calibrationTrials;
    j["noise"] = lodae::noise_to_json(c.noise);
    j["hybrid_calibration"] = lodae::calibration_to_json(cal);
    write_json(c.outputDir, "calibration.json", j);
  });
}

lodae_status lodae_experiment_fit_noise(lodae_experiment* exp, const char* counts_csv) {
  return guard([&] {
    require(exp != nullptr, "null experiment");
    lodae::Json j;
    std::vector<double> gamma;
    if (counts_csv != nullptr) {
      const auto table = lodae::read_counts_csv(counts_csv);
      gamma = lodae::fit_depolarizing(table.countsByTrial, table.thetas);
      j["source"] = counts_csv;
      j["n_trials"] = table.countsByTrial.size();
    } else {
      lodae::ExperimentConfig c = exp->config;
      c.algorithms.clear();
      const auto result = lodae::run_experiment(c);
      std::vector<std::vector<lodae::DepthCounts>> counts;
      std::vector<double> thetas;
      for (size_t i = 0; i < result.pools.size(); ++i) {
        counts.push_back(result.pools[i].byDepth);
        thetas.push_back(result.pairs[i].theta());
      }
      gamma = lodae::fit_depolarizing(counts, thetas);
      j["source"] = "simulated";
      j["seed"] = c.seed;
      j["n_trials"] = c.nTrials;
      j["n_shots"] = c.nShots;
      j["noise"] = lodae::noise_to_json(c.noise);
      j["effective_gamma_true"] = c.noise.effectiveGammas();
    }
    j["gamma_fit"] = gamma;
    write_json(exp->config.outputDir, "noise_fit.json", j);
  });
}

lodae_status lodae_experiment_sweep(lodae_experiment* exp, const char* param, const double* values,
                                    size_t n) {
  return guard([&] {
    require(exp != nullptr && param != nullptr && values != nullptr, "sweep: null argument");
    lodae::run_sweep(exp->config, param, std::span<const double>(values, n), exp->config.outputDir);
  });
}

lodae_status lodae_experiment_config_json(const lodae_experiment* exp, char* buf, size_t cap,
                                          size_t* needed) {
  if (exp == nullptr) {
    lastError = "null experiment";
    return LODAE_INVALID_ARGUMENT;
  }
  return copy_out(lodae::config_to_json(exp->config).dump(2), buf, cap, needed);
}

void lodae_experiment_destroy(lodae_experiment* exp) { delete exp; }

lodae_status lodae_resource_table_csv(int max_depth, char* buf, size_t cap, size_t* needed) {
  std::string csv;
  const lodae_status s = guard([&] { csv = lodae::resource_table_csv(max_depth); });
  if (s != LODAE_OK) return s;
  return copy_out(csv, buf, cap, needed);
}

}  // extern "C"
