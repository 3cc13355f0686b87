#include "lodae/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "lodae/error.hpp"

namespace lodae {

namespace {

void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(ErrorCode::kConfig, where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.contains(key)) fail(ErrorCode::kConfig, "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const Json& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::kConfig, where + "." + key + " has the wrong type");
  }
}

VectorMode parse_vector_mode(const std::string& s) {
  if (s == "haar") return VectorMode::Haar;
  if (s == "uniform-theta") return VectorMode::UniformTheta;
  fail(ErrorCode::kConfig, "vector_mode must be haar or uniform-theta, got '" + s + "'");
}

CrtOffsets parse_offsets(const std::string& s) {
  if (s == "literal") return CrtOffsets::Literal;
  if (s == "extended") return CrtOffsets::Extended;
  fail(ErrorCode::kConfig, "crt_offsets must be literal or extended, got '" + s + "'");
}

}  // namespace

std::vector<Algorithm> parse_algorithm_list(const std::string& commaList) {
  std::vector<Algorithm> out;
  std::stringstream ss(commaList);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    item = item.substr(b, e - b + 1);
    const auto a = parse_algorithm(item);
    if (!a) fail(ErrorCode::kConfig, "unknown algorithm '" + item + "'");
    if (std::find(out.begin(), out.end(), *a) == out.end()) out.push_back(*a);
  }
  return out;
}

Json noise_to_json(const NoiseModel& model) {
  Json j;
  j["beta_readout"] = model.betaReadout();
  j["gamma_by_depth"] = std::vector<double>(model.gammaByDepth().begin(), model.gammaByDepth().end());
  j["leak_prob"] = model.leakProb();
  if (model.correlation()) {
    const auto& c = *model.correlation();
    j["correlation"] = {{"p_switch", c.pSwitch}, {"burst_scale", c.burstScale},
                        {"burst_fraction", c.burstFraction}};
  } else {
    j["correlation"] = nullptr;
  }
  return j;
}

NoiseModel noise_from_json(const Json& doc, int maxDepth) {
  check_keys(doc, "noise", {"preset", "beta_readout", "gamma_by_depth", "leak_prob", "correlation"});
  std::string preset = "reference";
  read(doc, "preset", preset, "noise");
  NoiseModel base = [&] {
    if (preset == "reference") return NoiseModel::reference_default(maxDepth);
    if (preset == "noiseless") return NoiseModel::noiseless(maxDepth);
    fail(ErrorCode::kConfig, "noise.preset must be reference or noiseless, got '" + preset + "'");
  }();
  double beta = base.betaReadout();
  std::vector<double> gamma(base.gammaByDepth().begin(), base.gammaByDepth().end());
  double leak = base.leakProb();
  read(doc, "beta_readout", beta, "noise");
  read(doc, "gamma_by_depth", gamma, "noise");
  read(doc, "leak_prob", leak, "noise");
  std::optional<Correlation> corr;
  if (auto it = doc.find("correlation"); it != doc.end() && !it->is_null()) {
    check_keys(*it, "noise.correlation", {"p_switch", "burst_scale", "burst_fraction"});
    Correlation c;
    read(*it, "p_switch", c.pSwitch, "noise.correlation");
    read(*it, "burst_scale", c.burstScale, "noise.correlation");
    read(*it, "burst_fraction", c.burstFraction, "noise.correlation");
    corr = c;
  }
  try {
    return NoiseModel(beta, std::move(gamma), leak, corr);
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, std::string("noise: ") + e.what());
  }
}

ExperimentConfig config_from_json(const Json& doc) {
  check_keys(doc, "config",
             {"n_trials", "n_shots", "max_depth", "epsilon", "algorithms", "vector_mode", "seed",
              "mle_noise_aware", "crt_offsets", "crt_low_depth", "threads", "noise", "hybrid",
              "powerlaw", "output_dir"});
  ExperimentConfig c;
  read(doc, "n_trials", c.nTrials, "config");
  read(doc, "n_shots", c.nShots, "config");
  read(doc, "max_depth", c.maxDepth, "config");
  read(doc, "epsilon", c.epsilon, "config");
  read(doc, "seed", c.seed, "config");
  read(doc, "mle_noise_aware", c.mleNoiseAware, "config");
  read(doc, "crt_low_depth", c.crtLowDepth, "config");
  read(doc, "threads", c.threads, "config");
  read(doc, "output_dir", c.outputDir, "config");
  if (auto it = doc.find("algorithms"); it != doc.end()) {
    std::string joined;
    if (it->is_string()) {
      joined = it->get<std::string>();
    } else if (it->is_array()) {
      for (const auto& a : *it) {
        if (!a.is_string()) fail(ErrorCode::kConfig, "config.algorithms entries must be strings");
        joined += a.get<std::string>() + ",";
      }
    } else {
      fail(ErrorCode::kConfig, "config.algorithms must be a list of names");
    }
    c.algorithms = parse_algorithm_list(joined);
  }
  std::string s;
  if (doc.contains("vector_mode")) {
    read(doc, "vector_mode", s, "config");
    c.vectorMode = parse_vector_mode(s);
  }
  if (doc.contains("crt_offsets")) {
    read(doc, "crt_offsets", s, "config");
    c.crtOffsets = parse_offsets(s);
  }
  if (c.maxDepth < 0) fail(ErrorCode::kConfig, "max_depth must be nonnegative");
  c.noise = noise_from_json(doc.value("noise", Json::object()), c.maxDepth);
  if (auto it = doc.find("hybrid"); it != doc.end()) {
    check_keys(*it, "hybrid", {"beta_hybrid", "calibration_trials", "tune_beta", "calibration_file"});
    read(*it, "beta_hybrid", c.hybrid.betaHybrid, "hybrid");
    read(*it, "calibration_trials", c.hybrid.calibrationTrials, "hybrid");
    read(*it, "tune_beta", c.hybrid.tuneBeta, "hybrid");
    read(*it, "calibration_file", c.hybrid.calibrationFile, "hybrid");
  }
  if (auto it = doc.find("powerlaw"); it != doc.end()) {
    check_keys(*it, "powerlaw", {"target_eps", "nu_min", "nu_max", "nu_resolution", "use_fitted_gamma"});
    read(*it, "target_eps", c.powerLaw.targetEps, "powerlaw");
    read(*it, "nu_min", c.powerLaw.search.lo, "powerlaw");
    read(*it, "nu_max", c.powerLaw.search.hi, "powerlaw");
    read(*it, "nu_resolution", c.powerLaw.search.resolution, "powerlaw");
    read(*it, "use_fitted_gamma", c.powerLaw.useFittedGamma, "powerlaw");
    if (!(c.powerLaw.search.lo < c.powerLaw.search.hi) || !(c.powerLaw.search.resolution > 0.0)) {
      fail(ErrorCode::kConfig, "powerlaw: need nu_min < nu_max and nu_resolution > 0");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig config_from_json_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read config " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return config_from_json_text(os.str());
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["n_trials"] = c.nTrials;
  j["n_shots"] = c.nShots;
  j["max_depth"] = c.maxDepth;
  j["epsilon"] = c.epsilon;
  Json algs = Json::array();
  for (auto a : c.algorithms) algs.push_back(algorithm_name(a));
  j["algorithms"] = algs;
  j["vector_mode"] = vector_mode_name(c.vectorMode);
  j["seed"] = c.seed;
  j["mle_noise_aware"] = c.mleNoiseAware;
  j["crt_offsets"] = crt_offsets_name(c.crtOffsets);
  j["crt_low_depth"] = c.crtLowDepth;
  j["threads"] = c.threads;
  j["noise"] = noise_to_json(c.noise);
  j["hybrid"] = {{"beta_hybrid", c.hybrid.betaHybrid},
                 {"calibration_trials", c.hybrid.calibrationTrials},
                 {"tune_beta", c.hybrid.tuneBeta},
                 {"calibration_file", c.hybrid.calibrationFile}};
  j["powerlaw"] = {{"target_eps", c.powerLaw.targetEps},
                   {"nu_min", c.powerLaw.search.lo},
                   {"nu_max", c.powerLaw.search.hi},
                   {"nu_resolution", c.powerLaw.search.resolution},
                   {"use_fitted_gamma", c.powerLaw.useFittedGamma}};
  j["output_dir"] = c.outputDir;
  return j;
}

Json calibration_to_json(const std::vector<HybridCalibration>& cal) {
  Json arr = Json::array();
  for (const auto& c : cal) {
    arr.push_back({{"depth", c.depth},
                   {"mle_avg_depth2", c.mleAvgDepth2},
                   {"crt_exact_at_d", c.crtExactAtD},
                   {"beta_hybrid", c.betaHybrid},
                   {"threshold", c.threshold()}});
  }
  return arr;
}

std::vector<HybridCalibration> calibration_from_json(const Json& doc) {
  const Json& arr = doc.is_object() && doc.contains("hybrid_calibration") ? doc["hybrid_calibration"] : doc;
  if (!arr.is_array()) fail(ErrorCode::kConfig, "calibration must be a list");
  std::vector<HybridCalibration> out;
  for (const auto& e : arr) {
    check_keys(e, "calibration entry",
               {"depth", "mle_avg_depth2", "crt_exact_at_d", "beta_hybrid", "threshold"});
    HybridCalibration c;
    read(e, "depth", c.depth, "calibration");
    read(e, "mle_avg_depth2", c.mleAvgDepth2, "calibration");
    read(e, "crt_exact_at_d", c.crtExactAtD, "calibration");
    read(e, "beta_hybrid", c.betaHybrid, "calibration");
    if (c.depth != static_cast<int>(out.size()) + 2) {
      fail(ErrorCode::kConfig, "calibration entries must cover depths 2, 3, ... in order");
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace lodae
