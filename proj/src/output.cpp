#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lodae/config.hpp"
#include "lodae/error.hpp"
#include "lodae/harness.hpp"

namespace lodae {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Commas and quotes cannot appear in our tags, but keep the CSV valid anyway.
std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) fail(ErrorCode::kIo, "failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    fail(ErrorCode::kIo, "cannot create output directory " + dir.string());
  }
}

std::string trials_csv(std::span<const TrialResult> trials) {
  std::ostringstream os;
  os << "algorithm,depth,oracle_calls,trial_id,theta_true,p_true,theta_hat,p_hat,abs_err_p,"
        "abs_err_theta,branch_tag\n";
  for (const auto& t : trials) {
    for (const auto& e : t.estimates) {
      os << algorithm_name(e.algorithm) << ',' << e.depth << ',' << e.oracleCalls << ','
         << t.trialId << ',' << num(t.thetaTrue) << ',' << num(t.pTrue) << ',' << num(e.thetaHat)
         << ',' << num(e.pHat) << ',' << num(std::abs(e.pHat - t.pTrue)) << ','
         << num(std::abs(e.thetaHat - t.thetaTrue)) << ',' << field(e.branch) << '\n';
    }
  }
  return os.str();
}

const char* kAggregateHeader =
    "algorithm,depth,n_trials,total_oracle_calls,mean_oracle_calls,mean_abs_err_p,std_err_p,"
    "mean_abs_err_theta";

void aggregate_row(std::ostream& os, const AggregateRow& r) {
  os << algorithm_name(r.algorithm) << ',' << r.depth << ',' << r.nTrials << ','
     << r.totalOracleCalls << ',' << num(r.meanOracleCalls) << ',' << num(r.meanAbsErrP) << ','
     << num(r.stdErrP) << ',' << num(r.meanAbsErrTheta);
}

std::string aggregate_csv(std::span<const AggregateRow> rows) {
  std::ostringstream os;
  os << kAggregateHeader << '\n';
  for (const auto& r : rows) {
    aggregate_row(os, r);
    os << '\n';
  }
  return os.str();
}

std::string histogram_csv(std::span<const HistogramBin> bins) {
  std::ostringstream os;
  os << "depth,bin_lo,bin_hi,count\n";
  for (const auto& b : bins) {
    os << b.depth << ',' << num(b.lo) << ',' << num(b.hi) << ',' << b.count << '\n';
  }
  return os.str();
}

std::string counts_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << "trial_id,theta_true,depth,n_good,n_bad,n_discarded\n";
  for (std::size_t i = 0; i < result.pools.size(); ++i) {
    const double theta = result.pairs[i].theta();
    for (const auto& c : result.pools[i].byDepth) {
      os << i << ',' << num(theta) << ',' << c.depth << ',' << c.nGood << ',' << c.nBad << ','
         << c.nDiscarded << '\n';
    }
  }
  return os.str();
}

Json manifest(const ExperimentResult& result, const ExperimentConfig& config) {
  Json m;
  m["tool"] = "lodae";
  m["seed"] = config.seed;
  m["config"] = config_to_json(config);
  m["oracle_calls"] = {
      {"per_shot", "2d+1 at depth d, discarded shots included"},
      {"mle", "cumulative over depths 0..D"},
      {"crt", "low-depth MLE calls plus depths D and D-1 when above the low depth"},
      {"hybrid", "max of its MLE and CRT inputs"},
      {"powerlaw", "subsampled shots only"},
  };
  if (result.gammaFit) {
    m["gamma_fit"] = *result.gammaFit;
  } else {
    m["gamma_fit"] = nullptr;
  }
  if (!result.gammaFitError.empty()) m["gamma_fit_error"] = result.gammaFitError;
  if (!result.context.powerLawGamma.empty()) m["powerlaw_gamma"] = result.context.powerLawGamma;
  if (!result.context.hybrid.empty()) m["hybrid_calibration"] = calibration_to_json(result.context.hybrid);
  Json plans = Json::array();
  for (const auto& p : result.context.powerLawPlans) {
    Json j{{"target_eps", p.targetEps}};
    if (p.error.empty()) {
      j["nu"] = p.nu;
      Json sched = Json::array();
      for (const auto& e : p.schedule) sched.push_back({e.depth, e.shots});
      j["schedule"] = sched;
      j["oracle_calls"] = schedule_oracle_calls(p.schedule);
    } else {
      j["error"] = p.error;
    }
    plans.push_back(j);
  }
  if (!plans.empty()) m["powerlaw_plans"] = plans;
  Json errors = Json::array();
  for (const auto& t : result.trials) {
    for (const auto& e : t.errors) errors.push_back({{"trial_id", t.trialId}, {"error", e}});
  }
  m["estimator_errors"] = errors;
  m["files"] = {"trials.csv", "aggregate.csv", "crt_histogram.csv", "counts.csv"};
  return m;
}

}  // namespace

void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& dir) {
  ensure_dir(dir);
  write_file(dir / "trials.csv", trials_csv(result.trials));
  write_file(dir / "aggregate.csv", aggregate_csv(result.aggregates));
  write_file(dir / "crt_histogram.csv", histogram_csv(crt_error_histogram(result.trials)));
  write_file(dir / "counts.csv", counts_csv(result));
  write_file(dir / "manifest.json", manifest(result, config).dump(2) + "\n");
}

std::string resource_table_csv(int maxDepth) {
  std::ostringstream os;
  os << "t,rbs_count,rbs_depth,two_qubit_count,two_qubit_depth\n";
  for (const auto& r : resource_table(maxDepth)) {
    os << r.t << ',' << r.rbsCount << ',' << r.rbsDepth << ',' << r.twoQubitCount << ','
       << r.twoQubitDepth << '\n';
  }
  return os.str();
}

void run_sweep(const ExperimentConfig& config, const std::string& param,
               std::span<const double> values, const std::filesystem::path& dir) {
  if (param != "max_depth" && param != "epsilon" && param != "shots") {
    fail(ErrorCode::kInvalidArgument, "sweep parameter must be max_depth, epsilon or shots");
  }
  if (values.empty()) fail(ErrorCode::kInvalidArgument, "sweep needs at least one value");
  ensure_dir(dir);
  std::ostringstream os;
  os << "param,value," << kAggregateHeader << '\n';
  for (double v : values) {
    ExperimentConfig c = config;
    if (param == "max_depth") {
      if (v != std::floor(v) || v < 0) fail(ErrorCode::kInvalidArgument, "max_depth must be integral");
      c.maxDepth = static_cast<int>(v);
      if (c.noise.maxDepth() < c.maxDepth) {
        // extend the damping rates linearly from the last two depths
        std::vector<double> g(c.noise.gammaByDepth().begin(), c.noise.gammaByDepth().end());
        const double slope = g.size() > 1 ? g[g.size() - 1] - g[g.size() - 2] : 0.0;
        while (static_cast<int>(g.size()) <= c.maxDepth) g.push_back(g.back() + std::max(0.0, slope));
        c.noise = NoiseModel(c.noise.betaReadout(), g, c.noise.leakProb(), c.noise.correlation());
      }
    } else if (param == "epsilon") {
      c.epsilon = v;
    } else {
      if (v != std::floor(v) || v < 1) fail(ErrorCode::kInvalidArgument, "shots must be a positive integer");
      c.nShots = static_cast<std::int64_t>(v);
    }
    const std::string label = param + "=" + num(v);
    c.outputDir = (dir / label).string();
    const ExperimentResult r = run_experiment(c);
    emit_outputs(r, c, dir / label);
    for (const auto& row : r.aggregates) {
      os << param << ',' << num(v) << ',';
      aggregate_row(os, row);
      os << '\n';
    }
  }
  write_file(dir / "sweep.csv", os.str());
}

CountsTable read_counts_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("trial_id,theta_true,depth,n_good,n_bad,n_discarded", 0) != 0) {
    fail(ErrorCode::kIo, path.string() + ": unexpected header");
  }
  CountsTable table;
  long lastTrial = -1;
  int lineNo = 1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    long trial = 0;
    double theta = 0.0;
    int depth = 0;
    long long good = 0, bad = 0, discarded = 0;
    if (std::sscanf(line.c_str(), "%ld,%lf,%d,%lld,%lld,%lld", &trial, &theta, &depth, &good, &bad,
                    &discarded) != 6 ||
        good < 0 || bad < 0 || discarded < 0 || depth < 0) {
      fail(ErrorCode::kIo, path.string() + ": malformed line " + std::to_string(lineNo));
    }
    if (trial != lastTrial) {
      table.countsByTrial.emplace_back();
      table.thetas.push_back(theta);
      lastTrial = trial;
    }
    table.countsByTrial.back().push_back({depth, good, bad, discarded});
  }
  if (table.countsByTrial.empty()) fail(ErrorCode::kIo, path.string() + ": no data rows");
  return table;
}

}  // namespace lodae
