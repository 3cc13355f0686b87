// Command-line driver. Talks to the library through the C interface only.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lodae/lodae.h"

namespace {

struct Failure {
  lodae_status status;
  std::string message;
};

void check(lodae_status s) {
  if (s != LODAE_OK) throw Failure{s, lodae_last_error_message()};
}

struct Experiment {
  lodae_experiment* handle = nullptr;
  ~Experiment() { lodae_experiment_destroy(handle); }
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string algorithms;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--algorithms", c.algorithms, "Comma list of direct,mle,crt,hybrid,powerlaw");
}

void open(Experiment& exp, const Common& c) {
  if (c.config.empty()) {
    check(lodae_experiment_create_default(&exp.handle));
  } else {
    check(lodae_experiment_create_from_file(c.config.c_str(), &exp.handle));
  }
  if (c.seed) check(lodae_experiment_set_seed(exp.handle, *c.seed));
  if (!c.out.empty()) check(lodae_experiment_set_output_dir(exp.handle, c.out.c_str()));
  if (!c.algorithms.empty()) check(lodae_experiment_set_algorithms(exp.handle, c.algorithms.c_str()));
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0') {
      throw Failure{LODAE_INVALID_ARGUMENT, "not a number in --values: " + item};
    }
    out.push_back(v);
  }
  if (out.empty()) throw Failure{LODAE_INVALID_ARGUMENT, "--values is empty"};
  return out;
}

int report(const std::string& command, lodae_status status, const std::string& message) {
  nlohmann::ordered_json err;
  err["error"] = {{"command", command},
                  {"status", lodae_status_name(status)},
                  {"code", static_cast<int>(status)},
                  {"message", message}};
  std::cerr << err.dump() << "\n";
  return status == LODAE_INVALID_ARGUMENT || status == LODAE_CONFIG ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-depth amplitude estimation experiments"};
  app.require_subcommand(1);

  Common stats_opts, run_opts, cal_opts, fit_opts, sweep_opts;
  int statsDepth = 7;
  auto* stats = app.add_subcommand("stats", "Circuit resource table for t = 0..max depth");
  add_common(stats, stats_opts);
  stats->add_option("--max-depth", statsDepth, "Largest iteration count")->check(CLI::Range(0, 1000));

  auto* run = app.add_subcommand("run", "Run an experiment and write CSV/JSON outputs");
  add_common(run, run_opts);

  auto* cal = app.add_subcommand("calibrate", "Calibrate hybrid thresholds into calibration.json");
  add_common(cal, cal_opts);

  std::string countsPath;
  auto* fit = app.add_subcommand("fit-noise", "Fit per-depth depolarizing rates into noise_fit.json");
  add_common(fit, fit_opts);
  fit->add_option("--counts", countsPath, "counts.csv from a previous run")->check(CLI::ExistingFile);

  std::string param = "max_depth";
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "Repeat the experiment over max depth, epsilon or shots");
  add_common(sweep, sweep_opts);
  sweep->add_option("--param", param, "max_depth, epsilon or shots")
      ->check(CLI::IsMember({"max_depth", "epsilon", "shots"}));
  sweep->add_option("--values", values, "Comma list of values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report("parse", LODAE_INVALID_ARGUMENT, e.what());
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (*stats) {
      size_t needed = 0;
      check(lodae_resource_table_csv(statsDepth, nullptr, 0, &needed));
      std::string buf(needed, '\0');
      check(lodae_resource_table_csv(statsDepth, buf.data(), buf.size(), &needed));
      buf.resize(needed - 1);
      std::cout << buf;
      if (!stats_opts.out.empty()) {
        std::filesystem::create_directories(stats_opts.out);
        std::ofstream f(std::filesystem::path(stats_opts.out) / "stats.csv", std::ios::binary);
        f << buf;
        if (!f) throw Failure{LODAE_IO, "cannot write stats.csv"};
      }
    } else if (*run) {
      Experiment exp;
      open(exp, run_opts);
      check(lodae_experiment_run(exp.handle));
    } else if (*cal) {
      Experiment exp;
      open(exp, cal_opts);
      check(lodae_experiment_calibrate(exp.handle));
    } else if (*fit) {
      Experiment exp;
      open(exp, fit_opts);
      check(lodae_experiment_fit_noise(exp.handle, countsPath.empty() ? nullptr : countsPath.c_str()));
    } else if (*sweep) {
      Experiment exp;
      open(exp, sweep_opts);
      const auto v = parse_values(values);
      check(lodae_experiment_sweep(exp.handle, param.c_str(), v.data(), v.size()));
    }
  } catch (const Failure& f) {
    return report(command, f.status, f.message);
  } catch (const std::exception& e) {
    return report(command, LODAE_INTERNAL, e.what());
  }
  return 0;
}
