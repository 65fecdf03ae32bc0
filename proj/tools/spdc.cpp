// spdc: kernel sparse subspace clustering experiments on SPD data.
//
//   spdc run <config> [--seed S] [--out DIR] [--method M] [--trials T]
//   spdc sweep <config> --gamma g1,g2,... [same overrides]
//   spdc describe <dataset.spds>
//
// Exit codes: 0 success, 1 invalid config or usage, 2 unreadable input,
// 3 numeric failure inside the pipeline.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spdc/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kInvalidConfig = 1, kUnreadableInput = 2, kNumericFailure = 3 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> method;
  std::optional<int> trials;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Base seed (overrides experiment.seed)");
    cmd->add_option("--out", out, "Output directory (overrides experiment.output_dir)");
    cmd->add_option("--method", method, "ksscr | kssce | kmeans_log | kmeans_raw");
    cmd->add_option("--trials", trials, "Number of trials (overrides experiment.trials)");
  }

  void apply(spdc::ExperimentConfig& cfg) const {
    if (seed) cfg.base_seed = *seed;
    if (out) cfg.output_dir = *out;
    if (method) cfg.method = spdc::parse_method(*method);
    if (trials) cfg.trials = *trials;
  }
};

std::vector<double> parse_gamma_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw spdc::ConfigError("--gamma: cannot parse '" + item + "'");
    }
  }
  return out;
}

spdc::ExperimentConfig prepare(const std::string& path, const Overrides& ov) {
  spdc::ExperimentConfig cfg = spdc::load_config(path);
  ov.apply(cfg);
  cfg.finalize();
  return cfg;
}

int describe(const std::string& path) {
  const spdc::SpdDataset ds = spdc::read_dataset(path);
  std::cout << "N: " << ds.points.size() << "\n";
  std::cout << "d: " << ds.dim() << "\n";
  if (ds.labels) {
    const std::set<int> distinct(ds.labels->begin(), ds.labels->end());
    std::cout << "labels: yes (" << distinct.size() << " classes)\n";
  } else {
    std::cout << "labels: no\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel sparse subspace clustering on SPD matrices"};
  app.require_subcommand(1);

  std::string config_path, dataset_path, gamma_text;
  Overrides run_ov, sweep_ov;

  auto* run_cmd = app.add_subcommand("run", "Run a multi-trial experiment");
  run_cmd->add_option("config", config_path, "Config file")->required();
  run_ov.attach(run_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "Repeat an experiment over several kernel widths");
  sweep_cmd->add_option("config", config_path, "Config file")->required();
  sweep_cmd->add_option("--gamma", gamma_text, "Comma-separated gamma values")->required();
  sweep_ov.attach(sweep_cmd);

  auto* describe_cmd = app.add_subcommand("describe", "Summarize an SPDS dataset file");
  describe_cmd->add_option("dataset", dataset_path, "Dataset file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (*run_cmd) {
      const spdc::ExperimentConfig cfg = prepare(config_path, run_ov);
      spdc::run_experiment(cfg, &std::cout);
    } else if (*sweep_cmd) {
      const spdc::ExperimentConfig cfg = prepare(config_path, sweep_ov);
      const auto points = spdc::gamma_sweep(cfg, parse_gamma_list(gamma_text), &std::cout);
      std::cout << "sweep.csv: " << points.size() << " gamma value(s) -> " << cfg.output_dir.string() << "\n";
    } else if (*describe_cmd) {
      return describe(dataset_path);
    }
  } catch (const spdc::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnreadableInput;
  } catch (const spdc::StageError& e) {
    std::cerr << "error: numeric failure in " << e.stage() << " stage: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const spdc::NumericError& e) {
    std::cerr << "error: numeric failure: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const spdc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnreadableInput;
  }
  return kOk;
}
