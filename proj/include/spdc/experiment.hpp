#pragma once

// Multi-trial experiment runner behind the spdc command line tool.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spdc/config.hpp"
#include "spdc/dataset_io.hpp"
#include "spdc/descriptors.hpp"
#include "spdc/metrics.hpp"
#include "spdc/parallel.hpp"
#include "spdc/pipeline.hpp"
#include "spdc/random.hpp"
#include "spdc/synth.hpp"

namespace spdc {

/// Reads a config file; a relative data.path resolves against the file's
/// directory.
inline ExperimentConfig load_config(const std::filesystem::path& path) {
  ExperimentConfig c = config_from_key_values(read_key_values(path));
  if (!c.data_path.empty() && c.data_path.is_relative()) c.data_path = path.parent_path() / c.data_path;
  return c;
}

/// Points for one trial plus their ground truth, if any.
struct TrialData {
  std::vector<SpdMatrix> points;
  std::optional<std::vector<int>> labels;
};

/// Data loaded once per experiment; synthetic data is regenerated per trial.
class DataPool {
 public:
  explicit DataPool(const ExperimentConfig& cfg) : cfg_(cfg) {
    switch (cfg.source) {
      case DataSource::synthetic:
        break;
      case DataSource::dataset: {
        SpdDataset ds = read_dataset(cfg.data_path, cfg.floor);
        base_.points = std::move(ds.points);
        base_.labels = std::move(ds.labels);
        break;
      }
      case DataSource::images:
        load_images();
        break;
    }
  }

  TrialData draw(std::uint64_t seed) const {
    if (cfg_.source == DataSource::synthetic) {
      SynthSpec spec = cfg_.synth;
      spec.seed = seed;
      LabeledDataset ds = generate(spec);
      return {std::move(ds.points), std::move(ds.labels)};
    }
    if (cfg_.subsample_clusters == 0) return base_;
    if (!base_.labels) throw ConfigError("data.subsample_clusters needs a labeled dataset");
    return subsample(seed);
  }

 private:
  void load_images() {
    if (!std::filesystem::is_directory(cfg_.data_path))
      throw IoError("image directory '" + cfg_.data_path.string() + "' not found");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(cfg_.data_path)) {
      const auto ext = entry.path().extension().string();
      if (entry.is_regular_file() && (ext == ".pgm" || ext == ".rcmf")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no .pgm or .rcmf images in '" + cfg_.data_path.string() + "'");
    base_.labels.emplace();
    int cls = 0;
    for (const auto& f : files) {
      const GrayImage img = load_image(f);
      for (SpdMatrix& x : image_descriptors(img, cfg_.tile, cfg_.floor)) {
        base_.points.push_back(std::move(x));
        base_.labels->push_back(cls);
      }
      ++cls;
    }
  }

  TrialData subsample(std::uint64_t seed) const {
    const std::set<int> distinct(base_.labels->begin(), base_.labels->end());
    std::vector<int> classes(distinct.begin(), distinct.end());
    const auto want = static_cast<std::size_t>(cfg_.subsample_clusters);
    if (want > classes.size()) throw ConfigError("data.subsample_clusters exceeds the number of classes");
    Rng rng = make_rng(seed, 0xc1a55);
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < want; ++i) {
      const auto j = i + static_cast<std::size_t>(uniform_index(rng, classes.size() - i));
      std::swap(classes[i], classes[j]);
    }
    std::set<int> chosen(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(want));
    TrialData out;
    out.labels.emplace();
    for (std::size_t i = 0; i < base_.points.size(); ++i) {
      if (chosen.count((*base_.labels)[i])) {
        out.points.push_back(base_.points[i]);
        out.labels->push_back((*base_.labels)[i]);
      }
    }
    return out;
  }

  const ExperimentConfig& cfg_;
  TrialData base_;
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  int iters = 0;
  bool converged = true;
  std::optional<double> accuracy;
  std::optional<double> nmi;
  double wall_ms = 0.0;
  bool degenerate = false;
};

struct RunOutcome {
  std::vector<TrialRecord> trials;
  std::optional<double> mean_accuracy;
  std::optional<double> mean_nmi;
};

struct MeanStd {
  double mean = 0.0;
  double sample_std = 0.0;
};

/// Mean and sample standard deviation (n - 1); a single value has std 0.
inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return {std::nan(""), std::nan("")};
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.sample_std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

namespace detail {

/// Shortest text that parses back to the same double.
inline std::string fmt_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_real(*v) : std::string(); }

inline int resolve_cluster_count(const ExperimentConfig& cfg, const TrialData& data) {
  if (cfg.clusters > 0) return cfg.clusters;
  if (cfg.source == DataSource::synthetic) return cfg.synth.clusters;
  if (!data.labels) throw ConfigError("experiment.clusters is required for unlabeled data");
  return static_cast<int>(std::set<int>(data.labels->begin(), data.labels->end()).size());
}

}  // namespace detail

inline constexpr const char* kResultsHeader = "trial,method,kernel,gamma,lambda,rho,iters,converged,accuracy,nmi,wall_ms";

/// One results.csv row (without trailing newline).
inline std::string results_row(const ExperimentConfig& cfg, const TrialRecord& r) {
  std::ostringstream os;
  os << r.trial << ',' << to_string(cfg.method) << ',';
  if (uses_solver(cfg.method)) {
    os << to_string(cfg.kernel.kind) << ','
       << detail::fmt_real(cfg.kernel.kind == KernelKind::stein ? cfg.kernel.beta : cfg.kernel.gamma) << ','
       << detail::fmt_real(cfg.solver.lambda) << ',' << detail::fmt_real(cfg.solver.rho) << ',';
  } else {
    os << "none,,,,";
  }
  os << r.iters << ',' << (r.converged ? 1 : 0) << ',' << detail::fmt_opt(r.accuracy) << ','
     << detail::fmt_opt(r.nmi) << ',' << detail::fmt_real(r.wall_ms);
  return os.str();
}

/// Runs every trial and writes results.csv, summary.csv and, when enabled,
/// affinity.f64 / coeff.f64 for the last trial into cfg.output_dir.
inline RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  cfg.validate();
  const DataPool pool(cfg);
  const auto n_trials = static_cast<std::size_t>(cfg.trials);
  const unsigned budget = thread_budget();
  // Parallelize across trials when there are several, otherwise inside the Gram.
  const unsigned trial_threads = n_trials > 1 ? budget : 1;
  const unsigned gram_threads = n_trials > 1 ? 1 : budget;

  std::vector<TrialRecord> records(n_trials);
  std::optional<PipelineResult> last;
  parallel_for(n_trials, trial_threads, [&](std::size_t t) {
    TrialRecord& rec = records[t];
    rec.trial = static_cast<int>(t);
    rec.seed = cfg.base_seed + t;
    const TrialData data = pool.draw(rec.seed);
    const int k = detail::resolve_cluster_count(cfg, data);
    const auto start = std::chrono::steady_clock::now();
    PipelineResult res = cluster_with(cfg.method, data.points, k, cfg.pipeline_options(gram_threads), rec.seed);
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (res.report) {
      rec.iters = res.report->iters_used;
      rec.converged = res.report->converged;
    }
    rec.degenerate = res.clustering.degenerate;
    if (data.labels) {
      rec.accuracy = accuracy(res.clustering.labels, *data.labels);
      rec.nmi = nmi(res.clustering.labels, *data.labels);
    }
    if (t + 1 == n_trials) last = std::move(res);
  });

  std::filesystem::create_directories(cfg.output_dir);
  {
    std::ofstream out(cfg.output_dir / "results.csv", std::ios::trunc);
    if (!out) throw IoError("cannot write results.csv in '" + cfg.output_dir.string() + "'");
    out << kResultsHeader << '\n';
    for (const auto& r : records) out << results_row(cfg, r) << '\n';
  }

  RunOutcome outcome;
  outcome.trials = records;
  std::vector<double> acc, nm, iters, ms;
  for (const auto& r : records) {
    if (r.accuracy) acc.push_back(*r.accuracy);
    if (r.nmi) nm.push_back(*r.nmi);
    iters.push_back(r.iters);
    ms.push_back(r.wall_ms);
  }
  {
    std::ofstream out(cfg.output_dir / "summary.csv", std::ios::trunc);
    if (!out) throw IoError("cannot write summary.csv in '" + cfg.output_dir.string() + "'");
    out << "metric,mean,sample_std,count\n";
    auto line = [&](const char* name, const std::vector<double>& v) {
      const MeanStd s = mean_std(v);
      out << name << ',' << detail::fmt_real(s.mean) << ',' << detail::fmt_real(s.sample_std) << ',' << v.size()
          << '\n';
    };
    line("accuracy", acc);
    line("nmi", nm);
    line("iters", iters);
    line("wall_ms", ms);
  }
  if (!acc.empty()) outcome.mean_accuracy = mean_std(acc).mean;
  if (!nm.empty()) outcome.mean_nmi = mean_std(nm).mean;

  if (cfg.dump_matrices && last && last->report) {
    write_f64_matrix(last->affinity->entries(), cfg.output_dir / "affinity.f64");
    write_f64_matrix(last->report->C.entries(), cfg.output_dir / "coeff.f64");
  }

  if (log) {
    *log << to_string(cfg.method) << ": " << cfg.trials << " trial(s)";
    if (outcome.mean_accuracy) {
      const MeanStd a = mean_std(acc), n = mean_std(nm);
      *log << std::fixed << std::setprecision(3) << ", accuracy " << a.mean << " +/- " << a.sample_std << ", nmi "
           << n.mean << " +/- " << n.sample_std;
    }
    *log << " -> " << cfg.output_dir.string() << '\n';
  }
  return outcome;
}

struct SweepPoint {
  double gamma = 0.0;
  std::optional<double> mean_accuracy;
  std::optional<double> mean_nmi;
};

/// run_experiment once per gamma (into output_dir/gamma_<i>) and a
/// sweep.csv of mean scores.
inline std::vector<SweepPoint> gamma_sweep(const ExperimentConfig& cfg, const std::vector<double>& gammas,
                                           std::ostream* log = nullptr) {
  if (gammas.empty()) throw ConfigError("sweep: gamma list is empty");
  if (!uses_solver(cfg.method) || cfg.kernel.kind == KernelKind::stein)
    throw ConfigError("sweep: gamma only applies to the Gaussian-kernel solver methods");
  for (double g : gammas)
    if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("sweep: gamma values must be positive");

  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    ExperimentConfig c = cfg;
    c.kernel.gamma = gammas[i];
    c.output_dir = cfg.output_dir / ("gamma_" + std::to_string(i));
    const RunOutcome o = run_experiment(c, log);
    points.push_back({gammas[i], o.mean_accuracy, o.mean_nmi});
  }
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream out(cfg.output_dir / "sweep.csv", std::ios::trunc);
  if (!out) throw IoError("cannot write sweep.csv in '" + cfg.output_dir.string() + "'");
  out << "gamma,mean_accuracy,mean_nmi\n";
  for (const auto& p : points)
    out << detail::fmt_real(p.gamma) << ',' << detail::fmt_opt(p.mean_accuracy) << ',' << detail::fmt_opt(p.mean_nmi)
        << '\n';
  return points;
}

}  // namespace spdc
