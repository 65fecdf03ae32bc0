#pragma once

// Experiment configuration: flat "key = value" text with dotted section
// keys, '#' comments, UTF-8.
//
//   data.source = synthetic        # synthetic | images | dataset
//   synth.clusters = 4
//   kernel.kind = log_euclidean_gaussian
//   kernel.gamma = 0.5
//   solver.lambda = 0.04
//   experiment.method = ksscr
//   experiment.trials = 20

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "spdc/clustering.hpp"
#include "spdc/error.hpp"
#include "spdc/kernels.hpp"
#include "spdc/pipeline.hpp"
#include "spdc/solver.hpp"
#include "spdc/synth.hpp"

namespace spdc {

/// Malformed or inconsistent configuration.
class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

using KeyValues = std::map<std::string, std::string, std::less<>>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return kv;
}

inline KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

enum class DataSource { synthetic, images, dataset };

struct ExperimentConfig {
  DataSource source = DataSource::synthetic;
  std::filesystem::path data_path;
  int tile = 32;
  double floor = 0.0;  // <= 0: scale-aware default per matrix
  int subsample_clusters = 0;

  SynthSpec synth;
  KernelSpec kernel;
  bool kernel_explicit = false;
  SolverConfig solver;
  int kmeans_restarts = 20;

  Method method = Method::ksscr;
  int clusters = 0;  // 0: number of ground-truth classes
  int trials = 1;
  std::uint64_t base_seed = 0;
  std::filesystem::path output_dir = "spdc-out";
  bool dump_matrices = false;

  PipelineOptions pipeline_options(unsigned threads = 1) const {
    PipelineOptions o;
    o.kernel = kernel;
    o.solver = solver;
    o.kmeans.restarts = kmeans_restarts;
    o.threads = threads;
    return o;
  }

  /// Fills method-dependent defaults and checks cross-field consistency.
  void finalize() {
    if (!kernel_explicit && method == Method::kssce) kernel.kind = KernelKind::euclidean_gaussian;
    if (!kernel_explicit && method == Method::ksscr && kernel.kind == KernelKind::euclidean_gaussian)
      kernel.kind = KernelKind::log_euclidean_gaussian;
    validate();
  }

  void validate() const {
    if (trials < 1) throw ConfigError("experiment.trials must be at least 1");
    if (clusters != 0 && clusters < 2) throw ConfigError("experiment.clusters must be at least 2");
    if (kmeans_restarts < 1) throw ConfigError("experiment.kmeans_restarts must be at least 1");
    if (!kernel_matches(method, kernel.kind))
      throw ConfigError("method '" + std::string(to_string(method)) + "' cannot use kernel '" +
                        std::string(to_string(kernel.kind)) + "'");
    if (source != DataSource::synthetic && data_path.empty()) throw ConfigError("data.path is required");
    if (tile < 1) throw ConfigError("data.tile must be positive");
    if (subsample_clusters < 0 || subsample_clusters == 1) throw ConfigError("data.subsample_clusters must be 0 or >= 2");
    try {
      kernel.validate();
      solver.validate();
      if (source == DataSource::synthetic) synth.validate();
    } catch (const UsageError& e) {
      throw ConfigError(e.what());
    }
  }
};

namespace detail {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "': cannot parse '" + value + "'");
  return out;
}

inline double parse_real(const std::string& key, const std::string& value) {
  // from_chars for double is not available in every libstdc++ we target.
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': cannot parse '" + value + "'");
  }
  if (used != value.size()) throw ConfigError("'" + key + "': cannot parse '" + value + "'");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("'" + key + "': expected a boolean, got '" + value + "'");
}

}  // namespace detail

/// Builds a config from key-values; unknown keys are rejected.
inline ExperimentConfig config_from_key_values(const KeyValues& kv) {
  ExperimentConfig c;
  for (const auto& [key, value] : kv) {
    using detail::parse_number;
    using detail::parse_real;
    try {
      if (key == "data.source") {
        if (value == "synthetic") c.source = DataSource::synthetic;
        else if (value == "images") c.source = DataSource::images;
        else if (value == "dataset") c.source = DataSource::dataset;
        else throw ConfigError("data.source: unknown value '" + value + "'");
      } else if (key == "data.path") {
        c.data_path = value;
      } else if (key == "data.tile") {
        c.tile = parse_number<int>(key, value);
      } else if (key == "data.floor") {
        c.floor = parse_real(key, value);
      } else if (key == "data.subsample_clusters") {
        c.subsample_clusters = parse_number<int>(key, value);
      } else if (key == "synth.clusters") {
        c.synth.clusters = parse_number<int>(key, value);
      } else if (key == "synth.points_per_cluster") {
        c.synth.points_per_cluster = parse_number<int>(key, value);
      } else if (key == "synth.dim") {
        c.synth.dim = parse_number<int>(key, value);
      } else if (key == "synth.center_spread") {
        c.synth.center_spread = parse_real(key, value);
      } else if (key == "synth.noise") {
        c.synth.noise = parse_real(key, value);
      } else if (key == "kernel.kind") {
        c.kernel.kind = parse_kernel_kind(value);
        c.kernel_explicit = true;
      } else if (key == "kernel.gamma") {
        c.kernel.gamma = parse_real(key, value);
      } else if (key == "kernel.beta") {
        c.kernel.beta = parse_real(key, value);
      } else if (key == "solver.lambda") {
        c.solver.lambda = parse_real(key, value);
      } else if (key == "solver.rho") {
        c.solver.rho = parse_real(key, value);
      } else if (key == "solver.epsilon") {
        c.solver.epsilon = parse_real(key, value);
      } else if (key == "solver.max_iters") {
        c.solver.max_iters = parse_number<int>(key, value);
      } else if (key == "experiment.method") {
        c.method = parse_method(value);
      } else if (key == "experiment.clusters") {
        c.clusters = parse_number<int>(key, value);
      } else if (key == "experiment.trials") {
        c.trials = parse_number<int>(key, value);
      } else if (key == "experiment.seed") {
        c.base_seed = parse_number<std::uint64_t>(key, value);
      } else if (key == "experiment.output_dir") {
        c.output_dir = value;
      } else if (key == "experiment.dump_matrices") {
        c.dump_matrices = detail::parse_bool(key, value);
      } else if (key == "experiment.kmeans_restarts") {
        c.kmeans_restarts = parse_number<int>(key, value);
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const UsageError& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  return c;
}

}  // namespace spdc
