#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedcpsl/baselines.hpp"
#include "fedcpsl/client.hpp"
#include "fedcpsl/nn.hpp"
#include "fedcpsl/trace.hpp"

namespace fedcpsl::cli {

/// Environment variable naming the directory that holds IDX files.
inline constexpr const char* kDataDirEnv = "FEDCPSL_DATA_DIR";

enum class DatasetKind { blobs, mnist_subset };

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  AlgorithmKind algorithm = AlgorithmKind::fedcpsl;
  DatasetKind dataset = DatasetKind::blobs;
  std::string data_dir;  // empty: $FEDCPSL_DATA_DIR, then ./data
  std::string mnist_prefix = "mnist2k";
  int mnist_samples = 0;  // 0 = every sample in the files

  int blob_classes = 10;
  int blob_dim = 20;
  int blob_per_class = 100;
  double blob_spread = 0.5;

  int clients = 10;
  int participants = 2;
  int rounds = 100;
  int shards_per_client = 2;
  double epsilon = 0.9;
  double test_frac = 0.2;

  std::vector<int> hidden = {32};
  Activation activation = Activation::tanh;

  std::vector<double> beta = {0.75};
  double gamma = 0.8;
  double eta = 0.005;
  std::optional<double> eta_c;  // nullopt: 2 * eta
  std::optional<double> eta_g;  // nullopt: automatic
  double eta_v = 1.0;
  double alpha_p = 1.0;
  double alpha_r = 0.5;
  PseudoLabelMode pseudo_label = PseudoLabelMode::closed_form;
  int s_l = 32;
  int s_u = 32;
  int epoch_min = 2;
  int epoch_max = 2;
  bool full_batch = false;
  std::uint64_t seed = 1;
  std::optional<double> L_estimate;

  TraceFormat trace_format = TraceFormat::csv;
  double accuracy_threshold = 0.95;
  bool record_wall_time = false;

  double effective_eta_c() const { return eta_c ? *eta_c : 2.0 * eta; }
  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Every accepted key, in serialization order.
const std::vector<std::string>& config_keys();

/// Applies one key = value assignment.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Parses a flat "key = value" file ('#' starts a comment) over the defaults.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// File values first, then overrides (typically command-line flags); the
/// result is validated.
ExperimentConfig parse_config(const std::optional<std::filesystem::path>& file,
                              const std::map<std::string, std::string>& overrides);

/// Canonical "key = value" text that parse_config_text reads back.
std::string serialize_config(const ExperimentConfig& config);

std::filesystem::path resolve_data_dir(const ExperimentConfig& config);

}  // namespace fedcpsl::cli
