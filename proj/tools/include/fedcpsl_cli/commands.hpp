#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fedcpsl/server.hpp"
#include "fedcpsl/trainer.hpp"
#include "fedcpsl_cli/config.hpp"

namespace fedcpsl::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitDiverged = 2;

struct Federation {
  ModelSpec spec;
  std::vector<std::shared_ptr<const ClientData>> clients;
};

/// Loads or generates the dataset, partitions it into shards and splits each
/// client. Every random choice derives from config.seed.
Federation build_federation(const ExperimentConfig& config);

TrainingConfig to_training_config(const ExperimentConfig& config);

/// First round whose personalized test accuracy reaches `threshold`, or -1.
int rounds_to_threshold(const std::vector<TraceRecord>& trace, double threshold);

/// Runs one experiment, writes the trace and prints a summary line.
/// Returns kExitOk or kExitDiverged.
int cmd_run(const ExperimentConfig& config, const std::filesystem::path& trace_path,
            std::ostream& out);

struct CompareRow {
  AlgorithmKind algorithm = AlgorithmKind::fedcpsl;
  std::uint64_t seed = 0;
  int rounds_completed = 0;
  bool diverged = false;
  TraceRecord final_record;
  int rounds_to_threshold = -1;
};

/// One run per (algorithm, seed) pair, sorted by algorithm order given, then seed.
std::vector<CompareRow> run_compare(const ExperimentConfig& config,
                                    const std::vector<AlgorithmKind>& algorithms,
                                    const std::vector<std::uint64_t>& seeds);

void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& out);

/// Returns kExitDiverged if any run diverged.
int cmd_compare(const ExperimentConfig& config, const std::vector<AlgorithmKind>& algorithms,
                const std::vector<std::uint64_t>& seeds, const std::filesystem::path& csv_path,
                std::ostream& out);

struct CheckItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CheckReport {
  StepSizeReport stepsizes;
  std::vector<CheckItem> self_tests;
};

CheckReport run_checks(const ExperimentConfig& config);
/// Always returns kExitOk; the report is informational.
int cmd_check(const ExperimentConfig& config, std::ostream& out);

struct ClientStats {
  int id = 0;
  Eigen::Index n_labeled = 0;
  Eigen::Index n_unlabeled = 0;
  Eigen::Index n_test = 0;
  std::vector<int> label_counts;  // over labeled, unlabeled and test rows
  double weight = 0.0;
};

std::vector<ClientStats> partition_stats(const Federation& federation);
int cmd_partition_stats(const ExperimentConfig& config, std::ostream& out);

}  // namespace fedcpsl::cli
