#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace fedcpsl {

/// Metrics of one completed round.
struct TraceRecord {
  int round = 0;
  double gap_global_gradnorm2 = 0.0;
  double gap_nu_term = 0.0;
  double gap_personalized = 0.0;
  double train_loss = 0.0;
  double test_acc_global = 0.0;
  double test_acc_personalized = 0.0;
  double pseudo_label_acc = 0.0;
  double wall_ms = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

/// CSV header, in declaration order of TraceRecord.
inline constexpr std::array<std::string_view, 9> kTraceFields = {
    "round",          "gap_global_gradnorm2",  "gap_nu_term",
    "gap_personalized", "train_loss",          "test_acc_global",
    "test_acc_personalized", "pseudo_label_acc", "wall_ms"};

enum class TraceFormat { csv, jsonl };

TraceFormat parse_trace_format(std::string_view name);

class TraceIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes UTF-8 text with LF line endings. Reals use 17 significant digits.
void write_trace(const std::vector<TraceRecord>& records, const std::filesystem::path& path,
                 TraceFormat format);

std::vector<TraceRecord> read_trace(const std::filesystem::path& path, TraceFormat format);

}  // namespace fedcpsl
