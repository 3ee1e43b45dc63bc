#include "fedcpsl/trace.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fedcpsl {
namespace {

template <typename Fn>
void for_each_real(TraceRecord& r, Fn&& fn) {
  fn(kTraceFields[1], r.gap_global_gradnorm2);
  fn(kTraceFields[2], r.gap_nu_term);
  fn(kTraceFields[3], r.gap_personalized);
  fn(kTraceFields[4], r.train_loss);
  fn(kTraceFields[5], r.test_acc_global);
  fn(kTraceFields[6], r.test_acc_personalized);
  fn(kTraceFields[7], r.pseudo_label_acc);
  fn(kTraceFields[8], r.wall_ms);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_real(const std::string& cell, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size()) {
    throw TraceIoError(path.string() + ": not a number '" + cell + "'");
  }
  return v;
}

int parse_round(const std::string& cell, const std::filesystem::path& path) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw TraceIoError(path.string() + ": bad round '" + cell + "'");
  }
  return v;
}

}  // namespace

TraceFormat parse_trace_format(std::string_view name) {
  if (name == "csv") return TraceFormat::csv;
  if (name == "jsonl") return TraceFormat::jsonl;
  throw std::invalid_argument("unknown trace format '" + std::string(name) + "'");
}

void write_trace(const std::vector<TraceRecord>& records, const std::filesystem::path& path,
                 TraceFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceIoError("cannot open " + path.string() + " for writing");

  if (format == TraceFormat::csv) {
    for (std::size_t k = 0; k < kTraceFields.size(); ++k) {
      out << (k ? "," : "") << kTraceFields[k];
    }
    out << '\n';
    out << std::setprecision(17);
    for (TraceRecord r : records) {
      out << r.round;
      for_each_real(r, [&](std::string_view, double v) { out << ',' << v; });
      out << '\n';
    }
  } else {
    for (TraceRecord r : records) {
      nlohmann::ordered_json row;
      row[std::string(kTraceFields[0])] = r.round;
      for_each_real(r, [&](std::string_view name, double v) { row[std::string(name)] = v; });
      out << row.dump() << '\n';
    }
  }
  if (!out) throw TraceIoError("failed writing " + path.string());
}

std::vector<TraceRecord> read_trace(const std::filesystem::path& path, TraceFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceIoError("cannot open " + path.string());
  std::vector<TraceRecord> records;
  std::string line;

  if (format == TraceFormat::csv) {
    if (!std::getline(in, line)) throw TraceIoError(path.string() + ": missing header");
    const auto header = split_csv(line);
    if (header.size() != kTraceFields.size() ||
        !std::equal(header.begin(), header.end(), kTraceFields.begin())) {
      throw TraceIoError(path.string() + ": unexpected header");
    }
    while (std::getline(in, line)) {
      const auto cells = split_csv(line);
      if (cells.size() != kTraceFields.size()) {
        throw TraceIoError(path.string() + ": malformed row '" + line + "'");
      }
      TraceRecord r;
      r.round = parse_round(cells[0], path);
      std::size_t k = 1;
      for_each_real(r, [&](std::string_view, double& v) { v = parse_real(cells[k++], path); });
      records.push_back(r);
    }
  } else {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      TraceRecord r;
      try {
        const auto row = nlohmann::json::parse(line);
        r.round = row.at(std::string(kTraceFields[0])).get<int>();
        for_each_real(r, [&](std::string_view name, double& v) {
          v = row.at(std::string(name)).get<double>();
        });
      } catch (const nlohmann::json::exception& e) {
        throw TraceIoError(path.string() + ": " + e.what());
      }
      records.push_back(r);
    }
  }
  return records;
}

}  // namespace fedcpsl
