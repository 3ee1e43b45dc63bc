#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "fedcpsl/trace.hpp"

using namespace fedcpsl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "fedcpsl_trace_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<TraceRecord> sample_records() {
  std::vector<TraceRecord> out;
  for (int r = 1; r <= 5; ++r) {
    TraceRecord t;
    t.round = r;
    t.gap_global_gradnorm2 = 1.0 / (3.0 * r);
    t.gap_nu_term = std::numeric_limits<double>::denorm_min() * r;
    t.gap_personalized = 0.1 + 0.2 * r;
    t.train_loss = std::exp(-r / 7.0);
    t.test_acc_global = r / 9.0;
    t.test_acc_personalized = 1.0 - 1.0 / (r + 2.0);
    t.pseudo_label_acc = 0.3333333333333333;
    t.wall_ms = 12.5 * r;
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST(Trace, EmptyCsvIsHeaderOnly) {
  const auto p = scratch("empty.csv");
  write_trace({}, p, TraceFormat::csv);
  EXPECT_EQ(slurp(p),
            "round,gap_global_gradnorm2,gap_nu_term,gap_personalized,train_loss,test_acc_global,"
            "test_acc_personalized,pseudo_label_acc,wall_ms\n");
  EXPECT_TRUE(read_trace(p, TraceFormat::csv).empty());
}

TEST(Trace, OneRecordIsTwoLines) {
  const auto p = scratch("one.csv");
  write_trace({sample_records().front()}, p, TraceFormat::csv);
  const std::string text = slurp(p);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Trace, HeaderMatchesFieldOrder) {
  std::string joined;
  for (std::size_t k = 0; k < kTraceFields.size(); ++k) {
    joined += (k ? "," : "") + std::string(kTraceFields[k]);
  }
  const auto p = scratch("header.csv");
  write_trace({}, p, TraceFormat::csv);
  EXPECT_EQ(slurp(p), joined + "\n");
}

TEST(Trace, CsvRoundTripIsExact) {
  const auto p = scratch("rt.csv");
  const auto records = sample_records();
  write_trace(records, p, TraceFormat::csv);
  EXPECT_EQ(read_trace(p, TraceFormat::csv), records);
}

TEST(Trace, JsonlRoundTripIsExact) {
  const auto p = scratch("rt.jsonl");
  const auto records = sample_records();
  write_trace(records, p, TraceFormat::jsonl);
  const std::string text = slurp(p);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  EXPECT_EQ(text.rfind("{\"round\":1,", 0), 0u) << text.substr(0, 40);
  EXPECT_EQ(read_trace(p, TraceFormat::jsonl), records);
}

TEST(Trace, ErrorsAreReported) {
  EXPECT_THROW(write_trace({}, "/nonexistent_dir/x/trace.csv", TraceFormat::csv), TraceIoError);
  EXPECT_THROW(read_trace(scratch("missing.csv"), TraceFormat::csv), TraceIoError);
  const auto p = scratch("bad.csv");
  std::ofstream(p) << "round,wrong\n1,2\n";
  EXPECT_THROW(read_trace(p, TraceFormat::csv), TraceIoError);
  EXPECT_EQ(parse_trace_format("jsonl"), TraceFormat::jsonl);
  EXPECT_THROW(parse_trace_format("xml"), std::invalid_argument);
}
