#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fedcpsl/data.hpp"
#include "fedcpsl_cli/commands.hpp"

namespace {

using namespace fedcpsl;
using namespace fedcpsl::cli;

struct CommonArgs {
  std::string config_file;
  std::map<std::string, std::string> overrides;
};

void add_config_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "Flat key = value configuration file");
  for (const auto& key : config_keys()) {
    cmd->add_option_function<std::string>(
        "--" + key, [&args, key](const std::string& v) { args.overrides[key] = v; },
        "Override '" + key + "'");
  }
}

ExperimentConfig load(const CommonArgs& args) {
  std::optional<std::filesystem::path> file;
  if (!args.config_file.empty()) file = args.config_file;
  return parse_config(file, args.overrides);
}

template <typename T>
std::vector<T> parse_list(const std::string& text, T (*parse)(const std::string&)) {
  std::vector<T> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(parse(item));
  }
  return out;
}

AlgorithmKind algorithm_of(const std::string& s) {
  try {
    return parse_algorithm(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("algorithms", e.what());
  }
}

std::uint64_t seed_of(const std::string& s) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("seeds", "expected a nonnegative integer, got '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised personalized federated learning simulator"};
  app.require_subcommand(1);
  CommonArgs args;

  auto* run = app.add_subcommand("run", "Train one configuration and write its trace");
  add_config_flags(run, args);
  std::string trace_path;
  run->add_option("--trace", trace_path, "Trace output path (default trace.csv or trace.jsonl)");

  auto* compare = app.add_subcommand("compare", "Run several algorithms over several seeds");
  add_config_flags(compare, args);
  std::string algorithms = "fedcpsl,fedavg_ss,fedshvrp,apfl,apsfl";
  std::string seeds = "1,2,3,4,5";
  std::string compare_out = "compare.csv";
  compare->add_option("--algorithms", algorithms, "Comma-separated algorithm names")
      ->capture_default_str();
  compare->add_option("--seeds", seeds, "Comma-separated seeds")->capture_default_str();
  compare->add_option("--out", compare_out, "Comparison CSV path")->capture_default_str();

  auto* check = app.add_subcommand("check", "Step-size conditions and numeric self-tests");
  add_config_flags(check, args);

  auto* stats = app.add_subcommand("partition-stats", "Per-client split sizes and label counts");
  add_config_flags(stats, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    const ExperimentConfig config = load(args);
    if (run->parsed()) {
      if (trace_path.empty()) {
        trace_path = config.trace_format == TraceFormat::csv ? "trace.csv" : "trace.jsonl";
      }
      return cmd_run(config, trace_path, std::cout);
    }
    if (compare->parsed()) {
      return cmd_compare(config, parse_list(algorithms, algorithm_of), parse_list(seeds, seed_of),
                         compare_out, std::cout);
    }
    if (check->parsed()) return cmd_check(config, std::cout);
    return cmd_partition_stats(config, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}
