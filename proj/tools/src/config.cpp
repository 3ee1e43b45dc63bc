#include "fedcpsl_cli/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace fedcpsl::cli {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || v.empty()) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
  return out;
}

int to_int32(const std::string& key, const std::string& v) {
  const long long out = to_int(key, v);
  if (out < std::numeric_limits<int>::min() || out > std::numeric_limits<int>::max()) {
    throw ConfigError(key, "integer out of range");
  }
  return static_cast<int>(out);
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || v.empty()) {
    throw ConfigError(key, "expected a real number, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "expected a boolean, got '" + v + "'");
}

std::string real_text(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <typename T, typename Fn>
std::string join(const std::vector<T>& items, Fn&& fmt) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) out += (k ? "," : "") + fmt(items[k]);
  return out;
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename Member>
Field int_field(std::string key, Member member) {
  return {key,
          [key, member](ExperimentConfig& c, const std::string& v) {
            c.*member = to_int32(key, v);
          },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

template <typename Member>
Field real_field(std::string key, Member member) {
  return {key,
          [key, member](ExperimentConfig& c, const std::string& v) { c.*member = to_real(key, v); },
          [member](const ExperimentConfig& c) { return real_text(c.*member); }};
}

template <typename Member>
Field optional_real_field(std::string key, Member member, std::string none_word) {
  return {key,
          [key, member, none_word](ExperimentConfig& c, const std::string& v) {
            if (v == none_word) {
              c.*member = std::nullopt;
            } else {
              c.*member = to_real(key, v);
            }
          },
          [member, none_word](const ExperimentConfig& c) {
            return (c.*member) ? real_text(*(c.*member)) : none_word;
          }};
}

template <typename Member>
Field bool_field(std::string key, Member member) {
  return {key,
          [key, member](ExperimentConfig& c, const std::string& v) { c.*member = to_bool(key, v); },
          [member](const ExperimentConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"algorithm",
                 [](ExperimentConfig& c, const std::string& v) {
                   try {
                     c.algorithm = parse_algorithm(v);
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError("algorithm", e.what());
                   }
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.algorithm)); }});
    f.push_back({"dataset",
                 [](ExperimentConfig& c, const std::string& v) {
                   if (v == "blobs") {
                     c.dataset = DatasetKind::blobs;
                   } else if (v == "mnist_subset") {
                     c.dataset = DatasetKind::mnist_subset;
                   } else {
                     throw ConfigError("dataset", "expected blobs or mnist_subset, got '" + v + "'");
                   }
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(c.dataset == DatasetKind::blobs ? "blobs" : "mnist_subset");
                 }});
    f.push_back({"data_dir", [](ExperimentConfig& c, const std::string& v) { c.data_dir = v; },
                 [](const ExperimentConfig& c) { return c.data_dir; }});
    f.push_back({"mnist_prefix",
                 [](ExperimentConfig& c, const std::string& v) { c.mnist_prefix = v; },
                 [](const ExperimentConfig& c) { return c.mnist_prefix; }});
    f.push_back(int_field("mnist_samples", &ExperimentConfig::mnist_samples));
    f.push_back(int_field("blob_classes", &ExperimentConfig::blob_classes));
    f.push_back(int_field("blob_dim", &ExperimentConfig::blob_dim));
    f.push_back(int_field("blob_per_class", &ExperimentConfig::blob_per_class));
    f.push_back(real_field("blob_spread", &ExperimentConfig::blob_spread));
    f.push_back(int_field("clients", &ExperimentConfig::clients));
    f.push_back(int_field("participants", &ExperimentConfig::participants));
    f.push_back(int_field("rounds", &ExperimentConfig::rounds));
    f.push_back(int_field("shards_per_client", &ExperimentConfig::shards_per_client));
    f.push_back(real_field("epsilon", &ExperimentConfig::epsilon));
    f.push_back(real_field("test_frac", &ExperimentConfig::test_frac));
    f.push_back({"hidden",
                 [](ExperimentConfig& c, const std::string& v) {
                   c.hidden.clear();
                   if (v.empty() || v == "none") return;
                   for (const auto& item : split_list(v)) c.hidden.push_back(to_int32("hidden", item));
                 },
                 [](const ExperimentConfig& c) {
                   return c.hidden.empty() ? std::string("none")
                                           : join(c.hidden, [](int h) { return std::to_string(h); });
                 }});
    f.push_back({"activation",
                 [](ExperimentConfig& c, const std::string& v) {
                   try {
                     c.activation = parse_activation(v);
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError("activation", e.what());
                   }
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.activation)); }});
    f.push_back({"beta",
                 [](ExperimentConfig& c, const std::string& v) {
                   c.beta.clear();
                   for (const auto& item : split_list(v)) c.beta.push_back(to_real("beta", item));
                 },
                 [](const ExperimentConfig& c) { return join(c.beta, real_text); }});
    f.push_back(real_field("gamma", &ExperimentConfig::gamma));
    f.push_back(real_field("eta", &ExperimentConfig::eta));
    f.push_back(optional_real_field("eta_c", &ExperimentConfig::eta_c, "auto"));
    f.push_back(optional_real_field("eta_g", &ExperimentConfig::eta_g, "auto"));
    f.push_back(real_field("eta_v", &ExperimentConfig::eta_v));
    f.push_back(real_field("alpha_p", &ExperimentConfig::alpha_p));
    f.push_back(real_field("alpha_r", &ExperimentConfig::alpha_r));
    f.push_back({"pseudo_label",
                 [](ExperimentConfig& c, const std::string& v) {
                   if (v == "closed_form") {
                     c.pseudo_label = PseudoLabelMode::closed_form;
                   } else if (v == "gd") {
                     c.pseudo_label = PseudoLabelMode::gradient_step;
                   } else {
                     throw ConfigError("pseudo_label", "expected closed_form or gd, got '" + v + "'");
                   }
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(c.pseudo_label == PseudoLabelMode::closed_form ? "closed_form"
                                                                                     : "gd");
                 }});
    f.push_back(int_field("s_l", &ExperimentConfig::s_l));
    f.push_back(int_field("s_u", &ExperimentConfig::s_u));
    f.push_back({"epoch_range",
                 [](ExperimentConfig& c, const std::string& v) {
                   const auto items = split_list(v);
                   if (items.size() == 1) {
                     c.epoch_min = c.epoch_max = to_int32("epoch_range", items[0]);
                   } else if (items.size() == 2) {
                     c.epoch_min = to_int32("epoch_range", items[0]);
                     c.epoch_max = to_int32("epoch_range", items[1]);
                   } else {
                     throw ConfigError("epoch_range", "expected 'E' or 'min,max'");
                   }
                 },
                 [](const ExperimentConfig& c) {
                   return std::to_string(c.epoch_min) + "," + std::to_string(c.epoch_max);
                 }});
    f.push_back(bool_field("full_batch", &ExperimentConfig::full_batch));
    f.push_back({"seed",
                 [](ExperimentConfig& c, const std::string& v) {
                   std::uint64_t s = 0;
                   const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
                   if (ec != std::errc() || end != v.data() + v.size() || v.empty()) {
                     throw ConfigError("seed", "expected an unsigned 64-bit integer, got '" + v + "'");
                   }
                   c.seed = s;
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }});
    f.push_back(optional_real_field("L_estimate", &ExperimentConfig::L_estimate, "none"));
    f.push_back({"trace_format",
                 [](ExperimentConfig& c, const std::string& v) {
                   try {
                     c.trace_format = parse_trace_format(v);
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError("trace_format", e.what());
                   }
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(c.trace_format == TraceFormat::csv ? "csv" : "jsonl");
                 }});
    f.push_back(real_field("accuracy_threshold", &ExperimentConfig::accuracy_threshold));
    f.push_back(bool_field("record_wall_time", &ExperimentConfig::record_wall_time));
    return f;
  }();
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError(key, "unknown configuration key");
}

void require(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(clients >= 1, "clients", "must be positive");
  require(participants >= 1, "participants", "must be positive");
  require(participants <= clients, "participants", "must not exceed clients");
  require(rounds >= 0, "rounds", "must be nonnegative");
  require(shards_per_client >= 1, "shards_per_client", "must be positive");
  require(epsilon >= 0.0 && epsilon < 1.0, "epsilon", "must lie in [0, 1)");
  require(test_frac >= 0.0 && test_frac < 1.0, "test_frac", "must lie in [0, 1)");
  require(mnist_samples >= 0, "mnist_samples", "must be nonnegative");
  require(blob_classes >= 2, "blob_classes", "must be at least 2");
  require(blob_dim >= 1, "blob_dim", "must be positive");
  require(blob_per_class >= 1, "blob_per_class", "must be positive");
  require(blob_spread >= 0.0, "blob_spread", "must be nonnegative");
  for (int h : hidden) require(h >= 1, "hidden", "widths must be positive");
  require(!beta.empty(), "beta", "needs at least one value");
  require(beta.size() == 1 || beta.size() == static_cast<std::size_t>(clients), "beta",
          "needs one value or one per client");
  for (double b : beta) require(b >= 0.0 && b <= 1.0, "beta", "must lie in [0, 1]");
  require(gamma >= 0.0 && gamma < 1.0, "gamma", "must lie in [0, 1)");
  require(eta > 0.0, "eta", "must be positive");
  require(!eta_c || *eta_c > 0.0, "eta_c", "must be positive");
  require(!eta_g || *eta_g > 0.0, "eta_g", "must be positive");
  require(eta_v > 0.0, "eta_v", "must be positive");
  require(alpha_p >= 0.0, "alpha_p", "must be nonnegative");
  require(alpha_r >= 0.0, "alpha_r", "must be nonnegative");
  require(pseudo_label != PseudoLabelMode::closed_form || alpha_r > 0.0 ||
              algorithm == AlgorithmKind::apfl,
          "alpha_r", "closed-form pseudo labels need alpha_r > 0 (or set pseudo_label = gd)");
  require(s_l >= 0 && s_u >= 0 && s_l + s_u > 0, "s_l", "batch sizes must be >= 0, not both 0");
  require(epoch_min >= 1 && epoch_max >= epoch_min, "epoch_range", "needs 1 <= min <= max");
  require(!L_estimate || *L_estimate > 0.0, "L_estimate", "must be positive");
  require(accuracy_threshold >= 0.0 && accuracy_threshold <= 1.0, "accuracy_threshold",
          "must lie in [0, 1]");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
  find_field(key).set(config, trim(value));
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return config;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ExperimentConfig parse_config(const std::optional<std::filesystem::path>& file,
                              const std::map<std::string, std::string>& overrides) {
  ExperimentConfig config = file ? parse_config_file(*file) : ExperimentConfig{};
  for (const auto& [key, value] : overrides) set_config_value(config, key, value);
  config.validate();
  return config;
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

std::filesystem::path resolve_data_dir(const ExperimentConfig& config) {
  if (!config.data_dir.empty()) return config.data_dir;
  if (const char* env = std::getenv(kDataDirEnv); env && *env) return env;
  return "data";
}

}  // namespace fedcpsl::cli
