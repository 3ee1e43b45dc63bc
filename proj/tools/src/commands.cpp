#include "fedcpsl_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <fstream>

#include "fedcpsl/data.hpp"
#include "fedcpsl_cli/selftest.hpp"

namespace fedcpsl::cli {
namespace {

LabeledDataset load_dataset(const ExperimentConfig& config) {
  if (config.dataset == DatasetKind::blobs) {
    return gen_synthetic_blobs(config.blob_classes, config.blob_dim, config.blob_per_class,
                               config.blob_spread, config.seed);
  }
  const auto dir = resolve_data_dir(config);
  LabeledDataset data = load_idx(dir / (config.mnist_prefix + "-images-idx3-ubyte"),
                                 dir / (config.mnist_prefix + "-labels-idx1-ubyte"));
  if (config.mnist_samples > 0 && config.mnist_samples < data.size()) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(data.size()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    Rng rng = make_stream(config.seed, StreamKind::split, ~std::uint64_t{0});
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(static_cast<std::size_t>(config.mnist_samples));
    std::sort(rows.begin(), rows.end());
    data = data.subset(rows);
  }
  return data;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

}  // namespace

Federation build_federation(const ExperimentConfig& config) {
  const LabeledDataset data = load_dataset(config);
  PartitionConfig part;
  part.n_clients = config.clients;
  part.shards_per_client = config.shards_per_client;
  part.epsilon = config.epsilon;
  part.test_frac = config.test_frac;
  const auto shards = partition_shards(data, part, config.seed);

  Federation fed;
  std::vector<int> dims{static_cast<int>(data.inputs.cols())};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(data.num_classes);
  fed.spec = ModelSpec::make(dims, config.activation);
  for (std::size_t i = 0; i < shards.size(); ++i) {
    fed.clients.push_back(std::make_shared<const ClientData>(split_semi(
        shards[i], config.epsilon, config.test_frac, derive_seed(config.seed, StreamKind::split, i))));
  }
  return fed;
}

TrainingConfig to_training_config(const ExperimentConfig& config) {
  TrainingConfig t;
  t.algorithm = config.algorithm;
  t.participants = config.participants;
  t.rounds = config.rounds;
  t.gamma = config.gamma;
  t.eta = config.eta;
  t.eta_c = config.effective_eta_c();
  t.eta_v = config.eta_v;
  t.eta_g = config.eta_g;
  t.epoch_min = config.epoch_min;
  t.epoch_max = config.epoch_max;
  t.client.hyper.alpha_p = config.alpha_p;
  t.client.hyper.alpha_r = config.alpha_r;
  t.client.label_mode = config.pseudo_label;
  t.client.s_l = config.s_l;
  t.client.s_u = config.s_u;
  t.client.full_batch = config.full_batch;
  t.beta = config.beta;
  t.seed = config.seed;
  t.L_estimate = config.L_estimate;
  t.record_wall_time = config.record_wall_time;
  return t;
}

int rounds_to_threshold(const std::vector<TraceRecord>& trace, double threshold) {
  for (const auto& rec : trace) {
    if (rec.test_acc_personalized >= threshold) return rec.round;
  }
  return -1;
}

int cmd_run(const ExperimentConfig& config, const std::filesystem::path& trace_path,
            std::ostream& out) {
  const Federation fed = build_federation(config);
  const TrainingResult result = run_training(to_training_config(config), fed.spec, fed.clients);
  write_trace(result.trace, trace_path, config.trace_format);
  if (result.diverged) {
    out << "diverged after " << result.trace.size() << " rounds: " << result.failure << "\n";
    return kExitDiverged;
  }
  out << "algorithm=" << to_string(config.algorithm) << " rounds=" << result.trace.size();
  if (!result.trace.empty()) {
    const TraceRecord& last = result.trace.back();
    out << " gradnorm2=" << fmt(last.gap_global_gradnorm2) << " nu_term=" << fmt(last.gap_nu_term)
        << " gap_personalized=" << fmt(last.gap_personalized)
        << " train_loss=" << fmt(last.train_loss) << " acc_global=" << fmt(last.test_acc_global)
        << " acc_personalized=" << fmt(last.test_acc_personalized)
        << " pseudo_label_acc=" << fmt(last.pseudo_label_acc);
  }
  out << " trace=" << trace_path.string() << "\n";
  return kExitOk;
}

std::vector<CompareRow> run_compare(const ExperimentConfig& config,
                                    const std::vector<AlgorithmKind>& algorithms,
                                    const std::vector<std::uint64_t>& seeds) {
  std::vector<CompareRow> rows;
  for (AlgorithmKind algorithm : algorithms) {
    for (std::uint64_t seed : seeds) {
      ExperimentConfig run = config;
      run.algorithm = algorithm;
      run.seed = seed;
      run.validate();
      const Federation fed = build_federation(run);
      const TrainingResult result = run_training(to_training_config(run), fed.spec, fed.clients);
      CompareRow row;
      row.algorithm = algorithm;
      row.seed = seed;
      row.rounds_completed = static_cast<int>(result.trace.size());
      row.diverged = result.diverged;
      if (!result.trace.empty()) row.final_record = result.trace.back();
      row.rounds_to_threshold = rounds_to_threshold(result.trace, config.accuracy_threshold);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& out) {
  out << "algorithm,seed,rounds_completed,diverged,gap_global_gradnorm2,gap_nu_term,"
         "gap_personalized,train_loss,test_acc_global,test_acc_personalized,pseudo_label_acc,"
         "rounds_to_threshold\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    const TraceRecord& f = r.final_record;
    out << to_string(r.algorithm) << ',' << r.seed << ',' << r.rounds_completed << ','
        << (r.diverged ? 1 : 0) << ',' << f.gap_global_gradnorm2 << ',' << f.gap_nu_term << ','
        << f.gap_personalized << ',' << f.train_loss << ',' << f.test_acc_global << ','
        << f.test_acc_personalized << ',' << f.pseudo_label_acc << ',' << r.rounds_to_threshold
        << '\n';
  }
}

int cmd_compare(const ExperimentConfig& config, const std::vector<AlgorithmKind>& algorithms,
                const std::vector<std::uint64_t>& seeds, const std::filesystem::path& csv_path,
                std::ostream& out) {
  const auto rows = run_compare(config, algorithms, seeds);
  std::ofstream file(csv_path, std::ios::binary);
  if (!file) throw TraceIoError("cannot write " + csv_path.string());
  write_compare_csv(rows, file);
  bool diverged = false;
  for (const auto& r : rows) {
    out << to_string(r.algorithm) << " seed=" << r.seed
        << " acc_personalized=" << fmt(r.final_record.test_acc_personalized)
        << " rounds_to_threshold=" << r.rounds_to_threshold << (r.diverged ? " DIVERGED" : "")
        << "\n";
    diverged = diverged || r.diverged;
  }
  out << "wrote " << csv_path.string() << "\n";
  return diverged ? kExitDiverged : kExitOk;
}

CheckReport run_checks(const ExperimentConfig& config) {
  const Federation fed = build_federation(config);
  const TrainingConfig training = to_training_config(config);

  StepSizeInputs in;
  in.eta = training.eta;
  in.eta_c = training.eta_c;
  in.eta_v = training.eta_v;
  in.eta_g = training.eta_g;
  in.n_clients = config.clients;
  in.participants = config.participants;
  const double gamma = config.algorithm == AlgorithmKind::fedcpsl ? config.gamma : 0.0;
  int spe_min = std::numeric_limits<int>::max();
  int spe_max = 0;
  for (const auto& c : fed.clients) {
    const int spe = steps_per_epoch(*c, training.client);
    spe_min = std::min(spe_min, spe);
    spe_max = std::max(spe_max, spe);
  }
  in.q_eff_min = effective_steps(config.epoch_min * spe_min, gamma);
  in.q_eff_max = effective_steps(config.epoch_max * spe_max, gamma);
  in.weights = default_weights(fed.clients);
  in.betas = config.beta.size() == 1
                 ? std::vector<double>(fed.clients.size(), config.beta.front())
                 : config.beta;
  in.constants.L = config.L_estimate;

  CheckReport report;
  report.stepsizes = validate_stepsizes(in);
  auto add = [&](const std::vector<SelfTestResult>& results) {
    for (const auto& r : results) {
      report.self_tests.push_back(
          {r.name, r.passed(), "error " + fmt(r.error) + " (tolerance " + fmt(r.tolerance) + ")"});
    }
  };
  add(gradient_self_test(config.seed));
  add(identity_self_test(config.seed, gamma));
  return report;
}

int cmd_check(const ExperimentConfig& config, std::ostream& out) {
  const CheckReport report = run_checks(config);
  for (const auto& c : report.stepsizes.checks) {
    out << (c.satisfied ? "PASS " : "FAIL ") << c.name << ": " << fmt(c.value)
        << " <= " << fmt(c.bound) << "\n";
  }
  for (const auto& w : report.stepsizes.warnings) out << "WARN " << w << "\n";
  for (const auto& n : report.stepsizes.notes) out << "NOTE " << n << "\n";
  for (const auto& t : report.self_tests) {
    out << (t.passed ? "PASS " : "FAIL ") << t.name << ": " << t.detail << "\n";
  }
  return kExitOk;
}

std::vector<ClientStats> partition_stats(const Federation& federation) {
  const auto weights = default_weights(federation.clients);
  std::vector<ClientStats> stats;
  for (std::size_t i = 0; i < federation.clients.size(); ++i) {
    const ClientData& c = *federation.clients[i];
    ClientStats s;
    s.id = static_cast<int>(i);
    s.n_labeled = c.n_labeled();
    s.n_unlabeled = c.n_unlabeled();
    s.n_test = c.test().size();
    s.label_counts.assign(static_cast<std::size_t>(c.num_classes()), 0);
    for (int y : c.labeled().labels) ++s.label_counts[y];
    for (int y : c.diagnostic_unlabeled_labels()) ++s.label_counts[y];
    for (int y : c.test().labels) ++s.label_counts[y];
    s.weight = weights[i];
    stats.push_back(std::move(s));
  }
  return stats;
}

int cmd_partition_stats(const ExperimentConfig& config, std::ostream& out) {
  const auto stats = partition_stats(build_federation(config));
  out << "client,n_labeled,n_unlabeled,n_test,weight,label_counts\n";
  for (const auto& s : stats) {
    out << s.id << ',' << s.n_labeled << ',' << s.n_unlabeled << ',' << s.n_test << ','
        << fmt(s.weight) << ',';
    for (std::size_t k = 0; k < s.label_counts.size(); ++k) {
      out << (k ? " " : "") << s.label_counts[k];
    }
    out << '\n';
  }
  return kExitOk;
}

}  // namespace fedcpsl::cli
