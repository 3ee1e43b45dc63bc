#include "fedcpsl/trainer.hpp"

#include <chrono>
#include <stdexcept>

#include "fedcpsl/metrics.hpp"

namespace fedcpsl {
namespace {

std::vector<double> expand_beta(const std::vector<double>& beta, std::size_t n) {
  if (beta.size() == 1) return std::vector<double>(n, beta.front());
  return beta;
}

LocalPlan make_plan(const TrainingConfig& config, const ClientData& data,
                    const ClientOptions& options, int round, int id) {
  Rng rng = make_stream(config.seed, StreamKind::local_plan, round, id);
  LocalPlan plan;
  plan.q_steps = plan_local_steps(rng, config.epoch_min, config.epoch_max,
                                  steps_per_epoch(data, options));
  plan.gamma = config.algorithm == AlgorithmKind::fedcpsl ? config.gamma : 0.0;
  plan.eta = config.eta;
  plan.eta_c = config.eta_c;
  plan.eta_v = config.eta_v;
  return plan;
}

}  // namespace

void TrainingConfig::validate(int n_clients) const {
  if (n_clients < 1) throw std::invalid_argument("no clients");
  if (participants < 1 || participants > n_clients) {
    throw std::invalid_argument("participants must lie in [1, N]");
  }
  if (rounds < 0) throw std::invalid_argument("rounds must be nonnegative");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (!(eta > 0.0) || !(eta_c > 0.0) || !(eta_v > 0.0)) {
    throw std::invalid_argument("step sizes must be positive");
  }
  if (eta_g && !(*eta_g > 0.0)) throw std::invalid_argument("eta_g must be positive");
  if (epoch_min < 1 || epoch_max < epoch_min) {
    throw std::invalid_argument("epoch range must satisfy 1 <= min <= max");
  }
  client.hyper.validate();
  if (client.label_mode == PseudoLabelMode::closed_form && !(client.hyper.alpha_r > 0.0) &&
      algorithm != AlgorithmKind::apfl) {
    throw std::invalid_argument("closed-form pseudo labels need alpha_r > 0");
  }
  if (beta.size() != 1 && beta.size() != static_cast<std::size_t>(n_clients)) {
    throw std::invalid_argument("beta needs one value or one per client");
  }
  for (double b : beta) {
    if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  }
  if (!weights.empty()) {
    if (weights.size() != static_cast<std::size_t>(n_clients)) {
      throw std::invalid_argument("weights need one value per client");
    }
    double sum = 0.0;
    for (double w : weights) {
      if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("weights must lie in (0, 1]");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
  }
}

std::vector<double> default_weights(const std::vector<std::shared_ptr<const ClientData>>& clients) {
  double total = 0.0;
  for (const auto& c : clients) total += static_cast<double>(c->n_labeled() + c->n_unlabeled());
  std::vector<double> w;
  w.reserve(clients.size());
  for (const auto& c : clients) {
    w.push_back(static_cast<double>(c->n_labeled() + c->n_unlabeled()) / total);
  }
  return w;
}

ServerState initial_server(const ModelSpec& spec, std::uint64_t seed) {
  Rng rng = make_stream(seed, StreamKind::model_init);
  ServerState server;
  server.theta = init_params(spec, rng);
  server.control = ParamVector::Zero(spec.param_count());
  return server;
}

std::vector<ClientState> initial_clients(const ModelSpec& spec, const ParamVector& theta0,
                                         const std::vector<std::shared_ptr<const ClientData>>& data,
                                         const std::vector<double>& weights,
                                         const std::vector<double>& beta) {
  const auto betas = expand_beta(beta, data.size());
  std::vector<ClientState> states;
  states.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    ClientState s;
    s.theta_lc = theta0;
    s.control = ParamVector::Zero(spec.param_count());
    s.nu = Matrix::Constant(data[i]->n_unlabeled(), spec.num_classes(),
                            1.0 / spec.num_classes());
    s.omega = weights[i];
    s.beta = betas[i];
    s.data = data[i];
    states.push_back(std::move(s));
  }
  return states;
}

TrainingResult run_training(const TrainingConfig& config, const ModelSpec& spec,
                            const std::vector<std::shared_ptr<const ClientData>>& clients,
                            const TrainingHooks& hooks) {
  const int n = static_cast<int>(clients.size());
  config.validate(n);
  const std::vector<double> weights =
      config.weights.empty() ? default_weights(clients) : config.weights;
  const ClientOptions options =
      config.algorithm == AlgorithmKind::apfl ? apfl_options(config.client) : config.client;
  const bool personalized = is_personalized(config.algorithm);

  TrainingResult result;
  result.server = initial_server(spec, config.seed);
  result.clients = initial_clients(spec, result.server.theta, clients, weights, config.beta);
  ServerState& server = result.server;

  for (int r = 0; r < config.rounds; ++r) {
    const auto started = std::chrono::steady_clock::now();
    Rng participant_rng = make_stream(config.seed, StreamKind::participants, r);
    std::vector<int> order = sample_participants(n, config.participants, participant_rng);
    if (hooks.permute_execution) hooks.permute_execution(order);

    std::vector<Matrix> nu_before;
    nu_before.reserve(n);
    for (const auto& c : result.clients) nu_before.push_back(c.nu);

    try {
      auto run_client = [&](int id, auto&& body) {
        const LocalPlan plan = make_plan(config, *clients[id], options, r, id);
        Rng batch_rng = make_stream(config.seed, StreamKind::batches, r, id);
        body(plan, batch_rng, ClientState(result.clients[id]));
      };

      switch (config.algorithm) {
        case AlgorithmKind::fedcpsl: {
          ReportMap reports;
          for (int id : order) {
            run_client(id, [&](const LocalPlan& plan, Rng& rng, ClientState state) {
              auto out = client_round(std::move(state), spec, server.theta, server.control, plan,
                                      options, rng, r);
              result.clients[id] = std::move(out.state);
              reports.emplace(id, std::move(out.report));
            });
          }
          const double eta_g = config.eta_g ? *config.eta_g : mean_effective_steps(reports);
          ParamVector theta = aggregate(server, reports, weights, eta_g);
          server.control = update_server_control(server, reports, weights, config.eta);
          server.theta = std::move(theta);
          break;
        }
        case AlgorithmKind::fedshvrp: {
          std::map<int, ScaffoldClientResult> results;
          for (int id : order) {
            run_client(id, [&](const LocalPlan& plan, Rng& rng, ClientState state) {
              auto out = fedshvrp_round(std::move(state), spec, server.theta, server.control,
                                        plan, options, rng, r);
              result.clients[id] = out.state;
              results.emplace(id, std::move(out));
            });
          }
          auto update = scaffold_server_update(server, results, weights, config.scaffold_global_lr);
          server.theta = std::move(update.theta);
          server.control = std::move(update.control);
          break;
        }
        case AlgorithmKind::fedavg_ss:
        case AlgorithmKind::apfl:
        case AlgorithmKind::apsfl: {
          std::map<int, ParamVector> locals;
          for (int id : order) {
            run_client(id, [&](const LocalPlan& plan, Rng& rng, ClientState state) {
              BaselineClientResult out =
                  config.algorithm == AlgorithmKind::fedavg_ss
                      ? fedavg_ss_round(std::move(state), spec, server.theta, plan, options, rng, r)
                      : apsfl_round(std::move(state), spec, server.theta, plan, options, rng, r);
              result.clients[id] = std::move(out.state);
              locals.emplace(id, std::move(out.theta_local));
            });
          }
          server.theta = average_parameters(locals, weights);
          break;
        }
      }
      check_divergence(server.theta, options.divergence_bound, r, -1, "global model");
    } catch (const DivergenceError& e) {
      result.diverged = true;
      result.failure = e.what();
      break;
    }
    server.round = r + 1;

    TraceRecord rec;
    rec.round = r + 1;
    const GlobalGap gap =
        optimality_gap_global(spec, server.theta, result.clients, nu_before, options);
    rec.gap_global_gradnorm2 = gap.gradnorm2;
    rec.gap_nu_term = gap.nu_term;
    rec.train_loss = gap.loss;
    rec.gap_personalized =
        personalized ? optimality_gap_personalized(spec, result.clients, server.theta, options)
                     : 0.0;
    const AccuracyReport acc = evaluate_accuracy(spec, server.theta, result.clients, personalized);
    rec.test_acc_global = acc.global;
    rec.test_acc_personalized = acc.personalized;
    rec.pseudo_label_acc = acc.pseudo_label;
    if (config.record_wall_time) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              started)
                        .count();
    }
    result.trace.push_back(rec);
    if (hooks.after_round) hooks.after_round(server, result.clients);
  }
  return result;
}

}  // namespace fedcpsl
