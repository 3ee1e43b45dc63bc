#include <gtest/gtest.h>

#include "fedcpsl/metrics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fedcpsl;

namespace {

LabeledDataset one_sample(double x, int y) {
  LabeledDataset d;
  d.inputs = Matrix::Constant(1, 1, x);
  d.labels = {y};
  d.num_classes = 2;
  return d;
}

ClientState state_for(std::shared_ptr<const ClientData> data, const Matrix& nu, double omega,
                      double beta = 0.75) {
  ClientState s;
  s.nu = nu;
  s.omega = omega;
  s.beta = beta;
  s.data = std::move(data);
  return s;
}

}  // namespace

TEST(GlobalGap, HandEvaluatedTwoClientInstance) {
  // Linear model, zero parameters: every output is [0.5, 0.5].
  // Client 1 (omega 0.25): labeled (x=1, y=0) and unlabeled x=0 with nu=[0.7, 0.3].
  //   logit grads: labeled h - y = [-0.5, 0.5]; unlabeled h * (g - h.g) with
  //   g = -alpha_p nu / h + alpha_r (log(hC) + 1) = [-0.9, -0.1] gives [-0.2, 0.2].
  //   dW = [-0.5, 0.5], db = [-0.7, 0.7].
  // Client 2 (omega 0.75): labeled (x=2, y=1): dW = [1, -1], db = [0.5, -0.5].
  // Weighted: dW = [0.625, -0.625], db = [0.2, -0.2] -> squared norm 0.86125.
  const auto spec = ModelSpec::make({1, 2});
  const auto c1 = std::make_shared<const ClientData>(one_sample(1.0, 0), Matrix::Zero(1, 1),
                                                     std::vector<int>{0}, one_sample(1.0, 0));
  const auto c2 = std::make_shared<const ClientData>(one_sample(2.0, 1), Matrix::Zero(0, 1),
                                                     std::vector<int>{}, one_sample(2.0, 1));
  Matrix nu1(1, 2);
  nu1 << 0.7, 0.3;
  const std::vector<ClientState> clients{state_for(c1, nu1, 0.25),
                                         state_for(c2, Matrix::Zero(0, 2), 0.75)};
  const std::vector<Matrix> before{Matrix::Constant(1, 2, 0.5), Matrix::Zero(0, 2)};
  const auto gap = optimality_gap_global(spec, ParamVector::Zero(spec.param_count()), clients,
                                         before, ClientOptions{}, 2.0);
  EXPECT_NEAR(gap.gradnorm2, 0.86125, 1e-14);
  EXPECT_NEAR(gap.nu_term, 0.25 * 0.08, 1e-15);
  EXPECT_NEAR(gap.loss, 0.876719335513063, 1e-14);
  ASSERT_TRUE(gap.combined.has_value());
  EXPECT_NEAR(*gap.combined, 0.86125 + 31.0 * 2.0 / 64.0 * 0.02, 1e-14);

  const auto unchanged = optimality_gap_global(spec, ParamVector::Zero(spec.param_count()), clients,
                                               std::vector<Matrix>{nu1, Matrix::Zero(0, 2)},
                                               ClientOptions{});
  EXPECT_EQ(unchanged.nu_term, 0.0);
  EXPECT_FALSE(unchanged.combined.has_value());
}

TEST(GlobalGap, VanishesAtStationaryPointOfConvexToy) {
  // Softmax regression on labeled data is convex; plain gradient descent
  // drives it to the minimizer.
  const auto data = gen_synthetic_blobs(2, 2, 6, 1.5, 3);
  const auto client =
      std::make_shared<const ClientData>(data, Matrix::Zero(0, 2), std::vector<int>{}, data);
  const auto spec = ModelSpec::make({2, 2});
  ParamVector theta = ParamVector::Zero(spec.param_count());
  const SemiSupHyper hyper;
  for (int it = 0; it < 20000; ++it) {
    theta -= 1.0 * grad_f_theta(spec, theta, Matrix(), client->full_labeled_batch(), hyper);
  }
  const std::vector<ClientState> clients{state_for(client, Matrix::Zero(0, 2), 1.0)};
  const std::vector<Matrix> before{Matrix::Zero(0, 2)};
  EXPECT_LT(optimality_gap_global(spec, theta, clients, before, ClientOptions{}).gradnorm2, 1e-12);
}

TEST(GlobalGap, FullBatchFedAvgFixedPoint) {
  const auto fleet = fixture::blob_fleet(4, 4, 2, 2, 20, 1.5, 0.0);
  const auto spec = ModelSpec::make({2, 2});
  TrainingConfig cfg;
  cfg.algorithm = AlgorithmKind::fedavg_ss;
  cfg.participants = 4;
  cfg.rounds = 3000;
  cfg.eta = 1.0;
  cfg.epoch_min = cfg.epoch_max = 1;
  cfg.client.full_batch = true;
  const auto result = run_training(cfg, spec, fleet.clients);
  ASSERT_FALSE(result.diverged);
  EXPECT_LT(result.trace.back().gap_global_gradnorm2, 1e-10);
}

TEST(PersonalizedGap, ZeroMixtureIsZero) {
  const auto fleet = fixture::blob_fleet(5);
  Rng rng(5);
  const ParamVector theta = init_params(fleet.spec, rng);
  auto clients = initial_clients(fleet.spec, theta, fleet.clients,
                                 default_weights(fleet.clients), {0.0});
  for (auto& c : clients) c.theta_lc = init_params(fleet.spec, rng);
  EXPECT_EQ(optimality_gap_personalized(fleet.spec, clients, theta, ClientOptions{}), 0.0);
}

TEST(PersonalizedGap, FullMixtureSingleClientIsLocalGradientNorm) {
  const auto data = fixture::blob_client(6);
  const auto spec = ModelSpec::make({4, 5, 3});
  Rng rng(6);
  const ParamVector theta = init_params(spec, rng);
  ClientState s = fixture::fresh_state(spec, data, init_params(spec, rng));
  s.beta = 1.0;
  s.omega = 1.0;
  const std::vector<ClientState> clients{s};
  const double expected =
      grad_f_theta(spec, s.theta_lc, s.nu, data->full_semi_batch(), {}).squaredNorm();
  EXPECT_NEAR(optimality_gap_personalized(spec, clients, theta, ClientOptions{}), expected,
              1e-12 * expected);
}

TEST(PersonalizedGap, MatchesFiniteDifferencesPerClient) {
  const auto fleet = fixture::blob_fleet(7, 3);
  Rng rng(7);
  const ParamVector theta = init_params(fleet.spec, rng);
  auto clients = initial_clients(fleet.spec, theta, fleet.clients,
                                 default_weights(fleet.clients), {0.3, 0.6, 0.9});
  double expected = 0.0;
  for (auto& c : clients) {
    c.theta_lc = init_params(fleet.spec, rng);
    for (Eigen::Index r = 0; r < c.nu.rows(); ++r) c.nu.row(r) = oracle::random_simplex_row(rng, 3, 0.05);
    const auto fn = [&](const Eigen::VectorXd& t) {
      return loss_F(fleet.spec, t, theta, c.nu, c.data->full_semi_batch(), {}, c.beta);
    };
    expected += c.omega * oracle::central_diff(fn, c.theta_lc, 1e-6).squaredNorm();
  }
  const double gap = optimality_gap_personalized(fleet.spec, clients, theta, ClientOptions{});
  EXPECT_NEAR(gap, expected, 1e-6 * expected);
}

TEST(Accuracy, Fractions) {
  const std::vector<int> truth{0, 1, 2, 1};
  EXPECT_EQ(accuracy(truth, truth), 1.0);
  EXPECT_EQ(accuracy(std::vector<int>{1, 0, 0, 0}, truth), 0.0);
  EXPECT_EQ(accuracy(std::vector<int>{0, 1, 2, 0}, truth), 0.75);
  EXPECT_THROW(accuracy(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
  EXPECT_THROW(accuracy(std::vector<int>{1}, truth), std::invalid_argument);
}

TEST(Accuracy, ClientUniformAveraging) {
  // Client A: 1 test sample, always right. Client B: 3 test samples, one right.
  const auto spec = ModelSpec::make({1, 2});
  ParamVector theta(4);
  theta << 1, -1, 0, 0;  // predicts class 0 for x > 0, class 1 for x < 0
  LabeledDataset a_test = one_sample(1.0, 0);
  LabeledDataset b_test;
  b_test.inputs.resize(3, 1);
  b_test.inputs << 1.0, 1.0, -1.0;
  b_test.labels = {0, 1, 0};
  b_test.num_classes = 2;
  const auto a = std::make_shared<const ClientData>(one_sample(1.0, 0), Matrix::Zero(0, 1),
                                                    std::vector<int>{}, a_test);
  const auto b = std::make_shared<const ClientData>(one_sample(1.0, 0), Matrix::Zero(0, 1),
                                                    std::vector<int>{}, b_test);
  std::vector<ClientState> clients{state_for(a, Matrix::Zero(0, 2), 0.5, 0.0),
                                   state_for(b, Matrix::Zero(0, 2), 0.5, 0.0)};
  clients[0].theta_lc = theta;
  clients[1].theta_lc = theta;
  const auto report = evaluate_accuracy(spec, theta, clients, true);
  EXPECT_NEAR(report.global, (1.0 + 1.0 / 3.0) / 2.0, 1e-15);
  EXPECT_NEAR(report.personalized, report.global, 1e-15);
  EXPECT_EQ(report.pseudo_label, 0.0);
}

TEST(Accuracy, PseudoLabelQualityUsesQuarantinedTruth) {
  const auto data = fixture::blob_client(9);
  const auto spec = ModelSpec::make({4, 5, 3});
  ClientState s = fixture::fresh_state(spec, data, ParamVector::Zero(spec.param_count()));
  s.omega = 1.0;
  const auto& truth = data->diagnostic_unlabeled_labels();
  s.nu.setZero();
  for (std::size_t k = 0; k < truth.size(); ++k) s.nu(k, (k == 0 ? truth[k] + 1 : truth[k]) % 3) = 1.0;
  const std::vector<ClientState> clients{s};
  const auto report = evaluate_accuracy(spec, ParamVector::Zero(spec.param_count()), clients, false);
  EXPECT_NEAR(report.pseudo_label, 1.0 - 1.0 / truth.size(), 1e-15);
}
