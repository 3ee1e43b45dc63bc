#include <gtest/gtest.h>

#include <cmath>

#include "fedcpsl/objective.hpp"
#include "oracles.hpp"

using namespace fedcpsl;

namespace {

/// A small random semi-supervised instance; nu rows are strictly interior.
struct Instance {
  ModelSpec spec = ModelSpec::make({3, 4, 3});
  ParamVector theta;
  ParamVector theta_lc;
  Matrix nu;
  Batch batch;
};

Instance make_instance(std::uint64_t seed, int n_lab, int n_unl) {
  Instance inst;
  Rng rng(seed);
  inst.theta = init_params(inst.spec, rng);
  inst.theta_lc = init_params(inst.spec, rng);
  std::normal_distribution<double> n(0.0, 1.0);
  inst.batch.inputs.resize(n_lab + n_unl, 3);
  for (Eigen::Index k = 0; k < inst.batch.inputs.size(); ++k) inst.batch.inputs.data()[k] = n(rng);
  inst.batch.labels = Matrix::Zero(n_lab, 3);
  std::uniform_int_distribution<int> cls(0, 2);
  for (int k = 0; k < n_lab; ++k) inst.batch.labels(k, cls(rng)) = 1.0;
  inst.nu.resize(n_unl, 3);
  for (int k = 0; k < n_unl; ++k) {
    inst.nu.row(k) = oracle::random_simplex_row(rng, 3, 0.05);
    inst.batch.nu_index.push_back(k);
  }
  return inst;
}

Batch single_unlabeled_batch() {
  Batch b;
  b.inputs = Matrix::Zero(1, 2);
  b.labels = Matrix::Zero(0, 2);
  b.nu_index = {0};
  return b;
}

}  // namespace

TEST(LossF, UniformModelLabeledOnlyIsLogC) {
  auto inst = make_instance(1, 5, 0);
  const SemiSupHyper hyper{1.0, 0.5};
  EXPECT_NEAR(loss_f(inst.spec, ParamVector::Zero(inst.spec.param_count()), inst.nu, inst.batch,
                     hyper),
              std::log(3.0), 1e-14);
}

TEST(LossF, UniformModelAndUniformNu) {
  auto inst = make_instance(2, 0, 4);
  inst.nu.setConstant(1.0 / 3.0);
  const SemiSupHyper hyper{0.7, 0.3};
  EXPECT_NEAR(loss_f(inst.spec, ParamVector::Zero(inst.spec.param_count()), inst.nu, inst.batch,
                     hyper),
              0.7 * std::log(3.0), 1e-14);
}

TEST(LossF, PerfectPredictionIsNearZero) {
  const auto spec = ModelSpec::make({2, 2});
  ParamVector params(6);
  params << 60, 0, 0, 60, 0, 0;
  Batch b;
  b.inputs.resize(2, 2);
  b.inputs << 1, 0, 0, 1;
  b.labels = Matrix::Identity(2, 2);
  const SemiSupHyper hyper{0.0, 0.0};
  EXPECT_LE(loss_f(spec, params, Matrix(), b, hyper), 1e-10);
  EXPECT_LT(grad_f_theta(spec, params, Matrix(), b, hyper).norm(), 1e-10);
}

TEST(LossF, HandFormulaTwoClasses) {
  const auto spec = ModelSpec::make({2, 2});
  ParamVector params = ParamVector::Zero(6);
  params(4) = std::log(0.7);
  params(5) = std::log(0.3);
  Matrix nu(1, 2);
  nu << 0.6, 0.4;
  // -0.6 ln 0.7 - 0.4 ln 0.3 + sum nu ln(2 nu) + sum h ln(2 h)
  EXPECT_NEAR(loss_f(spec, params, nu, single_unlabeled_batch(), SemiSupHyper{1.0, 1.0}),
              0.7980124801493547, 1e-14);
}

TEST(LossF, EmptyBatchAndBadIndexThrow) {
  auto inst = make_instance(3, 2, 2);
  Batch empty;
  empty.inputs = Matrix::Zero(0, 3);
  empty.labels = Matrix::Zero(0, 3);
  EXPECT_THROW(loss_f(inst.spec, inst.theta, inst.nu, empty, {}), std::invalid_argument);
  inst.batch.nu_index[1] = 7;
  EXPECT_THROW(loss_f(inst.spec, inst.theta, inst.nu, inst.batch, {}), std::out_of_range);
}

TEST(GradFTheta, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = make_instance(seed, 3, 4);
    const SemiSupHyper hyper{0.8, 0.4};
    const auto fn = [&](const Eigen::VectorXd& t) {
      return loss_f(inst.spec, t, inst.nu, inst.batch, hyper);
    };
    EXPECT_LT(oracle::rel_l2(grad_f_theta(inst.spec, inst.theta, inst.nu, inst.batch, hyper),
                             oracle::central_diff(fn, inst.theta, 1e-6)),
              1e-5);
  }
}

TEST(GradFTheta, SwitchedOffTermsIsSupervisedGradient) {
  const auto inst = make_instance(4, 4, 3);
  Batch labeled;
  labeled.inputs = inst.batch.inputs.topRows(4);
  labeled.labels = inst.batch.labels;
  const ParamVector full = grad_f_theta(inst.spec, inst.theta, inst.nu, inst.batch, {0.0, 0.0});
  const ParamVector sup = grad_f_theta(inst.spec, inst.theta, inst.nu, labeled, {0.0, 0.0});
  EXPECT_LT((full - sup).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(GradFNu, UniformCaseIsConstantAcrossClasses) {
  const int m = 4;
  const Matrix h = Matrix::Constant(m, 3, 1.0 / 3.0);
  const SemiSupHyper hyper{0.9, 0.6};
  const Matrix g = grad_f_nu(h, h, hyper);
  const double expected = (-0.9 * std::log(1.0 / 3.0) + 0.6) / m;
  EXPECT_TRUE(g.isApproxToConstant(expected, 1e-14));
  EXPECT_TRUE(gd_pseudo_label_step(h, g, 0.5).isApprox(h, 1e-14));
}

TEST(GradFNu, MatchesFiniteDifferencesInNu) {
  const auto inst = make_instance(5, 2, 6);
  const SemiSupHyper hyper{1.3, 0.7};
  const Matrix probs =
      forward(inst.spec, inst.theta, inst.batch.inputs.bottomRows(inst.batch.n_unlabeled()));
  const Matrix g = grad_f_nu(probs, inst.nu, hyper);
  const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(inst.nu.data(), inst.nu.size());
  const auto fn = [&](const Eigen::VectorXd& v) {
    const Matrix nu = Eigen::Map<const Matrix>(v.data(), inst.nu.rows(), inst.nu.cols());
    return loss_f(inst.spec, inst.theta, nu, inst.batch, hyper);
  };
  const Eigen::VectorXd fd = oracle::central_diff(fn, flat, 1e-6);
  EXPECT_LT((Eigen::Map<const Eigen::VectorXd>(g.data(), g.size()) - fd).lpNorm<Eigen::Infinity>(),
            1e-6);
}

TEST(GradFNu, WithoutRegularizerIsProportionalToNegLogH) {
  Matrix h(1, 3);
  h << 0.2, 0.3, 0.5;
  const Matrix g = grad_f_nu(h, h, {2.0, 0.0});
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(g(0, c), -2.0 * std::log(h(0, c)), 1e-14);
}

TEST(LossFPersonalized, BetaZeroHasZeroGradient) {
  const auto inst = make_instance(6, 3, 3);
  EXPECT_TRUE(
      grad_F_thetalc(inst.spec, inst.theta_lc, inst.theta, inst.nu, inst.batch, {}, 0.0).isZero(0.0));
}

TEST(LossFPersonalized, BetaOneCollapsesToLocalModel) {
  const auto inst = make_instance(7, 3, 3);
  const SemiSupHyper hyper{1.0, 0.5};
  EXPECT_NEAR(loss_F(inst.spec, inst.theta_lc, inst.theta, inst.nu, inst.batch, hyper, 1.0),
              loss_f(inst.spec, inst.theta_lc, inst.nu, inst.batch, hyper), 1e-14);
  EXPECT_LT((grad_F_thetalc(inst.spec, inst.theta_lc, inst.theta, inst.nu, inst.batch, hyper, 1.0) -
             grad_f_theta(inst.spec, inst.theta_lc, inst.nu, inst.batch, hyper))
                .lpNorm<Eigen::Infinity>(),
            1e-14);
}

TEST(LossFPersonalized, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = make_instance(100 + seed, 3, 4);
    const SemiSupHyper hyper{1.0, 0.5};
    const auto fn = [&](const Eigen::VectorXd& t) {
      return loss_F(inst.spec, t, inst.theta, inst.nu, inst.batch, hyper, 0.75);
    };
    EXPECT_LT(oracle::rel_l2(grad_F_thetalc(inst.spec, inst.theta_lc, inst.theta, inst.nu,
                                            inst.batch, hyper, 0.75),
                             oracle::central_diff(fn, inst.theta_lc, 1e-6)),
              1e-5);
  }
}

TEST(LossFPersonalized, RejectsBetaOutsideUnitInterval) {
  const auto inst = make_instance(8, 2, 2);
  EXPECT_THROW(loss_F(inst.spec, inst.theta_lc, inst.theta, inst.nu, inst.batch, {}, 1.5),
               std::invalid_argument);
  EXPECT_THROW(grad_F_thetalc(inst.spec, inst.theta_lc, inst.theta, inst.nu, inst.batch, {}, -0.1),
               std::invalid_argument);
}

TEST(PredictPersonalized, EndpointsMatchComponentModels) {
  const auto inst = make_instance(9, 10, 0);
  const Matrix& x = inst.batch.inputs;
  EXPECT_EQ(predict_personalized(inst.spec, inst.theta_lc, inst.theta, 0.0, x),
            predict(inst.spec, inst.theta, x));
  EXPECT_EQ(predict_personalized(inst.spec, inst.theta_lc, inst.theta, 1.0, x),
            predict(inst.spec, inst.theta_lc, x));
}
