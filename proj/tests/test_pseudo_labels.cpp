#include <gtest/gtest.h>

#include "fedcpsl/objective.hpp"
#include "fedcpsl/simplex.hpp"
#include "oracles.hpp"

using namespace fedcpsl;

TEST(SolvePseudoLabels, HandExampleMatchesProjectedGradient) {
  Matrix h(1, 2);
  h << 0.7, 0.3;
  const Matrix nu = solve_pseudo_labels(h, {2.0, 1.0});
  EXPECT_NEAR(nu(0, 0), 0.49 / 0.58, 1e-12);
  EXPECT_NEAR(nu(0, 1), 0.09 / 0.58, 1e-12);
  const auto pg = oracle::projected_gradient_pseudo_label(h.row(0), 2.0, 1.0);
  EXPECT_LT((nu.row(0) - pg).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(SolvePseudoLabels, EqualWeightsReturnModelOutputs) {
  std::mt19937_64 rng(3);
  Matrix h(5, 4);
  for (int r = 0; r < 5; ++r) h.row(r) = oracle::random_simplex_row(rng, 4, 0.01);
  EXPECT_LT((solve_pseudo_labels(h, {0.6, 0.6}) - h).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(SolvePseudoLabels, NoCrossEntropyGivesUniform) {
  Matrix h(2, 3);
  h << 0.9, 0.05, 0.05, 0.2, 0.3, 0.5;
  EXPECT_TRUE(solve_pseudo_labels(h, {0.0, 1.0}).isApproxToConstant(1.0 / 3.0, 1e-15));
}

TEST(SolvePseudoLabels, LargeExponentStaysFinite) {
  Matrix h(1, 3);
  h << 1e-12, 0.5, 0.5 - 1e-12;
  const Matrix nu = solve_pseudo_labels(h, {50.0, 0.1});
  EXPECT_TRUE(nu.allFinite());
  EXPECT_TRUE(rows_on_simplex(nu, 1e-12));
}

TEST(SolvePseudoLabels, RequiresRegularizer) {
  EXPECT_THROW(solve_pseudo_labels(Matrix::Constant(1, 2, 0.5), {1.0, 0.0}), std::invalid_argument);
}

TEST(SolvePseudoLabels, RandomRowsMatchOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ratio(0.0, 2.0);
  std::uniform_int_distribution<int> classes(2, 6);
  for (int k = 0; k < 50; ++k) {
    const int C = classes(rng);
    const double alpha_r = 0.5;
    const double alpha_p = ratio(rng) * alpha_r;
    Matrix h(1, C);
    h.row(0) = oracle::random_simplex_row(rng, C, 0.02);
    const Matrix nu = solve_pseudo_labels(h, {alpha_p, alpha_r});
    const auto pg = oracle::projected_gradient_pseudo_label(h.row(0), alpha_p, alpha_r);
    EXPECT_LT((nu.row(0) - pg).lpNorm<Eigen::Infinity>(), 1e-6) << "row " << k;
  }
}

TEST(GdPseudoLabelStep, ZeroGradientIsIdentity) {
  Matrix nu(1, 3);
  nu << 0.2, 0.3, 0.5;
  EXPECT_TRUE(gd_pseudo_label_step(nu, Matrix::Zero(1, 3), 1.0).isApprox(nu, 1e-15));
}

TEST(GdPseudoLabelStep, InteriorStepIsUnprojected) {
  Matrix nu(1, 3);
  nu << 0.3, 0.3, 0.4;
  Matrix g(1, 3);
  g << 0.1, -0.05, -0.05;
  EXPECT_LT((gd_pseudo_label_step(nu, g, 0.5) - (nu - 0.5 * g)).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(GdPseudoLabelStep, BoundaryStepMatchesBruteForceProjection) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    Matrix nu(1, 3);
    nu.row(0) = oracle::random_simplex_row(rng, 3);
    Matrix g(1, 3);
    g << n(rng), n(rng), n(rng);
    const Eigen::RowVectorXd target = nu.row(0) - g.row(0);
    // Brute force: minimize ||p - target||^2 over a fine grid refined locally.
    Eigen::RowVectorXd best(3);
    double best_d = std::numeric_limits<double>::infinity();
    const int grid = 400;
    for (int a = 0; a <= grid; ++a) {
      for (int b = 0; a + b <= grid; ++b) {
        Eigen::RowVectorXd p(3);
        p << double(a) / grid, double(b) / grid, double(grid - a - b) / grid;
        const double d = (p - target).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = p;
        }
      }
    }
    const Matrix step = gd_pseudo_label_step(nu, g, 1.0);
    EXPECT_LT((step.row(0) - best).lpNorm<Eigen::Infinity>(), 2.0 / grid);
    EXPECT_LT((step.row(0) - oracle::bisect_simplex_projection(target)).lpNorm<Eigen::Infinity>(),
              1e-12);
  }
}

TEST(Simplex, ProjectionProperties) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int k = 0; k < 500; ++k) {
    Eigen::RowVectorXd v(5);
    for (int c = 0; c < 5; ++c) v(c) = n(rng);
    const Eigen::RowVectorXd p = project_simplex(v);
    EXPECT_TRUE(rows_on_simplex(p, 1e-12));
    EXPECT_LT((project_simplex(p) - p).lpNorm<Eigen::Infinity>(), 1e-14);
    EXPECT_LT((p - oracle::bisect_simplex_projection(v)).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(Simplex, RowsOnSimplexDetectsViolations) {
  Matrix m(2, 2);
  m << 0.5, 0.5, 0.7, 0.3;
  EXPECT_TRUE(rows_on_simplex(m));
  m(1, 0) = 0.8;
  EXPECT_FALSE(rows_on_simplex(m));
  m << 1.1, -0.1, 0.5, 0.5;
  EXPECT_FALSE(rows_on_simplex(m));
}
