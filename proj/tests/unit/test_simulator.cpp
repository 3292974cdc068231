#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "tdlab/errors.hpp"
#include "tdlab/simulator.hpp"
#include "tdlab/trainer.hpp"

using namespace tdlab;

namespace {

SimShape small_shape() { return {120, 60, 40, 90, 0}; }

// Kernel from the explicit Jacobian of N(x) = W2 sigma(W1 x / sqrt(n0)) / sqrt(n1).
Eigen::MatrixXd jacobian_kernel(const StudentInit& s, const Eigen::MatrixXd& X) {
    const int n0 = int(X.rows()), n1 = int(s.W1.rows()), m = int(X.cols());
    Eigen::MatrixXd H = s.W1 * X / std::sqrt(double(n0));
    Eigen::MatrixXd J(n1 * n0 + n1, m);
    for (int a = 0; a < m; ++a) {
        for (int i = 0; i < n1; ++i) {
            double d = s.W2(i) * s.activation.df(H(i, a)) / std::sqrt(double(n1) * n0);
            for (int k = 0; k < n0; ++k) J(i * n0 + k, a) = d * X(k, a);
            J(n1 * n0 + i, a) = s.activation.f(H(i, a)) / std::sqrt(double(n1));
        }
    }
    return J.transpose() * J;
}

}  // namespace

TEST(Simulator, KernelMatchesJacobianGram) {
    auto shape = small_shape();
    Dataset d = sample_dataset(shape, {}, 0.1, 3);
    StudentInit s = sample_student(shape.n0, shape.n1, center(builtin("tanh")), 1.0, 3);
    KernelSet k = ntk_kernels(s, d.X, d.X_test, 0.0);
    Eigen::MatrixXd ref = jacobian_kernel(s, d.X);
    EXPECT_LT((k.K - ref).norm() / ref.norm(), 1e-12);
    EXPECT_LT((k.K1 + k.K2 - k.K).norm(), 1e-12 * k.K.norm());
    EXPECT_LT((k.N0 - forward(s, d.X)).norm(), 1e-12 * (1 + k.N0.norm()));
}

TEST(Simulator, CrossKernelConsistent) {
    auto shape = small_shape();
    Dataset d = sample_dataset(shape, {}, 0.1, 4);
    StudentInit s = sample_student(shape.n0, shape.n1, center(builtin("erf")), 0.5, 4);
    KernelSet k = ntk_kernels(s, d.X, d.X, 0.25);
    EXPECT_LT((k.Kx + 0.25 * Eigen::MatrixXd::Identity(shape.m, shape.m) - k.K).norm(), 1e-10 * k.K.norm());
}

TEST(Simulator, DatasetDeterministicAndStreamed) {
    auto shape = small_shape();
    Dataset a = sample_dataset(shape, {}, 0.5, 11), b = sample_dataset(shape, {}, 0.5, 11);
    EXPECT_EQ(a.X, b.X);
    EXPECT_EQ(a.Y, b.Y);
    Dataset c = sample_dataset(shape, {}, 0.0, 11);
    // noise has its own stream: inputs and clean targets do not move
    EXPECT_EQ(a.X, c.X);
    EXPECT_EQ(a.Y_test_clean, c.Y_test_clean);
    EXPECT_NE(a.Y, c.Y);
}

TEST(Simulator, KrrInterpolatesAtTinyRidge) {
    auto shape = small_shape();
    Dataset d = sample_dataset(shape, {}, 0.3, 5);
    StudentInit s = sample_student(shape.n0, shape.n1, center(builtin("tanh")), 1.0, 5);
    KernelSet k = ntk_kernels(s, d.X, d.X_test, 1e-10);
    auto pr = krr_predict(k, d.Y, k.N0, k.N0x, false);
    EXPECT_LT((pr.train - d.Y).norm() / d.Y.norm(), 1e-5);
}

TEST(Simulator, HugeRidgeGivesUnitError) {
    SimConfig c;
    c.shape = {200, 400, 200, 100, 0};
    c.gamma = 1e8;
    c.noise = 0.0;
    c.centered = true;
    auto r = mc_test_error(c, 6, 1);
    EXPECT_NEAR(r.mean, 1.0, 0.15);
}

TEST(Simulator, ThreadCountDoesNotChangeResults) {
    SimConfig c;
    c.shape = {100, 50, 30, 60, 0};
    c.noise = 0.5;
    auto a = mc_test_error(c, 4, 1), b = mc_test_error(c, 4, 3);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.mean, b.mean);
}

TEST(Simulator, GaussianEquivalentRequiresK2Only) {
    SimConfig c;
    c.shape = {100, 50, 30, 60, 0};
    c.features = "gaussian_equivalent";
    EXPECT_THROW(run_trial(c, 1), InvalidParams);
    c.sw2 = 0.0;
    EXPECT_NO_THROW(run_trial(c, 1));
    c.features = "bogus";
    EXPECT_THROW(run_trial(c, 1), InvalidParams);
}

TEST(Simulator, SimplifiedKernelCloseAtModerateSize) {
    const int n0 = 200, m = 200;
    SimShape shape{m, 10, n0, 200, 0};
    Dataset d = sample_dataset(shape, {}, 0.0, 9);
    auto act = center(builtin("tanh"));
    StudentInit s = sample_student(n0, 200, act, 1.0, 9);
    double disc = kernel_discrepancy(s, d.X, moments(act), 9);
    KernelSet k = ntk_kernels(s, d.X, d.X, 0.0);
    EXPECT_LT(disc, 0.5 * spectral_norm_sym(k.K, 1));
}

TEST(Simulator, LinearActivationHasNoDiscrepancy) {
    SimShape shape{80, 10, 60, 70, 0};
    Dataset d = sample_dataset(shape, {}, 0.0, 12);
    auto act = center(builtin("linear"));
    StudentInit s = sample_student(60, 70, act, 1.0, 12);
    EXPECT_LT(kernel_discrepancy(s, d.X, moments(act), 12), 1e-10);
}

TEST(Simulator, SpectralNormPowerIteration) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(5, 5);
    A.diagonal() << 1, -4, 2, 0.5, 3;
    EXPECT_NEAR(spectral_norm_sym(A, 1), 4.0, 1e-6);
}

TEST(Simulator, NonlinearTeacher) {
    SimShape shape{50, 20, 10, 10, 30};
    Dataset d = sample_dataset(shape, {"nonlinear", "tanh", 30}, 0.0, 2);
    EXPECT_EQ(d.Y.size(), 50);
    EXPECT_THROW(sample_dataset(shape, {"quadratic", "tanh", 30}, 0.0, 2), InvalidParams);
}

TEST(Trainer, FlowAtInfiniteTimeIsKernelRegression) {
    auto shape = small_shape();
    Dataset d = sample_dataset(shape, {}, 0.3, 6);
    StudentInit s = sample_student(shape.n0, shape.n1, center(builtin("tanh")), 1.0, 6);
    KernelSet k = ntk_kernels(s, d.X, d.X_test, 0.1);
    auto krr = krr_predict(k, d.Y, k.N0, k.N0x, false);
    auto flow = ntk_flow_predict(k, d.Y, 1e9, 1.0, false);
    EXPECT_LT((flow.test - krr.test).norm(), 1e-8 * (1 + krr.test.norm()));
    auto start = ntk_flow_predict(k, d.Y, 0.0, 1.0, false);
    EXPECT_LT((start.test - k.N0x).norm(), 1e-12);
}

TEST(Trainer, GradientDescentLowersLossAndTracksKernel) {
    SimShape shape{60, 60, 20, 400, 0};
    Dataset d = sample_dataset(shape, {}, 0.1, 8);
    StudentInit s = sample_student(shape.n0, shape.n1, center(builtin("tanh")), 1.0, 8);
    TrainConfig tc;
    tc.shape = shape;
    tc.l2 = 0.1;
    tc.max_steps = 3000;
    tc.plateau_tol = 1e-10;
    auto r = train(tc, d, s);
    ASSERT_FALSE(r.trace.empty());
    EXPECT_LT(r.trace.back().train_loss, r.trace.front().train_loss);
    EXPECT_FALSE(r.lr_above_stability);
    EXPECT_GT(r.lr, 0.0);
    KernelSet k = ntk_kernels(s, d.X, d.X_test, 0.1);
    auto krr = krr_predict(k, d.Y, k.N0, k.N0x, false);
    double mse_krr = (d.Y_test_clean - krr.test).squaredNorm() / 60.0;
    EXPECT_LT(std::abs(r.final_test_mse - mse_krr), 0.25 * mse_krr);
}

TEST(Trainer, DivergesAboveStability) {
    SimShape shape{40, 20, 10, 50, 0};
    Dataset d = sample_dataset(shape, {}, 0.1, 8);
    StudentInit s = sample_student(10, 50, center(builtin("tanh")), 1.0, 8);
    TrainConfig tc;
    tc.shape = shape;
    tc.lr = 50.0;
    tc.max_steps = 2000;
    EXPECT_THROW(train(tc, d, s), Diverged);
}
