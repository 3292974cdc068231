#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdlab/activations.hpp"
#include "tdlab/asymptotics.hpp"

namespace tdlab {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;

struct SimShape {
    int m = 2000;
    int m_test = 1000;
    int n0 = 1000;
    int n1 = 1000;
    int nt = 0;  // teacher width, 0 -> linear teacher

    double p() const { return double(n1) * (n0 + 1.0); }
    void validate() const;
};

struct TeacherSpec {
    std::string kind = "linear";      // linear | nonlinear
    std::string activation = "tanh";  // nonlinear only, centered before use
    int nt = 0;                       // 0 -> 10 n0

    // (eta_T, zeta_T) of the teacher's activation; (1, 1) when linear
    std::pair<double, double> moments() const;
};

struct Dataset {
    MatrixXd X;               // n0 x m
    MatrixXd X_test;          // n0 x m_test
    RowVectorXd Y;            // noisy training labels
    RowVectorXd Y_test_clean;
    RowVectorXd Y_test;       // Y_test_clean + independent label noise
    std::uint64_t seed = 0;
};

struct StudentInit {
    MatrixXd W1;      // n1 x n0, N(0, 1)
    RowVectorXd W2;   // 1 x n1, N(0, sw2)
    Activation activation;
    std::uint64_t seed = 0;
};

struct KernelSet {
    MatrixXd K1, K2, K;      // m x m, K = K1 + K2 + gamma I
    MatrixXd K1x, K2x, Kx;   // m x m_test
    double gamma = 0.0;
    RowVectorXd N0, N0x;     // network at initialization on both blocks
};

struct KrrPrediction {
    RowVectorXd train;
    RowVectorXd test;
};

Dataset sample_dataset(const SimShape& shape, const TeacherSpec& teacher, double noise, std::uint64_t seed);
StudentInit sample_student(int n0, int n1, const Activation& act, double sw2, std::uint64_t seed);

// Hidden units are processed in blocks, so memory stays O(m^2 + n1 n0).
KernelSet ntk_kernels(const StudentInit& s, const MatrixXd& X1, const MatrixXd& X2, double gamma);

// sw2 (eta' - zeta) I + sw2 zeta X^T X / n0 + F^T F / n1 + gamma I
MatrixXd simplified_kernel(const StudentInit& s, const MatrixXd& X, double sw2,
                           const ActivationMoments& mom, double gamma);

// ||K - K_simp - R||_2 with R = sw2 zeta' 11^T / n0, by power iteration.
// sw2 here is the sampled ||W2||^2 / n1, so only the feature-level
// simplification is measured.
double kernel_discrepancy(const StudentInit& s, const MatrixXd& X, const ActivationMoments& mom,
                          std::uint64_t seed = 0);

// Largest |eigenvalue| of a symmetric matrix.
double spectral_norm_sym(const MatrixXd& A, std::uint64_t seed, int max_steps = 200, double tol = 1e-8);

KrrPrediction krr_predict(const KernelSet& k, const RowVectorXd& Y, const RowVectorXd& N0_train,
                          const RowVectorXd& N0_test, bool centered);

// sqrt(zeta / n0) W1 X + sqrt(eta - zeta) Theta_F
MatrixXd linearized_features(const StudentInit& s, const MatrixXd& X, const ActivationMoments& mom,
                             std::uint64_t seed);

struct SimConfig {
    SimShape shape;
    std::string activation = "tanh";
    TeacherSpec teacher;
    double sw2 = 1.0;
    double noise = 0.0;
    double gamma = 1e-3;
    bool centered = false;
    bool include_test_noise = false;
    std::string features = "exact";  // exact | gaussian_equivalent
    int trials = 10;
    std::uint64_t base_seed = 1;

    // Asymptotic instance with the same ratios and moments.
    ModelParams model() const;
};

struct TrialResult {
    double test = 0.0;
    double train = 0.0;
};

struct SimResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::vector<double> values;
    double train_mean = 0.0;
};

TrialResult run_trial(const SimConfig& cfg, std::uint64_t seed);
// seeds base_seed + i; reduction in index order
SimResult mc_test_error(const SimConfig& cfg, int trials, int threads = 1);

}  // namespace tdlab
