#pragma once

#include <cstdint>
#include <vector>

#include "tdlab/simulator.hpp"

namespace tdlab {

struct TrainConfig {
    SimShape shape;
    double lr = 0.0;          // <= 0 -> 1 / (2 ||K||) from power iteration
    double l2 = 1e-3;         // pull toward the initial weights
    int max_steps = 10000;
    double plateau_tol = 1e-9;
    bool centered = false;    // train (N_a - N_b)/sqrt(2) of two identical copies
    std::uint64_t seed = 1;
    int trace_every = 10;
};

struct TraceRow {
    int step;
    double train_loss;
    double test_mse;
};

struct TrainResult {
    StudentInit trained;        // copy a in centered mode
    StudentInit trained_b;      // centered mode only
    std::vector<TraceRow> trace;
    int steps = 0;
    bool plateaued = false;
    double lr = 0.0;
    bool lr_above_stability = false;  // lr * lambda_max >= 2
    double final_test_mse = 0.0;
};

// W2 sigma(W1 X / sqrt(n0)) / sqrt(n1)
RowVectorXd forward(const StudentInit& s, const MatrixXd& X);
// (N_a - N_b) / sqrt(2)
RowVectorXd forward_centered(const StudentInit& a, const StudentInit& b, const MatrixXd& X);

TrainResult train(const TrainConfig& cfg, const Dataset& data, const StudentInit& init);

// Linearized gradient flow with the ridge folded into K (K = K1 + K2 + gamma I):
// N_t = N0 + (Y - N0(X)) K^-1 (I - exp(-lr t K)) K_x, via an eigendecomposition
// of K. N0 comes from the kernel set; centered drops it.
KrrPrediction ntk_flow_predict(const KernelSet& k, const RowVectorXd& Y, double t, double lr, bool centered);

}  // namespace tdlab
