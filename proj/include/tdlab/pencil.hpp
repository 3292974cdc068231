#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "tdlab/asymptotics.hpp"

namespace tdlab {

// sigma(i,k;l,j): E[Q_ik Q_lj] up to the 1/N normalization.
struct CovarianceEntry {
    int i, k, l, j;
    double value;
};

// Operator-valued problem Z G = I + eta(G) G with
// eta(G)_ij = sum_{k,l} sigma(i,k;l,j) alpha_k G_kl.
struct Pencil {
    int d = 0;
    Eigen::MatrixXcd Z;
    std::vector<CovarianceEntry> covariance;
    std::vector<double> block_weights;  // alpha_k

    Eigen::MatrixXcd eta(const Eigen::MatrixXcd& G) const;
};

// Self-adjoint doubling of the 4-block pencil whose inverse holds
// (K + z)^-1 in block (1,5) and (X^T X / n0)(K + z)^-1 in block (2,8).
Pencil build_tau_pencil(cplx z, const ModelParams& p);

struct PencilRun {
    TauSolution sol;
    Eigen::MatrixXcd G;
    int iterations = 0;
    double lambda = 0.0;
};

using PencilObserver = std::function<void(int iteration, const Eigen::MatrixXcd& G)>;

PencilRun pencil_solve(cplx z, const ModelParams& p, double tol = 1e-12,
                       const PencilObserver& observe = {});

TauSolution pencil_fixed_point(cplx z, const ModelParams& p);

// Entries of the G12 block (rows 0..3, cols 4..7) that stay zero by structure.
std::vector<std::pair<int, int>> g12_structural_zeros();

}  // namespace tdlab
