#include <cmath>

#include <Eigen/Eigenvalues>

#include "tdlab/errors.hpp"
#include "tdlab/trainer.hpp"

namespace tdlab {

namespace {

struct Copy {
    MatrixXd V1;
    RowVectorXd V2;
    MatrixXd H, F;  // cache from the last forward pass on X
};

void forward_cache(Copy& c, const Activation& act, const MatrixXd& X, double r0) {
    c.H.noalias() = (c.V1 * X) * r0;
    c.F = c.H.unaryExpr(act.f);
}

// Adds coef * J^T res to (g1, g2) for one copy; weight-decay handled by caller.
void backprop(const Copy& c, const Activation& act, const MatrixXd& X, const RowVectorXd& res, double coef,
              double r0, double r1, MatrixXd& g1, RowVectorXd& g2) {
    g2.noalias() = (coef * r1) * (res * c.F.transpose());
    MatrixXd D = c.H.unaryExpr(act.df);
    D = c.V2.transpose().asDiagonal() * D;
    D = D * res.asDiagonal();
    g1.noalias() = (coef * r1 * r0) * (D * X.transpose());
}

double sq_dist(const MatrixXd& a, const MatrixXd& b) { return (a - b).squaredNorm(); }

}  // namespace

RowVectorXd forward(const StudentInit& s, const MatrixXd& X) {
    const double r0 = 1.0 / std::sqrt(double(s.W1.cols())), r1 = 1.0 / std::sqrt(double(s.W1.rows()));
    MatrixXd F = ((s.W1 * X) * r0).unaryExpr(s.activation.f);
    return (s.W2 * F) * r1;
}

RowVectorXd forward_centered(const StudentInit& a, const StudentInit& b, const MatrixXd& X) {
    return (forward(a, X) - forward(b, X)) / std::sqrt(2.0);
}

TrainResult train(const TrainConfig& cfg, const Dataset& data, const StudentInit& init) {
    cfg.shape.validate();
    const Eigen::Index n1 = init.W1.rows(), n0 = init.W1.cols();
    const double r0 = 1.0 / std::sqrt(double(n0)), r1 = 1.0 / std::sqrt(double(n1));
    const Activation& act = init.activation;
    const MatrixXd& X = data.X;
    const double l2 = cfg.l2;
    if (cfg.max_steps < 0 || l2 < 0.0) throw InvalidParams("max_steps and l2 must be >= 0");

    TrainResult out;
    // the NTK of the centered pair equals that of one copy at initialization
    KernelSet k = ntk_kernels(init, X, X.leftCols(0), l2);
    double lam_max = spectral_norm_sym(k.K, cfg.seed);
    out.lr = cfg.lr > 0.0 ? cfg.lr : 1.0 / (2.0 * lam_max);
    out.lr_above_stability = out.lr * lam_max >= 2.0;
    const double lr = out.lr;

    std::vector<Copy> copies(cfg.centered ? 2 : 1);
    for (auto& c : copies) {
        c.V1 = init.W1;
        c.V2 = init.W2;
    }
    const double coef[2] = {cfg.centered ? 1.0 / std::sqrt(2.0) : 1.0, -1.0 / std::sqrt(2.0)};

    auto outputs = [&](const MatrixXd& Xin, bool use_cache) {
        RowVectorXd o = RowVectorXd::Zero(Xin.cols());
        for (std::size_t c = 0; c < copies.size(); ++c) {
            if (use_cache) {
                o += coef[c] * r1 * (copies[c].V2 * copies[c].F);
            } else {
                MatrixXd F = ((copies[c].V1 * Xin) * r0).unaryExpr(act.f);
                o += coef[c] * r1 * (copies[c].V2 * F);
            }
        }
        return o;
    };
    auto test_mse = [&] {
        RowVectorXd pt = outputs(data.X_test, false);
        return (data.Y_test_clean - pt).squaredNorm() / double(pt.size());
    };

    double initial_loss = -1.0, loss_100 = 0.0;
    MatrixXd g1;
    RowVectorXd g2;
    int step = 0;
    for (;; ++step) {
        for (auto& c : copies) forward_cache(c, act, X, r0);
        RowVectorXd res = outputs(X, true) - data.Y;
        double reg = 0.0;
        for (auto& c : copies) reg += sq_dist(c.V1, init.W1) + sq_dist(c.V2, init.W2);
        const double loss = 0.5 * res.squaredNorm() + 0.5 * l2 * reg;
        if (initial_loss < 0.0) initial_loss = std::max(loss, 1e-300);
        if (!std::isfinite(loss) || loss > 1e6 * initial_loss)
            throw Diverged("loss " + std::to_string(loss) + " at step " + std::to_string(step));

        if (step % cfg.trace_every == 0) out.trace.push_back({step, loss, test_mse()});
        if (step % 100 == 0) {
            if (step > 0 && loss_100 - loss < cfg.plateau_tol * std::abs(loss)) {
                out.plateaued = true;
                break;
            }
            loss_100 = loss;
        }
        if (step >= cfg.max_steps) break;

        for (std::size_t c = 0; c < copies.size(); ++c) {
            auto& cp = copies[c];
            backprop(cp, act, X, res, coef[c], r0, r1, g1, g2);
            g1 += l2 * (cp.V1 - init.W1);
            g2 += l2 * (cp.V2 - init.W2);
            cp.V1 -= lr * g1;
            cp.V2 -= lr * g2;
        }
    }
    out.steps = step;
    if (out.trace.empty() || out.trace.back().step != step) {
        for (auto& c : copies) forward_cache(c, act, X, r0);
        RowVectorXd res = outputs(X, true) - data.Y;
        double reg = 0.0;
        for (auto& c : copies) reg += sq_dist(c.V1, init.W1) + sq_dist(c.V2, init.W2);
        out.trace.push_back({step, 0.5 * res.squaredNorm() + 0.5 * l2 * reg, test_mse()});
    }
    out.final_test_mse = out.trace.back().test_mse;

    out.trained = init;
    out.trained.W1 = copies[0].V1;
    out.trained.W2 = copies[0].V2;
    if (cfg.centered) {
        out.trained_b = init;
        out.trained_b.W1 = copies[1].V1;
        out.trained_b.W2 = copies[1].V2;
    }
    return out;
}

KrrPrediction ntk_flow_predict(const KernelSet& k, const RowVectorXd& Y, double t, double lr, bool centered) {
    if (t < 0.0 || lr < 0.0) throw InvalidParams("flow time and rate must be >= 0");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(k.K);
    if (es.info() != Eigen::Success) throw SingularKernel("eigendecomposition failed");
    const auto& U = es.eigenvectors();
    const auto& lam = es.eigenvalues();
    Eigen::VectorXd r = Y.transpose();
    if (!centered) r -= k.N0.transpose();
    Eigen::VectorXd c = U.transpose() * r;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (!(lam(i) > 0.0)) throw SingularKernel("kernel not positive definite");
        // (1 - e^{-x}) / lambda without cancellation at small x
        c(i) *= -std::expm1(-lr * t * lam(i)) / lam(i);
    }
    Eigen::VectorXd a = U * c;
    KrrPrediction out;
    out.train = (k.K * a - k.gamma * a).transpose();
    out.test = (k.Kx.transpose() * a).transpose();
    if (!centered) {
        out.train += k.N0;
        out.test += k.N0x;
    }
    return out;
}

}  // namespace tdlab
