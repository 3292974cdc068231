#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "tdlab/errors.hpp"
#include "tdlab/pool.hpp"
#include "tdlab/rng.hpp"
#include "tdlab/simulator.hpp"

namespace tdlab {

namespace {

constexpr Eigen::Index kBlock = 256;

template <class F>
void apply(const MatrixXd& H, MatrixXd& out, const F& f) {
    out.resize(H.rows(), H.cols());
    const double* h = H.data();
    double* o = out.data();
    for (Eigen::Index i = 0; i < H.size(); ++i) o[i] = f(h[i]);
}

void symmetrize_lower(MatrixXd& A) { A.triangularView<Eigen::StrictlyUpper>() = A.transpose(); }

Activation resolve_activation(const std::string& name) { return center(builtin(name)); }

}  // namespace

void SimShape::validate() const {
    if (m <= 0 || m_test <= 0 || n0 <= 0 || n1 <= 0 || nt < 0)
        throw InvalidParams("simulation sizes must be positive");
}

std::pair<double, double> TeacherSpec::moments() const {
    if (kind == "linear") return {1.0, 1.0};
    if (kind != "nonlinear") throw InvalidParams("teacher kind must be linear or nonlinear");
    auto mo = tdlab::moments(center(builtin(activation)));
    return {mo.eta, mo.zeta};
}

Dataset sample_dataset(const SimShape& shape, const TeacherSpec& teacher, double noise, std::uint64_t seed) {
    shape.validate();
    Dataset d;
    d.seed = seed;
    const int n0 = shape.n0;
    d.X.resize(n0, shape.m);
    d.X_test.resize(n0, shape.m_test);
    auto rx = make_rng(seed, Stream::Inputs);
    fill_normal(d.X, rx);
    auto rxt = make_rng(seed, Stream::TestInputs);
    fill_normal(d.X_test, rxt);

    auto rt = make_rng(seed, Stream::Teacher);
    if (teacher.kind == "linear") {
        Eigen::VectorXd beta(n0);
        fill_normal(beta, rt);
        const double s = 1.0 / std::sqrt(double(n0));
        d.Y = s * (beta.transpose() * d.X);
        d.Y_test_clean = s * (beta.transpose() * d.X_test);
    } else if (teacher.kind == "nonlinear") {
        const int nt = teacher.nt > 0 ? teacher.nt : (shape.nt > 0 ? shape.nt : 10 * n0);
        Activation act = resolve_activation(teacher.activation);
        MatrixXd Omega(nt, n0);
        fill_normal(Omega, rt);
        Eigen::VectorXd omega(nt);
        fill_normal(omega, rt);
        auto label = [&](const MatrixXd& X) {
            MatrixXd H = (Omega * X) / std::sqrt(double(n0)), F;
            apply(H, F, act.f);
            return RowVectorXd((omega.transpose() * F) / std::sqrt(double(nt)));
        };
        d.Y = label(d.X);
        d.Y_test_clean = label(d.X_test);
    } else {
        throw InvalidParams("teacher kind must be linear or nonlinear");
    }

    const double sd = std::sqrt(noise);
    auto rn = make_rng(seed, Stream::TrainNoise);
    for (Eigen::Index i = 0; i < d.Y.size(); ++i) d.Y(i) += sd * rn.normal();
    auto rnt = make_rng(seed, Stream::TestNoise);
    d.Y_test = d.Y_test_clean;
    for (Eigen::Index i = 0; i < d.Y_test.size(); ++i) d.Y_test(i) += sd * rnt.normal();
    return d;
}

StudentInit sample_student(int n0, int n1, const Activation& act, double sw2, std::uint64_t seed) {
    if (n0 <= 0 || n1 <= 0) throw InvalidParams("student sizes must be positive");
    if (sw2 < 0.0) throw InvalidParams("sw2 must be >= 0");
    StudentInit s;
    s.seed = seed;
    s.activation = act;
    s.W1.resize(n1, n0);
    auto r1 = make_rng(seed, Stream::W1);
    fill_normal(s.W1, r1);
    s.W2.resize(n1);
    auto r2 = make_rng(seed, Stream::W2);
    fill_normal(s.W2, r2, std::sqrt(sw2));
    return s;
}

KernelSet ntk_kernels(const StudentInit& s, const MatrixXd& X1, const MatrixXd& X2, double gamma) {
    const Eigen::Index n1 = s.W1.rows(), n0 = s.W1.cols(), m = X1.cols(), mt = X2.cols();
    if (X1.rows() != n0 || X2.rows() != n0) throw InvalidParams("input dimension does not match W1");
    const double r0 = 1.0 / std::sqrt(double(n0)), r1 = 1.0 / std::sqrt(double(n1));

    KernelSet k;
    k.gamma = gamma;
    k.K2 = MatrixXd::Zero(m, m);
    k.K2x = MatrixXd::Zero(m, mt);
    MatrixXd AA = MatrixXd::Zero(m, m), AAx = MatrixXd::Zero(m, mt);
    k.N0 = RowVectorXd::Zero(m);
    k.N0x = RowVectorXd::Zero(mt);

    MatrixXd H, Ht, F, Ft, A, At;
    for (Eigen::Index b0 = 0; b0 < n1; b0 += kBlock) {
        const Eigen::Index b = std::min(kBlock, n1 - b0);
        auto W = s.W1.middleRows(b0, b);
        H.noalias() = (W * X1) * r0;
        Ht.noalias() = (W * X2) * r0;
        apply(H, F, s.activation.f);
        apply(Ht, Ft, s.activation.f);
        apply(H, A, s.activation.df);
        apply(Ht, At, s.activation.df);
        auto w2 = s.W2.segment(b0, b).transpose();
        A = w2.asDiagonal() * A;
        At = w2.asDiagonal() * At;

        k.K2.selfadjointView<Eigen::Lower>().rankUpdate(F.transpose());
        k.K2x.noalias() += F.transpose() * Ft;
        AA.selfadjointView<Eigen::Lower>().rankUpdate(A.transpose());
        AAx.noalias() += A.transpose() * At;
        k.N0.noalias() += s.W2.segment(b0, b) * F;
        k.N0x.noalias() += s.W2.segment(b0, b) * Ft;
    }
    symmetrize_lower(k.K2);
    symmetrize_lower(AA);
    const double inv_n1 = 1.0 / double(n1);
    k.K2 *= inv_n1;
    k.K2x *= inv_n1;
    k.N0 *= r1;
    k.N0x *= r1;

    MatrixXd G(m, m);
    G.setZero();
    G.selfadjointView<Eigen::Lower>().rankUpdate(X1.transpose(), 1.0 / double(n0));
    symmetrize_lower(G);
    k.K1 = G.cwiseProduct(AA) * inv_n1;
    k.K1x = ((X1.transpose() * X2) / double(n0)).cwiseProduct(AAx) * inv_n1;

    k.K = k.K1 + k.K2;
    k.K.diagonal().array() += gamma;
    k.Kx = k.K1x + k.K2x;
    return k;
}

MatrixXd simplified_kernel(const StudentInit& s, const MatrixXd& X, double sw2, const ActivationMoments& mom,
                           double gamma) {
    const Eigen::Index n1 = s.W1.rows(), n0 = s.W1.cols(), m = X.cols();
    MatrixXd H = (s.W1 * X) / std::sqrt(double(n0)), F;
    apply(H, F, s.activation.f);
    MatrixXd K = MatrixXd::Zero(m, m);
    K.selfadjointView<Eigen::Lower>().rankUpdate(F.transpose(), 1.0 / double(n1));
    K.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose(), sw2 * mom.zeta / double(n0));
    symmetrize_lower(K);
    K.diagonal().array() += sw2 * (mom.eta_prime - mom.zeta) + gamma;
    return K;
}

double spectral_norm_sym(const MatrixXd& A, std::uint64_t seed, int max_steps, double tol) {
    const Eigen::Index n = A.rows();
    if (n == 0) return 0.0;
    Eigen::VectorXd v(n);
    auto rng = make_rng(seed, Stream::PowerIteration);
    fill_normal(v, rng);
    v.normalize();
    double est = 0.0;
    for (int it = 0; it < max_steps; ++it) {
        // iterate with A^2 so that +-lambda pairs do not stall the estimate
        Eigen::VectorXd w = A * v;
        double nw = w.norm();
        if (nw == 0.0) return 0.0;
        Eigen::VectorXd u = A * (w / nw);
        double nu = u.norm();
        double next = std::sqrt(nw * nu);
        v = u / nu;
        if (std::abs(next - est) <= tol * next) return next;
        est = next;
    }
    return est;
}

double kernel_discrepancy(const StudentInit& s, const MatrixXd& X, const ActivationMoments& mom, std::uint64_t seed) {
    const double sw2 = s.W2.squaredNorm() / double(s.W2.size());
    KernelSet k = ntk_kernels(s, X, X.leftCols(0), 0.0);
    MatrixXd D = k.K - simplified_kernel(s, X, sw2, mom, 0.0);
    D.array() -= sw2 * mom.zeta_prime / double(X.rows());
    return spectral_norm_sym(D, seed);
}

KrrPrediction krr_predict(const KernelSet& k, const RowVectorXd& Y, const RowVectorXd& N0_train,
                          const RowVectorXd& N0_test, bool centered) {
    const Eigen::Index m = k.K.rows();
    Eigen::VectorXd r = Y.transpose();
    if (!centered) r -= N0_train.transpose();

    Eigen::LLT<MatrixXd> llt(k.K);
    if (llt.info() != Eigen::Success) {
        MatrixXd J = k.K;
        J.diagonal().array() += 1e-10 * k.K.trace() / double(m);
        llt.compute(J);
        if (llt.info() != Eigen::Success) throw SingularKernel("Cholesky failed after jitter retry");
    }
    Eigen::VectorXd alpha = llt.solve(r);

    KrrPrediction out;
    // K - gamma I applied to alpha
    out.train = (k.K * alpha - k.gamma * alpha).transpose();
    out.test = (k.Kx.transpose() * alpha).transpose();
    if (!centered) {
        out.train += N0_train;
        out.test += N0_test;
    }
    return out;
}

MatrixXd linearized_features(const StudentInit& s, const MatrixXd& X, const ActivationMoments& mom,
                             std::uint64_t seed) {
    const Eigen::Index n1 = s.W1.rows(), n0 = s.W1.cols();
    MatrixXd Theta(n1, X.cols());
    auto rng = make_rng(seed, Stream::ThetaF);
    fill_normal(Theta, rng);
    MatrixXd F = (s.W1 * X) * std::sqrt(mom.zeta / double(n0));
    F += std::sqrt(std::max(mom.eta - mom.zeta, 0.0)) * Theta;
    return F;
}

ModelParams SimConfig::model() const {
    ModelParams p;
    p.phi = double(shape.n0) / shape.m;
    p.psi = double(shape.n0) / shape.n1;
    p.gamma = gamma;
    p.sw2 = sw2;
    p.noise = noise;
    p.centered = centered;
    p.student = moments(resolve_activation(activation));
    auto [te, tz] = teacher.moments();
    p.teacher_eta = te;
    p.teacher_zeta = tz;
    p.include_test_noise = include_test_noise;
    return p;
}

namespace {

// Kernel regression on the second-layer kernel alone, with either the true
// features or their Gaussian equivalent (train and test share Theta draws).
TrialResult k2_gaussian_equivalent_trial(const SimConfig& cfg, const Dataset& d, const StudentInit& s,
                                         std::uint64_t seed) {
    const auto mom = moments(s.activation);
    MatrixXd Xall(d.X.rows(), d.X.cols() + d.X_test.cols());
    Xall << d.X, d.X_test;
    MatrixXd F = linearized_features(s, Xall, mom, seed);
    const Eigen::Index m = d.X.cols(), n1 = F.rows();
    KernelSet k;
    k.gamma = cfg.gamma;
    k.K = MatrixXd::Zero(m, m);
    k.K.selfadjointView<Eigen::Lower>().rankUpdate(F.leftCols(m).transpose(), 1.0 / double(n1));
    symmetrize_lower(k.K);
    k.K.diagonal().array() += cfg.gamma;
    k.Kx = F.leftCols(m).transpose() * F.rightCols(d.X_test.cols()) / double(n1);
    // linearized network output at init has the same role as N0
    RowVectorXd N0 = s.W2 * F.leftCols(m) / std::sqrt(double(n1));
    RowVectorXd N0x = s.W2 * F.rightCols(d.X_test.cols()) / std::sqrt(double(n1));
    auto pr = krr_predict(k, d.Y, N0, N0x, cfg.centered);
    const RowVectorXd& yt = cfg.include_test_noise ? d.Y_test : d.Y_test_clean;
    return {(yt - pr.test).squaredNorm() / double(yt.size()), (d.Y - pr.train).squaredNorm() / double(m)};
}

}  // namespace

TrialResult run_trial(const SimConfig& cfg, std::uint64_t seed) {
    cfg.shape.validate();
    Activation act = resolve_activation(cfg.activation);
    Dataset d = sample_dataset(cfg.shape, cfg.teacher, cfg.noise, seed);
    StudentInit s = sample_student(cfg.shape.n0, cfg.shape.n1, act, cfg.sw2, seed);
    if (cfg.features == "gaussian_equivalent") {
        if (cfg.sw2 != 0.0) throw InvalidParams("gaussian_equivalent features need sw2 = 0 (second-layer kernel only)");
        return k2_gaussian_equivalent_trial(cfg, d, s, seed);
    }
    if (cfg.features != "exact") throw InvalidParams("features must be exact or gaussian_equivalent");
    KernelSet k = ntk_kernels(s, d.X, d.X_test, cfg.gamma);
    auto pr = krr_predict(k, d.Y, k.N0, k.N0x, cfg.centered);
    const RowVectorXd& yt = cfg.include_test_noise ? d.Y_test : d.Y_test_clean;
    return {(yt - pr.test).squaredNorm() / double(yt.size()), (d.Y - pr.train).squaredNorm() / double(d.Y.size())};
}

SimResult mc_test_error(const SimConfig& cfg, int trials, int threads) {
    if (trials < 2) throw InvalidParams("mc_test_error needs trials >= 2");
    std::vector<TrialResult> res(trials);
    parallel_for(std::size_t(trials), threads, [&](std::size_t i) { res[i] = run_trial(cfg, cfg.base_seed + i); });
    SimResult r;
    for (const auto& t : res) r.values.push_back(t.test);
    const double n = double(trials);
    r.mean = std::accumulate(r.values.begin(), r.values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : r.values) ss += (v - r.mean) * (v - r.mean);
    r.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    for (const auto& t : res) r.train_mean += t.train / n;
    return r;
}

}  // namespace tdlab
