#include <cmath>

#include "tdlab/errors.hpp"
#include "tdlab/pencil.hpp"

namespace tdlab {

namespace {

enum Mat { kX, kTheta, kW };

// One random block of the undoubled pencil: Q[i][j] += coef * M (or M^T).
struct Entry {
    int i, j;
    double coef;
    Mat mat;
    bool transposed;
};

}  // namespace

Eigen::MatrixXcd Pencil::eta(const Eigen::MatrixXcd& G) const {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& e : covariance) out(e.i, e.j) += e.value * block_weights[e.k] * G(e.k, e.l);
    return out;
}

Pencil build_tau_pencil(cplx z, const ModelParams& p) {
    p.validate();
    const double phi = p.phi, psi = p.psi, s2 = p.sw2;
    const double eta = p.student.eta, zeta = p.student.zeta, etap = p.student.eta_prime;
    // sizes relative to n0 = 1: m = 1/phi, n1 = 1/psi
    const double n0 = 1.0, n1 = n0 / psi;
    const double dims[4] = {n0 / phi, n0, n1, n0};
    const double sq = std::sqrt(n0), ez = std::sqrt(std::max(eta - zeta, 0.0)), rz = std::sqrt(zeta);

    // blocks (m, n0, n1, n0); the Schur complement onto block 1 is
    // K + z with Gaussian-equivalent features
    const std::vector<Entry> Q = {
        {0, 1, s2 * zeta / n0, kX, true},
        {0, 2, ez / n1, kTheta, true},
        {0, 3, rz / (sq * n1), kX, true},
        {1, 0, -1.0, kX, false},
        {2, 0, -ez, kTheta, false},
        {2, 1, -rz / sq, kW, false},
        {3, 2, rz * psi / (sq * phi), kW, true},
    };
    const cplx zdiag[4] = {z + s2 * (etap - zeta), 1.0, 1.0, -rz * psi / (sq * phi)};

    // doubling: [[0, Q^T], [Q, 0]] with Q placed in rows 4..7
    std::vector<Entry> E;
    for (const auto& q : Q) {
        E.push_back({4 + q.i, q.j, q.coef, q.mat, q.transposed});
        E.push_back({q.j, 4 + q.i, q.coef, q.mat, !q.transposed});
    }

    Pencil P;
    P.d = 8;
    P.Z = Eigen::MatrixXcd::Zero(8, 8);
    for (int i = 0; i < 4; ++i) P.Z(4 + i, i) = P.Z(i, 4 + i) = zdiag[i];
    P.block_weights.assign(dims, dims + 4);
    P.block_weights.insert(P.block_weights.end(), dims, dims + 4);
    // E[M_ab M_cd] pairs a matrix with its own transpose
    for (const auto& a : E)
        for (const auto& b : E)
            if (a.mat == b.mat && a.transposed != b.transposed)
                P.covariance.push_back({a.i, a.j, b.i, b.j, a.coef * b.coef});
    return P;
}

PencilRun pencil_solve(cplx z, const ModelParams& p, double tol, const PencilObserver& observe) {
    if (!(z.imag() > 0.0)) throw InvalidParams("pencil_fixed_point needs Im z > 0");
    Pencil P = build_tau_pencil(z, p);
    const int d = P.d;
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
    const Eigen::MatrixXcd G0 = (P.Z - cplx(0.0, 1.0) * I).inverse();
    const int max_iter = 200000;

    for (double lambda : {0.5, 0.2, 0.05}) {
        Eigen::MatrixXcd G = G0;
        for (int it = 0; it < max_iter; ++it) {
            Eigen::MatrixXcd Gn = (P.Z - P.eta(G)).inverse();
            double upd = (Gn - G).cwiseAbs().maxCoeff();
            G = (1.0 - lambda) * G + lambda * Gn;
            if (observe) observe(it, G);
            if (!std::isfinite(upd)) break;
            if (upd < tol) {
                PencilRun r;
                r.G = G;
                r.iterations = it + 1;
                r.lambda = lambda;
                r.sol.z = z;
                r.sol.tau1 = G(0, 4);
                r.sol.tau2 = G(1, 7);
                if (!on_physical_branch(r.sol.tau1, r.sol.tau2, z)) break;
                return r;
            }
        }
    }
    throw NoConvergence("pencil fixed point did not converge on the damping ladder");
}

TauSolution pencil_fixed_point(cplx z, const ModelParams& p) { return pencil_solve(z, p).sol; }

std::vector<std::pair<int, int>> g12_structural_zeros() {
    // nonzero: (0,4)=tau1, (1,5), (1,7)=tau2, (2,6), (3,5), (3,7)
    std::vector<std::pair<int, int>> out;
    const bool nz[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 1}, {0, 0, 1, 0}, {0, 1, 0, 1}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (!nz[i][j]) out.emplace_back(i, 4 + j);
    return out;
}

}  // namespace tdlab
