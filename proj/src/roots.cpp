// Root enumeration for the tau system. Both polynomials are quadratic in
// tau2 with coefficients polynomial in tau1, so the Sylvester resultant of two
// quadratics eliminates tau2 and leaves a degree-7 polynomial in tau1.

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "tdlab/asymptotics.hpp"
#include "tdlab/errors.hpp"

namespace tdlab {

namespace {

using Poly = std::vector<cplx>;  // ascending powers

Poly mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

Poly sub(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    return r;
}

cplx eval(const Poly& a, cplx x) {
    cplx s = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) s = s * x + *it;
    return s;
}

// Companion-matrix roots; drops exact leading and trailing zeros.
std::vector<cplx> roots(Poly a) {
    double scale = 0.0;
    for (auto c : a) scale = std::max(scale, std::abs(c));
    while (!a.empty() && std::abs(a.back()) <= 1e-14 * scale) a.pop_back();
    std::size_t lead = 0;
    while (lead < a.size() && a[lead] == cplx(0.0)) ++lead;
    a.erase(a.begin(), a.begin() + lead);
    const int n = int(a.size()) - 1;
    if (n < 1) return {};
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -a[i] / a[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + n);
    return r;
}

}  // namespace

std::vector<std::array<cplx, 2>> enumerate_tau_roots(cplx z, const ModelParams& p) {
    p.validate();
    const double phi = p.phi, psi = p.psi, s2 = p.sw2;
    const double eta = p.student.eta, zeta = p.student.zeta, etap = p.student.eta_prime;
    // f1 = a2 t2^2 + a1 t2 + a0, f2 = b2 t2^2 + b1 t2 + b0; entries are polys in t1
    Poly a2 = {0.0, zeta * zeta * s2 * psi};
    Poly a1 = {phi * phi, phi * zeta - zeta * psi + zeta * s2 * phi,
               zeta * psi * z - zeta * zeta * s2 * psi + zeta * s2 * psi * etap};
    Poly a0 = {0.0, -phi * phi};
    Poly b2 = {-phi * zeta};
    Poly b1 = {0.0, -zeta + 2.0 * phi * zeta - phi * eta, zeta * s2 * (etap - eta) + zeta * z};
    Poly b0 = {0.0, 0.0, phi * eta - phi * zeta};

    Poly u = sub(mul(a2, b0), mul(a0, b2));
    Poly v = sub(mul(a2, b1), mul(a1, b2));
    Poly w = sub(mul(a1, b0), mul(a0, b1));
    Poly res = sub(mul(u, u), mul(v, w));

    std::vector<std::array<cplx, 2>> out;
    for (cplx t1 : roots(res)) {
        if (std::abs(t1) < 1e-13) continue;
        cplx den = eval(v, t1);
        std::vector<cplx> cands;
        if (std::abs(den) > 1e-12 * (std::abs(eval(u, t1)) + 1e-300)) {
            cands.push_back(-eval(u, t1) / den);
        } else {
            // common root is ambiguous; test both roots of f2
            Poly q = {eval(b0, t1), eval(b1, t1), eval(b2, t1)};
            cands = roots(q);
        }
        for (cplx t2 : cands) {
            cplx s1 = t1, s2c = t2;
            // polish in the full 2x2 system
            for (int it = 0; it < 8; ++it) {
                auto f = tau_polynomials(s1, s2c, z, p);
                const double h = 1e-7;
                cplx e1 = h * std::max(1.0, std::abs(s1)), e2 = h * std::max(1.0, std::abs(s2c));
                auto fa = tau_polynomials(s1 + e1, s2c, z, p), fb = tau_polynomials(s1, s2c + e2, z, p);
                cplx j00 = (fa[0] - f[0]) / e1, j10 = (fa[1] - f[1]) / e1;
                cplx j01 = (fb[0] - f[0]) / e2, j11 = (fb[1] - f[1]) / e2;
                cplx det = j00 * j11 - j01 * j10;
                if (std::abs(det) == 0.0) break;
                cplx d1 = -(j11 * f[0] - j01 * f[1]) / det, d2 = -(-j10 * f[0] + j00 * f[1]) / det;
                cplx n1 = s1 + d1, n2 = s2c + d2;
                if (tau_residual(n1, n2, z, p) >= tau_residual(s1, s2c, z, p)) break;
                s1 = n1;
                s2c = n2;
            }
            if (tau_residual(s1, s2c, z, p) < 1e-8) out.push_back({s1, s2c});
        }
    }
    return out;
}

TauSolution solve_tau_enumerate(cplx z, const ModelParams& p) {
    auto all = enumerate_tau_roots(z, p);
    std::vector<std::array<cplx, 2>> sel;
    for (auto& r : all)
        if (on_physical_branch(r[0], r[1], z)) sel.push_back(r);
    if (sel.empty()) throw NoConvergence("no root on the physical branch");
    // duplicates of one root are fine; distinct branch roots are not
    auto best = std::min_element(sel.begin(), sel.end(), [&](auto& a, auto& b) {
        return tau_residual(a[0], a[1], z, p) < tau_residual(b[0], b[1], z, p);
    });
    for (auto& r : sel)
        if (std::abs(r[0] - (*best)[0]) > 1e-6 * std::abs((*best)[0]))
            throw NoConvergence("branch condition does not single out one root");
    TauSolution s;
    s.tau1 = (*best)[0];
    s.tau2 = (*best)[1];
    s.z = z;
    return s;
}

}  // namespace tdlab
