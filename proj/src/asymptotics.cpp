#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "tdlab/asymptotics.hpp"
#include "tdlab/errors.hpp"

namespace tdlab {

namespace {

struct Coeffs {
    double phi, psi, s2, eta, zeta, etap;
};

Coeffs coeffs(const ModelParams& p) {
    return {p.phi, p.psi, p.sw2, p.student.eta, p.student.zeta, p.student.eta_prime};
}

using Jac = std::array<std::array<cplx, 2>, 2>;

Jac jacobian(cplx t1, cplx t2, cplx z, const Coeffs& c) {
    const auto [phi, psi, s2, eta, zeta, etap] = c;
    Jac J;
    J[0][0] = phi * zeta * t2 - phi * phi + 2.0 * zeta * psi * z * t1 * t2 - zeta * psi * t2 +
              zeta * zeta * s2 * psi * t2 * t2 - 2.0 * zeta * zeta * s2 * psi * t1 * t2 +
              2.0 * zeta * s2 * psi * etap * t1 * t2 + zeta * s2 * phi * t2;
    J[0][1] = phi * zeta * t1 + phi * phi + zeta * psi * z * t1 * t1 - zeta * psi * t1 +
              2.0 * zeta * zeta * s2 * psi * t1 * t2 - zeta * zeta * s2 * psi * t1 * t1 +
              zeta * s2 * psi * etap * t1 * t1 + zeta * s2 * phi * t1;
    cplx d = t2 - t1, g = zeta * d + eta * t1;
    J[1][0] = 2.0 * zeta * s2 * (etap - eta) * t1 * t2 + 2.0 * zeta * z * t1 * t2 - zeta * t2 +
              phi * (g - d * (eta - zeta));
    J[1][1] = zeta * s2 * (etap - eta) * t1 * t1 + zeta * z * t1 * t1 - zeta * t1 - phi * (g + zeta * d);
    return J;
}

double norm2(const std::array<cplx, 2>& f) { return std::abs(f[0]) + std::abs(f[1]); }

// Damped Newton from (t1, t2); true on convergence.
bool newton(cplx& t1, cplx& t2, cplx z, const ModelParams& p, int max_iter = 80) {
    const Coeffs c = coeffs(p);
    for (int it = 0; it < max_iter; ++it) {
        auto f = tau_polynomials(t1, t2, z, p);
        auto J = jacobian(t1, t2, z, c);
        cplx det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        if (std::abs(det) == 0.0 || !std::isfinite(std::abs(det))) return false;
        cplx d1 = -(J[1][1] * f[0] - J[0][1] * f[1]) / det;
        cplx d2 = -(-J[1][0] * f[0] + J[0][0] * f[1]) / det;
        double f0 = norm2(f), lam = 1.0;
        cplx n1 = t1 + d1, n2 = t2 + d2;
        while (lam > 1e-6) {
            n1 = t1 + lam * d1;
            n2 = t2 + lam * d2;
            double fn = norm2(tau_polynomials(n1, n2, z, p));
            if (std::isfinite(fn) && (fn < f0 || f0 < 1e-300)) break;
            lam *= 0.5;
        }
        if (lam <= 1e-6) {
            // stagnation at round-off is convergence, not failure
            return tau_residual(t1, t2, z, p) < 1e-12;
        }
        t1 = n1;
        t2 = n2;
        double step = lam * (std::abs(d1) + std::abs(d2));
        if (step <= 1e-15 * (std::abs(t1) + std::abs(t2))) return true;
    }
    return tau_residual(t1, t2, z, p) < 1e-12;
}

// Loose branch test used along the homotopy, tolerant of round-off at tiny Im z.
bool branch_ok(cplx t1, cplx t2, cplx z) {
    double s = z.imag() > 0 ? 1.0 : -1.0;
    return s * t1.imag() < 1e-13 * std::abs(t1) && s * t2.imag() < 1e-13 * std::abs(t2);
}

}  // namespace

double ModelParams::effective_noise() const {
    if (snr_infinite) return 0.0;
    return teacher_eta - teacher_zeta + noise;
}

double ModelParams::snr() const {
    double n = effective_noise();
    if (n <= 0.0) return std::numeric_limits<double>::infinity();
    return teacher_zeta / n;
}

double ModelParams::param_count(double m) const {
    double n0 = phi * m, n1 = n0 / psi;
    return n1 * (n0 + 1.0);
}

void ModelParams::validate() const {
    auto bad = [](double v) { return !std::isfinite(v); };
    if (bad(phi) || phi <= 0.0) throw InvalidParams("phi must be > 0");
    if (bad(psi) || psi <= 0.0) throw InvalidParams("psi must be > 0");
    if (bad(gamma) || gamma < 0.0) throw InvalidParams("gamma must be >= 0");
    if (bad(sw2) || sw2 < 0.0) throw InvalidParams("sw2 must be >= 0");
    if (bad(noise) || noise < 0.0) throw InvalidParams("noise must be >= 0");
    const auto& m = student;
    if (bad(m.eta) || bad(m.zeta) || bad(m.eta_prime) || m.zeta <= 0.0)
        throw InvalidParams("student moments invalid (need zeta > 0)");
    if (m.eta_prime < m.zeta - 1e-12 || m.eta < m.zeta - 1e-12)
        throw InvalidParams("student moments violate eta' >= zeta, eta >= zeta");
    if (bad(teacher_eta) || bad(teacher_zeta) || teacher_eta < teacher_zeta - 1e-12)
        throw InvalidParams("teacher moments invalid");
}

std::array<cplx, 2> tau_polynomials(cplx t1, cplx t2, cplx z, const ModelParams& p) {
    const auto [phi, psi, s2, eta, zeta, etap] = coeffs(p);
    cplx f1 = phi * (zeta * t2 * t1 + phi * (t2 - t1)) + zeta * t1 * t2 * psi * (z * t1 - 1.0) +
              zeta * t1 * t2 * s2 * (zeta * (t2 - t1) * psi + t1 * psi * etap + phi);
    cplx f2 = zeta * t1 * t1 * t2 * (etap - eta) * s2 + zeta * t1 * t2 * (z * t1 - 1.0) -
              (t2 - t1) * phi * (zeta * (t2 - t1) + eta * t1);
    return {f1, f2};
}

double tau_residual(cplx t1, cplx t2, cplx z, const ModelParams& p) {
    const auto [phi, psi, s2, eta, zeta, etap] = coeffs(p);
    auto f = tau_polynomials(t1, t2, z, p);
    double a1 = std::abs(t1), a2 = std::abs(t2), az = std::abs(z);
    // sum of |monomials| after expansion
    double s1 = phi * zeta * a1 * a2 + phi * phi * (a2 + a1) + zeta * psi * az * a1 * a1 * a2 +
                zeta * psi * a1 * a2 + zeta * zeta * s2 * psi * (a1 * a2 * a2 + a1 * a1 * a2) +
                zeta * s2 * psi * etap * a1 * a1 * a2 + zeta * s2 * phi * a1 * a2;
    double s2s = zeta * s2 * std::abs(etap - eta) * a1 * a1 * a2 + zeta * az * a1 * a1 * a2 + zeta * a1 * a2 +
                 phi * zeta * (a2 * a2 + 2 * a1 * a2 + a1 * a1) + phi * eta * (a1 * a2 + a1 * a1);
    double r1 = s1 > 0 ? std::abs(f[0]) / s1 : std::abs(f[0]);
    double r2 = s2s > 0 ? std::abs(f[1]) / s2s : std::abs(f[1]);
    return std::max(r1, r2);
}

bool on_physical_branch(cplx t1, cplx t2, cplx z) {
    return t1.imag() * z.imag() < 0.0 && t2.imag() * z.imag() < 0.0;
}

TauSolution solve_tau(cplx z, const ModelParams& p) {
    p.validate();
    if (!(z.imag() > 0.0)) throw InvalidParams("solve_tau needs Im z > 0");
    const double x = z.real(), y_target = z.imag();
    double y = std::max(10.0 * (1.0 + std::abs(z)), y_target);
    cplx t1 = 1.0 / cplx(x, y), t2 = t1;
    bool ok = newton(t1, t2, cplx(x, y), p) && branch_ok(t1, t2, cplx(x, y));

    double dlog = std::log(10.0) / 8.0;  // ~8 steps per decade to start
    while (ok && y > y_target) {
        double y_next = std::max(y_target, y * std::exp(-dlog));
        cplx s1 = t1, s2 = t2;
        bool step_ok = newton(s1, s2, cplx(x, y_next), p) && branch_ok(s1, s2, cplx(x, y_next));
        if (step_ok) {
            t1 = s1;
            t2 = s2;
            y = y_next;
            dlog = std::min(dlog * 1.5, std::log(10.0));
        } else {
            dlog *= 0.25;
            if (dlog < 1e-5) ok = false;
        }
    }
    if (ok) {
        newton(t1, t2, z, p, 4);
        if (tau_residual(t1, t2, z, p) < 1e-11 && branch_ok(t1, t2, z)) {
            TauSolution s;
            s.tau1 = t1;
            s.tau2 = t2;
            s.z = z;
            return s;
        }
    }
    // last resort: enumerate every root and select the branch
    try {
        return solve_tau_enumerate(z, p);
    } catch (const NumericalError& e) {
        throw NoConvergence("homotopy failed and " + std::string(e.what()));
    }
}

TauSolution solve_tau_real(double gamma, const ModelParams& p) {
    if (!(gamma > 0.0)) throw InvalidParams("solve_tau_real needs gamma > 0");
    // Im z offsets scale with gamma below 1 so that (eps/gamma)^2 stays negligible
    const double scale = std::min(1.0, gamma);
    const double ladder[3] = {1e-7 * scale, 1e-8 * scale, 1e-9 * scale};
    TauSolution first = solve_tau(cplx(gamma, ladder[0]), p);
    cplx t1 = first.tau1, t2 = first.tau2;
    for (int k = 1; k < 3; ++k) {
        cplx z(gamma, ladder[k]);
        if (!newton(t1, t2, z, p) || !branch_ok(t1, t2, z)) {
            TauSolution s = solve_tau(z, p);
            t1 = s.tau1;
            t2 = s.tau2;
        }
    }
    auto rel = [](cplx a, cplx b) { return std::abs(a.real() - b.real()) / std::abs(b.real()); };
    if (rel(first.tau1, t1) > 1e-8 || rel(first.tau2, t2) > 1e-8)
        throw BranchInstability("epsilon ladder disagrees at gamma=" + std::to_string(gamma));
    if (std::abs(t1.imag()) > 1e-6 * std::abs(t1) || std::abs(t2.imag()) > 1e-6 * std::abs(t2))
        throw BranchInstability("imaginary part not negligible at gamma=" + std::to_string(gamma));

    TauSolution s;
    s.z = cplx(gamma, 0.0);
    s.tau1 = t1.real();
    s.tau2 = t2.real();
    s.ttau2 = -1.0 + s.tau2.real() / s.tau1.real();
    s.ttau1 = p.sw2 * p.student.zeta * s.tau2.real() + p.phi * s.ttau2;
    std::tie(s.dtau1, s.dtau2) = tau_derivatives(s, p);
    return s;
}

std::pair<double, double> tau_derivatives(const TauSolution& sol, const ModelParams& p) {
    const auto [phi, psi, s2, eta, zeta, etap] = coeffs(p);
    (void)etap;
    double t1 = sol.tau1.real(), t2 = sol.tau2.real();
    double tt2 = -1.0 + t2 / t1;
    double tt1 = s2 * zeta * t2 + phi * tt2;
    double den = psi * tt1 * tt1 *
                     (zeta * zeta * (tt2 + 1) * (tt2 + 1) +
                      phi * (zeta * tt2 + eta) * (zeta * tt2 * (2 * tt2 + 3) + eta)) +
                 zeta * zeta * phi * phi * (tt2 + 1) * (tt2 + 1) * (phi * tt2 * tt2 - 1);
    if (!(std::abs(den) >= 1e-300)) throw DegenerateDenominator("derivative denominator vanished");
    double d1 = -zeta * zeta * t2 * t2 * (psi * tt1 * tt1 - phi * phi) / den;
    double d2 = -zeta * t2 * t2 * (psi * tt1 * tt1 * (zeta - eta) - zeta * phi * phi * (tt2 + 1) * (tt2 + 1)) / den;
    return {d1, d2};
}

namespace {

struct Solved {
    double g, t1, t2, d1, d2;
};

Solved solved(const ModelParams& p) {
    TauSolution s = solve_tau_real(p.gamma, p);
    return {p.gamma, s.tau1.real(), s.tau2.real(), s.dtau1, s.dtau2};
}

double label_noise_offset(const ModelParams& p) {
    if (p.snr_infinite || p.include_test_noise) return 0.0;
    return p.noise;
}

// T1 (teacher part) and T2 (initial-function part) of the training error.
std::pair<double, double> train_terms(const Solved& s, const ModelParams& p) {
    const double g2 = s.g * s.g, s2 = p.sw2;
    double T1 = -g2 * (p.effective_noise() * s.d1 + p.teacher_zeta * s.d2);
    double T2 = s2 * g2 * (s.t1 + s.g * s.d1) +
                s2 * s2 * g2 * ((p.student.eta_prime - p.student.zeta) * s.d1 + p.student.zeta * s.d2);
    return {T1, T2};
}

template <class F>
double richardson(const ModelParams& p, F&& f) {
    const double gammas[4] = {1e-3, 1e-4, 1e-5, 1e-6};
    std::vector<double> v;
    for (double g : gammas) {
        ModelParams q = p;
        q.gamma = g;
        try {
            v.push_back(f(q));
        } catch (const BranchInstability&) {
            break;
        }
    }
    if (v.size() < 2) throw ExtrapolationUnstable("fewer than two stable ridge values");
    const std::size_t n = v.size();
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < n; ++i) {
        inc = inc && v[i] >= v[i - 1];
        dec = dec && v[i] <= v[i - 1];
    }
    if (!(inc || dec)) {
        double amp = 0.0;
        for (std::size_t i = 1; i < n; ++i) amp = std::max(amp, std::abs(v[i] - v[i - 1]));
        if (amp > 1e-6 * (1.0 + std::abs(v.back())))
            throw ExtrapolationUnstable("ridge ladder oscillates, amplitude " + std::to_string(amp));
        return v.back();
    }
    // Neville table for an expansion in powers of gamma, ratio 10
    std::vector<double> t = v;
    double pw = 10.0;
    for (std::size_t k = 1; k < n; ++k, pw *= 10.0)
        for (std::size_t i = n - 1; i >= k; --i) t[i] = t[i] + (t[i] - t[i - 1]) / (pw - 1.0);
    return t[n - 1];
}

double train_error_at(const ModelParams& p) {
    Solved s = solved(p);
    auto [T1, T2] = train_terms(s, p);
    return T1 + p.nu() * T2;
}

double test_error_at(const ModelParams& p) {
    Solved s = solved(p);
    auto [T1, T2] = train_terms(s, p);
    double gt = s.g * s.t1;
    return (T1 + p.nu() * T2) / (gt * gt) - label_noise_offset(p);
}

}  // namespace

double train_error(const ModelParams& p) {
    p.validate();
    if (!(p.gamma > 0.0)) throw InvalidParams("train_error needs gamma > 0");
    return train_error_at(p);
}

double test_error(const ModelParams& p) {
    p.validate();
    if (p.gamma == 0.0) return ridgeless_test_error(p);
    return test_error_at(p);
}

double ridgeless_test_error(const ModelParams& p) {
    p.validate();
    return richardson(p, test_error_at);
}

ErrorReport error_report(const ModelParams& p) {
    p.validate();
    ErrorReport r;
    if (p.gamma == 0.0) {
        r.e_train = richardson(p, train_error_at);
        r.e_test = richardson(p, test_error_at);
        return r;
    }
    Solved s = solved(p);
    auto [T1, T2] = train_terms(s, p);
    r.e_train = T1 + p.nu() * T2;
    double gt = s.g * s.t1;
    r.e_test = r.e_train / (gt * gt) - label_noise_offset(p);
    return r;
}

ErrorReport test_error_components(const ModelParams& p) {
    p.validate();
    if (!(p.gamma > 0.0)) throw InvalidParams("components need gamma > 0");
    Solved s = solved(p);
    const auto [phi, psi, s2, eta, zeta, etap] = coeffs(p);
    const double t1 = s.t1, t2 = s.t2, d1 = s.d1, d2 = s.d2, g = s.g;
    const double neff = p.effective_noise();
    std::map<std::string, double> c;
    c["E1"] = eta * s2;
    c["E21"] = 2.0 * (t2 / t1 - 1.0);
    c["E31"] = neff * (-d1 / (t1 * t1) - 1.0);
    c["E32"] = 1.0 - 2.0 * t2 / t1 - d2 / (t1 * t1);
    double a = zeta * (t2 - t1) + eta * t1;
    c["E22"] = 2.0 * zeta * (t2 / t1 - 1.0) +
               2.0 * psi * a * a * ((t2 - t1) * phi + zeta * t1 * t2 * s2) / (zeta * t1 * t1 * t2 * phi);
    c["E33"] = s2 * ((t1 + (s2 * (etap - zeta) + g) * d1 + s2 * zeta * d2) / (t1 * t1) - eta) - c["E22"];
    // nonlinear part of the teacher stays in the clean test label
    c["ET"] = p.snr_infinite ? 0.0 : p.teacher_eta - p.teacher_zeta;
    auto [T1, T2] = train_terms(s, p);
    c["T1"] = T1;
    c["T2"] = T2;
    double total = p.teacher_zeta * (1.0 + c["E21"] + c["E32"]) + c["E31"] + c["ET"] +
                   p.nu() * (c["E1"] + c["E22"] + c["E33"]);
    if (p.include_test_noise && !p.snr_infinite) total += p.noise;
    c["total"] = total;

    ErrorReport r;
    r.e_train = T1 + p.nu() * T2;
    r.e_test = total;
    r.components = std::move(c);
    return r;
}

std::pair<double, double> gcv_check(const ModelParams& p) {
    p.validate();
    if (!(p.gamma > 0.0)) throw InvalidParams("gcv_check needs gamma > 0");
    if (!p.centered) throw InvalidParams("gcv_check needs the centered model");
    double etr = train_error(p);
    TauSolution s = solve_tau_real(p.gamma, p);
    double gt = p.gamma * s.tau1.real();
    double gcv = etr / (gt * gt);
    return {gcv, test_error(p)};
}

}  // namespace tdlab
