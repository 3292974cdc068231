#include <cmath>
#include <limits>

#include "tdlab/errors.hpp"
#include "tdlab/limits.hpp"

namespace tdlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double root(double radicand, const char* what) {
    if (!(radicand >= 0.0)) throw NegativeRadicand(std::string(what) + " radicand " + std::to_string(radicand));
    return std::sqrt(radicand);
}

double radical(double a, double b) {
    double r = a * a - b;
    return r >= 0.0 ? std::sqrt(r) : kNaN;
}

// Closed forms are written for a linear teacher with unit signal:
// E = S + nu N + G / SNR. For a general teacher the signal part scales with
// zeta_T, the noise part with the effective noise, and the nonlinear part of
// the teacher adds eta_T - zeta_T.
double assemble(const ModelParams& p, double S, double N, double G) {
    double v = p.teacher_zeta * S + p.nu() * N + p.effective_noise() * G;
    if (!p.snr_infinite) {
        v += p.teacher_eta - p.teacher_zeta;
        if (p.include_test_noise) v += p.noise;
    }
    return v;
}

void require_centered(const ModelParams& p, const char* what) {
    if (!p.centered) throw InvalidParams(std::string(what) + " is defined for the centered model only");
}

}  // namespace

LimitConstants limit_constants(const ModelParams& p) {
    const double phi = p.phi, psi = p.psi, g = p.gamma, s2 = p.sw2;
    const double eta = p.student.eta, zeta = p.student.zeta, etap = p.student.eta_prime;
    LimitConstants c;
    c.rho = zeta * (1.0 + s2);
    c.xi = g + eta + s2 * etap;
    c.chi0 = radical(c.rho + c.xi * phi, 4.0 * phi * c.rho * c.rho);
    c.xi1 = s2 > 0.0 ? etap + g / s2 : kNaN;
    c.chi1 = s2 > 0.0 ? radical(zeta + c.xi1 * phi, 4.0 * phi * zeta * zeta) : kNaN;
    c.chibar = radical(zeta + etap * phi, 4.0 * phi * zeta * zeta);
    c.omega = std::max(phi, psi);
    c.chi = radical(zeta + c.omega * eta, 4.0 * c.omega * zeta * zeta);
    c.beta = zeta + c.omega * eta - c.chi;
    c.tau_ld = g + s2 * (etap - zeta);
    c.kappa = zeta * psi + (eta - zeta) * psi * psi;
    return c;
}

double limit_large_width(const ModelParams& p) {
    p.validate();
    const double phi = p.phi, s2 = p.sw2, eta = p.student.eta, zeta = p.student.zeta;
    LimitConstants c = limit_constants(p);
    const double rho = c.rho, xi = c.xi;
    double chi0 = root((rho + xi * phi) * (rho + xi * phi) - 4.0 * phi * rho * rho, "chi0");
    double S = (chi0 * (phi - 1.0) + xi * phi * (1.0 + phi) + rho * (1.0 - 3.0 * phi)) / (2.0 * phi * chi0);
    double N = s2 / (2.0 * phi * chi0) * ((eta * phi + zeta) * (rho + xi * phi) - 4.0 * zeta * rho * phi) +
               s2 / (2.0 * phi) * (eta * phi - zeta);
    double G = (phi * xi + rho - chi0) / (2.0 * chi0);
    return assemble(p, S, N, G);
}

double limit_small_width(const ModelParams& p) {
    p.validate();
    if (p.sw2 == 0.0) throw ZeroSw2("small-width limit needs sw2 > 0");
    const double phi = p.phi, zeta = p.student.zeta;
    const double xi1 = p.student.eta_prime + p.gamma / p.sw2;
    double chi1 = root((zeta + xi1 * phi) * (zeta + xi1 * phi) - 4.0 * phi * zeta * zeta, "chi1");
    double S = (chi1 * (phi - 1.0) + xi1 * phi * (1.0 + phi) + zeta * (1.0 - 3.0 * phi)) / (2.0 * phi * chi1);
    double G = (phi * xi1 + zeta - chi1) / (2.0 * chi1);
    // the initial function does not survive at vanishing width
    return assemble(p, S, 0.0, G);
}

AsymptoticTerm limit_large_dataset(const ModelParams& p) {
    p.validate();
    double snr = p.snr();
    if (std::isfinite(snr)) return {1, (1.0 + p.psi) / snr};
    const double eta = p.student.eta, zeta = p.student.zeta, s2 = p.sw2;
    if (!(eta > zeta)) throw DegenerateMoments("SNR=inf large-dataset limit needs eta > zeta");
    if (!(s2 > 0.0)) throw ZeroSw2("SNR=inf large-dataset limit needs sw2 > 0");
    LimitConstants c = limit_constants(p);
    double s4 = s2 * s2;
    double coef = c.tau_ld * c.tau_ld * (p.nu() * zeta * zeta * s4 + c.kappa) / ((eta - zeta) * zeta * zeta * s4);
    return {2, p.teacher_zeta * coef};
}

AsymptoticTerm limit_small_phi(const ModelParams& p) {
    p.validate();
    double snr = p.snr();
    if (std::isfinite(snr)) return {1, 1.0 / snr};
    LimitConstants c = limit_constants(p);
    double r = 1.0 - c.xi / c.rho;
    return {2, p.teacher_zeta * r * r};
}

double limit_k1_ridgeless(const ModelParams& p) {
    p.validate();
    require_centered(p, "K1 ridgeless limit");
    const double phi = p.phi, zeta = p.student.zeta, etap = p.student.eta_prime;
    double cb = root((zeta + etap * phi) * (zeta + etap * phi) - 4.0 * phi * zeta * zeta, "chibar");
    if (cb == 0.0) throw Divergent("chibar = 0 (linear activation at phi = 1)");
    double S = (cb * (phi - 1.0) + etap * phi * (1.0 + phi) + zeta * (1.0 - 3.0 * phi)) / (2.0 * phi * cb);
    double G = (phi * etap + zeta - cb) / (2.0 * cb);
    return assemble(p, S, 0.0, G);
}

double limit_k2_ridgeless(const ModelParams& p) {
    p.validate();
    require_centered(p, "K2 ridgeless limit");
    const double phi = p.phi, psi = p.psi, eta = p.student.eta, zeta = p.student.zeta;
    const double gap = std::abs(phi - psi);
    if (gap <= 1e-14 * std::max(phi, psi)) throw Divergent("interpolation pole at phi = psi");
    const double w = std::max(phi, psi);
    double chi = root((zeta + w * eta) * (zeta + w * eta) - 4.0 * w * zeta * zeta, "chi");
    double beta = zeta + w * eta - chi;
    double S = (2.0 * w * zeta - beta) / (2.0 * zeta * gap);
    double G = phi / gap;
    if (phi > psi) {
        S += -beta * (eta - zeta) / (2.0 * zeta * chi);
        G += (beta - 2.0 * chi) / (2.0 * chi);
    }
    return assemble(p, S, 0.0, G);
}

}  // namespace tdlab
