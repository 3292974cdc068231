#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tdlab/activations.hpp"

namespace tdlab {

using cplx = std::complex<double>;

struct ModelParams {
    double phi = 1.0;    // n0 / m
    double psi = 1.0;    // n0 / n1
    double gamma = 1e-3;
    double sw2 = 1.0;    // sigma^2_{W2}
    double noise = 0.0;  // sigma^2_eps
    bool centered = false;
    ActivationMoments student;
    double teacher_eta = 1.0;
    double teacher_zeta = 1.0;
    bool snr_infinite = false;       // drop the effective noise entirely
    bool include_test_noise = false;

    double nu() const { return centered ? 0.0 : 1.0; }
    // eta_T - zeta_T + sigma_eps^2, the noise seen by the induced linear teacher
    double effective_noise() const;
    double snr() const;
    // p = n1 (n0 + 1) for a dataset of size m
    double param_count(double m) const;
    void validate() const;
};

struct TauSolution {
    cplx tau1{};
    cplx tau2{};
    double dtau1 = 0.0;
    double dtau2 = 0.0;
    double ttau1 = 0.0;
    double ttau2 = 0.0;
    cplx z{};
};

struct ErrorReport {
    double e_train = 0.0;
    double e_test = 0.0;
    std::optional<std::map<std::string, double>> components;
};

// Both coupled polynomials at (tau1, tau2).
std::array<cplx, 2> tau_polynomials(cplx tau1, cplx tau2, cplx z, const ModelParams& p);
// Residual of each polynomial divided by the sum of |monomials|.
double tau_residual(cplx tau1, cplx tau2, cplx z, const ModelParams& p);

// Physical branch: Im tau * Im z < 0 (tau is a normalized trace of (K + z)^-1).
bool on_physical_branch(cplx tau1, cplx tau2, cplx z);

TauSolution solve_tau(cplx z, const ModelParams& p);
TauSolution solve_tau_real(double gamma, const ModelParams& p);

// Resultant in tau2 + companion matrix. Every finite nonzero solution pair.
std::vector<std::array<cplx, 2>> enumerate_tau_roots(cplx z, const ModelParams& p);
// Branch selection over enumerate_tau_roots.
TauSolution solve_tau_enumerate(cplx z, const ModelParams& p);

std::pair<double, double> tau_derivatives(const TauSolution& sol, const ModelParams& p);

double train_error(const ModelParams& p);
double test_error(const ModelParams& p);
ErrorReport error_report(const ModelParams& p);
// Keys: E1 E21 E22 E31 E32 E33 T1 T2 total.
ErrorReport test_error_components(const ModelParams& p);
// (gcv, e_test); requires centered.
std::pair<double, double> gcv_check(const ModelParams& p);

// Ridgeless value by Richardson extrapolation over gamma = 1e-3 .. 1e-6.
double ridgeless_test_error(const ModelParams& p);

}  // namespace tdlab
