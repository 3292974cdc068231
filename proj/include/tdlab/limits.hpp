#pragma once

#include "tdlab/asymptotics.hpp"

namespace tdlab {

struct LimitConstants {
    double rho = 0.0;     // zeta (1 + sw2)
    double xi = 0.0;      // gamma + eta + sw2 eta'
    double chi0 = 0.0;
    double xi1 = 0.0;     // eta' + gamma / sw2 (NaN when sw2 = 0)
    double chi1 = 0.0;
    double chibar = 0.0;
    double omega = 0.0;   // max(phi, psi)
    double beta = 0.0;
    double chi = 0.0;
    double tau_ld = 0.0;  // gamma + sw2 (eta' - zeta)
    double kappa = 0.0;   // zeta psi + (eta - zeta) psi^2
};

// Radicands are not checked here; NaN marks an invalid one.
LimitConstants limit_constants(const ModelParams& p);

// n1 >> m: depends on phi only.
double limit_large_width(const ModelParams& p);
// n1 << m
double limit_small_width(const ModelParams& p);

struct AsymptoticTerm {
    int order = 1;          // power of the small ratio
    double coefficient = 0.0;
};

// m >> n1: E_test ~ coefficient (phi/psi)^order
AsymptoticTerm limit_large_dataset(const ModelParams& p);
// phi -> 0 at large width: E_test ~ coefficient phi^order
AsymptoticTerm limit_small_phi(const ModelParams& p);

// sw2 -> infinity at psi = 0 (first-layer kernel alone), centered only.
double limit_k1_ridgeless(const ModelParams& p);
// sw2 -> 0, gamma -> 0 (random-features kernel alone), centered only.
// Throws Divergent at phi == psi.
double limit_k2_ridgeless(const ModelParams& p);

}  // namespace tdlab
