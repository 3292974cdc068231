#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tdlab {

using ScalarFn = std::function<double(double)>;

// Rule for E_{Z~N(0,1)} f(Z): sum_i w_i f(x_i).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    double expect(const ScalarFn& f) const;
};

// Golub-Welsch on the probabilists' Hermite recurrence; weights sum to 1.
QuadratureRule gauss_hermite_rule(int n);

// Gaussian-weighted composite Gauss-Legendre on [-12, 12]. Panels have unit
// width and are additionally split at `breaks` (kinks, steep fronts), so
// non-smooth activations integrate to machine precision.
QuadratureRule gaussian_panel_rule(int n_per_panel, const std::vector<double>& breaks = {});

struct Activation {
    std::string name;
    ScalarFn f;
    ScalarFn df;
    ScalarFn d2f;                  // empty -> central difference of df
    std::vector<double> breaks;    // points where f or df is not smooth
    bool d2_zero_ae = false;       // sigma'' = 0 almost everywhere (ReLU)

    double operator()(double x) const { return f(x); }
    double second_derivative(double x) const;
};

struct ActivationMoments {
    double eta = 1.0;
    double zeta = 1.0;
    double eta_prime = 1.0;
    double zeta_prime = 0.0;
    double mean = 0.0;
};

void to_json(nlohmann::json& j, const ActivationMoments& m);
void from_json(const nlohmann::json& j, ActivationMoments& m);

inline constexpr int kDefaultQuadratureNodes = 201;

// Throws NonFinite when a quadrature sum blows up.
ActivationMoments moments(const Activation& act, int n = kDefaultQuadratureNodes);

// linear, relu_centered, tanh, erf, double_erf.
// double_erf takes optional params {sharpness=6, offset=1}.
Activation builtin(const std::string& name, const std::vector<double>& params = {});
std::vector<std::string> builtin_names();

Activation center(const Activation& act);

// Activation from just f and f'; f'' by finite differences.
Activation make_activation(std::string name, ScalarFn f, ScalarFn df,
                           std::vector<double> breaks = {});

}  // namespace tdlab
