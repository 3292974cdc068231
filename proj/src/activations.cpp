#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "tdlab/activations.hpp"
#include "tdlab/errors.hpp"

namespace tdlab {

namespace {

constexpr double kFdStep = 1e-5;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
const double kTwoOverSqrtPi = 2.0 / std::sqrt(std::numbers::pi);

const QuadratureRule& cached_rule(int n, const std::vector<double>& breaks) {
    static std::mutex mu;
    static std::map<std::pair<int, std::vector<double>>, QuadratureRule> cache;
    std::lock_guard lock(mu);
    auto key = std::make_pair(n, breaks);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, gaussian_panel_rule(n, breaks)).first;
    return it->second;
}

double checked(double v, const char* what, const std::string& name) {
    if (!std::isfinite(v)) throw NonFinite(std::string(what) + " of " + name);
    return v;
}

}  // namespace

double Activation::second_derivative(double x) const {
    if (d2f) return d2f(x);
    if (d2_zero_ae) return 0.0;
    return (df(x + kFdStep) - df(x - kFdStep)) / (2.0 * kFdStep);
}

void to_json(nlohmann::json& j, const ActivationMoments& m) {
    j = {{"eta", m.eta}, {"zeta", m.zeta}, {"eta_prime", m.eta_prime},
         {"zeta_prime", m.zeta_prime}, {"mean", m.mean}};
}

void from_json(const nlohmann::json& j, ActivationMoments& m) {
    m.eta = j.at("eta").get<double>();
    m.zeta = j.at("zeta").get<double>();
    m.eta_prime = j.at("eta_prime").get<double>();
    m.zeta_prime = j.value("zeta_prime", 0.0);
    m.mean = j.value("mean", 0.0);
}

ActivationMoments moments(const Activation& act, int n) {
    const auto& q = cached_rule(n, act.breaks);
    ActivationMoments m;
    m.mean = checked(q.expect(act.f), "E sigma", act.name);
    m.eta = checked(q.expect([&](double x) { double v = act.f(x); return v * v; }), "E sigma^2", act.name);
    double d1 = checked(q.expect(act.df), "E sigma'", act.name);
    m.zeta = d1 * d1;
    m.eta_prime = checked(q.expect([&](double x) { double v = act.df(x); return v * v; }),
                          "E sigma'^2", act.name);
    double d2 = act.d2_zero_ae && !act.d2f
                    ? 0.0
                    : checked(q.expect([&](double x) { return act.second_derivative(x); }),
                              "E sigma''", act.name);
    m.zeta_prime = d2 * d2;
    return m;
}

Activation make_activation(std::string name, ScalarFn f, ScalarFn df, std::vector<double> breaks) {
    Activation a;
    a.name = std::move(name);
    a.f = std::move(f);
    a.df = std::move(df);
    a.breaks = std::move(breaks);
    return a;
}

std::vector<std::string> builtin_names() {
    return {"linear", "relu_centered", "tanh", "erf", "double_erf"};
}

Activation builtin(const std::string& name, const std::vector<double>& params) {
    Activation a;
    a.name = name;
    if (name == "linear") {
        a.f = [](double x) { return x; };
        a.df = [](double) { return 1.0; };
        a.d2f = [](double) { return 0.0; };
    } else if (name == "relu_centered") {
        a.f = [](double x) { return std::max(x, 0.0) - kInvSqrt2Pi; };
        a.df = [](double x) { return x > 0.0 ? 1.0 : 0.0; };
        a.d2_zero_ae = true;
        a.breaks = {0.0};
    } else if (name == "tanh") {
        a.f = [](double x) { return std::tanh(x); };
        a.df = [](double x) { double c = std::cosh(x); return 1.0 / (c * c); };
        a.d2f = [](double x) { double c = std::cosh(x); return -2.0 * std::tanh(x) / (c * c); };
    } else if (name == "erf") {
        a.f = [](double x) { return std::erf(x); };
        a.df = [](double x) { return kTwoOverSqrtPi * std::exp(-x * x); };
        a.d2f = [](double x) { return -2.0 * x * kTwoOverSqrtPi * std::exp(-x * x); };
    } else if (name == "double_erf") {
        // c (erf(s(x+o)) + erf(s(x-o))), c fixed so that zeta = 1/4
        double s = params.size() > 0 ? params[0] : 6.0;
        double o = params.size() > 1 ? params[1] : 1.0;
        auto d0 = [s, o](double x) {
            return s * kTwoOverSqrtPi * (std::exp(-s * s * (x + o) * (x + o)) + std::exp(-s * s * (x - o) * (x - o)));
        };
        // zeta scales as c^2, so the root of zeta(c) = 1/4 is explicit
        const auto& q = cached_rule(kDefaultQuadratureNodes, {-o, o});
        double c = 0.5 / std::abs(q.expect(d0));
        a.f = [=](double x) { return c * (std::erf(s * (x + o)) + std::erf(s * (x - o))); };
        a.df = [=](double x) { return c * d0(x); };
        a.d2f = [=](double x) {
            double u = x + o, v = x - o;
            return -2.0 * c * s * s * s * kTwoOverSqrtPi * (u * std::exp(-s * s * u * u) + v * std::exp(-s * s * v * v));
        };
        a.breaks = {-o, o};
    } else {
        throw UnknownActivation("'" + name + "'");
    }
    return a;
}

Activation center(const Activation& act) {
    double mu = moments(act).mean;
    Activation c = act;
    auto f = act.f;
    c.f = [f, mu](double x) { return f(x) - mu; };
    return c;
}

}  // namespace tdlab
