#include <cmath>
#include <fstream>
#include <set>

#include "tdlab/config.hpp"
#include "tdlab/errors.hpp"

namespace tdlab {

using nlohmann::json;

namespace {

const std::set<std::string> kPointKeys = {
    "label", "activation", "teacher", "teacher_activation", "phi", "psi", "gamma", "sw2", "noise",
    "centered", "snr_infinite", "include_test_noise", "route", "m", "m_test", "n0", "n1", "nt",
    "features", "lr", "max_steps", "plateau_tol"};
const std::set<std::string> kTopKeys = {"series", "axis", "grid", "axis2", "grid2", "trials", "base_seed", "limits"};
const std::set<std::string> kAxes = {"n1", "phi", "psi", "m", "gamma", "sw2"};
const std::set<std::string> kRoutes = {"general", "k1_ridgeless", "k2_ridgeless", "large_width", "small_width"};

template <class T>
void take(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("key '") + key + "': " + e.what());
    }
}

}  // namespace

std::vector<double> parse_grid(const json& g) {
    std::vector<double> v;
    if (g.is_array()) {
        for (const auto& x : g) {
            if (!x.is_number()) throw ConfigError("grid values must be numbers");
            v.push_back(x.get<double>());
        }
    } else if (g.is_object()) {
        for (auto it = g.begin(); it != g.end(); ++it)
            if (it.key() != "start" && it.key() != "stop" && it.key() != "num" && it.key() != "log")
                throw ConfigError("unknown grid key '" + it.key() + "'");
        double a = g.at("start").get<double>(), b = g.at("stop").get<double>();
        int n = g.at("num").get<int>();
        bool lg = g.value("log", true);
        if (n < 1) throw ConfigError("grid num must be >= 1");
        if (lg && (a <= 0 || b <= 0)) throw ConfigError("log grid needs positive endpoints");
        for (int i = 0; i < n; ++i) {
            double t = n == 1 ? 0.0 : double(i) / (n - 1);
            v.push_back(lg ? std::exp(std::log(a) + t * (std::log(b) - std::log(a))) : a + t * (b - a));
        }
    } else {
        throw ConfigError("grid must be a list or {start, stop, num, log}");
    }
    if (v.empty()) throw ConfigError("grid is empty");
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        inc = inc && v[i] > v[i - 1];
        dec = dec && v[i] < v[i - 1];
    }
    if (!(inc || dec)) throw ConfigError("grid must be strictly monotone");
    return v;
}

PointConfig apply_overrides(PointConfig p, const json& j) {
    if (!j.is_object()) throw ConfigError("point overrides must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!kPointKeys.count(it.key())) throw ConfigError("unknown key '" + it.key() + "'");
    take(j, "label", p.label);
    take(j, "activation", p.activation);
    take(j, "teacher", p.teacher);
    take(j, "teacher_activation", p.teacher_activation);
    take(j, "phi", p.phi);
    take(j, "psi", p.psi);
    take(j, "gamma", p.gamma);
    take(j, "sw2", p.sw2);
    take(j, "noise", p.noise);
    take(j, "centered", p.centered);
    take(j, "snr_infinite", p.snr_infinite);
    take(j, "include_test_noise", p.include_test_noise);
    take(j, "route", p.route);
    take(j, "m", p.m);
    take(j, "m_test", p.m_test);
    take(j, "n0", p.n0);
    take(j, "n1", p.n1);
    take(j, "nt", p.nt);
    take(j, "features", p.features);
    take(j, "lr", p.lr);
    take(j, "max_steps", p.max_steps);
    take(j, "plateau_tol", p.plateau_tol);
    if (!kRoutes.count(p.route)) throw ConfigError("unknown route '" + p.route + "'");
    if (p.teacher != "linear" && p.teacher != "nonlinear") throw ConfigError("teacher must be linear or nonlinear");
    // sizes, when given, fix the ratios
    if (p.m > 0 && p.n0 > 0) p.phi = double(p.n0) / p.m;
    if (p.n0 > 0 && p.n1 > 0) p.psi = double(p.n0) / p.n1;
    return p;
}

SweepConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    SweepConfig c;
    json point = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (kTopKeys.count(it.key())) continue;
        if (!kPointKeys.count(it.key())) throw ConfigError("unknown key '" + it.key() + "'");
        point[it.key()] = it.value();
    }
    c.base = apply_overrides(PointConfig{}, point);
    if (j.contains("series")) {
        if (!j["series"].is_array()) throw ConfigError("series must be a list");
        for (const auto& s : j["series"]) {
            apply_overrides(c.base, s);  // validate early
            c.series.push_back(s);
        }
    }
    take(j, "axis", c.axis);
    if (!c.axis.empty() && !kAxes.count(c.axis)) throw ConfigError("unknown axis '" + c.axis + "'");
    if (j.contains("grid")) c.grid = parse_grid(j["grid"]);
    if (!c.axis.empty() && c.grid.empty()) throw ConfigError("axis given without grid");
    take(j, "axis2", c.axis2);
    if (!c.axis2.empty() && c.axis2 != "n1_over_m") throw ConfigError("axis2 must be n1_over_m");
    if (j.contains("grid2")) c.grid2 = parse_grid(j["grid2"]);
    take(j, "trials", c.trials);
    take(j, "base_seed", c.base_seed);
    take(j, "limits", c.limits);
    if (c.axis == "n1" && (c.base.m <= 0 || c.base.n0 <= 0)) throw ConfigError("axis n1 needs m and n0");
    if (c.axis == "m" && (c.base.n0 <= 0 || c.base.n1 <= 0)) throw ConfigError("axis m needs n0 and n1");
    return c;
}

SweepConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

PointConfig at_axis(PointConfig p, const std::string& axis, double v) {
    if (axis.empty()) return p;
    if (axis == "n1") {
        p.n1 = int(std::lround(v));
        p.psi = double(p.n0) / p.n1;
    } else if (axis == "m") {
        p.m = int(std::lround(v));
        p.phi = double(p.n0) / p.m;
    } else if (axis == "phi") {
        p.phi = v;
        if (p.m > 0) p.n0 = int(std::lround(v * p.m));
    } else if (axis == "psi") {
        p.psi = v;
        if (p.n0 > 0) p.n1 = int(std::lround(p.n0 / v));
    } else if (axis == "gamma") {
        p.gamma = v;
    } else if (axis == "sw2") {
        p.sw2 = v;
    } else {
        throw ConfigError("unknown axis '" + axis + "'");
    }
    return p;
}

ModelParams PointConfig::model() const {
    ModelParams mp;
    mp.phi = phi;
    mp.psi = psi;
    mp.gamma = gamma;
    mp.sw2 = sw2;
    mp.noise = noise;
    mp.centered = centered;
    mp.student = moments(center(builtin(activation)));
    TeacherSpec t{teacher, teacher_activation, nt};
    auto [te, tz] = t.moments();
    mp.teacher_eta = te;
    mp.teacher_zeta = tz;
    mp.snr_infinite = snr_infinite;
    mp.include_test_noise = include_test_noise;
    return mp;
}

SimConfig PointConfig::sim(int trials, std::uint64_t base_seed) const {
    if (m <= 0 || n0 <= 0 || n1 <= 0) throw ConfigError("simulation needs m, n0 and n1");
    SimConfig s;
    s.shape = {m, m_test, n0, n1, nt};
    s.activation = activation;
    s.teacher = {teacher, teacher_activation, nt};
    s.sw2 = sw2;
    s.noise = noise;
    s.gamma = gamma;
    s.centered = centered;
    s.include_test_noise = include_test_noise;
    s.features = features;
    s.trials = trials;
    s.base_seed = base_seed;
    return s;
}

TrainConfig PointConfig::train_config(std::uint64_t seed) const {
    if (m <= 0 || n0 <= 0 || n1 <= 0) throw ConfigError("training needs m, n0 and n1");
    TrainConfig t;
    t.shape = {m, m_test, n0, n1, nt};
    t.lr = lr;
    t.l2 = gamma;
    t.max_steps = max_steps;
    t.plateau_tol = plateau_tol;
    t.centered = centered;
    t.seed = seed;
    return t;
}

}  // namespace tdlab
