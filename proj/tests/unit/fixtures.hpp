#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "tdlab/asymptotics.hpp"

#ifndef TDLAB_FIXTURES
#error "TDLAB_FIXTURES must point at tests/fixtures"
#endif

inline nlohmann::json load_fixture(const std::string& name) {
    std::ifstream in(std::string(TDLAB_FIXTURES) + "/" + name);
    if (!in) throw std::runtime_error("missing fixture " + name);
    return nlohmann::json::parse(in);
}

inline tdlab::ModelParams params(const std::string& act, double phi, double psi, double gamma, double sw2,
                                 double noise, bool centered = false) {
    tdlab::ModelParams p;
    p.phi = phi;
    p.psi = psi;
    p.gamma = gamma;
    p.sw2 = sw2;
    p.noise = noise;
    p.centered = centered;
    p.student = tdlab::moments(tdlab::center(tdlab::builtin(act)));
    return p;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
