#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdlab/asymptotics.hpp"
#include "tdlab/simulator.hpp"
#include "tdlab/trainer.hpp"

namespace tdlab {

// One fully-resolved experiment point description. Every key of the JSON
// schema maps to one field; unknown keys are rejected.
struct PointConfig {
    std::string label;
    std::string activation = "tanh";
    std::string teacher = "linear";
    std::string teacher_activation = "tanh";
    double phi = 1.0;
    double psi = 1.0;
    double gamma = 1e-3;
    double sw2 = 1.0;
    double noise = 0.0;
    bool centered = false;
    bool snr_infinite = false;
    bool include_test_noise = false;
    std::string route = "general";  // general | k1_ridgeless | k2_ridgeless | large_width | small_width
    // finite sizes; 0 means "not given"
    int m = 0, m_test = 1000, n0 = 0, n1 = 0, nt = 0;
    std::string features = "exact";
    // trainer
    double lr = 0.0;
    int max_steps = 10000;
    double plateau_tol = 1e-9;

    ModelParams model() const;
    SimConfig sim(int trials, std::uint64_t base_seed) const;
    TrainConfig train_config(std::uint64_t seed) const;
};

struct SweepConfig {
    PointConfig base;
    std::vector<nlohmann::json> series;  // partial overrides of base
    std::string axis;                    // n1 phi psi m gamma sw2 (empty: single point)
    std::vector<double> grid;
    std::string axis2;                   // phase diagram: n1_over_m
    std::vector<double> grid2;
    int trials = 10;
    std::uint64_t base_seed = 1;
    bool limits = false;
};

SweepConfig parse_config(const nlohmann::json& j);
SweepConfig load_config(const std::string& path);

// Applies `overrides` (same schema as the top-level point keys) to `base`.
PointConfig apply_overrides(PointConfig base, const nlohmann::json& overrides);

// Sets `axis` = v on a point, keeping the other ratios consistent:
// n1 and m move psi / phi through the finite sizes.
PointConfig at_axis(PointConfig p, const std::string& axis, double v);

// values list or {start, stop, num, log}
std::vector<double> parse_grid(const nlohmann::json& g);

}  // namespace tdlab
