#pragma once

#include <atomic>
#include <string>

#include "tdlab/config.hpp"
#include "tdlab/csv.hpp"

namespace tdlab {

// Set from a SIGINT handler; sweeps stop dispatching and keep finished rows.
std::atomic<bool>& interrupt_flag();

struct RunOptions {
    int threads = 1;
    int trials = 0;               // 0 -> config value
    long long seed = -1;          // < 0 -> config value
};

// Points in order: series-major, then grid.
std::vector<PointConfig> expand_points(const SweepConfig& c);

CsvTable run_theory(const SweepConfig& c, const RunOptions& o = {});
CsvTable run_limits(const SweepConfig& c, const RunOptions& o = {});
CsvTable run_simulate(const SweepConfig& c, const RunOptions& o = {});

struct ValidateReport {
    CsvTable table;
    double max_abs_z = 0.0;
};
ValidateReport run_validate(const SweepConfig& c, const RunOptions& o = {});

CsvTable run_phase_diagram(const SweepConfig& c, const RunOptions& o = {});

// Trace of one gradient-descent run; trailer compares with kernel regression.
CsvTable run_train(const SweepConfig& c, const RunOptions& o = {});

// Gate used by `validate`: nonzero exit iff max |z| exceeds this.
inline constexpr double kValidateGate = 4.0;

}  // namespace tdlab
