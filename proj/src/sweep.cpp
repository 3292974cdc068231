#include <cmath>
#include <limits>

#include "tdlab/errors.hpp"
#include "tdlab/limits.hpp"
#include "tdlab/pool.hpp"
#include "tdlab/sweep.hpp"

namespace tdlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPoleWidth = 1e-6;

std::vector<std::string> point_columns() {
    return {"series", "activation", "centered", "m", "n0", "n1", "p", "phi", "psi", "gamma", "sw2", "noise"};
}

std::vector<std::string> point_fields(const PointConfig& p) {
    double pc = p.n0 > 0 && p.n1 > 0 ? double(p.n1) * (p.n0 + 1.0) : p.m > 0 ? p.model().param_count(p.m) : kNaN;
    return {p.label, p.activation, fmt_bool(p.centered), fmt((long long)p.m), fmt((long long)p.n0),
            fmt((long long)p.n1), fmt(pc), fmt(p.phi), fmt(p.psi), fmt(p.gamma), fmt(p.sw2), fmt(p.noise)};
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == ',') c = ';';
    return s;
}

// Runs f(i) into rows[i]; rows of unfinished points are dropped (interrupt).
template <class F>
void fill_rows(CsvTable& t, std::size_t n, int threads, F&& f) {
    std::vector<std::vector<std::string>> rows(n);
    std::vector<char> done(n, 0);
    parallel_for(n, threads, [&](std::size_t i) {
        rows[i] = f(i);
        done[i] = 1;
    }, &interrupt_flag());
    for (std::size_t i = 0; i < n; ++i)
        if (done[i]) t.add_row(std::move(rows[i]));
    if (interrupt_flag().load()) t.trailer.push_back("interrupted: " + std::to_string(t.rows.size()) + " of " +
                                                     std::to_string(n) + " rows");
}

struct TheoryValue {
    double tau1 = kNaN, tau2 = kNaN, e_train = kNaN, e_test = kNaN, e_comp = kNaN, e_gcv = kNaN;
    std::string route, flag;
};

TheoryValue theory_value(const PointConfig& pc) {
    TheoryValue v;
    ModelParams mp = pc.model();
    v.route = pc.route;
    if (pc.route == "k2_ridgeless") {
        mp.centered = true;
        if (std::abs(mp.phi - mp.psi) < kPoleWidth) {
            v.flag = "pole";
            return v;
        }
        v.e_test = limit_k2_ridgeless(mp);
    } else if (pc.route == "k1_ridgeless") {
        mp.centered = true;
        v.e_test = limit_k1_ridgeless(mp);
    } else if (pc.route == "large_width") {
        v.e_test = limit_large_width(mp);
    } else if (pc.route == "small_width") {
        v.e_test = limit_small_width(mp);
    } else if (mp.gamma == 0.0) {
        auto r = error_report(mp);
        v.e_train = r.e_train;
        v.e_test = r.e_test;
        v.route = "richardson";
    } else {
        TauSolution s = solve_tau_real(mp.gamma, mp);
        v.tau1 = s.tau1.real();
        v.tau2 = s.tau2.real();
        auto r = error_report(mp);
        v.e_train = r.e_train;
        v.e_test = r.e_test;
        v.e_comp = test_error_components(mp).e_test;
        if (mp.centered) v.e_gcv = gcv_check(mp).first - (mp.include_test_noise || mp.snr_infinite ? 0.0 : mp.noise);
        v.route = "eq21";
    }
    return v;
}

int trials_of(const SweepConfig& c, const RunOptions& o) { return o.trials > 0 ? o.trials : c.trials; }
std::uint64_t seed_of(const SweepConfig& c, const RunOptions& o) {
    return o.seed >= 0 ? std::uint64_t(o.seed) : c.base_seed;
}

}  // namespace

std::atomic<bool>& interrupt_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

std::vector<PointConfig> expand_points(const SweepConfig& c) {
    std::vector<PointConfig> bases;
    if (c.series.empty()) bases.push_back(c.base);
    for (const auto& s : c.series) bases.push_back(apply_overrides(c.base, s));
    std::vector<PointConfig> out;
    for (auto& b : bases) {
        if (b.label.empty()) b.label = b.activation + (b.centered ? "/centered" : "/uncentered");
        if (c.axis.empty()) {
            out.push_back(b);
            continue;
        }
        for (double v : c.grid) out.push_back(at_axis(b, c.axis, v));
    }
    return out;
}

CsvTable run_theory(const SweepConfig& c, const RunOptions& o) {
    auto pts = expand_points(c);
    CsvTable t;
    t.kind = "theory";
    t.columns = point_columns();
    for (const char* k : {"eta", "zeta", "eta_prime", "tau1", "tau2", "e_train", "e_test", "e_test_components",
                          "e_test_gcv", "route", "flag"})
        t.columns.push_back(k);
    if (c.limits)
        for (const char* k : {"lim_large_width", "lim_small_width", "lim_k1_ridgeless", "lim_k2_ridgeless"})
            t.columns.push_back(k);
    t.columns.push_back("error");

    fill_rows(t, pts.size(), o.threads, [&](std::size_t i) {
        const auto& pc = pts[i];
        auto row = point_fields(pc);
        TheoryValue v;
        std::string err;
        ActivationMoments mo;
        try {
            mo = pc.model().student;
            v = theory_value(pc);
        } catch (const std::exception& e) {
            err = one_line(e.what());
        }
        for (double x : {mo.eta, mo.zeta, mo.eta_prime, v.tau1, v.tau2, v.e_train, v.e_test, v.e_comp, v.e_gcv})
            row.push_back(fmt(x));
        row.push_back(v.route.empty() ? pc.route : v.route);
        row.push_back(v.flag);
        if (c.limits) {
            auto lim = [&](auto&& f) {
                try {
                    ModelParams mp = pc.model();
                    return fmt(f(mp));
                } catch (const std::exception&) {
                    return fmt(kNaN);
                }
            };
            row.push_back(lim([](ModelParams mp) { return limit_large_width(mp); }));
            row.push_back(lim([](ModelParams mp) { return limit_small_width(mp); }));
            row.push_back(lim([](ModelParams mp) { mp.centered = true; return limit_k1_ridgeless(mp); }));
            row.push_back(lim([](ModelParams mp) { mp.centered = true; return limit_k2_ridgeless(mp); }));
        }
        row.push_back(err);
        return row;
    });
    return t;
}

CsvTable run_limits(const SweepConfig& c, const RunOptions& o) {
    auto pts = expand_points(c);
    CsvTable t;
    t.kind = "limits";
    t.columns = point_columns();
    for (const char* k : {"e_test", "large_width", "small_width", "k1_ridgeless", "k2_ridgeless",
                          "large_dataset_order", "large_dataset_coef", "small_phi_order", "small_phi_coef", "error"})
        t.columns.push_back(k);
    fill_rows(t, pts.size(), o.threads, [&](std::size_t i) {
        const auto& pc = pts[i];
        auto row = point_fields(pc);
        std::string err;
        auto guard = [&](auto&& f) -> double {
            try {
                return f();
            } catch (const std::exception& e) {
                if (err.empty()) err = one_line(e.what());
                return kNaN;
            }
        };
        ModelParams mp;
        try {
            mp = pc.model();
        } catch (const std::exception& e) {
            err = one_line(e.what());
        }
        ModelParams cen = mp;
        cen.centered = true;
        double e = guard([&] { return test_error(mp); });
        double lw = guard([&] { return limit_large_width(mp); });
        double sw = guard([&] { return limit_small_width(mp); });
        double k1 = guard([&] { return limit_k1_ridgeless(cen); });
        double k2 = guard([&] { return limit_k2_ridgeless(cen); });
        AsymptoticTerm ld{0, kNaN}, sp{0, kNaN};
        guard([&] { ld = limit_large_dataset(mp); return 0.0; });
        guard([&] { sp = limit_small_phi(mp); return 0.0; });
        for (double x : {e, lw, sw, k1, k2}) row.push_back(fmt(x));
        row.push_back(fmt((long long)ld.order));
        row.push_back(fmt(ld.coefficient));
        row.push_back(fmt((long long)sp.order));
        row.push_back(fmt(sp.coefficient));
        row.push_back(err);
        return row;
    });
    return t;
}

namespace {

std::vector<std::string> sim_columns() {
    return {"series", "activation", "teacher", "centered", "features", "m", "m_test", "n0", "n1", "nt",
            "sw2", "noise", "gamma", "trials", "base_seed", "p"};
}

std::vector<std::string> sim_fields(const PointConfig& pc, int trials, std::uint64_t seed) {
    return {pc.label, pc.activation, pc.teacher, fmt_bool(pc.centered), pc.features, fmt((long long)pc.m),
            fmt((long long)pc.m_test), fmt((long long)pc.n0), fmt((long long)pc.n1), fmt((long long)pc.nt),
            fmt(pc.sw2), fmt(pc.noise), fmt(pc.gamma), fmt((long long)trials), fmt((long long)seed),
            fmt(double(pc.n1) * (pc.n0 + 1.0))};
}

CsvTable simulate_table(const SweepConfig& c, const RunOptions& o, bool with_z, double* max_z) {
    auto pts = expand_points(c);
    const int trials = trials_of(c, o);
    const std::uint64_t seed = seed_of(c, o);
    CsvTable t;
    t.kind = with_z ? "validate" : "simulate";
    t.columns = sim_columns();
    for (const char* k : {"mc_mean", "mc_stderr", "mc_train", "theory"}) t.columns.push_back(k);
    if (with_z) t.columns.push_back("z");
    t.columns.push_back("error");
    double zmax = 0.0;
    // trials run in parallel inside a point; points run in order
    for (const auto& pc : pts) {
        if (interrupt_flag().load()) {
            t.trailer.push_back("interrupted");
            break;
        }
        auto row = sim_fields(pc, trials, seed);
        std::string err;
        SimResult r{kNaN, kNaN, {}, kNaN};
        double th = kNaN;
        try {
            r = mc_test_error(pc.sim(trials, seed), trials, o.threads);
        } catch (const std::exception& e) {
            err = one_line(e.what());
        }
        try {
            th = theory_value(pc).e_test;
        } catch (const std::exception& e) {
            if (err.empty()) err = one_line(e.what());
        }
        for (double x : {r.mean, r.stderr_, r.train_mean, th}) row.push_back(fmt(x));
        if (with_z) {
            double z = (r.mean - th) / r.stderr_;
            if (std::isfinite(z)) zmax = std::max(zmax, std::abs(z));
            row.push_back(fmt(z));
        }
        row.push_back(err);
        t.add_row(std::move(row));
    }
    if (max_z) *max_z = zmax;
    return t;
}

}  // namespace

CsvTable run_simulate(const SweepConfig& c, const RunOptions& o) { return simulate_table(c, o, false, nullptr); }

ValidateReport run_validate(const SweepConfig& c, const RunOptions& o) {
    ValidateReport r;
    r.table = simulate_table(c, o, true, &r.max_abs_z);
    r.table.trailer.push_back("max_abs_z=" + fmt(r.max_abs_z) + " gate=" + fmt(kValidateGate));
    return r;
}

CsvTable run_phase_diagram(const SweepConfig& c, const RunOptions& o) {
    if (c.grid.empty() || c.grid2.empty()) throw ConfigError("phase needs grid (phi) and grid2 (n1_over_m)");
    if (!c.axis.empty() && c.axis != "phi") throw ConfigError("phase axis must be phi");
    CsvTable t;
    t.kind = "phase";
    t.columns = {"phi", "n1_over_m", "psi", "e_test", "flag", "error"};
    const std::size_t nx = c.grid.size(), ny = c.grid2.size();
    fill_rows(t, nx * ny, o.threads, [&](std::size_t i) {
        PointConfig pc = c.base;
        double phi = c.grid[i / ny], y = c.grid2[i % ny];
        pc.phi = phi;
        pc.psi = phi / y;
        pc.m = pc.n0 = pc.n1 = 0;
        TheoryValue v;
        std::string err;
        try {
            v = theory_value(pc);
        } catch (const std::exception& e) {
            err = one_line(e.what());
        }
        return std::vector<std::string>{fmt(phi), fmt(y), fmt(pc.psi), fmt(v.e_test), v.flag, err};
    });
    return t;
}

CsvTable run_train(const SweepConfig& c, const RunOptions& o) {
    const PointConfig& pc = c.base;
    const std::uint64_t seed = seed_of(c, o);
    TrainConfig tc = pc.train_config(seed);
    Dataset d = sample_dataset(tc.shape, {pc.teacher, pc.teacher_activation, pc.nt}, pc.noise, seed);
    Activation act = center(builtin(pc.activation));
    StudentInit s = sample_student(pc.n0, pc.n1, act, pc.sw2, seed);
    TrainResult tr = train(tc, d, s);

    KernelSet k = ntk_kernels(s, d.X, d.X_test, pc.gamma);
    auto kp = krr_predict(k, d.Y, k.N0, k.N0x, pc.centered);
    double krr = (d.Y_test_clean - kp.test).squaredNorm() / double(kp.test.size());

    CsvTable t;
    t.kind = "train";
    t.columns = {"step", "train_loss", "test_mse"};
    for (const auto& r : tr.trace) t.add_row({fmt((long long)r.step), fmt(r.train_loss), fmt(r.test_mse)});
    t.trailer.push_back("steps=" + std::to_string(tr.steps) + " plateaued=" + fmt_bool(tr.plateaued) +
                        " lr=" + fmt(tr.lr) + " lr_above_stability=" + fmt_bool(tr.lr_above_stability));
    t.trailer.push_back("gd_test_mse=" + fmt(tr.final_test_mse) + " krr_test_mse=" + fmt(krr));
    return t;
}

}  // namespace tdlab
