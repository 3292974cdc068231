#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tdlab/errors.hpp"
#include "tdlab/pool.hpp"
#include "tdlab/svg.hpp"
#include "tdlab/sweep.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kGate = 3, kInterrupted = 130 };

void on_sigint(int) { tdlab::interrupt_flag().store(true); }

void emit(const tdlab::CsvTable& t, const std::string& out) {
    if (out.empty() || out == "-") t.write(std::cout);
    else t.save(out);
}

void write_svg(const tdlab::CsvTable& t, const std::string& path) {
    // render first so a failure leaves no file behind
    std::string svg = tdlab::render_plot(t);
    std::ofstream f(path);
    if (!f) throw tdlab::ConfigError("cannot write '" + path + "'");
    f << svg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tdlab: NTK ridge regression asymptotics, sweeps and Monte Carlo checks"};
    app.require_subcommand(1);

    std::string config, out, svg_path, input, style = "auto";
    long long seed = -1;
    int trials = 0, threads = 0;

    auto add_common = [&](CLI::App* s, bool sim) {
        s->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
        s->add_option("--out", out, "CSV output (default stdout)");
        s->add_option("--svg", svg_path, "also render an SVG plot");
        s->add_option("--threads", threads, "worker threads (default TD_LAB_THREADS, else 1)")->check(CLI::PositiveNumber);
        if (sim) {
            s->add_option("--seed", seed, "base seed")->check(CLI::NonNegativeNumber);
            s->add_option("--trials", trials, "Monte Carlo trials per point")->check(CLI::PositiveNumber);
        }
    };
    auto* theory = app.add_subcommand("theory", "asymptotic errors over a grid");
    auto* limits = app.add_subcommand("limits", "closed-form limits next to the general solver");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo kernel regression");
    auto* train = app.add_subcommand("train", "gradient descent trace at one point");
    auto* validate = app.add_subcommand("validate", "theory vs Monte Carlo z-scores");
    auto* phase = app.add_subcommand("phase", "E_test over (phi, n1/m)");
    auto* plot = app.add_subcommand("plot", "render a CSV table as SVG");
    add_common(theory, false);
    add_common(limits, false);
    add_common(phase, false);
    add_common(simulate, true);
    add_common(validate, true);
    add_common(train, true);
    plot->add_option("csv", input, "table written by another subcommand")->required()->check(CLI::ExistingFile);
    plot->add_option("--svg,--out", svg_path, "SVG output")->required();
    plot->add_option("--style", style, "auto | log | linear");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    std::signal(SIGINT, on_sigint);
    try {
        if (plot->parsed()) {
            std::string s = tdlab::render_plot(tdlab::CsvTable::load(input), style);
            std::ofstream f(svg_path);
            if (!f) throw tdlab::ConfigError("cannot write '" + svg_path + "'");
            f << s;
            return kOk;
        }
        tdlab::SweepConfig cfg = tdlab::load_config(config);
        tdlab::RunOptions o;
        o.threads = tdlab::resolve_threads(threads);
        o.trials = trials;
        o.seed = seed;

        tdlab::CsvTable t;
        int rc = kOk;
        if (theory->parsed()) t = tdlab::run_theory(cfg, o);
        else if (limits->parsed()) t = tdlab::run_limits(cfg, o);
        else if (simulate->parsed()) t = tdlab::run_simulate(cfg, o);
        else if (phase->parsed()) t = tdlab::run_phase_diagram(cfg, o);
        else if (train->parsed()) t = tdlab::run_train(cfg, o);
        else if (validate->parsed()) {
            auto r = tdlab::run_validate(cfg, o);
            t = std::move(r.table);
            std::cerr << "max |z| = " << r.max_abs_z << "\n";
            if (r.max_abs_z > tdlab::kValidateGate) rc = kGate;
        }
        emit(t, out);
        if (!svg_path.empty() && !train->parsed()) write_svg(t, svg_path);
        if (tdlab::interrupt_flag().load()) return kInterrupted;
        return rc;
    } catch (const tdlab::ConfigError& e) {
        std::cerr << "tdlab: " << e.what() << "\n";
        return kUsage;
    } catch (const tdlab::NumericalError& e) {
        std::cerr << "tdlab: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "tdlab: " << e.what() << "\n";
        return kNumerical;
    }
}
