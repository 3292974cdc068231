#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "tdlab/errors.hpp"

using namespace tdlab;

namespace {

ModelParams golden_params(const nlohmann::json& g) {
    return params("tanh", g["phi"], g["psi"], 1e-3, g["sw2"], 0.0);
}

}  // namespace

TEST(Tau, MatchesEnumerationOracle) {
    auto all = load_fixture("tau_golden.json");
    for (auto& [name, g] : all.items()) {
        SCOPED_TRACE(name);
        ModelParams p = golden_params(g);
        cplx z(g["z_re"], g["z_im"]);
        TauSolution s = solve_tau(z, p);
        cplx t1(g["tau1_re"], g["tau1_im"]), t2(g["tau2_re"], g["tau2_im"]);
        EXPECT_LT(std::abs(s.tau1 - t1) / std::abs(t1), 1e-12);
        EXPECT_LT(std::abs(s.tau2 - t2) / std::abs(t2), 1e-12);
        EXPECT_LT(tau_residual(s.tau1, s.tau2, z, p), 1e-12);
        EXPECT_TRUE(on_physical_branch(s.tau1, s.tau2, z));
    }
}

TEST(Tau, EnumerationFindsUniqueBranchRoot) {
    auto g = load_fixture("tau_golden.json")["phi2_psi1_g01"];
    ModelParams p = golden_params(g);
    cplx z(g["z_re"], g["z_im"]);
    auto roots = enumerate_tau_roots(z, p);
    EXPECT_GE(roots.size(), 2u);
    int on_branch = 0;
    for (auto& r : roots) on_branch += on_physical_branch(r[0], r[1], z);
    EXPECT_EQ(on_branch, 1);
    TauSolution e = solve_tau_enumerate(z, p);
    EXPECT_LT(std::abs(e.tau1 - cplx(g["tau1_re"], g["tau1_im"])), 1e-10);
}

TEST(Tau, LargeZBehavesLikeInverse) {
    // tau ~ 1/z as |z| -> infinity
    ModelParams p = params("tanh", 1.5, 0.7, 1.0, 1.0, 0.0);
    cplx z(1e6, 1.0);
    auto s = solve_tau(z, p);
    EXPECT_NEAR(std::abs(s.tau1 * z), 1.0, 1e-4);
    EXPECT_NEAR(std::abs(s.tau2 * z), 1.0, 1e-4);
}

TEST(Tau, ImaginaryInfinityApproachesInverse) {
    // z*tau - 1 = O(1/|z|)
    ModelParams p = params("tanh", 1.0, 0.5, 1.0, 1.0, 0.0);
    double r[2];
    for (int k = 0; k < 2; ++k) {
        cplx z(0.0, k ? 1e7 : 1e6);
        auto s = solve_tau(z, p);
        r[k] = std::abs(s.tau1 * z - 1.0);
        EXPECT_LT(std::abs(s.tau2 * z - 1.0), 10.0 / std::abs(z));
    }
    EXPECT_LT(r[0], 10.0 / 1e6);
    EXPECT_NEAR(r[0] / r[1], 10.0, 0.5);
}

TEST(Tau, DecreasesAlongRealAxis) {
    ModelParams p = params("tanh", 1.0, 0.5, 1.0, 1.0, 0.0);
    EXPECT_GT(solve_tau(cplx(1.0, 1e-9), p).tau1.real(), solve_tau(cplx(2.0, 1e-9), p).tau1.real());
}

TEST(Tau, RealSolutionAndDerivatives) {
    ModelParams p = params("erf", 0.8, 2.5, 0.05, 0.5, 0.0);
    auto s = solve_tau_real(p.gamma, p);
    EXPECT_EQ(s.tau1.imag(), 0.0);
    const double h = 1e-5 * p.gamma;
    auto a = solve_tau_real(p.gamma + h, p), b = solve_tau_real(p.gamma - h, p);
    EXPECT_LT(rel(s.dtau1, (a.tau1.real() - b.tau1.real()) / (2 * h)), 1e-6);
    EXPECT_LT(rel(s.dtau2, (a.tau2.real() - b.tau2.real()) / (2 * h)), 1e-6);
    EXPECT_THROW(solve_tau_real(0.0, p), InvalidParams);
}

TEST(Errors, MatchPythonOracle) {
    auto pts = load_fixture("errors_golden.json")["points"];
    for (const auto& g : pts) {
        ModelParams p = params(g["activation"], g["phi"], g["psi"], g["gamma"], g["sw2"], g["noise"], g["centered"]);
        SCOPED_TRACE(g.dump());
        auto r = error_report(p);
        EXPECT_LT(rel(r.e_test, g["e_test"]), 1e-7);
        // tiny training errors lose digits to the epsilon ladder in the oracle
        EXPECT_NEAR(r.e_train, double(g["e_train"]), 1e-7 * (1 + std::abs(double(g["e_train"]))));
        auto s = solve_tau_real(p.gamma, p);
        EXPECT_LT(rel(s.tau1.real(), g["tau1"]), 1e-9);
        EXPECT_LT(rel(s.dtau2, g["dtau2"]), 1e-6);
    }
}

TEST(Errors, ComponentRouteMatchesDirect) {
    for (bool centered : {false, true}) {
        ModelParams p = params("tanh", 2.0, 0.6, 0.3, 1.3, 0.5, centered);
        auto c = test_error_components(p);
        ASSERT_TRUE(c.components.has_value());
        for (const char* k : {"E1", "E21", "E22", "E31", "E32", "E33", "ET", "T1", "T2", "total"})
            EXPECT_TRUE(c.components->count(k)) << k;
        EXPECT_LT(rel(c.e_test, test_error(p)), 1e-9);
    }
}

TEST(Errors, GcvRouteMatchesDirect) {
    ModelParams p = params("relu_centered", 0.7, 1.9, 0.2, 0.8, 1.0, true);
    auto [gcv, e] = gcv_check(p);
    EXPECT_LT(rel(e, test_error(p)), 1e-9);
    EXPECT_GT(gcv, e);
    p.centered = false;
    EXPECT_THROW(gcv_check(p), InvalidParams);
}

TEST(Errors, NonlinearTeacherActsAsExtraNoise) {
    ModelParams lin = params("tanh", 1.2, 0.9, 0.1, 1.0, 0.3);
    ModelParams nl = lin;
    nl.teacher_eta = 0.8;
    nl.teacher_zeta = 0.5;
    // zeta_T times a linear teacher at noise n_eff / zeta_T, plus the unlearnable eta_T - zeta_T
    ModelParams scaled = lin;
    scaled.noise = nl.effective_noise() / nl.teacher_zeta;
    scaled.centered = nl.centered = true;
    double expect = nl.teacher_zeta * test_error(scaled) + (nl.teacher_eta - nl.teacher_zeta);
    EXPECT_LT(rel(test_error(nl), expect), 1e-9);
}

TEST(Errors, HugeRidgeGivesNullPredictor) {
    // gamma -> infinity: the predictor vanishes and E_test -> E[y^2] - noise = 1
    ModelParams p = params("tanh", 1.0, 1.0, 1e8, 1.0, 0.0, true);
    EXPECT_NEAR(test_error(p), 1.0, 1e-6);
}

TEST(Errors, RidgelessExtrapolation) {
    ModelParams p = params("tanh", 2.0, 1.0, 0.0, 1.0, 1.0);
    double e0 = test_error(p);
    ModelParams q = p;
    q.gamma = 1e-6;
    EXPECT_NEAR(e0, test_error(q), 1e-4);
    EXPECT_EQ(e0, ridgeless_test_error(p));
}

TEST(Errors, SnrFlags) {
    ModelParams p = params("tanh", 1.5, 0.5, 0.01, 1.0, 0.7);
    ModelParams inc = p;
    inc.include_test_noise = true;
    EXPECT_NEAR(test_error(inc) - test_error(p), p.noise, 1e-12);
    ModelParams inf = p;
    inf.snr_infinite = true;
    ModelParams clean = p;
    clean.noise = 0.0;
    EXPECT_LT(rel(test_error(inf), test_error(clean)), 1e-12);
}

TEST(Params, ValidationAndDerivedQuantities) {
    ModelParams p = params("tanh", 2.0, 0.5, 0.1, 1.0, 0.25);
    EXPECT_DOUBLE_EQ(p.param_count(1000), 4000.0 * (2000.0 + 1.0));
    EXPECT_DOUBLE_EQ(p.snr(), 4.0);
    EXPECT_EQ(p.nu(), 1.0);
    p.phi = -1;
    EXPECT_THROW(p.validate(), InvalidParams);
    p.phi = 1;
    p.sw2 = -0.1;
    EXPECT_THROW(test_error(p), InvalidParams);
}
