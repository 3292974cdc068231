#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "tdlab/errors.hpp"
#include "tdlab/limits.hpp"

using namespace tdlab;

TEST(Limits, K2RidgelessGoldens) {
    for (const auto& g : load_fixture("errors_golden.json")["k2_ridgeless"]) {
        ModelParams p = params(g["activation"], g["phi"], g["psi"], 0.0, 0.0, g["noise"], true);
        p.snr_infinite = g["snr_infinite"];
        SCOPED_TRACE(g.dump());
        EXPECT_LT(rel(limit_k2_ridgeless(p), g["value"]), 1e-12);
    }
}

TEST(Limits, K2RidgelessPoleAndCentering) {
    ModelParams p = params("tanh", 1.0, 1.0, 0.0, 0.0, 1.0, true);
    EXPECT_THROW(limit_k2_ridgeless(p), Divergent);
    p.psi = 1.001;
    double near = limit_k2_ridgeless(p);
    p.psi = 2.0;
    EXPECT_GT(near, 50 * limit_k2_ridgeless(p));
    p.centered = false;
    EXPECT_THROW(limit_k2_ridgeless(p), InvalidParams);
}

TEST(Limits, LargeWidthMatchesGeneralSolver) {
    ModelParams p = params("tanh", 1.5, 1e6, 0.1, 1.0, 0.5);
    // psi -> infinity is n1 -> 0; large width is psi -> 0
    p.psi = 1e-6;
    EXPECT_LT(rel(test_error(p), limit_large_width(p)), 1e-3);
}

TEST(Limits, SmallWidthMatchesGeneralSolver) {
    ModelParams p = params("tanh", 1.5, 1e6, 0.1, 1.0, 0.5);
    EXPECT_LT(rel(test_error(p), limit_small_width(p)), 1e-3);
    p.sw2 = 0.0;
    EXPECT_THROW(limit_small_width(p), ZeroSw2);
}

TEST(Limits, K1RidgelessMatchesLargeSw2) {
    ModelParams p = params("tanh", 0.7, 1e-6, 0.0, 1e6, 1.0, true);
    ModelParams q = p;
    q.gamma = 1e-6;
    double g = test_error(q);
    EXPECT_LT(rel(g, limit_k1_ridgeless(p)), 1e-2);
}

TEST(Limits, LargeDatasetTerm) {
    ModelParams p = params("tanh", 1e-3, 1.0, 1e-3, 1.0, 1.0);
    auto t = limit_large_dataset(p);
    EXPECT_EQ(t.order, 1);
    double ratio = test_error(p) / (t.coefficient * std::pow(p.phi / p.psi, t.order));
    EXPECT_GT(ratio, 0.9);
    EXPECT_LT(ratio, 1.1);
}

TEST(Limits, SmallPhiExponents) {
    for (bool inf : {false, true}) {
        ModelParams p = params("tanh", 1e-3, 1e-6, 1.0, 1.0, 1.0);
        p.snr_infinite = inf;
        auto t = limit_small_phi(p);
        EXPECT_EQ(t.order, inf ? 2 : 1);
        EXPECT_GT(t.coefficient, 0.0);
    }
}

TEST(Limits, ConstantsAreFinite) {
    ModelParams p = params("erf", 2.0, 0.5, 0.1, 1.0, 1.0);
    auto c = limit_constants(p);
    EXPECT_DOUBLE_EQ(c.omega, 2.0);
    EXPECT_DOUBLE_EQ(c.rho, p.student.zeta * 2.0);
    for (double v : {c.rho, c.xi, c.chi0, c.xi1, c.chi1, c.chibar, c.beta, c.chi, c.tau_ld, c.kappa})
        EXPECT_TRUE(std::isfinite(v));
}
