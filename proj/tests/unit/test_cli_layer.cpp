#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "tdlab/errors.hpp"
#include "tdlab/limits.hpp"
#include "tdlab/pool.hpp"
#include "tdlab/svg.hpp"
#include "tdlab/sweep.hpp"

using namespace tdlab;
using nlohmann::json;

namespace {

int count(const std::string& s, const std::string& needle) {
    int n = 0;
    for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
    return n;
}

std::string text(const CsvTable& t) {
    std::ostringstream os;
    t.write(os);
    return os.str();
}

}  // namespace

TEST(Config, RejectsUnknownKeys) {
    EXPECT_THROW(parse_config(json{{"phi", 1.0}, {"phy", 2.0}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"series", json::array({json{{"colour", "red"}}})}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"axis", "phi"}, {"grid", {1.0, 2.0}}, {"route", "magic"}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"axis", "depth"}, {"grid", {1.0}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"gamma", "big"}}), ConfigError);
}

TEST(Config, GridsMustBeMonotone) {
    EXPECT_THROW(parse_grid(json{1.0, 3.0, 2.0}), ConfigError);
    EXPECT_THROW(parse_grid(json::array()), ConfigError);
    EXPECT_THROW(parse_grid(json{{"start", -1}, {"stop", 1}, {"num", 3}}), ConfigError);
    auto g = parse_grid(json{{"start", 1}, {"stop", 100}, {"num", 3}});
    ASSERT_EQ(g.size(), 3u);
    EXPECT_NEAR(g[1], 10.0, 1e-12);
    auto l = parse_grid(json{{"start", 0}, {"stop", 1}, {"num", 5}, {"log", false}});
    EXPECT_DOUBLE_EQ(l[2], 0.5);
    EXPECT_EQ(parse_grid(json{3.0, 2.0}).size(), 2u);
}

TEST(Config, SizesFixRatios) {
    auto c = parse_config(json{{"m", 2000}, {"n0", 1000}, {"axis", "n1"}, {"grid", {500, 4000}}});
    EXPECT_DOUBLE_EQ(c.base.phi, 0.5);
    auto pts = expand_points(c);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_DOUBLE_EQ(pts[1].psi, 0.25);
    EXPECT_THROW(parse_config(json{{"axis", "n1"}, {"grid", {500}}}), ConfigError);
}

TEST(Csv, RoundTripAndHeader) {
    CsvTable t;
    t.kind = "theory";
    t.columns = {"a", "b"};
    t.add_row({fmt(0.1), "x,y"});
    t.add_row({fmt(std::nan("")), fmt(1.0 / 3.0)});
    t.trailer.push_back("summary=1");
    EXPECT_THROW(t.add_row({"1"}), std::logic_error);
    std::string s = text(t);
    EXPECT_EQ(s.rfind("# tdlab theory v1: a,b\n", 0), 0u);
    std::istringstream is(s);
    auto back = CsvTable::read(is);
    EXPECT_EQ(back.kind, "theory");
    EXPECT_EQ(back.rows, t.rows);
    EXPECT_EQ(back.trailer, t.trailer);
    EXPECT_EQ(back.numeric("b")[1], 1.0 / 3.0);
    EXPECT_TRUE(std::isnan(back.numeric("a")[1]));
    EXPECT_THROW(back.numeric("c"), MissingColumn);
}

TEST(Sweep, SinglePointEqualsDirectCall) {
    auto c = parse_config(json{{"phi", 2.0}, {"psi", 0.5}, {"gamma", 1e-2}, {"noise", 1.0}});
    auto t = run_theory(c);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.numeric("e_test")[0], test_error(c.base.model()));
    EXPECT_EQ(t.rows[0][t.column("error")], "");
}

TEST(Sweep, ParameterCountColumn) {
    auto c = parse_config(json{{"m", 2000}, {"n0", 1000}, {"axis", "n1"}, {"grid", {500, 1000, 3000}}});
    auto t = run_theory(c);
    auto p = t.numeric("p"), n1 = t.numeric("n1");
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], n1[i] * 1001.0);
}

TEST(Sweep, ErrorsAreRecordedPerPoint) {
    auto c = parse_config(json{{"route", "small_width"}, {"sw2", 0.0}, {"axis", "phi"}, {"grid", {0.5, 1.0}}});
    auto t = run_theory(c);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_NE(t.rows[0][t.column("error")].find("ZeroSw2"), std::string::npos);
}

TEST(Sweep, K2PoleIsFlagged) {
    auto c = parse_config(json{{"route", "k2_ridgeless"}, {"psi", 1.0}, {"noise", 1.0}, {"centered", true},
                               {"axis", "phi"}, {"grid", {0.5, 1.0, 2.0}}});
    auto t = run_theory(c);
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_EQ(t.rows[1][t.column("flag")], "pole");
    EXPECT_TRUE(std::isnan(t.numeric("e_test")[1]));
    EXPECT_TRUE(std::isfinite(t.numeric("e_test")[2]));
}

TEST(Sweep, PhaseRefinementSharesValues) {
    json base{{"gamma", 0.0}, {"noise", 1.0}, {"route", "k2_ridgeless"}, {"centered", true}};
    json a = base, b = base;
    a["grid"] = {{"start", 0.5}, {"stop", 2.0}, {"num", 3}, {"log", false}};
    a["grid2"] = {{"start", 0.25}, {"stop", 4.0}, {"num", 3}};
    b["grid"] = {{"start", 0.5}, {"stop", 2.0}, {"num", 5}, {"log", false}};
    b["grid2"] = {{"start", 0.25}, {"stop", 4.0}, {"num", 5}};
    auto ta = run_phase_diagram(parse_config(a)), tb = run_phase_diagram(parse_config(b));
    ASSERT_EQ(ta.rows.size(), 9u);
    ASSERT_EQ(tb.rows.size(), 25u);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_EQ(ta.rows[i * 3 + j], tb.rows[2 * i * 5 + 2 * j]);
    // n1/m = 1 puts psi on phi: flagged, not thrown
    auto c = parse_config(json{{"gamma", 0.0}, {"noise", 1.0}, {"route", "k2_ridgeless"}, {"grid", {1.0}}, {"grid2", {1.0}}});
    auto tc = run_phase_diagram(c);
    EXPECT_EQ(tc.rows[0][tc.column("flag")], "pole");
}

TEST(Sweep, DeterministicAcrossThreads) {
    auto c = parse_config(json{{"gamma", 1e-2}, {"noise", 1.0}, {"axis", "psi"}, {"grid", {0.3, 1.0, 3.0, 5.0}}});
    RunOptions one, three;
    three.threads = 3;
    EXPECT_EQ(text(run_theory(c, one)), text(run_theory(c, three)));
}

TEST(Sweep, LimitsTable) {
    auto c = parse_config(json{{"phi", 1e-3}, {"psi", 1e-6}, {"gamma", 1.0}, {"noise", 1.0}});
    auto t = run_limits(c);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.numeric("small_phi_order")[0], 1.0);
    EXPECT_LT(rel(t.numeric("large_width")[0], t.numeric("e_test")[0]), 1e-3);
}

TEST(Sweep, ValidateReportsZ) {
    auto c = parse_config(json{{"m", 150}, {"m_test", 100}, {"n0", 60}, {"n1", 120}, {"gamma", 1e8},
                               {"centered", true}, {"trials", 3}});
    auto r = run_validate(c);
    ASSERT_EQ(r.table.rows.size(), 1u);
    EXPECT_NEAR(r.table.numeric("theory")[0], 1.0, 1e-6);
    EXPECT_NEAR(r.table.numeric("mc_mean")[0], 1.0, 0.2);
    EXPECT_FALSE(r.table.trailer.empty());
    auto again = run_validate(c);
    EXPECT_EQ(text(r.table), text(again.table));
}

TEST(Svg, TheoryPlotHasOnePolylinePerSeries) {
    auto c = parse_config(json{{"gamma", 1e-3},
                               {"noise", 1.0},
                               {"m", 200},
                               {"n0", 100},
                               {"series", json::array({json{{"activation", "tanh"}}, json{{"activation", "linear"}},
                                                       json{{"activation", "tanh"}, {"centered", true}}})},
                               {"axis", "n1"},
                               {"grid", {{"start", 1}, {"stop", 2000}, {"num", 6}}}});
    auto svg = render_plot(run_theory(c));
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_EQ(count(svg, "<polyline"), 3);
    EXPECT_NE(svg.find("(log)"), std::string::npos);
    EXPECT_EQ(count(svg, "stroke-dasharray='6,4'"), 2);  // p = m and p = m^2
}

TEST(Svg, ValidatePlotHasErrorBars) {
    CsvTable t;
    t.kind = "validate";
    t.columns = {"series", "p", "m", "mc_mean", "mc_stderr", "theory"};
    for (int i = 1; i <= 4; ++i) t.add_row({"s", fmt(100.0 * i), "50", fmt(1.0 + 0.1 * i), "0.05", fmt(1.0 + 0.1 * i)});
    auto svg = render_plot(t);
    EXPECT_EQ(count(svg, "<circle"), 4);
    EXPECT_GE(count(svg, "<line"), 4);
}

TEST(Svg, EmptyAndUnknownTablesRejected) {
    CsvTable t;
    t.kind = "theory";
    t.columns = {"p", "e_test"};
    EXPECT_THROW(render_plot(t), ConfigError);
    CsvTable u;
    u.kind = "mystery";
    u.columns = {"foo"};
    u.add_row({"1"});
    EXPECT_THROW(render_plot(u), MissingColumn);
}

TEST(Pool, ThreadResolution) {
    EXPECT_EQ(resolve_threads(3), 3);
    ::setenv("TD_LAB_THREADS", "2", 1);
    EXPECT_EQ(resolve_threads(0), 2);
    ::setenv("TD_LAB_THREADS", "lots", 1);
    EXPECT_THROW(resolve_threads(0), ConfigError);
    ::unsetenv("TD_LAB_THREADS");
    EXPECT_EQ(resolve_threads(0), 1);
}

TEST(Pool, ExceptionsPropagate) {
    EXPECT_THROW(parallel_for(10, 2, [](std::size_t i) { if (i == 7) throw NoConvergence("x"); }), NoConvergence);
}
