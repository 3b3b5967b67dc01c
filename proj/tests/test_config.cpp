#include "rotodop/config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <string>

using namespace rotodop;

namespace {

RunConfig parse(const std::string& text) { return config_from_document(ConfigDocument::parse(text)); }

// Runs f expecting a ConfigError and returns it.
template <class F>
ConfigError config_error(F f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e;
    }
    ADD_FAILURE() << "no ConfigError thrown";
    return ConfigError("none");
}

} // namespace

TEST(ConfigDocument, ParsesScalarsStringsArraysAndComments) {
    const auto doc = ConfigDocument::parse(R"(# top comment
top = 3
[a]
x = -1.5e3   # trailing
s = "has # hash"
arr = [1, -2, +3]
flag = true
)");
    EXPECT_EQ(*doc.get_int("top"), 3);
    EXPECT_DOUBLE_EQ(*doc.get_double("a.x"), -1500.0);
    EXPECT_EQ(*doc.get_string("a.s"), "has # hash");
    EXPECT_EQ(*doc.get_int_array("a.arr"), (std::vector<int>{1, -2, 3}));
    EXPECT_TRUE(*doc.get_bool("a.flag"));
    EXPECT_EQ(doc.line_of("a.arr"), 6);
    EXPECT_FALSE(doc.get_double("a.missing").has_value());
    EXPECT_TRUE(doc.unused_keys().empty());
}

TEST(ConfigDocument, ScalarCountsAsOneElementArray) {
    const auto doc = ConfigDocument::parse("v = 2.5\n");
    EXPECT_EQ(*doc.get_double_array("v"), std::vector<double>{2.5});
}

TEST(ConfigDocument, SyntaxErrorsCarryLineAndKey) {
    auto e = config_error([] { ConfigDocument::parse("[ok]\nx = 1\nx = 2\n"); });
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.key(), "ok.x");
    e = config_error([] { ConfigDocument::parse("a = 1\nnot a pair\n"); });
    EXPECT_EQ(e.line(), 2);
    e = config_error([] { ConfigDocument::parse("[sec\n"); });
    EXPECT_EQ(e.line(), 1);
    e = config_error([] { ConfigDocument::parse("s = \"open\n"); });
    EXPECT_EQ(e.key(), "s");
    e = config_error([] { ConfigDocument::parse("a = [1, , 2]\n"); });
    EXPECT_EQ(e.key(), "a");
}

TEST(ConfigDocument, TypeErrors) {
    const auto doc = ConfigDocument::parse("n = 1.5\nb = yes\ns = \"x\"\nu = -3\n");
    EXPECT_THROW(doc.get_int("n"), ConfigError);
    EXPECT_THROW(doc.get_bool("b"), ConfigError);
    EXPECT_THROW(doc.get_double("s"), ConfigError);
    EXPECT_THROW(doc.get_uint("u"), ConfigError);
    EXPECT_THROW(doc.get_string("n"), ConfigError);
    EXPECT_THROW(ConfigDocument::parse("x = inf\n").get_double("x"), ConfigError);
    EXPECT_THROW(ConfigDocument::parse("x = 1.0abc\n").get_double("x"), ConfigError);
}

TEST(RunConfig, DefaultsWhenEmpty) {
    const RunConfig c = parse("");
    EXPECT_EQ(c.l1, (std::vector<int>{1, 1}));
    EXPECT_EQ(c.l2, (std::vector<int>{1, -1}));
    EXPECT_EQ(c.method, Method::ClosedConvolution);
    EXPECT_EQ(c.n_points, 201u);
    EXPECT_DOUBLE_EQ(*c.w_of_z_mm, 0.65);
    EXPECT_EQ(c.seed, 20070101u);
}

TEST(RunConfig, ReadsAllSections) {
    const RunConfig c = parse(R"(
[species]
mass_u = 84.9118
[ensemble]
temperature_k = 330
gamma_khz = 10
[beams]
l1 = [2]
l2 = [-2]
w_of_z_mm = "auto"
z_m = 0.5
[scan]
b_min_ut = -20
b_max_ut = 20
n_points = 51
[model]
method = "double_integral"
[mc]
rng = "xoshiro256**/splitmix64-v1"
seed = 99
stratify_r = true
[sweep]
l_max = 2
w_per_l_mm = [0.5, 0.6, 0.7]
[output]
dir = "elsewhere"
)");
    EXPECT_DOUBLE_EQ(c.mass_u, 84.9118);
    EXPECT_DOUBLE_EQ(c.temperature_k, 330.0);
    EXPECT_FALSE(c.w_of_z_mm.has_value());
    EXPECT_EQ(c.scan_unit, ScanUnit::Microtesla);
    EXPECT_EQ(c.method, Method::DoubleIntegral);
    EXPECT_TRUE(c.stratify_r);
    EXPECT_EQ(c.l_max, 2);
    EXPECT_EQ(c.out_dir, "elsewhere");

    const ResonanceModel m = build_model(c, 2, -2);
    EXPECT_DOUBLE_EQ(m.radius(), beam_radius(BeamMode{2, 0, 0.5e-3, defaults::d1_wavelength_m, 0.5, 1.0, {}}));
    const auto grid = build_grid(c);
    EXPECT_EQ(grid.size(), 51u);
    EXPECT_NEAR(grid.back(), zeeman_shift(m.ensemble, {20e-6}), 1e-9 * grid.back());
    EXPECT_EQ(grid[25], 0.0);
}

TEST(RunConfig, UnknownKeyIsReportedWithLine) {
    const auto e = config_error([] { parse("[ensemble]\ntemperature_k = 300\ntemprature_k = 310\n"); });
    EXPECT_EQ(e.key(), "ensemble.temprature_k");
    EXPECT_EQ(e.line(), 3);
}

TEST(RunConfig, ValidationNamesTheOffendingKey) {
    auto e = config_error([] { parse("[ensemble]\n\ntemperature_k = -4\n"); });
    EXPECT_EQ(e.key(), "ensemble.temperature_k");
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);

    e = config_error([] { parse("[beams]\nl1 = [1, 2]\nl2 = [-1]\n"); });
    EXPECT_EQ(e.key(), "beams.l2");
    e = config_error([] { parse("[model]\nmethod = \"monte_carlo\"\n[beams]\nl1 = [1]\nl2 = [2]\n"); });
    EXPECT_EQ(e.key(), "beams.l2");
    e = config_error([] { parse("[model]\nmethod = \"bogus\"\n"); });
    EXPECT_EQ(e.key(), "model.method");
    e = config_error([] { parse("[scan]\ndelta_min_khz = 5\ndelta_max_khz = -5\n"); });
    EXPECT_EQ(e.key(), "scan.delta_max_khz");
    e = config_error([] { parse("[scan]\ndelta_max_khz = 5\nb_max_ut = 5\n"); });
    EXPECT_EQ(e.line(), 3);
    e = config_error([] { parse("[mc]\nrng = \"mt19937\"\n"); });
    EXPECT_EQ(e.key(), "mc.rng");
    e = config_error([] { parse("[sweep]\nl_max = 2\n"); });
    EXPECT_EQ(e.key(), "sweep.l_max");
    e = config_error([] { parse("[beams]\nw_of_z_mm = \"wide\"\n"); });
    EXPECT_EQ(e.key(), "beams.w_of_z_mm");
}

TEST(RunConfig, CanonicalTextRoundTrips) {
    RunConfig c = parse("[ensemble]\ngamma_khz = 0.1\n[beams]\nl1 = [3, -1]\nl2 = [-3, 2]\n[scan]\nb_min_ut = -7\n");
    c.rel_tol = 3e-9;
    const std::string text = to_config_text(c);
    const RunConfig back = parse(text);
    EXPECT_EQ(to_config_text(back), text);
    EXPECT_EQ(back.gamma_khz, 0.1);
    EXPECT_EQ(back.rel_tol, 3e-9);
    EXPECT_EQ(back.scan_unit, ScanUnit::Microtesla);

    RunConfig a = c;
    a.w_of_z_mm.reset();
    EXPECT_FALSE(parse(to_config_text(a)).w_of_z_mm.has_value());
}

TEST(Units, HertzRadianAndFieldRoundTrips) {
    const AtomEnsemble ens;
    for (double hz : {1.0, 52e3, 217108.347, 5e8}) {
        EXPECT_NEAR(rad_s_to_hz(hz_to_rad_s(hz)) / hz, 1.0, 1e-12);
        const double w = hz_to_rad_s(hz);
        EXPECT_NEAR(zeeman_shift(ens, {field_for_shift(ens, w)}) / w, 1.0, 1e-12);
    }
    // 1 uT at g = 1/2 is 2 g muB B / hbar.
    EXPECT_NEAR(zeeman_shift(ens, {1e-6}), 87941.00059190184, 1e-7);
    EXPECT_NEAR(rad_s_to_hz(zeeman_shift(ens, {1e-6})), 13996.24494464847, 1e-8);
}
