#include "rotodop/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace rotodop;

TEST(Quadrature, PolynomialIsExact) {
    const auto r = quad::integrate([](double x) { return 3 * x * x - 2 * x + 1; }, -1.0, 2.0);
    EXPECT_NEAR(r.value, 9.0 - 3.0 + 3.0, 1e-13);
}

TEST(Quadrature, GaussianOverBreakpoints) {
    const std::vector<double> pts{-10.0, -1.0, 0.0, 1.0, 10.0};
    const auto r = quad::integrate([](double x) { return std::exp(-x * x); }, std::span<const double>(pts));
    EXPECT_NEAR(r.value, std::sqrt(std::numbers::pi), 1e-12);
}

TEST(Quadrature, WholeLineWithMappedTails) {
    const std::vector<double> pts{-1.0, 1.0};
    const auto r = quad::integrate_line([](double x) { return 1.0 / (1.0 + x * x); }, std::span<const double>(pts),
                                        1.0, {1e-12, 0.0, 4000});
    EXPECT_NEAR(r.value, std::numbers::pi, 1e-10);
    const auto p = quad::integrate_line([](double x) { return std::pow(1.0 + x * x, -3.5); },
                                        std::span<const double>(pts), 1.0, {1e-12, 0.0, 4000});
    // sqrt(pi) Gamma(3) / Gamma(3.5)
    EXPECT_NEAR(p.value, std::sqrt(std::numbers::pi) * 2.0 / std::tgamma(3.5), 1e-11);
}

TEST(Quadrature, NarrowPeakFoundThroughGradedBreakpoints) {
    const double g = 1e-6;
    auto lor = [&](double x) { return g / (std::numbers::pi * ((x - 0.3) * (x - 0.3) + g * g)); };
    const auto bp = quad::breakpoints({0.3, 0.3 - g, 0.3 + g, 0.3 - 10 * g, 0.3 + 10 * g, 0.3 - 100 * g, 0.3 + 100 * g},
                                      -1.0, 1.0);
    const auto r = quad::integrate(lor, std::span<const double>(bp), {1e-10, 0.0, 4000});
    const double exact = (std::atan((1.0 - 0.3) / g) - std::atan((-1.0 - 0.3) / g)) / std::numbers::pi;
    EXPECT_NEAR(r.value, exact, 1e-9);
}

TEST(Quadrature, BudgetExhaustionThrows) {
    auto spiky = [](double x) { return 1.0 / std::sqrt(std::abs(x - 0.123456789) + 1e-300); };
    EXPECT_THROW(quad::integrate(spiky, 0.0, 1.0, {1e-14, 0.0, 8}), QuadratureFailure);
}

TEST(Quadrature, BreakpointsAreSortedAndClipped) {
    const auto bp = quad::breakpoints({5.0, -3.0, 0.5, 0.5, 20.0}, -1.0, 10.0);
    EXPECT_EQ(bp, (std::vector<double>{-1.0, 0.5, 5.0, 10.0}));
}

TEST(Quadrature, ReportsErrorEstimateAndWork) {
    const auto r = quad::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
    EXPECT_NEAR(r.value, 2.0, 1e-13);
    EXPECT_LE(r.error, 1e-8 * 2.0);
    EXPECT_GE(r.intervals, 1);
}

TEST(Quadrature, ScaledTailsHandleWideIntegrands) {
    // A Lorentzian of width 1e6 integrates to one over the line.
    const double g = 1e6;
    const std::vector<double> pts{-g, 0.0, g};
    const auto r = quad::integrate_line([&](double x) { return g / (2 * std::numbers::pi * (x * x + g * g / 4)); },
                                        std::span<const double>(pts), g);
    EXPECT_NEAR(r.value, 1.0, 1e-9);
}
