#pragma once

#include "errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

namespace rotodop::quad {

struct Options {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    int max_intervals = 4000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
// Index 10 is the centre node; odd indices are shared with the Gauss rule.
inline constexpr std::array<double, 11> kronrod_nodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kronrod_weights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525000000, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> gauss_weights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

enum class Map { Identity, UpperTail, LowerTail };

struct Piece {
    double lo = 0.0;
    double hi = 0.0;
    double value = 0.0;
    double error = 0.0;
    double abs_value = 0.0;
    Map map = Map::Identity;
    double anchor = 0.0;
    double scale = 1.0;

    bool operator<(const Piece& other) const noexcept { return error < other.error; }
};

// Pulls f back to the t coordinate of a piece. Tails use
// x = anchor +/- scale * t / (1 - t), t in [0, 1).
template <class F>
double pulled_back(const F& f, const Piece& p, double t) {
    switch (p.map) {
    case Map::Identity:
        return f(t);
    case Map::UpperTail: {
        const double u = 1.0 - t;
        return f(p.anchor + p.scale * t / u) * p.scale / (u * u);
    }
    case Map::LowerTail: {
        const double u = 1.0 - t;
        return f(p.anchor - p.scale * t / u) * p.scale / (u * u);
    }
    }
    return 0.0;
}

template <class F>
void apply_rule(const F& f, Piece& p) {
    const double centre = 0.5 * (p.lo + p.hi);
    const double half = 0.5 * (p.hi - p.lo);
    const double fc = pulled_back(f, p, centre);
    double kronrod = fc * kronrod_weights[10];
    double gauss = 0.0;
    double abs_sum = std::abs(kronrod);
    for (std::size_t i = 0; i < 10; ++i) {
        const double dx = half * kronrod_nodes[i];
        const double f1 = pulled_back(f, p, centre - dx);
        const double f2 = pulled_back(f, p, centre + dx);
        kronrod += kronrod_weights[i] * (f1 + f2);
        abs_sum += kronrod_weights[i] * (std::abs(f1) + std::abs(f2));
        if (i % 2 == 1) gauss += gauss_weights[i / 2] * (f1 + f2);
    }
    p.value = kronrod * half;
    p.abs_value = abs_sum * std::abs(half);
    p.error = std::abs((kronrod - gauss) * half);
}

template <class F>
Result run(const F& f, std::vector<Piece> seeds, const Options& opt) {
    std::priority_queue<Piece> heap;
    double total = 0.0;
    double total_err = 0.0;
    double total_abs = 0.0;
    for (Piece& p : seeds) {
        if (!(p.hi > p.lo)) continue;
        apply_rule(f, p);
        total += p.value;
        total_err += p.error;
        total_abs += p.abs_value;
        heap.push(p);
    }
    int count = static_cast<int>(heap.size());
    const double eps = std::numeric_limits<double>::epsilon();

    auto converged = [&] {
        const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
        return total_err <= target || total_err <= 50.0 * eps * total_abs;
    };

    while (!heap.empty() && !converged()) {
        if (count >= opt.max_intervals) {
            throw QuadratureFailure("adaptive quadrature: tolerance " + std::to_string(opt.rel_tol) +
                                    " not reached within " + std::to_string(opt.max_intervals) +
                                    " intervals (error estimate " + std::to_string(total_err) + ")");
        }
        Piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            // Interval can no longer be split in floating point; accept it.
            total_err -= worst.error;
            worst.error = 0.0;
            heap.push(worst);
            continue;
        }
        Piece left = worst;
        Piece right = worst;
        left.hi = mid;
        right.lo = mid;
        apply_rule(f, left);
        apply_rule(f, right);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_abs += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
        ++count;
    }

    // Re-sum from the pieces so the reported value carries no running drift.
    Result out;
    out.intervals = count;
    while (!heap.empty()) {
        out.value += heap.top().value;
        out.error += heap.top().error;
        heap.pop();
    }
    return out;
}

} // namespace detail

// Integral of f over [points.front(), points.back()], with every interior
// entry of points used as an initial subdivision. points must be sorted.
template <class F>
Result integrate(const F& f, std::span<const double> points, const Options& opt = {}) {
    if (points.size() < 2) throw InvalidArgument("integrate: need at least two points");
    std::vector<detail::Piece> seeds;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (points[i + 1] < points[i]) throw InvalidArgument("integrate: points must be sorted");
        seeds.push_back({points[i], points[i + 1]});
    }
    return detail::run(f, std::move(seeds), opt);
}

template <class F>
Result integrate(const F& f, double a, double b, const Options& opt = {}) {
    const std::array<double, 2> pts{a, b};
    return integrate(f, std::span<const double>(pts), opt);
}

// Integral of f over the whole real line. The finite part is split at
// points; the two tails beyond the outermost points are mapped onto [0, 1)
// with length scale tail_scale.
template <class F>
Result integrate_line(const F& f, std::span<const double> points, double tail_scale, const Options& opt = {}) {
    if (points.size() < 2) throw InvalidArgument("integrate_line: need at least two points");
    if (!(tail_scale > 0.0)) throw InvalidArgument("integrate_line: tail scale must be > 0");
    std::vector<detail::Piece> seeds;
    detail::Piece lower;
    lower.lo = 0.0;
    lower.hi = 1.0;
    lower.map = detail::Map::LowerTail;
    lower.anchor = points.front();
    lower.scale = tail_scale;
    seeds.push_back(lower);
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (points[i + 1] < points[i]) throw InvalidArgument("integrate_line: points must be sorted");
        seeds.push_back({points[i], points[i + 1]});
    }
    detail::Piece upper = lower;
    upper.map = detail::Map::UpperTail;
    upper.anchor = points.back();
    seeds.push_back(upper);
    return detail::run(f, std::move(seeds), opt);
}

// Sorted, de-duplicated copy of pts restricted to [lo, hi], with lo and hi
// always present.
inline std::vector<double> breakpoints(std::vector<double> pts, double lo, double hi) {
    pts.push_back(lo);
    pts.push_back(hi);
    std::erase_if(pts, [&](double x) { return !(x >= lo && x <= hi) || !std::isfinite(x); });
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

} // namespace rotodop::quad
