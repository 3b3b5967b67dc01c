#pragma once

#include "lineshape.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rotodop {

struct WidthReport {
    double fwhm = 0.0;
    double peak_to_peak = 0.0;
    Method method = Method::ClosedConvolution;
    double grid_resolution = 0.0;
};

struct SweepResult {
    std::vector<int> l_values;
    std::vector<double> width_equal;    // peak-to-peak, l1 = l2 = l
    std::vector<double> width_opposite; // peak-to-peak, l1 = -l2 = l
    std::vector<double> fwhm_opposite;
    std::vector<double> w_of_z;
};

namespace detail {

inline double grid_step(const LineshapeResult& shape, std::size_t min_points) {
    const auto& x = shape.deltas;
    if (x.size() < min_points || shape.values.size() != x.size())
        throw GridTooCoarse("lineshape grid needs at least " + std::to_string(min_points) + " points");
    const double h = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i)
        if (std::abs((x[i] - x[i - 1]) - h) > 1e-9 * std::abs(h))
            throw GridTooCoarse("lineshape grid is not uniform");
    if (!(h > 0.0)) throw GridTooCoarse("lineshape grid is not increasing");
    return h;
}

// Vertex offset (in steps) of the parabola through three equally spaced values.
inline double parabolic_offset(double ym, double y0, double yp) {
    const double denom = ym - 2.0 * y0 + yp;
    if (denom == 0.0) return 0.0;
    return 0.5 * (ym - yp) / denom;
}

inline std::size_t single_peak_index(const LineshapeResult& shape) {
    const auto& y = shape.values;
    const auto imax = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    for (std::size_t i = 1; i <= imax; ++i)
        if (y[i] < y[i - 1]) throw NotSinglePeaked("lineshape rises again left of its maximum");
    for (std::size_t i = imax + 1; i < y.size(); ++i)
        if (y[i] > y[i - 1]) throw NotSinglePeaked("lineshape rises again right of its maximum");
    return imax;
}

} // namespace detail

// dS/d(delta) in the small, slow modulation limit of lock-in detection:
// fourth-order central differences inside, second-order one-sided at the
// two outermost points on each side. Differences are grouped so that a
// mirror-symmetric lineshape gives an exactly antisymmetric derivative.
inline LineshapeResult derivative_signal(const LineshapeResult& shape) {
    const double h = detail::grid_step(shape, 5);
    const auto& y = shape.values;
    const std::size_t n = y.size();
    LineshapeResult out = shape;
    out.raw_peak = 1.0;
    for (std::size_t i = 2; i + 2 < n; ++i)
        out.values[i] = (8.0 * (y[i + 1] - y[i - 1]) - (y[i + 2] - y[i - 2])) / (12.0 * h);
    out.values[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    out.values[1] = (y[2] - y[0]) / (2.0 * h);
    out.values[n - 2] = (y[n - 1] - y[n - 3]) / (2.0 * h);
    out.values[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    return out;
}

// Separation of the maximum and minimum of the derivative signal, each
// refined by a parabola through the grid extremum and its neighbours.
inline double peak_to_peak_width(const LineshapeResult& shape) {
    const double h = detail::grid_step(shape, 5);
    const std::size_t ipeak = detail::single_peak_index(shape);
    const LineshapeResult d = derivative_signal(shape);
    const auto& dy = d.values;
    const auto& x = d.deltas;
    const std::size_t imax = static_cast<std::size_t>(std::max_element(dy.begin(), dy.end()) - dy.begin());
    const std::size_t imin = static_cast<std::size_t>(std::min_element(dy.begin(), dy.end()) - dy.begin());
    if (!(imax < imin) || imax > ipeak || imin < ipeak)
        throw NotSinglePeaked("derivative extrema do not bracket the peak");
    if (imax == 0 || imin + 1 >= dy.size())
        throw NotSinglePeaked("derivative extremum lies on the grid edge; widen the scan");
    const double xmax = x[imax] + h * detail::parabolic_offset(dy[imax - 1], dy[imax], dy[imax + 1]);
    const double xmin = x[imin] + h * detail::parabolic_offset(dy[imin - 1], dy[imin], dy[imin + 1]);
    return xmin - xmax;
}

// Half-maximum crossings found by bisection over each monotone flank, then
// linear interpolation between the bracketing grid points.
inline double fwhm_numeric(const LineshapeResult& shape) {
    if (shape.values.size() < 3 || shape.values.size() != shape.deltas.size())
        throw HalfMaxNotBracketed("fwhm: grid too small");
    const std::size_t ipeak = detail::single_peak_index(shape);
    const auto& y = shape.values;
    const auto& x = shape.deltas;
    const double half = 0.5 * y[ipeak];
    if (ipeak == 0 || ipeak + 1 == y.size()) throw HalfMaxNotBracketed("fwhm: peak on the grid edge");
    if (!(y.front() < half) || !(y.back() < half)) throw HalfMaxNotBracketed("fwhm: half maximum not reached");

    // Rising flank: y[lo] < half <= y[hi].
    std::size_t lo = 0;
    std::size_t hi = ipeak;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (y[mid] < half ? lo : hi) = mid;
    }
    const double left = x[lo] + (half - y[lo]) * (x[hi] - x[lo]) / (y[hi] - y[lo]);

    // Falling flank: y[lo] >= half > y[hi].
    lo = ipeak;
    hi = y.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (y[mid] < half ? hi : lo) = mid;
    }
    const double right = x[lo] + (half - y[lo]) * (x[hi] - x[lo]) / (y[hi] - y[lo]);
    return right - left;
}

inline WidthReport measure_widths(const LineshapeResult& shape) {
    WidthReport r;
    r.fwhm = fwhm_numeric(shape);
    r.peak_to_peak = peak_to_peak_width(shape);
    r.method = shape.method;
    r.grid_resolution = detail::grid_step(shape, 5);
    return r;
}

struct SweepOptions {
    std::size_t n_points = 2001;
    double span_factor = 4.0; // half-span in units of (gamma + analytic FWHM)
    LineshapeOptions lineshape{};
};

inline ResonanceModel with_charges(ResonanceModel m, int l1, int l2, double w) {
    m.beam1.charge_l = l1;
    m.beam2.charge_l = l2;
    m.beam1.radius_override = w;
    m.beam2.radius_override = w;
    return m;
}

// Symmetric scan wide enough to contain the derivative extrema and the
// half-maximum points of the convolution lineshape.
inline std::vector<double> auto_grid(const ResonanceModel& model, std::size_t n, double span_factor) {
    double width = model.ensemble.gamma;
    if (!model.equal_charges()) width += fwhm_analytic(model);
    const double half = span_factor * width;
    return uniform_grid(-half, half, n | 1u);
}

// Peak-to-peak widths versus |l| for equal (l, l) and opposite (l, -l)
// charges using the convolution lineshape, with one w(z) per |l|.
inline SweepResult sweep_widths(const ResonanceModel& base, int l_max, const std::vector<double>& w_per_l,
                                const SweepOptions& opt = {}) {
    if (l_max < 0) throw InvalidArgument("sweep: l_max must be >= 0");
    if (w_per_l.size() != static_cast<std::size_t>(l_max) + 1)
        throw InvalidArgument("sweep: need one w(z) per l = 0..l_max");
    base.validate();

    const std::size_t n = static_cast<std::size_t>(l_max) + 1;
    SweepResult out;
    out.l_values.resize(n);
    out.width_equal.resize(n);
    out.width_opposite.resize(n);
    out.fwhm_opposite.resize(n);
    out.w_of_z = w_per_l;

    LineshapeOptions inner = opt.lineshape;
    const unsigned outer_threads = inner.threads;
    inner.threads = 1;
    parallel_for(n, outer_threads, [&](std::size_t i) {
        const int l = static_cast<int>(i);
        const double w = w_per_l[i];
        const ResonanceModel same = with_charges(base, l, l, w);
        const ResonanceModel opposite = with_charges(base, l, -l, w);

        const auto grid_same = auto_grid(same, opt.n_points, opt.span_factor);
        const auto shape_same = compute_lineshape(same, grid_same, Method::ClosedConvolution, inner);
        const auto grid_opp = auto_grid(opposite, opt.n_points, opt.span_factor);
        const auto shape_opp = compute_lineshape(opposite, grid_opp, Method::ClosedConvolution, inner);

        out.l_values[i] = l;
        out.width_equal[i] = peak_to_peak_width(shape_same);
        out.width_opposite[i] = peak_to_peak_width(shape_opp);
        out.fwhm_opposite[i] = fwhm_numeric(shape_opp);
    });
    return out;
}

// Full width at half maximum of the axial Doppler profile, rad/s.
inline double axial_doppler_width(const AtomEnsemble& ens, double wavelength) {
    const double v = std::sqrt(2.0 * PhysicalConstants::boltzmann_kB * ens.temperature_T / ens.mass_m);
    return two_pi * 2.0 * std::sqrt(std::log(2.0)) * v / wavelength;
}

// Order-of-magnitude broadening from an angle epsilon (rad) between the two
// beam axes: epsilon times the axial Doppler width. An upper-bound estimate,
// not a lineshape model.
inline double misalignment_broadening(double epsilon, const AtomEnsemble& ens, double wavelength) {
    if (!(epsilon >= 0.0)) throw InvalidArgument("misalignment: epsilon must be >= 0");
    return epsilon * axial_doppler_width(ens, wavelength);
}

} // namespace rotodop
