#pragma once

#include "doppler.hpp"
#include "lineshape.hpp"
#include "parallel.hpp"
#include "rng.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace rotodop {

struct McConfig {
    std::uint64_t n_samples = 1'000'000;
    std::uint64_t seed = 20070101;
    std::vector<double> delta_grid;
    bool stratify_r = false;
    unsigned batches = 16;
    double max_rel_error = 0.05;
    bool enforce_error_cap = true;
    std::uint64_t chunk_size = 1u << 16;
    unsigned threads = 1;
};

struct McResult {
    LineshapeResult lineshape;
    std::vector<double> std_error; // relative to the point's mean
    std::vector<double> raw_mean;  // ensemble average of L(delta' - delta)
    std::uint64_t n_samples = 0;
    unsigned batches = 0;
};

struct AtomSample {
    double r = 0.0;
    double V_phi = 0.0;
};


// Draws one atom: V_phi from the thermal Gaussian (variance 1/(2 alpha)) by
// Box-Muller, and r from the density proportional to r I1(r) I2(r). With
// u = 4 r^2 / w^2 that density is Gamma(|l1| + |l2| + 1, 1); for integer
// shape it is sampled exactly as a sum of unit exponentials.
inline AtomSample sample_atom(const ResonanceModel& model, Xoshiro256& rng) {
    const int shape = model.beam1.abs_charge() + model.beam2.abs_charge() + 1;
    double log_prod = 0.0;
    for (int i = 0; i < shape; ++i) log_prod += std::log(rng.uniform());
    const double u = -log_prod;

    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double gauss = std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);

    AtomSample s;
    s.r = 0.5 * model.radius() * std::sqrt(u);
    s.V_phi = gauss / std::sqrt(2.0 * model.ensemble.alpha());
    return s;
}

// Inverse CDF of Gamma(shape, 1), taken from the upper tail above the median
// so probabilities near 1 keep full precision.
inline double gamma_quantile(double shape, double p) {
    return p < 0.5 ? boost::math::gamma_p_inv(shape, p) : boost::math::gamma_q_inv(shape, 1.0 - p);
}

// Stratified variant: the radial draw uses stratum `index` of `strata`
// equal-probability strata via the Gamma quantile function.
inline AtomSample sample_atom_stratified(const ResonanceModel& model, Xoshiro256& rng, std::uint64_t index,
                                         std::uint64_t strata) {
    const int shape = model.beam1.abs_charge() + model.beam2.abs_charge() + 1;
    const double p = (static_cast<double>(index) + rng.uniform()) / static_cast<double>(strata);
    const double u = gamma_quantile(shape, p);

    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double gauss = std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);

    AtomSample s;
    s.r = 0.5 * model.radius() * std::sqrt(u);
    s.V_phi = gauss / std::sqrt(2.0 * model.ensemble.alpha());
    return s;
}

// Direct ensemble average of L(delta' - delta) over sampled atoms. The sample
// set is split into `batches` contiguous batches, each cut into fixed-size
// chunks with their own derived streams; the split depends only on the
// config, so results do not depend on the worker count. Per-point standard
// errors come from batch means.
inline McResult mc_signal(const ResonanceModel& model, const McConfig& cfg) {
    model.require_cancellation_premise();
    require_increasing(cfg.delta_grid);
    if (cfg.n_samples < 1) throw InvalidArgument("mc_signal: n_samples must be >= 1");
    if (cfg.batches < 1) throw InvalidArgument("mc_signal: batches must be >= 1");
    if (cfg.chunk_size < 1) throw InvalidArgument("mc_signal: chunk_size must be >= 1");

    const std::size_t n_grid = cfg.delta_grid.size();
    const std::uint64_t n_batches = std::min<std::uint64_t>(cfg.batches, cfg.n_samples);

    struct Task {
        std::uint64_t batch;
        std::uint64_t chunk;
        std::uint64_t count;
    };
    std::vector<Task> tasks;
    std::vector<std::uint64_t> batch_size(n_batches);
    for (std::uint64_t b = 0; b < n_batches; ++b) {
        batch_size[b] = cfg.n_samples / n_batches + (b < cfg.n_samples % n_batches ? 1 : 0);
        std::uint64_t left = batch_size[b];
        for (std::uint64_t c = 0; left > 0; ++c) {
            const std::uint64_t take = std::min(left, cfg.chunk_size);
            tasks.push_back({b, c, take});
            left -= take;
        }
    }

    const double gamma = model.ensemble.gamma;
    const int l1 = model.l1();
    const int l2 = model.l2();
    std::vector<std::vector<double>> partial(tasks.size());
    parallel_for(tasks.size(), cfg.threads, [&](std::size_t t) {
        const Task& task = tasks[t];
        Xoshiro256 rng(stream_seed(cfg.seed, task.batch, task.chunk));
        std::vector<double> acc(n_grid, 0.0);
        for (std::uint64_t j = 0; j < task.count; ++j) {
            const AtomSample a = cfg.stratify_r ? sample_atom_stratified(model, rng, j, task.count)
                                                : sample_atom(model, rng);
            const double dp = rotational_detuning(l1, l2, a.r, a.V_phi);
            for (std::size_t k = 0; k < n_grid; ++k) acc[k] += lorentzian(gamma, dp - cfg.delta_grid[k]);
        }
        partial[t] = std::move(acc);
    });

    std::vector<std::vector<double>> batch_sum(n_batches, std::vector<double>(n_grid, 0.0));
    for (std::size_t t = 0; t < tasks.size(); ++t)
        for (std::size_t k = 0; k < n_grid; ++k) batch_sum[tasks[t].batch][k] += partial[t][k];

    McResult out;
    out.n_samples = cfg.n_samples;
    out.batches = static_cast<unsigned>(n_batches);
    out.raw_mean.assign(n_grid, 0.0);
    out.std_error.assign(n_grid, 0.0);
    for (std::size_t k = 0; k < n_grid; ++k) {
        double total = 0.0;
        for (std::uint64_t b = 0; b < n_batches; ++b) total += batch_sum[b][k];
        const double mean = total / static_cast<double>(cfg.n_samples);
        double ss = 0.0;
        for (std::uint64_t b = 0; b < n_batches; ++b) {
            const double d = batch_sum[b][k] / static_cast<double>(batch_size[b]) - mean;
            ss += d * d;
        }
        const double se = n_batches >= 2
                              ? std::sqrt(ss / (static_cast<double>(n_batches) * (n_batches - 1.0)))
                              : std::numeric_limits<double>::infinity();
        out.raw_mean[k] = mean;
        out.std_error[k] = mean > 0.0 ? se / mean : std::numeric_limits<double>::infinity();
    }

    out.lineshape.method = Method::MonteCarlo;
    out.lineshape.deltas = cfg.delta_grid;
    out.lineshape.values = out.raw_mean;
    normalize_to_peak(out.lineshape);
    double worst = 0.0;
    std::size_t worst_k = 0;
    for (std::size_t k = 0; k < n_grid; ++k)
        if (!(out.std_error[k] <= worst)) {
            worst = out.std_error[k];
            worst_k = k;
        }
    out.lineshape.error_estimate = worst;

    if (cfg.enforce_error_cap && !(worst <= cfg.max_rel_error)) {
        throw InsufficientSamples("mc_signal: relative standard error " + std::to_string(worst) + " at grid point " +
                                  std::to_string(worst_k) + " exceeds cap " + std::to_string(cfg.max_rel_error) +
                                  " with " + std::to_string(cfg.n_samples) + " samples");
    }
    return out;
}

// Per-point z-scores of a Monte Carlo run against a reference grid of the
// same (absolute) scale, combining the MC error with the reference's own
// relative error estimate (floored at 1e-12 for floating-point rounding).
inline std::vector<double> z_scores(const McResult& mc, std::span<const double> reference,
                                    double reference_rel_error = 0.0) {
    if (reference.size() != mc.raw_mean.size()) throw InvalidArgument("z_scores: grid size mismatch");
    std::vector<double> z(reference.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double se_mc = mc.std_error[k] * mc.raw_mean[k];
        const double se_ref = std::max(reference_rel_error, 1e-12) * reference[k];
        const double combined = std::sqrt(se_mc * se_mc + se_ref * se_ref);
        const double diff = mc.raw_mean[k] - reference[k];
        z[k] = combined > 0.0 ? diff / combined : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    }
    return z;
}

} // namespace rotodop
