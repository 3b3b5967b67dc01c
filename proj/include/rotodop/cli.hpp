#pragma once

// Command implementations behind the rotodop executable. Kept in the library
// so tests can drive the same code paths the binary uses.

#include "analysis.hpp"
#include "config.hpp"
#include "format.hpp"
#include "lineshape.hpp"
#include "montecarlo.hpp"
#include "version.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace rotodop::app {

enum ExitCode : int {
    exit_ok = 0,
    exit_internal = 1,
    exit_config = 2,
    exit_quadrature = 3,
    exit_statistics = 4,
    exit_insufficient_samples = 5,
};

struct CommandOptions {
    std::filesystem::path out_dir = "out";
    unsigned threads = 1;
};

struct CommandReport {
    int exit_code = exit_ok;
    std::vector<std::filesystem::path> files;
    std::string summary;
};

inline std::string charge_tag(int l) { return l < 0 ? "m" + format_int(-l) : format_int(l); }

inline std::string pair_stem(int l1, int l2) { return "l1_" + charge_tag(l1) + "_l2_" + charge_tag(l2); }

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row_strings(header); }

    void row(std::initializer_list<double> values) {
        std::vector<std::string> cells;
        for (double v : values) cells.push_back(format_double(v));
        row_strings(cells);
    }

    void row_strings(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw InvalidArgument("csv: wrong number of cells");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }

    const std::string& text() const noexcept { return text_; }

    void save(const std::filesystem::path& path) const { write_file(path, text_); }

    static void write_file(const std::filesystem::path& path, const std::string& content) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        out << content;
        if (!out) throw Error("failed writing '" + path.string() + "'");
    }

private:
    std::size_t columns_;
    std::string text_;
};

inline nlohmann::json resolved_parameters(const RunConfig& cfg) {
    const ResonanceModel m = build_model(cfg, cfg.l1.front(), cfg.l2.front());
    const auto grid = build_grid(cfg);
    nlohmann::json j;
    j["mass_kg"] = m.ensemble.mass_m;
    j["temperature_k"] = m.ensemble.temperature_T;
    j["alpha_s2_per_m2"] = m.ensemble.alpha();
    j["g_factor"] = m.ensemble.gyro_g;
    j["gamma_rad_s"] = m.ensemble.gamma;
    j["wavelength_m"] = m.beam1.wavelength;
    j["waist_m"] = m.beam1.waist_w0;
    j["z_m"] = m.beam1.z;
    j["w_of_z_m"] = m.radius();
    j["w_of_z_source"] = cfg.w_of_z_mm ? "override" : "gaussian_beam";
    j["rayleigh_range_m"] = rayleigh_range(m.beam1);
    j["grid"] = {{"min_rad_s", grid.front()}, {"max_rad_s", grid.back()}, {"n_points", grid.size()}};
    j["method"] = std::string(method_name(cfg.method));
    j["quadrature_rel_tol"] = cfg.rel_tol;
    j["mc"] = {{"rng", std::string(rng_algorithm)}, {"n_samples", cfg.n_samples}, {"seed", cfg.seed},
               {"batches", cfg.batches}, {"max_rel_error", cfg.max_rel_error}, {"stratify_r", cfg.stratify_r},
               {"chunk_size", cfg.chunk_size}};
    return j;
}

inline void write_manifest(const std::filesystem::path& dir, const std::string& command, const RunConfig& cfg,
                           const nlohmann::json& outputs) {
    nlohmann::json j;
    j["tool"] = "rotodop";
    j["version"] = version;
    j["command"] = command;
    j["config"] = to_config_text(cfg);
    j["resolved"] = resolved_parameters(cfg);
    j["outputs"] = outputs;
    CsvWriter::write_file(dir / (command + "_manifest.json"), j.dump(2) + "\n");
}

inline McConfig mc_config(const RunConfig& cfg, std::vector<double> grid, unsigned threads) {
    McConfig mc;
    mc.n_samples = cfg.n_samples;
    mc.seed = cfg.seed;
    mc.delta_grid = std::move(grid);
    mc.stratify_r = cfg.stratify_r;
    mc.batches = cfg.batches;
    mc.max_rel_error = cfg.max_rel_error;
    mc.chunk_size = cfg.chunk_size;
    mc.threads = threads;
    return mc;
}

inline LineshapeOptions lineshape_options(const RunConfig& cfg, unsigned threads) {
    return {cfg.rel_tol, cfg.max_intervals, threads};
}

// One lineshape CSV per (l1, l2) pair with the signal and its lock-in
// derivative.
inline CommandReport run_scan(const RunConfig& cfg, const CommandOptions& opt) {
    std::filesystem::create_directories(opt.out_dir);
    const auto grid = build_grid(cfg);
    CommandReport report;
    nlohmann::json outputs = nlohmann::json::array();
    for (auto [l1, l2] : cfg.charge_pairs()) {
        const ResonanceModel model = build_model(cfg, l1, l2);
        LineshapeResult shape;
        if (cfg.method == Method::MonteCarlo) shape = mc_signal(model, mc_config(cfg, grid, opt.threads)).lineshape;
        else shape = compute_lineshape(model, grid, cfg.method, lineshape_options(cfg, opt.threads));
        const LineshapeResult deriv = derivative_signal(shape);

        CsvWriter csv({"delta_rad_s", "delta_hz", "b_field_tesla", "signal_norm", "derivative"});
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double d = grid[i];
            const double b = cfg.g_factor != 0.0 ? field_for_shift(model.ensemble, d) : 0.0;
            csv.row({d, rad_s_to_hz(d), b, shape.values[i], deriv.values[i]});
        }
        const std::string name = "scan_" + pair_stem(l1, l2) + ".csv";
        csv.save(opt.out_dir / name);
        report.files.push_back(opt.out_dir / name);

        nlohmann::json entry{{"file", name},
                             {"l1", l1},
                             {"l2", l2},
                             {"method", std::string(method_name(shape.method))},
                             {"raw_peak", shape.raw_peak},
                             {"error_estimate", shape.error_estimate}};
        std::string widths = "";
        if (cfg.method != Method::MonteCarlo) {
            try {
                const WidthReport w = measure_widths(shape);
                entry["fwhm_hz"] = rad_s_to_hz(w.fwhm);
                entry["peak_to_peak_hz"] = rad_s_to_hz(w.peak_to_peak);
                widths = "  pp " + format_double(std::round(rad_s_to_hz(w.peak_to_peak))) + " Hz";
            } catch (const Error&) {
                entry["widths"] = "not measurable on this grid";
            }
        }
        outputs.push_back(entry);
        report.summary += name + widths + "\n";
    }
    write_manifest(opt.out_dir, "scan", cfg, outputs);
    report.files.push_back(opt.out_dir / "scan_manifest.json");
    return report;
}

// Width versus |l| for equal and opposite charges.
inline CommandReport run_sweep(const RunConfig& cfg, const CommandOptions& opt) {
    std::filesystem::create_directories(opt.out_dir);
    ResonanceModel base = build_model(cfg, 0, 0);
    std::vector<double> w_m;
    for (double w : cfg.w_per_l_mm) w_m.push_back(w * 1e-3);
    SweepOptions sopt;
    sopt.n_points = cfg.sweep_points;
    sopt.span_factor = cfg.span_factor;
    sopt.lineshape = lineshape_options(cfg, opt.threads);
    const SweepResult sweep = sweep_widths(base, cfg.l_max, w_m, sopt);

    CsvWriter csv({"l", "width_equal_hz", "width_opposite_hz", "fwhm_opposite_hz", "w_of_z_mm"});
    CommandReport report;
    for (std::size_t i = 0; i < sweep.l_values.size(); ++i) {
        csv.row_strings({format_int(sweep.l_values[i]), format_double(rad_s_to_hz(sweep.width_equal[i])),
                         format_double(rad_s_to_hz(sweep.width_opposite[i])),
                         format_double(rad_s_to_hz(sweep.fwhm_opposite[i])), format_double(cfg.w_per_l_mm[i])});
        report.summary += "l=" + format_int(sweep.l_values[i]) + "  equal " +
                          format_double(std::round(rad_s_to_hz(sweep.width_equal[i]))) + " Hz  opposite " +
                          format_double(std::round(rad_s_to_hz(sweep.width_opposite[i]))) + " Hz\n";
    }
    csv.save(opt.out_dir / "sweep.csv");
    report.files.push_back(opt.out_dir / "sweep.csv");
    write_manifest(opt.out_dir, "sweep", cfg, nlohmann::json::array({{{"file", "sweep.csv"}}}));
    report.files.push_back(opt.out_dir / "sweep_manifest.json");
    return report;
}

struct McCheckPoint {
    double fraction_within = 0.0;
    double max_abs_z = 0.0;
};

// Fraction of grid points whose |z| is below the threshold.
inline McCheckPoint summarize_z(const std::vector<double>& z, double threshold = 4.0) {
    McCheckPoint s;
    std::size_t ok = 0;
    for (double v : z) {
        if (std::abs(v) < threshold) ++ok;
        s.max_abs_z = std::max(s.max_abs_z, std::abs(v));
    }
    s.fraction_within = z.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(z.size());
    return s;
}

// Absolute-scale deterministic reference matching the Monte Carlo estimator,
// plus its relative error estimate.
inline std::pair<std::vector<double>, double> mc_reference(const ResonanceModel& model,
                                                           const std::vector<double>& grid,
                                                           const LineshapeOptions& opt) {
    std::vector<double> ref(grid.size());
    if (model.equal_charges()) {
        for (std::size_t i = 0; i < grid.size(); ++i) ref[i] = lorentzian(model.ensemble.gamma, grid[i]);
        return {ref, 0.0};
    }
    const LineshapeResult cf = compute_lineshape(model, grid, Method::ClosedConvolution, opt);
    const double area = doppler_profile_area(model);
    for (std::size_t i = 0; i < grid.size(); ++i) ref[i] = cf.values[i] * cf.raw_peak / area;
    return {ref, cf.error_estimate};
}

// Monte Carlo against the closed-form convolution on the scan grid.
// Passes when at least 99% of points lie within 4 combined standard errors.
inline CommandReport run_mc_check(const RunConfig& cfg, const CommandOptions& opt) {
    std::filesystem::create_directories(opt.out_dir);
    const auto grid = build_grid(cfg);
    CommandReport report;
    nlohmann::json outputs = nlohmann::json::array();
    for (auto [l1, l2] : cfg.charge_pairs()) {
        const ResonanceModel model = build_model(cfg, l1, l2);
        model.require_cancellation_premise();
        const McResult mc = mc_signal(model, mc_config(cfg, grid, opt.threads));
        const auto [ref, ref_err] = mc_reference(model, grid, lineshape_options(cfg, opt.threads));
        const std::vector<double> z = z_scores(mc, ref, ref_err);
        const McCheckPoint s = summarize_z(z);
        const double ref_peak = *std::max_element(ref.begin(), ref.end());

        CsvWriter csv({"delta_rad_s", "delta_hz", "mc_norm", "reference_norm", "rel_std_error", "z_score"});
        for (std::size_t i = 0; i < grid.size(); ++i)
            csv.row({grid[i], rad_s_to_hz(grid[i]), mc.lineshape.values[i], ref[i] / ref_peak, mc.std_error[i], z[i]});
        const std::string name = "mc_check_" + pair_stem(l1, l2) + ".csv";
        csv.save(opt.out_dir / name);
        report.files.push_back(opt.out_dir / name);

        const bool pass = s.fraction_within >= 0.99;
        if (!pass) report.exit_code = exit_statistics;
        outputs.push_back({{"file", name},
                           {"l1", l1},
                           {"l2", l2},
                           {"fraction_within_4_sigma", s.fraction_within},
                           {"max_abs_z", s.max_abs_z},
                           {"max_rel_std_error", mc.lineshape.error_estimate},
                           {"pass", pass}});
        report.summary += name + "  within 4 sigma: " + format_double(100.0 * s.fraction_within) + "%  max|z| " +
                          format_double(s.max_abs_z) + (pass ? "  PASS" : "  FAIL") + "\n";
    }
    write_manifest(opt.out_dir, "mc-check", cfg, outputs);
    report.files.push_back(opt.out_dir / "mc-check_manifest.json");
    return report;
}

// Maps an in-flight exception to the documented exit code.
inline int exit_code_for(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const ConfigError&) {
        return exit_config;
    } catch (const InvalidArgument&) {
        return exit_config;
    } catch (const QuadratureFailure&) {
        return exit_quadrature;
    } catch (const InsufficientSamples&) {
        return exit_insufficient_samples;
    } catch (...) {
        return exit_internal;
    }
}

} // namespace rotodop::app
