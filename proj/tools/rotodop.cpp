#include "rotodop/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace {

unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ROTODOP_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
        } catch (const std::exception&) {
            std::cerr << "rotodop: ignoring invalid ROTODOP_THREADS='" << env << "'\n";
        }
    }
    return n;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Rotational-Doppler broadening of Hanle/EIT resonances driven by LG beams"};
    cli.set_version_flag("--version", std::string(rotodop::version));
    cli.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> points;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Run configuration file");
        sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
        sub->add_option("--points", points, "Number of grid points (overrides scan.n_points / sweep.n_points)");
    };
    CLI::App* scan = cli.add_subcommand("scan", "Lineshape and lock-in derivative per charge pair");
    CLI::App* sweep = cli.add_subcommand("sweep", "Peak-to-peak width versus topological charge");
    CLI::App* mc = cli.add_subcommand("mc-check", "Monte Carlo versus closed-form convolution");
    for (CLI::App* sub : {scan, sweep, mc}) add_common(sub);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : rotodop::app::exit_config;
    }

    try {
        rotodop::RunConfig cfg;
        if (!config_path.empty()) cfg = rotodop::config_from_document(rotodop::ConfigDocument::load(config_path));
        if (seed) cfg.seed = *seed;
        if (points) {
            if (sweep->parsed()) cfg.sweep_points = *points;
            else cfg.n_points = *points;
        }
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        rotodop::validate_config(cfg, [](const std::string&) { return 0; });

        rotodop::app::CommandOptions opt{cfg.out_dir, worker_count()};
        rotodop::app::CommandReport report;
        if (scan->parsed()) report = rotodop::app::run_scan(cfg, opt);
        else if (sweep->parsed()) report = rotodop::app::run_sweep(cfg, opt);
        else report = rotodop::app::run_mc_check(cfg, opt);

        std::cout << report.summary;
        for (const auto& f : report.files) std::cout << "wrote " << f.string() << "\n";
        return report.exit_code;
    } catch (...) {
        const auto e = std::current_exception();
        try {
            std::rethrow_exception(e);
        } catch (const std::exception& ex) {
            std::cerr << "rotodop: " << ex.what() << "\n";
        }
        return rotodop::app::exit_code_for(e);
    }
}
