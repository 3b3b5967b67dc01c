#include "rotodop/cli.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace rotodop;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::vector<std::string>* header = nullptr) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    if (header) {
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header->push_back(cell);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("rotodop_test_" + name);
    fs::remove_all(d);
    return d;
}

RunConfig scan_config() {
    RunConfig c;
    c.n_points = 121;
    c.scan_min = -900;
    c.scan_max = 900;
    return c;
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(ROTODOP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(CliNames, PairStemEncodesSigns) {
    EXPECT_EQ(app::pair_stem(1, -1), "l1_1_l2_m1");
    EXPECT_EQ(app::pair_stem(-3, 0), "l1_m3_l2_0");
}

TEST(CliScan, WritesOneCsvPerPairWithDerivative) {
    const fs::path dir = fresh_dir("scan");
    const auto report = app::run_scan(scan_config(), {dir, 1});
    EXPECT_EQ(report.exit_code, 0);
    ASSERT_TRUE(fs::exists(dir / "scan_l1_1_l2_1.csv"));
    ASSERT_TRUE(fs::exists(dir / "scan_l1_1_l2_m1.csv"));
    ASSERT_TRUE(fs::exists(dir / "scan_manifest.json"));

    std::vector<std::string> header;
    const auto same = read_csv(dir / "scan_l1_1_l2_1.csv", &header);
    const auto opp = read_csv(dir / "scan_l1_1_l2_m1.csv");
    EXPECT_EQ(header, (std::vector<std::string>{"delta_rad_s", "delta_hz", "b_field_tesla", "signal_norm", "derivative"}));
    ASSERT_EQ(same.size(), 121u);
    const std::size_t n = same.size();
    EXPECT_EQ(same[n / 2][3], 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        EXPECT_DOUBLE_EQ(same[i][4], -same[n - 1 - i][4]);
        EXPECT_NEAR(opp[i][4], -opp[n - 1 - i][4], 1e-12 * std::abs(opp[i][4]) + 1e-300);
    }
    // The opposite-charge line is broader: higher wings everywhere off centre.
    for (std::size_t i = 0; i < n / 2 - 2; ++i) EXPECT_GT(opp[i][3], same[i][3]);

    const auto manifest = nlohmann::json::parse(slurp(dir / "scan_manifest.json"));
    EXPECT_EQ(manifest["tool"], "rotodop");
    EXPECT_EQ(manifest["command"], "scan");
    EXPECT_EQ(manifest["resolved"]["mc"]["rng"], rng_algorithm);
    EXPECT_EQ(manifest["outputs"].size(), 2u);
    EXPECT_GT(manifest["outputs"][1]["peak_to_peak_hz"].get<double>(),
              manifest["outputs"][0]["peak_to_peak_hz"].get<double>());
}

TEST(CliScan, RerunsAreByteIdenticalIncludingFromManifest) {
    const fs::path a = fresh_dir("rerun_a");
    const fs::path b = fresh_dir("rerun_b");
    const fs::path c = fresh_dir("rerun_c");
    RunConfig cfg = scan_config();
    cfg.method = Method::MonteCarlo;
    cfg.l1 = {2};
    cfg.l2 = {-2};
    cfg.n_samples = 100'000;
    app::run_scan(cfg, {a, 1});
    app::run_scan(cfg, {b, 1});
    EXPECT_EQ(slurp(a / "scan_l1_2_l2_m2.csv"), slurp(b / "scan_l1_2_l2_m2.csv"));
    EXPECT_EQ(slurp(a / "scan_manifest.json"), slurp(b / "scan_manifest.json"));

    const auto manifest = nlohmann::json::parse(slurp(a / "scan_manifest.json"));
    const RunConfig again = config_from_document(ConfigDocument::parse(manifest["config"].get<std::string>()));
    app::run_scan(again, {c, 1});
    EXPECT_EQ(slurp(a / "scan_l1_2_l2_m2.csv"), slurp(c / "scan_l1_2_l2_m2.csv"));
}

TEST(CliScan, MicroteslaAxis) {
    const fs::path dir = fresh_dir("scan_ut");
    RunConfig cfg = scan_config();
    cfg.scan_unit = ScanUnit::Microtesla;
    cfg.scan_min = -40;
    cfg.scan_max = 40;
    cfg.l1 = {1};
    cfg.l2 = {-1};
    app::run_scan(cfg, {dir, 1});
    const auto rows = read_csv(dir / "scan_l1_1_l2_m1.csv");
    EXPECT_NEAR(rows.back()[2], 40e-6, 1e-15);
    EXPECT_NEAR(rows.front()[2], -40e-6, 1e-15);
}

TEST(CliSweep, WritesWidthTable) {
    const fs::path dir = fresh_dir("sweep");
    RunConfig cfg;
    cfg.sweep_points = 801;
    const auto report = app::run_sweep(cfg, {dir, 1});
    EXPECT_EQ(report.exit_code, 0);
    std::vector<std::string> header;
    const auto rows = read_csv(dir / "sweep.csv", &header);
    EXPECT_EQ(header, (std::vector<std::string>{"l", "width_equal_hz", "width_opposite_hz", "fwhm_opposite_hz", "w_of_z_mm"}));
    ASSERT_EQ(rows.size(), 5u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_GT(rows[i][2], rows[i - 1][2]);
        EXPECT_NEAR(rows[i][1], rows[0][1], 1e-3 * rows[0][1]);
    }
    EXPECT_DOUBLE_EQ(rows[3][4], 0.83);
    EXPECT_TRUE(fs::exists(dir / "sweep_manifest.json"));
}

TEST(CliMcCheck, DefaultConfigurationPasses) {
    const fs::path dir = fresh_dir("mc");
    RunConfig cfg = scan_config();
    cfg.n_samples = 300'000;
    const auto report = app::run_mc_check(cfg, {dir, 1});
    EXPECT_EQ(report.exit_code, 0) << report.summary;
    std::vector<std::string> header;
    const auto rows = read_csv(dir / "mc_check_l1_1_l2_m1.csv", &header);
    EXPECT_EQ(header.back(), "z_score");
    EXPECT_EQ(rows.size(), 121u);
    const auto manifest = nlohmann::json::parse(slurp(dir / "mc-check_manifest.json"));
    for (const auto& o : manifest["outputs"]) EXPECT_TRUE(o["pass"].get<bool>());
}

TEST(CliMcCheck, DifferentSeedsDifferButBothPass) {
    const fs::path a = fresh_dir("mc_seed_a");
    const fs::path b = fresh_dir("mc_seed_b");
    RunConfig cfg = scan_config();
    cfg.l1 = {1};
    cfg.l2 = {-1};
    cfg.n_samples = 200'000;
    EXPECT_EQ(app::run_mc_check(cfg, {a, 1}).exit_code, 0);
    cfg.seed = 7;
    EXPECT_EQ(app::run_mc_check(cfg, {b, 1}).exit_code, 0);
    EXPECT_NE(slurp(a / "mc_check_l1_1_l2_m1.csv"), slurp(b / "mc_check_l1_1_l2_m1.csv"));
}

TEST(CliMcCheck, TooFewSamplesRaise) {
    RunConfig cfg = scan_config();
    cfg.n_samples = 100;
    EXPECT_THROW(app::run_mc_check(cfg, {fresh_dir("mc_small"), 1}), InsufficientSamples);
}

TEST(CliExitCodes, MapErrors) {
    auto code = [](auto&& thrower) {
        try {
            thrower();
        } catch (...) {
            return app::exit_code_for(std::current_exception());
        }
        return -1;
    };
    EXPECT_EQ(code([] { throw ConfigError("x"); }), 2);
    EXPECT_EQ(code([] { throw InvalidArgument("x"); }), 2);
    EXPECT_EQ(code([] { throw QuadratureFailure("x"); }), 3);
    EXPECT_EQ(code([] { throw InsufficientSamples("x"); }), 5);
    EXPECT_EQ(code([] { throw std::runtime_error("x"); }), 1);
}

TEST(CliBinary, ExitCodes) {
    const fs::path dir = fresh_dir("binary");
    fs::create_directories(dir);
    EXPECT_EQ(run_binary("--version"), 0);
    EXPECT_EQ(run_binary("scan --points 41 --out " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "scan_l1_1_l2_m1.csv"));
    EXPECT_EQ(run_binary("scan --config " + std::string(ROTODOP_CONFIG_DIR) + "/lineshape_scan.toml --points 41 --out " +
                         dir.string()),
              0);

    const fs::path bad = dir / "bad.toml";
    std::ofstream(bad) << "[ensemble]\ntemperature_k = -1\n";
    EXPECT_EQ(run_binary("scan --config " + bad.string()), 2);
    EXPECT_EQ(run_binary("scan --config " + (dir / "missing.toml").string()), 2);
    EXPECT_EQ(run_binary("frobnicate"), 2);

    const fs::path few = dir / "few.toml";
    std::ofstream(few) << "[mc]\nn_samples = 100\n[scan]\nn_points = 21\n";
    EXPECT_EQ(run_binary("mc-check --config " + few.string() + " --out " + dir.string()), 5);
}
