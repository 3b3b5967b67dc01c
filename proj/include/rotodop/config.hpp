#pragma once

#include "errors.hpp"
#include "format.hpp"
#include "lineshape.hpp"
#include "rng.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace rotodop {

// Flat, typed key/value text with [section] headers:
//
//   [ensemble]
//   temperature_k = 293.15   # comment
//   [beams]
//   l1 = [1, 1]
//
// Values are numbers, true/false, "strings" or [number, ...] arrays.
class ConfigDocument {
public:
    struct Entry {
        enum class Kind { Scalar, String, Array } kind = Kind::Scalar;
        std::string raw;                // scalar token or string contents
        std::vector<std::string> items; // array tokens
        int line = 0;
    };

    static ConfigDocument parse(std::string_view text) {
        ConfigDocument doc;
        std::string section;
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t eol = std::min(text.find('\n', pos), text.size());
            std::string line(text.substr(pos, eol - pos));
            pos = eol + 1;
            ++line_no;
            strip_comment(line);
            trim(line);
            if (line.empty()) {
                if (eol == text.size()) break;
                continue;
            }
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
                section = line.substr(1, line.size() - 2);
                trim(section);
                if (!valid_name(section)) throw ConfigError("invalid section name '" + section + "'", line_no);
                if (eol == text.size()) break;
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
            std::string key = line.substr(0, eq);
            std::string value = line.substr(eq + 1);
            trim(key);
            trim(value);
            if (!valid_name(key)) throw ConfigError("invalid key name", line_no, key);
            const std::string full = section.empty() ? key : section + "." + key;
            if (doc.entries_.count(full)) throw ConfigError("duplicate key", line_no, full);
            if (value.empty()) throw ConfigError("missing value", line_no, full);

            Entry e;
            e.line = line_no;
            if (value.front() == '"') {
                if (value.size() < 2 || value.back() != '"') throw ConfigError("unterminated string", line_no, full);
                e.kind = Entry::Kind::String;
                e.raw = value.substr(1, value.size() - 2);
            } else if (value.front() == '[') {
                if (value.back() != ']') throw ConfigError("unterminated array", line_no, full);
                e.kind = Entry::Kind::Array;
                std::string body = value.substr(1, value.size() - 2);
                std::stringstream ss(body);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    trim(item);
                    if (item.empty()) throw ConfigError("empty array element", line_no, full);
                    e.items.push_back(item);
                }
            } else {
                e.raw = value;
            }
            doc.entries_.emplace(full, std::move(e));
            if (eol == text.size()) break;
        }
        return doc;
    }

    static ConfigDocument load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    bool is_string(const std::string& key) const {
        const auto it = entries_.find(key);
        return it != entries_.end() && it->second.kind == Entry::Kind::String;
    }

    std::optional<double> get_double(const std::string& key) const {
        const Entry* e = scalar(key);
        if (!e) return std::nullopt;
        return to_double(e->raw, e->line, key);
    }

    std::optional<std::int64_t> get_int(const std::string& key) const {
        const Entry* e = scalar(key);
        if (!e) return std::nullopt;
        return to_int(e->raw, e->line, key);
    }

    std::optional<std::uint64_t> get_uint(const std::string& key) const {
        const Entry* e = scalar(key);
        if (!e) return std::nullopt;
        std::uint64_t v = 0;
        const auto res = std::from_chars(e->raw.data(), e->raw.data() + e->raw.size(), v);
        if (res.ec != std::errc{} || res.ptr != e->raw.data() + e->raw.size())
            throw ConfigError("expected a non-negative integer, got '" + e->raw + "'", e->line, key);
        return v;
    }

    std::optional<bool> get_bool(const std::string& key) const {
        const Entry* e = scalar(key);
        if (!e) return std::nullopt;
        if (e->raw == "true") return true;
        if (e->raw == "false") return false;
        throw ConfigError("expected true or false, got '" + e->raw + "'", e->line, key);
    }

    std::optional<std::string> get_string(const std::string& key) const {
        const Entry* e = find(key);
        if (!e) return std::nullopt;
        if (e->kind != Entry::Kind::String) throw ConfigError("expected a quoted string", e->line, key);
        return e->raw;
    }

    // Arrays; a bare scalar is accepted as a one-element array.
    std::optional<std::vector<double>> get_double_array(const std::string& key) const {
        const Entry* e = find(key);
        if (!e) return std::nullopt;
        std::vector<double> out;
        for (const auto& tok : tokens(*e, key)) out.push_back(to_double(tok, e->line, key));
        return out;
    }

    std::optional<std::vector<int>> get_int_array(const std::string& key) const {
        const Entry* e = find(key);
        if (!e) return std::nullopt;
        std::vector<int> out;
        for (const auto& tok : tokens(*e, key)) out.push_back(static_cast<int>(to_int(tok, e->line, key)));
        return out;
    }

    int line_of(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    // Keys never read through a getter; reported so typos do not pass silently.
    std::vector<std::string> unused_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, e] : entries_)
            if (!read_.count(k)) out.push_back(k);
        return out;
    }

private:
    const Entry* find(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return nullptr;
        read_.insert(key);
        return &it->second;
    }

    const Entry* scalar(const std::string& key) const {
        const Entry* e = find(key);
        if (e && e->kind != Entry::Kind::Scalar) throw ConfigError("expected a scalar value", e->line, key);
        return e;
    }

    static std::vector<std::string> tokens(const Entry& e, const std::string& key) {
        if (e.kind == Entry::Kind::Array) return e.items;
        if (e.kind == Entry::Kind::Scalar) return {e.raw};
        throw ConfigError("expected a number or an array of numbers", e.line, key);
    }

    static double to_double(const std::string& tok, int line, const std::string& key) {
        double v = 0.0;
        const char* first = tok.data();
        if (!tok.empty() && tok.front() == '+') ++first;
        const auto res = std::from_chars(first, tok.data() + tok.size(), v);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size() || !std::isfinite(v))
            throw ConfigError("expected a finite number, got '" + tok + "'", line, key);
        return v;
    }

    static std::int64_t to_int(const std::string& tok, int line, const std::string& key) {
        std::int64_t v = 0;
        const char* first = tok.data();
        if (!tok.empty() && tok.front() == '+') ++first;
        const auto res = std::from_chars(first, tok.data() + tok.size(), v);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
            throw ConfigError("expected an integer, got '" + tok + "'", line, key);
        return v;
    }

    static void strip_comment(std::string& s) {
        bool in_string = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') in_string = !in_string;
            if (s[i] == '#' && !in_string) {
                s.erase(i);
                return;
            }
        }
    }

    static void trim(std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) {
            s.clear();
            return;
        }
        const auto e = s.find_last_not_of(" \t\r");
        s = s.substr(b, e - b + 1);
    }

    static bool valid_name(const std::string& s) {
        if (s.empty()) return false;
        for (char c : s)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
        return true;
    }

    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> read_;
};

enum class ScanUnit { Kilohertz, Microtesla };

// Every physical quantity carries its unit in the key name; fields here
// keep the same units as the file.
struct RunConfig {
    // [species]
    double mass_u = defaults::rb87_mass_u;
    double g_factor = defaults::rb87_ground_g;
    double wavelength_nm = defaults::d1_wavelength_m * 1e9;
    // [ensemble]
    double temperature_k = defaults::temperature_K;
    double gamma_khz = 52.0;
    double density_scale = 1.0;
    // [beams]
    std::vector<int> l1{1, 1};
    std::vector<int> l2{1, -1};
    double w0_mm = 0.5;
    double z_m = 0.0;
    std::optional<double> w_of_z_mm = 0.65;
    double intensity_scale = 1.0;
    // [scan]
    ScanUnit scan_unit = ScanUnit::Kilohertz;
    double scan_min = -600.0;
    double scan_max = 600.0;
    std::size_t n_points = 201;
    // [model]
    Method method = Method::ClosedConvolution;
    // [quadrature]
    double rel_tol = 1e-8;
    int max_intervals = 4000;
    // [mc]
    std::uint64_t n_samples = 1'000'000;
    std::uint64_t seed = 20070101;
    unsigned batches = 16;
    double max_rel_error = 0.05;
    bool stratify_r = false;
    std::uint64_t chunk_size = 1u << 16;
    // [sweep]
    int l_max = 4;
    std::vector<double> w_per_l_mm{0.5, 0.65, 0.74, 0.83, 0.89};
    std::size_t sweep_points = 2001;
    double span_factor = 4.0;
    // [output]
    std::string out_dir = "out";

    std::vector<std::pair<int, int>> charge_pairs() const {
        std::vector<std::pair<int, int>> out;
        for (std::size_t i = 0; i < l1.size() && i < l2.size(); ++i) out.emplace_back(l1[i], l2[i]);
        return out;
    }
};

inline std::optional<Method> parse_method(std::string_view s) {
    for (Method m : {Method::DoubleIntegral, Method::ClosedConvolution, Method::NarrowLimit, Method::MonteCarlo})
        if (method_name(m) == s) return m;
    return std::nullopt;
}

// Checks every module precondition that can be decided from the config
// alone. line_of maps a key to its source line for diagnostics (0 if the
// value came from a default or an override).
template <class LineOf>
void validate_config(const RunConfig& c, LineOf line_of) {
    auto fail = [&](const std::string& key, const std::string& msg) { throw ConfigError(msg, line_of(key), key); };
    if (!(c.mass_u > 0.0)) fail("species.mass_u", "must be > 0");
    if (!(c.wavelength_nm > 0.0)) fail("species.wavelength_nm", "must be > 0");
    if (c.g_factor == 0.0 && c.scan_unit == ScanUnit::Microtesla) fail("species.g_factor", "must be nonzero");
    if (!(c.temperature_k > 0.0)) fail("ensemble.temperature_k", "must be > 0");
    if (!(c.gamma_khz > 0.0)) fail("ensemble.gamma_khz", "must be > 0");
    if (!(c.density_scale > 0.0)) fail("ensemble.density_scale", "must be > 0");
    if (c.l1.empty() || c.l1.size() != c.l2.size()) fail("beams.l2", "l1 and l2 must list the same number of charges");
    if (!(c.w0_mm > 0.0)) fail("beams.w0_mm", "must be > 0");
    if (c.w_of_z_mm && !(*c.w_of_z_mm > 0.0)) fail("beams.w_of_z_mm", "must be > 0");
    if (!(c.intensity_scale >= 0.0)) fail("beams.intensity_scale", "must be >= 0");
    if (!(c.scan_max > c.scan_min))
        fail(c.scan_unit == ScanUnit::Kilohertz ? "scan.delta_max_khz" : "scan.b_max_ut",
             "scan maximum must exceed the scan minimum");
    if (c.n_points < 5) fail("scan.n_points", "need at least 5 points");
    for (auto [a, b] : c.charge_pairs()) {
        const bool premise = std::abs(a) == std::abs(b);
        if ((c.method == Method::DoubleIntegral || c.method == Method::MonteCarlo) && !premise)
            fail("beams.l2", "method " + std::string(method_name(c.method)) + " needs |l1| = |l2|");
        if (c.method == Method::NarrowLimit && a == b) fail("beams.l2", "narrow_limit needs l1 != l2");
    }
    if (!(c.rel_tol > 0.0 && c.rel_tol < 1.0)) fail("quadrature.rel_tol", "must lie in (0, 1)");
    if (c.max_intervals < 1) fail("quadrature.max_intervals", "must be >= 1");
    if (c.n_samples < 1) fail("mc.n_samples", "must be >= 1");
    if (c.batches < 1) fail("mc.batches", "must be >= 1");
    if (!(c.max_rel_error > 0.0)) fail("mc.max_rel_error", "must be > 0");
    if (c.chunk_size < 1) fail("mc.chunk_size", "must be >= 1");
    if (c.l_max < 0) fail("sweep.l_max", "must be >= 0");
    if (c.w_per_l_mm.size() != static_cast<std::size_t>(c.l_max) + 1)
        fail("sweep.w_per_l_mm", "need one entry per l = 0..l_max");
    for (double w : c.w_per_l_mm)
        if (!(w > 0.0)) fail("sweep.w_per_l_mm", "entries must be > 0");
    if (c.sweep_points < 5) fail("sweep.n_points", "need at least 5 points");
    if (!(c.span_factor > 0.0)) fail("sweep.span_factor", "must be > 0");
}

inline RunConfig config_from_document(const ConfigDocument& doc) {
    RunConfig c;
    auto num = [&](const char* key, double& dst) {
        if (auto v = doc.get_double(key)) dst = *v;
    };
    num("species.mass_u", c.mass_u);
    num("species.g_factor", c.g_factor);
    num("species.wavelength_nm", c.wavelength_nm);
    num("ensemble.temperature_k", c.temperature_k);
    num("ensemble.gamma_khz", c.gamma_khz);
    num("ensemble.density_scale", c.density_scale);
    if (auto v = doc.get_int_array("beams.l1")) c.l1 = *v;
    if (auto v = doc.get_int_array("beams.l2")) c.l2 = *v;
    num("beams.w0_mm", c.w0_mm);
    num("beams.z_m", c.z_m);
    if (doc.has("beams.w_of_z_mm")) {
        if (doc.is_string("beams.w_of_z_mm")) {
            if (*doc.get_string("beams.w_of_z_mm") != "auto")
                throw ConfigError("expected a radius in mm or \"auto\"", doc.line_of("beams.w_of_z_mm"),
                                  "beams.w_of_z_mm");
            c.w_of_z_mm.reset();
        } else {
            c.w_of_z_mm = doc.get_double("beams.w_of_z_mm");
        }
    }
    num("beams.intensity_scale", c.intensity_scale);

    const bool khz = doc.has("scan.delta_min_khz") || doc.has("scan.delta_max_khz");
    const bool ut = doc.has("scan.b_min_ut") || doc.has("scan.b_max_ut");
    if (khz && ut)
        throw ConfigError("give the scan either in kHz or in microtesla, not both",
                          doc.line_of(doc.has("scan.b_min_ut") ? "scan.b_min_ut" : "scan.b_max_ut"), "scan");
    if (ut) {
        c.scan_unit = ScanUnit::Microtesla;
        c.scan_min = -50.0;
        c.scan_max = 50.0;
        num("scan.b_min_ut", c.scan_min);
        num("scan.b_max_ut", c.scan_max);
    } else {
        num("scan.delta_min_khz", c.scan_min);
        num("scan.delta_max_khz", c.scan_max);
    }
    auto count = [&](const char* key, std::size_t& dst) {
        if (auto v = doc.get_uint(key)) dst = static_cast<std::size_t>(*v);
    };
    count("scan.n_points", c.n_points);

    if (auto m = doc.get_string("model.method")) {
        auto parsed = parse_method(*m);
        if (!parsed)
            throw ConfigError("unknown method '" + *m +
                                  "' (double_integral, closed_form, narrow_limit, monte_carlo)",
                              doc.line_of("model.method"), "model.method");
        c.method = *parsed;
    }
    num("quadrature.rel_tol", c.rel_tol);
    if (auto v = doc.get_int("quadrature.max_intervals")) c.max_intervals = static_cast<int>(*v);

    if (auto v = doc.get_uint("mc.n_samples")) c.n_samples = *v;
    if (auto v = doc.get_uint("mc.seed")) c.seed = *v;
    if (auto v = doc.get_uint("mc.batches")) c.batches = static_cast<unsigned>(*v);
    num("mc.max_rel_error", c.max_rel_error);
    if (auto v = doc.get_bool("mc.stratify_r")) c.stratify_r = *v;
    if (auto v = doc.get_uint("mc.chunk_size")) c.chunk_size = *v;
    if (auto v = doc.get_string("mc.rng"); v && *v != rng_algorithm)
        throw ConfigError("this build provides rng '" + std::string(rng_algorithm) + "', not '" + *v + "'",
                          doc.line_of("mc.rng"), "mc.rng");

    if (auto v = doc.get_int("sweep.l_max")) {
        c.l_max = static_cast<int>(*v);
        if (!doc.has("sweep.w_per_l_mm") && c.l_max != 4)
            throw ConfigError("sweep.w_per_l_mm is required when l_max differs from 4", doc.line_of("sweep.l_max"),
                              "sweep.l_max");
    }
    if (auto v = doc.get_double_array("sweep.w_per_l_mm")) c.w_per_l_mm = *v;
    count("sweep.n_points", c.sweep_points);
    num("sweep.span_factor", c.span_factor);

    if (auto v = doc.get_string("output.dir")) c.out_dir = *v;

    const auto unused = doc.unused_keys();
    if (!unused.empty()) throw ConfigError("unknown key", doc.line_of(unused.front()), unused.front());

    validate_config(c, [&](const std::string& key) { return doc.line_of(key); });
    return c;
}

// Canonical text form; config_from_document(parse(to_config_text(c)))
// reproduces c exactly.
inline std::string to_config_text(const RunConfig& c) {
    auto ints = [](const std::vector<int>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_int(v[i]);
        return s + "]";
    };
    auto dbls = [](const std::vector<double>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
        return s + "]";
    };
    std::string t;
    t += "[species]\n";
    t += "mass_u = " + format_double(c.mass_u) + "\n";
    t += "g_factor = " + format_double(c.g_factor) + "\n";
    t += "wavelength_nm = " + format_double(c.wavelength_nm) + "\n";
    t += "\n[ensemble]\n";
    t += "temperature_k = " + format_double(c.temperature_k) + "\n";
    t += "gamma_khz = " + format_double(c.gamma_khz) + "\n";
    t += "density_scale = " + format_double(c.density_scale) + "\n";
    t += "\n[beams]\n";
    t += "l1 = " + ints(c.l1) + "\n";
    t += "l2 = " + ints(c.l2) + "\n";
    t += "w0_mm = " + format_double(c.w0_mm) + "\n";
    t += "z_m = " + format_double(c.z_m) + "\n";
    t += "w_of_z_mm = " + (c.w_of_z_mm ? format_double(*c.w_of_z_mm) : std::string("\"auto\"")) + "\n";
    t += "intensity_scale = " + format_double(c.intensity_scale) + "\n";
    t += "\n[scan]\n";
    if (c.scan_unit == ScanUnit::Kilohertz) {
        t += "delta_min_khz = " + format_double(c.scan_min) + "\n";
        t += "delta_max_khz = " + format_double(c.scan_max) + "\n";
    } else {
        t += "b_min_ut = " + format_double(c.scan_min) + "\n";
        t += "b_max_ut = " + format_double(c.scan_max) + "\n";
    }
    t += "n_points = " + format_uint(c.n_points) + "\n";
    t += "\n[model]\n";
    t += "method = \"" + std::string(method_name(c.method)) + "\"\n";
    t += "\n[quadrature]\n";
    t += "rel_tol = " + format_double(c.rel_tol) + "\n";
    t += "max_intervals = " + format_int(c.max_intervals) + "\n";
    t += "\n[mc]\n";
    t += "rng = \"" + std::string(rng_algorithm) + "\"\n";
    t += "n_samples = " + format_uint(c.n_samples) + "\n";
    t += "seed = " + format_uint(c.seed) + "\n";
    t += "batches = " + format_uint(c.batches) + "\n";
    t += "max_rel_error = " + format_double(c.max_rel_error) + "\n";
    t += std::string("stratify_r = ") + (c.stratify_r ? "true" : "false") + "\n";
    t += "chunk_size = " + format_uint(c.chunk_size) + "\n";
    t += "\n[sweep]\n";
    t += "l_max = " + format_int(c.l_max) + "\n";
    t += "w_per_l_mm = " + dbls(c.w_per_l_mm) + "\n";
    t += "n_points = " + format_uint(c.sweep_points) + "\n";
    t += "span_factor = " + format_double(c.span_factor) + "\n";
    t += "\n[output]\n";
    t += "dir = \"" + c.out_dir + "\"\n";
    return t;
}

// SI model for one (l1, l2) pair.
inline ResonanceModel build_model(const RunConfig& c, int l1, int l2) {
    ResonanceModel m;
    m.ensemble.mass_m = c.mass_u * PhysicalConstants::atomic_mass_unit_u;
    m.ensemble.temperature_T = c.temperature_k;
    m.ensemble.gyro_g = c.g_factor;
    m.ensemble.gamma = hz_to_rad_s(c.gamma_khz * 1e3);
    m.ensemble.density_scale_N = c.density_scale;
    for (BeamMode* b : {&m.beam1, &m.beam2}) {
        b->waist_w0 = c.w0_mm * 1e-3;
        b->wavelength = c.wavelength_nm * 1e-9;
        b->z = c.z_m;
        b->intensity_scale_I0 = c.intensity_scale;
        if (c.w_of_z_mm) b->radius_override = *c.w_of_z_mm * 1e-3;
    }
    m.beam1.charge_l = l1;
    m.beam2.charge_l = l2;
    return m;
}

// Scan grid in rad/s.
inline std::vector<double> build_grid(const RunConfig& c) {
    double lo = c.scan_min;
    double hi = c.scan_max;
    if (c.scan_unit == ScanUnit::Kilohertz) {
        lo = hz_to_rad_s(lo * 1e3);
        hi = hz_to_rad_s(hi * 1e3);
    } else {
        AtomEnsemble ens;
        ens.gyro_g = c.g_factor;
        lo = zeeman_shift(ens, {lo * 1e-6});
        hi = zeeman_shift(ens, {hi * 1e-6});
        if (hi < lo) std::swap(lo, hi);
    }
    return uniform_grid(lo, hi, c.n_points);
}

} // namespace rotodop
