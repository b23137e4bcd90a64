#ifndef RYDPAIR_IO_SCENARIO_HPP
#define RYDPAIR_IO_SCENARIO_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include <rydpair/compare.hpp>
#include <rydpair/ensemble.hpp>
#include <rydpair/io/csv.hpp>
#include <rydpair/io/params_json.hpp>
#include <rydpair/loss_model.hpp>
#include <rydpair/pair_engine.hpp>
#include <rydpair/validity.hpp>

namespace rydpair::io {

inline const std::vector<std::string>& scenario_names()
{
    static const std::vector<std::string> names{"derive", "g2", "fig3", "spectrum", "oracle-compare", "validity"};
    return names;
}

inline bool is_stochastic(const std::string& scenario) { return scenario == "g2" || scenario == "oracle-compare"; }

/* Raised for malformed or inconsistent configurations (exit status 2). */
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig
{
    std::string scenario;
    PhysicalParams params = presets::rb87_sec5();
    std::optional<std::uint64_t> seed;
    json options = json::object();
    std::filesystem::path out_dir = ".";
    unsigned threads = 1;
    bool force = false;
};

/* Git blob id: SHA-1 over "blob <size>\0" followed by the content. */
inline std::string git_blob_sha1(const std::string& content)
{
    const std::string head = "blob " + std::to_string(content.size()) + '\0';
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), head.data(), head.size()) != 1 ||
        EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw std::runtime_error("SHA-1 computation failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace detail {

inline double opt_number(const json& options, const char* key, double fallback)
{
    if (!options.contains(key)) return fallback;
    if (!options.at(key).is_number()) throw ConfigError(std::string("option '") + key + "' must be a number");
    return options.at(key).get<double>();
}

inline std::size_t opt_count(const json& options, const char* key, std::size_t fallback)
{
    const double v = opt_number(options, key, static_cast<double>(fallback));
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError(std::string("option '") + key + "' must be a positive integer");
    return static_cast<std::size_t>(v);
}

} // namespace detail

/* Fills scenario defaults so that the stored config is complete. */
inline json resolved_options(const ScenarioConfig& cfg)
{
    using detail::opt_count;
    using detail::opt_number;
    const json& o = cfg.options;
    const DerivedParams d = derive_params(cfg.params);
    json out = json::object();
    if (cfg.scenario == "g2") {
        out["atoms"] = opt_count(o, "atoms", 20000);
        out["points"] = opt_count(o, "points", 60);
        out["z_min"] = opt_number(o, "z_min", 0.3);
        out["z_max"] = opt_number(o, "z_max", 4.0);
    } else if (cfg.scenario == "fig3") {
        out["loss_length"] = opt_number(o, "loss_length", d.loss_length / d.r_c);
        out["points"] = opt_count(o, "points", 2000);
        out["z_min"] = opt_number(o, "z_min", 0.05);
        out["z_max"] = opt_number(o, "z_max", 3.0);
    } else if (cfg.scenario == "spectrum") {
        out["step"] = opt_number(o, "step", 0.1);
        out["d_max"] = opt_number(o, "d_max", 100.0);
        out["omega_max"] = opt_number(o, "omega_max", 6.0);
        out["omega_points"] = opt_count(o, "omega_points", 1201);
    } else if (cfg.scenario == "oracle-compare") {
        out["atoms"] = opt_count(o, "atoms", 6);
        out["epsilon"] = opt_number(o, "epsilon", probe_ratio(cfg.params));
        out["packing"] = opt_number(o, "packing", 0.05);
    }
    for (const auto& [key, value] : o.items())
        if (!out.contains(key)) throw ConfigError("option '" + key + "' does not apply to scenario " + cfg.scenario);
    return out;
}

inline json config_to_json(const ScenarioConfig& cfg)
{
    json j{{"scenario", cfg.scenario}, {"params", params_to_json(cfg.params)}, {"options", resolved_options(cfg)}};
    j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    return j;
}

/**
 * Reads a scenario config or a run manifest (whose "config" key holds the
 * resolved config). A "preset" key seeds the parameters before "params"
 * overrides are applied.
 */
inline ScenarioConfig config_from_json(const json& root)
{
    const json& j = root.contains("config") ? root.at("config") : root;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ScenarioConfig cfg;
    try {
        if (j.contains("scenario")) cfg.scenario = j.at("scenario").get<std::string>();
        PhysicalParams base = presets::rb87_sec5();
        if (j.contains("preset")) base = presets::by_name(j.at("preset").get<std::string>());
        cfg.params = j.contains("params") ? params_from_json(j.at("params"), base) : base;
        if (j.contains("seed") && !j.at("seed").is_null()) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("options")) cfg.options = j.at("options");
        if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    for (const auto& [key, value] : j.items()) {
        static const std::vector<std::string> known{"scenario", "preset", "params", "seed", "options", "threads"};
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");
    }
    return cfg;
}

struct RunResult
{
    int status = 0;
    std::vector<std::filesystem::path> files;
    json manifest;
};

namespace detail {

inline json csv_header(const ScenarioConfig& cfg, const DerivedParams& d, const RegimeReport& r, json extra)
{
    extra["scenario"] = cfg.scenario;
    extra["params"] = params_to_json(cfg.params);
    extra["derived"] = derived_to_json(d);
    extra["regime"] = regime_to_json(r);
    extra["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    return extra;
}

inline void run_derive(const ScenarioConfig& cfg, const DerivedParams& d, const RegimeReport& r, RunResult& res,
                       std::ostream& log)
{
    const auto path = cfg.out_dir / "derive.csv";
    CsvWriter csv(path, csv_header(cfg, d, r, {{"grid", "none"}}), {"quantity", "value", "unit"});
    const double v_rc = rddi_potential(d.r_c, cfg.params.c3);
    const std::vector<std::tuple<std::string, double, std::string>> rows{
        {"norm_A", d.norm_A, "1"},
        {"v_g0", d.v_g0, "m/s"},
        {"r_c", d.r_c, "m"},
        {"V_rc", v_rc, "rad/s"},
        {"n_ry", d.n_ry, "1/m^3"},
        {"r_ry", d.r_ry, "m"},
        {"t_max", d.t_max, "s"},
        {"loss_length", d.loss_length, "m"},
        {"loss_delay", d.loss_delay, "s"},
        {"loss_delay_from_length", d.loss_length / d.v_g0, "s"},
    };
    for (const auto& [name, value, unit] : rows) {
        csv.row(std::vector<std::string>{name, format_number(value), unit});
        log << std::left << std::setw(24) << name << format_number(value) << ' ' << unit << '\n';
    }
    res.files.push_back(path);
}

inline void run_g2(const ScenarioConfig& cfg, const json& opts, const DerivedParams& d, const RegimeReport& r,
                   RunResult& res, std::ostream& log)
{
    const std::size_t atoms = opts.at("atoms").get<std::size_t>();
    const std::size_t points = opts.at("points").get<std::size_t>();
    const double z_min = opts.at("z_min").get<double>(), z_max = opts.at("z_max").get<double>();
    if (!(z_min > 0.0 && z_max > z_min)) throw ConfigError("g2: need 0 < z_min < z_max");

    const double eps = probe_ratio(cfg.params);
    const Interaction protocol{};
    const double length = geometry_length(cfg.params.geometry) / d.r_c;
    Geometry g = Segment{length, 1.0};
    if (!std::holds_alternative<Segment>(cfg.params.geometry)) {
        const double s = 1.0 / d.r_c;
        if (const auto* b = std::get_if<Box>(&cfg.params.geometry)) g = Box{b->lx * s, b->ly * s, b->lz * s};
        if (const auto* c = std::get_if<Cylinder>(&cfg.params.geometry)) g = Cylinder{c->radius * s, c->length * s};
    }
    const AtomCloud cloud = sample_cloud(g, atoms, *cfg.seed);
    // protocol time unit r_c / v_g0 so that v_g0 = 1
    const std::vector<double> z = linspace(z_min, z_max, points);
    G2LightOptions go;
    go.threads = cfg.threads;
    const auto mc = g2_light(cloud, eps, protocol, 1.0, z, go);
    const auto cont = g2_light_continuum(eps, protocol, 1.0, z);

    json extra{{"grid", "tau"},
               {"normalization", to_string(Normalization::input_intensity)},
               {"normalization_constant", 2.0},
               {"n_r", "ordered atom pairs inside the averaging band"},
               {"atoms", atoms}};
    const auto path = cfg.out_dir / "g2.csv";
    CsvWriter csv(path, csv_header(cfg, d, r, extra), {"tau_s", "z_over_rc", "g2_band", "pairs", "gap", "g2_continuum"});
    std::size_t gaps = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        gaps += mc.gap[i];
        csv.row(std::vector<std::string>{format_number(z[i] * d.r_c / d.v_g0), format_number(z[i]),
                                         format_number(mc.values[i].real()), std::to_string(mc.pair_count[i]),
                                         std::to_string(int(mc.gap[i])), format_number(cont.values[i].real())});
    }
    log << "g2: " << z.size() << " tau points, " << gaps << " empty bands\n";
    res.files.push_back(path);
}

inline void run_fig3(const ScenarioConfig& cfg, const json& opts, const DerivedParams& d, const RegimeReport& r,
                     RunResult& res, std::ostream& log)
{
    const double ell = opts.at("loss_length").get<double>();
    const std::size_t points = opts.at("points").get<std::size_t>();
    const double z_min = opts.at("z_min").get<double>(), z_max = opts.at("z_max").get<double>();
    if (!(ell > 0.0)) throw ConfigError("fig3: loss_length must be positive");
    if (!(z_min > 0.0 && z_max > z_min)) throw ConfigError("fig3: need 0 < z_min < z_max");
    const auto z = linspace(z_min, z_max, points);
    LossOptions lo;
    lo.threads = cfg.threads;
    const LossProfile profile = lossy_profile(z, ell, Interaction{}, lo);

    json extra{{"grid", "z"},
               {"units", {{"z", "r_c"}, {"loss_length", "r_c"}}},
               {"normalization", to_string(Normalization::input_intensity)},
               {"loss_length", ell},
               {"converged", profile.converged},
               {"coverage_ok", profile.coverage_ok}};
    const auto path = cfg.out_dir / "fig3.csv";
    CsvWriter csv(path, csv_header(cfg, d, r, extra), {"z_over_rc", "lossless", "lossy"});
    double peak = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double lossy = std::norm(profile.lossy_I[i]);
        peak = std::max(peak, lossy);
        csv.row(std::vector<double>{z[i], std::norm(profile.lossless_I[i]), lossy});
    }
    log << "fig3: " << points << " points, lossy maximum " << format_number(peak) << '\n';
    res.files.push_back(path);
}

inline void run_spectrum(const ScenarioConfig& cfg, const json& opts, const DerivedParams& d, const RegimeReport& r,
                         RunResult& res, std::ostream& log)
{
    const double step = opts.at("step").get<double>();
    const double d_max = opts.at("d_max").get<double>();
    const double w_max = opts.at("omega_max").get<double>();
    const std::size_t w_points = opts.at("omega_points").get<std::size_t>();
    if (!(step > 0.0 && d_max > step && w_max > 0.0)) throw ConfigError("spectrum: invalid grid options");

    const auto count = static_cast<std::size_t>(std::llround(d_max / step)) + 1;
    std::vector<double> tau(count);
    for (std::size_t i = 0; i < count; ++i) tau[i] = step * static_cast<double>(i);
    G1LightOptions go;
    go.normalization = Normalization::input_intensity;
    go.threads = cfg.threads;
    const auto half = g1_light_continuum(1.0, probe_ratio(cfg.params), Interaction{}, 1.0, tau, go);
    const auto g1 = hermitian_extend(half);
    SpectrumOptions so;
    so.threads = cfg.threads;
    const auto s = spectrum(g1, linspace(-w_max, w_max, w_points), so);
    const double width = fwhm(s);

    const double t_unit = d.r_c / d.v_g0;
    json extra{{"normalization", "overlap integral per unit line density"},
               {"fwhm_omega", width / t_unit},
               {"fwhm_over_vg0_rc", width},
               {"windowed", s.windowed}};
    extra["grid"] = "tau";
    const auto g1_path = cfg.out_dir / "g1.csv";
    {
        CsvWriter csv(g1_path, csv_header(cfg, d, r, extra), {"tau_s", "tau_over_rc_vg0", "g1_re", "g1_im"});
        for (std::size_t i = 0; i < half.size(); ++i)
            csv.row(std::vector<double>{half.grid[i] * t_unit, half.grid[i], half.values[i].real(), half.values[i].imag()});
    }
    extra["grid"] = "omega";
    const auto s_path = cfg.out_dir / "spectrum.csv";
    {
        CsvWriter csv(s_path, csv_header(cfg, d, r, extra), {"omega_rad_s", "omega_over_vg0_rc", "S"});
        for (std::size_t i = 0; i < s.size(); ++i)
            csv.row(std::vector<double>{s.grid[i] / t_unit, s.grid[i], s.values[i].real()});
    }
    log << "spectrum: FWHM " << format_number(width) << " v_g0/r_c = " << format_number(width / t_unit)
        << " rad/s" << (s.windowed ? " (windowed)" : "") << '\n';
    res.files.push_back(g1_path);
    res.files.push_back(s_path);
}

inline void run_oracle_compare(const ScenarioConfig& cfg, const json& opts, const DerivedParams& d,
                               const RegimeReport& r, RunResult& res, std::ostream& log)
{
    const std::size_t atoms = opts.at("atoms").get<std::size_t>();
    const double eps = opts.at("epsilon").get<double>();
    const double packing = opts.at("packing").get<double>();
    if (atoms < 2 || atoms > 10) throw ConfigError("oracle-compare: atoms must lie in [2, 10]");
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("oracle-compare: epsilon must lie in (0, 1)");
    const AtomCloud cloud = packed_line_cloud(atoms, eps, packing, *cfg.seed);
    const OracleComparison cmp = compare_g2(cloud, eps);

    json z = json::array();
    for (const auto& p : cloud.positions) z.push_back(p.z());
    json extra{{"grid", "atom pairs"},
               {"units", "protocol (r_c = 1, T = 1)"},
               {"positions_z", z},
               {"max_relative", cmp.max_relative},
               {"median_relative", cmp.median_relative},
               {"within_tolerance", cmp.within}};
    const auto path = cfg.out_dir / "oracle.csv";
    CsvWriter csv(path, csv_header(cfg, d, r, extra), {"j", "jp", "distance", "exact_g2", "pair_g2", "relative"});
    for (std::size_t a = 0; a < atoms; ++a)
        for (std::size_t b = a + 1; b < atoms; ++b)
            csv.row(std::vector<std::string>{std::to_string(a), std::to_string(b), format_number(cloud.distance(a, b)),
                                             format_number(cmp.exact(a, b)), format_number(cmp.pair(a, b)),
                                             format_number(cmp.relative(a, b))});
    log << "oracle-compare: max relative G2 deviation " << format_number(cmp.max_relative) << ", median "
        << format_number(cmp.median_relative) << '\n';
    res.files.push_back(path);
}

inline void run_validity(const ScenarioConfig& cfg, const DerivedParams& d, const RegimeReport& r, RunResult& res,
                         std::ostream& log)
{
    const RegimeThresholds th;
    const VolumeIntegral vol = volume_integral_check(cfg.params.storage_T, cfg.params.c3);
    const SinVolumeIntegral sin_int =
        sin_volume_integral(cfg.params.storage_T, cfg.params.c3, geometry_length(cfg.params.geometry));
    const auto path = cfg.out_dir / "validity.csv";
    CsvWriter csv(path, csv_header(cfg, d, r, {{"grid", "none"}, {"sin_integral_cutoff", sin_int.cutoff}}),
                  {"quantity", "value", "threshold", "ok"});
    auto row = [&](const std::string& name, double value, double threshold, bool ok) {
        csv.row(std::vector<std::string>{name, format_number(value), format_number(threshold), ok ? "1" : "0"});
        log << std::left << std::setw(24) << name << format_number(value) << (ok ? "  ok" : "  FAIL") << '\n';
    };
    row("n_ry_rc3", r.n_ry_rc3, th.small, r.n_ry_rc3_ok);
    row("rc_over_rry", r.rc_over_rry, th.rc_over_rry_max, r.rc_over_rry_ok);
    row("t_over_tmax", r.t_over_tmax, th.t_over_tmax_max, r.t_over_tmax_ok);
    row("rf_margin", r.rf_margin, th.rf_margin_min, r.rf_margin_ok);
    row("norm_defect_first", r.norm_defect.first, th.norm_defect_max, r.norm_defect.first_ok);
    row("norm_defect_second", r.norm_defect.second, th.norm_defect_max, r.norm_defect.second_ok);
    row("volume_integral_ratio", vol.ratio, 1e-3, std::abs(vol.ratio - 1.0) <= 1e-3);
    row("sin_integral_over_rc3", sin_int.in_rc3, 0.0, true);
    res.files.push_back(path);
}

} // namespace detail

/**
 * Runs one scenario and writes its CSV files plus manifest.json into
 * cfg.out_dir. Returns status 3 without writing anything when a hard
 * regime condition fails and cfg.force is false.
 */
inline RunResult run_scenario(const ScenarioConfig& cfg, std::ostream& log)
{
    if (std::find(scenario_names().begin(), scenario_names().end(), cfg.scenario) == scenario_names().end())
        throw ConfigError("unknown scenario '" + cfg.scenario + "'");
    if (is_stochastic(cfg.scenario) && !cfg.seed) throw ConfigError("scenario " + cfg.scenario + " needs --seed");

    json config;
    json opts;
    DerivedParams d;
    try {
        config = config_to_json(cfg);
        opts = config.at("options");
        d = derive_params(cfg.params);
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }

    std::vector<double> tau;
    if (cfg.scenario == "g2")
        for (double z : linspace(opts.at("z_min").get<double>(), opts.at("z_max").get<double>(),
                                 opts.at("points").get<std::size_t>()))
            tau.push_back(z * d.r_c / d.v_g0);
    const RegimeReport report = regime_check(cfg.params, tau);

    RunResult res;
    if (report.hard_failure() && !cfg.force) {
        log << "regime check failed (use --force to run anyway):\n" << regime_to_json(report).dump(2) << '\n';
        res.status = 3;
        return res;
    }

    std::filesystem::create_directories(cfg.out_dir);
    try {
        if (cfg.scenario == "derive") detail::run_derive(cfg, d, report, res, log);
        else if (cfg.scenario == "g2") detail::run_g2(cfg, opts, d, report, res, log);
        else if (cfg.scenario == "fig3") detail::run_fig3(cfg, opts, d, report, res, log);
        else if (cfg.scenario == "spectrum") detail::run_spectrum(cfg, opts, d, report, res, log);
        else if (cfg.scenario == "oracle-compare") detail::run_oracle_compare(cfg, opts, d, report, res, log);
        else detail::run_validity(cfg, d, report, res, log);
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }

    json outputs = json::object();
    for (const auto& f : res.files) outputs[f.filename().string()] = git_blob_sha1(read_file(f));
    res.manifest = {{"config", config},
                    {"derived", derived_to_json(d)},
                    {"regime", regime_to_json(report)},
                    {"inputs_sha1", git_blob_sha1(config.dump())},
                    {"outputs", outputs},
                    {"forced", report.hard_failure()}};
    std::ofstream(cfg.out_dir / "manifest.json", std::ios::binary) << res.manifest.dump(2) << '\n';
    return res;
}

} // namespace rydpair::io

#endif
