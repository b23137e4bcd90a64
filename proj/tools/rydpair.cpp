#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <rydpair/io/scenario.hpp>

namespace {

struct Flags
{
    std::string preset;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool force = false;
    unsigned threads = 1;
    std::optional<double> loss_length;
    std::optional<std::size_t> atoms;
    std::optional<double> epsilon;
};

const char* describe(const std::string& scenario)
{
    if (scenario == "derive") return "print derived scales for the chosen parameters";
    if (scenario == "g2") return "band-averaged g2(tau) of the retrieved light from a sampled cloud";
    if (scenario == "fig3") return "continuum intensity correlation with and without polariton loss";
    if (scenario == "spectrum") return "line-cloud g1 and its spectrum with FWHM";
    if (scenario == "oracle-compare") return "exact small-N g2 against the pair model";
    return "regime checks and norm-defect estimates";
}

rydpair::io::ScenarioConfig resolve(const std::string& scenario, const Flags& f)
{
    using namespace rydpair::io;
    ScenarioConfig cfg;
    if (!f.config.empty()) {
        json j;
        try {
            j = json::parse(read_file(f.config));
        } catch (const json::parse_error& e) {
            throw ConfigError(f.config + ": " + e.what());
        }
        cfg = config_from_json(j);
        if (!f.preset.empty()) throw ConfigError("--preset and --config are mutually exclusive");
    } else if (!f.preset.empty()) {
        try {
            cfg.params = rydpair::presets::by_name(f.preset);
        } catch (const rydpair::InvalidInput& e) {
            throw ConfigError(e.what());
        }
    }
    if (!cfg.scenario.empty() && cfg.scenario != scenario)
        throw ConfigError("config is for scenario '" + cfg.scenario + "', not '" + scenario + "'");
    cfg.scenario = scenario;
    if (f.seed) cfg.seed = f.seed;
    if (f.loss_length) cfg.options["loss_length"] = *f.loss_length;
    if (f.atoms) cfg.options["atoms"] = *f.atoms;
    if (f.epsilon) {
        if (scenario == "oracle-compare") cfg.options["epsilon"] = *f.epsilon;
        else {
            try {
                cfg.params = params_from_json(json{{"epsilon", *f.epsilon}}, cfg.params);
            } catch (const rydpair::InvalidInput& e) {
                throw ConfigError(e.what());
            }
        }
    }
    cfg.force = f.force;
    cfg.threads = f.threads;
    if (!f.out.empty()) cfg.out_dir = f.out;
    else if (const char* env = std::getenv("RYDPAIR_OUT_DIR")) cfg.out_dir = env;
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Pair-correlation model of RDDI-induced light correlations in Rydberg ensembles"};
    app.require_subcommand(1);
    Flags flags;
    const std::string presets = [] {
        std::string s;
        for (const auto& n : rydpair::presets::names()) s += (s.empty() ? "" : ", ") + n;
        return s;
    }();

    for (const auto& name : rydpair::io::scenario_names()) {
        auto* sub = app.add_subcommand(name, describe(name));
        sub->add_option("--preset", flags.preset, "parameter preset (" + presets + ")");
        sub->add_option("--config", flags.config, "JSON config or run manifest")->check(CLI::ExistingFile);
        sub->add_option("--seed", flags.seed, "RNG seed (required for sampled scenarios)");
        sub->add_option("--out", flags.out, "output directory (default $RYDPAIR_OUT_DIR or .)");
        sub->add_flag("--force", flags.force, "run despite a failed regime check");
        sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
        if (name == "fig3") sub->add_option("--loss-length", flags.loss_length, "loss length in units of r_c");
        if (name == "g2" || name == "oracle-compare") sub->add_option("--atoms", flags.atoms, "number of atoms");
        sub->add_option("--epsilon", flags.epsilon, "probe ratio Omega_p0 / Omega_c");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto cfg = resolve(app.get_subcommands().front()->get_name(), flags);
        const auto res = rydpair::io::run_scenario(cfg, std::cout);
        if (res.status == 0) {
            for (const auto& f : res.files) std::cout << "wrote " << f.string() << '\n';
            std::cout << "wrote " << (cfg.out_dir / "manifest.json").string() << '\n';
        }
        return res.status;
    } catch (const rydpair::io::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
