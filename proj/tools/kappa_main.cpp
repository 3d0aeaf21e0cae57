#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kappa/config.hpp"
#include "kappa/figures.hpp"

using kappa::config::CampaignConfig;
using kappa::config::ConfigError;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string engine;
    std::uint64_t seed = 0;
    bool classical_only = false;
};

/// Config file first (defaults when none), then flag overrides.
CampaignConfig load_config(const CommonOpts& o, bool seed_given) {
    CampaignConfig cfg = o.config_path.empty()
                             ? CampaignConfig{}
                             : kappa::config::parse_config(o.config_path);
    if (!o.engine.empty()) cfg.engine = kappa::config::engine_from_name(o.engine);
    if (seed_given) cfg.seed = o.seed;
    if (!o.out_dir.empty()) cfg.outdir = o.out_dir;
    if (o.classical_only) cfg.classical_only = true;
    cfg.validate();
    return cfg;
}

void print_output(const kappa::figures::FigureOutput& out) {
    std::printf("wrote %zu files under %s\n", out.files.size(),
                out.directory.c_str());
    for (const auto& f : out.files) std::printf("  %s\n", f.c_str());
}

void print_error_json(const std::string& command, const std::string& what,
                      int exit_code) {
    nlohmann::json j;
    j["command"] = command;
    j["error"] = what;
    j["exit_code"] = exit_code;
    std::printf("%s\n", j.dump().c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slot-plane interference deficit toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::vector<CLI::Option*> seed_opts;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path,
                        "campaign configuration file (key = value lines)");
        sub->add_option("--out", opts.out_dir,
                        "output directory, overriding the config's outdir");
        seed_opts.push_back(
            sub->add_option("--seed", opts.seed, "override the campaign seed"));
        sub->add_option("--engine", opts.engine,
                        "pathintegral, fdtd, or both (overrides the config)");
        sub->add_flag("--classical-only", opts.classical_only,
                      "single-crossing propagation only (pathintegral)");
    };

    CLI::App* sim = app.add_subcommand(
        "simulate", "engine curves plus synthetic measurement runs");
    add_common(sim);
    CLI::App* ana = app.add_subcommand(
        "analyze", "per-run deficits and convergence from simulated runs");
    add_common(ana);
    CLI::App* fig =
        app.add_subcommand("figure", "produce one figure's data, plot, manifest");
    add_common(fig);
    std::string figure_id;
    {
        std::string ids;
        for (const auto& k : kappa::figures::figure_ids())
            ids += (ids.empty() ? "" : ", ") + k;
        fig->add_option("id", figure_id, "one of: " + ids)->required();
    }
    CLI::App* val = app.add_subcommand(
        "validate-config", "parse and range-check a configuration file");
    add_common(val);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    bool seed_given = false;
    for (const CLI::Option* o : seed_opts) seed_given |= o->count() > 0;

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const CampaignConfig cfg = load_config(opts, seed_given);
        if (val->parsed()) {
            std::printf("ok %s\n", cfg.config_hash().c_str());
        } else if (sim->parsed()) {
            print_output(kappa::figures::run_simulate(cfg));
        } else if (ana->parsed()) {
            print_output(kappa::figures::run_analyze(cfg));
        } else {
            print_output(kappa::figures::run_figure(figure_id, cfg));
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error_json(command, e.what(), 3);
        return 3;
    }
    return 0;
}
