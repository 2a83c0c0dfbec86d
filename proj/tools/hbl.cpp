// hbl - batch front-end for the half-bridge laboratory experiments.
// Exit codes: 0 = all checks passed, 1 = a scientific check failed,
// 2 = configuration or usage error.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hbl/config.hpp"
#include "hbl/experiments.hpp"

namespace {

struct CliOverrides {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<std::string> out;
};

int execute(const std::string& experiment, const CliOverrides& ov) {
    hbl::RunConfig cfg;
    if (!ov.config_path.empty()) {
        cfg = hbl::load_config(ov.config_path, experiment);
    } else if (!experiment.empty()) {
        cfg = hbl::default_config(experiment);
    } else {
        std::fprintf(stderr, "error: 'run' needs --config\n");
        return 2;
    }
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.out) cfg.out = *ov.out;

    const hbl::ExperimentOutcome outcome = hbl::run_experiment(cfg);
    for (const hbl::CheckRow& c : outcome.checks)
        std::printf("[%s] %s: value=%.6g threshold=%.6g\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.value, c.threshold);
    std::printf("%s: %s (artifacts in %s)\n", cfg.experiment.c_str(),
                outcome.pass ? "PASS" : "FAIL", cfg.out.string().c_str());
    return outcome.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hbl - numerical laboratory for heat-smoothed energy landscapes,\n"
                 "half-bridge diffusions, and reverse-time stochastic control"};
    app.require_subcommand(1);

    bool list_json = false;
    CLI::App* list = app.add_subcommand("list", "list available experiments");
    list->add_flag("--json", list_json, "machine-readable output");

    struct SubSpec {
        CLI::App* cmd;
        CliOverrides ov;
        std::string experiment;
    };
    std::vector<std::unique_ptr<SubSpec>> subs;

    auto add_runner = [&](const std::string& name, const std::string& desc,
                          bool config_required) {
        auto spec = std::make_unique<SubSpec>();
        spec->experiment = name == "run" ? "" : name;
        spec->cmd = app.add_subcommand(name, desc);
        auto* copt = spec->cmd->add_option("--config", spec->ov.config_path,
                                           "JSON run configuration");
        if (config_required) copt->required();
        spec->cmd->add_option("--seed", spec->ov.seed, "override the master seed");
        spec->cmd->add_option("--out", spec->ov.out, "override the output directory");
        subs.push_back(std::move(spec));
    };

    add_runner("run", "run the experiment named in a config file", true);
    for (const hbl::ExperimentInfo& info : hbl::list_experiments()) {
        if (info.name == "girsanov" || info.name == "sgd-invariant")
            continue; // reachable through 'run'
        add_runner(info.name, info.description, false);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0; // --help
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }

    try {
        if (list->parsed()) {
            if (list_json) {
                nlohmann::json arr = nlohmann::json::array();
                for (const hbl::ExperimentInfo& info : hbl::list_experiments())
                    arr.push_back({{"name", info.name}, {"description", info.description}});
                std::printf("%s\n", arr.dump(2).c_str());
            } else {
                for (const hbl::ExperimentInfo& info : hbl::list_experiments())
                    std::printf("%-16s %s\n", info.name.c_str(), info.description.c_str());
            }
            return 0;
        }
        for (const auto& spec : subs)
            if (spec->cmd->parsed()) return execute(spec->experiment, spec->ov);
        std::fprintf(stderr, "error: no subcommand\n");
        return 2;
    } catch (const hbl::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
