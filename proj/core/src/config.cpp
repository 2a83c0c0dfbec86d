#include "hbl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hbl {

using nlohmann::json;

namespace {

const std::set<std::string> kTopKeys = {"experiment", "landscape", "beta",   "gamma",
                                        "horizon",    "grid",      "mc",     "out",
                                        "tolerances", "export_paths"};
const std::set<std::string> kLandscapeKeys = {"name", "params"};
const std::set<std::string> kGridKeys = {"lo", "hi", "npts"};
const std::set<std::string> kMcKeys = {"N", "K", "seed"};
const std::set<std::string> kTolKeys = {"linf", "w1", "dpe", "pass_fraction", "mass",
                                        "oracle", "escape"};

// Best-effort line anchor: first occurrence of "key" (quoted) in the text.
int line_of_key(const std::string& text, const std::string& key) {
    const std::string needle = "\"" + key + "\"";
    const std::size_t pos = text.find(needle);
    if (pos == std::string::npos) return -1;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
}

[[noreturn]] void fail(const std::string& filename, const std::string& text,
                       const std::string& key, const std::string& what) {
    const int line = line_of_key(text, key);
    std::ostringstream os;
    os << filename << ":";
    if (line > 0) os << line << ":";
    os << " " << what;
    throw ConfigError(os.str());
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& scope, const std::string& filename,
                const std::string& text) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.contains(key))
            fail(filename, text, key, "unknown key '" + key + "' in " + scope);
    }
}

int line_of_offset(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
}

} // namespace

RunConfig parse_config(const std::string& text, const std::string& filename,
                       const std::string& default_experiment) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::ostringstream os;
        os << filename << ":" << line_of_offset(text, e.byte) << ": " << e.what();
        throw ConfigError(os.str());
    }
    if (!root.is_object()) throw ConfigError(filename + ":1: config must be a JSON object");
    check_keys(root, kTopKeys, "config", filename, text);

    RunConfig cfg;
    if (root.contains("experiment")) {
        if (!root["experiment"].is_string())
            fail(filename, text, "experiment", "'experiment' must be a string");
        cfg.experiment = root["experiment"].get<std::string>();
        if (!default_experiment.empty() && cfg.experiment != default_experiment)
            fail(filename, text, "experiment",
                 "config names experiment '" + cfg.experiment + "' but '" +
                     default_experiment + "' was requested");
    } else if (!default_experiment.empty()) {
        cfg.experiment = default_experiment;
    } else {
        fail(filename, text, "experiment", "missing 'experiment'");
    }

    if (root.contains("landscape")) {
        const json& ls = root["landscape"];
        if (!ls.is_object()) fail(filename, text, "landscape", "'landscape' must be an object");
        check_keys(ls, kLandscapeKeys, "landscape", filename, text);
        if (ls.contains("name")) cfg.landscape_name = ls["name"].get<std::string>();
        if (ls.contains("params")) {
            for (const auto& [key, value] : ls["params"].items()) {
                if (!value.is_number())
                    fail(filename, text, key, "landscape param '" + key + "' must be a number");
                cfg.landscape_params[key] = value.get<double>();
            }
        }
    }
    if (root.contains("beta")) {
        cfg.beta = root["beta"].get<double>();
        if (!(cfg.beta > 0.0)) fail(filename, text, "beta", "'beta' must be > 0");
    }
    if (root.contains("gamma")) {
        cfg.gamma = root["gamma"].get<double>();
        if (!(cfg.gamma > 0.0)) fail(filename, text, "gamma", "'gamma' must be > 0");
    }
    if (root.contains("horizon")) {
        cfg.horizon = root["horizon"].get<double>();
        if (!(*cfg.horizon > 0.0)) fail(filename, text, "horizon", "'horizon' must be > 0");
    }
    if (root.contains("grid")) {
        const json& g = root["grid"];
        check_keys(g, kGridKeys, "grid", filename, text);
        if (g.contains("lo")) cfg.grid_lo = g["lo"].get<double>();
        if (g.contains("hi")) cfg.grid_hi = g["hi"].get<double>();
        if (g.contains("npts")) {
            cfg.grid_npts = g["npts"].get<int>();
            if (cfg.grid_npts < 3) fail(filename, text, "npts", "'grid.npts' must be >= 3");
        }
        if (cfg.grid_lo.has_value() != cfg.grid_hi.has_value())
            fail(filename, text, "grid", "'grid.lo' and 'grid.hi' must be given together");
        if (cfg.grid_lo && !(*cfg.grid_hi > *cfg.grid_lo))
            fail(filename, text, "grid", "'grid.hi' must exceed 'grid.lo'");
    }
    if (root.contains("mc")) {
        const json& m = root["mc"];
        check_keys(m, kMcKeys, "mc", filename, text);
        if (m.contains("N")) {
            const int64_t n = m["N"].get<int64_t>();
            if (n < 1) fail(filename, text, "N", "'mc.N' must be >= 1");
            cfg.mc_n = static_cast<std::size_t>(n);
        }
        if (m.contains("K")) {
            cfg.mc_k = m["K"].get<int>();
            if (cfg.mc_k < 1) fail(filename, text, "K", "'mc.K' must be >= 1");
        }
        if (m.contains("seed")) cfg.seed = m["seed"].get<uint64_t>();
    }
    if (root.contains("out")) cfg.out = root["out"].get<std::string>();
    if (root.contains("tolerances")) {
        for (const auto& [key, value] : root["tolerances"].items()) {
            if (!kTolKeys.contains(key))
                fail(filename, text, key, "unknown tolerance '" + key + "'");
            cfg.tolerances[key] = value.get<double>();
        }
    }
    if (root.contains("export_paths")) cfg.export_paths = root["export_paths"].get<bool>();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path,
                      const std::string& default_experiment) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path.string(), default_experiment);
}

std::string RunConfig::resolved_json() const {
    json j;
    j["experiment"] = experiment;
    j["landscape"]["name"] = landscape_name;
    j["landscape"]["params"] = landscape_params;
    j["beta"] = beta;
    j["gamma"] = gamma;
    j["horizon"] = horizon.value_or(gamma);
    if (grid_lo) {
        j["grid"]["lo"] = *grid_lo;
        j["grid"]["hi"] = *grid_hi;
    }
    j["grid"]["npts"] = grid_npts;
    j["mc"]["N"] = mc_n;
    j["mc"]["K"] = mc_k;
    j["mc"]["seed"] = seed;
    j["out"] = out.string();
    j["tolerances"] = tolerances;
    j["export_paths"] = export_paths;
    return j.dump(2);
}

RunConfig default_config(const std::string& experiment) {
    RunConfig cfg;
    cfg.experiment = experiment;
    if (experiment == "smooth") {
        cfg.landscape_name = "rugged1d";
        cfg.beta = 1.0;
        cfg.gamma = 1.0;
    } else if (experiment == "pde-check") {
        cfg.landscape_name = "doublewell1d";
        cfg.beta = 1.0;
        cfg.gamma = 1.0;
    } else if (experiment == "duality") {
        cfg.beta = 1.0;
        cfg.gamma = 1.0;
    } else if (experiment == "girsanov") {
        cfg.beta = 1.0;
        cfg.gamma = 1.0;
    } else if (experiment == "bridge") {
        cfg.landscape_name = "doublewell1d";
        cfg.beta = 2.0;
        cfg.gamma = 1.0;
    } else if (experiment == "verify-theorem") {
        cfg.landscape_name = "quadratic";
        cfg.beta = 1.0;
        cfg.gamma = 1.0;
    } else if (experiment == "optimize") {
        cfg.landscape_name = "rugged1d";
        cfg.beta = 1.0;
        cfg.gamma = 2.0;
        cfg.mc_k = 200;
    } else if (experiment == "sgd-invariant") {
        cfg.landscape_name = "doublewell1d";
        cfg.beta = 2.0;
        cfg.gamma = 1.0;
        cfg.horizon = 50.0;
        cfg.mc_k = 5000;
    } else {
        throw ConfigError("unknown experiment '" + experiment + "'");
    }
    return cfg;
}

} // namespace hbl
