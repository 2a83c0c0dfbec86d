#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace hbl {

/// Fully-resolved run configuration. Parsed from strict JSON: unknown keys
/// anywhere are rejected with a line-anchored message.
struct RunConfig {
    std::string experiment;
    std::string landscape_name; // empty = experiment default
    std::map<std::string, double> landscape_params;
    double beta = 1.0;
    double gamma = 1.0;
    std::optional<double> horizon;   // defaults to gamma (sgd-invariant uses 50)
    std::optional<double> grid_lo;
    std::optional<double> grid_hi;   // default: landscape box(beta)
    int grid_npts = 801;
    std::size_t mc_n = 100000;
    int mc_k = 200;
    uint64_t seed = 12345;
    std::filesystem::path out = "results";
    std::map<std::string, double> tolerances;
    bool export_paths = false;

    double tol(const std::string& key, double dflt) const {
        const auto it = tolerances.find(key);
        return it == tolerances.end() ? dflt : it->second;
    }

    /// Canonical JSON echo of every field (sorted keys), used for the
    /// manifest and as the cache key.
    std::string resolved_json() const;
};

/// Parses and validates config text. `filename` only decorates diagnostics.
/// Throws ConfigError on any structural or value problem.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// `default_experiment`, when nonempty, fills a missing "experiment" key and
/// must match an explicit one.
RunConfig parse_config(const std::string& text, const std::string& filename,
                       const std::string& default_experiment = "");
RunConfig load_config(const std::filesystem::path& path,
                      const std::string& default_experiment = "");

/// Built-in defaults for a named experiment (throws on unknown name).
RunConfig default_config(const std::string& experiment);

} // namespace hbl
