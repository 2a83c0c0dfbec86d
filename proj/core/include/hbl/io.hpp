#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hbl/grid.hpp"

namespace hbl {

/// Deterministic CSV writer: doubles are printed with %.17g in the C locale,
/// so identical data produces identical bytes.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header);
    using Cell = std::variant<double, int64_t, std::string>;
    void add_row(std::vector<Cell> cells);
    std::string str() const;
    void write(const std::filesystem::path& path) const;

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

std::string format_double(double v);

/// FNV-1a 64-bit over a byte span / file contents; used for manifest hashes
/// and cache keys.
uint64_t fnv1a64(std::span<const unsigned char> bytes);
uint64_t fnv1a64_str(std::string_view s);
uint64_t hash_file(const std::filesystem::path& path);

/// Binary cache ("HBL1"): little-endian file holding either a grid stack or
/// a path ensemble. Header carries grid metadata so readers can validate.
enum class CacheKind : uint8_t { density = 0, scalar = 1, ensemble = 2 };

struct EnsembleBlob {
    std::vector<double> times;
    int dim = 1;
    std::size_t npaths = 0;
    std::vector<double> data; // [path][time][dim]
};

void write_stack_cache(const std::filesystem::path& path, CacheKind kind,
                       const SpatialGrid& grid, const std::vector<double>& times,
                       const std::vector<std::vector<double>>& values);
void read_stack_cache(const std::filesystem::path& path, CacheKind& kind,
                      SpatialGrid& grid, std::vector<double>& times,
                      std::vector<std::vector<double>>& values);

void write_ensemble_cache(const std::filesystem::path& path, const EnsembleBlob& blob);
EnsembleBlob read_ensemble_cache(const std::filesystem::path& path);

/// Long-format CSV (t, x[, y], value) for a stack, matching the cache content.
void write_stack_csv(const std::filesystem::path& path, const SpatialGrid& grid,
                     const std::vector<double>& times,
                     const std::vector<std::vector<double>>& values);

} // namespace hbl
