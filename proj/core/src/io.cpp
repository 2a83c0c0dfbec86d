#include "hbl/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "cache format assumes a little-endian host");

namespace hbl {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<Cell> cells) {
    if (cells.size() != header_.size())
        throw std::invalid_argument("csv: row width does not match header");
    rows_.push_back(std::move(cells));
}

std::string CsvWriter::str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += header_[i];
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            if (const double* d = std::get_if<double>(&row[i])) {
                out += format_double(*d);
            } else if (const int64_t* n = std::get_if<int64_t>(&row[i])) {
                out += std::to_string(*n);
            } else {
                out += std::get<std::string>(row[i]);
            }
        }
        out += '\n';
    }
    return out;
}

void CsvWriter::write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << str();
}

uint64_t fnv1a64(std::span<const unsigned char> bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a64_str(std::string_view s) {
    return fnv1a64({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
}

uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    return fnv1a64(bytes);
}

namespace {

constexpr char kMagic[4] = {'H', 'B', 'L', '1'};

template <typename T>
void put(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void get(std::ifstream& f, T& v) {
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw std::runtime_error("cache: truncated file");
}

void put_doubles(std::ofstream& f, std::span<const double> xs) {
    f.write(reinterpret_cast<const char*>(xs.data()),
            static_cast<std::streamsize>(xs.size() * sizeof(double)));
}
void get_doubles(std::ifstream& f, std::span<double> xs) {
    f.read(reinterpret_cast<char*>(xs.data()),
           static_cast<std::streamsize>(xs.size() * sizeof(double)));
    if (!f) throw std::runtime_error("cache: truncated file");
}

void write_header(std::ofstream& f, CacheKind kind) {
    f.write(kMagic, 4);
    put<uint32_t>(f, 1u); // format version
    put<uint8_t>(f, static_cast<uint8_t>(kind));
}

CacheKind read_header(std::ifstream& f) {
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("cache: bad magic");
    uint32_t version;
    get(f, version);
    if (version != 1u) throw std::runtime_error("cache: unsupported version");
    uint8_t kind;
    get(f, kind);
    return static_cast<CacheKind>(kind);
}

} // namespace

void write_stack_cache(const std::filesystem::path& path, CacheKind kind,
                       const SpatialGrid& grid, const std::vector<double>& times,
                       const std::vector<std::vector<double>>& values) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_header(f, kind);
    put<uint8_t>(f, static_cast<uint8_t>(grid.dim));
    for (int a = 0; a < 2; ++a) {
        put<double>(f, grid.lo[a]);
        put<double>(f, grid.hi[a]);
        put<uint32_t>(f, static_cast<uint32_t>(grid.npts[a]));
    }
    put<uint32_t>(f, static_cast<uint32_t>(times.size()));
    put_doubles(f, times);
    for (const auto& slice : values) {
        if (slice.size() != grid.size()) throw std::invalid_argument("cache: slice size");
        put_doubles(f, slice);
    }
}

void read_stack_cache(const std::filesystem::path& path, CacheKind& kind,
                      SpatialGrid& grid, std::vector<double>& times,
                      std::vector<std::vector<double>>& values) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    kind = read_header(f);
    if (kind == CacheKind::ensemble) throw std::runtime_error("cache: not a stack file");
    uint8_t dim;
    get(f, dim);
    grid.dim = dim;
    for (int a = 0; a < 2; ++a) {
        get(f, grid.lo[a]);
        get(f, grid.hi[a]);
        uint32_t n;
        get(f, n);
        grid.npts[a] = static_cast<int>(n);
    }
    uint32_t nt;
    get(f, nt);
    times.resize(nt);
    get_doubles(f, times);
    values.assign(nt, std::vector<double>(grid.size()));
    for (auto& slice : values) get_doubles(f, slice);
}

void write_ensemble_cache(const std::filesystem::path& path, const EnsembleBlob& blob) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_header(f, CacheKind::ensemble);
    put<uint8_t>(f, static_cast<uint8_t>(blob.dim));
    put<uint64_t>(f, static_cast<uint64_t>(blob.npaths));
    put<uint32_t>(f, static_cast<uint32_t>(blob.times.size()));
    put_doubles(f, blob.times);
    put_doubles(f, blob.data);
}

EnsembleBlob read_ensemble_cache(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    if (read_header(f) != CacheKind::ensemble)
        throw std::runtime_error("cache: not an ensemble file");
    EnsembleBlob blob;
    uint8_t dim;
    get(f, dim);
    blob.dim = dim;
    uint64_t npaths;
    get(f, npaths);
    blob.npaths = npaths;
    uint32_t nt;
    get(f, nt);
    blob.times.resize(nt);
    get_doubles(f, blob.times);
    blob.data.resize(blob.npaths * nt * blob.dim);
    get_doubles(f, blob.data);
    return blob;
}

void write_stack_csv(const std::filesystem::path& path, const SpatialGrid& grid,
                     const std::vector<double>& times,
                     const std::vector<std::vector<double>>& values) {
    std::vector<std::string> header{"t", "x"};
    if (grid.dim == 2) header.push_back("y");
    header.push_back("value");
    CsvWriter w(header);
    std::vector<double> xy(2);
    for (std::size_t k = 0; k < times.size(); ++k) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            grid.node_coords(j, xy);
            std::vector<CsvWriter::Cell> row{times[k], xy[0]};
            if (grid.dim == 2) row.emplace_back(xy[1]);
            row.emplace_back(values[k][j]);
            w.add_row(std::move(row));
        }
    }
    w.write(path);
}

} // namespace hbl
