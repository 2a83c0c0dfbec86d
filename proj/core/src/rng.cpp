#include "hbl/rng.hpp"

#include <cmath>
#include <numbers>
#include <string_view>

namespace hbl {

namespace {
constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<uint32_t, 4>& c, const std::array<uint32_t, 2>& k) {
    const uint64_t p0 = static_cast<uint64_t>(kMul0) * c[0];
    const uint64_t p1 = static_cast<uint64_t>(kMul1) * c[2];
    const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
    const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}
} // namespace

std::array<uint32_t, 4> Philox4x32::block(std::array<uint32_t, 2> key,
                                          std::array<uint32_t, 4> ctr) {
    for (int r = 0; r < 10; ++r) {
        round_once(ctr, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

uint64_t RandomStream::next_bits() {
    const uint64_t block_idx = draw_ >> 1;
    const unsigned lane = static_cast<unsigned>(draw_ & 1u);
    if (!blk_valid_ || lane == 0) {
        const std::array<uint32_t, 4> ctr = {
            static_cast<uint32_t>(block_idx), static_cast<uint32_t>(block_idx >> 32),
            static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)};
        blk_ = Philox4x32::block(key_, ctr);
        blk_valid_ = true;
    }
    ++draw_;
    return (static_cast<uint64_t>(blk_[2 * lane + 1]) << 32) | blk_[2 * lane];
}

double RandomStream::u01() {
    // 53-bit mantissa, shifted into (0, 1] so log() is always finite.
    return static_cast<double>((next_bits() >> 11) + 1) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = u01();
    const double u2 = u01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
}

void RandomStream::fill_normal(std::span<double> out) {
    for (double& v : out) v = normal();
}

uint64_t derive_seed(uint64_t master, std::string_view tag) {
    uint64_t h = 0xcbf29ce484222325ull ^ master;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    // final avalanche (splitmix64 finalizer)
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebull;
    h ^= h >> 31;
    return h;
}

} // namespace hbl
