#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace hbl {

/// Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
/// A (key, counter) pair maps to 128 random bits with no sequential state,
/// which is what makes per-path streams reproducible under any thread count.
struct Philox4x32 {
    static std::array<uint32_t, 4> block(std::array<uint32_t, 2> key,
                                         std::array<uint32_t, 4> ctr);
};

/// One logical random stream, identified by (seed, stream_id).
/// Stream 0, 1, 2, ... of the same seed are independent; draws within a
/// stream are indexed by an internal 64-bit counter. Normal variates come
/// from Box-Muller, two per Philox block.
class RandomStream {
  public:
    RandomStream(uint64_t seed, uint64_t stream_id)
        : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
          stream_(stream_id) {}

    /// Uniform double in (0, 1].
    double u01();
    /// Standard normal variate.
    double normal();
    void fill_normal(std::span<double> out);

    uint64_t stream_id() const { return stream_; }

  private:
    uint64_t next_bits();

    std::array<uint32_t, 2> key_;
    uint64_t stream_ = 0;
    uint64_t draw_ = 0;           // lanes consumed so far
    std::array<uint32_t, 4> blk_{}; // cached block for draw_/2
    bool blk_valid_ = false;
    double cached_normal_ = 0.0;
    bool have_cached_normal_ = false;
};

/// Mix a master seed with a textual tag so distinct stages of one experiment
/// never share streams. FNV-1a over the tag bytes folded into the seed.
uint64_t derive_seed(uint64_t master, std::string_view tag);

} // namespace hbl
