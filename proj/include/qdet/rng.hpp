#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace qdet {

/// Philox4x32-10 counter-based generator. Draws are keyed by
/// (seed, path, stream, index, block), so any sample in any path can be
/// regenerated independently of execution order or worker count.
class Philox {
  public:
    static std::array<uint32_t, 4> block(uint64_t seed, uint64_t path, uint32_t stream,
                                         uint32_t index, uint32_t blk) {
        std::array<uint32_t, 4> ctr = {static_cast<uint32_t>(path),
                                       static_cast<uint32_t>(path >> 32) ^ stream, index, blk};
        std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed),
                                       static_cast<uint32_t>(seed >> 32)};
        for (int round = 0; round < 10; ++round) {
            const uint64_t p0 = 0xD2511F53ULL * ctr[0];
            const uint64_t p1 = 0xCD9E8D57ULL * ctr[2];
            std::array<uint32_t, 4> next;
            next[0] = static_cast<uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0];
            next[1] = static_cast<uint32_t>(p1);
            next[2] = static_cast<uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1];
            next[3] = static_cast<uint32_t>(p0);
            ctr = next;
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }
};

inline double u01_from_bits(uint32_t hi, uint32_t lo) {
    const uint64_t x = (static_cast<uint64_t>(hi) << 32) | lo;
    return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;  // in (0,1)
}

/// Two standard normals per Philox block via Box-Muller.
inline void normal_pair(uint64_t seed, uint64_t path, uint32_t stream, uint32_t index,
                        uint32_t blk, double& z0, double& z1) {
    const auto r = Philox::block(seed, path, stream, index, blk);
    const double u1 = u01_from_bits(r[0], r[1]);
    const double u2 = u01_from_bits(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    z0 = radius * std::cos(angle);
    z1 = radius * std::sin(angle);
}

inline double uniform_draw(uint64_t seed, uint64_t path, uint32_t stream, uint32_t index) {
    const auto r = Philox::block(seed, path, stream, index, 0);
    return u01_from_bits(r[0], r[1]);
}

/// Buffered per-(path, step) normal source for the n driving motions.
class NormalStream {
  public:
    NormalStream(uint64_t seed, uint64_t path, uint32_t stream)
        : seed_(seed), path_(path), stream_(stream) {}

    /// z[j] for j in [0, count) at the given step index.
    void fill(uint32_t step, double* z, int count) const {
        for (int b = 0; 2 * b < count; ++b) {
            double z0, z1;
            normal_pair(seed_, path_, stream_, step, static_cast<uint32_t>(b), z0, z1);
            z[2 * b] = z0;
            if (2 * b + 1 < count) z[2 * b + 1] = z1;
        }
    }

  private:
    uint64_t seed_;
    uint64_t path_;
    uint32_t stream_;
};

/// splitmix64; used to derive independent sub-seeds from a root seed.
inline uint64_t mix_seed(uint64_t root, uint64_t salt) {
    uint64_t z = root + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace qdet
