#pragma once

#include <cmath>
#include <cstdint>

namespace turbmt {

// splitmix64; used both as a generator and to derive independent stream seeds.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = base;
    splitmix64(s);
    s ^= 0x6a09e667f3bcc909ULL + a;
    splitmix64(s);
    s ^= 0xbb67ae8584caa73bULL + b;
    splitmix64(s);
    s ^= 0x3c6ef372fe94f82bULL + c;
    return splitmix64(s);
}

// xoshiro256** with a fixed in-house Gaussian path so sampled fields are
// reproducible bit-for-bit independent of the standard library.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t s = seed;
        for (auto& w : s_) w = splitmix64(s);
        have_cached_ = false;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in (0, 1]
    double next_unit() {
        return ((next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // standard normal via Box-Muller
    double next_gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
    double cached_ = 0.0;
    bool have_cached_;
};

}  // namespace turbmt
