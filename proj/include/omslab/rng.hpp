#pragma once

// Deterministic random streams. Every stochastic routine in the library takes
// either an explicit seed or an Rng derived from (seed, stream tags), so that
// results are reproducible bit-for-bit and independent of worker partitioning.

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace omslab {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix64(seed)) {}

    // Derives an independent substream from a seed and a list of tags,
    // e.g. Rng::stream(seed, {kTagChain, chain_index}).
    static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
        std::uint64_t s = mix64(seed);
        for (std::uint64_t t : tags) {
            s = mix64(s ^ (t + 0x9E3779B97F4A7C15ULL + (s << 6) + (s >> 2)));
        }
        return Rng(raw_tag{}, s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in (0, 1); safe as a log() argument
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t uniform_index(std::uint64_t n) {
        // Lemire-style rejection-free enough for n << 2^64; bias < 2^-64*n.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    double normal();

    template <typename It>
    void fill_normal(It first, It last) {
        for (; first != last; ++first) *first = normal();
    }

private:
    struct raw_tag {};
    Rng(raw_tag, std::uint64_t s) : state_(s) {}
    std::uint64_t state_;
};

namespace detail {

// Ziggurat tables for the standard normal (128 strips, double precision).
// Strip i spans x in [0, x[i]]; x[0] is the virtual base width covering the
// tail, x[1] = R, x[128] = 0. f[i] = exp(-x[i]^2/2).
struct ZigguratTables {
    static constexpr double kR = 3.442619855899;
    static constexpr double kV = 9.91256303526217e-3;
    double x[129];
    double f[129];

    ZigguratTables() {
        x[1] = kR;
        x[0] = kV / std::exp(-0.5 * kR * kR);
        for (int i = 1; i < 128; ++i) {
            double fi = std::exp(-0.5 * x[i] * x[i]);
            double arg = kV / x[i] + fi;
            x[i + 1] = (arg >= 1.0) ? 0.0 : std::sqrt(-2.0 * std::log(arg));
        }
        x[128] = 0.0;
        for (int i = 0; i <= 128; ++i) f[i] = std::exp(-0.5 * x[i] * x[i]);
    }

    static const ZigguratTables& get_for_test();
};

inline const ZigguratTables kZigguratTables{};

inline const ZigguratTables& ZigguratTables::get_for_test() { return kZigguratTables; }

}  // namespace detail

inline double Rng::normal() {
    const auto& zt = detail::kZigguratTables;
    for (;;) {
        std::uint64_t r = next_u64();
        int i = static_cast<int>(r & 127);
        bool neg = (r & 128) != 0;
        double u = static_cast<double>(r >> 11) * 0x1.0p-53;
        double x = u * zt.x[i];
        if (x < zt.x[i + 1]) return neg ? -x : x;
        if (i == 0) {
            // tail beyond R (Marsaglia's method)
            double xt, yt;
            do {
                xt = -std::log(uniform_open()) / detail::ZigguratTables::kR;
                yt = -std::log(uniform_open());
            } while (yt + yt < xt * xt);
            double v = detail::ZigguratTables::kR + xt;
            return neg ? -v : v;
        }
        double y = zt.f[i] + uniform01() * (zt.f[i + 1] - zt.f[i]);
        if (y < std::exp(-0.5 * x * x)) return neg ? -x : x;
    }
}

// Common stream tags. Values are arbitrary but fixed: changing them changes
// every seeded result.
namespace stream_tag {
inline constexpr std::uint64_t kDataset = 0x01;
inline constexpr std::uint64_t kTrain = 0x02;
inline constexpr std::uint64_t kChain = 0x03;
inline constexpr std::uint64_t kRadiusTrain = 0x04;
inline constexpr std::uint64_t kRadiusSample = 0x05;
inline constexpr std::uint64_t kInit = 0x06;
inline constexpr std::uint64_t kMonteCarlo = 0x07;
inline constexpr std::uint64_t kSubsample = 0x08;
}  // namespace stream_tag

}  // namespace omslab
