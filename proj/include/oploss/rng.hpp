#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace oploss {

/// Purpose of a random substream within one realization. Every consumer of
/// randomness owns its own role so that adding or removing draws in one part
/// of a simulation never shifts the numbers seen by another part.
enum class StreamRole : std::uint32_t {
    jumps_common = 0,
    jumps_1 = 1,
    jumps_2 = 2,
    bernoulli_1 = 3,
    bernoulli_2 = 4,
    severity_1 = 5,
    severity_2 = 6,
    aux = 7,
};

/// Philox 4x32-10 counter-based generator (Salmon et al.). One block maps a
/// 128-bit counter and 64-bit key to four statistically independent words.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
            ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0],
                   std::uint32_t(p1 & 0xFFFFFFFFu),
                   std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
                   std::uint32_t(p0 & 0xFFFFFFFFu)};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

/// Splittable substream keyed by (base seed, realization index, role).
/// Draws are a pure function of the key and a draw counter, so results do not
/// depend on scheduling or thread count.
class Substream {
public:
    Substream(std::uint64_t seed, std::uint32_t realization, StreamRole role)
        : key_{std::uint32_t(seed & 0xFFFFFFFFu), std::uint32_t(seed >> 32)},
          realization_(realization),
          role_(std::uint32_t(role)) {}

    std::uint32_t next_u32() {
        if (have_ == 0) refill();
        return buf_[--have_];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform in [0, 1).
    double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1); safe as a log() argument.
    double next_open() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

private:
    void refill() {
        buf_ = Philox4x32::block({std::uint32_t(block_ & 0xFFFFFFFFu),
                                  std::uint32_t(block_ >> 32), realization_, role_},
                                 key_);
        ++block_;
        have_ = 4;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t realization_;
    std::uint32_t role_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int have_ = 0;
};

/// Standard normal via Box-Muller; consumes exactly two draws.
inline double normal_draw(Substream& s) {
    const double u1 = s.next_open();
    const double u2 = s.next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double exponential_draw(Substream& s, double mean) {
    return -mean * std::log(s.next_open());
}

/// Poisson count by CDF inversion; one uniform per call for the means used
/// here (per-bin jump intensities are far below 1).
inline std::uint64_t poisson_draw(Substream& s, double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 32.0) {
        const double half = 0.5 * mean;
        return poisson_draw(s, half) + poisson_draw(s, mean - half);
    }
    const double u = s.next_unit();
    double p = std::exp(-mean);
    double cum = p;
    std::uint64_t k = 0;
    while (u >= cum) {
        ++k;
        p *= mean / double(k);
        cum += p;
        if (k > 4000) break;
    }
    return k;
}

/// Event decision from one 32-bit draw. The 2^-32 probability resolution is
/// orders of magnitude below every tolerance used here.
inline bool bernoulli_u32(Substream& s, double p) {
    return double(s.next_u32()) < p * 4294967296.0;
}

/// Poisson count from one 32-bit draw via CDF inversion, for small means (the
/// per-bin jump intensities). Falls back to the 64-bit path for large means.
inline std::uint32_t poisson_u32(Substream& s, double mean, double exp_neg_mean) {
    if (mean <= 0.0) return 0;
    if (mean > 25.0) return std::uint32_t(poisson_draw(s, mean));
    const double u = (double(s.next_u32()) + 0.5) * 0x1.0p-32;
    double p = exp_neg_mean;
    double cum = p;
    std::uint32_t k = 0;
    while (u >= cum && k < 200) {
        ++k;
        p *= mean / double(k);
        cum += p;
    }
    return k;
}

/// Gamma(shape, scale) via Marsaglia-Tsang squeeze; shape < 1 boosted through
/// the Gamma(shape+1) identity.
inline double gamma_draw(Substream& s, double shape, double scale) {
    if (shape < 1.0) {
        const double u = s.next_open();
        return gamma_draw(s, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
        const double x = normal_draw(s);
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = s.next_open();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
            return d * v * scale;
        }
    }
}

}  // namespace oploss
