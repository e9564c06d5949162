#pragma once

// Counter-based random generator (Philox 4x32-10) with explicit streams.
// The 64-bit stream id occupies the high counter words, so every
// (seed, stream_id) pair addresses a disjoint 2^64 block of the keyed
// permutation: identical pairs replay identical sequences, distinct stream
// ids never share state. Streams are cheap values and may be handed to
// worker threads, one stream per worker.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fecr {

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_id_(stream_id) {}

    std::uint64_t seed() const {
        return static_cast<std::uint64_t>(key_[0]) | (static_cast<std::uint64_t>(key_[1]) << 32);
    }
    std::uint64_t stream_id() const { return stream_id_; }

    // A sub-stream for worker-confined use (bootstrap replicates, chains).
    RngStream substream(std::uint64_t offset) const {
        RngStream s(seed(), stream_id_ + offset);
        return s;
    }

    std::uint64_t next_u64() {
        if (have_ == 0) refill();
        const std::uint32_t lo = block_[4 - have_];
        const std::uint32_t hi = block_[5 - have_];
        have_ -= 2;
        return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
    }

    // Uniform on the open interval (0,1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Marsaglia-Tsang, with the boost step for shape < 1.
    double gamma(double shape, double rate) {
        if (!(shape > 0.0) || !(rate > 0.0))
            throw std::domain_error("RngStream::gamma: shape and rate must be positive");
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / (3.0 * std::sqrt(d));
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
        }
    }

    std::int64_t poisson(double mean) {
        if (!(mean >= 0.0) || !std::isfinite(mean))
            throw std::domain_error("RngStream::poisson: mean must be finite and >= 0");
        if (mean == 0.0) return 0;
        if (mean < 10.0) {
            // Knuth product of uniforms
            const double limit = std::exp(-mean);
            std::int64_t k = 0;
            double prod = uniform();
            while (prod > limit) {
                ++k;
                prod *= uniform();
            }
            return k;
        }
        return poisson_ptrs(mean);
    }

    // Binomial(n, p) by geometric waiting-time skips; exact for all n, p.
    std::int64_t binomial(std::int64_t n, double p) {
        if (n < 0 || !(p >= 0.0 && p <= 1.0))
            throw std::domain_error("RngStream::binomial: need n >= 0 and p in [0,1]");
        if (n == 0 || p == 0.0) return 0;
        if (p == 1.0) return n;
        if (p > 0.5) return n - binomial(n, 1.0 - p);
        const double log_q = std::log1p(-p);
        std::int64_t k = 0;
        std::int64_t i = 0;
        for (;;) {
            i += static_cast<std::int64_t>(std::floor(std::log(uniform()) / log_q)) + 1;
            if (i > n) return k;
            ++k;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a, 1.0);
        const double y = gamma(b, 1.0);
        return x / (x + y);
    }

private:
    // Transformed rejection with squeeze (Hormann's PTRS), mean >= 10.
    std::int64_t poisson_ptrs(double mean) {
        const double sl = std::sqrt(mean);
        const double ll = std::log(mean);
        const double b = 0.931 + 2.53 * sl;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::fabs(u);
            const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kd);
            if (kd < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                kd * ll - mean - std::lgamma(kd + 1.0))
                return static_cast<std::int64_t>(kd);
        }
    }

    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(prod >> 32);
        lo = static_cast<std::uint32_t>(prod);
    }

    void refill() {
        std::array<std::uint32_t, 4> x{
            static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
            static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(0xD2511F53u, x[0], hi0, lo0);
            mulhilo(0xCD9E8D57u, x[2], hi1, lo1);
            x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        block_ = x;
        ++counter_;
        have_ = 4;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_id_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int have_ = 0;
};

}  // namespace fecr
