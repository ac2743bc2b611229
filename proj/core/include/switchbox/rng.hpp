#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace switchbox {

// Philox4x32-10 counter-based generator (Salmon et al.). Stateless: the output
// block is a pure function of (counter, key), so any (seed, path, step) stream
// can be regenerated in isolation and in any order.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// Standard normals for one (seed, path, step) cell. Block b of the cell yields
// two normals via Box-Muller on two 53-bit uniforms in (0, 1].
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint32_t path, std::uint32_t step) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, path_(path), step_(step) {}

    std::array<double, 2> pair(std::uint32_t block) const noexcept {
        const auto r = Philox4x32::generate({path_, step_, block, 0x5357u}, key_);
        const double u1 = uniform53(r[0], r[1]);
        const double u2 = uniform53(r[2], r[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    // Fills out[0..n) deterministically.
    template <class Out>
    void fill(Out& out, std::size_t n) const noexcept {
        for (std::size_t i = 0; i < n; i += 2) {
            const auto z = pair(static_cast<std::uint32_t>(i / 2));
            out[i] = z[0];
            if (i + 1 < n) out[i + 1] = z[1];
        }
    }

    // Uniform in (0, 1] from block `block`, first half.
    double uniform(std::uint32_t block) const noexcept {
        const auto r = Philox4x32::generate({path_, step_, block, 0x554eu}, key_);
        return uniform53(r[0], r[1]);
    }

private:
    Philox4x32::Key key_;
    std::uint32_t path_;
    std::uint32_t step_;

    static double uniform53(std::uint32_t a, std::uint32_t b) noexcept {
        const std::uint64_t bits = (static_cast<std::uint64_t>(a) << 21) ^ (b >> 11);
        return (static_cast<double>(bits & ((1ULL << 53) - 1)) + 1.0) * 0x1.0p-53;
    }
};

}  // namespace switchbox
