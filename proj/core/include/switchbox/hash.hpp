#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace switchbox {

// FNV-1a, 64-bit. Used for artifact keys and bitwise fingerprints, not security.
class Fnv1a {
public:
    void update(std::string_view s) noexcept {
        for (unsigned char c : s) mix(c);
    }
    void update(std::uint64_t v) noexcept {
        for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(v >> (8 * i)));
    }
    void update(double v) noexcept { update(std::bit_cast<std::uint64_t>(v)); }
    void update(std::span<const double> v) noexcept {
        for (double d : v) update(d);
    }

    std::uint64_t digest() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;

    void mix(unsigned char c) noexcept {
        state_ ^= c;
        state_ *= 0x100000001b3ULL;
    }
};

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

}  // namespace switchbox
