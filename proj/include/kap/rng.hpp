#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kap {

// Tag recorded in parameter files so a transcript can be reproduced by the
// same implementation (the protocol itself never depends on the stream shape).
inline constexpr std::string_view kRngTag = "sha256-ctr-v1";

// Deterministic byte stream: block_i = SHA-256(key || i_be64) with
// key = SHA-256("KAP-RNG-v1" || len(tag) || tag || seed). Role tags ("C",
// "alice", "bob") separate the streams drawn from one seed. Single-owner;
// not thread-safe.
class SeededRng {
public:
    SeededRng(std::span<const std::uint8_t> seed, std::string_view role_tag);

    void fill(std::span<std::uint8_t> out);
    std::uint8_t next_byte();
    std::uint64_t next_u64();

    // Uniform in [0, bound) by rejection on 64-bit draws. bound > 0.
    std::uint64_t uniform_below(std::uint64_t bound);

private:
    void refill();

    std::array<std::uint8_t, 32> key_{};
    std::array<std::uint8_t, 32> block_{};
    std::uint64_t counter_ = 0;
    std::size_t pos_ = 32; // consumed up to here; 32 == empty
};

std::vector<std::uint8_t> parse_hex(std::string_view hex); // throws ParseError
std::string to_hex(std::span<const std::uint8_t> bytes);

} // namespace kap
