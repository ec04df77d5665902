#include "kap/rng.hpp"

#include "kap/error.hpp"
#include "kap/sha256.hpp"

#include <cstring>
#include <limits>

namespace kap {

SeededRng::SeededRng(std::span<const std::uint8_t> seed, std::string_view role_tag) {
    static constexpr std::string_view domain = "KAP-RNG-v1";
    std::vector<std::uint8_t> keymat;
    keymat.reserve(domain.size() + 1 + role_tag.size() + seed.size());
    keymat.insert(keymat.end(), domain.begin(), domain.end());
    keymat.push_back(static_cast<std::uint8_t>(role_tag.size()));
    keymat.insert(keymat.end(), role_tag.begin(), role_tag.end());
    keymat.insert(keymat.end(), seed.begin(), seed.end());
    key_ = sha256(keymat);
}

void SeededRng::refill() {
    std::array<std::uint8_t, 40> input{};
    std::memcpy(input.data(), key_.data(), 32);
    for (int i = 0; i < 8; ++i) {
        input[32 + i] = static_cast<std::uint8_t>(counter_ >> (8 * (7 - i)));
    }
    block_ = sha256(input);
    ++counter_;
    pos_ = 0;
}

void SeededRng::fill(std::span<std::uint8_t> out) {
    for (auto& b : out) {
        if (pos_ == block_.size()) refill();
        b = block_[pos_++];
    }
}

std::uint8_t SeededRng::next_byte() {
    if (pos_ == block_.size()) refill();
    return block_[pos_++];
}

std::uint64_t SeededRng::next_u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | next_byte();
    return v;
}

std::uint64_t SeededRng::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw Error(ErrorCode::RangeError, "uniform_below: bound must be positive");
    // Largest multiple of bound below 2^64; rejection keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % bound);
    for (;;) {
        const std::uint64_t v = next_u64();
        if (v < limit) return v % bound;
    }
}

std::vector<std::uint8_t> parse_hex(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) hex.remove_prefix(2);
    if (hex.empty()) throw Error(ErrorCode::ParseError, "empty hex string");
    if (hex.size() % 2 != 0) throw Error(ErrorCode::ParseError, "odd-length hex string");
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = nibble(hex[2 * i]);
        const int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error(ErrorCode::ParseError, "invalid hex digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

} // namespace kap
