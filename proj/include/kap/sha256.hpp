#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace kap {

// One-shot SHA-256. Reuses a thread-local digest context; inputs here are
// tiny (tens of bytes) and hot paths evaluate it millions of times.
std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

} // namespace kap
