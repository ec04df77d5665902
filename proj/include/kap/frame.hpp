#pragma once

#include <cstdint>
#include <vector>

namespace kap {

// Stream framing: msg_type (1 byte, 0x01..0x04) || payload length (4 bytes
// big-endian) || payload. The length field is produced on serialization.
struct Frame {
    std::uint8_t msg_type = 0;
    std::vector<std::uint8_t> payload;

    friend bool operator==(const Frame&, const Frame&) = default;
};

// The four frames of one protocol run, in round order. This is the entire
// view an eavesdropper gets.
struct Transcript {
    std::vector<Frame> frames;

    friend bool operator==(const Transcript&, const Transcript&) = default;
};

} // namespace kap
