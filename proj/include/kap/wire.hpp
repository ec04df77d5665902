#pragma once

#include "kap/frame.hpp"
#include "kap/params.hpp"
#include "kap/protocol.hpp"

#include <filesystem>
#include <span>
#include <variant>

namespace kap::wire {

// Byte layouts (all lengths derivable from the params alone, bw = byte_width):
//
//   field element   value big-endian, exactly bw bytes, zero-padded
//   frame           msg_type (1) || payload length (4, BE) || payload
//   Round1  0x01    n field elements
//   Round2  0x02    n field elements || tau_A
//   Round3  0x03    (K+1) * 32 digest bytes || tau_B        K = n(n+1)/2
//   Round4  0x04    k0 as 4 bytes BE                        caps n < 92681
//
// Params files are JSON ({n, p, owf, seed, rng, C} with hex-string numbers);
// transcripts are JSON Lines, one {"round": k, "hex": "<frame>"} per frame.

std::vector<std::uint8_t> encode_field(const FieldElement& x, const Modulus& m);

// Throws BadLength unless |b| = byte_width, NotCanonical if the value >= p.
FieldElement decode_field(std::span<const std::uint8_t> b, const Modulus& m);

Frame encode_msg(const Round1Msg& msg, const PublicParams& pp);
Frame encode_msg(const Round2Msg& msg, const PublicParams& pp);
Frame encode_msg(const Round3Msg& msg, const PublicParams& pp);
Frame encode_msg(const Round4Msg& msg, const PublicParams& pp);

using Message = std::variant<Round1Msg, Round2Msg, Round3Msg, Round4Msg>;

// Exact inverse of encode_msg; validates type, every length and every
// element's canonicity. Throws BadType, BadLength, NotCanonical, RangeError.
Message decode_msg(const Frame& f, const PublicParams& pp);

// Typed decoders for call sites that know which round they expect.
Round1Msg decode_round1(const Frame& f, const PublicParams& pp);
Round2Msg decode_round2(const Frame& f, const PublicParams& pp);
Round3Msg decode_round3(const Frame& f, const PublicParams& pp);
Round4Msg decode_round4(const Frame& f, const PublicParams& pp);

std::vector<std::uint8_t> frame_to_bytes(const Frame& f);
Frame frame_from_bytes(std::span<const std::uint8_t> bytes);

// All file writers are atomic: temp file in the target directory, rename on
// success — no partial output survives an error.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& content);

void params_to_file(const PublicParams& pp, const std::filesystem::path& path);
PublicParams params_from_file(const std::filesystem::path& path);

std::string params_to_json(const PublicParams& pp);
PublicParams params_from_json(const std::string& text);

void transcript_write(const Transcript& t, const std::filesystem::path& path);
Transcript transcript_read(const std::filesystem::path& path);

std::string transcript_to_jsonl(const Transcript& t);
Transcript transcript_from_jsonl(const std::string& text);

} // namespace kap::wire
