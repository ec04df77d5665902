#include "kap/wire.hpp"

#include "kap/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <random>
#include <sstream>

namespace kap::wire {

namespace {

using nlohmann::json;

void append(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> bytes) {
    out.insert(out.end(), bytes.begin(), bytes.end());
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t read_be32(std::span<const std::uint8_t> b) {
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

void require_payload_size(const Frame& f, std::size_t expected) {
    if (f.payload.size() != expected) {
        throw Error(ErrorCode::BadLength, "payload is " + std::to_string(f.payload.size()) +
                                              " bytes, expected " + std::to_string(expected));
    }
}

} // namespace

std::vector<std::uint8_t> encode_field(const FieldElement& x, const Modulus& m) {
    return to_bytes_be(x, m.byte_width);
}

FieldElement decode_field(std::span<const std::uint8_t> b, const Modulus& m) {
    if (b.size() != m.byte_width) {
        throw Error(ErrorCode::BadLength, "field encoding is " + std::to_string(b.size()) +
                                              " bytes, expected " + std::to_string(m.byte_width));
    }
    mpz_class v = from_bytes_be(b);
    if (v >= m.p) {
        throw Error(ErrorCode::NotCanonical, "decoded value >= p");
    }
    return FieldElement(std::move(v));
}

Frame encode_msg(const Round1Msg& msg, const PublicParams& pp) {
    if (msg.mu.size() != pp.n) throw Error(ErrorCode::BadLength, "round1 vector length != n");
    Frame f;
    f.msg_type = 0x01;
    f.payload.reserve(pp.n * pp.m.byte_width);
    for (const auto& x : msg.mu) append(f.payload, encode_field(x, pp.m));
    return f;
}

Frame encode_msg(const Round2Msg& msg, const PublicParams& pp) {
    if (msg.nu.size() != pp.n) throw Error(ErrorCode::BadLength, "round2 vector length != n");
    Frame f;
    f.msg_type = 0x02;
    f.payload.reserve((pp.n + 1) * pp.m.byte_width);
    for (const auto& x : msg.nu) append(f.payload, encode_field(x, pp.m));
    append(f.payload, encode_field(msg.tau_a, pp.m));
    return f;
}

Frame encode_msg(const Round3Msg& msg, const PublicParams& pp) {
    const std::uint64_t k_max = max_offset(pp.n);
    if (msg.digests.size() != k_max + 1) throw Error(ErrorCode::BadLength, "round3 digest count != K+1");
    Frame f;
    f.msg_type = 0x03;
    f.payload.reserve(msg.digests.size() * 32 + pp.m.byte_width);
    for (const auto& d : msg.digests) append(f.payload, d);
    append(f.payload, encode_field(msg.tau_b, pp.m));
    return f;
}

Frame encode_msg(const Round4Msg& msg, const PublicParams& pp) {
    if (msg.k0 > max_offset(pp.n)) throw Error(ErrorCode::RangeError, "k0 exceeds K");
    Frame f;
    f.msg_type = 0x04;
    append_be32(f.payload, static_cast<std::uint32_t>(msg.k0));
    return f;
}

Message decode_msg(const Frame& f, const PublicParams& pp) {
    const std::size_t bw = pp.m.byte_width;
    switch (f.msg_type) {
        case 0x01: {
            require_payload_size(f, static_cast<std::size_t>(pp.n) * bw);
            Round1Msg msg;
            msg.mu.reserve(pp.n);
            for (std::uint32_t j = 0; j < pp.n; ++j) {
                msg.mu.push_back(decode_field({f.payload.data() + j * bw, bw}, pp.m));
            }
            return msg;
        }
        case 0x02: {
            require_payload_size(f, static_cast<std::size_t>(pp.n + 1) * bw);
            Round2Msg msg;
            msg.nu.reserve(pp.n);
            for (std::uint32_t i = 0; i < pp.n; ++i) {
                msg.nu.push_back(decode_field({f.payload.data() + i * bw, bw}, pp.m));
            }
            msg.tau_a = decode_field({f.payload.data() + static_cast<std::size_t>(pp.n) * bw, bw}, pp.m);
            return msg;
        }
        case 0x03: {
            const std::uint64_t count = max_offset(pp.n) + 1;
            require_payload_size(f, count * 32 + bw);
            Round3Msg msg;
            msg.digests.resize(count);
            for (std::uint64_t k = 0; k < count; ++k) {
                std::copy_n(f.payload.data() + k * 32, 32, msg.digests[k].begin());
            }
            msg.tau_b = decode_field({f.payload.data() + count * 32, bw}, pp.m);
            return msg;
        }
        case 0x04: {
            require_payload_size(f, 4);
            Round4Msg msg;
            msg.k0 = read_be32(f.payload);
            if (msg.k0 > max_offset(pp.n)) throw Error(ErrorCode::RangeError, "k0 exceeds K");
            return msg;
        }
        default:
            throw Error(ErrorCode::BadType, "unknown frame type " + std::to_string(f.msg_type));
    }
}

namespace {

template <typename T>
T decode_as(const Frame& f, const PublicParams& pp, const char* what) {
    Message m = decode_msg(f, pp);
    if (auto* msg = std::get_if<T>(&m)) return std::move(*msg);
    throw Error(ErrorCode::BadType, std::string("expected ") + what + " frame, got type " +
                                        std::to_string(f.msg_type));
}

} // namespace

Round1Msg decode_round1(const Frame& f, const PublicParams& pp) { return decode_as<Round1Msg>(f, pp, "round1"); }
Round2Msg decode_round2(const Frame& f, const PublicParams& pp) { return decode_as<Round2Msg>(f, pp, "round2"); }
Round3Msg decode_round3(const Frame& f, const PublicParams& pp) { return decode_as<Round3Msg>(f, pp, "round3"); }
Round4Msg decode_round4(const Frame& f, const PublicParams& pp) { return decode_as<Round4Msg>(f, pp, "round4"); }

std::vector<std::uint8_t> frame_to_bytes(const Frame& f) {
    if (f.payload.size() > 0xffffffffull) throw Error(ErrorCode::BadLength, "payload too large for frame");
    std::vector<std::uint8_t> out;
    out.reserve(5 + f.payload.size());
    out.push_back(f.msg_type);
    append_be32(out, static_cast<std::uint32_t>(f.payload.size()));
    append(out, f.payload);
    return out;
}

Frame frame_from_bytes(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 5) throw Error(ErrorCode::BadLength, "frame shorter than header");
    Frame f;
    f.msg_type = bytes[0];
    if (f.msg_type < 0x01 || f.msg_type > 0x04) {
        throw Error(ErrorCode::BadType, "unknown frame type " + std::to_string(bytes[0]));
    }
    const std::uint32_t len = read_be32(bytes.subspan(1, 4));
    if (bytes.size() != 5 + static_cast<std::size_t>(len)) {
        throw Error(ErrorCode::BadLength, "frame length field disagrees with payload size");
    }
    f.payload.assign(bytes.begin() + 5, bytes.end());
    return f;
}

namespace {

// Parse failures (shape, types, malformed hex) are ParseError; semantic
// violations carry the offending field path in a ValidationError.
const json& field_at(const json& j, const char* name) {
    const auto it = j.find(name);
    if (it == j.end()) throw Error(ErrorCode::ParseError, std::string("missing field \"") + name + "\"");
    return *it;
}

mpz_class parse_hex_number(const std::string& s, const std::string& path) {
    std::string body = s;
    if (body.size() >= 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) body = body.substr(2);
    if (body.empty()) throw Error(ErrorCode::ParseError, path + ": empty hex number");
    mpz_class v;
    if (mpz_set_str(v.get_mpz_t(), body.c_str(), 16) != 0) {
        throw Error(ErrorCode::ParseError, path + ": invalid hex number \"" + s + "\"");
    }
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

void write_text_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::random_device rd;
    const fs::path tmp = dir / (path.filename().string() + ".tmp." + std::to_string(rd()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "rename to " + path.string() + " failed");
    }
}

std::string params_to_json(const PublicParams& pp) {
    json rows = json::array();
    for (std::uint32_t i = 1; i <= pp.n; ++i) {
        json row = json::array();
        for (std::uint32_t j = 1; j <= pp.n; ++j) row.push_back(pp.at(i, j).value.get_str(16));
        rows.push_back(std::move(row));
    }
    const json j = {{"n", pp.n},
                    {"p", pp.m.p.get_str(16)},
                    {"owf", pp.owf.name},
                    {"seed", to_hex(pp.seed)},
                    {"rng", pp.rng_tag},
                    {"C", std::move(rows)}};
    return j.dump(2) + "\n";
}

PublicParams params_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "params document is not an object");

    PublicParams pp;
    try {
        const json& jn = field_at(j, "n");
        if (!jn.is_number_unsigned()) throw Error(ErrorCode::ParseError, "n: not a nonnegative integer");
        const std::uint64_t n = jn.get<std::uint64_t>();
        if (n < 2) throw Error(ErrorCode::ValidationError, "n: must be >= 2");
        if (n > 92680) throw Error(ErrorCode::ValidationError, "n: exceeds the frame format cap");
        pp.n = static_cast<std::uint32_t>(n);

        const json& jp = field_at(j, "p");
        if (!jp.is_string()) throw Error(ErrorCode::ParseError, "p: not a string");
        const mpz_class p = parse_hex_number(jp.get<std::string>(), "p");
        try {
            pp.m = Modulus::from_prime(p);
        } catch (const Error&) {
            throw Error(ErrorCode::ValidationError, "p: not prime");
        }

        const json& jowf = field_at(j, "owf");
        if (!jowf.is_string()) throw Error(ErrorCode::ParseError, "owf: not a string");
        try {
            pp.owf = resolve_owf(jowf.get<std::string>());
        } catch (const Error&) {
            throw Error(ErrorCode::ValidationError, "owf: unknown instantiation \"" + jowf.get<std::string>() + "\"");
        }

        const json& jseed = field_at(j, "seed");
        if (!jseed.is_string()) throw Error(ErrorCode::ParseError, "seed: not a string");
        pp.seed = parse_hex(jseed.get<std::string>());

        const json& jrng = field_at(j, "rng");
        if (!jrng.is_string()) throw Error(ErrorCode::ParseError, "rng: not a string");
        pp.rng_tag = jrng.get<std::string>();
        if (pp.rng_tag.empty()) throw Error(ErrorCode::ValidationError, "rng: empty tag");

        const json& jc = field_at(j, "C");
        if (!jc.is_array() || jc.size() != pp.n) {
            throw Error(ErrorCode::ValidationError, "C: expected " + std::to_string(pp.n) + " rows");
        }
        pp.c.reserve(static_cast<std::size_t>(pp.n) * pp.n);
        for (std::uint32_t i = 0; i < pp.n; ++i) {
            const json& row = jc[i];
            if (!row.is_array() || row.size() != pp.n) {
                throw Error(ErrorCode::ValidationError, "C[" + std::to_string(i) + "]: expected " +
                                                            std::to_string(pp.n) + " entries");
            }
            for (std::uint32_t jj = 0; jj < pp.n; ++jj) {
                const std::string path = "C[" + std::to_string(i) + "][" + std::to_string(jj) + "]";
                if (!row[jj].is_string()) throw Error(ErrorCode::ParseError, path + ": not a string");
                mpz_class v = parse_hex_number(row[jj].get<std::string>(), path);
                if (v < 0 || v >= pp.m.p) {
                    throw Error(ErrorCode::ValidationError, path + ": not canonical under p");
                }
                pp.c.emplace_back(std::move(v));
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    return pp;
}

void params_to_file(const PublicParams& pp, const std::filesystem::path& path) {
    write_text_file_atomic(path, params_to_json(pp));
}

PublicParams params_from_file(const std::filesystem::path& path) {
    return params_from_json(read_file(path));
}

std::string transcript_to_jsonl(const Transcript& t) {
    std::string out;
    for (std::size_t i = 0; i < t.frames.size(); ++i) {
        const json line = {{"round", i + 1}, {"hex", to_hex(frame_to_bytes(t.frames[i]))}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

Transcript transcript_from_jsonl(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream ss(text);
    for (std::string line; std::getline(ss, line);) {
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.size() != 4) {
        throw Error(ErrorCode::OrderError, "transcript has " + std::to_string(lines.size()) +
                                               " frames, expected 4");
    }
    Transcript t;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(i + 1) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("round") || !j.contains("hex") ||
            !j["round"].is_number_unsigned() || !j["hex"].is_string()) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(i + 1) + ": bad transcript record");
        }
        const std::uint64_t round = j["round"].get<std::uint64_t>();
        if (round != i + 1) {
            throw Error(ErrorCode::OrderError, "line " + std::to_string(i + 1) + ": round " +
                                                   std::to_string(round) + " out of order");
        }
        Frame f = frame_from_bytes(parse_hex(j["hex"].get<std::string>()));
        if (f.msg_type != round) {
            throw Error(ErrorCode::OrderError, "line " + std::to_string(i + 1) + ": frame type " +
                                                   std::to_string(f.msg_type) + " under round " +
                                                   std::to_string(round));
        }
        t.frames.push_back(std::move(f));
    }
    return t;
}

void transcript_write(const Transcript& t, const std::filesystem::path& path) {
    write_text_file_atomic(path, transcript_to_jsonl(t));
}

Transcript transcript_read(const std::filesystem::path& path) {
    return transcript_from_jsonl(read_file(path));
}

} // namespace kap::wire
