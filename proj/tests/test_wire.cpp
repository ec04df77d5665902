#include "kap/wire.hpp"

#include "kap/error.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace kap;
using namespace kap::test;

namespace {

FieldElement fe(unsigned long v) { return FieldElement(v); }

std::vector<std::uint8_t> bytes(std::initializer_list<int> vals) {
    std::vector<std::uint8_t> out;
    for (int v : vals) out.push_back(static_cast<std::uint8_t>(v));
    return out;
}

} // namespace

TEST_CASE("field element encoding layout") {
    const Modulus m257 = Modulus::from_prime(257);
    const Modulus m5 = Modulus::from_prime(5);
    CHECK(wire::encode_field(fe(5), m257) == bytes({0x00, 0x05}));
    CHECK(wire::encode_field(fe(256), m257) == bytes({0x01, 0x00}));
    CHECK(wire::encode_field(fe(4), m5) == bytes({0x04}));

    CHECK(wire::decode_field(bytes({0x00, 0x05}), m257) == fe(5));
    CHECK_THROWS_WITH_AS(wire::decode_field(bytes({0x01, 0x01}), m257),
                         doctest::Contains("NotCanonical"), Error);
    CHECK_THROWS_WITH_AS(wire::decode_field(bytes({0x05}), m257), doctest::Contains("BadLength"),
                         Error);
}

TEST_CASE("field element round trip") {
    const Modulus m = derive_modulus(32);
    auto rng = make_rng(0xabc);
    for (int i = 0; i < 10000; ++i) {
        const FieldElement x = fp_sample(m, rng);
        CHECK(wire::decode_field(wire::encode_field(x, m), m) == x);
    }
}

TEST_CASE("frame layouts") {
    const PublicParams pp = tiny_params();
    const Frame f4 = wire::encode_msg(Round4Msg{0}, pp);
    CHECK(wire::frame_to_bytes(f4) == bytes({0x04, 0x00, 0x00, 0x00, 0x04, 0x00, 0x00, 0x00, 0x00}));

    const Frame f1 = wire::encode_msg(Round1Msg{{fe(3), fe(6)}}, pp);
    CHECK(f1.payload == bytes({0x03, 0x06}));
    CHECK(wire::frame_to_bytes(f1) == bytes({0x01, 0x00, 0x00, 0x00, 0x02, 0x03, 0x06}));
}

TEST_CASE("decoders validate type, length, canonicity and range") {
    const PublicParams pp = tiny_params();
    Frame f;
    f.msg_type = 0x07;
    CHECK_THROWS_WITH_AS(wire::decode_msg(f, pp), doctest::Contains("BadType"), Error);

    f.msg_type = 0x01;
    f.payload = bytes({0x03});
    CHECK_THROWS_WITH_AS(wire::decode_msg(f, pp), doctest::Contains("BadLength"), Error);
    f.payload = bytes({0x03, 0x09}); // 9 >= 7
    CHECK_THROWS_WITH_AS(wire::decode_msg(f, pp), doctest::Contains("NotCanonical"), Error);

    f.msg_type = 0x04;
    f.payload = bytes({0x00, 0x00, 0x00, 0x05}); // k0 = 5 > K = 3
    CHECK_THROWS_WITH_AS(wire::decode_msg(f, pp), doctest::Contains("RangeError"), Error);

    const Frame good = wire::encode_msg(Round1Msg{{fe(3), fe(6)}}, pp);
    CHECK_THROWS_WITH_AS(wire::decode_round2(good, pp), doctest::Contains("BadType"), Error);

    CHECK_THROWS_WITH_AS(wire::frame_from_bytes(bytes({0x01, 0x00})), doctest::Contains("BadLength"),
                         Error);
    CHECK_THROWS_WITH_AS(wire::frame_from_bytes(bytes({0x09, 0, 0, 0, 0})),
                         doctest::Contains("BadType"), Error);
    CHECK_THROWS_WITH_AS(wire::frame_from_bytes(bytes({0x01, 0, 0, 0, 9, 1, 2})),
                         doctest::Contains("BadLength"), Error);
}

TEST_CASE("encode/decode identity on honest transcripts") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::uint32_t n = 2 + static_cast<std::uint32_t>(seed % 7);
        const PublicParams pp = gen_public_params(n, seed_bytes(seed));
        const HandshakeResult run = run_handshake(pp, seed_bytes(seed + 1), seed_bytes(seed + 2));
        for (const Frame& f : run.transcript.frames) {
            const wire::Message msg = wire::decode_msg(f, pp);
            const Frame re = std::visit([&](const auto& m) { return wire::encode_msg(m, pp); }, msg);
            CHECK(re == f);
            CHECK(wire::frame_from_bytes(wire::frame_to_bytes(f)) == f);
        }
    }
}

TEST_CASE("params file round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "kap_wire_test";
    fs::create_directories(dir);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::uint32_t n = 2 + static_cast<std::uint32_t>(seed % 15);
        const PublicParams pp = gen_public_params(n, seed_bytes(0xcafe00 + seed));
        const fs::path file = dir / ("p" + std::to_string(seed) + ".json");
        wire::params_to_file(pp, file);
        const PublicParams back = wire::params_from_file(file);
        CHECK(back.n == pp.n);
        CHECK(back.m.p == pp.m.p);
        CHECK(back.m.byte_width == pp.m.byte_width);
        CHECK(back.owf == pp.owf);
        CHECK(back.seed == pp.seed);
        CHECK(back.rng_tag == pp.rng_tag);
        CHECK(back.c == pp.c);
    }
    fs::remove_all(dir);
}

TEST_CASE("params validation names the offending field") {
    const char* good = R"({"n": 2, "p": "7", "owf": "sha256", "seed": "01",
                           "rng": "sha256-ctr-v1", "C": [["1","2"],["3","4"]]})";
    CHECK(wire::params_from_json(good).m.p == 7);

    auto expect_error = [&](const std::string& text, ErrorCode code, const char* needle) {
        try {
            wire::params_from_json(text);
            FAIL("expected error for ", needle);
        } catch (const Error& e) {
            CHECK(e.code() == code);
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    expect_error(R"({"n": 2, "p": "7", "owf": "sha256", "seed": "01",
                     "rng": "sha256-ctr-v1", "C": [["9","2"],["3","4"]]})",
                 ErrorCode::ValidationError, "C[0][0]");
    expect_error(R"({"n": 2, "p": "8", "owf": "sha256", "seed": "01",
                     "rng": "sha256-ctr-v1", "C": [["1","2"],["3","4"]]})",
                 ErrorCode::ValidationError, "p");
    expect_error(R"({"n": 1, "p": "7", "owf": "sha256", "seed": "01",
                     "rng": "sha256-ctr-v1", "C": [["1"]]})",
                 ErrorCode::ValidationError, "n");
    expect_error(R"({"n": 2, "p": "7", "owf": "sha1", "seed": "01",
                     "rng": "sha256-ctr-v1", "C": [["1","2"],["3","4"]]})",
                 ErrorCode::ValidationError, "owf");
    expect_error(R"({"n": 2, "p": "7", "owf": "sha256", "seed": "01",
                     "rng": "sha256-ctr-v1", "C": [["1","2"]]})",
                 ErrorCode::ValidationError, "C");
    expect_error(R"({"n": 2, "p": "7", "owf": "sha256", "seed": "01", "rng": "sha256-ctr-v1"})",
                 ErrorCode::ParseError, "C");
    expect_error("{not json", ErrorCode::ParseError, "");
}

TEST_CASE("transcript file round trip and ordering") {
    const PublicParams pp = gen_public_params(4, parse_hex("77"));
    std::vector<std::string> texts;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const HandshakeResult run = run_handshake(pp, seed_bytes(seed), seed_bytes(~seed));
        const std::string text = wire::transcript_to_jsonl(run.transcript);
        CHECK(wire::transcript_to_jsonl(wire::transcript_from_jsonl(text)) == text);
        texts.push_back(text);
    }

    // 4 lines, rounds 1..4 in order
    const std::string& sample = texts[0];
    CHECK(std::count(sample.begin(), sample.end(), '\n') == 4);

    // shuffled lines must be rejected
    std::vector<std::string> lines;
    std::istringstream ss(sample);
    for (std::string line; std::getline(ss, line);) lines.push_back(line);
    std::swap(lines[1], lines[2]);
    std::string shuffled;
    for (const auto& l : lines) shuffled += l + "\n";
    CHECK_THROWS_WITH_AS(wire::transcript_from_jsonl(shuffled), doctest::Contains("OrderError"),
                         Error);

    CHECK_THROWS_WITH_AS(wire::transcript_from_jsonl(""), doctest::Contains("OrderError"), Error);
    CHECK_THROWS_WITH_AS(wire::transcript_from_jsonl("junk\njunk\njunk\njunk\n"),
                         doctest::Contains("ParseError"), Error);

    namespace fs = std::filesystem;
    const fs::path file = fs::temp_directory_path() / "kap_transcript_test.jsonl";
    const HandshakeResult run = run_handshake(pp, parse_hex("aa"), parse_hex("bb"));
    wire::transcript_write(run.transcript, file);
    CHECK(wire::transcript_read(file) == run.transcript);
    fs::remove(file);
}

TEST_CASE("single-byte mutation fuzz: typed errors only") {
    const PublicParams pp = gen_public_params(4, parse_hex("99"));
    const HandshakeResult run = run_handshake(pp, parse_hex("01"), parse_hex("02"));
    std::vector<std::vector<std::uint8_t>> encodings;
    for (const Frame& f : run.transcript.frames) encodings.push_back(wire::frame_to_bytes(f));

    auto rng = make_rng(0xf022);
    int rejected = 0, accepted = 0;
    for (int i = 0; i < 10000; ++i) {
        auto mutated = encodings[rng.uniform_below(encodings.size())];
        const std::size_t pos = rng.uniform_below(mutated.size());
        const auto old = mutated[pos];
        while (mutated[pos] == old) mutated[pos] = static_cast<std::uint8_t>(rng.next_byte());
        try {
            const Frame f = wire::frame_from_bytes(mutated);
            wire::decode_msg(f, pp);
            ++accepted; // mutation kept the frame valid (payload-value change)
        } catch (const Error&) {
            ++rejected; // typed rejection is the only acceptable failure
        }
    }
    CHECK(rejected + accepted == 10000);
    CHECK(rejected > 0);
}
