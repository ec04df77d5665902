// Acceptance suite: drives every stated correctness criterion end to end and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.
//
//   kap_acceptance --cli <path-to-kap-binary>
//
// The CLI path is needed for the socket-interop criterion, which runs real
// serve/connect processes over loopback.

#include "kap/attack.hpp"
#include "kap/error.hpp"
#include "kap/protocol.hpp"
#include "kap/wire.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace kap;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path;
fs::path g_work_dir;

std::vector<std::uint8_t> seed_bytes(std::uint64_t seed) {
    std::vector<std::uint8_t> bytes(8);
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<std::uint8_t>(seed >> (8 * (7 - i)));
    return bytes;
}

struct RoundsResult {
    AliceSecret asec;
    BobSecret bsec;
    Round1Msg r1;
    Round2Msg r2;
    Round3Msg r3;
    Round4Msg r4;
    SharedKey alice_key;
    SharedKey bob_key;
};

RoundsResult drive_rounds(const PublicParams& pp, AliceSecret asec, BobSecret bsec) {
    RoundsResult out{asec, bsec, {}, {}, {}, {}, {}, {}};
    AliceSession alice(pp, std::move(asec));
    BobSession bob(pp, std::move(bsec));
    out.r1 = alice.round1();
    out.r2 = bob.round2(out.r1);
    out.r3 = alice.round3(out.r2);
    auto [r4, bob_key] = bob.round4(out.r3);
    out.r4 = r4;
    out.bob_key = bob_key;
    out.alice_key = alice.finalize(out.r4);
    return out;
}

RoundsResult random_rounds(std::uint32_t n, std::uint64_t seed) {
    const auto sb = seed_bytes(seed);
    const PublicParams pp = gen_public_params(n, sb);
    SeededRng rng_a(sb, "alice");
    SeededRng rng_b(sb, "bob");
    return drive_rounds(pp, gen_alice_secret(pp, rng_a), gen_bob_secret(pp, rng_b));
}

// --- criterion 1: key agreement ------------------------------------------

std::string criterion_key_agreement() {
    const auto start = std::chrono::steady_clock::now();
    std::uint64_t runs = 0;
    for (std::uint32_t n : {4u, 8u, 16u, 32u}) {
        const auto base = seed_bytes(n * 1000003ull);
        const PublicParams pp = gen_public_params(n, base);

        // Forced corner bit vectors first: they need the extended 0..n(n+1)/2
        // match range.
        const std::vector<std::uint8_t> zeros(n, 0), ones(n, 1);
        std::vector<std::pair<const std::vector<std::uint8_t>*, const std::vector<std::uint8_t>*>>
            corners = {{&zeros, &zeros}, {&zeros, &ones},   {&ones, &zeros},  {&ones, &ones},
                       {&zeros, nullptr}, {&ones, nullptr}, {nullptr, &zeros}, {nullptr, &ones}};
        std::uint64_t seed = 0;
        for (const auto& [t_force, s_force] : corners) {
            const auto sb = seed_bytes(n * 7700007ull + seed++);
            SeededRng rng_a(sb, "alice");
            SeededRng rng_b(sb, "bob");
            AliceSecret asec = gen_alice_secret(pp, rng_a);
            BobSecret bsec = gen_bob_secret(pp, rng_b);
            if (t_force) asec.t = *t_force;
            if (s_force) bsec.s = *s_force;
            const RoundsResult run = drive_rounds(pp, asec, bsec);
            ++runs;
            if (!(run.alice_key.g == run.bob_key.g)) {
                throw std::runtime_error("corner-case disagreement at n=" + std::to_string(n));
            }
        }
        for (int i = 0; i < 992; ++i) {
            const RoundsResult run = random_rounds(n, n * 5500001ull + i);
            ++runs;
            if (!(run.alice_key.g == run.bob_key.g) || run.alice_key.digest != run.bob_key.digest) {
                throw std::runtime_error("disagreement at n=" + std::to_string(n) +
                                         " trial=" + std::to_string(i));
            }
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= 60.0) throw std::runtime_error("over the 60 s budget: " + std::to_string(secs));
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%llu/%llu agreements at n in {4,8,16,32} in %.1f s",
                  static_cast<unsigned long long>(runs), static_cast<unsigned long long>(runs), secs);
    return buf;
}

// --- criterion 2: correctness identities ----------------------------------

std::string criterion_identities() {
    for (int trial = 0; trial < 500; ++trial) {
        const std::uint32_t n = 2 + trial % 15;
        const RoundsResult run = random_rounds(n, 0x2e500 + trial);
        const auto sb = seed_bytes(0x2e500 + trial);
        const PublicParams pp = gen_public_params(n, sb);
        const Modulus& m = pp.m;

        FieldElement g_prime;
        std::uint64_t k_true = 0, l_true = 0;
        for (std::uint32_t i = 1; i <= n; ++i) {
            for (std::uint32_t j = 1; j <= n; ++j) {
                if (run.asec.t[i - 1] && run.bsec.s[j - 1]) g_prime = fp_add(g_prime, pp.at(i, j), m);
            }
        }
        for (std::uint32_t j = 1; j <= n; ++j) {
            if (run.bsec.s[j - 1]) k_true += run.asec.sigma.at(j);
        }
        for (std::uint32_t i = 1; i <= n; ++i) {
            if (run.asec.t[i - 1]) l_true += run.bsec.rho.at(i);
        }
        const FieldElement k_fe = fp_reduce(mpz_class(static_cast<unsigned long>(k_true)), m);
        const FieldElement l_fe = fp_reduce(mpz_class(static_cast<unsigned long>(l_true)), m);
        if (!(run.r2.tau_a == fp_add(g_prime, fp_mul(k_fe, run.asec.alpha, m), m))) {
            throw std::runtime_error("tau_A identity failed at trial " + std::to_string(trial));
        }
        if (!(run.r3.tau_b == fp_add(g_prime, fp_mul(l_fe, run.bsec.beta, m), m))) {
            throw std::runtime_error("tau_B identity failed at trial " + std::to_string(trial));
        }
    }
    return "tau_A and tau_B recompositions exact over 500 runs";
}

// --- criterion 3: match oracle equivalence ---------------------------------

MatchResult brute_force_match(const std::vector<Digest>& digests, const FieldElement& tau_b,
                              const FieldElement& beta, const Modulus& m, const OwfId& owf,
                              std::uint32_t n) {
    const std::uint64_t k_max = max_offset(n);
    FieldElement cand = tau_b;
    for (std::uint64_t l = 0; l <= k_max; ++l) {
        const Digest d = h_eval(cand, m, owf);
        for (std::uint64_t k = 0; k <= k_max; ++k) {
            if (digests[k] == d) return MatchResult{k, l, cand};
        }
        cand = fp_sub(cand, beta, m);
    }
    throw std::runtime_error("brute-force matcher found nothing (corrupt instance)");
}

std::string criterion_match_oracle() {
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint32_t n = 2 + trial % 7; // 2..8
        const RoundsResult run = random_rounds(n, 0x3a7c4 + trial);
        const PublicParams pp = gen_public_params(n, seed_bytes(0x3a7c4 + trial));
        const MatchResult fast =
            match_digests(run.r3.digests, run.r3.tau_b, run.bsec.beta, pp.m, pp.owf, n);
        const MatchResult brute =
            brute_force_match(run.r3.digests, run.r3.tau_b, run.bsec.beta, pp.m, pp.owf, n);
        if (fast.k0 != brute.k0 || fast.l0 != brute.l0 || !(fast.g == brute.g)) {
            throw std::runtime_error("match mismatch at trial " + std::to_string(trial));
        }
    }
    return "match_digests == exhaustive double loop on 200/200 instances (n <= 8)";
}

// --- criterion 4: hash budget ----------------------------------------------

std::string criterion_hash_budget() {
    std::string detail;
    for (std::uint32_t n : {8u, 16u, 32u}) {
        const auto sb = seed_bytes(0x4b0d6e7 + n);
        const PublicParams pp = gen_public_params(n, sb);
        SeededRng rng_a(sb, "alice");
        SeededRng rng_b(sb, "bob");
        AliceSession alice(pp, gen_alice_secret(pp, rng_a));
        BobSession bob(pp, gen_bob_secret(pp, rng_b));
        const Round2Msg r2 = bob.round2(alice.round1());

        const std::uint64_t budget = max_offset(n) + 1;
        owf_reset_eval_count();
        const Round3Msg r3 = alice.round3(r2);
        const std::uint64_t alice_evals = owf_eval_count();
        owf_reset_eval_count();
        bob.round4(r3);
        const std::uint64_t bob_evals = owf_eval_count();
        owf_reset_eval_count();

        if (alice_evals != budget) {
            throw std::runtime_error("Alice used " + std::to_string(alice_evals) + " evals at n=" +
                                     std::to_string(n) + ", budget " + std::to_string(budget));
        }
        if (bob_evals > budget) {
            throw std::runtime_error("Bob used " + std::to_string(bob_evals) + " evals at n=" +
                                     std::to_string(n) + ", budget " + std::to_string(budget));
        }
        detail += "n=" + std::to_string(n) + ": alice=" + std::to_string(alice_evals) + " bob=" +
                  std::to_string(bob_evals) + "/" + std::to_string(budget) + "  ";
    }
    return detail;
}

// --- criterion 5: attack recovery ------------------------------------------

std::string criterion_attack_recovery() {
    std::string detail;
    for (std::uint32_t n : {8u, 10u, 12u}) {
        int exact = 0, empty_on_wrong = 0;
        const int trials = 200;
        for (int trial = 0; trial < trials; ++trial) {
            const std::uint64_t seed = n * 0x51a000ull + trial;
            const RoundsResult run = random_rounds(n, seed);
            const PublicParams pp = gen_public_params(n, seed_bytes(seed));
            const AttackTranscript tr{pp,         run.r1.mu,      run.r2.nu, run.r2.tau_a,
                                      run.r3.tau_b, run.r3.digests, run.r4.k0};

            GuessSet true_guess{run.asec.sigma.image};
            const auto out = full_attack(tr, true_guess);
            if (out.size() == 1 && out[0].t == run.asec.t && out[0].alpha == run.asec.alpha &&
                out[0].sigma == run.asec.sigma && out[0].g == run.alice_key.g) {
                ++exact;
            }

            SeededRng wrong_rng(seed_bytes(seed), "wrong");
            GuessSet wrong;
            do {
                wrong.values = gen_permutation(n, wrong_rng).image;
            } while (wrong.values == run.asec.sigma.image);
            if (full_attack(tr, wrong).empty()) ++empty_on_wrong;
        }
        if (exact < 198) { // >= 99% of 200
            throw std::runtime_error("exact recovery " + std::to_string(exact) + "/200 at n=" +
                                     std::to_string(n));
        }
        if (empty_on_wrong < 190) { // >= 95% of 200
            throw std::runtime_error("wrong guesses rejected only " +
                                     std::to_string(empty_on_wrong) + "/200 at n=" + std::to_string(n));
        }
        detail += "n=" + std::to_string(n) + ": exact=" + std::to_string(exact) + "/200 rejected=" +
                  std::to_string(empty_on_wrong) + "/200  ";
    }
    return detail;
}

// --- criterion 6: solution-count heuristic ---------------------------------

std::string criterion_solution_counts() {
    const auto start = std::chrono::steady_clock::now();
    SeededRng rng(seed_bytes(0x6c07), "count");
    const SolutionCountStats stats = solution_count_experiment(16, 50, rng);
    const double lo = 65536.0 / (4 * 257);
    const double hi = 4 * 65536.0 / 257;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= 300.0) throw std::runtime_error("over the 5 min budget");
    if (stats.mean < lo || stats.mean > hi) {
        throw std::runtime_error("mean " + std::to_string(stats.mean) + " outside [" +
                                 std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "mean=%.1f over 50 trials at n=16, band [%.2f, %.2f], 2^16/257=%s",
                  stats.mean, lo, hi, stats.prediction_rounded.c_str());
    return buf;
}

// --- criterion 7: serialization --------------------------------------------

std::string criterion_serialization() {
    // 1e4 random field-element round trips across several moduli
    for (std::uint32_t n : {16u, 32u, 64u}) {
        const Modulus m = derive_modulus(n);
        SeededRng rng(seed_bytes(0x7e1d + n), "fields");
        for (int i = 0; i < 3400; ++i) {
            const FieldElement x = fp_sample(m, rng);
            if (!(wire::decode_field(wire::encode_field(x, m), m) == x)) {
                throw std::runtime_error("field round trip failed");
            }
        }
    }

    // 100 full transcript round trips through real files
    const fs::path dir = g_work_dir / "transcripts";
    fs::create_directories(dir);
    std::vector<std::vector<std::uint8_t>> frame_encodings;
    std::vector<std::string> documents;
    PublicParams fuzz_pp;
    for (int i = 0; i < 100; ++i) {
        const std::uint32_t n = 2 + i % 7;
        const PublicParams pp = gen_public_params(n, seed_bytes(0x77a0 + i));
        const HandshakeResult run = run_handshake(pp, seed_bytes(i), seed_bytes(~i));
        const fs::path file = dir / ("t" + std::to_string(i) + ".jsonl");
        wire::transcript_write(run.transcript, file);
        if (!(wire::transcript_read(file) == run.transcript)) {
            throw std::runtime_error("transcript round trip failed at " + std::to_string(i));
        }
        if (i == 0) {
            for (const Frame& f : run.transcript.frames) {
                frame_encodings.push_back(wire::frame_to_bytes(f));
            }
            documents.push_back(wire::params_to_json(pp));
            documents.push_back(wire::transcript_to_jsonl(run.transcript));
            fuzz_pp = pp;
        }
    }

    // 1e4 single-byte mutations: typed errors only, no crashes
    SeededRng rng(seed_bytes(0x7f22), "fuzz");
    int frame_cases = 0, doc_cases = 0;
    for (int i = 0; i < 10000; ++i) {
        const bool mutate_frame = rng.uniform_below(10) < 7;
        try {
            if (mutate_frame) {
                auto bytes = frame_encodings[rng.uniform_below(frame_encodings.size())];
                const std::size_t pos = rng.uniform_below(bytes.size());
                const auto old = bytes[pos];
                while (bytes[pos] == old) bytes[pos] = rng.next_byte();
                ++frame_cases;
                wire::decode_msg(wire::frame_from_bytes(bytes), fuzz_pp);
            } else {
                std::string doc = documents[rng.uniform_below(documents.size())];
                const std::size_t pos = rng.uniform_below(doc.size());
                const char old = doc[pos];
                while (doc[pos] == old) doc[pos] = static_cast<char>(rng.next_byte());
                ++doc_cases;
                if (doc.find("\"C\"") != std::string::npos) {
                    wire::params_from_json(doc);
                } else {
                    wire::transcript_from_jsonl(doc);
                }
            }
        } catch (const Error&) {
            // typed rejection is the expected outcome
        }
    }
    return "1e4 field + 100 transcript round trips ok; fuzz " + std::to_string(frame_cases) +
           " frame + " + std::to_string(doc_cases) + " document mutations, typed errors only";
}

// --- criterion 8: socket interop -------------------------------------------

struct Proc {
    FILE* stream = nullptr;

    explicit Proc(const std::string& cmd) : stream(popen(cmd.c_str(), "r")) {
        if (!stream) throw std::runtime_error("popen failed: " + cmd);
    }
    Proc(const Proc&) = delete;
    Proc& operator=(const Proc&) = delete;
    ~Proc() {
        if (stream) pclose(stream);
    }

    std::string read_line() {
        char buf[512];
        if (!fgets(buf, sizeof(buf), stream)) return "";
        std::string line(buf);
        while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
        return line;
    }

    int close() {
        const int status = pclose(stream);
        stream = nullptr;
        return status;
    }
};

std::string extract_key(const std::string& line) {
    return line.rfind("key ", 0) == 0 ? line.substr(4) : "";
}

std::string criterion_socket_interop() {
    if (g_cli_path.empty()) throw std::runtime_error("no --cli path given");
    const fs::path params = g_work_dir / "interop.json";
    {
        Proc gen("'" + g_cli_path + "' gen-params --n 16 --seed 1a2b --out '" + params.string() +
                 "' 2>&1");
        while (!gen.read_line().empty()) {
        }
        if (gen.close() != 0) throw std::runtime_error("gen-params failed");
    }

    for (int i = 0; i < 20; ++i) {
        char seed_a[16], seed_b[16];
        std::snprintf(seed_a, sizeof(seed_a), "a0%02x", i);
        std::snprintf(seed_b, sizeof(seed_b), "b0%02x", i);

        Proc serve("'" + g_cli_path + "' serve --params '" + params.string() +
                   "' --port 0 --seed " + seed_a + " 2>&1");
        const std::string port_line = serve.read_line();
        unsigned port = 0;
        if (std::sscanf(port_line.c_str(), "listening port=%u", &port) != 1 || port == 0) {
            throw std::runtime_error("serve did not report a port: \"" + port_line + "\"");
        }

        Proc connect("'" + g_cli_path + "' connect --params '" + params.string() + "' --port " +
                     std::to_string(port) + " --seed " + seed_b + " 2>&1");
        std::string bob_key;
        for (std::string line = connect.read_line(); !line.empty(); line = connect.read_line()) {
            if (!extract_key(line).empty()) bob_key = extract_key(line);
        }
        const std::string alice_key = extract_key(serve.read_line());

        if (connect.close() != 0) throw std::runtime_error("connect exited nonzero at run " + std::to_string(i));
        if (serve.close() != 0) throw std::runtime_error("serve exited nonzero at run " + std::to_string(i));
        if (alice_key.empty() || alice_key != bob_key) {
            throw std::runtime_error("digest mismatch at run " + std::to_string(i) + ": \"" +
                                     alice_key + "\" vs \"" + bob_key + "\"");
        }
    }
    return "20/20 loopback runs printed identical digests at n=16";
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--cli") g_cli_path = argv[i + 1];
    }
    g_work_dir = fs::temp_directory_path() / ("kap_acceptance_" + std::to_string(getpid()));
    fs::create_directories(g_work_dir);

    struct Criterion {
        const char* name;
        std::function<std::string()> run;
    };
    const std::vector<Criterion> criteria = {
        {"key agreement (1000 handshakes x n in {4,8,16,32}, corner bits)", criterion_key_agreement},
        {"correctness identities for tau_A / tau_B (500 runs)", criterion_identities},
        {"match oracle equivalence (200 instances, n <= 8)", criterion_match_oracle},
        {"hash budget K+1 (n in {8,16,32})", criterion_hash_budget},
        {"attack recovery (n in {8,10,12}, 200 trials each)", criterion_attack_recovery},
        {"solution-count heuristic (n=16, 50 trials)", criterion_solution_counts},
        {"serialization round trips + mutation fuzz", criterion_serialization},
        {"socket interop over loopback (20 runs)", criterion_socket_interop},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        try {
            const std::string detail = criteria[i].run();
            std::printf("[PASS] %zu. %s: %s\n", i + 1, criteria[i].name, detail.c_str());
        } catch (const std::exception& e) {
            ++failures;
            std::printf("[FAIL] %zu. %s: %s\n", i + 1, criteria[i].name, e.what());
        }
        std::fflush(stdout);
    }

    std::error_code ec;
    fs::remove_all(g_work_dir, ec);
    if (failures == 0) {
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    } else {
        std::printf("%d acceptance criteria FAILED\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
