#include "kap/attack.hpp"
#include "kap/error.hpp"
#include "kap/protocol.hpp"
#include "kap/wire.hpp"
#include "tcp.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace kap;

// Flag-level problems exit 2; protocol/runtime failures exit 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> seed_flag(const std::string& hex, const char* flag) {
    try {
        return parse_hex(hex);
    } catch (const Error&) {
        throw UsageError(std::string(flag) + " expects hex bytes, got \"" + hex + "\"");
    }
}

struct HonestInstance {
    PublicParams pp;
    AliceSecret asec;
    BobSecret bsec;
    AttackTranscript tr;
    SharedKey key;
};

HonestInstance honest_instance(std::uint32_t n, std::span<const std::uint8_t> seed) {
    HonestInstance inst;
    inst.pp = gen_public_params(n, seed);
    SeededRng rng_a(seed, "alice");
    SeededRng rng_b(seed, "bob");
    inst.asec = gen_alice_secret(inst.pp, rng_a);
    inst.bsec = gen_bob_secret(inst.pp, rng_b);

    AliceSession alice(inst.pp, inst.asec);
    BobSession bob(inst.pp, inst.bsec);
    const Round1Msg r1 = alice.round1();
    const Round2Msg r2 = bob.round2(r1);
    const Round3Msg r3 = alice.round3(r2);
    auto [r4, bob_key] = bob.round4(r3);
    inst.key = alice.finalize(r4);

    inst.tr = AttackTranscript{inst.pp, r1.mu, r2.nu, r2.tau_a, r3.tau_b, r3.digests, r4.k0};
    return inst;
}

std::string bits_to_string(const std::vector<std::uint8_t>& bits) {
    std::string s;
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
}

std::string perm_to_string(const Permutation& perm) {
    std::string s = "[";
    for (std::size_t i = 0; i < perm.image.size(); ++i) {
        if (i) s += " ";
        s += std::to_string(perm.image[i]);
    }
    return s + "]";
}

int cmd_gen_params(std::uint32_t n, const std::string& seed_hex, const std::string& out) {
    const auto seed = seed_flag(seed_hex, "--seed");
    const PublicParams pp = gen_public_params(n, seed);
    wire::params_to_file(pp, out);
    std::cout << "p 0x" << pp.m.p.get_str(16) << "\nbyte_width " << pp.m.byte_width << std::endl;
    return 0;
}

int cmd_run(const std::string& params_path, const std::string& seed_a_hex,
            const std::string& seed_b_hex, const std::optional<std::string>& transcript_out,
            const std::optional<std::string>& verify_path) {
    const auto seed_a = seed_flag(seed_a_hex, "--seed-alice");
    const auto seed_b = seed_flag(seed_b_hex, "--seed-bob");
    const PublicParams pp = wire::params_from_file(params_path);
    const HandshakeResult result = run_handshake(pp, seed_a, seed_b);

    std::cout << "alice " << digest_hex(result.alice_key.digest) << "\n";
    std::cout << "bob   " << digest_hex(result.bob_key.digest) << "\n";
    const bool agree = result.alice_key == result.bob_key;
    std::cout << (agree ? "AGREE" : "DISAGREE") << std::endl;

    if (transcript_out) wire::transcript_write(result.transcript, *transcript_out);
    if (verify_path) {
        const Transcript recorded = wire::transcript_read(*verify_path);
        if (recorded != result.transcript) {
            std::cerr << "error: recorded transcript does not match this run" << std::endl;
            return 1;
        }
        std::cout << "transcript verified" << std::endl;
    }
    return agree ? 0 : 1;
}

int cmd_serve(const std::string& params_path, std::uint16_t port, const std::string& seed_hex) {
    const auto seed = seed_flag(seed_hex, "--seed");
    const PublicParams pp = wire::params_from_file(params_path);

    cli::TcpListener listener(port);
    std::cout << "listening port=" << listener.port() << std::endl;
    cli::TcpConn conn = listener.accept_one();

    SeededRng rng(seed, "alice");
    AliceSession alice(pp, gen_alice_secret(pp, rng));
    conn.send_frame(wire::encode_msg(alice.round1(), pp));
    const Round2Msg r2 = wire::decode_round2(conn.recv_frame(), pp);
    conn.send_frame(wire::encode_msg(alice.round3(r2), pp));
    const Round4Msg r4 = wire::decode_round4(conn.recv_frame(), pp);
    const SharedKey key = alice.finalize(r4);
    std::cout << "key " << digest_hex(key.digest) << std::endl;
    return 0;
}

int cmd_connect(const std::string& params_path, const std::string& host, std::uint16_t port,
                const std::string& seed_hex) {
    const auto seed = seed_flag(seed_hex, "--seed");
    const PublicParams pp = wire::params_from_file(params_path);

    cli::TcpConn conn = cli::TcpConn::connect(host, port);
    SeededRng rng(seed, "bob");
    BobSession bob(pp, gen_bob_secret(pp, rng));
    const Round1Msg r1 = wire::decode_round1(conn.recv_frame(), pp);
    conn.send_frame(wire::encode_msg(bob.round2(r1), pp));
    const Round3Msg r3 = wire::decode_round3(conn.recv_frame(), pp);
    auto [r4, key] = bob.round4(r3);
    conn.send_frame(wire::encode_msg(r4, pp));
    std::cout << "key " << digest_hex(key.digest) << std::endl;
    return 0;
}

int cmd_attack_count(std::uint32_t n, std::uint32_t trials, const std::string& csv_path,
                     const std::string& seed_hex, bool force) {
    if (n > 20 && !force) throw UsageError("n > 20 needs --force (exhaustive enumeration)");
    const auto seed = seed_flag(seed_hex, "--seed");
    SeededRng rng(seed, "count");
    const SolutionCountStats stats = solution_count_experiment(n, trials, rng);
    wire::write_text_file_atomic(csv_path, solution_counts_csv(stats));

    std::printf("n=%u p=%s trials=%zu\n", stats.n, stats.p.get_str().c_str(), stats.counts.size());
    std::printf("count mean=%.3f min=%llu max=%llu\n", stats.mean,
                static_cast<unsigned long long>(stats.min),
                static_cast<unsigned long long>(stats.max));
    std::printf("prediction 2^n/p = %s\n", stats.prediction_rounded.c_str());
    std::printf("csv written to %s\n", csv_path.c_str());
    return 0;
}

int cmd_attack_recover(std::uint32_t n, std::uint32_t r, bool guess_true,
                       const std::string& seed_hex, bool force) {
    if (n > 20 && !force) throw UsageError("n > 20 needs --force (exhaustive enumeration)");
    if (r < 2 || r > n) throw UsageError("--r must be in [2, n]");
    const auto seed = seed_flag(seed_hex, "--seed");
    const HonestInstance inst = honest_instance(n, seed);

    GuessSet guess;
    if (guess_true) {
        guess.values.assign(inst.asec.sigma.image.begin(), inst.asec.sigma.image.begin() + r);
    } else {
        SeededRng rng(seed, "wrong-guess");
        do {
            const Permutation perm = gen_permutation(n, rng);
            guess.values.assign(perm.image.begin(), perm.image.begin() + r);
        } while (std::equal(guess.values.begin(), guess.values.end(), inst.asec.sigma.image.begin()));
    }

    std::cout << "n=" << n << " r=" << r << " guess=" << perm_to_string(Permutation{guess.values})
              << (guess_true ? " (true prefix)" : " (random wrong)") << "\n";

    const auto candidates = full_attack(inst.tr, guess);
    for (const auto& cand : candidates) {
        std::cout << "candidate t=" << bits_to_string(cand.t) << " alpha=0x"
                  << cand.alpha.value.get_str(16) << " sigma=" << perm_to_string(cand.sigma)
                  << " g=0x" << cand.g.value.get_str(16) << (cand.unique_recovery ? "" : " (tie)")
                  << "\n";
    }

    const bool success = candidates.size() == 1 && candidates[0].t == inst.asec.t &&
                         candidates[0].alpha == inst.asec.alpha &&
                         candidates[0].sigma == inst.asec.sigma && candidates[0].g == inst.key.g;
    std::cout << (success ? "SUCCESS" : "FAIL") << std::endl;
    return 0;
}

double mean_handshake_ms(std::uint32_t n, std::uint32_t trials) {
    const auto seed = std::vector<std::uint8_t>{static_cast<std::uint8_t>(n), 0x42};
    const PublicParams pp = gen_public_params(n, seed);
    const auto start = std::chrono::steady_clock::now();
    for (std::uint32_t i = 0; i < trials; ++i) {
        std::vector<std::uint8_t> sa = {static_cast<std::uint8_t>(i), 0x0a};
        std::vector<std::uint8_t> sb = {static_cast<std::uint8_t>(i), 0x0b};
        SeededRng rng_a(sa, "alice");
        SeededRng rng_b(sb, "bob");
        AliceSession alice(pp, gen_alice_secret(pp, rng_a));
        BobSession bob(pp, gen_bob_secret(pp, rng_b));
        const Round2Msg r2 = bob.round2(alice.round1());
        const Round3Msg r3 = alice.round3(r2);
        auto [r4, bob_key] = bob.round4(r3);
        const SharedKey alice_key = alice.finalize(r4);
        if (!(alice_key.g == bob_key.g)) throw Error(ErrorCode::NoMatch, "bench handshake failed");
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    return std::chrono::duration<double, std::milli>(elapsed).count() / trials;
}

int cmd_bench(const std::vector<std::uint32_t>& ns, std::uint32_t trials) {
    std::printf("%6s %10s %14s %12s %10s %16s\n", "n", "p_bits", "alice_h_evals", "expected",
                "mean_ms", "time(2n)/time(n)");
    for (std::uint32_t n : ns) {
        const auto seed = std::vector<std::uint8_t>{static_cast<std::uint8_t>(n), 0x42};
        const PublicParams pp = gen_public_params(n, seed);
        SeededRng rng_a(seed, "alice");
        SeededRng rng_b(seed, "bob");
        AliceSession alice(pp, gen_alice_secret(pp, rng_a));
        BobSession bob(pp, gen_bob_secret(pp, rng_b));
        const Round2Msg r2 = bob.round2(alice.round1());
        owf_reset_eval_count();
        alice.round3(r2);
        const std::uint64_t evals = owf_eval_count();
        owf_reset_eval_count();

        const double t1 = mean_handshake_ms(n, trials);
        const double t2 = mean_handshake_ms(2 * n, trials);
        std::printf("%6u %10zu %14llu %12llu %10.3f %16.2f\n", n, pp.m.bit_length(),
                    static_cast<unsigned long long>(evals),
                    static_cast<unsigned long long>(max_offset(n) + 1), t1, t2 / t1);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"4-pass key agreement over F_p with a hash-list match, plus its knapsack cryptanalysis"};
    app.require_subcommand(1);

    // gen-params
    auto* gen = app.add_subcommand("gen-params", "Generate a public parameter file");
    std::uint32_t gen_n = 16;
    std::string gen_seed, gen_out;
    gen->add_option("--n", gen_n, "instance size")->required()->check(CLI::Range(2u, 92680u));
    gen->add_option("--seed", gen_seed, "hex seed for the parameter stream")->required();
    gen->add_option("--out", gen_out, "output path (JSON)")->required();

    // run
    auto* run = app.add_subcommand("run", "Run a full in-memory handshake");
    std::string run_params, run_seed_a, run_seed_b;
    std::optional<std::string> run_transcript, run_verify;
    run->add_option("--params", run_params, "params file")->required();
    run->add_option("--seed-alice", run_seed_a, "hex seed for Alice's secrets")->required();
    run->add_option("--seed-bob", run_seed_b, "hex seed for Bob's secrets")->required();
    run->add_option("--transcript", run_transcript, "write the transcript here (JSON Lines)");
    run->add_option("--verify", run_verify, "replay-check this recorded transcript");

    // serve / connect
    auto* serve = app.add_subcommand("serve", "Play Alice over TCP (sends round 1 on accept)");
    std::string serve_params, serve_seed;
    std::uint16_t serve_port = 0;
    serve->add_option("--params", serve_params, "params file")->required();
    serve->add_option("--port", serve_port, "listen port (0 = ephemeral, printed on start)")->required();
    serve->add_option("--seed", serve_seed, "hex seed for Alice's secrets")->required();

    auto* connect = app.add_subcommand("connect", "Play Bob over TCP");
    std::string conn_params, conn_seed, conn_host = "127.0.0.1";
    std::uint16_t conn_port = 0;
    connect->add_option("--params", conn_params, "params file")->required();
    connect->add_option("--host", conn_host, "server host");
    connect->add_option("--port", conn_port, "server port")->required();
    connect->add_option("--seed", conn_seed, "hex seed for Bob's secrets")->required();

    // attack
    auto* attack = app.add_subcommand("attack", "Cryptanalysis experiments");
    attack->require_subcommand(1);
    auto* count = attack->add_subcommand("count", "Exhaustively count subset-sum solutions");
    std::uint32_t count_n = 16, count_trials = 50;
    std::string count_csv, count_seed = "00";
    bool count_force = false;
    count->add_option("--n", count_n, "instance size");
    count->add_option("--trials", count_trials, "number of honest instances");
    count->add_option("--csv", count_csv, "output CSV path")->required();
    count->add_option("--seed", count_seed, "hex seed for the experiment");
    count->add_flag("--force", count_force, "allow n > 20");

    auto* recover = attack->add_subcommand("recover", "Recover secrets from guessed permutation values");
    std::uint32_t rec_n = 16, rec_r = 0;
    std::string rec_seed = "00";
    bool rec_guess_true = true, rec_force = false;
    recover->add_option("--n", rec_n, "instance size");
    recover->add_option("--r", rec_r, "number of guessed values (default n)");
    recover->add_option("--guess-true", rec_guess_true, "guess the true prefix (true) or a random one (false)");
    recover->add_option("--seed", rec_seed, "hex seed for the instance");
    recover->add_flag("--force", rec_force, "allow n > 20");

    // bench
    auto* bench = app.add_subcommand("bench", "Measure hash counts and handshake wall time");
    std::vector<std::uint32_t> bench_ns = {8, 16, 32};
    std::uint32_t bench_trials = 5;
    bench->add_option("--n", bench_ns, "instance sizes")->delimiter(',');
    bench->add_option("--trials", bench_trials, "handshakes per size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) return cmd_gen_params(gen_n, gen_seed, gen_out);
        if (*run) return cmd_run(run_params, run_seed_a, run_seed_b, run_transcript, run_verify);
        if (*serve) return cmd_serve(serve_params, serve_port, serve_seed);
        if (*connect) return cmd_connect(conn_params, conn_host, conn_port, conn_seed);
        if (*count) return cmd_attack_count(count_n, count_trials, count_csv, count_seed, count_force);
        if (*recover) {
            return cmd_attack_recover(rec_n, rec_r == 0 ? rec_n : rec_r, rec_guess_true, rec_seed,
                                      rec_force);
        }
        if (*bench) return cmd_bench(bench_ns, bench_trials);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << std::endl;
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return e.code() == ErrorCode::TooLarge ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 2;
}
