#include "kap/protocol.hpp"

#include "kap/error.hpp"
#include "kap/wire.hpp"

#include <algorithm>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <thread>

namespace kap {

namespace {

void check_dims(const PublicParams& pp) {
    if (pp.n < 1 || pp.c.size() != static_cast<std::size_t>(pp.n) * pp.n) {
        throw Error(ErrorCode::LengthMismatch, "params matrix does not match n");
    }
}

// sigma(j) and friends reduced into the field; values are 1..n and p > n for
// derived moduli, but externally supplied params may be smaller.
FieldElement fe_from_u64(std::uint64_t v, const Modulus& m) {
    return fp_reduce(mpz_class(static_cast<unsigned long>(v)), m);
}

} // namespace

AliceSession::AliceSession(PublicParams pp, AliceSecret secret)
    : pp_(std::move(pp)), sec_(std::move(secret)) {
    check_dims(pp_);
    if (sec_.t.size() != pp_.n || sec_.sigma.size() != pp_.n) {
        throw Error(ErrorCode::LengthMismatch, "secret does not match n");
    }
}

Round1Msg AliceSession::round1() {
    if (stage_ != Stage::Fresh) throw Error(ErrorCode::OutOfOrder, "round1 already run");
    Round1Msg msg;
    msg.mu.reserve(pp_.n);
    for (std::uint32_t j = 1; j <= pp_.n; ++j) {
        FieldElement acc;
        for (std::uint32_t i = 1; i <= pp_.n; ++i) {
            if (sec_.t[i - 1]) acc = fp_add(acc, pp_.at(i, j), pp_.m);
        }
        acc = fp_add(acc, fp_mul(fe_from_u64(sec_.sigma.at(j), pp_.m), sec_.alpha, pp_.m), pp_.m);
        msg.mu.push_back(std::move(acc));
    }
    stage_ = Stage::SentRound1;
    return msg;
}

Round3Msg AliceSession::round3(const Round2Msg& r2) {
    if (stage_ != Stage::SentRound1) throw Error(ErrorCode::OutOfOrder, "round3 requires round1 first");
    if (r2.nu.size() != pp_.n) {
        throw Error(ErrorCode::LengthMismatch, "round2 carries " + std::to_string(r2.nu.size()) +
                                                   " elements, expected " + std::to_string(pp_.n));
    }
    const std::uint64_t k_max = max_offset(pp_.n);
    Round3Msg msg;
    msg.digests.reserve(k_max + 1);
    FieldElement preimage = r2.tau_a; // tau_A - k*alpha, stepped by one alpha per k
    for (std::uint64_t k = 0; k <= k_max; ++k) {
        msg.digests.push_back(h_eval(preimage, pp_.m, pp_.owf));
        preimage = fp_sub(preimage, sec_.alpha, pp_.m);
    }
    FieldElement tau_b;
    for (std::uint32_t i = 1; i <= pp_.n; ++i) {
        if (sec_.t[i - 1]) tau_b = fp_add(tau_b, r2.nu[i - 1], pp_.m);
    }
    msg.tau_b = tau_b;
    tau_a_ = r2.tau_a;
    stage_ = Stage::SentRound3;
    return msg;
}

SharedKey AliceSession::finalize(const Round4Msg& r4) {
    if (stage_ != Stage::SentRound3) throw Error(ErrorCode::OutOfOrder, "finalize requires round3 first");
    const std::uint64_t k_max = max_offset(pp_.n);
    if (r4.k0 > k_max) {
        throw Error(ErrorCode::RangeError, "k0 = " + std::to_string(r4.k0) + " exceeds " + std::to_string(k_max));
    }
    SharedKey key;
    key.g = fp_sub(tau_a_, fp_mul(fe_from_u64(r4.k0, pp_.m), sec_.alpha, pp_.m), pp_.m);
    key.digest = h_eval(key.g, pp_.m, pp_.owf);
    stage_ = Stage::Done;
    return key;
}

BobSession::BobSession(PublicParams pp, BobSecret secret)
    : pp_(std::move(pp)), sec_(std::move(secret)) {
    check_dims(pp_);
    if (sec_.s.size() != pp_.n || sec_.rho.size() != pp_.n) {
        throw Error(ErrorCode::LengthMismatch, "secret does not match n");
    }
}

Round2Msg BobSession::round2(const Round1Msg& r1) {
    if (stage_ != Stage::Fresh) throw Error(ErrorCode::OutOfOrder, "round2 already run");
    if (r1.mu.size() != pp_.n) {
        throw Error(ErrorCode::LengthMismatch, "round1 carries " + std::to_string(r1.mu.size()) +
                                                   " elements, expected " + std::to_string(pp_.n));
    }
    Round2Msg msg;
    msg.nu.reserve(pp_.n);
    for (std::uint32_t i = 1; i <= pp_.n; ++i) {
        FieldElement acc;
        for (std::uint32_t j = 1; j <= pp_.n; ++j) {
            if (sec_.s[j - 1]) acc = fp_add(acc, pp_.at(i, j), pp_.m);
        }
        acc = fp_add(acc, fp_mul(fe_from_u64(sec_.rho.at(i), pp_.m), sec_.beta, pp_.m), pp_.m);
        msg.nu.push_back(std::move(acc));
    }
    FieldElement tau_a;
    for (std::uint32_t j = 1; j <= pp_.n; ++j) {
        if (sec_.s[j - 1]) tau_a = fp_add(tau_a, r1.mu[j - 1], pp_.m);
    }
    msg.tau_a = tau_a;
    stage_ = Stage::SentRound2;
    return msg;
}

std::pair<Round4Msg, SharedKey> BobSession::round4(const Round3Msg& r3) {
    if (stage_ != Stage::SentRound2) throw Error(ErrorCode::OutOfOrder, "round4 requires round2 first");
    const MatchResult match = match_digests(r3.digests, r3.tau_b, sec_.beta, pp_.m, pp_.owf, pp_.n);
    SharedKey key;
    key.g = match.g;
    key.digest = r3.digests[match.k0]; // h(g), already published — no extra evaluation
    stage_ = Stage::Done;
    return {Round4Msg{match.k0}, key};
}

MatchResult match_digests(const std::vector<Digest>& digests, const FieldElement& tau_b,
                          const FieldElement& beta, const Modulus& m, const OwfId& owf,
                          std::uint32_t n) {
    const std::uint64_t k_max = max_offset(n);
    if (digests.size() != k_max + 1) {
        throw Error(ErrorCode::LengthMismatch, "digest list has " + std::to_string(digests.size()) +
                                                   " entries, expected " + std::to_string(k_max + 1));
    }
    // Sorted by (digest, k): lower_bound lands on the smallest k of any run
    // of equal digests, which is the tie-break.
    std::vector<std::pair<Digest, std::uint64_t>> index;
    index.reserve(digests.size());
    for (std::uint64_t k = 0; k <= k_max; ++k) index.emplace_back(digests[k], k);
    std::sort(index.begin(), index.end());

    FieldElement candidate = tau_b; // tau_B - l*beta
    for (std::uint64_t l = 0; l <= k_max; ++l) {
        const Digest d = h_eval(candidate, m, owf);
        const auto it = std::lower_bound(index.begin(), index.end(), d,
                                         [](const auto& entry, const Digest& key) { return entry.first < key; });
        if (it != index.end() && it->first == d) {
            return MatchResult{it->second, l, candidate};
        }
        candidate = fp_sub(candidate, beta, m);
    }
    throw Error(ErrorCode::NoMatch, "no digest match in range — corrupted transcript");
}

namespace {

struct ChannelClosed {};

// One-slot rendezvous channel. close() wakes any blocked peer so a failing
// party does not leave the other deadlocked.
class FrameChannel {
public:
    void send(Frame f) {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return closed_ || !slot_.has_value(); });
        if (closed_) throw ChannelClosed{};
        slot_ = std::move(f);
        cv_.notify_all();
    }

    Frame recv() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return closed_ || slot_.has_value(); });
        if (!slot_.has_value()) throw ChannelClosed{};
        Frame f = std::move(*slot_);
        slot_.reset();
        cv_.notify_all();
        return f;
    }

    void close() {
        std::lock_guard lock(mu_);
        closed_ = true;
        cv_.notify_all();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::optional<Frame> slot_;
    bool closed_ = false;
};

} // namespace

HandshakeResult run_handshake(const PublicParams& pp, std::span<const std::uint8_t> seed_alice,
                              std::span<const std::uint8_t> seed_bob) {
    SeededRng rng_a(seed_alice, "alice");
    SeededRng rng_b(seed_bob, "bob");
    AliceSession alice(pp, gen_alice_secret(pp, rng_a));
    BobSession bob(pp, gen_bob_secret(pp, rng_b));

    FrameChannel to_bob, to_alice;
    HandshakeResult result;
    std::exception_ptr alice_err, bob_err;

    std::thread bob_thread([&] {
        try {
            const Round1Msg r1 = wire::decode_round1(to_bob.recv(), pp);
            to_alice.send(wire::encode_msg(bob.round2(r1), pp));
            const Round3Msg r3 = wire::decode_round3(to_bob.recv(), pp);
            auto [r4, key] = bob.round4(r3);
            result.bob_key = std::move(key);
            to_alice.send(wire::encode_msg(r4, pp));
        } catch (const ChannelClosed&) {
        } catch (...) {
            bob_err = std::current_exception();
            to_alice.close();
            to_bob.close();
        }
    });

    try {
        Frame f1 = wire::encode_msg(alice.round1(), pp);
        to_bob.send(f1);
        Frame f2 = to_alice.recv();
        Frame f3 = wire::encode_msg(alice.round3(wire::decode_round2(f2, pp)), pp);
        to_bob.send(f3);
        Frame f4 = to_alice.recv();
        result.alice_key = alice.finalize(wire::decode_round4(f4, pp));
        result.transcript.frames = {std::move(f1), std::move(f2), std::move(f3), std::move(f4)};
    } catch (const ChannelClosed&) {
    } catch (...) {
        alice_err = std::current_exception();
        to_alice.close();
        to_bob.close();
    }

    bob_thread.join();
    if (alice_err) std::rethrow_exception(alice_err);
    if (bob_err) std::rethrow_exception(bob_err);
    return result;
}

} // namespace kap
