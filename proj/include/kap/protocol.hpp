#pragma once

#include "kap/field.hpp"
#include "kap/frame.hpp"
#include "kap/owf.hpp"
#include "kap/params.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace kap {

// The match offsets k, l run over 0..K with K = n(n+1)/2: the true offset
// sum_j s_j*sigma(j) is 0 for all-zero bits and n(n+1)/2 for all-one bits,
// so the full closed range is required for every bit vector the sampler can
// produce.
inline std::uint64_t max_offset(std::uint32_t n) {
    return static_cast<std::uint64_t>(n) * (n + 1) / 2;
}

struct Round1Msg {
    std::vector<FieldElement> mu; // mu_1..mu_n

    friend bool operator==(const Round1Msg&, const Round1Msg&) = default;
};

struct Round2Msg {
    std::vector<FieldElement> nu; // nu_1..nu_n
    FieldElement tau_a;

    friend bool operator==(const Round2Msg&, const Round2Msg&) = default;
};

struct Round3Msg {
    std::vector<Digest> digests; // h(tau_A - k*alpha) for k = 0..K
    FieldElement tau_b;

    friend bool operator==(const Round3Msg&, const Round3Msg&) = default;
};

struct Round4Msg {
    std::uint64_t k0 = 0; // in [0, K]

    friend bool operator==(const Round4Msg&, const Round4Msg&) = default;
};

struct SharedKey {
    FieldElement g;
    Digest digest{}; // = h(g)

    friend bool operator==(const SharedKey&, const SharedKey&) = default;
};

struct MatchResult {
    std::uint64_t k0 = 0;
    std::uint64_t l0 = 0;
    FieldElement g; // = tau_B - l0*beta
};

// Scans l = 0..K against a sorted index of the published digests and returns
// the match with smallest l0, ties broken by smallest k0 — both sides land on
// the same pair with no extra communication. At most K+1 h_eval calls.
// Throws NoMatch only on corrupted transcripts; honest runs always match
// because the true offsets (k', l') are in range.
MatchResult match_digests(const std::vector<Digest>& digests, const FieldElement& tau_b,
                          const FieldElement& beta, const Modulus& m, const OwfId& owf,
                          std::uint32_t n);

// One-shot, ordered round state machines. Any out-of-order invocation throws
// OutOfOrder and leaves the session unchanged.
class AliceSession {
public:
    AliceSession(PublicParams pp, AliceSecret secret);

    // mu_j = sum_i t_i c_{i,j} + sigma(j)*alpha
    Round1Msg round1();
    // digests[k] = h(tau_A - k*alpha) for k = 0..K; tau_B = sum_i t_i nu_i.
    // Retains tau_A for finalize.
    Round3Msg round3(const Round2Msg& r2);
    // g = tau_A - k0*alpha. Throws RangeError if r4.k0 > K.
    SharedKey finalize(const Round4Msg& r4);

    const PublicParams& params() const { return pp_; }
    const AliceSecret& secret() const { return sec_; }

private:
    enum class Stage { Fresh, SentRound1, SentRound3, Done };

    PublicParams pp_;
    AliceSecret sec_;
    Stage stage_ = Stage::Fresh;
    FieldElement tau_a_;
};

class BobSession {
public:
    BobSession(PublicParams pp, BobSecret secret);

    // nu_i = sum_j s_j c_{i,j} + rho(i)*beta; tau_A = sum_j s_j mu_j. Bob
    // retains nothing beyond his secret — the message carries both values.
    Round2Msg round2(const Round1Msg& r1);
    // Runs the digest match; returns k0 for Alice and Bob's key. The key's
    // digest is taken from the published list (equal to h(g) by the match).
    std::pair<Round4Msg, SharedKey> round4(const Round3Msg& r3);

    const PublicParams& params() const { return pp_; }
    const BobSecret& secret() const { return sec_; }

private:
    enum class Stage { Fresh, SentRound2, Done };

    PublicParams pp_;
    BobSecret sec_;
    Stage stage_ = Stage::Fresh;
};

struct HandshakeResult {
    SharedKey alice_key;
    SharedKey bob_key;
    Transcript transcript;
};

// Full four-round exchange between two concurrent tasks over an in-memory
// ordered channel. Secrets are generated from the seeds (role tags "alice"
// and "bob"); the transcript holds the four encoded frames in round order.
HandshakeResult run_handshake(const PublicParams& pp, std::span<const std::uint8_t> seed_alice,
                              std::span<const std::uint8_t> seed_bob);

} // namespace kap
