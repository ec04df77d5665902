#pragma once

#include "kap/field.hpp"
#include "kap/owf.hpp"
#include "kap/rng.hpp"

#include <cstdint>
#include <vector>

namespace kap {

// The values pi(1),...,pi(n), each of 1..n exactly once.
struct Permutation {
    std::vector<std::uint32_t> image;

    std::uint32_t size() const { return static_cast<std::uint32_t>(image.size()); }
    // pi(j) for 1-based j, matching the protocol equations.
    std::uint32_t at(std::uint32_t j) const { return image[j - 1]; }
    bool is_valid() const;

    friend bool operator==(const Permutation&, const Permutation&) = default;
};

// Everything both parties (and any eavesdropper) see before the first round:
// n, the prime, the n x n coefficient matrix, the OWF choice, plus the seed
// and RNG tag that make a generated instance reproducible.
struct PublicParams {
    std::uint32_t n = 0;
    Modulus m;
    std::vector<FieldElement> c; // row-major, n*n entries
    OwfId owf;
    std::vector<std::uint8_t> seed;
    std::string rng_tag;

    // c_{i,j} with 1-based indices as in the round equations.
    const FieldElement& at(std::uint32_t i, std::uint32_t j) const {
        return c[static_cast<std::size_t>(i - 1) * n + (j - 1)];
    }
};

struct AliceSecret {
    FieldElement alpha;              // nonzero
    std::vector<std::uint8_t> t;     // n bits
    Permutation sigma;
};

struct BobSecret {
    FieldElement beta;               // nonzero
    std::vector<std::uint8_t> s;     // n bits
    Permutation rho;
};

// p = derive_modulus(n); C filled row-major from the stream keyed by
// (seed, "C"). Identical (n, seed) give identical params. Throws InvalidN.
PublicParams gen_public_params(std::uint32_t n, std::span<const std::uint8_t> seed);

// Uniform permutation by Fisher-Yates.
Permutation gen_permutation(std::uint32_t n, SeededRng& rng);

// alpha uniform in F_p \ {0} (zero is degenerate: every list entry in round 3
// would hash the same preimage), t uniform bits, sigma uniform.
AliceSecret gen_alice_secret(const PublicParams& pp, SeededRng& rng);
BobSecret gen_bob_secret(const PublicParams& pp, SeededRng& rng);

} // namespace kap
