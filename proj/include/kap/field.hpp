#pragma once

#include "kap/rng.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <vector>

namespace kap {

// Canonical residue in [0, p). Carries no modulus of its own: operations take
// it from context, so one element value can live under any modulus that
// admits it (parsing validates canonicity at the boundary).
struct FieldElement {
    mpz_class value;

    FieldElement() : value(0) {}
    explicit FieldElement(mpz_class v) : value(std::move(v)) {}
    explicit FieldElement(unsigned long v) : value(v) {}

    bool is_zero() const { return mpz_sgn(value.get_mpz_t()) == 0; }

    friend bool operator==(const FieldElement& a, const FieldElement& b) {
        return mpz_cmp(a.value.get_mpz_t(), b.value.get_mpz_t()) == 0;
    }
    friend bool operator!=(const FieldElement& a, const FieldElement& b) { return !(a == b); }
};

struct Modulus {
    mpz_class p;
    std::size_t byte_width = 0;

    // Validates primality: trial division by small primes, then 128
    // Miller-Rabin rounds. Throws ValidationError on composites.
    static Modulus from_prime(const mpz_class& p);

    std::size_t bit_length() const { return mpz_sizeinbase(p.get_mpz_t(), 2); }

    bool contains(const FieldElement& x) const {
        return mpz_sgn(x.value.get_mpz_t()) >= 0 && mpz_cmp(x.value.get_mpz_t(), p.get_mpz_t()) < 0;
    }
};

FieldElement fp_add(const FieldElement& a, const FieldElement& b, const Modulus& m);
FieldElement fp_mul(const FieldElement& a, const FieldElement& b, const Modulus& m);
FieldElement fp_neg(const FieldElement& a, const Modulus& m);
// a - b, as fp_add(a, fp_neg(b)).
FieldElement fp_sub(const FieldElement& a, const FieldElement& b, const Modulus& m);
// Throws ZeroInverse for a = 0.
FieldElement fp_inv(const FieldElement& a, const Modulus& m);

// Reduce an arbitrary integer into [0, p). Construction-time helper; the
// arithmetic above assumes already-canonical inputs.
FieldElement fp_reduce(const mpz_class& v, const Modulus& m);

// p = least prime >= 2^b with b = ceil(sqrt(n * log2(n))). Throws InvalidN
// for n < 2. Deterministic in n.
Modulus derive_modulus(std::uint32_t n);

// Uniform draw from [0, p): byte_width bytes big-endian, top byte masked down
// to bit_length(p) bits, rejected while >= p.
FieldElement fp_sample(const Modulus& m, SeededRng& rng);

// Fixed-width big-endian encoding; value must fit in width bytes.
std::vector<std::uint8_t> to_bytes_be(const FieldElement& x, std::size_t width);
mpz_class from_bytes_be(std::span<const std::uint8_t> bytes);

} // namespace kap
