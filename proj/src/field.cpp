#include "kap/field.hpp"

#include "kap/error.hpp"

#include <cmath>
#include <cstring>

namespace kap {

namespace {

constexpr int kMillerRabinRounds = 128;

bool passes_small_prime_sieve(const mpz_class& p) {
    static constexpr unsigned long small_primes[] = {
        2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
        67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139,
        149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
        227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293};
    for (unsigned long q : small_primes) {
        if (mpz_cmp_ui(p.get_mpz_t(), q) == 0) return true;
        if (mpz_divisible_ui_p(p.get_mpz_t(), q)) return false;
    }
    return true;
}

bool is_probable_prime(const mpz_class& p) {
    if (mpz_cmp_ui(p.get_mpz_t(), 2) < 0) return false;
    if (!passes_small_prime_sieve(p)) return false;
    return mpz_probab_prime_p(p.get_mpz_t(), kMillerRabinRounds) > 0;
}

} // namespace

Modulus Modulus::from_prime(const mpz_class& p) {
    if (!is_probable_prime(p)) {
        throw Error(ErrorCode::ValidationError, "modulus is not prime: " + p.get_str());
    }
    Modulus m;
    m.p = p;
    m.byte_width = (mpz_sizeinbase(p.get_mpz_t(), 2) + 7) / 8;
    return m;
}

FieldElement fp_add(const FieldElement& a, const FieldElement& b, const Modulus& m) {
    mpz_class r = a.value + b.value;
    if (r >= m.p) r -= m.p;
    return FieldElement(std::move(r));
}

FieldElement fp_mul(const FieldElement& a, const FieldElement& b, const Modulus& m) {
    mpz_class r;
    mpz_mul(r.get_mpz_t(), a.value.get_mpz_t(), b.value.get_mpz_t());
    mpz_mod(r.get_mpz_t(), r.get_mpz_t(), m.p.get_mpz_t());
    return FieldElement(std::move(r));
}

FieldElement fp_neg(const FieldElement& a, const Modulus& m) {
    if (a.is_zero()) return FieldElement();
    return FieldElement(mpz_class(m.p - a.value));
}

FieldElement fp_sub(const FieldElement& a, const FieldElement& b, const Modulus& m) {
    return fp_add(a, fp_neg(b, m), m);
}

FieldElement fp_inv(const FieldElement& a, const Modulus& m) {
    if (a.is_zero()) throw Error(ErrorCode::ZeroInverse, "0 has no inverse");
    mpz_class r;
    if (mpz_invert(r.get_mpz_t(), a.value.get_mpz_t(), m.p.get_mpz_t()) == 0) {
        throw Error(ErrorCode::ZeroInverse, "element not invertible: " + a.value.get_str());
    }
    return FieldElement(std::move(r));
}

FieldElement fp_reduce(const mpz_class& v, const Modulus& m) {
    mpz_class r;
    mpz_mod(r.get_mpz_t(), v.get_mpz_t(), m.p.get_mpz_t());
    return FieldElement(std::move(r));
}

Modulus derive_modulus(std::uint32_t n) {
    if (n < 2) throw Error(ErrorCode::InvalidN, "n must be >= 2");
    const long double x = static_cast<long double>(n) * std::log2(static_cast<long double>(n));
    const auto b = static_cast<unsigned long>(std::ceil(std::sqrt(x)));
    mpz_class floor_pow2;
    mpz_ui_pow_ui(floor_pow2.get_mpz_t(), 2, b);
    // mpz_nextprime(x) returns the least prime > x, so start one below 2^b.
    mpz_class p;
    mpz_sub_ui(floor_pow2.get_mpz_t(), floor_pow2.get_mpz_t(), 1);
    mpz_nextprime(p.get_mpz_t(), floor_pow2.get_mpz_t());
    while (!is_probable_prime(p)) {
        mpz_nextprime(p.get_mpz_t(), p.get_mpz_t());
    }
    return Modulus::from_prime(p);
}

FieldElement fp_sample(const Modulus& m, SeededRng& rng) {
    const std::size_t width = m.byte_width;
    const std::size_t bits = m.bit_length();
    // Mask surplus bits of the top byte so the rejection rate stays below 1/2.
    const std::uint8_t top_mask =
        static_cast<std::uint8_t>((1u << (((bits - 1) % 8) + 1)) - 1);
    std::vector<std::uint8_t> buf(width);
    for (;;) {
        rng.fill(buf);
        buf[0] &= top_mask;
        mpz_class v = from_bytes_be(buf);
        if (v < m.p) return FieldElement(std::move(v));
    }
}

std::vector<std::uint8_t> to_bytes_be(const FieldElement& x, std::size_t width) {
    std::vector<std::uint8_t> out(width, 0);
    const std::size_t need = (mpz_sizeinbase(x.value.get_mpz_t(), 2) + 7) / 8;
    if (!x.is_zero()) {
        if (need > width) {
            throw Error(ErrorCode::RangeError, "value does not fit in " + std::to_string(width) + " bytes");
        }
        std::size_t count = 0;
        mpz_export(out.data() + (width - need), &count, 1, 1, 1, 0, x.value.get_mpz_t());
    }
    return out;
}

mpz_class from_bytes_be(std::span<const std::uint8_t> bytes) {
    mpz_class v;
    if (!bytes.empty()) {
        mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
    }
    return v;
}

} // namespace kap
