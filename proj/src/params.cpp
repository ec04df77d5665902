#include "kap/params.hpp"

#include "kap/error.hpp"

#include <algorithm>
#include <numeric>

namespace kap {

bool Permutation::is_valid() const {
    const std::uint32_t n = size();
    std::vector<bool> seen(n, false);
    for (std::uint32_t v : image) {
        if (v < 1 || v > n || seen[v - 1]) return false;
        seen[v - 1] = true;
    }
    return true;
}

PublicParams gen_public_params(std::uint32_t n, std::span<const std::uint8_t> seed) {
    if (n < 2) throw Error(ErrorCode::InvalidN, "n must be >= 2");
    PublicParams pp;
    pp.n = n;
    pp.m = derive_modulus(n);
    pp.owf = OwfId::sha256();
    pp.seed.assign(seed.begin(), seed.end());
    pp.rng_tag = std::string(kRngTag);
    SeededRng rng(seed, "C");
    pp.c.reserve(static_cast<std::size_t>(n) * n);
    for (std::size_t k = 0; k < static_cast<std::size_t>(n) * n; ++k) {
        pp.c.push_back(fp_sample(pp.m, rng));
    }
    return pp;
}

Permutation gen_permutation(std::uint32_t n, SeededRng& rng) {
    Permutation perm;
    perm.image.resize(n);
    std::iota(perm.image.begin(), perm.image.end(), 1u);
    for (std::uint32_t i = n; i > 1; --i) {
        const auto j = static_cast<std::uint32_t>(rng.uniform_below(i));
        std::swap(perm.image[i - 1], perm.image[j]);
    }
    return perm;
}

namespace {

FieldElement sample_nonzero(const Modulus& m, SeededRng& rng) {
    for (;;) {
        FieldElement x = fp_sample(m, rng);
        if (!x.is_zero()) return x;
    }
}

std::vector<std::uint8_t> sample_bits(std::uint32_t n, SeededRng& rng) {
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits) b = rng.next_byte() & 1;
    return bits;
}

} // namespace

AliceSecret gen_alice_secret(const PublicParams& pp, SeededRng& rng) {
    AliceSecret sec;
    sec.alpha = sample_nonzero(pp.m, rng);
    sec.t = sample_bits(pp.n, rng);
    sec.sigma = gen_permutation(pp.n, rng);
    return sec;
}

BobSecret gen_bob_secret(const PublicParams& pp, SeededRng& rng) {
    BobSecret sec;
    sec.beta = sample_nonzero(pp.m, rng);
    sec.s = sample_bits(pp.n, rng);
    sec.rho = gen_permutation(pp.n, rng);
    return sec;
}

} // namespace kap
