#include "kap/attack.hpp"

#include "kap/error.hpp"
#include "kap/protocol.hpp"

#include <algorithm>
#include <bit>

namespace kap {

namespace {

FieldElement fe_from_u64(std::uint64_t v, const Modulus& m) {
    return fp_reduce(mpz_class(static_cast<unsigned long>(v)), m);
}

BitVector bits_from_gray(std::uint64_t gray, std::uint32_t n) {
    BitVector x(n);
    for (std::uint32_t j = 0; j < n; ++j) x[j] = static_cast<std::uint8_t>((gray >> j) & 1);
    return x;
}

} // namespace

std::vector<BitVector> knapsack_solutions(const std::vector<FieldElement>& nu,
                                          const FieldElement& tau_b, const Modulus& m) {
    const auto n = static_cast<std::uint32_t>(nu.size());
    if (n > kExhaustiveBudgetBits) {
        throw Error(ErrorCode::TooLarge, "n = " + std::to_string(n) + " exceeds the exhaustive budget");
    }
    std::vector<BitVector> solutions;
    FieldElement sum; // of the current Gray-code subset
    std::uint64_t gray = 0;
    const std::uint64_t total = 1ull << n;
    for (std::uint64_t i = 0;; ++i) {
        if (sum == tau_b) solutions.push_back(bits_from_gray(gray, n));
        if (i + 1 == total) break;
        const auto flip = static_cast<std::uint32_t>(std::countr_zero(i + 1));
        const std::uint64_t next = (i + 1) ^ ((i + 1) >> 1);
        if ((next >> flip) & 1) {
            sum = fp_add(sum, nu[flip], m);
        } else {
            sum = fp_sub(sum, nu[flip], m);
        }
        gray = next;
    }
    std::sort(solutions.begin(), solutions.end());
    return solutions;
}

LinearSystem eliminate_alpha(const PublicParams& pp, const std::vector<FieldElement>& mu,
                             const GuessSet& guess) {
    const std::uint32_t n = pp.n;
    const std::uint32_t r = guess.r();
    if (mu.size() != n) throw Error(ErrorCode::LengthMismatch, "mu length != n");
    if (r < 2) throw Error(ErrorCode::InvalidGuess, "need at least 2 guessed values");
    if (r > n) throw Error(ErrorCode::InvalidGuess, "more guesses than positions");
    std::vector<bool> seen(n, false);
    for (std::uint32_t v : guess.values) {
        if (v < 1 || v > n) throw Error(ErrorCode::InvalidGuess, "guess value out of range");
        if (seen[v - 1]) throw Error(ErrorCode::InvalidGuess, "duplicate guess value");
        seen[v - 1] = true;
    }

    const FieldElement g1 = fe_from_u64(guess.values[0], pp.m);
    LinearSystem sys;
    sys.rows.reserve(r - 1);
    for (std::uint32_t j = 2; j <= r; ++j) {
        const FieldElement gj = fe_from_u64(guess.values[j - 1], pp.m);
        LinearSystem::Row row;
        row.coeffs.reserve(n);
        for (std::uint32_t i = 1; i <= n; ++i) {
            row.coeffs.push_back(
                fp_sub(fp_mul(gj, pp.at(i, 1), pp.m), fp_mul(g1, pp.at(i, j), pp.m), pp.m));
        }
        row.rhs = fp_sub(fp_mul(gj, mu[0], pp.m), fp_mul(g1, mu[j - 1], pp.m), pp.m);
        sys.rows.push_back(std::move(row));
    }
    return sys;
}

std::vector<BitVector> solve_binary(const LinearSystem& system, const LinearSystem::Row& eq7,
                                    const Modulus& m, std::uint32_t n) {
    std::vector<LinearSystem::Row> rows = system.rows;
    rows.push_back(eq7);
    for (const auto& row : rows) {
        if (row.coeffs.size() != n) throw Error(ErrorCode::LengthMismatch, "row width != n");
    }

    // Reduced row echelon form of the augmented matrix.
    std::vector<std::vector<FieldElement>> aug;
    aug.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<FieldElement> a = row.coeffs;
        a.push_back(row.rhs);
        aug.push_back(std::move(a));
    }

    std::vector<std::uint32_t> pivot_col_of_row;
    std::vector<bool> is_pivot_col(n, false);
    std::size_t pivot_row = 0;
    for (std::uint32_t col = 0; col < n && pivot_row < aug.size(); ++col) {
        std::size_t sel = pivot_row;
        while (sel < aug.size() && aug[sel][col].is_zero()) ++sel;
        if (sel == aug.size()) continue;
        std::swap(aug[pivot_row], aug[sel]);
        const FieldElement inv = fp_inv(aug[pivot_row][col], m);
        for (std::uint32_t c = col; c <= n; ++c) {
            aug[pivot_row][c] = fp_mul(aug[pivot_row][c], inv, m);
        }
        for (std::size_t rr = 0; rr < aug.size(); ++rr) {
            if (rr == pivot_row || aug[rr][col].is_zero()) continue;
            const FieldElement factor = aug[rr][col];
            for (std::uint32_t c = col; c <= n; ++c) {
                aug[rr][c] = fp_sub(aug[rr][c], fp_mul(factor, aug[pivot_row][c], m), m);
            }
        }
        pivot_col_of_row.push_back(col);
        is_pivot_col[col] = true;
        ++pivot_row;
    }
    // Inconsistent system: a zero row with nonzero rhs.
    for (std::size_t rr = pivot_row; rr < aug.size(); ++rr) {
        if (!aug[rr][n].is_zero()) return {};
    }

    std::vector<std::uint32_t> free_cols;
    for (std::uint32_t col = 0; col < n; ++col) {
        if (!is_pivot_col[col]) free_cols.push_back(col);
    }
    const auto f = static_cast<std::uint32_t>(free_cols.size());
    if (f > kExhaustiveBudgetBits) {
        throw Error(ErrorCode::TooLarge, std::to_string(f) + " free variables exceed the exhaustive budget");
    }

    std::vector<BitVector> solutions;
    const std::uint64_t total = 1ull << f;
    BitVector x(n, 0);
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        std::fill(x.begin(), x.end(), 0);
        for (std::uint32_t b = 0; b < f; ++b) {
            x[free_cols[b]] = static_cast<std::uint8_t>((mask >> b) & 1);
        }
        bool binary = true;
        for (std::size_t rr = 0; rr < pivot_col_of_row.size() && binary; ++rr) {
            FieldElement val = aug[rr][n];
            for (std::uint32_t b = 0; b < f; ++b) {
                if (x[free_cols[b]] && !aug[rr][free_cols[b]].is_zero()) {
                    val = fp_sub(val, aug[rr][free_cols[b]], m);
                }
            }
            if (val.is_zero()) {
                x[pivot_col_of_row[rr]] = 0;
            } else if (mpz_cmp_ui(val.value.get_mpz_t(), 1) == 0) {
                x[pivot_col_of_row[rr]] = 1;
            } else {
                binary = false;
            }
        }
        if (binary) solutions.push_back(x);
    }
    std::sort(solutions.begin(), solutions.end());
    return solutions;
}

RecoveredKey recover_alpha_sigma(const PublicParams& pp, const std::vector<FieldElement>& mu,
                                 const BitVector& t) {
    const std::uint32_t n = pp.n;
    if (mu.size() != n || t.size() != n) throw Error(ErrorCode::LengthMismatch, "mu or t length != n");

    // w_j = mu_j - sum_i t_i c_{i,j}  (= sigma(j)*alpha for the true t)
    std::vector<FieldElement> w;
    w.reserve(n);
    for (std::uint32_t j = 1; j <= n; ++j) {
        FieldElement acc = mu[j - 1];
        for (std::uint32_t i = 1; i <= n; ++i) {
            if (t[i - 1]) acc = fp_sub(acc, pp.at(i, j), pp.m);
        }
        if (acc.is_zero()) throw Error(ErrorCode::ZeroW, "w_" + std::to_string(j) + " vanished");
        w.push_back(std::move(acc));
    }

    RecoveredKey result;
    std::uint32_t accepted = 0;
    for (std::uint32_t a = 1; a <= n; ++a) {
        const FieldElement alpha_hat = fp_mul(w[0], fp_inv(fe_from_u64(a, pp.m), pp.m), pp.m);
        const FieldElement alpha_inv = fp_inv(alpha_hat, pp.m);
        Permutation sigma_hat;
        sigma_hat.image.reserve(n);
        bool ok = true;
        for (std::uint32_t j = 0; j < n && ok; ++j) {
            const FieldElement ratio = fp_mul(w[j], alpha_inv, pp.m);
            if (mpz_cmp_ui(ratio.value.get_mpz_t(), 1) < 0 ||
                mpz_cmp_ui(ratio.value.get_mpz_t(), n) > 0) {
                ok = false;
                break;
            }
            sigma_hat.image.push_back(static_cast<std::uint32_t>(ratio.value.get_ui()));
        }
        if (!ok || !sigma_hat.is_valid()) continue;
        if (accepted == 0) {
            result.alpha = alpha_hat;
            result.sigma = std::move(sigma_hat);
        }
        ++accepted;
    }
    if (accepted == 0) throw Error(ErrorCode::NoCandidate, "no alpha candidate fits — bits were wrong");
    result.unique = accepted == 1;
    return result;
}

std::vector<AttackCandidate> full_attack(const AttackTranscript& tr, const GuessSet& guess) {
    const std::uint32_t n = tr.pp.n;
    const std::uint64_t k_max = max_offset(n);
    if (tr.mu.size() != n || tr.nu.size() != n || tr.digests.size() != k_max + 1) {
        throw Error(ErrorCode::LengthMismatch, "transcript dimensions do not match n");
    }
    if (tr.k0 > k_max) throw Error(ErrorCode::RangeError, "k0 exceeds K");

    const LinearSystem sys = eliminate_alpha(tr.pp, tr.mu, guess);
    const LinearSystem::Row eq7{tr.nu, tr.tau_b};
    const std::vector<BitVector> bit_candidates = solve_binary(sys, eq7, tr.pp.m, n);

    std::vector<AttackCandidate> out;
    for (const BitVector& t : bit_candidates) {
        RecoveredKey rec;
        try {
            rec = recover_alpha_sigma(tr.pp, tr.mu, t);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NoCandidate || e.code() == ErrorCode::ZeroW) continue;
            throw;
        }
        const FieldElement g = fp_sub(
            tr.tau_a, fp_mul(fe_from_u64(tr.k0, tr.pp.m), rec.alpha, tr.pp.m), tr.pp.m);
        if (h_eval(g, tr.pp.m, tr.pp.owf) != tr.digests[tr.k0]) continue;
        out.push_back(AttackCandidate{t, rec.alpha, std::move(rec.sigma), g, rec.unique});
    }
    return out;
}

SolutionCountStats solution_count_experiment(std::uint32_t n, std::uint32_t trials, SeededRng& rng) {
    if (n > 20) throw Error(ErrorCode::TooLarge, "n > 20 is past the experiment budget");
    if (n < 2) throw Error(ErrorCode::InvalidN, "n must be >= 2");

    SolutionCountStats stats;
    stats.n = n;
    stats.p = derive_modulus(n).p;
    stats.counts.reserve(trials);

    for (std::uint32_t trial = 0; trial < trials; ++trial) {
        std::array<std::uint8_t, 16> seed{};
        rng.fill(seed);
        const PublicParams pp = gen_public_params(n, seed);
        SeededRng rng_a(seed, "alice");
        SeededRng rng_b(seed, "bob");
        AliceSession alice(pp, gen_alice_secret(pp, rng_a));
        BobSession bob(pp, gen_bob_secret(pp, rng_b));
        const Round2Msg r2 = bob.round2(alice.round1());
        const Round3Msg r3 = alice.round3(r2);
        stats.counts.push_back(knapsack_solutions(r2.nu, r3.tau_b, pp.m).size());
    }

    if (!stats.counts.empty()) {
        stats.min = *std::min_element(stats.counts.begin(), stats.counts.end());
        stats.max = *std::max_element(stats.counts.begin(), stats.counts.end());
        double sum = 0;
        for (auto c : stats.counts) sum += static_cast<double>(c);
        stats.mean = sum / static_cast<double>(stats.counts.size());
    }

    mpz_class pow2n;
    mpz_ui_pow_ui(pow2n.get_mpz_t(), 2, n);
    stats.prediction = mpz_get_d(pow2n.get_mpz_t()) / mpz_get_d(stats.p.get_mpz_t());
    // Exact rational 2^n/p rounded half-up to 3 decimals.
    const mpz_class scaled = (pow2n * 2000 + stats.p) / (2 * stats.p);
    const mpz_class whole = scaled / 1000;
    const auto frac = static_cast<unsigned long>(mpz_class(scaled % 1000).get_ui());
    char frac_str[8];
    std::snprintf(frac_str, sizeof(frac_str), "%03lu", frac);
    stats.prediction_rounded = whole.get_str() + "." + frac_str;
    return stats;
}

std::string solution_counts_csv(const SolutionCountStats& stats) {
    std::string out = "n,p,trial,count,prediction\n";
    for (std::size_t i = 0; i < stats.counts.size(); ++i) {
        out += std::to_string(stats.n) + "," + stats.p.get_str() + "," + std::to_string(i + 1) + "," +
               std::to_string(stats.counts[i]) + "," + stats.prediction_rounded + "\n";
    }
    return out;
}

} // namespace kap
