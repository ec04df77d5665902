#pragma once

#include "kap/field.hpp"
#include "kap/owf.hpp"
#include "kap/params.hpp"
#include "kap/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kap {

// x_1..x_n as one byte each; ordered lexicographically with x_1 most
// significant, which is how sorted solution lists compare.
using BitVector = std::vector<std::uint8_t>;

// Equations over F_p in n binary unknowns.
struct LinearSystem {
    struct Row {
        std::vector<FieldElement> coeffs;
        FieldElement rhs;
    };
    std::vector<Row> rows;
};

// Guessed permutation values sigma'(1),...,sigma'(r) at positions 1..r.
struct GuessSet {
    std::vector<std::uint32_t> values;

    std::uint32_t r() const { return static_cast<std::uint32_t>(values.size()); }
};

// Everything the eavesdropper holds after one run: the public parameters and
// the four messages.
struct AttackTranscript {
    PublicParams pp;
    std::vector<FieldElement> mu;
    std::vector<FieldElement> nu;
    FieldElement tau_a;
    FieldElement tau_b;
    std::vector<Digest> digests;
    std::uint64_t k0 = 0;
};

// Exhaustive enumeration is the honest desk-scale oracle; anything past this
// budget gets a TooLarge instead of a silent multi-hour loop.
inline constexpr std::uint32_t kExhaustiveBudgetBits = 24;

// All x in {0,1}^n with sum x_i*nu_i = tau_B (mod p), lexicographic order.
// The subset-sum walk is Gray-coded (one field add per step). Throws TooLarge
// for n > 24.
std::vector<BitVector> knapsack_solutions(const std::vector<FieldElement>& nu,
                                          const FieldElement& tau_b, const Modulus& m);

// The r-1 equations sum_i x_i*(sigma'(j)c_{i,1} - sigma'(1)c_{i,j}) =
// sigma'(j)mu_1 - sigma'(1)mu_j for j = 2..r. alpha cancels identically when
// the guesses are right. Throws InvalidGuess for r < 2, duplicates, or
// out-of-range values.
LinearSystem eliminate_alpha(const PublicParams& pp, const std::vector<FieldElement>& mu,
                             const GuessSet& guess);

// Stacks the guessed equations with the subset-sum row, Gauss-eliminates over
// F_p, then exhausts {0,1} assignments of the free variables, keeping
// solutions whose pivot variables also land in {0,1}. Lexicographic order.
// Throws TooLarge when the free-variable count exceeds the budget.
std::vector<BitVector> solve_binary(const LinearSystem& system, const LinearSystem::Row& eq7,
                                    const Modulus& m, std::uint32_t n);

struct RecoveredKey {
    FieldElement alpha;
    Permutation sigma;
    bool unique = true; // false when several alpha candidates fit (rare)
};

// Given correct bits t, the residues w_j = mu_j - sum_i t_i c_{i,j} equal
// sigma(j)*alpha; trying each candidate value a for sigma(1) pins alpha and
// the whole permutation. Throws NoCandidate when no a works (t was wrong) and
// ZeroW when some w_j = 0 (impossible for honest transcripts).
RecoveredKey recover_alpha_sigma(const PublicParams& pp, const std::vector<FieldElement>& mu,
                                 const BitVector& t);

struct AttackCandidate {
    BitVector t;
    FieldElement alpha;
    Permutation sigma;
    FieldElement g;
    bool unique_recovery = true;
};

// End-to-end heuristic attack: eliminate alpha under the guesses, solve for
// binary candidates, recover (alpha, sigma) per candidate, and keep only
// candidates whose g = tau_A - k0*alpha reproduces the published digest.
// Empty output (almost always) means the guesses were wrong.
std::vector<AttackCandidate> full_attack(const AttackTranscript& tr, const GuessSet& guess);

struct SolutionCountStats {
    std::uint32_t n = 0;
    mpz_class p;
    std::vector<std::uint64_t> counts; // one per trial
    double mean = 0;
    std::uint64_t min = 0;
    std::uint64_t max = 0;
    double prediction = 0;           // 2^n / p
    std::string prediction_rounded;  // exact rational, 3 decimals
};

// Counts subset-sum solutions over honest transcripts against the 2^n/p
// heuristic. Throws TooLarge for n > 20.
SolutionCountStats solution_count_experiment(std::uint32_t n, std::uint32_t trials, SeededRng& rng);

// CSV with columns n,p,trial,count,prediction.
std::string solution_counts_csv(const SolutionCountStats& stats);

} // namespace kap
