#pragma once

#include "kap/field.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace kap {

// 256-bit digest, totally ordered by lexicographic byte comparison (the
// std::array ordering), which is what the sorted-list match relies on.
using Digest = std::array<std::uint8_t, 32>;

// One registered instantiation: "sha256", m = 256. The preimage layout in
// h_eval is normative so independent implementations interoperate.
struct OwfId {
    std::string name;
    unsigned m_bits = 0;

    static OwfId sha256() { return OwfId{"sha256", 256}; }

    friend bool operator==(const OwfId&, const OwfId&) = default;
};

// Throws UnknownOwf for unregistered names.
OwfId resolve_owf(const std::string& name);

// h(x) = SHA-256("KAP-OWF-v1" || byte_width(p) as 2 bytes BE || x in
// byte_width bytes BE). x must be canonical under m. Bumps the evaluation
// counter below.
Digest h_eval(const FieldElement& x, const Modulus& m, const OwfId& id);

// Evaluation counter, for hash-budget assertions and the bench command.
std::uint64_t owf_eval_count();
void owf_reset_eval_count();

std::string digest_hex(const Digest& d);

} // namespace kap
