#include "kap/owf.hpp"

#include "kap/error.hpp"
#include "kap/rng.hpp"
#include "kap/sha256.hpp"

#include <atomic>

namespace kap {

namespace {

std::atomic<std::uint64_t> g_eval_count{0};

constexpr std::string_view kOwfDomainTag = "KAP-OWF-v1";

} // namespace

OwfId resolve_owf(const std::string& name) {
    if (name == "sha256") return OwfId::sha256();
    throw Error(ErrorCode::UnknownOwf, "no OWF registered under \"" + name + "\"");
}

Digest h_eval(const FieldElement& x, const Modulus& m, const OwfId& id) {
    if (id != OwfId::sha256()) {
        throw Error(ErrorCode::UnknownOwf, "no OWF registered under \"" + id.name + "\"");
    }
    const std::size_t width = m.byte_width;
    std::vector<std::uint8_t> preimage;
    preimage.reserve(kOwfDomainTag.size() + 2 + width);
    preimage.insert(preimage.end(), kOwfDomainTag.begin(), kOwfDomainTag.end());
    preimage.push_back(static_cast<std::uint8_t>((width >> 8) & 0xff));
    preimage.push_back(static_cast<std::uint8_t>(width & 0xff));
    const auto encoded = to_bytes_be(x, width);
    preimage.insert(preimage.end(), encoded.begin(), encoded.end());

    g_eval_count.fetch_add(1, std::memory_order_relaxed);
    return sha256(preimage);
}

std::uint64_t owf_eval_count() {
    return g_eval_count.load(std::memory_order_relaxed);
}

void owf_reset_eval_count() {
    g_eval_count.store(0, std::memory_order_relaxed);
}

std::string digest_hex(const Digest& d) {
    return to_hex(d);
}

} // namespace kap
