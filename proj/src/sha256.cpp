#include "kap/sha256.hpp"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

namespace kap {

namespace {

struct CtxDeleter {
    void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

} // namespace

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
    thread_local std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx{EVP_MD_CTX_new()};
    std::array<std::uint8_t, 32> out{};
    unsigned int len = 0;
    if (EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
        throw std::runtime_error("sha256: EVP digest failed");
    }
    return out;
}

} // namespace kap
