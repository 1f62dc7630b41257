#include "eidcloud/hash.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <memory>

#include "eidcloud/errors.hpp"

namespace eidcloud {

Bytes sha256(std::initializer_list<ByteView> parts)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw Error("sha256 init failed");
    for (auto p : parts)
        if (EVP_DigestUpdate(ctx.get(), p.data(), p.size()) != 1)
            throw Error("sha256 update failed");
    Bytes out(kDigestSize);
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != kDigestSize)
        throw Error("sha256 final failed");
    return out;
}

Bytes sha256(ByteView data) { return sha256({data}); }

Bytes hmac_sha256(ByteView key, ByteView data)
{
    Bytes out(kDigestSize);
    unsigned int len = 0;
    if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
              out.data(), &len) ||
        len != kDigestSize)
        throw Error("hmac-sha256 failed");
    return out;
}

std::string digest_hex(ByteView data) { return to_hex(sha256(data)); }

}  // namespace eidcloud
