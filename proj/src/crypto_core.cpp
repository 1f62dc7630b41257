#include "eidcloud/crypto_core.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <memory>
#include <sstream>

#include "eidcloud/errors.hpp"
#include "eidcloud/hash.hpp"

namespace eidcloud {

namespace {

using PkeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

PkeyPtr raw_private(int type, ByteView sk)
{
    return PkeyPtr(EVP_PKEY_new_raw_private_key(type, nullptr, sk.data(), sk.size()),
                   &EVP_PKEY_free);
}

PkeyPtr raw_public(int type, ByteView pk)
{
    return PkeyPtr(EVP_PKEY_new_raw_public_key(type, nullptr, pk.data(), pk.size()),
                   &EVP_PKEY_free);
}

Bytes raw_public_of(EVP_PKEY* key)
{
    std::size_t len = 0;
    if (EVP_PKEY_get_raw_public_key(key, nullptr, &len) != 1) throw KeyError("no public key");
    Bytes out(len);
    if (EVP_PKEY_get_raw_public_key(key, out.data(), &len) != 1) throw KeyError("no public key");
    return out;
}

Bytes seeded_secret(std::string_view domain, const ActorId& owner, std::uint64_t seed)
{
    return sha256({to_bytes(domain), ByteWriter().str(owner).u64(seed).bytes()});
}

Bytes sign_digest(ByteView message) { return sha256({to_bytes("eidcloud/dss"), message}); }

Bytes x25519(ByteView sk, ByteView pk)
{
    if (sk.size() != 32) throw KeyError("x25519 secret key must be 32 bytes");
    if (pk.size() != 32) throw KeyError("x25519 public key must be 32 bytes");
    auto priv = raw_private(EVP_PKEY_X25519, sk);
    auto pub = raw_public(EVP_PKEY_X25519, pk);
    if (!priv || !pub) throw KeyError("malformed x25519 key");
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new(priv.get(), nullptr), &EVP_PKEY_CTX_free);
    std::size_t len = 32;
    Bytes shared(32);
    if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
        EVP_PKEY_derive_set_peer(ctx.get(), pub.get()) != 1 ||
        EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1 || len != 32)
        throw KeyError("x25519 key agreement failed");
    return shared;
}

Bytes hkdf(ByteView ikm, ByteView info)
{
    PkeyCtxPtr ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr), &EVP_PKEY_CTX_free);
    Bytes out(kSymKeySize);
    std::size_t len = out.size();
    static const auto salt = to_bytes("eidcloud/pke/hkdf");
    if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
        EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) != 1 ||
        EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt.data(), static_cast<int>(salt.size())) != 1 ||
        EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())) != 1 ||
        EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), info.data(), static_cast<int>(info.size())) != 1 ||
        EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1)
        throw Error("hkdf failed");
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Signatures

Bytes Signature::encode() const { return ByteWriter().blob(bytes).blob(signer_pk_hint).take(); }

Signature Signature::decode(ByteView in)
{
    ByteReader r(in);
    Signature s;
    s.bytes = r.blob();
    s.signer_pk_hint = r.blob();
    r.expect_done();
    return s;
}

Bytes key_fingerprint(ByteView pk)
{
    auto d = sha256(pk);
    return Bytes(d.begin(), d.begin() + 8);
}

Bytes dss_public_from_secret(ByteView sk)
{
    if (sk.size() != kSigSecretSize) throw KeyError("signing key must be 32 bytes");
    auto key = raw_private(EVP_PKEY_ED25519, sk);
    if (!key) throw KeyError("malformed signing key");
    return raw_public_of(key.get());
}

SigKeyPair dss_keygen(const ActorId& owner, std::optional<std::uint64_t> seed)
{
    if (seed) {
        auto sk = seeded_secret("eidcloud/dss/keygen", owner, *seed);
        auto pk = dss_public_from_secret(sk);
        return {std::move(sk), std::move(pk), owner};
    }
    Rng rng;
    return dss_keygen(owner, rng);
}

SigKeyPair dss_keygen(const ActorId& owner, Rng& rng)
{
    if (owner.empty()) throw KeyError("key owner must be non-empty");
    auto sk = rng.bytes(kSigSecretSize);
    auto pk = dss_public_from_secret(sk);
    return {std::move(sk), std::move(pk), owner};
}

Signature dss_sign(ByteView sk, ByteView message)
{
    if (sk.size() != kSigSecretSize) throw KeyError("signing key must be 32 bytes");
    auto key = raw_private(EVP_PKEY_ED25519, sk);
    if (!key) throw KeyError("malformed signing key");
    MdCtxPtr ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    auto digest = sign_digest(message);
    Bytes sig(64);
    std::size_t len = sig.size();
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
        EVP_DigestSign(ctx.get(), sig.data(), &len, digest.data(), digest.size()) != 1)
        throw SigningError("ed25519 signing failed");
    sig.resize(len);
    return Signature{std::move(sig), key_fingerprint(raw_public_of(key.get()))};
}

bool dss_verify(ByteView pk, ByteView message, const Signature& sig)
{
    if (pk.size() != kSigPublicSize || sig.bytes.size() != 64) return false;
    auto key = raw_public(EVP_PKEY_ED25519, pk);
    if (!key) return false;
    MdCtxPtr ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    auto digest = sign_digest(message);
    return ctx && EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) == 1 &&
           EVP_DigestVerify(ctx.get(), sig.bytes.data(), sig.bytes.size(), digest.data(),
                            digest.size()) == 1;
}

// ---------------------------------------------------------------------------
// Symmetric layer

Bytes se_encrypt(ByteView key, ByteView plaintext, ByteView aad, Rng& rng)
{
    if (key.size() != kSymKeySize) throw KeyError("symmetric key must be 32 bytes");
    auto nonce = rng.bytes(kNonceSize);
    CipherCtxPtr ctx(EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free);
    Bytes out(kNonceSize + plaintext.size() + kTagSize);
    std::copy(nonce.begin(), nonce.end(), out.begin());
    int len = 0;
    if (!ctx ||
        EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1 ||
        (!aad.empty() &&
         EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) !=
             1))
        throw Error("aes-gcm init failed");
    auto* ct = out.data() + kNonceSize;
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.get(), ct, &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1)
        throw Error("aes-gcm encrypt failed");
    if (EVP_EncryptFinal_ex(ctx.get(), ct + plaintext.size(), &len) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, static_cast<int>(kTagSize),
                            ct + plaintext.size()) != 1)
        throw Error("aes-gcm finalize failed");
    return out;
}

Bytes se_decrypt(ByteView key, ByteView sealed, ByteView aad)
{
    if (key.size() != kSymKeySize) throw KeyError("symmetric key must be 32 bytes");
    if (sealed.size() < kNonceSize + kTagSize) throw DecryptionError("ciphertext too short");
    const auto ct_len = sealed.size() - kNonceSize - kTagSize;
    CipherCtxPtr ctx(EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free);
    Bytes out(ct_len);
    int len = 0;
    if (!ctx ||
        EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), sealed.data()) !=
            1 ||
        (!aad.empty() &&
         EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) !=
             1))
        throw Error("aes-gcm init failed");
    if (ct_len > 0 && EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data() + kNonceSize,
                                        static_cast<int>(ct_len)) != 1)
        throw DecryptionError("aes-gcm decrypt failed");
    Bytes tag(sealed.end() - kTagSize, sealed.end());
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, static_cast<int>(kTagSize),
                            tag.data()) != 1 ||
        EVP_DecryptFinal_ex(ctx.get(), out.data() + ct_len, &len) != 1)
        throw DecryptionError("authentication tag mismatch");
    return out;
}

// ---------------------------------------------------------------------------
// PKE

PkeKeyPair pke_keygen(const ActorId& owner, std::optional<std::uint64_t> seed)
{
    if (seed) {
        Rng rng(ByteReader(seeded_secret("eidcloud/pke/keygen", owner, *seed)).u64());
        return pke_keygen(owner, rng);
    }
    Rng rng;
    return pke_keygen(owner, rng);
}

PkeKeyPair pke_keygen(const ActorId& owner, Rng& rng)
{
    if (owner.empty()) throw KeyError("key owner must be non-empty");
    auto sk = rng.bytes(32);
    auto key = raw_private(EVP_PKEY_X25519, sk);
    if (!key) throw KeyError("x25519 keygen failed");
    return {std::move(sk), raw_public_of(key.get()), owner};
}

Bytes pke_encrypt(ByteView pk, ByteView message, Rng& rng)
{
    if (pk.size() != 32) throw KeyError("x25519 public key must be 32 bytes");
    auto eph = pke_keygen("ephemeral", rng);
    auto shared = x25519(eph.sk, pk);
    auto kek = hkdf(shared, concat({eph.pk, pk}));
    auto sealed = se_encrypt(kek, message, to_bytes("eidcloud/pke"), rng);
    return concat({eph.pk, sealed});
}

Bytes pke_decrypt(ByteView sk, ByteView ciphertext)
{
    if (ciphertext.size() < 32) throw DecryptionError("pke ciphertext too short");
    auto epk = ciphertext.first(32);
    Bytes shared;
    Bytes own_pk;
    try {
        shared = x25519(sk, epk);
        auto key = raw_private(EVP_PKEY_X25519, sk);
        own_pk = raw_public_of(key.get());
    } catch (const KeyError& e) {
        throw DecryptionError(std::string("pke: ") + e.what());
    }
    auto kek = hkdf(shared, concat({epk, own_pk}));
    return se_decrypt(kek, ciphertext.subspan(32), to_bytes("eidcloud/pke"));
}

// ---------------------------------------------------------------------------
// Hybrid

Bytes HybridCiphertext::encode() const
{
    return ByteWriter().raw(to_bytes(kHybridMagic)).blob(wrapped_key).blob(body).take();
}

HybridCiphertext HybridCiphertext::decode(ByteView in)
{
    ByteReader r(in);
    if (r.raw(kHybridMagic.size()) != to_bytes(kHybridMagic))
        throw DecodeError("not a hybrid ciphertext");
    HybridCiphertext c;
    c.wrapped_key = r.blob();
    c.body = r.blob();
    r.expect_done();
    return c;
}

HybridCiphertext hybrid_encrypt(ByteView pk, ByteView payload, Rng& rng)
{
    auto k = rng.bytes(kSymKeySize);
    HybridCiphertext c;
    c.wrapped_key = pke_encrypt(pk, k, rng);
    c.body = se_encrypt(k, payload, to_bytes("eidcloud/hybrid"), rng);
    return c;
}

HybridCiphertext hybrid_encrypt(ByteView pk, ByteView payload)
{
    Rng rng;
    return hybrid_encrypt(pk, payload, rng);
}

Bytes hybrid_decrypt(ByteView sk, const HybridCiphertext& c)
{
    auto k = pke_decrypt(sk, c.wrapped_key);
    if (k.size() != kSymKeySize) throw DecryptionError("wrapped key has wrong size");
    return se_decrypt(k, c.body, to_bytes("eidcloud/hybrid"));
}

// ---------------------------------------------------------------------------
// Key store

void KeyStore::add(std::string kind, std::string name, Bytes material)
{
    entries.push_back({std::move(kind), std::move(name), std::move(material)});
}

const KeyStoreEntry& KeyStore::get(std::string_view kind, std::string_view name) const
{
    for (const auto& e : entries)
        if (e.kind == kind && e.name == name) return e;
    throw KeyStoreError("key store of " + owner + " has no " + std::string(kind) + " '" +
                        std::string(name) + "'");
}

std::string format_keystore(const KeyStore& ks)
{
    std::ostringstream out;
    out << "eidcloud-keystore 1\n";
    out << "owner " << ks.owner << "\n";
    for (const auto& e : ks.entries)
        out << "key " << e.kind << " " << e.name << " " << to_hex(e.material) << "\n";
    return out.str();
}

KeyStore parse_keystore(std::string_view text)
{
    KeyStore ks;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    bool header = false;
    auto fail = [&](const std::string& what) {
        throw KeyStoreError("key store line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string word;
        fields >> word;
        if (!header) {
            std::string version;
            fields >> version;
            if (word != "eidcloud-keystore" || version != "1") fail("unsupported header");
            header = true;
        } else if (word == "owner") {
            fields >> ks.owner;
        } else if (word == "key") {
            std::string kind, name, hex;
            if (!(fields >> kind >> name >> hex)) fail("expected 'key <kind> <name> <hex>'");
            try {
                ks.add(kind, name, from_hex(hex));
            } catch (const DecodeError& e) {
                fail(e.what());
            }
        } else {
            fail("unknown record '" + word + "'");
        }
    }
    if (!header) throw KeyStoreError("key store is empty");
    if (ks.owner.empty()) throw KeyStoreError("key store has no owner");
    return ks;
}

}  // namespace eidcloud
