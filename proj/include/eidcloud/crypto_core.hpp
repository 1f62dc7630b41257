#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eidcloud/bytes.hpp"
#include "eidcloud/rng.hpp"

namespace eidcloud {

using ActorId = std::string;

// ---------------------------------------------------------------------------
// Digital signatures: Ed25519 over the SHA-256 digest of the message
// (hash-then-sign). Signing is deterministic; key generation draws 32 bytes.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kSigSecretSize = 32;
inline constexpr std::size_t kSigPublicSize = 32;

struct SigKeyPair {
    Bytes sk;
    Bytes pk;
    ActorId owner;
};

struct Signature {
    Bytes bytes;
    /// First 8 bytes of SHA-256(pk) of the signer; informational only.
    Bytes signer_pk_hint;

    Bytes encode() const;
    static Signature decode(ByteView in);
    bool operator==(const Signature&) const = default;
};

/// With a seed the pair is a pure function of (owner, seed).
SigKeyPair dss_keygen(const ActorId& owner, std::optional<std::uint64_t> seed = std::nullopt);
SigKeyPair dss_keygen(const ActorId& owner, Rng& rng);

/// Re-derives the verification key from a signing key. Throws KeyError.
Bytes dss_public_from_secret(ByteView sk);

/// Throws KeyError on a malformed signing key.
Signature dss_sign(ByteView sk, ByteView message);
/// Never throws; malformed input verifies false.
bool dss_verify(ByteView pk, ByteView message, const Signature& sig);

Bytes key_fingerprint(ByteView pk);

// ---------------------------------------------------------------------------
// Authenticated symmetric encryption (AES-256-GCM).
// ---------------------------------------------------------------------------

inline constexpr std::size_t kSymKeySize = 32;
inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kTagSize = 16;

/// Output: nonce || ciphertext || tag.
Bytes se_encrypt(ByteView key, ByteView plaintext, ByteView aad, Rng& rng);
/// Throws DecryptionError if authentication fails.
Bytes se_decrypt(ByteView key, ByteView sealed, ByteView aad);

// ---------------------------------------------------------------------------
// Public-key encryption (X25519 key agreement + HKDF + AES-GCM) and the
// hybrid convention: a fresh symmetric key wrapped under the PKE, payload
// under the symmetric key.
// ---------------------------------------------------------------------------

struct PkeKeyPair {
    Bytes sk;
    Bytes pk;
    ActorId owner;
};

PkeKeyPair pke_keygen(const ActorId& owner, std::optional<std::uint64_t> seed = std::nullopt);
PkeKeyPair pke_keygen(const ActorId& owner, Rng& rng);

Bytes pke_encrypt(ByteView pk, ByteView message, Rng& rng);
Bytes pke_decrypt(ByteView sk, ByteView ciphertext);

struct HybridCiphertext {
    Bytes wrapped_key;
    Bytes body;

    Bytes encode() const;
    static HybridCiphertext decode(ByteView in);
    bool operator==(const HybridCiphertext&) const = default;
};

/// Throws KeyError on a malformed public key.
HybridCiphertext hybrid_encrypt(ByteView pk, ByteView payload, Rng& rng);
HybridCiphertext hybrid_encrypt(ByteView pk, ByteView payload);
/// Throws DecryptionError for a wrong key or tampered ciphertext.
Bytes hybrid_decrypt(ByteView sk, const HybridCiphertext& c);

/// Magic prefix of encoded hybrid ciphertexts.
inline constexpr std::string_view kHybridMagic = "HYC1";

// ---------------------------------------------------------------------------
// Key store: one text file per actor.
//
//   eidcloud-keystore 1
//   owner <actor id>
//   key <kind> <name> <hex>
//   ...
// Lines starting with '#' are comments. Entry order is preserved.
// ---------------------------------------------------------------------------

struct KeyStoreEntry {
    std::string kind;
    std::string name;
    Bytes material;
    bool operator==(const KeyStoreEntry&) const = default;
};

struct KeyStore {
    ActorId owner;
    std::vector<KeyStoreEntry> entries;

    void add(std::string kind, std::string name, Bytes material);
    /// Throws KeyStoreError if absent.
    const KeyStoreEntry& get(std::string_view kind, std::string_view name) const;
    bool operator==(const KeyStore&) const = default;
};

std::string format_keystore(const KeyStore& ks);
/// Throws KeyStoreError with the offending line number.
KeyStore parse_keystore(std::string_view text);

}  // namespace eidcloud
