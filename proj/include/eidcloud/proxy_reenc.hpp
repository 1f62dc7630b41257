#pragma once

// Multi-use, unidirectional, identity-based proxy re-encryption used as a key
// encapsulation layer: the identity-based part wraps a fresh GT element from
// which the AES-GCM key of the body is derived. Re-encryption only touches the
// encapsulation chain; the symmetric body is carried unchanged.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eidcloud/bytes.hpp"
#include "eidcloud/rng.hpp"

namespace eidcloud {

enum class ReBackendKind { pairing, trusted_dealer };

std::string_view to_string(ReBackendKind kind);
/// Accepts "pairing" and "test-double" (alias "trusted-dealer"). Throws ParameterError.
ReBackendKind parse_backend_kind(std::string_view name);

class ReBackend;

inline constexpr int kDefaultMaxLevels = 4;
inline constexpr int kDefaultSecurityLevel = 80;

struct ReParams {
    std::shared_ptr<const ReBackend> backend;
    int max_levels = kDefaultMaxLevels;

    /// False for the trusted-dealer test double.
    bool sound() const;
    ReBackendKind kind() const;
    std::string scheme_tag() const;
    int security_level() const;

    /// Public parameters (scheme tag, security level, max_levels, master public value).
    Bytes encode() const;
    static ReParams decode(ByteView in);
};

struct ReMasterKey {
    Bytes msk;
};

struct ReIdentityKey {
    std::string id;
    Bytes sk;
};

struct ReEncKey {
    std::string from_id;
    std::string to_id;
    Bytes rk;

    Bytes encode() const;
    static ReEncKey decode(ByteView in);
};

inline constexpr std::string_view kReMagic = "REC1";

struct ReCiphertext {
    std::string scheme;
    std::string target_id;
    std::uint32_t level = 0;
    Bytes body;

    /// Versioned header (magic, scheme tag, target id, level) followed by the body.
    Bytes encode() const;
    /// Throws DecodeError.
    static ReCiphertext decode(ByteView in);
    bool operator==(const ReCiphertext&) const = default;
};

/// Throws ParameterError for max_levels < 1 or an unsupported security level.
std::pair<ReParams, ReMasterKey> re_setup(int security_level, int max_levels,
                                          std::optional<std::uint64_t> seed = std::nullopt,
                                          ReBackendKind kind = ReBackendKind::pairing);

/// Throws ParameterError for an empty identity.
ReIdentityKey re_keygen(const ReParams& params, const ReMasterKey& msk, const std::string& id);

ReCiphertext re_encrypt(const ReParams& params, const std::string& id, ByteView m, Rng& rng);

/// Throws KeyError when `sk` is not the key of `id1`.
ReEncKey re_rkgen(const ReParams& params, const ReIdentityKey& sk, const std::string& id1,
                  const std::string& id2, Rng& rng);

/// Needs only public parameters, the ciphertext and the re-encryption key.
/// Throws RoutingError if c.target_id != rk.from_id, DepthError if c.level == max_levels.
ReCiphertext re_reencrypt(const ReParams& params, const ReCiphertext& c, const ReEncKey& rk);

/// Throws DecryptionError on identity mismatch, tampering or a wrong key.
Bytes re_decrypt(const ReParams& params, const ReIdentityKey& sk, const ReCiphertext& c);

// Batch kernels over independent ciphertexts (e.g. the blocks of an Identity
// Link). The parallel versions use OpenMP; the *_serial versions are the
// reference implementations and produce identical output for the same inputs.
// Each item i of a batch encryption draws from its own stream split off `rng`
// in index order, so results do not depend on scheduling.

std::vector<ReCiphertext> re_encrypt_batch(const ReParams& params, const std::string& id,
                                           const std::vector<Bytes>& messages, Rng& rng);
std::vector<ReCiphertext> re_encrypt_batch_serial(const ReParams& params, const std::string& id,
                                                  const std::vector<Bytes>& messages, Rng& rng);

std::vector<ReCiphertext> re_reencrypt_batch(const ReParams& params,
                                             const std::vector<ReCiphertext>& cs,
                                             const ReEncKey& rk);
std::vector<ReCiphertext> re_reencrypt_batch_serial(const ReParams& params,
                                                    const std::vector<ReCiphertext>& cs,
                                                    const ReEncKey& rk);

std::vector<Bytes> re_decrypt_batch(const ReParams& params, const ReIdentityKey& sk,
                                    const std::vector<ReCiphertext>& cs);
std::vector<Bytes> re_decrypt_batch_serial(const ReParams& params, const ReIdentityKey& sk,
                                           const std::vector<ReCiphertext>& cs);

/// Receives every intermediate value computed while transforming a ciphertext.
/// Process-wide; intended for instrumentation in tests. Pass nullptr to clear.
using ReTransformObserver = std::function<void(ByteView)>;
void re_set_transform_observer(ReTransformObserver observer);

/// Backend seam. Implementations see only ciphertext bodies; header routing and
/// depth accounting are enforced by the free functions above.
class ReBackend {
public:
    virtual ~ReBackend() = default;

    virtual ReBackendKind kind() const = 0;
    virtual std::string scheme_tag() const = 0;
    virtual bool sound() const = 0;
    virtual int security_level() const = 0;
    virtual Bytes public_params() const = 0;

    virtual Bytes keygen(ByteView msk, const std::string& id) const = 0;
    virtual bool key_matches(ByteView sk, const std::string& id) const = 0;
    virtual Bytes encrypt(const std::string& id, ByteView m, Rng& rng) const = 0;
    virtual Bytes rkgen(ByteView sk, const std::string& id1, const std::string& id2,
                        Rng& rng) const = 0;
    virtual Bytes reencrypt(ByteView body, std::uint32_t level, const ReEncKey& rk) const = 0;
    virtual Bytes decrypt(ByteView sk, const std::string& id, std::uint32_t level,
                          ByteView body) const = 0;
};

}  // namespace eidcloud
