#pragma once

// Redactable signatures over linear block messages. Each block i is bound by
// a salted commitment SHA-256(salt || u32 i || content); the commitments are
// the leaves of a Merkle tree whose root is signed with the DSS. Redacting a
// block drops its content and salt and publishes its commitment instead.

#include <cstdint>
#include <optional>
#include <vector>

#include "eidcloud/bytes.hpp"
#include "eidcloud/crypto_core.hpp"
#include "eidcloud/rng.hpp"

namespace eidcloud {

inline constexpr std::size_t kRsSaltSize = 32;

struct BlockMessage {
    /// Position i holds block i + 1; std::nullopt is a redacted block.
    std::vector<std::optional<Bytes>> blocks;

    static BlockMessage from(std::vector<Bytes> contents);

    std::size_t size() const { return blocks.size(); }
    /// 1-based.
    bool redacted(std::size_t index) const;
    /// 1-based. Throws RedactionError if the block is redacted or out of range.
    const Bytes& content(std::size_t index) const;

    Bytes encode() const;
    static BlockMessage decode(ByteView in);
    bool operator==(const BlockMessage&) const = default;
};

struct RedactableSignature {
    Signature root_sig;
    /// One slot per block; exactly one of salts[i], commitments[i] is set.
    std::vector<std::optional<Bytes>> salts;
    std::vector<std::optional<Bytes>> commitments;
    std::uint32_t block_count = 0;

    Bytes encode() const;
    static RedactableSignature decode(ByteView in);
    bool operator==(const RedactableSignature&) const = default;
};

/// Canonical record of a message together with its signature.
Bytes encode_signed(const BlockMessage& m, const RedactableSignature& sig);
std::pair<BlockMessage, RedactableSignature> decode_signed(ByteView in);

SigKeyPair rs_keygen(const ActorId& owner, std::optional<std::uint64_t> seed = std::nullopt);

/// Throws RedactionError for an empty message or one containing redacted blocks.
RedactableSignature rs_sign(ByteView sk, const BlockMessage& m, Rng& rng);
RedactableSignature rs_sign(ByteView sk, const BlockMessage& m);

/// Never throws.
bool rs_verify(ByteView pk, const BlockMessage& m, const RedactableSignature& sig);

/// `mod_set` holds the 1-based indices of the visible blocks to remove. Throws RedactionError for an
/// index out of range or already redacted, or if the input does not verify.
std::pair<BlockMessage, RedactableSignature> rs_redact(const BlockMessage& m, ByteView pk,
                                                       const RedactableSignature& sig,
                                                       const std::vector<std::size_t>& mod_set);

/// Salted block commitment.
Bytes rs_commitment(ByteView salt, std::uint32_t index, ByteView content);

/// Merkle root over leaf commitments (padded to a power of two).
Bytes rs_merkle_root(const std::vector<Bytes>& commitments);

// Leaf commitment kernels. The parallel version uses OpenMP; the serial one is
// the reference. Slots with no content take the supplied commitment as is.
std::vector<Bytes> rs_leaf_commitments(const BlockMessage& m, const RedactableSignature& sig);
std::vector<Bytes> rs_leaf_commitments_serial(const BlockMessage& m,
                                              const RedactableSignature& sig);

}  // namespace eidcloud
