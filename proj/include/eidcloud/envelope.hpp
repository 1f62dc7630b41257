#pragma once

// Protocol messages exchanged over the bus. Each field carries a tag saying
// what an observer can read from it.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eidcloud/bytes.hpp"
#include "eidcloud/crypto_core.hpp"

namespace eidcloud {

enum class FieldTag { plaintext, ciphertext, signature };

std::string_view to_string(FieldTag t);
/// Throws DecodeError.
FieldTag parse_field_tag(std::string_view s);

struct Field {
    std::string name;
    FieldTag tag = FieldTag::plaintext;
    Bytes value;
    bool operator==(const Field&) const = default;
};

inline constexpr std::string_view kEnvelopeSigField = "sig";

struct Envelope {
    std::string msg_type;
    ActorId sender;
    ActorId receiver;
    std::string correlation;
    std::vector<Field> fields;

    Envelope& add(std::string name, FieldTag tag, Bytes value);
    Envelope& plain(std::string name, std::string_view value);
    bool has(std::string_view name) const;
    /// Throws DecodeError if absent.
    const Field& field(std::string_view name) const;
    Field& field(std::string_view name);
    const Bytes& value(std::string_view name) const { return field(name).value; }
    std::string text(std::string_view name) const;

    /// Bytes covered by the envelope signature: header and every field except "sig".
    Bytes signing_bytes() const;
    Bytes encode() const;
    static Envelope decode(ByteView in);
    bool operator==(const Envelope&) const = default;
};

/// Appends the "sig" field. Replaces an existing one.
void sign_envelope(Envelope& env, const SigKeyPair& signer);
void sign_envelope(Envelope& env, ByteView sk);
/// Checks the signer hint against `pk` before the signature itself. Never throws.
bool verify_envelope(const Envelope& env, ByteView pk);

/// Tag accuracy: ciphertext fields decode as REC1 or HYC1, signature fields as a
/// DSS signature or a redactable signature. Returns the first offending field.
std::optional<std::string> validate_envelope(const Envelope& env);

}  // namespace eidcloud
