#include "eidcloud/envelope.hpp"

#include "eidcloud/errors.hpp"
#include "eidcloud/proxy_reenc.hpp"
#include "eidcloud/redactable_sig.hpp"

namespace eidcloud {

namespace {

constexpr std::string_view kMagic = "ENV1";
constexpr std::string_view kSigningDomain = "eidcloud/envelope/v1";

void write_header(ByteWriter& w, const Envelope& e)
{
    w.str(e.msg_type).str(e.sender).str(e.receiver).str(e.correlation);
}

void write_field(ByteWriter& w, const Field& f)
{
    w.str(f.name).u8(static_cast<std::uint8_t>(f.tag)).blob(f.value);
}

bool decodes_as_ciphertext(ByteView v)
{
    try {
        ReCiphertext::decode(v);
        return true;
    } catch (const Error&) {
    }
    try {
        HybridCiphertext::decode(v);
        return true;
    } catch (const Error&) {
    }
    return false;
}

bool decodes_as_signature(ByteView v)
{
    try {
        Signature::decode(v);
        return true;
    } catch (const Error&) {
    }
    try {
        RedactableSignature::decode(v);
        return true;
    } catch (const Error&) {
    }
    return false;
}

}  // namespace

std::string_view to_string(FieldTag t)
{
    switch (t) {
    case FieldTag::plaintext: return "plaintext";
    case FieldTag::ciphertext: return "ciphertext";
    case FieldTag::signature: return "signature";
    }
    return "?";
}

FieldTag parse_field_tag(std::string_view s)
{
    if (s == "plaintext") return FieldTag::plaintext;
    if (s == "ciphertext") return FieldTag::ciphertext;
    if (s == "signature") return FieldTag::signature;
    throw DecodeError("unknown field tag \"" + std::string(s) + "\"");
}

Envelope& Envelope::add(std::string name, FieldTag tag, Bytes value)
{
    fields.push_back({std::move(name), tag, std::move(value)});
    return *this;
}

Envelope& Envelope::plain(std::string name, std::string_view value)
{
    return add(std::move(name), FieldTag::plaintext, to_bytes(value));
}

bool Envelope::has(std::string_view name) const
{
    for (const auto& f : fields)
        if (f.name == name) return true;
    return false;
}

const Field& Envelope::field(std::string_view name) const
{
    for (const auto& f : fields)
        if (f.name == name) return f;
    throw DecodeError(msg_type + ": missing field \"" + std::string(name) + "\"");
}

Field& Envelope::field(std::string_view name)
{
    for (auto& f : fields)
        if (f.name == name) return f;
    throw DecodeError(msg_type + ": missing field \"" + std::string(name) + "\"");
}

std::string Envelope::text(std::string_view name) const { return to_string(value(name)); }

Bytes Envelope::signing_bytes() const
{
    ByteWriter w;
    w.str(kSigningDomain);
    write_header(w, *this);
    std::uint32_t n = 0;
    for (const auto& f : fields)
        if (f.name != kEnvelopeSigField) ++n;
    w.u32(n);
    for (const auto& f : fields)
        if (f.name != kEnvelopeSigField) write_field(w, f);
    return w.take();
}

Bytes Envelope::encode() const
{
    ByteWriter w;
    w.raw(to_bytes(kMagic));
    write_header(w, *this);
    w.u32(static_cast<std::uint32_t>(fields.size()));
    for (const auto& f : fields) write_field(w, f);
    return w.take();
}

Envelope Envelope::decode(ByteView in)
{
    ByteReader r(in);
    if (r.raw(kMagic.size()) != to_bytes(kMagic)) throw DecodeError("envelope: bad magic");
    Envelope e;
    e.msg_type = r.str();
    e.sender = r.str();
    e.receiver = r.str();
    e.correlation = r.str();
    const auto n = r.u32();
    if (n > r.remaining()) throw DecodeError("envelope: field count exceeds input");
    for (std::uint32_t i = 0; i < n; ++i) {
        Field f;
        f.name = r.str();
        const auto tag = r.u8();
        if (tag > 2) throw DecodeError("envelope: bad field tag");
        f.tag = static_cast<FieldTag>(tag);
        f.value = r.blob();
        e.fields.push_back(std::move(f));
    }
    r.expect_done();
    return e;
}

void sign_envelope(Envelope& env, ByteView sk)
{
    std::erase_if(env.fields, [](const Field& f) { return f.name == kEnvelopeSigField; });
    const auto sig = dss_sign(sk, env.signing_bytes());
    env.add(std::string(kEnvelopeSigField), FieldTag::signature, sig.encode());
}

void sign_envelope(Envelope& env, const SigKeyPair& signer) { sign_envelope(env, signer.sk); }

bool verify_envelope(const Envelope& env, ByteView pk)
{
    const Field* sig_field = nullptr;
    for (const auto& f : env.fields)
        if (f.name == kEnvelopeSigField) {
            if (sig_field) return false;
            sig_field = &f;
        }
    if (!sig_field || sig_field->tag != FieldTag::signature) return false;
    try {
        const auto sig = Signature::decode(sig_field->value);
        if (sig.signer_pk_hint != key_fingerprint(pk)) return false;
        return dss_verify(pk, env.signing_bytes(), sig);
    } catch (const Error&) {
        return false;
    }
}

std::optional<std::string> validate_envelope(const Envelope& env)
{
    for (const auto& f : env.fields) {
        if (f.tag == FieldTag::ciphertext && !decodes_as_ciphertext(f.value)) return f.name;
        if (f.tag == FieldTag::signature && !decodes_as_signature(f.value)) return f.name;
    }
    return std::nullopt;
}

}  // namespace eidcloud
