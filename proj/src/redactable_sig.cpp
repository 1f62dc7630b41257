#include "eidcloud/redactable_sig.hpp"

#include <set>

#include "eidcloud/errors.hpp"
#include "eidcloud/hash.hpp"
#include "parallel.hpp"

namespace eidcloud {

namespace {

constexpr std::string_view kMessageMagic = "RSM1";
constexpr std::string_view kSigMagic = "RSS1";
constexpr std::string_view kSignedMagic = "RSP1";

const Bytes& pad_leaf()
{
    static const Bytes pad = sha256({Bytes{0x02}, to_bytes("eidcloud/rs/pad")});
    return pad;
}

Bytes leaf_hash(ByteView commitment) { return sha256({Bytes{0x00}, commitment}); }

Bytes node_hash(ByteView l, ByteView r) { return sha256({Bytes{0x01}, l, r}); }

Bytes root_message(std::uint32_t block_count, ByteView root)
{
    return ByteWriter().str("eidcloud/rs/root").u32(block_count).raw(root).take();
}

bool well_formed(const BlockMessage& m, const RedactableSignature& sig)
{
    if (m.blocks.empty() || sig.block_count != m.blocks.size()) return false;
    if (sig.salts.size() != m.blocks.size() || sig.commitments.size() != m.blocks.size())
        return false;
    for (std::size_t i = 0; i < m.blocks.size(); ++i) {
        const bool visible = m.blocks[i].has_value();
        if (visible != sig.salts[i].has_value() || visible == sig.commitments[i].has_value())
            return false;
        if (visible && sig.salts[i]->size() != kRsSaltSize) return false;
        if (!visible && sig.commitments[i]->size() != kDigestSize) return false;
    }
    return true;
}

template <typename Loop>
std::vector<Bytes> leaf_commitments(const BlockMessage& m, const RedactableSignature& sig,
                                    Loop loop)
{
    if (!well_formed(m, sig)) throw RedactionError("message and signature do not match");
    std::vector<Bytes> out(m.blocks.size());
    loop(out.size(), [&](std::size_t i) {
        out[i] = m.blocks[i] ? rs_commitment(*sig.salts[i], static_cast<std::uint32_t>(i + 1),
                                             *m.blocks[i])
                             : *sig.commitments[i];
    });
    return out;
}

void write_optional_list(ByteWriter& w, const std::vector<std::optional<Bytes>>& v)
{
    w.u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& e : v) {
        w.u8(e ? 1 : 0);
        if (e) w.blob(*e);
    }
}

std::vector<std::optional<Bytes>> read_optional_list(ByteReader& r)
{
    const auto n = r.u32();
    if (n > r.remaining()) throw DecodeError("list length exceeds input");
    std::vector<std::optional<Bytes>> out;
    out.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto flag = r.u8();
        if (flag > 1) throw DecodeError("invalid presence flag");
        out.push_back(flag ? std::optional<Bytes>(r.blob()) : std::nullopt);
    }
    return out;
}

void expect_magic(ByteReader& r, std::string_view magic)
{
    if (r.remaining() < magic.size() || r.raw(magic.size()) != to_bytes(magic))
        throw DecodeError("unexpected record type");
}

}  // namespace

BlockMessage BlockMessage::from(std::vector<Bytes> contents)
{
    BlockMessage m;
    for (auto& c : contents) m.blocks.emplace_back(std::move(c));
    return m;
}

bool BlockMessage::redacted(std::size_t index) const
{
    if (index < 1 || index > blocks.size()) throw RedactionError("block index out of range");
    return !blocks[index - 1].has_value();
}

const Bytes& BlockMessage::content(std::size_t index) const
{
    if (redacted(index)) throw RedactionError("block " + std::to_string(index) + " is redacted");
    return *blocks[index - 1];
}

Bytes BlockMessage::encode() const
{
    ByteWriter w;
    w.raw(to_bytes(kMessageMagic));
    write_optional_list(w, blocks);
    return w.take();
}

BlockMessage BlockMessage::decode(ByteView in)
{
    ByteReader r(in);
    expect_magic(r, kMessageMagic);
    BlockMessage m;
    m.blocks = read_optional_list(r);
    r.expect_done();
    return m;
}

Bytes RedactableSignature::encode() const
{
    ByteWriter w;
    w.raw(to_bytes(kSigMagic)).u32(block_count).blob(root_sig.encode());
    write_optional_list(w, salts);
    write_optional_list(w, commitments);
    return w.take();
}

RedactableSignature RedactableSignature::decode(ByteView in)
{
    ByteReader r(in);
    expect_magic(r, kSigMagic);
    RedactableSignature s;
    s.block_count = r.u32();
    s.root_sig = Signature::decode(r.blob());
    s.salts = read_optional_list(r);
    s.commitments = read_optional_list(r);
    r.expect_done();
    return s;
}

Bytes encode_signed(const BlockMessage& m, const RedactableSignature& sig)
{
    return ByteWriter().raw(to_bytes(kSignedMagic)).blob(m.encode()).blob(sig.encode()).take();
}

std::pair<BlockMessage, RedactableSignature> decode_signed(ByteView in)
{
    ByteReader r(in);
    expect_magic(r, kSignedMagic);
    auto m = BlockMessage::decode(r.blob());
    auto s = RedactableSignature::decode(r.blob());
    r.expect_done();
    return {std::move(m), std::move(s)};
}

SigKeyPair rs_keygen(const ActorId& owner, std::optional<std::uint64_t> seed)
{
    return dss_keygen(owner, seed);
}

Bytes rs_commitment(ByteView salt, std::uint32_t index, ByteView content)
{
    return sha256({salt, ByteWriter().u32(index).bytes(), content});
}

Bytes rs_merkle_root(const std::vector<Bytes>& commitments)
{
    if (commitments.empty()) throw RedactionError("empty message");
    std::size_t width = 1;
    while (width < commitments.size()) width <<= 1;
    std::vector<Bytes> level;
    level.reserve(width);
    for (const auto& c : commitments) level.push_back(leaf_hash(c));
    while (level.size() < width) level.push_back(pad_leaf());
    while (level.size() > 1) {
        std::vector<Bytes> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size(); i += 2)
            next.push_back(node_hash(level[i], level[i + 1]));
        level = std::move(next);
    }
    return level.front();
}

std::vector<Bytes> rs_leaf_commitments(const BlockMessage& m, const RedactableSignature& sig)
{
    return leaf_commitments(m, sig, [](std::size_t n, auto&& f) { detail::parallel_for(n, f); });
}

std::vector<Bytes> rs_leaf_commitments_serial(const BlockMessage& m,
                                              const RedactableSignature& sig)
{
    return leaf_commitments(m, sig, [](std::size_t n, auto&& f) { detail::serial_for(n, f); });
}

RedactableSignature rs_sign(ByteView sk, const BlockMessage& m, Rng& rng)
{
    if (m.blocks.empty()) throw RedactionError("cannot sign an empty message");
    RedactableSignature sig;
    sig.block_count = static_cast<std::uint32_t>(m.blocks.size());
    for (const auto& b : m.blocks) {
        if (!b) throw RedactionError("cannot sign a message with redacted blocks");
        sig.salts.emplace_back(rng.bytes(kRsSaltSize));
        sig.commitments.emplace_back(std::nullopt);
    }
    const auto root = rs_merkle_root(rs_leaf_commitments(m, sig));
    sig.root_sig = dss_sign(sk, root_message(sig.block_count, root));
    return sig;
}

RedactableSignature rs_sign(ByteView sk, const BlockMessage& m)
{
    Rng rng;
    return rs_sign(sk, m, rng);
}

bool rs_verify(ByteView pk, const BlockMessage& m, const RedactableSignature& sig)
{
    if (!well_formed(m, sig)) return false;
    try {
        const auto root = rs_merkle_root(rs_leaf_commitments(m, sig));
        return dss_verify(pk, root_message(sig.block_count, root), sig.root_sig);
    } catch (const Error&) {
        return false;
    }
}

std::pair<BlockMessage, RedactableSignature> rs_redact(const BlockMessage& m, ByteView pk,
                                                       const RedactableSignature& sig,
                                                       const std::vector<std::size_t>& mod_set)
{
    if (!rs_verify(pk, m, sig)) throw RedactionError("input signature does not verify");
    std::set<std::size_t> seen;
    for (auto i : mod_set) {
        if (i < 1 || i > m.blocks.size())
            throw RedactionError("block index " + std::to_string(i) + " out of range");
        if (!m.blocks[i - 1] || !seen.insert(i).second)
            throw RedactionError("block " + std::to_string(i) + " already redacted");
    }
    auto out_m = m;
    auto out_s = sig;
    for (auto i : seen) {
        out_s.commitments[i - 1] =
            rs_commitment(*sig.salts[i - 1], static_cast<std::uint32_t>(i), *m.blocks[i - 1]);
        out_s.salts[i - 1].reset();
        out_m.blocks[i - 1].reset();
    }
    return {std::move(out_m), std::move(out_s)};
}

}  // namespace eidcloud
