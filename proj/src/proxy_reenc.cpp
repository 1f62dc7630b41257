#include "eidcloud/proxy_reenc.hpp"

#include <map>
#include <mutex>

#include "eidcloud/crypto_core.hpp"
#include "eidcloud/errors.hpp"
#include "eidcloud/hash.hpp"
#include "eidcloud/pairing.hpp"
#include "parallel.hpp"

namespace eidcloud {

namespace {

using pairing::Curve;
using pairing::Gt;
using pairing::Point;

constexpr std::string_view kPairingTag = "ibpre-ga07";
constexpr std::string_view kDealerTag = "trusted-dealer";
constexpr std::string_view kParamsMagic = "REP1";
constexpr std::string_view kRkMagic = "RRK1";
constexpr std::uint8_t kVersion = 1;

std::mutex g_observer_mu;
ReTransformObserver g_observer;

void observe(ByteView v)
{
    std::lock_guard lock(g_observer_mu);
    if (g_observer) g_observer(v);
}

Bytes body_aad(std::string_view scheme)
{
    return to_bytes(std::string("eidcloud/pre/body/") + std::string(scheme));
}

// Green-Ateniese identity-based PRE (multi-use, unidirectional) as a KEM.
// Chain element i is (A_i, B_i); element 0 wraps the session element K and
// every hop wraps the fresh element X of the re-encryption key it used.
class PairingBackend final : public ReBackend {
public:
    PairingBackend(const Curve& curve, Point ppub)
        : c_(curve), ppub_(std::move(ppub)), egg_(c_.pair(c_.generator(), c_.generator()))
    {
    }

    ReBackendKind kind() const override { return ReBackendKind::pairing; }
    std::string scheme_tag() const override { return std::string(kPairingTag); }
    bool sound() const override { return true; }
    int security_level() const override { return c_.security_level(); }
    Bytes public_params() const override { return c_.encode(ppub_); }

    Bytes keygen(ByteView msk, const std::string& id) const override
    {
        const auto s = c_.decode_scalar(msk);
        return c_.encode(c_.mul(h1(id), s));
    }

    bool key_matches(ByteView sk, const std::string& id) const override
    {
        try {
            const auto d = c_.decode_point(sk);
            return c_.pair(d, c_.generator()) == id_pairing(id);
        } catch (const DecodeError&) {
            return false;
        }
    }

    Bytes encrypt(const std::string& id, ByteView m, Rng& rng) const override
    {
        const Gt k = c_.gt_pow(egg_, c_.random_scalar(rng));
        const auto [a, b] = kem(id, k, rng);
        ByteWriter w;
        w.u32(1).raw(c_.encode(a)).raw(c_.encode(b));
        w.blob(se_encrypt(session_key(k), m, body_aad(kPairingTag), rng));
        return w.take();
    }

    Bytes rkgen(ByteView sk, const std::string&, const std::string& id2, Rng& rng) const override
    {
        const Point d = c_.decode_point(sk);
        const Gt x = c_.gt_pow(egg_, c_.random_scalar(rng));
        const Point r = c_.add(c_.neg(d), h2(x));
        const auto [a, b] = kem(id2, x, rng);
        return concat({c_.encode(r), c_.encode(a), c_.encode(b)});
    }

    Bytes reencrypt(ByteView body, std::uint32_t level, const ReEncKey& rk) const override
    {
        auto chain = parse(body, level);
        const auto pb = c_.point_bytes();
        if (rk.rk.size() != 2 * pb + c_.gt_bytes()) throw KeyError("malformed re-encryption key");
        const ByteView raw(rk.rk);
        Point r, a2;
        Gt b2;
        try {
            r = c_.decode_point(raw.first(pb));
            a2 = c_.decode_point(raw.subspan(pb, pb));
            b2 = c_.decode_gt(raw.subspan(2 * pb));
        } catch (const DecodeError& e) {
            throw KeyError(std::string("malformed re-encryption key: ") + e.what());
        }
        auto& last = chain.links.back();
        const Gt t = c_.pair(last.first, r);
        observe(c_.encode(t));
        last.second = c_.gt_mul(last.second, t);
        observe(c_.encode(last.second));
        chain.links.emplace_back(std::move(a2), std::move(b2));
        auto out = serialize(chain);
        observe(out);
        return out;
    }

    Bytes decrypt(ByteView sk, const std::string&, std::uint32_t level,
                  ByteView body) const override
    {
        Chain chain;
        Point d;
        try {
            chain = parse(body, level);
            d = c_.decode_point(sk);
        } catch (const DecodeError& e) {
            throw DecryptionError(e.what());
        }
        auto it = chain.links.rbegin();
        Gt x = c_.gt_mul(it->second, c_.gt_inv(c_.pair(it->first, d)));
        for (++it; it != chain.links.rend(); ++it)
            x = c_.gt_mul(it->second, c_.gt_inv(c_.pair(it->first, h2(x))));
        return se_decrypt(session_key(x), chain.sealed, body_aad(kPairingTag));
    }

private:
    struct Chain {
        std::vector<std::pair<Point, Gt>> links;
        Bytes sealed;
    };

    Chain parse(ByteView body, std::uint32_t level) const
    {
        ByteReader r(body);
        const auto n = r.u32();
        if (n != level + 1) throw DecodeError("chain length does not match level");
        Chain out;
        for (std::uint32_t i = 0; i < n; ++i) {
            auto a = c_.decode_point(r.raw(c_.point_bytes()));
            auto b = c_.decode_gt(r.raw(c_.gt_bytes()));
            out.links.emplace_back(std::move(a), std::move(b));
        }
        out.sealed = r.blob();
        r.expect_done();
        return out;
    }

    Bytes serialize(const Chain& chain) const
    {
        ByteWriter w;
        w.u32(static_cast<std::uint32_t>(chain.links.size()));
        for (const auto& [a, b] : chain.links) w.raw(c_.encode(a)).raw(c_.encode(b));
        w.blob(chain.sealed);
        return w.take();
    }

    std::pair<Point, Gt> kem(const std::string& id, const Gt& k, Rng& rng) const
    {
        const auto r = c_.random_scalar(rng);
        return {c_.mul(c_.generator(), r), c_.gt_mul(k, c_.gt_pow(id_pairing(id), r))};
    }

    Bytes session_key(const Gt& k) const
    {
        return sha256({to_bytes("eidcloud/pre/kem"), c_.encode(k)});
    }

    Point h1(const std::string& id) const
    {
        {
            std::lock_guard lock(mu_);
            if (auto it = h1_.find(id); it != h1_.end()) return it->second;
        }
        auto pt = c_.hash_to_point("eidcloud/pre/H1", sha256(to_bytes(id)));
        std::lock_guard lock(mu_);
        return h1_.emplace(id, std::move(pt)).first->second;
    }

    // e(g^s, H1(id))
    Gt id_pairing(const std::string& id) const
    {
        {
            std::lock_guard lock(mu_);
            if (auto it = idp_.find(id); it != idp_.end()) return it->second;
        }
        auto e = c_.pair(ppub_, h1(id));
        std::lock_guard lock(mu_);
        return idp_.emplace(id, std::move(e)).first->second;
    }

    Point h2(const Gt& x) const { return c_.hash_to_point("eidcloud/pre/H2", c_.encode(x)); }

    const Curve& c_;
    Point ppub_;
    Gt egg_;
    mutable std::mutex mu_;
    mutable std::map<std::string, Point> h1_;
    mutable std::map<std::string, Gt> idp_;
};

// Test double: a dealer that knows every identity key and re-encrypts by
// decrypting and encrypting again. Its public parameters contain the master
// secret, so it provides no confidentiality against whoever holds them.
class DealerBackend final : public ReBackend {
public:
    DealerBackend(Bytes secret, int level) : secret_(std::move(secret)), level_(level) {}

    ReBackendKind kind() const override { return ReBackendKind::trusted_dealer; }
    std::string scheme_tag() const override { return std::string(kDealerTag); }
    bool sound() const override { return false; }
    int security_level() const override { return level_; }
    Bytes public_params() const override { return secret_; }

    Bytes keygen(ByteView msk, const std::string& id) const override
    {
        if (!equal_ct(msk, secret_)) throw KeyError("master key does not match parameters");
        return id_key(id);
    }

    bool key_matches(ByteView sk, const std::string& id) const override
    {
        return equal_ct(sk, id_key(id));
    }

    Bytes encrypt(const std::string& id, ByteView m, Rng& rng) const override
    {
        return se_encrypt(id_key(id), m, body_aad(kDealerTag), rng);
    }

    Bytes rkgen(ByteView, const std::string& id1, const std::string& id2, Rng&) const override
    {
        return rk_token(id1, id2);
    }

    Bytes reencrypt(ByteView body, std::uint32_t, const ReEncKey& rk) const override
    {
        if (!equal_ct(rk.rk, rk_token(rk.from_id, rk.to_id)))
            throw KeyError("re-encryption key not issued by this dealer");
        const auto m = se_decrypt(id_key(rk.from_id), body, body_aad(kDealerTag));
        observe(m);
        const auto seed = sha256({to_bytes("eidcloud/pre/dealer/nonce"), body, rk.rk});
        Rng rng(ByteReader(seed).u64());
        return se_encrypt(id_key(rk.to_id), m, body_aad(kDealerTag), rng);
    }

    Bytes decrypt(ByteView sk, const std::string&, std::uint32_t, ByteView body) const override
    {
        return se_decrypt(sk, body, body_aad(kDealerTag));
    }

private:
    Bytes id_key(const std::string& id) const
    {
        return hmac_sha256(secret_, to_bytes("id:" + id));
    }

    Bytes rk_token(const std::string& id1, const std::string& id2) const
    {
        return hmac_sha256(secret_, ByteWriter().str("rk").str(id1).str(id2).bytes());
    }

    Bytes secret_;
    int level_;
};

const ReBackend& backend_of(const ReParams& params)
{
    if (!params.backend) throw ParameterError("re-encryption parameters are not initialised");
    return *params.backend;
}

void check_scheme(const ReParams& params, const ReCiphertext& c)
{
    if (c.scheme != backend_of(params).scheme_tag())
        throw DecryptionError("ciphertext scheme does not match parameters");
}

}  // namespace

void re_set_transform_observer(ReTransformObserver observer)
{
    std::lock_guard lock(g_observer_mu);
    g_observer = std::move(observer);
}

std::string_view to_string(ReBackendKind kind)
{
    return kind == ReBackendKind::pairing ? "pairing" : "test-double";
}

ReBackendKind parse_backend_kind(std::string_view name)
{
    if (name == "pairing") return ReBackendKind::pairing;
    if (name == "test-double" || name == "trusted-dealer") return ReBackendKind::trusted_dealer;
    throw ParameterError("unknown backend: " + std::string(name));
}

bool ReParams::sound() const { return backend_of(*this).sound(); }
ReBackendKind ReParams::kind() const { return backend_of(*this).kind(); }
std::string ReParams::scheme_tag() const { return backend_of(*this).scheme_tag(); }
int ReParams::security_level() const { return backend_of(*this).security_level(); }

Bytes ReParams::encode() const
{
    const auto& b = backend_of(*this);
    ByteWriter w;
    w.raw(to_bytes(kParamsMagic)).u8(kVersion).str(b.scheme_tag());
    w.u32(static_cast<std::uint32_t>(b.security_level()));
    w.u32(static_cast<std::uint32_t>(max_levels));
    w.blob(b.public_params());
    return w.take();
}

ReParams ReParams::decode(ByteView in)
{
    ByteReader r(in);
    if (r.raw(kParamsMagic.size()) != to_bytes(kParamsMagic))
        throw DecodeError("not re-encryption parameters");
    if (r.u8() != kVersion) throw DecodeError("unsupported parameter version");
    const auto tag = r.str();
    const auto level = static_cast<int>(r.u32());
    const auto max_levels = static_cast<int>(r.u32());
    const auto pub = r.blob();
    r.expect_done();
    if (max_levels < 1) throw DecodeError("max_levels must be positive");
    ReParams out;
    out.max_levels = max_levels;
    if (tag == kPairingTag) {
        try {
            const auto& curve = Curve::for_security_level(level);
            out.backend = std::make_shared<PairingBackend>(curve, curve.decode_point(pub));
        } catch (const ParameterError& e) {
            throw DecodeError(e.what());
        }
    } else if (tag == kDealerTag) {
        if (pub.size() != kDigestSize) throw DecodeError("malformed dealer parameters");
        out.backend = std::make_shared<DealerBackend>(pub, level);
    } else {
        throw DecodeError("unknown scheme tag: " + tag);
    }
    return out;
}

Bytes ReEncKey::encode() const
{
    return ByteWriter().raw(to_bytes(kRkMagic)).str(from_id).str(to_id).blob(rk).take();
}

ReEncKey ReEncKey::decode(ByteView in)
{
    ByteReader r(in);
    if (r.raw(kRkMagic.size()) != to_bytes(kRkMagic))
        throw DecodeError("not a re-encryption key");
    ReEncKey out;
    out.from_id = r.str();
    out.to_id = r.str();
    out.rk = r.blob();
    r.expect_done();
    return out;
}

Bytes ReCiphertext::encode() const
{
    ByteWriter w;
    w.raw(to_bytes(kReMagic)).u8(kVersion).str(scheme).str(target_id).u32(level).blob(body);
    return w.take();
}

ReCiphertext ReCiphertext::decode(ByteView in)
{
    ByteReader r(in);
    if (r.remaining() < kReMagic.size() || r.raw(kReMagic.size()) != to_bytes(kReMagic))
        throw DecodeError("not a re-encryption ciphertext");
    if (r.u8() != kVersion) throw DecodeError("unsupported ciphertext version");
    ReCiphertext out;
    out.scheme = r.str();
    out.target_id = r.str();
    out.level = r.u32();
    out.body = r.blob();
    r.expect_done();
    return out;
}

std::pair<ReParams, ReMasterKey> re_setup(int security_level, int max_levels,
                                          std::optional<std::uint64_t> seed, ReBackendKind kind)
{
    if (max_levels < 1) throw ParameterError("max_levels must be at least 1");
    auto rng = Rng::from_seed(seed).fork("re/setup");
    const auto& curve = Curve::for_security_level(security_level);
    ReParams params;
    params.max_levels = max_levels;
    ReMasterKey msk;
    if (kind == ReBackendKind::pairing) {
        const auto s = curve.random_scalar(rng);
        params.backend = std::make_shared<PairingBackend>(curve, curve.mul(curve.generator(), s));
        msk.msk = curve.encode_scalar(s);
    } else {
        msk.msk = rng.bytes(kDigestSize);
        params.backend = std::make_shared<DealerBackend>(msk.msk, security_level);
    }
    return {std::move(params), std::move(msk)};
}

ReIdentityKey re_keygen(const ReParams& params, const ReMasterKey& msk, const std::string& id)
{
    if (id.empty()) throw ParameterError("identity must be non-empty");
    try {
        return {id, backend_of(params).keygen(msk.msk, id)};
    } catch (const DecodeError& e) {
        throw KeyError(std::string("malformed master key: ") + e.what());
    }
}

ReCiphertext re_encrypt(const ReParams& params, const std::string& id, ByteView m, Rng& rng)
{
    if (id.empty()) throw ParameterError("identity must be non-empty");
    const auto& b = backend_of(params);
    return {b.scheme_tag(), id, 0, b.encrypt(id, m, rng)};
}

ReEncKey re_rkgen(const ReParams& params, const ReIdentityKey& sk, const std::string& id1,
                  const std::string& id2, Rng& rng)
{
    const auto& b = backend_of(params);
    if (id2.empty()) throw ParameterError("identity must be non-empty");
    if (sk.id != id1 || !b.key_matches(sk.sk, id1))
        throw KeyError("secret key does not belong to " + id1);
    return {id1, id2, b.rkgen(sk.sk, id1, id2, rng)};
}

ReCiphertext re_reencrypt(const ReParams& params, const ReCiphertext& c, const ReEncKey& rk)
{
    const auto& b = backend_of(params);
    if (c.target_id != rk.from_id)
        throw RoutingError("ciphertext for " + c.target_id + " cannot use key from " + rk.from_id);
    if (c.level >= static_cast<std::uint32_t>(params.max_levels))
        throw DepthError("ciphertext already at maximum level " +
                         std::to_string(params.max_levels));
    if (c.scheme != b.scheme_tag()) throw DecodeError("ciphertext scheme does not match parameters");
    return {c.scheme, rk.to_id, c.level + 1, b.reencrypt(c.body, c.level, rk)};
}

Bytes re_decrypt(const ReParams& params, const ReIdentityKey& sk, const ReCiphertext& c)
{
    check_scheme(params, c);
    if (c.target_id != sk.id) throw DecryptionError("ciphertext is addressed to " + c.target_id);
    try {
        return backend_of(params).decrypt(sk.sk, sk.id, c.level, c.body);
    } catch (const DecryptionError&) {
        throw;
    } catch (const Error& e) {
        throw DecryptionError(e.what());
    }
}

namespace {

template <typename Loop>
std::vector<ReCiphertext> encrypt_batch(const ReParams& params, const std::string& id,
                                        const std::vector<Bytes>& messages, Rng& rng, Loop loop)
{
    std::vector<Rng> streams;
    streams.reserve(messages.size());
    for (std::size_t i = 0; i < messages.size(); ++i) streams.push_back(rng.split());
    std::vector<ReCiphertext> out(messages.size());
    loop(messages.size(),
         [&](std::size_t i) { out[i] = re_encrypt(params, id, messages[i], streams[i]); });
    return out;
}

template <typename Loop>
std::vector<ReCiphertext> reencrypt_batch(const ReParams& params,
                                          const std::vector<ReCiphertext>& cs, const ReEncKey& rk,
                                          Loop loop)
{
    std::vector<ReCiphertext> out(cs.size());
    loop(cs.size(), [&](std::size_t i) { out[i] = re_reencrypt(params, cs[i], rk); });
    return out;
}

template <typename Loop>
std::vector<Bytes> decrypt_batch(const ReParams& params, const ReIdentityKey& sk,
                                 const std::vector<ReCiphertext>& cs, Loop loop)
{
    std::vector<Bytes> out(cs.size());
    loop(cs.size(), [&](std::size_t i) { out[i] = re_decrypt(params, sk, cs[i]); });
    return out;
}

constexpr auto kParallel = [](std::size_t n, auto&& f) { detail::parallel_for(n, f); };
constexpr auto kSerial = [](std::size_t n, auto&& f) { detail::serial_for(n, f); };

}  // namespace

std::vector<ReCiphertext> re_encrypt_batch(const ReParams& params, const std::string& id,
                                           const std::vector<Bytes>& messages, Rng& rng)
{
    return encrypt_batch(params, id, messages, rng, kParallel);
}

std::vector<ReCiphertext> re_encrypt_batch_serial(const ReParams& params, const std::string& id,
                                                  const std::vector<Bytes>& messages, Rng& rng)
{
    return encrypt_batch(params, id, messages, rng, kSerial);
}

std::vector<ReCiphertext> re_reencrypt_batch(const ReParams& params,
                                             const std::vector<ReCiphertext>& cs,
                                             const ReEncKey& rk)
{
    return reencrypt_batch(params, cs, rk, kParallel);
}

std::vector<ReCiphertext> re_reencrypt_batch_serial(const ReParams& params,
                                                    const std::vector<ReCiphertext>& cs,
                                                    const ReEncKey& rk)
{
    return reencrypt_batch(params, cs, rk, kSerial);
}

std::vector<Bytes> re_decrypt_batch(const ReParams& params, const ReIdentityKey& sk,
                                    const std::vector<ReCiphertext>& cs)
{
    return decrypt_batch(params, sk, cs, kParallel);
}

std::vector<Bytes> re_decrypt_batch_serial(const ReParams& params, const ReIdentityKey& sk,
                                           const std::vector<ReCiphertext>& cs)
{
    return decrypt_batch(params, sk, cs, kSerial);
}

}  // namespace eidcloud
