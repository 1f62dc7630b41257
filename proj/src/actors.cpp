#include "eidcloud/actors.hpp"

#include <algorithm>

#include "eidcloud/errors.hpp"

namespace eidcloud {

namespace {

const std::string kMoa(actor::moa_id);
const std::string kMis(actor::mis);
const std::string kSprGw(actor::spr_gw);
const std::string kSr(actor::sr);
const std::string kCr(actor::cr);
const std::string kPeps(actor::peps);
const std::string kFidp(actor::fidp);
const std::string kSra(actor::sra);

Envelope msg(std::string type, std::string from, std::string to)
{
    Envelope e;
    e.msg_type = std::move(type);
    e.sender = std::move(from);
    e.receiver = std::move(to);
    return e;
}

void sign(SessionContext& ctx, Envelope& e)
{
    e.correlation = ctx.id;
    sign_envelope(e, ctx.world.signing_key(e.sender));
}

bool verify_detached(ByteView pk, ByteView message, ByteView sig_bytes)
{
    try {
        const auto sig = Signature::decode(sig_bytes);
        return sig.signer_pk_hint == key_fingerprint(pk) && dss_verify(pk, message, sig);
    } catch (const Error&) {
        return false;
    }
}

const Bytes& sra_pk(const SessionContext& ctx) { return ctx.world.verification_key(kSra); }

std::string citizen_actor(const SessionContext& ctx) { return actor::citizen(ctx.spec.citizen); }

void consent(SessionContext& ctx, std::string_view request)
{
    if (!ctx.world.scenario.approves(ctx.spec.citizen, request))
        ctx.deny("citizen refused the " + std::string(request) + " request");
}

// ---------------------------------------------------------------------------
// Identity Link transport

const std::vector<std::string>& plain_link_labels()
{
    static const std::vector<std::string> l{
        std::string(label::given_name), std::string(label::family_name),
        std::string(label::date_of_birth), std::string(label::source_pin),
        std::string(label::cert_ref)};
    return l;
}

void put_plain_link(Envelope& e, const IdentityLink& link)
{
    for (const auto& a : link.attributes) e.add("il." + a.label, FieldTag::plaintext, a.value);
    e.add("il.sig", FieldTag::signature, link.issuer_sig.encode());
}

IdentityLink take_plain_link(const Envelope& e)
{
    IdentityLink link;
    for (const auto& l : plain_link_labels()) link.attributes.push_back({l, e.value("il." + l)});
    link.issuer_sig = Signature::decode(e.value("il.sig"));
    return link;
}

void remember_plain_link(SessionContext& ctx, const ActorId& who, const IdentityLink& link)
{
    for (const auto& a : link.attributes) ctx.remember(who, "il." + a.label, a.value, FieldTag::plaintext);
}

void put_modified_link(Envelope& e, const ModifiedIdentityLink& link)
{
    for (std::size_t i = 1; i <= link.blocks.size(); ++i)
        if (!link.blocks.redacted(i))
            e.add("il.block." + std::to_string(i), FieldTag::ciphertext, link.blocks.content(i));
    e.add("il.rs_sig", FieldTag::signature, link.rs_sig.encode());
}

// Positions follow the public sector list; the layout itself is not sent.
ModifiedIdentityLink take_modified_link(const SessionContext& ctx, const Envelope& e)
{
    ModifiedIdentityLink link;
    link.labels = modified_link_labels(ctx.world.scenario.sectors);
    link.rs_sig = RedactableSignature::decode(e.value("il.rs_sig"));
    ctx.require(link.rs_sig.block_count == link.labels.size(),
                "identity link does not match the sector layout");
    for (std::size_t i = 1; i <= link.labels.size(); ++i) {
        const auto name = "il.block." + std::to_string(i);
        if (e.has(name))
            link.blocks.blocks.emplace_back(e.value(name));
        else
            link.blocks.blocks.emplace_back(std::nullopt);
    }
    return link;
}

std::vector<std::string> keep_labels(const std::vector<Sector>& sectors)
{
    std::vector<std::string> keep{std::string(label::given_name), std::string(label::family_name),
                                  std::string(label::date_of_birth)};
    for (const auto& s : sectors) keep.push_back(label::sspin(s));
    return keep;
}

/// Visible blocks of `labels` as RE ciphertexts, in the order given.
std::vector<ReCiphertext> visible_blocks(const SessionContext& ctx,
                                         const ModifiedIdentityLink& link,
                                         const std::vector<std::string>& labels)
{
    std::vector<ReCiphertext> out;
    for (const auto& l : labels) {
        const auto i = link.index_of(l);
        ctx.require(!link.blocks.redacted(i), "identity link block " + l + " is redacted");
        out.push_back(ReCiphertext::decode(link.blocks.content(i)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Steps shared by the Austrian and the representation flows

Envelope ccs_link_response(SessionContext& ctx, const Envelope& request)
{
    const auto c = citizen_actor(ctx);
    auto e = msg("il_response", c, kMoa);
    if (ctx.cloud()) {
        std::vector<Sector> sectors{request.text("sector")};
        if (request.has("register_sector")) sectors.push_back(request.text("register_sector"));
        const auto mil =
            ModifiedIdentityLink::decode(ctx.world.credential(c, "modified-identity-link"));
        put_modified_link(e, redact_modified_link(mil, sra_pk(ctx), keep_labels(sectors)));
    } else {
        put_plain_link(e, IdentityLink::decode(ctx.world.credential(c, "identity-link")));
    }
    sign(ctx, e);
    return e;
}

struct MoaLink {
    ModifiedIdentityLink mil;
    IdentityLink il;
};

MoaLink moa_receive_link(SessionContext& ctx)
{
    MoaLink out;
    const auto e = ctx.receive_signed(kMoa, "il_response", citizen_actor(ctx));
    if (ctx.cloud()) {
        out.mil = take_modified_link(ctx, e);
        ctx.require(verify_modified_identity_link(sra_pk(ctx), out.mil),
                    "modified identity link: redactable signature does not verify");
        for (std::size_t i = 1; i <= out.mil.blocks.size(); ++i)
            if (!out.mil.blocks.redacted(i))
                ctx.remember(kMoa, "il." + out.mil.labels[i - 1], out.mil.blocks.content(i),
                             FieldTag::ciphertext);
    } else {
        out.il = take_plain_link(e);
        ctx.require(verify_identity_link(sra_pk(ctx), out.il),
                    "identity link: SRA signature does not verify");
        remember_plain_link(ctx, kMoa, out.il);
    }
    return out;
}

std::string moa_request_signature(SessionContext& ctx)
{
    const auto text = consent_text(ctx.spec.sp, ctx.id, ctx.bus.now());
    ctx.metadata.push_back(text);
    ctx.remember_text(kMoa, "consent", text);
    ctx.send(msg("sig_request", kMoa, citizen_actor(ctx)).plain("consent", text));
    return text;
}

void ccs_sign(SessionContext& ctx, const ActorId& requester, std::string_view cert_name)
{
    const auto c = citizen_actor(ctx);
    const auto req = ctx.receive(c, "sig_request");
    const auto qsig = dss_sign(ctx.world.signing_key(c).sk, req.value("consent"));
    auto e = msg("sig_response", c, requester);
    e.add("certificate", FieldTag::plaintext, ctx.world.credential(c, cert_name));
    e.add("qsig", FieldTag::signature, qsig.encode());
    sign(ctx, e);
    ctx.send(e);
}

/// Returns the certificate bytes.
Bytes moa_verify_signature(SessionContext& ctx, const std::string& consent_text_,
                           const MoaLink& link)
{
    const auto c = citizen_actor(ctx);
    const auto e = ctx.receive_signed(kMoa, "sig_response", c);
    const auto cert = Certificate::decode(e.value("certificate"));
    ctx.require(verify_certificate(sra_pk(ctx), cert), "signing certificate not issued by the SRA");
    ctx.require(cert.public_key == ctx.world.verification_key(c),
                "signing certificate does not belong to the citizen");
    ctx.require(verify_detached(cert.public_key, to_bytes(consent_text_), e.value("qsig")),
                "qualified signature does not verify");
    if (!ctx.cloud())
        ctx.require(link.il.get(label::cert_ref) == cert.reference(),
                    "certificate does not match the identity link");
    ctx.remember(kMoa, "certificate", e.value("certificate"), FieldTag::plaintext);
    return e.value("certificate");
}

// ---------------------------------------------------------------------------
// Service provider side

std::string sp_label(const SessionContext& ctx, const std::string& l)
{
    if (l.rfind("sspin:", 0) == 0) {
        ctx.require(l == label::sspin(ctx.world.sector_of(ctx.spec.sp)),
                    "ssPIN for the wrong sector");
        return "sspin";
    }
    return l;
}

Envelope saml_cloud(SessionContext& ctx, const std::vector<std::string>& labels,
                    const std::vector<ReCiphertext>& cts)
{
    auto e = msg("saml_response", kMoa, ctx.spec.sp);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto enc = cts[i].encode();
        ctx.remember(kMoa, "c_sp." + labels[i], enc, FieldTag::ciphertext);
        e.add("c_sp." + labels[i], FieldTag::ciphertext, enc);
    }
    sign(ctx, e);
    return e;
}

std::map<std::string, Bytes> sp_decrypt(SessionContext& ctx, const Envelope& saml)
{
    const auto& sp = ctx.spec.sp;
    const auto key = ctx.world.identity_key(sp, sp);
    std::map<std::string, Bytes> out;
    for (const auto& f : saml.fields) {
        if (f.name.rfind("c_sp.", 0) != 0) continue;
        const auto a = decode_attribute(
            re_decrypt(ctx.world.params, key, ReCiphertext::decode(f.value)));
        ctx.require(f.name == "c_sp." + a.label, "attribute label mismatch");
        out[sp_label(ctx, a.label)] = a.value;
    }
    return out;
}

const std::vector<std::string>& sp_plain_labels()
{
    static const std::vector<std::string> l{
        std::string(label::given_name), std::string(label::family_name),
        std::string(label::date_of_birth), "sspin"};
    return l;
}

std::map<std::string, Bytes> sp_extract(const Envelope& saml)
{
    std::map<std::string, Bytes> out;
    for (const auto& l : sp_plain_labels()) out[l] = saml.value(l);
    if (saml.has(label::mandate)) out[std::string(label::mandate)] = saml.value(label::mandate);
    return out;
}

Bytes moa_derive_sspin(SessionContext& ctx, const IdentityLink& il, const Sector& sector)
{
    const auto pin = SourcePin{il.get(label::source_pin), ""};
    const auto v = derive_sspin(pin, sector).value;
    ctx.remember(kMoa, "sspin", v, FieldTag::plaintext);
    return v;
}

Envelope saml_current(SessionContext& ctx, const IdentityLink& il, const Bytes& sspin)
{
    auto e = msg("saml_response", kMoa, ctx.spec.sp);
    e.add(std::string(label::given_name), FieldTag::plaintext, il.get(label::given_name));
    e.add(std::string(label::family_name), FieldTag::plaintext, il.get(label::family_name));
    e.add(std::string(label::date_of_birth), FieldTag::plaintext, il.get(label::date_of_birth));
    e.add("sspin", FieldTag::plaintext, sspin);
    return e;
}

// ---------------------------------------------------------------------------
// Mandates

Bytes encode_offer(const std::vector<std::pair<Mandate, Signature>>& offer)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(offer.size()));
    for (const auto& [m, s] : offer) w.blob(m.encode()).blob(s.encode());
    return w.take();
}

std::vector<std::pair<Bytes, Bytes>> decode_offer(ByteView in)
{
    ByteReader r(in);
    const auto n = r.u32();
    if (n > r.remaining()) throw DecodeError("mandate offer: count exceeds input");
    std::vector<std::pair<Bytes, Bytes>> out;
    for (std::uint32_t i = 0; i < n; ++i) {
        auto m = r.blob();
        auto s = r.blob();
        out.emplace_back(std::move(m), std::move(s));
    }
    r.expect_done();
    return out;
}

void put_mandates(Envelope& e, const std::vector<Mandate>& ms)
{
    for (std::size_t i = 0; i < ms.size(); ++i)
        for (const auto& [name, value] : ms[i].fields())
            e.plain("mandate." + std::to_string(i) + "." + name, value);
}

std::vector<Mandate> take_mandates(const Envelope& e)
{
    std::vector<Mandate> out;
    for (std::size_t i = 0;; ++i) {
        const auto p = "mandate." + std::to_string(i) + ".";
        if (!e.has(p + "mand_id")) break;
        Mandate m;
        m.mand_id = e.text(p + "mand_id");
        m.mandator_register_number = e.text(p + "mandator_register_number");
        m.mandator_name = e.text(p + "mandator_name");
        m.representative_name = e.text(p + "representative_name");
        m.representative_dob = e.text(p + "representative_dob");
        m.empowerment = e.text(p + "empowerment");
        m.register_label = e.text(p + "register");
        out.push_back(std::move(m));
    }
    return out;
}

void remember_mandate(SessionContext& ctx, const ActorId& who, const std::string& prefix,
                      const Mandate& m)
{
    for (const auto& [name, value] : m.fields()) ctx.remember_text(who, prefix + name, value);
}

std::string choose_mandate(const SessionContext& ctx, const std::vector<std::string>& offered)
{
    const auto want = ctx.spec.mandate.empty() ? offered.front() : ctx.spec.mandate;
    ctx.require(std::find(offered.begin(), offered.end(), want) != offered.end(),
                "mandate " + want + " was not offered");
    return want;
}

}  // namespace

const std::vector<std::string>& protocol_constants()
{
    static const std::vector<std::string> c{"self", "representation", "foreign"};
    return c;
}

std::string consent_text(const std::string& sp, const std::string& session, std::uint64_t ts)
{
    return "I want to authenticate at " + sp + " (session " + session + ", t=" +
           std::to_string(ts) + ")";
}

// ---------------------------------------------------------------------------
// Austrian citizen

FlowTask austrian_flow(SessionContext& ctx)
{
    const auto c = citizen_actor(ctx);
    const auto sp = ctx.spec.sp;
    const bool cloud = ctx.cloud();

    co_await ctx.step("1");
    ctx.send(msg("access_request", c, sp).plain("purpose", "self"));

    co_await ctx.step("2");
    ctx.receive(sp, "access_request");
    ctx.send(msg("auth_request", sp, kMoa).plain("sp", sp).plain("purpose", "self"));

    co_await ctx.step("3a");
    const auto auth = ctx.receive(kMoa, "auth_request");
    const auto sector = ctx.world.sector_of(auth.text("sp"));
    ctx.remember_text(kMoa, "sector", sector);
    {
        auto e = msg("il_request", kMoa, c);
        if (cloud) e.plain("sector", sector);
        ctx.send(e);
    }

    co_await ctx.step("3b");
    const auto il_request = ctx.receive(c, "il_request");
    consent(ctx, "identity_link");

    Envelope il_response;
    if (cloud) {
        co_await ctx.step("3c");
        il_response = ccs_link_response(ctx, il_request);
    }

    co_await ctx.step("3d");
    if (!cloud) il_response = ccs_link_response(ctx, il_request);
    ctx.send(il_response);
    const auto link = moa_receive_link(ctx);

    co_await ctx.step("4a");
    const auto text = moa_request_signature(ctx);

    co_await ctx.step("4b");
    consent(ctx, "signature");

    co_await ctx.step("4c");
    ccs_sign(ctx, kMoa, cloud ? "pseudonym-certificate" : "certificate");
    moa_verify_signature(ctx, text, link);

    Envelope saml;
    if (cloud) {
        co_await ctx.step("5b");
        const auto labels = keep_labels({sector});
        const auto cts = re_reencrypt_batch(ctx.world.params,
                                            visible_blocks(ctx, link.mil, labels),
                                            ctx.world.rekey(kMoa, kMoa, sp));
        saml = saml_cloud(ctx, labels, cts);
    } else {
        co_await ctx.step("5a");
        const auto sspin = moa_derive_sspin(ctx, link.il, sector);
        saml = saml_current(ctx, link.il, sspin);
    }

    co_await ctx.step("5c");
    sign(ctx, saml);

    co_await ctx.step("6");
    ctx.send(saml);

    co_await ctx.step("7a");
    const auto resp = ctx.receive_signed(sp, "saml_response", kMoa);
    std::map<std::string, Bytes> attrs;
    if (cloud) {
        co_await ctx.step("7b");
        attrs = sp_decrypt(ctx, resp);
    } else {
        attrs = sp_extract(resp);
    }

    co_await ctx.step("8");
    ctx.outcome.sp_attributes = attrs;
}

// ---------------------------------------------------------------------------
// Representation of a legal person

FlowTask representation_flow(SessionContext& ctx)
{
    const auto c = citizen_actor(ctx);
    const auto sp = ctx.spec.sp;
    const bool cloud = ctx.cloud();
    const auto& params = ctx.world.params;
    const auto cr_sector = ctx.world.scenario.cr_sector;

    co_await ctx.step("1");
    ctx.send(msg("access_request", c, sp).plain("purpose", "representation"));

    co_await ctx.step("2");
    ctx.receive(sp, "access_request");
    ctx.send(msg("auth_request", sp, kMoa).plain("sp", sp).plain("purpose", "representation"));

    co_await ctx.step("3a");
    const auto auth = ctx.receive(kMoa, "auth_request");
    const auto sector = ctx.world.sector_of(auth.text("sp"));
    ctx.remember_text(kMoa, "sector", sector);
    ctx.remember_text(kMoa, "register_sector", cr_sector);
    {
        auto e = msg("il_request", kMoa, c);
        if (cloud) e.plain("sector", sector).plain("register_sector", cr_sector);
        ctx.send(e);
    }

    Envelope il_response;
    if (cloud) {
        co_await ctx.step("3b");
        const auto req = ctx.receive(c, "il_request");
        consent(ctx, "identity_link");
        il_response = ccs_link_response(ctx, req);
    }

    co_await ctx.step("3c");
    if (!cloud) {
        const auto req = ctx.receive(c, "il_request");
        consent(ctx, "identity_link");
        il_response = ccs_link_response(ctx, req);
    }
    ctx.send(il_response);
    const auto link = moa_receive_link(ctx);

    co_await ctx.step("4");
    const auto text = moa_request_signature(ctx);
    consent(ctx, "signature");
    ccs_sign(ctx, kMoa, cloud ? "pseudonym-certificate" : "certificate");
    const auto cert_bytes = moa_verify_signature(ctx, text, link);

    Envelope query = msg("mandate_query", kMoa, kMis);
    if (cloud) {
        co_await ctx.step("5");
        const auto c_mis = re_reencrypt(params,
                                        visible_blocks(ctx, link.mil, {label::sspin(cr_sector)})[0],
                                        ctx.world.rekey(kMoa, kMoa, kMis));
        ctx.remember(kMoa, "c_mis", c_mis.encode(), FieldTag::ciphertext);
        query.add("c_mis", FieldTag::ciphertext, c_mis.encode());
        sign(ctx, query);
    }

    co_await ctx.step("6");
    if (!cloud) {
        put_plain_link(query, link.il);
        query.add("certificate", FieldTag::plaintext, cert_bytes);
        query.plain("sector", sector);
        sign(ctx, query);
    }
    ctx.send(query);

    Envelope search = msg("mandate_search", kMis, kCr);
    if (cloud) {
        co_await ctx.step("7b");
        const auto q = ctx.receive_signed(kMis, "mandate_query", kMoa);
        const auto c_cr = re_reencrypt(params, ReCiphertext::decode(q.value("c_mis")),
                                       ctx.world.rekey(kMis, kMis, kCr));
        ctx.remember(kMis, "c_cr", c_cr.encode(), FieldTag::ciphertext);
        search.add("c_cr", FieldTag::ciphertext, c_cr.encode());
    } else {
        co_await ctx.step("7a");
        const auto q = ctx.receive_signed(kMis, "mandate_query", kMoa);
        const auto il = take_plain_link(q);
        ctx.require(verify_identity_link(sra_pk(ctx), il),
                    "identity link: SRA signature does not verify");
        remember_plain_link(ctx, kMis, il);
        ctx.remember(kMis, "certificate", q.value("certificate"), FieldTag::plaintext);
        ctx.remember_text(kMis, "sector", q.text("sector"));
        const auto sspin_cr = derive_sspin(SourcePin{il.get(label::source_pin), ""}, cr_sector);
        ctx.remember(kMis, "sspin_cr", sspin_cr.value, FieldTag::plaintext);
        search.add("sspin_cr", FieldTag::plaintext, sspin_cr.value);
    }
    sign(ctx, search);

    co_await ctx.step("8a");
    ctx.send(search);
    const auto s = ctx.receive_signed(kCr, "mandate_search", kMis);
    SsPin cr_sspin;
    if (cloud) {
        const auto a = decode_attribute(re_decrypt(params, ctx.world.identity_key(kCr, kCr),
                                                   ReCiphertext::decode(s.value("c_cr"))));
        ctx.require(a.label == label::sspin(cr_sector), "mandate search without a CR ssPIN");
        cr_sspin = {a.value, cr_sector};
    } else {
        cr_sspin = {s.value("sspin_cr"), cr_sector};
    }
    const auto found = cr_find_mandates(ctx.world.cr, cr_sspin);
    const auto cr_signer = ctx.world.signing_key(kCr);
    std::vector<std::pair<Mandate, Signature>> offer;
    for (const auto& m : found) offer.emplace_back(m, dss_sign(cr_signer.sk, m.encode()));

    auto result = msg("mandate_result", kCr, kMis);
    if (cloud) {
        co_await ctx.step("8b");
        const auto* rep = ctx.world.cr.find_representative(cr_sspin.value);
        ctx.require(rep != nullptr, "no encryption key registered for the representative");
        const auto c_c = hybrid_encrypt(rep->pke_pk, encode_offer(offer), ctx.rng);
        result.add("c_c", FieldTag::ciphertext, c_c.encode());
    } else {
        put_mandates(result, found);
    }
    sign(ctx, result);

    co_await ctx.step("8c");
    ctx.send(result);
    const auto r = ctx.receive_signed(kMis, "mandate_result", kCr);
    std::vector<Mandate> mis_mandates;
    if (cloud) {
        ctx.remember(kMis, "c_c", r.value("c_c"), FieldTag::ciphertext);
    } else {
        mis_mandates = take_mandates(r);
        for (std::size_t i = 0; i < mis_mandates.size(); ++i)
            remember_mandate(ctx, kMis, "mandate." + std::to_string(i) + ".", mis_mandates[i]);
    }

    co_await ctx.step("9a");
    {
        auto page = msg("mandate_page", kMis, c);
        if (cloud)
            page.add("c_c", FieldTag::ciphertext, r.value("c_c"));
        else
            put_mandates(page, mis_mandates);
        ctx.send(page);
    }
    const auto page = ctx.receive(c, "mandate_page");
    std::vector<std::string> offered;
    if (cloud) {
        co_await ctx.step("9b");
        const auto plain = hybrid_decrypt(ctx.world.pke_key(c).sk,
                                          HybridCiphertext::decode(page.value("c_c")));
        const auto& cr_pk = ctx.world.verification_key(kCr);
        for (const auto& [m, sig] : decode_offer(plain)) {
            ctx.require(verify_detached(cr_pk, m, sig), "CR signature on a mandate does not verify");
            offered.push_back(Mandate::decode(m).mand_id);
        }
        if (offered.empty()) ctx.deny("no mandates registered for the citizen");
    } else {
        for (const auto& m : take_mandates(page)) offered.push_back(m.mand_id);
        if (offered.empty()) ctx.deny("no mandates registered for the citizen");
    }

    co_await ctx.step("9c");
    const auto chosen = choose_mandate(ctx, offered);
    {
        auto e = msg("mandate_choice", c, kMis).plain("mand_id", chosen);
        if (cloud)
            e.add("sigma_c", FieldTag::signature,
                  dss_sign(ctx.world.signing_key(c).sk, to_bytes(chosen)).encode());
        ctx.send(e);
    }
    const auto choice = ctx.receive(kMis, "mandate_choice");
    const auto mand_id = choice.text("mand_id");
    ctx.remember_text(kMis, "mand_id", mand_id);

    Envelope response = msg("mandate_response", kMis, kMoa);
    if (cloud) {
        co_await ctx.step("11a");
        auto fetch = msg("mandate_fetch", kMis, kCr).plain("mand_id", mand_id);
        fetch.add("sigma_c", FieldTag::signature, choice.value("sigma_c"));
        sign(ctx, fetch);
        ctx.send(fetch);

        co_await ctx.step("11b");
        const auto f = ctx.receive_signed(kCr, "mandate_fetch", kMis);
        const auto* rep = ctx.world.cr.find_representative(cr_sspin.value);
        ctx.require(rep != nullptr, "unknown representative");
        ctx.require(verify_detached(rep->sig_pk, f.value("mand_id"), f.value("sigma_c")),
                    "citizen signature on the mandate id does not verify");
        const auto& row = cr_fetch_row(ctx.world.cr, f.text("mand_id"));
        ctx.require(row.representative_sspin == cr_sspin.value,
                    "mandate not held by this representative");
        const auto c_mis = re_encrypt(
            params, kMis,
            encode_attribute({std::string(label::mandate), row.mandate.encode()}), ctx.rng);
        auto record = msg("mandate_record", kCr, kMis);
        record.add("c_mis", FieldTag::ciphertext, c_mis.encode());
        sign(ctx, record);

        co_await ctx.step("11c");
        ctx.send(record);

        co_await ctx.step("12");
        const auto rec = ctx.receive_signed(kMis, "mandate_record", kCr);
        const auto c_moa = re_reencrypt(params, ReCiphertext::decode(rec.value("c_mis")),
                                        ctx.world.rekey(kMis, kMis, kMoa));
        ctx.remember(kMis, "c_moaid", c_moa.encode(), FieldTag::ciphertext);
        response.add("c_moaid", FieldTag::ciphertext, c_moa.encode());
        sign(ctx, response);
    } else {
        const auto it = std::find_if(mis_mandates.begin(), mis_mandates.end(),
                                     [&](const Mandate& m) { return m.mand_id == mand_id; });
        ctx.require(it != mis_mandates.end(), "mandate " + mand_id + " was not offered");

        co_await ctx.step("10");
        const auto e_mandate = it->encode();
        ctx.remember(kMis, "e_mandate", e_mandate, FieldTag::plaintext);
        response.add("e_mandate", FieldTag::plaintext, e_mandate);
        sign(ctx, response);
    }

    co_await ctx.step("13");
    ctx.send(response);
    const auto mr = ctx.receive_signed(kMoa, "mandate_response", kMis);
    Envelope saml;
    if (cloud) {
        ctx.remember(kMoa, "c_moaid", mr.value("c_moaid"), FieldTag::ciphertext);

        co_await ctx.step("14");
        auto labels = keep_labels({sector});
        auto cts = visible_blocks(ctx, link.mil, labels);
        labels.insert(labels.begin(), std::string(label::mandate));
        cts.insert(cts.begin(), ReCiphertext::decode(mr.value("c_moaid")));
        saml = saml_cloud(ctx, labels,
                          re_reencrypt_batch(params, cts, ctx.world.rekey(kMoa, kMoa, sp)));
        sign(ctx, saml);
    } else {
        const auto e_mandate = mr.value("e_mandate");
        ctx.remember(kMoa, "e_mandate", e_mandate, FieldTag::plaintext);
        remember_mandate(ctx, kMoa, "mandate.", Mandate::decode(e_mandate));
    }

    co_await ctx.step("15");
    if (!cloud) {
        const auto sspin = moa_derive_sspin(ctx, link.il, sector);
        saml = saml_current(ctx, link.il, sspin);
        saml.add(std::string(label::mandate), FieldTag::plaintext, mr.value("e_mandate"));
        sign(ctx, saml);
    }
    ctx.send(saml);

    co_await ctx.step("16a");
    const auto resp = ctx.receive_signed(sp, "saml_response", kMoa);
    std::map<std::string, Bytes> attrs;
    if (cloud) {
        co_await ctx.step("16b");
        attrs = sp_decrypt(ctx, resp);
    } else {
        attrs = sp_extract(resp);
    }
    Mandate::decode(attrs.at(std::string(label::mandate)));

    co_await ctx.step("17");
    ctx.outcome.sp_attributes = attrs;
}

// ---------------------------------------------------------------------------
// Foreign citizen

FlowTask foreign_flow(SessionContext& ctx)
{
    const auto c = citizen_actor(ctx);
    const auto sp = ctx.spec.sp;
    const bool cloud = ctx.cloud();
    const auto& params = ctx.world.params;

    co_await ctx.step("1");
    ctx.send(msg("access_request", c, sp).plain("purpose", "foreign"));

    co_await ctx.step("2");
    ctx.receive(sp, "access_request");
    ctx.send(msg("auth_request", sp, kMoa).plain("sp", sp).plain("purpose", "foreign"));
    const auto auth = ctx.receive(kMoa, "auth_request");
    const auto sector = ctx.world.sector_of(auth.text("sp"));
    ctx.remember_text(kMoa, "sector", sector);

    co_await ctx.step("3");
    ctx.send(msg("country_page", kMoa, c));

    co_await ctx.step("4");
    ctx.receive(c, "country_page");
    const auto cert = Certificate::decode(ctx.world.credential(c, "certificate"));
    ctx.send(msg("country_choice", c, kMoa).plain("country", cert.country));
    const auto country = ctx.receive(kMoa, "country_choice").text("country");
    ctx.remember_text(kMoa, "country", country);

    co_await ctx.step("5");
    ctx.send(msg("stork_request", kMoa, kPeps).plain("sp", sp));

    co_await ctx.step("6");
    const auto sreq = ctx.receive(kPeps, "stork_request");
    ctx.send(msg("stork_forward", kPeps, kFidp).plain("sp", sreq.text("sp")));

    co_await ctx.step("7");
    const auto fwd = ctx.receive(kFidp, "stork_forward");
    const auto text = consent_text(fwd.text("sp"), ctx.id, ctx.bus.now());
    ctx.metadata.push_back(text);
    ctx.send(msg("sig_request", kFidp, c).plain("consent", text));

    co_await ctx.step("8");
    consent(ctx, "signature");
    ccs_sign(ctx, kFidp, "certificate");
    const auto sresp = ctx.receive_signed(kFidp, "sig_response", c);
    const auto fcert = Certificate::decode(sresp.value("certificate"));
    ctx.require(verify_certificate(ctx.world.verification_key(kFidp), fcert),
                "F-IdP authentication failed: credential not accepted");
    ctx.require(fcert.public_key == ctx.world.verification_key(c),
                "F-IdP authentication failed: certificate does not belong to the citizen");
    ctx.require(verify_detached(fcert.public_key, to_bytes(text), sresp.value("qsig")),
                "F-IdP authentication failed: qualified signature does not verify");
    const auto fc_bytes = ctx.world.keys(kFidp).get(keykind::record, c).material;
    const auto fc = ForeignCitizenData::decode(fc_bytes);

    co_await ctx.step("9");
    {
        auto e = msg("fidp_response", kFidp, kPeps);
        if (cloud) {
            e.add("c_peps", FieldTag::ciphertext,
                  re_encrypt(params, kPeps, fc_bytes, ctx.rng).encode());
        } else {
            e.plain("given_name", fc.given_name)
                .plain("family_name", fc.family_name)
                .plain("date_of_birth", fc.date_of_birth)
                .plain("identifier", fc.identifier);
            e.add("certificate", FieldTag::plaintext, sresp.value("certificate"));
            e.add("qsig", FieldTag::signature, sresp.value("qsig"));
        }
        sign(ctx, e);
        ctx.send(e);
    }
    const auto fr = ctx.receive_signed(kPeps, "fidp_response", kFidp);
    auto stork = msg("stork_response", kPeps, kMoa);
    if (cloud) {
        ctx.remember(kPeps, "c_peps", fr.value("c_peps"), FieldTag::ciphertext);

        co_await ctx.step("10");
        const auto c_moa = re_reencrypt(params, ReCiphertext::decode(fr.value("c_peps")),
                                        ctx.world.rekey(kPeps, kPeps, kMoa));
        ctx.remember(kPeps, "c_moaid", c_moa.encode(), FieldTag::ciphertext);
        stork.add("c_moaid", FieldTag::ciphertext, c_moa.encode());
    } else {
        for (const auto* n : {"given_name", "family_name", "date_of_birth", "identifier"}) {
            ctx.remember(kPeps, n, fr.value(n), FieldTag::plaintext);
            stork.add(n, FieldTag::plaintext, fr.value(n));
        }
        ctx.remember(kPeps, "certificate", fr.value("certificate"), FieldTag::plaintext);
        stork.add("certificate", FieldTag::plaintext, fr.value("certificate"));
    }
    sign(ctx, stork);

    co_await ctx.step("11");
    ctx.send(stork);
    const auto st = ctx.receive_signed(kMoa, "stork_response", kPeps);
    auto spr = msg("spr_request", kMoa, kSprGw);
    if (cloud) {
        ctx.remember(kMoa, "c_moaid", st.value("c_moaid"), FieldTag::ciphertext);

        co_await ctx.step("12");
        const auto c_spr = re_reencrypt(params, ReCiphertext::decode(st.value("c_moaid")),
                                        ctx.world.rekey(kMoa, kMoa, kSprGw));
        ctx.remember(kMoa, "c_sprgw", c_spr.encode(), FieldTag::ciphertext);
        spr.add("c_sprgw", FieldTag::ciphertext, c_spr.encode());
        spr.plain("sector", sector);
    } else {
        for (const auto* n : {"given_name", "family_name", "date_of_birth", "identifier"}) {
            ctx.remember(kMoa, n, st.value(n), FieldTag::plaintext);
            spr.add(n, FieldTag::plaintext, st.value(n));
        }
        ctx.remember(kMoa, "certificate", st.value("certificate"), FieldTag::plaintext);
        spr.add("certificate", FieldTag::plaintext, st.value("certificate"));
    }
    sign(ctx, spr);

    co_await ctx.step("13");
    ctx.send(spr);
    const auto sq = ctx.receive_signed(kSprGw, "spr_request", kMoa);
    auto reg = msg("register_request", kSprGw, kSr);
    if (cloud) {
        ctx.remember(kSprGw, "c_sprgw", sq.value("c_sprgw"), FieldTag::ciphertext);
        ctx.remember_text(kSprGw, "sector", sq.text("sector"));

        co_await ctx.step("14");
        const auto c_sr = re_reencrypt(params, ReCiphertext::decode(sq.value("c_sprgw")),
                                       ctx.world.rekey(kSprGw, kSprGw, kSr));
        ctx.remember(kSprGw, "c_sr", c_sr.encode(), FieldTag::ciphertext);
        reg.add("c_sr", FieldTag::ciphertext, c_sr.encode());
        reg.plain("sector", sq.text("sector"));
    } else {
        const auto qcert = Certificate::decode(sq.value("certificate"));
        ctx.require(verify_certificate(ctx.world.verification_key(kFidp), qcert),
                    "citizen certificate not issued by the F-IdP");
        for (const auto* n : {"given_name", "family_name", "date_of_birth", "identifier"}) {
            ctx.remember(kSprGw, n, sq.value(n), FieldTag::plaintext);
            reg.add(n, FieldTag::plaintext, sq.value(n));
        }
        ctx.remember(kSprGw, "certificate", sq.value("certificate"), FieldTag::plaintext);
        ctx.remember_text(kSprGw, "country", qcert.country);
        reg.plain("country", qcert.country);
        reg.add("certificate", FieldTag::plaintext, sq.value("certificate"));
    }
    sign(ctx, reg);

    co_await ctx.step("15a");
    ctx.send(reg);
    auto reg_resp = msg("register_response", kSr, kSprGw);
    const auto sra = ctx.world.sra_keys(kSr);
    if (cloud) {
        co_await ctx.step("15b");
        const auto rq = ctx.receive_signed(kSr, "register_request", kSprGw);
        const auto c_sr = ReCiphertext::decode(rq.value("c_sr"));
        ctx.outcome.facts["sr_level"] = std::to_string(c_sr.level);
        const auto data = re_decrypt(params, ctx.world.identity_key(kSr, kSr), c_sr);
        const auto reg_out = register_foreign_citizen(ctx.world.sr, sra, params, data,
                                                      rq.text("sector"), ctx.world.scenario.sectors,
                                                      ctx.rng, kSprGw);
        put_modified_link(reg_resp, reg_out.link);
    } else {
        const auto rq = ctx.receive_signed(kSr, "register_request", kSprGw);
        const ForeignCitizenData data{rq.text("given_name"), rq.text("family_name"),
                                      rq.text("date_of_birth"), rq.text("country"),
                                      rq.text("identifier")};
        const auto key = sr_register(ctx.world.sr, data);
        const auto rcert = Certificate::decode(rq.value("certificate"));
        put_plain_link(reg_resp, issue_identity_link(sra, ctx.world.sr, key, rcert.reference()));
    }
    sign(ctx, reg_resp);

    co_await ctx.step("15c");
    ctx.send(reg_resp);
    const auto rr = ctx.receive_signed(kSprGw, "register_response", kSr);
    auto fwd_link = msg("il_forward", kSprGw, kMoa);
    IdentityLink plain_link;
    std::vector<std::string> labels;
    std::vector<ReCiphertext> blocks;
    if (cloud) {
        const auto mil = take_modified_link(ctx, rr);
        ctx.require(verify_modified_identity_link(sra_pk(ctx), mil),
                    "modified identity link: redactable signature does not verify");
        labels = keep_labels({sector});
        blocks = visible_blocks(ctx, mil, labels);
        for (std::size_t i = 0; i < labels.size(); ++i)
            ctx.remember(kSprGw, "il." + labels[i], blocks[i].encode(), FieldTag::ciphertext);

        co_await ctx.step("16");
        const auto moved =
            re_reencrypt_batch(params, blocks, ctx.world.rekey(kSprGw, kSprGw, kMoa));
        for (std::size_t i = 0; i < labels.size(); ++i) {
            ctx.remember(kSprGw, "c_moaid." + labels[i], moved[i].encode(), FieldTag::ciphertext);
            fwd_link.add("c." + labels[i], FieldTag::ciphertext, moved[i].encode());
        }
    } else {
        plain_link = take_plain_link(rr);
        ctx.require(verify_identity_link(sra_pk(ctx), plain_link),
                    "identity link: SRA signature does not verify");
        remember_plain_link(ctx, kSprGw, plain_link);
        put_plain_link(fwd_link, plain_link);
    }
    sign(ctx, fwd_link);

    co_await ctx.step("17");
    ctx.send(fwd_link);
    const auto lf = ctx.receive_signed(kMoa, "il_forward", kSprGw);
    Envelope saml;
    if (cloud) {
        std::vector<ReCiphertext> cts;
        for (const auto& l : labels) {
            ctx.remember(kMoa, "c." + l, lf.value("c." + l), FieldTag::ciphertext);
            cts.push_back(ReCiphertext::decode(lf.value("c." + l)));
        }

        co_await ctx.step("18b");
        saml = saml_cloud(ctx, labels,
                          re_reencrypt_batch(params, cts, ctx.world.rekey(kMoa, kMoa, sp)));
    } else {
        const auto il = take_plain_link(lf);
        ctx.require(verify_identity_link(sra_pk(ctx), il),
                    "identity link: SRA signature does not verify");
        remember_plain_link(ctx, kMoa, il);

        co_await ctx.step("18a");
        saml = saml_current(ctx, il, moa_derive_sspin(ctx, il, sector));
    }

    co_await ctx.step("18c");
    sign(ctx, saml);

    co_await ctx.step("19");
    ctx.send(saml);

    co_await ctx.step("20");
    const auto resp = ctx.receive_signed(sp, "saml_response", kMoa);
    const auto attrs = cloud ? sp_decrypt(ctx, resp) : sp_extract(resp);

    co_await ctx.step("21");
    ctx.outcome.sp_attributes = attrs;
}

FlowFn flow_for(UseCase use_case)
{
    switch (use_case) {
    case UseCase::austrian: return &austrian_flow;
    case UseCase::representation: return &representation_flow;
    case UseCase::foreign: return &foreign_flow;
    }
    throw ParameterError("unknown use case");
}

namespace {

FlowOutcome run_one(World& world, SessionSpec spec)
{
    return run_sessions(world, {std::move(spec)}).outcomes.front();
}

}  // namespace

FlowOutcome run_flow_austrian(World& world, const std::string& citizen, const std::string& sp,
                              Mode mode)
{
    return run_one(world, {UseCase::austrian, mode, citizen, sp, {}});
}

FlowOutcome run_flow_representation(World& world, const std::string& citizen,
                                    const std::string& sp, const std::string& selected_mandate,
                                    Mode mode)
{
    return run_one(world, {UseCase::representation, mode, citizen, sp, selected_mandate});
}

FlowOutcome run_flow_foreign(World& world, const std::string& foreign_citizen,
                             const std::string& sp, Mode mode)
{
    return run_one(world, {UseCase::foreign, mode, foreign_citizen, sp, {}});
}

}  // namespace eidcloud
