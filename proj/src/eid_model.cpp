#include "eidcloud/eid_model.hpp"

#include <algorithm>

#include "eidcloud/errors.hpp"
#include "eidcloud/hash.hpp"
#include "json_util.hpp"

namespace eidcloud {

namespace {

constexpr std::string_view kAttributeMagic = "ATR1";
constexpr std::string_view kCertMagic = "CRT1";
constexpr std::string_view kLinkMagic = "IDL1";
constexpr std::string_view kModifiedMagic = "MIL1";
constexpr std::string_view kMandateMagic = "MND1";
constexpr std::string_view kForeignMagic = "FCD1";

void expect_magic(ByteReader& r, std::string_view magic)
{
    if (r.remaining() < magic.size() || r.raw(magic.size()) != to_bytes(magic))
        throw DecodeError("unexpected record type");
}

Bytes hex_field(const detail::Json& j, std::string_view key, std::string_view where)
{
    try {
        return from_hex(detail::string_member(j, key, where));
    } catch (const DecodeError&) {
        throw ScenarioError(std::string(where) + ": field \"" + std::string(key) +
                            "\" is not hex");
    }
}

}  // namespace

std::vector<Sector> default_sectors()
{
    return {"tax",     "health",    "social",    "education", "labour",
            "housing", "transport", "justice",   "environment", "business"};
}

SourcePin derive_source_pin(ByteView pin_key, std::string_view register_label,
                            std::string_view number, std::string subject)
{
    if (pin_key.empty()) throw KeyError("empty sourcePIN derivation key");
    if (number.empty()) throw ParameterError("empty register number");
    const auto input = to_bytes(std::string(register_label) + ":" + std::string(number));
    return {hmac_sha256(pin_key, input), std::move(subject)};
}

SsPin derive_sspin(const SourcePin& source_pin, const Sector& sector)
{
    if (sector.empty()) throw ParameterError("empty sector label");
    return {sha256({source_pin.value, to_bytes(":"), to_bytes(sector)}), sector};
}

std::string label::sspin(const Sector& sector) { return "sspin:" + sector; }

Bytes encode_attribute(const Attribute& a)
{
    return ByteWriter().raw(to_bytes(kAttributeMagic)).str(a.label).blob(a.value).take();
}

Attribute decode_attribute(ByteView in)
{
    ByteReader r(in);
    expect_magic(r, kAttributeMagic);
    Attribute a;
    a.label = r.str();
    a.value = r.blob();
    r.expect_done();
    return a;
}

SraKeys sra_keygen(Rng& rng)
{
    SraKeys k;
    k.signing = dss_keygen("SRA", rng);
    k.pin_key = rng.bytes(32);
    return k;
}

// ---------------------------------------------------------------------------

Bytes Certificate::tbs() const
{
    return ByteWriter()
        .raw(to_bytes(kCertMagic))
        .str(subject)
        .str(country)
        .blob(public_key)
        .str(issuer)
        .take();
}

Bytes Certificate::encode() const
{
    return ByteWriter().raw(tbs()).blob(issuer_sig.encode()).take();
}

Certificate Certificate::decode(ByteView in)
{
    ByteReader r(in);
    expect_magic(r, kCertMagic);
    Certificate c;
    c.subject = r.str();
    c.country = r.str();
    c.public_key = r.blob();
    c.issuer = r.str();
    c.issuer_sig = Signature::decode(r.blob());
    r.expect_done();
    return c;
}

Bytes Certificate::reference() const { return sha256(encode()); }

Certificate issue_certificate(const SigKeyPair& ca, std::string subject, std::string country,
                              Bytes public_key)
{
    Certificate c;
    c.subject = std::move(subject);
    c.country = std::move(country);
    c.public_key = std::move(public_key);
    c.issuer = ca.owner;
    c.issuer_sig = dss_sign(ca.sk, c.tbs());
    return c;
}

bool verify_certificate(ByteView ca_pk, const Certificate& cert)
{
    return cert.issuer_sig.signer_pk_hint == key_fingerprint(ca_pk) &&
           dss_verify(ca_pk, cert.tbs(), cert.issuer_sig);
}

// ---------------------------------------------------------------------------

std::string_view to_string(RegisterKind kind)
{
    switch (kind) {
    case RegisterKind::CRR: return "CRR";
    case RegisterKind::SR: return "SR";
    case RegisterKind::CR: return "CR";
    }
    return "?";
}

const PersonRecord* RegisterStore::find_person(std::string_view citizen_id) const
{
    for (const auto& p : persons)
        if (p.citizen_id == citizen_id) return &p;
    return nullptr;
}

const RepresentativeRow* RegisterStore::find_representative(ByteView sspin) const
{
    for (const auto& r : representatives)
        if (equal_ct(r.sspin, sspin)) return &r;
    return nullptr;
}

Bytes Mandate::encode() const
{
    ByteWriter w;
    w.raw(to_bytes(kMandateMagic));
    for (const auto& [name, value] : fields()) w.str(value);
    return w.take();
}

Mandate Mandate::decode(ByteView in)
{
    ByteReader r(in);
    expect_magic(r, kMandateMagic);
    Mandate m;
    m.mand_id = r.str();
    m.mandator_register_number = r.str();
    m.mandator_name = r.str();
    m.representative_name = r.str();
    m.representative_dob = r.str();
    m.empowerment = r.str();
    m.register_label = r.str();
    r.expect_done();
    return m;
}

std::vector<std::pair<std::string, std::string>> Mandate::fields() const
{
    return {{"mand_id", mand_id},
            {"mandator_register_number", mandator_register_number},
            {"mandator_name", mandator_name},
            {"representative_name", representative_name},
            {"representative_dob", representative_dob},
            {"empowerment", empowerment},
            {"register", register_label}};
}

std::string format_register(const RegisterStore& store)
{
    detail::Json j;
    j["register"] = std::string(to_string(store.kind));
    if (store.kind == RegisterKind::CR) j["sector"] = store.sector;
    if (store.kind != RegisterKind::CR) {
        auto persons = detail::Json::array();
        for (const auto& p : store.persons) {
            detail::Json row;
            row["citizen_id"] = p.citizen_id;
            row["given_name"] = p.given_name;
            row["family_name"] = p.family_name;
            row["date_of_birth"] = p.date_of_birth;
            row["register_number"] = p.register_number;
            if (!p.country.empty()) row["country"] = p.country;
            persons.push_back(row);
        }
        j["persons"] = persons;
    } else {
        auto lps = detail::Json::array();
        for (const auto& l : store.legal_persons)
            lps.push_back({{"register_number", l.register_number}, {"name", l.name}});
        j["legal_persons"] = lps;
        auto reps = detail::Json::array();
        for (const auto& r : store.representatives)
            reps.push_back({{"sspin", to_hex(r.sspin)},
                            {"citizen_id", r.citizen_id},
                            {"pke_pk", to_hex(r.pke_pk)},
                            {"sig_pk", to_hex(r.sig_pk)}});
        j["representatives"] = reps;
        auto rows = detail::Json::array();
        for (const auto& m : store.mandates) {
            detail::Json row;
            row["representative_sspin"] = to_hex(m.representative_sspin);
            for (const auto& [k, v] : m.mandate.fields()) row[k] = v;
            rows.push_back(row);
        }
        j["mandates"] = rows;
    }
    return j.dump(2) + "\n";
}

RegisterStore parse_register(std::string_view text)
{
    const auto j = detail::parse_json(text, "register");
    RegisterStore s;
    const auto kind = detail::string_member(j, "register", "register");
    if (kind == "CRR") s.kind = RegisterKind::CRR;
    else if (kind == "SR") s.kind = RegisterKind::SR;
    else if (kind == "CR") s.kind = RegisterKind::CR;
    else throw ScenarioError("register: unknown register kind \"" + kind + "\"");

    if (s.kind != RegisterKind::CR) {
        for (const auto& row : detail::array_member(j, "persons", "register")) {
            PersonRecord p;
            p.citizen_id = detail::string_member(row, "citizen_id", "person");
            p.given_name = detail::string_member(row, "given_name", p.citizen_id);
            p.family_name = detail::string_member(row, "family_name", p.citizen_id);
            p.date_of_birth = detail::string_member(row, "date_of_birth", p.citizen_id);
            p.register_number = detail::string_member(row, "register_number", p.citizen_id);
            p.country = detail::optional_string(row, "country");
            s.persons.push_back(std::move(p));
        }
        return s;
    }
    s.sector = detail::string_member(j, "sector", "register");
    for (const auto& row : detail::array_member(j, "legal_persons", "register"))
        s.legal_persons.push_back({detail::string_member(row, "register_number", "legal person"),
                                   detail::string_member(row, "name", "legal person")});
    for (const auto& row : detail::array_member(j, "representatives", "register"))
        s.representatives.push_back({hex_field(row, "sspin", "representative"),
                                     detail::string_member(row, "citizen_id", "representative"),
                                     hex_field(row, "pke_pk", "representative"),
                                     hex_field(row, "sig_pk", "representative")});
    for (const auto& row : detail::array_member(j, "mandates", "register")) {
        MandateRow m;
        const auto id = detail::string_member(row, "mand_id", "mandate");
        m.representative_sspin = hex_field(row, "representative_sspin", id);
        m.mandate.mand_id = id;
        m.mandate.mandator_register_number =
            detail::string_member(row, "mandator_register_number", id);
        m.mandate.mandator_name = detail::string_member(row, "mandator_name", id);
        m.mandate.representative_name = detail::string_member(row, "representative_name", id);
        m.mandate.representative_dob = detail::string_member(row, "representative_dob", id);
        m.mandate.empowerment = detail::string_member(row, "empowerment", id);
        m.mandate.register_label = detail::string_member(row, "register", id);
        s.mandates.push_back(std::move(m));
    }
    return s;
}

std::vector<Mandate> cr_find_mandates(const RegisterStore& cr, const SsPin& sspin_cr)
{
    std::vector<Mandate> out;
    for (const auto& row : cr.mandates)
        if (equal_ct(row.representative_sspin, sspin_cr.value)) out.push_back(row.mandate);
    std::sort(out.begin(), out.end(),
              [](const Mandate& a, const Mandate& b) { return a.mand_id < b.mand_id; });
    return out;
}

const MandateRow& cr_fetch_row(const RegisterStore& cr, std::string_view mand_id)
{
    for (const auto& row : cr.mandates)
        if (row.mandate.mand_id == mand_id) return row;
    throw LookupError("unknown mandate id \"" + std::string(mand_id) + "\"");
}

Mandate cr_fetch_mandate(const RegisterStore& cr, std::string_view mand_id)
{
    return cr_fetch_row(cr, mand_id).mandate;
}

// ---------------------------------------------------------------------------

Bytes IdentityLink::signed_bytes() const
{
    ByteWriter w;
    w.raw(to_bytes(kLinkMagic)).u32(static_cast<std::uint32_t>(attributes.size()));
    for (const auto& a : attributes) w.str(a.label).blob(a.value);
    return w.take();
}

const Bytes& IdentityLink::get(std::string_view l) const
{
    for (const auto& a : attributes)
        if (a.label == l) return a.value;
    throw LookupError("identity link has no attribute \"" + std::string(l) + "\"");
}

Bytes IdentityLink::encode() const
{
    return ByteWriter().raw(signed_bytes()).blob(issuer_sig.encode()).take();
}

IdentityLink IdentityLink::decode(ByteView in)
{
    ByteReader r(in);
    expect_magic(r, kLinkMagic);
    IdentityLink link;
    const auto n = r.u32();
    if (n > r.remaining()) throw DecodeError("attribute count exceeds input");
    for (std::uint32_t i = 0; i < n; ++i) {
        Attribute a;
        a.label = r.str();
        a.value = r.blob();
        link.attributes.push_back(std::move(a));
    }
    link.issuer_sig = Signature::decode(r.blob());
    r.expect_done();
    return link;
}

SourcePin source_pin_of(const SraKeys& sra, const RegisterStore& reg, std::string_view citizen_id)
{
    const auto* p = reg.find_person(citizen_id);
    if (!p || reg.kind == RegisterKind::CR)
        throw IssuanceError("citizen \"" + std::string(citizen_id) + "\" is not registered in " +
                            std::string(to_string(reg.kind)));
    if (reg.kind == RegisterKind::CRR)
        return derive_source_pin(sra.pin_key, "CRR", p->register_number, p->citizen_id);
    return derive_source_pin(sra.pin_key, "SR", p->country + "/" + p->register_number,
                             p->citizen_id);
}

IdentityLink issue_identity_link(const SraKeys& sra, const RegisterStore& reg,
                                 std::string_view citizen_id, ByteView cert_ref)
{
    const auto pin = source_pin_of(sra, reg, citizen_id);
    const auto* p = reg.find_person(citizen_id);
    IdentityLink link;
    link.attributes = {{std::string(label::given_name), to_bytes(p->given_name)},
                       {std::string(label::family_name), to_bytes(p->family_name)},
                       {std::string(label::date_of_birth), to_bytes(p->date_of_birth)},
                       {std::string(label::source_pin), pin.value},
                       {std::string(label::cert_ref), Bytes(cert_ref.begin(), cert_ref.end())}};
    link.issuer_sig = dss_sign(sra.signing.sk, link.signed_bytes());
    return link;
}

bool verify_identity_link(ByteView sra_pk, const IdentityLink& link)
{
    std::size_t pins = 0;
    for (const auto& a : link.attributes) pins += a.label == label::source_pin;
    return pins == 1 && link.issuer_sig.signer_pk_hint == key_fingerprint(sra_pk) &&
           dss_verify(sra_pk, link.signed_bytes(), link.issuer_sig);
}

std::vector<std::string> modified_link_labels(const std::vector<Sector>& sectors)
{
    std::vector<std::string> out{std::string(label::given_name), std::string(label::family_name),
                                 std::string(label::date_of_birth)};
    for (const auto& s : sectors) out.push_back(label::sspin(s));
    return out;
}

std::size_t ModifiedIdentityLink::index_of(std::string_view l) const
{
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == l) return i + 1;
    throw LookupError("modified identity link has no block \"" + std::string(l) + "\"");
}

Bytes ModifiedIdentityLink::encode() const
{
    ByteWriter w;
    w.raw(to_bytes(kModifiedMagic)).u32(static_cast<std::uint32_t>(labels.size()));
    for (const auto& l : labels) w.str(l);
    w.blob(encode_signed(blocks, rs_sig));
    return w.take();
}

ModifiedIdentityLink ModifiedIdentityLink::decode(ByteView in)
{
    ByteReader r(in);
    expect_magic(r, kModifiedMagic);
    ModifiedIdentityLink link;
    const auto n = r.u32();
    if (n > r.remaining()) throw DecodeError("label count exceeds input");
    for (std::uint32_t i = 0; i < n; ++i) link.labels.push_back(r.str());
    std::tie(link.blocks, link.rs_sig) = decode_signed(r.blob());
    r.expect_done();
    if (link.blocks.size() != link.labels.size()) throw DecodeError("layout does not match blocks");
    return link;
}

ModifiedIdentityLink issue_modified_identity_link(const SraKeys& sra, const ReParams& params,
                                                  const RegisterStore& reg,
                                                  std::string_view citizen_id,
                                                  const std::vector<Sector>& sectors, Rng& rng,
                                                  const std::string& target)
{
    if (sectors.empty()) throw IssuanceError("empty sector list");
    const auto pin = source_pin_of(sra, reg, citizen_id);
    const auto* p = reg.find_person(citizen_id);
    ModifiedIdentityLink link;
    link.labels = modified_link_labels(sectors);
    std::vector<Bytes> plain{
        encode_attribute({link.labels[0], to_bytes(p->given_name)}),
        encode_attribute({link.labels[1], to_bytes(p->family_name)}),
        encode_attribute({link.labels[2], to_bytes(p->date_of_birth)})};
    for (const auto& s : sectors)
        plain.push_back(encode_attribute({label::sspin(s), derive_sspin(pin, s).value}));
    std::vector<Bytes> blocks;
    for (const auto& c : re_encrypt_batch(params, target, plain, rng)) blocks.push_back(c.encode());
    link.blocks = BlockMessage::from(std::move(blocks));
    link.rs_sig = rs_sign(sra.signing.sk, link.blocks, rng);
    return link;
}

bool verify_modified_identity_link(ByteView sra_pk, const ModifiedIdentityLink& link)
{
    if (link.labels.size() != link.blocks.size()) return false;
    if (link.rs_sig.root_sig.signer_pk_hint != key_fingerprint(sra_pk)) return false;
    for (const auto& b : link.blocks.blocks) {
        if (!b) continue;
        try {
            ReCiphertext::decode(*b);
        } catch (const DecodeError&) {
            return false;
        }
    }
    return rs_verify(sra_pk, link.blocks, link.rs_sig);
}

ModifiedIdentityLink redact_modified_link(const ModifiedIdentityLink& link, ByteView sra_pk,
                                          const std::vector<std::string>& keep)
{
    std::vector<std::size_t> drop;
    for (std::size_t i = 0; i < link.labels.size(); ++i)
        if (link.blocks.blocks[i] &&
            std::find(keep.begin(), keep.end(), link.labels[i]) == keep.end())
            drop.push_back(i + 1);
    auto out = link;
    std::tie(out.blocks, out.rs_sig) = rs_redact(link.blocks, sra_pk, link.rs_sig, drop);
    return out;
}

// ---------------------------------------------------------------------------

SpRegistration register_service_provider(SpRegistry& registry, const ReParams& params,
                                         const ReMasterKey& msk, const std::string& sp_id,
                                         const Sector& sector, Rng& rng)
{
    if (sp_id.empty()) throw RegistrationError("empty service provider id");
    if (sector.empty()) throw RegistrationError("service provider \"" + sp_id + "\" has no sector");
    if (registry.sectors.count(sp_id))
        throw RegistrationError("service provider \"" + sp_id + "\" is already registered");
    const auto moaid = re_keygen(params, msk, "MOA-ID");
    SpRegistration out{re_keygen(params, msk, sp_id), re_rkgen(params, moaid, "MOA-ID", sp_id, rng)};
    registry.sectors.emplace(sp_id, sector);
    return out;
}

Bytes ForeignCitizenData::encode() const
{
    return ByteWriter()
        .raw(to_bytes(kForeignMagic))
        .str(given_name)
        .str(family_name)
        .str(date_of_birth)
        .str(country)
        .str(identifier)
        .take();
}

ForeignCitizenData ForeignCitizenData::decode(ByteView in)
{
    ByteReader r(in);
    expect_magic(r, kForeignMagic);
    ForeignCitizenData fc;
    fc.given_name = r.str();
    fc.family_name = r.str();
    fc.date_of_birth = r.str();
    fc.country = r.str();
    fc.identifier = r.str();
    r.expect_done();
    return fc;
}

std::string foreign_citizen_key(const ForeignCitizenData& fc)
{
    return "SR-" + digest_hex(to_bytes(fc.country + "/" + fc.identifier)).substr(0, 16);
}

std::string sr_register(RegisterStore& sr, const ForeignCitizenData& fc)
{
    if (sr.kind != RegisterKind::SR) throw RegistrationError("not a supplementary register");
    if (fc.identifier.empty() || fc.country.empty() || fc.given_name.empty() ||
        fc.family_name.empty() || fc.date_of_birth.empty())
        throw RegistrationError("incomplete foreign citizen data");
    const auto key = foreign_citizen_key(fc);
    if (!sr.find_person(key))
        sr.persons.push_back(
            {key, fc.given_name, fc.family_name, fc.date_of_birth, fc.identifier, fc.country});
    return key;
}

ForeignRegistration register_foreign_citizen(RegisterStore& sr, const SraKeys& sra,
                                             const ReParams& params, ByteView fc_data,
                                             const Sector& sector,
                                             const std::vector<Sector>& sectors, Rng& rng,
                                             const std::string& target)
{
    ForeignCitizenData fc;
    try {
        fc = ForeignCitizenData::decode(fc_data);
    } catch (const DecodeError& e) {
        throw RegistrationError(std::string("malformed foreign citizen data: ") + e.what());
    }
    if (std::find(sectors.begin(), sectors.end(), sector) == sectors.end())
        throw RegistrationError("unknown sector \"" + sector + "\"");
    ForeignRegistration out;
    out.created = !sr.find_person(foreign_citizen_key(fc));
    out.citizen_key = sr_register(sr, fc);
    const auto full = issue_modified_identity_link(sra, params, sr, out.citizen_key, sectors, rng,
                                                   target);
    out.link = redact_modified_link(
        full, sra.signing.pk,
        {std::string(label::given_name), std::string(label::family_name),
         std::string(label::date_of_birth), label::sspin(sector)});
    return out;
}

}  // namespace eidcloud
