#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "eidcloud/eid_model.hpp"
#include "eidcloud/errors.hpp"

using namespace eidcloud;

namespace {

struct Fixture {
    Rng rng{1};
    SraKeys sra = sra_keygen(rng);
    std::pair<ReParams, ReMasterKey> re = re_setup(kDefaultSecurityLevel, kDefaultMaxLevels, 1);
    RegisterStore crr;

    Fixture()
    {
        crr.kind = RegisterKind::CRR;
        crr.persons.push_back(
            {"max", "Maximilian", "Mustermann", "1984-03-17", "000123456789", "AT"});
    }
};

std::string random_name(Rng& rng)
{
    std::string s;
    for (int i = 0; i < 12; ++i) s.push_back(static_cast<char>('a' + rng.uniform(26)));
    return s;
}

}  // namespace

TEST(SsPin, GoldenValues)
{
    // computed with Python hashlib: sha256(bytes(range(32)) + b":" + sector)
    SourcePin sp;
    sp.value.resize(32);
    std::iota(sp.value.begin(), sp.value.end(), 0);
    EXPECT_EQ(to_hex(derive_sspin(sp, "tax").value),
              "daa6279cddc1b14891aaca4158ff23139ff927ffbe36c72891b4de3b25579d20");
    EXPECT_EQ(to_hex(derive_sspin(sp, "health").value),
              "56bc512919a2505c5dc596484f239852d5fb641fb7dd8b05b4f1919353f7edbd");
    EXPECT_EQ(derive_sspin(sp, "tax"), derive_sspin(sp, "tax"));
    EXPECT_EQ(derive_sspin(sp, "tax").sector, "tax");
    EXPECT_THROW(derive_sspin(sp, ""), ParameterError);
}

TEST(SourcePin, GoldenValue)
{
    // Python: hmac.new(bytes([7]*32), b"CRR:000123456789", sha256)
    const auto pin = derive_source_pin(Bytes(32, 7), "CRR", "000123456789", "max");
    EXPECT_EQ(to_hex(pin.value),
              "3136f5f47a54163aa4e915ee8e60c2fba57ce893affc9964ef44f637cda76283");
    EXPECT_EQ(pin.subject, "max");
    EXPECT_NE(derive_source_pin(Bytes(32, 7), "SR", "000123456789", "max").value, pin.value);
    EXPECT_THROW(derive_source_pin(Bytes(32, 7), "CRR", "", "x"), ParameterError);
}

TEST(SsPin, SectorSeparationCollisionSearch)
{
    Rng rng(2);
    const auto sectors = default_sectors();
    std::set<Bytes> seen;
    for (int i = 0; i < 10000; ++i) {
        const SourcePin sp{rng.bytes(32), "x"};
        for (const auto& s : sectors) {
            const auto v = derive_sspin(sp, s).value;
            ASSERT_EQ(v.size(), 32u);
            ASSERT_TRUE(seen.insert(v).second) << "collision at " << i << " " << s;
        }
    }
}

TEST(Certificate, IssueVerifyTamper)
{
    Rng rng(3);
    const auto ca = dss_keygen("SRA", rng);
    const auto holder = dss_keygen("max", rng);
    const auto cert = issue_certificate(ca, "Maximilian Mustermann", "AT", holder.pk);
    EXPECT_TRUE(verify_certificate(ca.pk, cert));
    EXPECT_EQ(Certificate::decode(cert.encode()), cert);
    EXPECT_FALSE(verify_certificate(dss_keygen("other", rng).pk, cert));
    const auto enc = cert.encode();
    for (std::size_t i = 0; i < enc.size(); ++i) {
        auto bad = enc;
        bad[i] ^= 0x01;
        bool ok = false;
        try {
            ok = verify_certificate(ca.pk, Certificate::decode(bad));
        } catch (const DecodeError&) {
        }
        EXPECT_FALSE(ok) << i;
    }
}

TEST(IdentityLink, IssueAndVerify)
{
    Fixture f;
    const Bytes ref(32, 0xcc);
    const auto link = issue_identity_link(f.sra, f.crr, "max", ref);
    EXPECT_TRUE(verify_identity_link(f.sra.signing.pk, link));
    EXPECT_EQ(to_string(link.get(label::given_name)), "Maximilian");
    EXPECT_EQ(link.get(label::source_pin), source_pin_of(f.sra, f.crr, "max").value);
    EXPECT_EQ(link.get(label::cert_ref), ref);
    EXPECT_EQ(IdentityLink::decode(link.encode()), link);
    EXPECT_THROW(issue_identity_link(f.sra, f.crr, "nobody", ref), IssuanceError);
    EXPECT_THROW(link.get("missing"), LookupError);

    auto tampered = link;
    tampered.attributes[2].value = to_bytes("1984-03-18");
    EXPECT_FALSE(verify_identity_link(f.sra.signing.pk, tampered));
    auto twice = link;
    twice.attributes.push_back(link.attributes[3]);
    EXPECT_FALSE(verify_identity_link(f.sra.signing.pk, twice));
    Rng rng(4);
    EXPECT_FALSE(verify_identity_link(dss_keygen("x", rng).pk, link));
}

TEST(ModifiedIdentityLink, LayoutAndDecryption)
{
    Fixture f;
    const auto sectors = default_sectors();
    const auto link =
        issue_modified_identity_link(f.sra, f.re.first, f.crr, "max", sectors, f.rng);
    ASSERT_EQ(link.blocks.size(), 3 + sectors.size());
    EXPECT_TRUE(verify_modified_identity_link(f.sra.signing.pk, link));
    EXPECT_EQ(ModifiedIdentityLink::decode(link.encode()), link);

    const auto moaid = re_keygen(f.re.first, f.re.second, "MOA-ID");
    const auto pin = source_pin_of(f.sra, f.crr, "max");
    for (std::size_t i = 1; i <= link.blocks.size(); ++i) {
        const auto c = ReCiphertext::decode(link.blocks.content(i));
        EXPECT_EQ(c.target_id, "MOA-ID");
        EXPECT_EQ(c.level, 0u);
        const auto a = decode_attribute(re_decrypt(f.re.first, moaid, c));
        EXPECT_EQ(a.label, link.labels[i - 1]);
        if (i > 3) {
            EXPECT_EQ(a.value, derive_sspin(pin, sectors[i - 4]).value);
        }
    }
    EXPECT_EQ(link.index_of(label::sspin("tax")), 4u);
    EXPECT_THROW(link.index_of("sspin:none"), LookupError);
    EXPECT_THROW(issue_modified_identity_link(f.sra, f.re.first, f.crr, "max", {}, f.rng),
                 IssuanceError);
    EXPECT_THROW(issue_modified_identity_link(f.sra, f.re.first, f.crr, "nobody", sectors, f.rng),
                 IssuanceError);
}

TEST(ModifiedIdentityLink, RedactToEverySectorSubset)
{
    Fixture f;
    const std::vector<Sector> sectors{"tax", "health", "social", "business"};
    const auto link =
        issue_modified_identity_link(f.sra, f.re.first, f.crr, "max", sectors, f.rng);
    for (unsigned mask = 0; mask < (1u << sectors.size()); ++mask) {
        std::vector<std::string> keep{std::string(label::given_name),
                                      std::string(label::family_name),
                                      std::string(label::date_of_birth)};
        for (std::size_t i = 0; i < sectors.size(); ++i)
            if (mask & (1u << i)) keep.push_back(label::sspin(sectors[i]));
        const auto r = redact_modified_link(link, f.sra.signing.pk, keep);
        EXPECT_TRUE(verify_modified_identity_link(f.sra.signing.pk, r)) << mask;
        for (std::size_t i = 0; i < sectors.size(); ++i)
            EXPECT_EQ(r.blocks.redacted(4 + i), !(mask & (1u << i)));
    }
}

TEST(ModifiedIdentityLink, TamperedBlockFailsVerification)
{
    Fixture f;
    const auto link =
        issue_modified_identity_link(f.sra, f.re.first, f.crr, "max", {"tax", "health"}, f.rng);
    auto bad = link;
    (*bad.blocks.blocks[3])[40] ^= 1;
    EXPECT_FALSE(verify_modified_identity_link(f.sra.signing.pk, bad));
    bad = link;
    std::swap(bad.blocks.blocks[3], bad.blocks.blocks[4]);
    EXPECT_FALSE(verify_modified_identity_link(f.sra.signing.pk, bad));
}

TEST(ModifiedIdentityLink, ByteScanOverRandomCitizens)
{
    Fixture f;
    Rng rng(5);
    const auto sectors = default_sectors();
    RegisterStore reg;
    reg.kind = RegisterKind::CRR;
    for (int i = 0; i < 100; ++i) {
        const auto id = "c" + std::to_string(i);
        reg.persons.push_back({id, random_name(rng), random_name(rng),
                               "19" + std::to_string(10 + rng.uniform(90)) + "-0" +
                                   std::to_string(1 + rng.uniform(9)) + "-1" +
                                   std::to_string(rng.uniform(10)),
                               std::to_string(100000000000ull + rng.uniform(899999999999ull)),
                               "AT"});
    }
    for (const auto& p : reg.persons) {
        const auto link =
            issue_modified_identity_link(f.sra, f.re.first, reg, p.citizen_id, sectors, rng);
        const auto out = link.encode();
        const auto out_hex = to_bytes(to_hex(out));
        const auto pin = source_pin_of(f.sra, reg, p.citizen_id);
        std::vector<Bytes> needles{pin.value, to_bytes(p.given_name), to_bytes(p.family_name),
                                   to_bytes(p.date_of_birth)};
        for (const auto& s : sectors) needles.push_back(derive_sspin(pin, s).value);
        for (const auto& n : needles) {
            ASSERT_FALSE(contains(out, n)) << p.citizen_id;
            ASSERT_FALSE(contains(out_hex, to_bytes(to_hex(n)))) << p.citizen_id;
        }
    }
}

TEST(ServiceProvider, RegistrationAndCrossDecryption)
{
    Fixture f;
    SpRegistry reg;
    std::vector<SpRegistration> sps;
    for (const auto& [id, sector] : std::vector<std::pair<std::string, std::string>>{
             {"S_1", "tax"}, {"S_2", "tax"}, {"S_3", "health"}})
        sps.push_back(register_service_provider(reg, f.re.first, f.re.second, id, sector, f.rng));
    EXPECT_THROW(register_service_provider(reg, f.re.first, f.re.second, "S_1", "tax", f.rng),
                 RegistrationError);
    EXPECT_EQ(reg.sectors.at("S_3"), "health");

    const auto m = to_bytes("attribute");
    const auto c = re_encrypt(f.re.first, "MOA-ID", m, f.rng);
    for (std::size_t i = 0; i < sps.size(); ++i) {
        const auto ci = re_reencrypt(f.re.first, c, sps[i].rk_moaid_to_sp);
        for (std::size_t j = 0; j < sps.size(); ++j) {
            if (i == j) {
                EXPECT_EQ(re_decrypt(f.re.first, sps[j].sp_key, ci), m);
            } else {
                EXPECT_THROW(re_decrypt(f.re.first, sps[j].sp_key, ci), DecryptionError);
                auto relabelled = ci;
                relabelled.target_id = sps[j].sp_key.id;
                EXPECT_THROW(re_decrypt(f.re.first, sps[j].sp_key, relabelled), DecryptionError);
            }
        }
    }
}

TEST(ForeignCitizen, RegistrationIsIdempotent)
{
    Fixture f;
    RegisterStore sr;
    sr.kind = RegisterKind::SR;
    const auto sectors = default_sectors();
    const ForeignCitizenData fc{"Erika", "Musterfrau", "1979-11-02", "DE", "DE/AT/T22000129"};
    const auto first =
        register_foreign_citizen(sr, f.sra, f.re.first, fc.encode(), "tax", sectors, f.rng);
    EXPECT_TRUE(first.created);
    EXPECT_EQ(sr.persons.size(), 1u);
    EXPECT_TRUE(verify_modified_identity_link(f.sra.signing.pk, first.link));
    std::size_t visible_pins = 0;
    for (std::size_t i = 4; i <= first.link.blocks.size(); ++i)
        visible_pins += !first.link.blocks.redacted(i);
    EXPECT_EQ(visible_pins, 1u);
    EXPECT_FALSE(first.link.blocks.redacted(first.link.index_of(label::sspin("tax"))));

    const auto again =
        register_foreign_citizen(sr, f.sra, f.re.first, fc.encode(), "tax", sectors, f.rng);
    EXPECT_FALSE(again.created);
    EXPECT_EQ(again.citizen_key, first.citizen_key);
    EXPECT_EQ(sr.persons.size(), 1u);

    const auto sprgw = re_keygen(f.re.first, f.re.second, "SPR-GW");
    auto pin_block = [&](const ForeignRegistration& r) {
        const auto c =
            ReCiphertext::decode(r.link.blocks.content(r.link.index_of(label::sspin("tax"))));
        return decode_attribute(re_decrypt(f.re.first, sprgw, c)).value;
    };
    EXPECT_EQ(pin_block(first), pin_block(again));
    const auto pin = derive_source_pin(f.sra.pin_key, "SR", "DE/DE/AT/T22000129", "x");
    EXPECT_EQ(pin_block(first), derive_sspin(pin, "tax").value);

    EXPECT_THROW(register_foreign_citizen(sr, f.sra, f.re.first, Bytes{1, 2, 3}, "tax", sectors,
                                          f.rng),
                 RegistrationError);
    EXPECT_THROW(
        register_foreign_citizen(sr, f.sra, f.re.first, fc.encode(), "nowhere", sectors, f.rng),
        RegistrationError);
}

TEST(CompanyRegister, FindAndFetch)
{
    RegisterStore cr;
    cr.kind = RegisterKind::CR;
    cr.sector = "business";
    const SsPin rep{Bytes(32, 1), "business"};
    const SsPin other{Bytes(32, 2), "business"};
    Mandate m1{"M-2", "FN 1a", "Alpha GmbH", "Max M", "1984-03-17", "tax matters", "CR"};
    Mandate m2{"M-1", "FN 1a", "Alpha GmbH", "Max M", "1984-03-17", "procurement", "CR"};
    cr.mandates = {{rep.value, m1}, {rep.value, m2}};
    const auto found = cr_find_mandates(cr, rep);
    ASSERT_EQ(found.size(), 2u);
    EXPECT_EQ(found[0].mand_id, "M-1");
    EXPECT_EQ(found[1].mand_id, "M-2");
    EXPECT_TRUE(cr_find_mandates(cr, other).empty());
    EXPECT_EQ(cr_fetch_mandate(cr, "M-2"), found[1]);
    EXPECT_THROW(cr_fetch_mandate(cr, "M-9"), LookupError);
    EXPECT_EQ(Mandate::decode(m1.encode()), m1);
}

TEST(RegisterFixture, RoundTripAndDiagnostics)
{
    RegisterStore cr;
    cr.kind = RegisterKind::CR;
    cr.sector = "business";
    cr.legal_persons.push_back({"FN 1a", "Alpha GmbH"});
    cr.representatives.push_back({Bytes(32, 1), "max", Bytes(32, 2), Bytes(32, 3)});
    cr.mandates.push_back(
        {Bytes(32, 1), {"M-1", "FN 1a", "Alpha GmbH", "Max M", "1984-03-17", "x", "CR"}});
    EXPECT_EQ(parse_register(format_register(cr)), cr);

    Fixture f;
    EXPECT_EQ(parse_register(format_register(f.crr)), f.crr);

    try {
        parse_register("{\n  \"register\": \"CRR\",\n  \"persons\": [ oops ]\n}\n");
        FAIL();
    } catch (const ScenarioError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_register("{\"register\": \"XYZ\"}"), ScenarioError);
    EXPECT_THROW(parse_register("{\"register\": \"CRR\", \"persons\": [{}]}"), ScenarioError);
}
