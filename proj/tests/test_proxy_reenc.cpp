#include <gtest/gtest.h>

#include "eidcloud/errors.hpp"
#include "eidcloud/proxy_reenc.hpp"

using namespace eidcloud;

namespace {

struct World {
    ReParams params;
    ReMasterKey msk;
    Rng rng{7};

    explicit World(ReBackendKind kind = ReBackendKind::pairing, int max_levels = 4)
    {
        std::tie(params, msk) = re_setup(80, max_levels, 1, kind);
    }

    ReIdentityKey key(const std::string& id) { return re_keygen(params, msk, id); }
    ReEncKey rk(const std::string& a, const std::string& b)
    {
        return re_rkgen(params, key(a), a, b, rng);
    }
};

World& pairing_world()
{
    static World w;
    return w;
}

}  // namespace

TEST(ReSetup, SeededSetupIsDeterministic)
{
    auto [p1, m1] = re_setup(128, 4, 1);
    auto [p2, m2] = re_setup(128, 4, 1);
    EXPECT_EQ(p1.encode(), p2.encode());
    EXPECT_EQ(m1.msk, m2.msk);
    auto [p3, m3] = re_setup(128, 4, 2);
    EXPECT_NE(m1.msk, m3.msk);
    EXPECT_EQ(p1.security_level(), 128);
    EXPECT_TRUE(p1.sound());

    Rng rng(1);
    const auto sk = re_keygen(p1, m1, "MOA-ID");
    const auto c = re_encrypt(p1, "MOA-ID", to_bytes("m"), rng);
    EXPECT_EQ(re_decrypt(p1, sk, c), to_bytes("m"));
}

TEST(ReSetup, RejectsBadArguments)
{
    EXPECT_THROW(re_setup(80, 0, 1), ParameterError);
    EXPECT_THROW(re_setup(81, 4, 1), ParameterError);
    auto& w = pairing_world();
    EXPECT_THROW(re_keygen(w.params, w.msk, ""), ParameterError);
}

TEST(ReSetup, ParamsSerializationRoundTrip)
{
    auto& w = pairing_world();
    const auto decoded = ReParams::decode(w.params.encode());
    EXPECT_EQ(decoded.encode(), w.params.encode());
    EXPECT_EQ(decoded.max_levels, 4);
    const auto c = re_encrypt(decoded, "S_1", to_bytes("abc"), w.rng);
    EXPECT_EQ(re_decrypt(w.params, w.key("S_1"), c), to_bytes("abc"));
    auto bad = w.params.encode();
    bad[0] ^= 1;
    EXPECT_THROW(ReParams::decode(bad), DecodeError);
}

TEST(ReEncrypt, RoundTripEmptyAndProbabilistic)
{
    auto& w = pairing_world();
    const auto sk = w.key("PEPS");
    const auto m = to_bytes("foreign citizen data");
    const auto c = re_encrypt(w.params, "PEPS", m, w.rng);
    EXPECT_EQ(c.level, 0u);
    EXPECT_EQ(c.target_id, "PEPS");
    EXPECT_EQ(re_decrypt(w.params, sk, c), m);
    EXPECT_EQ(re_decrypt(w.params, sk, re_encrypt(w.params, "PEPS", {}, w.rng)), Bytes{});
    EXPECT_NE(re_encrypt(w.params, "PEPS", m, w.rng).body, c.body);
}

TEST(ReKeygen, IdentityBinding)
{
    auto& w = pairing_world();
    const auto c = re_encrypt(w.params, "S_2", to_bytes("x"), w.rng);
    EXPECT_THROW(re_decrypt(w.params, w.key("S_1"), c), DecryptionError);
    // relabelling the header does not help a wrong key
    auto relabelled = c;
    relabelled.target_id = "S_1";
    EXPECT_THROW(re_decrypt(w.params, w.key("S_1"), relabelled), DecryptionError);
}

TEST(ReKeygen, SameIdentityTwiceGivesEquivalentKeys)
{
    auto& w = pairing_world();
    const auto k1 = w.key("MIS");
    const auto k2 = w.key("MIS");
    for (int i = 0; i < 10; ++i) {
        const auto m = w.rng.bytes(1 + w.rng.uniform(64));
        const auto c = re_encrypt(w.params, "MIS", m, w.rng);
        EXPECT_EQ(re_decrypt(w.params, k1, c), m);
        EXPECT_EQ(re_decrypt(w.params, k2, c), m);
    }
}

TEST(ReRkgen, KeyIdentityMismatchIsKeyError)
{
    auto& w = pairing_world();
    EXPECT_THROW(re_rkgen(w.params, w.key("MIS"), "MOA-ID", "S_1", w.rng), KeyError);
    auto forged = w.key("MOA-ID");
    forged.sk = w.key("MIS").sk;
    EXPECT_THROW(re_rkgen(w.params, forged, "MOA-ID", "S_1", w.rng), KeyError);
}

TEST(ReRkgen, OneHopCorrectness)
{
    auto& w = pairing_world();
    const auto rk = w.rk("MOA-ID", "S_1");
    const auto m = to_bytes("given_name=Max");
    const auto c = re_reencrypt(w.params, re_encrypt(w.params, "MOA-ID", m, w.rng), rk);
    EXPECT_EQ(c.target_id, "S_1");
    EXPECT_EQ(c.level, 1u);
    EXPECT_EQ(re_decrypt(w.params, w.key("S_1"), c), m);
    EXPECT_THROW(re_decrypt(w.params, w.key("MOA-ID"), c), DecryptionError);
}

TEST(ReRkgen, MisusedOnOtherIdentity)
{
    auto& w = pairing_world();
    const auto rk = w.rk("MOA-ID", "S_1");
    const auto sk_s1 = w.key("S_1");
    for (int i = 0; i < 10; ++i) {
        const auto m = w.rng.bytes(16);
        const auto c = re_encrypt(w.params, "MIS", m, w.rng);
        EXPECT_THROW(re_reencrypt(w.params, c, rk), RoutingError);
        auto relabelled = c;
        relabelled.target_id = "MOA-ID";
        const auto out = re_reencrypt(w.params, relabelled, rk);
        EXPECT_THROW(re_decrypt(w.params, sk_s1, out), DecryptionError);
    }
}

TEST(ReRkgen, Unidirectional)
{
    auto& w = pairing_world();
    const auto rk = w.rk("A", "B");
    const ReEncKey reversed{"B", "A", rk.rk};
    const auto sk_a = w.key("A");
    for (int i = 0; i < 5; ++i) {
        const auto c = re_encrypt(w.params, "B", w.rng.bytes(24), w.rng);
        const auto out = re_reencrypt(w.params, c, reversed);
        EXPECT_EQ(out.target_id, "A");
        EXPECT_THROW(re_decrypt(w.params, sk_a, out), DecryptionError);
    }
}

TEST(ReReencrypt, ThreeHopForeignChain)
{
    auto& w = pairing_world();
    const auto fc = to_bytes("{\"given_name\":\"Maria\",\"identifier\":\"DE/AT/123\"}");
    auto c = re_encrypt(w.params, "PEPS", fc, w.rng);
    EXPECT_EQ(re_decrypt(w.params, w.key("PEPS"), c), fc);
    const std::vector<std::string> chain{"PEPS", "MOA-ID", "SPR-GW", "SR"};
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        c = re_reencrypt(w.params, c, w.rk(chain[i], chain[i + 1]));
        EXPECT_EQ(c.level, i + 1);
        EXPECT_EQ(c.target_id, chain[i + 1]);
    }
    EXPECT_EQ(re_decrypt(w.params, w.key("SR"), c), fc);
}

TEST(ReReencrypt, DepthLimit)
{
    World w(ReBackendKind::pairing, 2);
    auto c = re_encrypt(w.params, "A", to_bytes("m"), w.rng);
    c = re_reencrypt(w.params, c, w.rk("A", "B"));
    c = re_reencrypt(w.params, c, w.rk("B", "C"));
    EXPECT_EQ(c.level, 2u);
    EXPECT_THROW(re_reencrypt(w.params, c, w.rk("C", "D")), DepthError);
    EXPECT_EQ(re_decrypt(w.params, w.key("C"), c), to_bytes("m"));
}

TEST(ReReencrypt, SymmetricBodyUntouched)
{
    auto& w = pairing_world();
    const auto c = re_encrypt(w.params, "MOA-ID", Bytes(40, 0x11), w.rng);
    const auto out = re_reencrypt(w.params, c, w.rk("MOA-ID", "S_1"));
    const auto tail = 4 + 12 + 40 + 16;
    ASSERT_GT(out.body.size(), c.body.size());
    EXPECT_TRUE(std::equal(c.body.end() - tail, c.body.end(), out.body.end() - tail));
}

TEST(ReReencrypt, ProxyNeverHoldsPlaintext)
{
    auto& w = pairing_world();
    const auto rk = w.rk("MOA-ID", "MIS");
    const auto m = to_bytes("Mustermann");
    std::vector<Bytes> seen;
    const auto c = re_encrypt(w.params, "MOA-ID", m, w.rng);
    re_set_transform_observer([&](ByteView v) { seen.emplace_back(v.begin(), v.end()); });
    const auto out = re_reencrypt(w.params, c, rk);
    re_set_transform_observer(nullptr);
    ASSERT_FALSE(seen.empty());
    for (const auto& v : seen) {
        EXPECT_NE(v, m);
        EXPECT_FALSE(contains(v, m));
    }
    EXPECT_FALSE(contains(out.encode(), m));
    EXPECT_EQ(re_decrypt(w.params, w.key("MIS"), out), m);
}

TEST(ReDecrypt, TamperedBodySweep)
{
    auto& w = pairing_world();
    const auto sk = w.key("S_3");
    const auto c = re_encrypt(w.params, "S_3", to_bytes("ab"), w.rng);
    for (std::size_t i = 0; i < c.body.size(); ++i) {
        auto bad = c;
        bad.body[i] ^= 0x80;
        EXPECT_THROW(re_decrypt(w.params, sk, bad), DecryptionError) << "byte " << i;
    }
}

TEST(ReDecrypt, TamperedReencryptedBody)
{
    auto& w = pairing_world();
    const auto c = re_reencrypt(w.params, re_encrypt(w.params, "A", to_bytes("q"), w.rng),
                                w.rk("A", "B"));
    const auto sk = w.key("B");
    for (std::size_t i = 0; i < c.body.size(); i += 7) {
        auto bad = c;
        bad.body[i] ^= 0x01;
        EXPECT_THROW(re_decrypt(w.params, sk, bad), DecryptionError) << "byte " << i;
    }
}

TEST(ReCiphertextEncoding, RoundTripAndHeaderTamper)
{
    auto& w = pairing_world();
    const auto c = re_encrypt(w.params, "SR", to_bytes("hello"), w.rng);
    const auto enc = c.encode();
    EXPECT_TRUE(std::equal(kReMagic.begin(), kReMagic.end(), enc.begin()));
    EXPECT_EQ(ReCiphertext::decode(enc), c);
    const auto sk = w.key("SR");
    const std::size_t header = enc.size() - c.body.size() - 4;
    for (std::size_t i = 0; i < header + 4; ++i) {
        auto bad = enc;
        bad[i] ^= 0x01;
        EXPECT_THROW(re_decrypt(w.params, sk, ReCiphertext::decode(bad)), Error) << i;
    }
    EXPECT_THROW(ReCiphertext::decode(Bytes(enc.begin(), enc.end() - 1)), DecodeError);
}

TEST(ReEncKeyEncoding, RoundTrip)
{
    auto& w = pairing_world();
    const auto rk = w.rk("MIS", "CR");
    const auto d = ReEncKey::decode(rk.encode());
    EXPECT_EQ(d.from_id, rk.from_id);
    EXPECT_EQ(d.to_id, rk.to_id);
    EXPECT_EQ(d.rk, rk.rk);
}

TEST(ReProperty, KHopCorrectness)
{
    auto& w = pairing_world();
    Rng rng(99);
    for (int trial = 0; trial < 24; ++trial) {
        const auto k = trial % 4;
        std::vector<std::string> ids;
        for (int i = 0; i <= k; ++i) ids.push_back("id_" + std::to_string(rng.uniform(6)) + "_" +
                                                   std::to_string(i));
        const auto m = rng.bytes(rng.uniform(200));
        auto c = re_encrypt(w.params, ids[0], m, rng);
        for (int i = 0; i < k; ++i) {
            const auto prev = c.level;
            c = re_reencrypt(w.params, c, w.rk(ids[i], ids[i + 1]));
            EXPECT_EQ(c.level, prev + 1);
        }
        EXPECT_EQ(re_decrypt(w.params, w.key(ids.back()), c), m);
    }
}

TEST(ReTestDouble, FlaggedAndFunctional)
{
    World w(ReBackendKind::trusted_dealer);
    EXPECT_FALSE(w.params.sound());
    EXPECT_EQ(w.params.kind(), ReBackendKind::trusted_dealer);
    auto c = re_encrypt(w.params, "PEPS", to_bytes("fc"), w.rng);
    c = re_reencrypt(w.params, c, w.rk("PEPS", "MOA-ID"));
    c = re_reencrypt(w.params, c, w.rk("MOA-ID", "SR"));
    EXPECT_EQ(re_decrypt(w.params, w.key("SR"), c), to_bytes("fc"));
    EXPECT_THROW(re_decrypt(w.params, w.key("MOA-ID"), c), DecryptionError);
    EXPECT_THROW(re_decrypt(pairing_world().params, pairing_world().key("SR"), c),
                 DecryptionError);
    const auto decoded = ReParams::decode(w.params.encode());
    EXPECT_FALSE(decoded.sound());
}

TEST(ReBackendKindNames, Parse)
{
    EXPECT_EQ(parse_backend_kind("pairing"), ReBackendKind::pairing);
    EXPECT_EQ(parse_backend_kind("test-double"), ReBackendKind::trusted_dealer);
    EXPECT_THROW(parse_backend_kind("rsa"), ParameterError);
}

TEST(ReBatch, ParallelMatchesSerial)
{
    auto& w = pairing_world();
    std::vector<Bytes> blocks;
    for (int i = 0; i < 6; ++i) blocks.push_back(to_bytes("block " + std::to_string(i)));
    Rng r1(5), r2(5);
    const auto par = re_encrypt_batch(w.params, "MOA-ID", blocks, r1);
    const auto ser = re_encrypt_batch_serial(w.params, "MOA-ID", blocks, r2);
    EXPECT_EQ(par, ser);
    EXPECT_EQ(r1.bytes(8), r2.bytes(8));

    const auto rk = w.rk("MOA-ID", "S_1");
    const auto rpar = re_reencrypt_batch(w.params, par, rk);
    EXPECT_EQ(rpar, re_reencrypt_batch_serial(w.params, ser, rk));
    const auto sk = w.key("S_1");
    EXPECT_EQ(re_decrypt_batch(w.params, sk, rpar), blocks);
    EXPECT_EQ(re_decrypt_batch_serial(w.params, sk, rpar), blocks);
}

TEST(ReBatch, FirstFailureIsReported)
{
    auto& w = pairing_world();
    Rng rng(6);
    auto cs = re_encrypt_batch(w.params, "A", {to_bytes("a"), to_bytes("b"), to_bytes("c")}, rng);
    cs[1].target_id = "B";
    cs[2].level = 9;
    const auto rk = w.rk("A", "C");
    EXPECT_THROW(re_reencrypt_batch(w.params, cs, rk), RoutingError);
    EXPECT_THROW(re_reencrypt_batch_serial(w.params, cs, rk), RoutingError);
}
