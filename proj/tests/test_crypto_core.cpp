#include <gtest/gtest.h>

#include "eidcloud/crypto_core.hpp"
#include "eidcloud/errors.hpp"
#include "eidcloud/hash.hpp"

using namespace eidcloud;

TEST(Bytes, HexRoundTrip)
{
    const Bytes b{0x00, 0x01, 0xab, 0xff};
    EXPECT_EQ(to_hex(b), "0001abff");
    EXPECT_EQ(from_hex("0001ABff"), b);
    EXPECT_THROW(from_hex("abc"), DecodeError);
    EXPECT_THROW(from_hex("zz"), DecodeError);
}

TEST(Bytes, ReaderRejectsTruncation)
{
    auto enc = ByteWriter().u32(7).str("hello").blob(Bytes{1, 2, 3}).take();
    ByteReader r(enc);
    EXPECT_EQ(r.u32(), 7u);
    EXPECT_EQ(r.str(), "hello");
    EXPECT_EQ(r.blob(), (Bytes{1, 2, 3}));
    EXPECT_NO_THROW(r.expect_done());
    enc.pop_back();
    ByteReader r2(enc);
    r2.u32();
    r2.str();
    EXPECT_THROW(r2.blob(), DecodeError);
}

TEST(Bytes, Contains)
{
    const auto hay = to_bytes("the quick brown fox");
    EXPECT_TRUE(contains(hay, to_bytes("brown")));
    EXPECT_FALSE(contains(hay, to_bytes("browm")));
    EXPECT_FALSE(contains(hay, Bytes{}));
}

TEST(Hash, KnownVectors)
{
    // FIPS 180-2 and RFC 4231 test case 2
    EXPECT_EQ(to_hex(sha256(to_bytes("abc"))),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(to_hex(hmac_sha256(to_bytes("Jefe"), to_bytes("what do ya want for nothing?"))),
              "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST(Rng, SeededIsReproducible)
{
    Rng a(42), b(42), c(43);
    const auto x = a.bytes(100);
    EXPECT_EQ(x, b.bytes(100));
    EXPECT_NE(x, c.bytes(100));
    EXPECT_EQ(Rng(5).fork("x").bytes(16), Rng(5).fork("x").bytes(16));
    EXPECT_NE(Rng(5).fork("x").bytes(16), Rng(5).fork("y").bytes(16));
    Rng s1(9), s2(9);
    EXPECT_EQ(s1.split().bytes(8), s2.split().bytes(8));
    EXPECT_EQ(s1.bytes(8), s2.bytes(8));
}

TEST(Rng, UniformStaysInRange)
{
    Rng r(1);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(r.uniform(7), 7u);
    EXPECT_THROW(r.uniform(0), ParameterError);
}

TEST(Dss, SignVerify)
{
    const auto kp = dss_keygen("SRA", 1);
    const auto msg = to_bytes("identity link");
    const auto sig = dss_sign(kp.sk, msg);
    EXPECT_TRUE(dss_verify(kp.pk, msg, sig));
    EXPECT_FALSE(dss_verify(kp.pk, to_bytes("identity linK"), sig));
    EXPECT_FALSE(dss_verify(dss_keygen("SRA", 2).pk, msg, sig));
    EXPECT_EQ(dss_public_from_secret(kp.sk), kp.pk);
}

TEST(Dss, SeededKeygenIsDeterministic)
{
    EXPECT_EQ(dss_keygen("SRA", 7).sk, dss_keygen("SRA", 7).sk);
    EXPECT_NE(dss_keygen("SRA", 7).sk, dss_keygen("MOA-ID", 7).sk);
    EXPECT_NE(dss_keygen("SRA").sk, dss_keygen("SRA").sk);
    EXPECT_THROW(dss_keygen(""), KeyError);
}

TEST(Dss, EveryBitFlipRejected)
{
    const auto kp = dss_keygen("S_1", 3);
    const auto msg = to_bytes("m");
    const auto sig = dss_sign(kp.sk, msg);
    for (std::size_t i = 0; i < sig.bytes.size() * 8; ++i) {
        auto bad = sig;
        bad.bytes[i / 8] ^= static_cast<std::uint8_t>(1u << (i % 8));
        EXPECT_FALSE(dss_verify(kp.pk, msg, bad)) << i;
    }
}

TEST(Dss, SignatureEncoding)
{
    const auto kp = dss_keygen("CR", 1);
    const auto sig = dss_sign(kp.sk, to_bytes("x"));
    EXPECT_EQ(Signature::decode(sig.encode()), sig);
    EXPECT_THROW(dss_sign(Bytes(3, 0), to_bytes("x")), KeyError);
    EXPECT_FALSE(dss_verify(Bytes(5, 1), to_bytes("x"), sig));
}

TEST(Se, RoundTripAndTamper)
{
    Rng rng(1);
    const auto key = rng.bytes(kSymKeySize);
    const auto aad = to_bytes("aad");
    const auto ct = se_encrypt(key, to_bytes("secret"), aad, rng);
    EXPECT_EQ(se_decrypt(key, ct, aad), to_bytes("secret"));
    EXPECT_THROW(se_decrypt(key, ct, to_bytes("other")), DecryptionError);
    for (std::size_t i = 0; i < ct.size(); ++i) {
        auto bad = ct;
        bad[i] ^= 0x01;
        EXPECT_THROW(se_decrypt(key, bad, aad), DecryptionError) << i;
    }
    EXPECT_EQ(se_decrypt(key, se_encrypt(key, {}, aad, rng), aad), Bytes{});
}

TEST(Pke, RoundTripWrongKey)
{
    Rng rng(2);
    const auto a = pke_keygen("C_1", rng);
    const auto b = pke_keygen("C_2", rng);
    const auto ct = pke_encrypt(a.pk, to_bytes("hello"), rng);
    EXPECT_EQ(pke_decrypt(a.sk, ct), to_bytes("hello"));
    EXPECT_THROW(pke_decrypt(b.sk, ct), DecryptionError);
    EXPECT_NE(pke_encrypt(a.pk, to_bytes("hello"), rng), ct);
}

TEST(Hybrid, RoundTripAndEncoding)
{
    Rng rng(3);
    const auto kp = pke_keygen("C_1", rng);
    const Bytes payload(5000, 0x5a);
    const auto c = hybrid_encrypt(kp.pk, payload, rng);
    EXPECT_EQ(hybrid_decrypt(kp.sk, c), payload);
    const auto enc = c.encode();
    EXPECT_TRUE(std::equal(kHybridMagic.begin(), kHybridMagic.end(), enc.begin()));
    EXPECT_EQ(HybridCiphertext::decode(enc), c);
    auto bad = c;
    bad.body[10] ^= 1;
    EXPECT_THROW(hybrid_decrypt(kp.sk, bad), DecryptionError);
    EXPECT_THROW(hybrid_decrypt(pke_keygen("C_2", rng).sk, c), DecryptionError);
}

TEST(KeyStore, FormatParseRoundTrip)
{
    KeyStore ks;
    ks.owner = "MOA-ID";
    ks.add("dss-sk", "sign", Bytes{1, 2, 3});
    ks.add("re-rk", "MOA-ID->S_1", Bytes{0xff});
    const auto text = format_keystore(ks);
    EXPECT_EQ(parse_keystore(text), ks);
    EXPECT_EQ(parse_keystore(text).get("re-rk", "MOA-ID->S_1").material, Bytes{0xff});
    EXPECT_THROW(ks.get("re-rk", "missing"), KeyStoreError);
}

TEST(KeyStore, ErrorsCarryLineNumber)
{
    try {
        parse_keystore("eidcloud-keystore 1\nowner X\nkey a b zz\n");
        FAIL();
    } catch (const KeyStoreError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_keystore("not a keystore\n"), KeyStoreError);
}

TEST(Dss, MessageBitFlipsRejected)
{
    const auto kp = dss_keygen("MOA-ID", 4);
    const auto msg = to_bytes("authentication data block");
    const auto sig = dss_sign(kp.sk, msg);
    for (std::size_t i = 0; i < msg.size() * 8; ++i) {
        auto bad = msg;
        bad[i / 8] ^= static_cast<std::uint8_t>(1u << (i % 8));
        EXPECT_FALSE(dss_verify(kp.pk, bad, sig)) << i;
    }
}

TEST(Hybrid, EmptyPayload)
{
    Rng rng(5);
    const auto kp = pke_keygen("C_1", rng);
    EXPECT_EQ(hybrid_decrypt(kp.sk, hybrid_encrypt(kp.pk, {}, rng)), Bytes{});
    EXPECT_THROW(hybrid_encrypt(Bytes(7, 1), to_bytes("x"), rng), KeyError);
}

TEST(Hybrid, EveryBodyByteFlipFails)
{
    Rng rng(6);
    const auto kp = pke_keygen("C_1", rng);
    const auto c = hybrid_encrypt(kp.pk, rng.bytes(16), rng);
    for (std::size_t i = 0; i < c.body.size(); ++i) {
        auto bad = c;
        bad.body[i] ^= 0xff;
        EXPECT_THROW(hybrid_decrypt(kp.sk, bad), DecryptionError) << i;
    }
    for (std::size_t i = 0; i < c.wrapped_key.size(); ++i) {
        auto bad = c;
        bad.wrapped_key[i] ^= 0xff;
        EXPECT_THROW(hybrid_decrypt(kp.sk, bad), DecryptionError) << i;
    }
}

TEST(Hybrid, RoundTripUpTo64KiB)
{
    Rng rng(7);
    const auto kp = pke_keygen("C_1", rng);
    for (std::size_t n : {0ul, 1ul, 15ul, 16ul, 17ul, 1000ul, 65536ul}) {
        const auto m = rng.bytes(n);
        EXPECT_EQ(hybrid_decrypt(kp.sk, hybrid_encrypt(kp.pk, m, rng)), m) << n;
    }
}

TEST(Hybrid, RepeatedEncryptionDiffers)
{
    Rng rng(8);
    const auto kp = pke_keygen("C_1", rng);
    for (int i = 0; i < 100; ++i) {
        const auto m = rng.bytes(rng.uniform(100));
        EXPECT_NE(hybrid_encrypt(kp.pk, m).encode(), hybrid_encrypt(kp.pk, m).encode());
    }
}
