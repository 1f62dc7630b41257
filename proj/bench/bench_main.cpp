#include <benchmark/benchmark.h>

#include "eidcloud/actors.hpp"
#include "eidcloud/audit.hpp"
#include "eidcloud/proxy_reenc.hpp"
#include "eidcloud/redactable_sig.hpp"

using namespace eidcloud;

namespace {

BlockMessage message(std::size_t blocks)
{
    std::vector<Bytes> contents;
    for (std::size_t i = 0; i < blocks; ++i)
        contents.push_back(to_bytes("block-" + std::to_string(i) + "-Maximilian Mustermann"));
    return BlockMessage::from(contents);
}

struct PreFixture {
    ReParams params;
    ReIdentityKey sk_a, sk_b;
    ReEncKey rk;
    std::vector<Bytes> blocks;

    explicit PreFixture(std::size_t n)
    {
        auto [p, msk] = re_setup(kDefaultSecurityLevel, kDefaultMaxLevels, 7);
        params = p;
        sk_a = re_keygen(params, msk, "MOA-ID");
        sk_b = re_keygen(params, msk, "S_1");
        Rng rng(8);
        rk = re_rkgen(params, sk_a, "MOA-ID", "S_1", rng);
        for (std::size_t i = 0; i < n; ++i) blocks.push_back(to_bytes("il-block-" + std::to_string(i)));
    }
};

}  // namespace

static void BM_RsSign(benchmark::State& state)
{
    const auto keys = rs_keygen("CCS", 1);
    const auto m = message(state.range(0));
    Rng rng(2);
    for (auto _ : state) benchmark::DoNotOptimize(rs_sign(keys.sk, m, rng));
}
BENCHMARK(BM_RsSign)->Arg(4)->Arg(8)->Arg(64);

static void BM_RsVerify(benchmark::State& state)
{
    const auto keys = rs_keygen("CCS", 1);
    const auto m = message(state.range(0));
    const auto sig = rs_sign(keys.sk, m);
    for (auto _ : state) benchmark::DoNotOptimize(rs_verify(keys.pk, m, sig));
}
BENCHMARK(BM_RsVerify)->Arg(4)->Arg(8)->Arg(64);

static void BM_RsRedact(benchmark::State& state)
{
    const auto keys = rs_keygen("CCS", 1);
    const auto m = message(state.range(0));
    const auto sig = rs_sign(keys.sk, m);
    for (auto _ : state) benchmark::DoNotOptimize(rs_redact(m, keys.pk, sig, {1, 2}));
}
BENCHMARK(BM_RsRedact)->Arg(4)->Arg(8)->Arg(64);

static void BM_PreEncrypt(benchmark::State& state)
{
    PreFixture f(1);
    Rng rng(3);
    for (auto _ : state) benchmark::DoNotOptimize(re_encrypt(f.params, "MOA-ID", f.blocks[0], rng));
}
BENCHMARK(BM_PreEncrypt)->Unit(benchmark::kMillisecond);

static void BM_PreReencrypt(benchmark::State& state)
{
    PreFixture f(1);
    Rng rng(3);
    const auto c = re_encrypt(f.params, "MOA-ID", f.blocks[0], rng);
    for (auto _ : state) benchmark::DoNotOptimize(re_reencrypt(f.params, c, f.rk));
}
BENCHMARK(BM_PreReencrypt)->Unit(benchmark::kMillisecond);

static void BM_PreDecrypt(benchmark::State& state)
{
    PreFixture f(1);
    Rng rng(3);
    const auto c = re_reencrypt(f.params, re_encrypt(f.params, "MOA-ID", f.blocks[0], rng), f.rk);
    for (auto _ : state) benchmark::DoNotOptimize(re_decrypt(f.params, f.sk_b, c));
}
BENCHMARK(BM_PreDecrypt)->Unit(benchmark::kMillisecond);

static void BM_PreReencryptBatch(benchmark::State& state)
{
    PreFixture f(state.range(0));
    Rng rng(4);
    const auto cs = re_encrypt_batch(f.params, "MOA-ID", f.blocks, rng);
    for (auto _ : state) benchmark::DoNotOptimize(re_reencrypt_batch(f.params, cs, f.rk));
}
BENCHMARK(BM_PreReencryptBatch)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_PreReencryptBatchSerial(benchmark::State& state)
{
    PreFixture f(state.range(0));
    Rng rng(4);
    const auto cs = re_encrypt_batch(f.params, "MOA-ID", f.blocks, rng);
    for (auto _ : state) benchmark::DoNotOptimize(re_reencrypt_batch_serial(f.params, cs, f.rk));
}
BENCHMARK(BM_PreReencryptBatchSerial)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_PreDecryptBatch(benchmark::State& state)
{
    PreFixture f(state.range(0));
    Rng rng(5);
    const auto cs = re_reencrypt_batch(f.params, re_encrypt_batch(f.params, "MOA-ID", f.blocks, rng), f.rk);
    for (auto _ : state) benchmark::DoNotOptimize(re_decrypt_batch(f.params, f.sk_b, cs));
}
BENCHMARK(BM_PreDecryptBatch)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_PreDecryptBatchSerial(benchmark::State& state)
{
    PreFixture f(state.range(0));
    Rng rng(5);
    const auto cs = re_reencrypt_batch(f.params, re_encrypt_batch(f.params, "MOA-ID", f.blocks, rng), f.rk);
    for (auto _ : state) benchmark::DoNotOptimize(re_decrypt_batch_serial(f.params, f.sk_b, cs));
}
BENCHMARK(BM_PreDecryptBatchSerial)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_Session(benchmark::State& state)
{
    const auto scenario = default_scenario();
    const auto world = sra_setup(scenario);
    const auto spec = scenario.sessions[state.range(0)];
    for (auto _ : state) {
        auto w = world;
        benchmark::DoNotOptimize(run_sessions(w, {spec}));
    }
    state.SetLabel(std::string(to_string(spec.use_case)) + "/" + std::string(to_string(spec.mode)));
}
BENCHMARK(BM_Session)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

static void BM_ScenarioWithAudit(benchmark::State& state)
{
    const auto scenario = default_scenario();
    const auto world = sra_setup(scenario);
    for (auto _ : state) {
        auto w = world;
        const auto run = run_sessions(w, scenario.sessions);
        benchmark::DoNotOptimize(audit_sessions(w, run));
    }
}
BENCHMARK(BM_ScenarioWithAudit)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
