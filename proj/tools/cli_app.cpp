#include "cli_app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>

#include "eidcloud/actors.hpp"
#include "eidcloud/audit.hpp"
#include "eidcloud/harness.hpp"
#include "eidcloud/redactable_sig.hpp"
#include "eidcloud/world.hpp"

namespace eidcloud::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string scenario;
    std::string world;
    std::optional<std::uint64_t> seed;
    std::string mode;
    std::string use_case;
    std::string out;
    std::string backend = "pairing";
    std::string citizen;
    std::string sp;
    std::string mandate;
};

fs::path out_dir(const Options& o)
{
    if (!o.out.empty()) return o.out;
    if (const char* env = std::getenv(kOutEnv); env && *env) return env;
    return "eidcloud-out";
}

/// --world, else --scenario, else <out>/world, else the built-in default scenario.
World obtain_world(const Options& o)
{
    if (!o.world.empty()) return load_world(o.world);
    if (!o.scenario.empty()) {
        auto s = parse_scenario(read_file(o.scenario));
        if (o.seed) s.seed = *o.seed;
        return sra_setup(s, parse_backend_kind(o.backend));
    }
    const auto saved = out_dir(o) / "world";
    if (fs::exists(saved / "scenario.json")) return load_world(saved);
    auto s = default_scenario();
    if (o.seed) s.seed = *o.seed;
    return sra_setup(s, parse_backend_kind(o.backend));
}

void write_out(const fs::path& dir, const std::string& name, const std::string& content)
{
    fs::create_directories(dir);
    write_file_atomic(dir / name, content);
}

std::string first_citizen(const Scenario& s, UseCase uc)
{
    if (uc == UseCase::foreign) {
        if (s.foreign_citizens.empty()) throw ScenarioError("scenario has no foreign citizen");
        return s.foreign_citizens.front().id;
    }
    if (s.citizens.empty()) throw ScenarioError("scenario has no citizen");
    return s.citizens.front().id;
}

void summarize(std::ostream& out, const FlowOutcome& o)
{
    out << o.session << ' ' << to_string(o.use_case) << '/' << to_string(o.mode) << ' '
        << o.citizen << "->" << o.sp << ": " << to_string(o.status) << " at step " << o.step;
    if (!o.reason.empty()) out << " (" << o.reason << ')';
    out << '\n';
    for (const auto& [k, v] : o.sp_attributes) {
        const bool text = std::all_of(v.begin(), v.end(), [](auto c) { return c >= 0x20 && c < 0x7f; });
        out << "  " << k << " = " << (text ? to_string(v) : to_hex(v)) << '\n';
    }
}

void export_run(const fs::path& dir, const RunResult& r)
{
    write_out(dir, "trace.jsonl", export_trace_jsonl(r.trace));
    write_out(dir, "logs.jsonl", export_logs_jsonl(r.logs));
    write_out(dir, "outcomes.jsonl", export_outcomes_jsonl(r.outcomes));
}

int cmd_setup(const Options& o, std::ostream& out)
{
    auto s = o.scenario.empty() ? default_scenario() : parse_scenario(read_file(o.scenario));
    if (o.seed) s.seed = *o.seed;
    const auto world = sra_setup(s, parse_backend_kind(o.backend));
    const auto dir = o.world.empty() ? out_dir(o) / "world" : fs::path(o.world);
    save_world(world, dir);
    out << "world for scenario \"" << s.name << "\" (" << world.actors.size()
        << " actors, backend " << to_string(world.params.kind()) << ") written to "
        << dir.string() << '\n';
    return kOk;
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err)
{
    auto world = obtain_world(o);
    const auto& s = world.scenario;
    SessionSpec spec;
    spec.use_case = parse_use_case(o.use_case);
    spec.mode = o.mode.empty() ? s.default_mode : parse_mode(o.mode);
    spec.citizen = o.citizen.empty() ? first_citizen(s, spec.use_case) : o.citizen;
    if (o.sp.empty() && s.service_providers.empty())
        throw ScenarioError("scenario has no service provider");
    spec.sp = o.sp.empty() ? s.service_providers.front().id : o.sp;
    spec.mandate = o.mandate;
    Scenario check = s;
    check.sessions = {spec};
    validate_scenario(check);

    RunOptions ro;
    ro.seed = o.seed;
    const auto r = run_sessions(world, {spec}, ro);
    const auto dir = out_dir(o);
    export_run(dir, r);
    const auto& oc = r.outcomes.front();
    summarize(out, oc);
    if (oc.status != FlowStatus::completed) {
        err << "session " << oc.session << ' ' << to_string(oc.status) << " at step " << oc.step
            << ": " << oc.reason << '\n';
        return kFailed;
    }
    return kOk;
}

int audit_and_report(const World& world, const RunResult& r, const fs::path& dir,
                     const std::string& table_name, std::ostream& out)
{
    const auto reports = audit_sessions(world, r);
    write_out(dir, "report.json", report_json(reports));
    std::string text;
    try {
        text = render_comparison(reports);
    } catch (const RenderError& e) {
        for (const auto& rep : reports)
            text += "verdict " + std::string(to_string(rep.use_case)) + "/" +
                    std::string(to_string(rep.mode)) + ": " + (rep.pass ? "pass" : "fail") + "\n";
        text += "(no comparison table: " + std::string(e.what()) + ")\n";
    }
    write_out(dir, table_name, text);
    out << text;
    bool pass = true;
    for (const auto& rep : reports) pass = pass && rep.pass;
    for (const auto& oc : r.outcomes)
        if (oc.status == FlowStatus::aborted) {
            out << "session " << oc.session << " aborted at step " << oc.step << ": " << oc.reason
                << '\n';
            pass = false;
        }
    return pass ? kOk : kFailed;
}

int cmd_audit(const Options& o, std::ostream& out)
{
    auto world = obtain_world(o);
    if (!world.params.sound())
        throw AuditRefused("privacy audit refused: the world uses the trusted-dealer test double, "
                           "whose dealer holds every key; set up with --backend pairing");
    auto sessions = world.scenario.sessions;
    if (sessions.empty()) sessions = comparison_sessions(world.scenario);
    RunOptions ro;
    ro.seed = o.seed;
    const auto r = run_sessions(world, sessions, ro);
    const auto dir = out_dir(o);
    export_run(dir, r);
    return audit_and_report(world, r, dir, "audit.txt", out);
}

int cmd_compare(const Options& o, std::ostream& out)
{
    auto world = obtain_world(o);
    if (!world.params.sound())
        throw AuditRefused("comparison refused: the world uses the trusted-dealer test double, "
                           "whose dealer holds every key; set up with --backend pairing");
    RunOptions ro;
    ro.seed = o.seed;
    const auto r = run_sessions(world, comparison_sessions(world.scenario), ro);
    const auto dir = out_dir(o);
    export_run(dir, r);
    return audit_and_report(world, r, dir, "comparison.txt", out);
}

int cmd_demo_rs(const Options& o, std::ostream& out)
{
    out << std::boolalpha;
    Rng rng(o.seed.value_or(1));
    const auto keys = dss_keygen("SRA", rng);
    BlockMessage m;
    for (const auto* b : {"given_name=Maximilian", "family_name=Mustermann",
                          "date_of_birth=1984-03-17", "sspin:tax=...", "sspin:health=..."})
        m.blocks.emplace_back(to_bytes(b));
    const auto sig = rs_sign(keys.sk, m, rng);
    out << "signed " << m.blocks.size() << " blocks, verify: " << rs_verify(keys.pk, m, sig)
        << '\n';
    const auto [rm, rsig] = rs_redact(m, keys.pk, sig, {5});
    out << "redacted block 5, verify: " << rs_verify(keys.pk, rm, rsig) << '\n';
    for (std::size_t i = 0; i < rm.blocks.size(); ++i)
        out << "  block " << i + 1 << ": "
            << (rm.blocks[i] ? to_string(*rm.blocks[i]) : std::string("(redacted)")) << '\n';
    auto tampered = rm;
    tampered.blocks[0] = to_bytes("given_name=Erika");
    out << "tampered block 1, verify: " << rs_verify(keys.pk, tampered, rsig) << '\n';
    return kOk;
}

int cmd_demo_pre(const Options& o, std::ostream& out)
{
    const auto seed = o.seed.value_or(1);
    const auto [params, msk] = re_setup(80, 4, seed, parse_backend_kind(o.backend));
    Rng rng(seed);
    const std::vector<std::string> ids{"MOA-ID", "MIS", "CR", "SP"};
    std::vector<ReIdentityKey> sks;
    for (const auto& id : ids) sks.push_back(re_keygen(params, msk, id));
    const auto payload = to_bytes("mandate M-0001");
    auto c = re_encrypt(params, ids[0], payload, rng);
    out << "backend " << to_string(params.kind()) << ", encrypted for " << c.target_id
        << " (level " << c.level << ", " << c.encode().size() << " bytes)\n";
    for (std::size_t i = 1; i < ids.size(); ++i) {
        const auto rk = re_rkgen(params, sks[i - 1], ids[i - 1], ids[i], rng);
        c = re_reencrypt(params, c, rk);
        out << "re-encrypted " << ids[i - 1] << " -> " << ids[i] << " (level " << c.level << ", "
            << c.encode().size() << " bytes)\n";
    }
    out << "decrypted by " << ids.back() << ": " << to_string(re_decrypt(params, sks.back(), c))
        << '\n';
    try {
        re_decrypt(params, sks[1], c);
        out << "decryption by " << ids[1] << " succeeded\n";
    } catch (const DecryptionError&) {
        out << "decryption by " << ids[1] << " rejected\n";
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Cloud eID ecosystem model: setup, flows, privacy audit", "eidcloud"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--scenario", o.scenario, "Scenario JSON file");
        sub->add_option("--world", o.world, "World directory written by setup");
        sub->add_option("--seed", o.seed, "Seed");
        sub->add_option("--out", o.out, std::string("Output directory (default $") + kOutEnv +
                                            " or ./eidcloud-out)");
        sub->add_option("--backend", o.backend, "Re-encryption backend")
            ->check(CLI::IsMember({"pairing", "test-double"}));
    };
    auto* setup = app.add_subcommand("setup", "Generate and store key stores and registers");
    common(setup);
    auto* run_cmd = app.add_subcommand("run", "Run one session");
    common(run_cmd);
    run_cmd->add_option("--use-case", o.use_case, "austrian | representation | foreign")
        ->required();
    run_cmd->add_option("--mode", o.mode, "current | cloud");
    run_cmd->add_option("--citizen", o.citizen, "Citizen id");
    run_cmd->add_option("--sp", o.sp, "Service provider id");
    run_cmd->add_option("--mandate", o.mandate, "Mandate to select");
    auto* audit = app.add_subcommand("audit", "Run the scenario's sessions and audit them");
    common(audit);
    auto* compare = app.add_subcommand("compare", "Run all six use case/mode pairs and compare");
    common(compare);
    auto* demo_rs = app.add_subcommand("demo-rs", "Sign, redact and verify a block message");
    common(demo_rs);
    auto* demo_pre = app.add_subcommand("demo-pre", "Three-hop proxy re-encryption");
    common(demo_pre);

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*setup) return cmd_setup(o, out);
        if (*run_cmd) return cmd_run(o, out, err);
        if (*audit) return cmd_audit(o, out);
        if (*compare) return cmd_compare(o, out);
        if (*demo_rs) return cmd_demo_rs(o, out);
        if (*demo_pre) return cmd_demo_pre(o, out);
    } catch (const AuditRefused& e) {
        err << e.what() << '\n';
        return kRefused;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace eidcloud::cli
