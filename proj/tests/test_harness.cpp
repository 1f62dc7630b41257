#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "eidcloud/actors.hpp"
#include "eidcloud/harness.hpp"
#include "eidcloud/hash.hpp"

using namespace eidcloud;

namespace {

std::vector<SessionSpec> three_sessions()
{
    return {{UseCase::austrian, Mode::cloud, "max", "S_1", {}},
            {UseCase::representation, Mode::cloud, "max", "S_3", "M-0002"},
            {UseCase::foreign, Mode::current, "erika", "S_2", {}}};
}

}  // namespace

TEST(Harness, SessionIds)
{
    EXPECT_EQ(session_id(0), "s001");
    EXPECT_EQ(session_id(41), "s042");
}

TEST(Harness, ConcurrentSessionsInterleaveAndComplete)
{
    auto w = sra_setup(default_scenario());
    const auto r = run_sessions(w, three_sessions());
    ASSERT_EQ(r.outcomes.size(), 3u);
    for (const auto& o : r.outcomes) EXPECT_EQ(o.status, FlowStatus::completed) << o.reason;

    std::size_t switches = 0;
    for (std::size_t i = 1; i < r.trace.records.size(); ++i)
        switches += r.trace.records[i].session != r.trace.records[i - 1].session;
    EXPECT_GT(switches, 10u);

    for (const auto& [sid, _] : r.sessions)
        for (const auto& rec : r.trace.sub_trace(sid)) {
            EXPECT_EQ(rec.session, sid);
            EXPECT_EQ(rec.envelope.correlation, sid);
        }

    // Same attributes as each session run alone.
    for (std::size_t i = 0; i < 3; ++i) {
        auto solo_world = sra_setup(default_scenario());
        const auto solo = run_sessions(solo_world, {three_sessions()[i]});
        EXPECT_EQ(solo.outcomes[0].sp_attributes, r.outcomes[i].sp_attributes) << i;
    }
    const auto& m = r.outcomes[1].sp_attributes.at("mandate");
    EXPECT_EQ(Mandate::decode(m).mand_id, "M-0002");
}

TEST(Harness, MessageConservation)
{
    auto w = sra_setup(default_scenario());
    const auto r = run_sessions(w, default_scenario().sessions);
    EXPECT_EQ(r.trace.sent, r.trace.delivered + r.trace.rejected);
    EXPECT_EQ(r.trace.rejected, 0u);
    EXPECT_EQ(r.trace.records.size(), r.trace.sent);
    std::uint64_t prev = 0;
    for (const auto& rec : r.trace.records) {
        EXPECT_GT(rec.ts, prev);
        prev = rec.ts;
    }
}

TEST(Harness, DeterministicExports)
{
    auto run = [] {
        auto w = sra_setup(default_scenario());
        const auto r = run_sessions(w, default_scenario().sessions);
        return export_trace_jsonl(r.trace) + export_logs_jsonl(r.logs) +
               export_outcomes_jsonl(r.outcomes);
    };
    const auto a = run();
    EXPECT_EQ(a, run());

    auto w = sra_setup(default_scenario());
    RunOptions o;
    o.seed = 12345;
    const auto r = run_sessions(w, default_scenario().sessions, o);
    EXPECT_NE(export_trace_jsonl(r.trace) + export_logs_jsonl(r.logs) +
                  export_outcomes_jsonl(r.outcomes),
              a);
}

TEST(Harness, ExportsAreJsonLines)
{
    auto w = sra_setup(default_scenario());
    const auto r = run_sessions(w, {default_scenario().sessions[1]});
    for (const auto& text : {export_trace_jsonl(r.trace), export_logs_jsonl(r.logs),
                             export_outcomes_jsonl(r.outcomes)}) {
        std::istringstream in(text);
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            EXPECT_TRUE(nlohmann::json::accept(line)) << line;
            ++n;
        }
        EXPECT_GT(n, 0u);
    }
    const auto o = nlohmann::json::parse(export_outcomes_jsonl(r.outcomes));
    EXPECT_EQ(o["status"], "completed");
    EXPECT_EQ(o["step"], "8");
}

TEST(Harness, ObservationCoverage)
{
    auto w = sra_setup(default_scenario());
    const auto r = run_sessions(w, default_scenario().sessions);
    for (const auto& l : r.logs) EXPECT_TRUE(Observatory::instrumented(l.actor)) << l.actor;

    for (const auto& rec : r.trace.records) {
        const auto& env = rec.envelope;
        for (const auto* who : {&env.sender, &env.receiver}) {
            if (!Observatory::instrumented(*who)) continue;
            const auto logs = r.logs_for(rec.session);
            const auto it = std::find_if(logs.begin(), logs.end(),
                                         [&](const ObservationLog& l) { return l.actor == *who; });
            ASSERT_NE(it, logs.end()) << *who;
            for (const auto& f : env.fields) {
                const auto name = env.msg_type + "." + f.name;
                const auto digest = sha256(f.value);
                const bool seen = std::any_of(
                    it->entries.begin(), it->entries.end(), [&](const ObservationEntry& e) {
                        return e.name == name && e.digest == digest && e.visibility == f.tag;
                    });
                EXPECT_TRUE(seen) << *who << " " << name;
            }
        }
    }
    for (const auto& l : r.logs)
        for (const auto& e : l.entries)
            EXPECT_EQ(e.plaintext.has_value(), e.visibility == FieldTag::plaintext) << e.name;
}

TEST(Harness, RoutingErrors)
{
    Observatory obs;
    obs.open_session("s001", UseCase::austrian, Mode::cloud);
    Bus bus({"MOA-ID", "S_1"}, obs);

    Envelope e;
    e.msg_type = "auth_request";
    e.sender = "S_1";
    e.receiver = "S_9";
    e.correlation = "s001";
    EXPECT_THROW(bus.deliver("s001", "2", e), RoutingError);

    e.receiver = "MOA-ID";
    e.add("c", FieldTag::ciphertext, to_bytes("Maximilian"));
    EXPECT_THROW(bus.deliver("s001", "2", e), RoutingError);

    EXPECT_EQ(bus.trace().rejected, 2u);
    EXPECT_EQ(bus.trace().delivered, 0u);
    EXPECT_EQ(bus.trace().sent, 2u);
    EXPECT_FALSE(bus.take("MOA-ID", "s001", "auth_request"));
    // Rejected envelopes never reach an observer.
    EXPECT_TRUE(obs.logs().empty());
}

TEST(Harness, TakeMatchesReceiverCorrelationAndType)
{
    Observatory obs;
    obs.open_session("s001", UseCase::austrian, Mode::cloud);
    obs.open_session("s002", UseCase::austrian, Mode::cloud);
    Bus bus({"MOA-ID", "S_1"}, obs);
    Envelope e;
    e.msg_type = "auth_request";
    e.sender = "S_1";
    e.receiver = "MOA-ID";
    e.correlation = "s001";
    e.plain("n", "1");
    bus.deliver("s001", "2", e);
    e.field("n").value = to_bytes("2");
    bus.deliver("s001", "2", e);
    e.correlation = "s002";
    bus.deliver("s002", "2", e);

    EXPECT_FALSE(bus.take("S_1", "s001", "auth_request"));
    EXPECT_FALSE(bus.take("MOA-ID", "s001", "il_request"));
    EXPECT_EQ(bus.take("MOA-ID", "s001", "auth_request")->text("n"), "1");
    EXPECT_EQ(bus.take("MOA-ID", "s001", "auth_request")->text("n"), "2");
    EXPECT_FALSE(bus.take("MOA-ID", "s001", "auth_request"));
    EXPECT_TRUE(bus.take("MOA-ID", "s002", "auth_request"));
}

TEST(Harness, TamperHookTriggersAbort)
{
    auto w = sra_setup(default_scenario());
    RunOptions o;
    o.tamper = [](const std::string&, Envelope& e) {
        if (e.msg_type == "saml_response") e.fields.front().value.push_back(0);
    };
    const auto r = run_sessions(w, {{UseCase::austrian, Mode::cloud, "max", "S_1", {}}}, o);
    EXPECT_EQ(r.outcomes[0].status, FlowStatus::aborted);
    EXPECT_EQ(r.outcomes[0].step, "7a");
    EXPECT_TRUE(r.outcomes[0].sp_attributes.empty());
}

TEST(Harness, UnknownSessionLookups)
{
    auto w = sra_setup(default_scenario());
    const auto r = run_sessions(w, {default_scenario().sessions[0]});
    EXPECT_THROW(r.outcome("s999"), LookupError);
    Observatory obs;
    EXPECT_THROW(obs.log("MOA-ID", "s001"), LookupError);
}
