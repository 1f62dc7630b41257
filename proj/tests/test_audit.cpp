#include <gtest/gtest.h>

#include <json.hpp>

#include "eidcloud/actors.hpp"
#include "eidcloud/audit.hpp"

using namespace eidcloud;
using Cats = std::set<Category>;

namespace {

struct Run {
    World world;
    RunResult result;
    std::vector<AuditReport> reports;
};

Run run(const Scenario& s, ReBackendKind backend = ReBackendKind::pairing)
{
    Run r{sra_setup(s, backend), {}, {}};
    r.result = run_sessions(r.world, s.sessions);
    if (backend == ReBackendKind::pairing) r.reports = audit_sessions(r.world, r.result);
    return r;
}

const Run& default_run()
{
    static const Run r = run(default_scenario());
    return r;
}

const AuditReport& report(const std::vector<AuditReport>& rs, UseCase uc, Mode m)
{
    for (const auto& r : rs)
        if (r.use_case == uc && r.mode == m) return r;
    throw LookupError("no report");
}

}  // namespace

TEST(Classify, Examples)
{
    const auto& r = default_run();
    const auto cat = build_catalog(r.world, r.result);
    EXPECT_EQ(cat.classify(to_bytes("tax")), Category::governmental_sector);
    EXPECT_EQ(cat.classify(to_bytes("M-0001")), Category::mandate_id);
    const auto pin = source_pin_of(r.world.sra_keys("SRA"), r.world.crr, "max");
    EXPECT_EQ(cat.classify(pin.value), Category::identity_link);
    EXPECT_EQ(cat.classify(derive_sspin(pin, "health").value), Category::sspin);
    EXPECT_EQ(cat.classify(to_bytes("Maximilian")), Category::identity_link);
    EXPECT_EQ(cat.classify(to_bytes("Erika")), Category::citizen_data);
    EXPECT_EQ(cat.classify(to_bytes("DE/AT/T22000129")), Category::citizen_data);
    EXPECT_EQ(cat.classify(to_bytes("DE")), Category::home_country);
    EXPECT_EQ(cat.classify(to_bytes("Vertretung in Vergabeverfahren")),
              Category::mandate_information);
    EXPECT_EQ(cat.classify(r.world.credential("C_max", "certificate")),
              Category::signing_certificate);
    EXPECT_EQ(cat.classify(r.world.credential("C_max", "pseudonym-certificate")),
              Category::protocol_metadata);
    EXPECT_EQ(cat.classify(to_bytes("MOA-ID")), Category::protocol_metadata);
    EXPECT_EQ(cat.classify(to_bytes("s003")), Category::protocol_metadata);
    EXPECT_EQ(cat.classify(to_bytes("something else")), Category::uncategorized);
    EXPECT_EQ(cat.classify(Bytes{}), Category::uncategorized);
}

TEST(Classify, FirstRegistrationWins)
{
    Catalog c;
    c.add("x", Category::sspin);
    c.add("x", Category::citizen_data);
    EXPECT_EQ(c.classify(to_bytes("x")), Category::sspin);
    EXPECT_EQ(c.size(), 1u);
}

TEST(Policy, CloudRowsArePublishedCells)
{
    for (const auto uc : kAllUseCases) {
        const auto p = policy_for(uc, Mode::cloud);
        EXPECT_EQ(table1_cell(uc, Mode::cloud, "MOA-ID"), Cats{Category::governmental_sector});
        EXPECT_EQ(p.allowed.at("PEPS"), Cats{});
        if (uc == UseCase::representation)
            EXPECT_EQ(p.allowed.at("MIS"), Cats{Category::mandate_id});
        else
            EXPECT_EQ(p.allowed.at("MIS"), Cats{});
    }
    const auto f = policy_for(UseCase::foreign, Mode::cloud);
    EXPECT_EQ(f.annotated.at("SPR-GW"), Cats{Category::governmental_sector});
    EXPECT_EQ(f.annotated.at("MOA-ID"), Cats{Category::home_country});
    EXPECT_FALSE(table1_cell(UseCase::foreign, Mode::cloud, "SPR-GW"));
}

TEST(Audit, CloudRowsMatchExactly)
{
    const auto& rs = default_run().reports;
    for (const auto uc : kAllUseCases) {
        const auto& r = report(rs, uc, Mode::cloud);
        EXPECT_TRUE(r.pass) << to_string(uc);
        EXPECT_TRUE(r.matches_table()) << to_string(uc);
        EXPECT_EQ(r.actor("MOA-ID").observed.count(Category::governmental_sector), 1u);
    }
    const auto& a = report(rs, UseCase::austrian, Mode::cloud);
    EXPECT_EQ(a.actor("MOA-ID").observed, Cats{Category::governmental_sector});
    EXPECT_FALSE(a.actor("MIS").involved);

    const auto& rep = report(rs, UseCase::representation, Mode::cloud);
    EXPECT_EQ(rep.actor("MOA-ID").observed, Cats{Category::governmental_sector});
    EXPECT_EQ(rep.actor("MIS").observed, Cats{Category::mandate_id});

    const auto& f = report(rs, UseCase::foreign, Mode::cloud);
    EXPECT_EQ(f.actor("MOA-ID").observed,
              (Cats{Category::governmental_sector, Category::home_country}));
    EXPECT_EQ(f.actor("MOA-ID").annotations, Cats{Category::home_country});
    EXPECT_EQ(f.actor("SPR-GW").observed, Cats{Category::governmental_sector});
    EXPECT_EQ(f.actor("SPR-GW").annotations, Cats{Category::governmental_sector});
    EXPECT_TRUE(f.actor("PEPS").involved);
    EXPECT_EQ(f.actor("PEPS").observed, Cats{});
    EXPECT_GT(f.actor("PEPS").metadata_entries, 0u);
}

TEST(Audit, CurrentRowsContainPublishedCategories)
{
    const auto& rs = default_run().reports;
    for (const auto uc : kAllUseCases) {
        const auto& r = report(rs, uc, Mode::current);
        EXPECT_TRUE(r.pass) << to_string(uc);
        for (const auto& a : audited_actors()) {
            const auto cell = table1_cell(uc, Mode::current, a);
            if (!cell) continue;
            for (const auto c : *cell)
                EXPECT_TRUE(r.actor(a).observed.count(c))
                    << to_string(uc) << " " << a << " " << to_string(c);
        }
    }
    const auto& a = report(rs, UseCase::austrian, Mode::current).actor("MOA-ID");
    EXPECT_EQ(a.observed, (Cats{Category::identity_link, Category::sspin,
                                Category::signing_certificate, Category::governmental_sector}));
}

TEST(Audit, LeakyActorFailsAtNamedStep)
{
    auto s = default_scenario();
    s.leak = LeakSpec{"MOA-ID", UseCase::austrian, "3d", "given_name"};
    const auto r = run(s);
    const auto& rep = report(r.reports, UseCase::austrian, Mode::cloud);
    EXPECT_FALSE(rep.pass);
    const auto& moa = rep.actor("MOA-ID");
    ASSERT_EQ(moa.violations.size(), 1u);
    EXPECT_EQ(moa.violations[0].step, "3d");
    EXPECT_EQ(moa.violations[0].category, Category::identity_link);
    EXPECT_EQ(moa.violations[0].value, "Maximilian");
    EXPECT_FALSE(confidentiality_sweep(r.world, r.result).empty());

    const auto table = render_comparison(r.reports);
    EXPECT_NE(table.find("[!]"), std::string::npos);
    EXPECT_NE(table.find("step 3d"), std::string::npos);
}

struct LeakCase {
    const char* actor;
    UseCase use_case;
    const char* step;
    const char* attribute;
};

class Sensitivity : public ::testing::TestWithParam<LeakCase> {};

TEST_P(Sensitivity, InjectedValueFlipsVerdict)
{
    const auto& lc = GetParam();
    auto s = default_scenario();
    s.leak = LeakSpec{lc.actor, lc.use_case, lc.step, lc.attribute};
    const auto r = run(s);
    const auto& rep = report(r.reports, lc.use_case, Mode::cloud);
    EXPECT_FALSE(rep.pass);
    EXPECT_FALSE(rep.actor(lc.actor).pass);
    EXPECT_FALSE(confidentiality_sweep(r.world, r.result).empty());
}

INSTANTIATE_TEST_SUITE_P(
    CloudActors, Sensitivity,
    ::testing::Values(LeakCase{"MOA-ID", UseCase::austrian, "4c", "family_name"},
                      LeakCase{"MOA-ID", UseCase::foreign, "17", "identifier"},
                      LeakCase{"MIS", UseCase::representation, "8c", "date_of_birth"},
                      LeakCase{"MIS", UseCase::representation, "12", "given_name"},
                      LeakCase{"SPR-GW", UseCase::foreign, "13", "given_name"},
                      LeakCase{"SPR-GW", UseCase::foreign, "16", "date_of_birth"},
                      LeakCase{"PEPS", UseCase::foreign, "9", "family_name"},
                      LeakCase{"PEPS", UseCase::foreign, "10", "identifier"}));

TEST(Audit, PassAgreesWithByteScan)
{
    // Independent check: every cloud log value equal to a sensitive value must
    // have been flagged, and a passing cloud report has none.
    const auto& r = default_run();
    const auto sensitive = sensitive_values(r.world);
    std::size_t current_hits = 0;
    for (const auto& log : r.result.logs)
        for (const auto& e : log.entries) {
            if (!e.plaintext) continue;
            for (const auto& v : sensitive)
                if (contains(*e.plaintext, v.value)) {
                    if (log.mode == Mode::cloud)
                        ADD_FAILURE() << log.actor << " " << e.name << " " << v.label;
                    else
                        ++current_hits;
                }
        }
    EXPECT_GT(current_hits, 0u);
    EXPECT_TRUE(confidentiality_sweep(r.world, r.result).empty());
}

TEST(Audit, RefusesTestDouble)
{
    const auto r = run(default_scenario(), ReBackendKind::trusted_dealer);
    for (const auto& o : r.result.outcomes) EXPECT_EQ(o.status, FlowStatus::completed);
    EXPECT_FALSE(r.result.sound);
    EXPECT_THROW(audit_sessions(r.world, r.result), AuditRefused);
    const auto cat = build_catalog(r.world, r.result);
    EXPECT_THROW(audit_run({}, policy_for(UseCase::austrian, Mode::cloud), cat, false),
                 AuditRefused);
}

TEST(Audit, PolicyMismatchIsAnError)
{
    const auto& r = default_run();
    const auto cat = build_catalog(r.world, r.result);
    const auto logs = r.result.logs_for("s006");  // foreign/cloud
    ASSERT_FALSE(logs.empty());
    EXPECT_THROW(audit_run(logs, policy_for(UseCase::austrian, Mode::cloud), cat, true),
                 AuditError);
    EXPECT_THROW(audit_run(logs, policy_for(UseCase::foreign, Mode::current), cat, true),
                 AuditError);
    EXPECT_NO_THROW(audit_run(logs, policy_for(UseCase::foreign, Mode::cloud), cat, true));
}

TEST(Render, RequiresAllSixRuns)
{
    auto rs = default_run().reports;
    ASSERT_EQ(rs.size(), 6u);
    const auto table = render_comparison(rs);
    for (const auto* a : {"MOA-ID", "MIS", "SPR-GW", "PEPS", "Cloud-based", "Current"})
        EXPECT_NE(table.find(a), std::string::npos) << a;
    EXPECT_NE(table.find("[+]"), std::string::npos);
    EXPECT_EQ(table.find("violation"), std::string::npos);

    rs.erase(std::remove_if(rs.begin(), rs.end(),
                            [](const AuditReport& r) {
                                return r.use_case == UseCase::foreign && r.mode == Mode::current;
                            }),
             rs.end());
    EXPECT_THROW(render_comparison(rs), RenderError);
}

TEST(Render, MismatchHighlighted)
{
    auto rs = default_run().reports;
    for (auto& r : rs)
        if (r.use_case == UseCase::austrian && r.mode == Mode::current)
            for (auto& a : r.actors)
                if (a.actor == "MOA-ID") {
                    a.observed.erase(Category::sspin);
                    a.missing.insert(Category::sspin);
                }
    const auto table = render_comparison(rs);
    EXPECT_NE(table.find("missing: ssPIN"), std::string::npos);
    EXPECT_NE(table.find("differs from the published table"), std::string::npos);
}

TEST(Report, JsonShape)
{
    const auto j = nlohmann::json::parse(report_json(default_run().reports));
    ASSERT_EQ(j.size(), 6u);
    for (const auto& r : j) {
        EXPECT_TRUE(r["pass"].get<bool>());
        EXPECT_EQ(r["actors"].size(), 4u);
    }
}
