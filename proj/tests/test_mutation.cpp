#include <gtest/gtest.h>

#include <map>

#include "eidcloud/actors.hpp"

using namespace eidcloud;

namespace {

// Step at which the receiver's verification of each signed message happens.
std::string expected_step(UseCase uc, Mode mode, const std::string& msg)
{
    const bool cloud = mode == Mode::cloud;
    static const std::map<std::string, std::string> austrian{
        {"il_response", "3d"}, {"sig_response", "4c"}, {"saml_response", "7a"}};
    static const std::map<std::string, std::string> representation{
        {"il_response", "3c"},      {"sig_response", "4"},    {"mandate_search", "8a"},
        {"mandate_result", "8c"},   {"mandate_choice", "11b"}, {"mandate_fetch", "11b"},
        {"mandate_record", "12"},   {"mandate_response", "13"}, {"saml_response", "16a"}};
    static const std::map<std::string, std::string> foreign{
        {"sig_response", "8"},       {"fidp_response", "9"},  {"stork_response", "11"},
        {"spr_request", "13"},       {"register_response", "15c"}, {"il_forward", "17"},
        {"saml_response", "20"}};
    switch (uc) {
    case UseCase::austrian: return austrian.at(msg);
    case UseCase::representation:
        if (msg == "mandate_query") return cloud ? "7b" : "7a";
        return representation.at(msg);
    case UseCase::foreign:
        if (msg == "register_request") return cloud ? "15b" : "15a";
        return foreign.at(msg);
    }
    return "?";
}

class Mutation : public ::testing::TestWithParam<std::pair<UseCase, Mode>> {
protected:
    static const World& world()
    {
        static const World w = sra_setup(default_scenario());
        return w;
    }
};

}  // namespace

TEST_P(Mutation, EverySignedFieldFailsClosedAtItsStep)
{
    const auto [uc, mode] = GetParam();
    SessionSpec spec;
    for (const auto& s : default_scenario().sessions)
        if (s.use_case == uc && s.mode == mode) spec = s;
    const auto cases = run_mutation_suite(world(), spec);
    ASSERT_FALSE(cases.empty());

    std::set<std::string> types;
    for (const auto& c : cases) {
        types.insert(c.msg_type);
        const auto where = c.msg_type + "#" + std::to_string(c.occurrence) + "." + c.field;
        EXPECT_EQ(c.outcome.status, FlowStatus::aborted) << where;
        EXPECT_EQ(c.outcome.step, expected_step(uc, mode, c.msg_type)) << where << ": "
                                                                        << c.outcome.reason;
        EXPECT_TRUE(c.outcome.sp_attributes.empty()) << where;
    }
    // Every signed message of the flow was exercised.
    std::set<std::string> signed_types;
    auto w = world();
    const auto clean = run_sessions(w, {spec});
    ASSERT_EQ(clean.outcomes[0].status, FlowStatus::completed);
    for (const auto& rec : clean.trace.records)
        for (const auto& f : rec.envelope.fields)
            if (f.tag == FieldTag::signature) signed_types.insert(rec.envelope.msg_type);
    EXPECT_EQ(types, signed_types);
}

INSTANTIATE_TEST_SUITE_P(
    AllFlows, Mutation,
    ::testing::Values(std::pair{UseCase::austrian, Mode::current},
                      std::pair{UseCase::austrian, Mode::cloud},
                      std::pair{UseCase::representation, Mode::current},
                      std::pair{UseCase::representation, Mode::cloud},
                      std::pair{UseCase::foreign, Mode::current},
                      std::pair{UseCase::foreign, Mode::cloud}),
    [](const auto& info) {
        return std::string(to_string(info.param.first)) + "_" +
               std::string(to_string(info.param.second));
    });

TEST(MutationSuite, CasesAreDeterministic)
{
    const auto w = sra_setup(default_scenario());
    const auto spec = default_scenario().sessions[1];
    const auto a = run_mutation_suite(w, spec);
    const auto b = run_mutation_suite(w, spec);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].msg_type, b[i].msg_type);
        EXPECT_EQ(a[i].field, b[i].field);
        EXPECT_EQ(a[i].outcome.step, b[i].outcome.step);
    }
}
