#pragma once

// The protocol parties of the three use cases. Each flow is one coroutine that
// plays every party in turn; parties touch only their own key stores and
// exchange data through envelopes on the bus.

#include <string>
#include <vector>

#include "eidcloud/harness.hpp"
#include "eidcloud/scenario.hpp"
#include "eidcloud/world.hpp"

namespace eidcloud {

FlowTask austrian_flow(SessionContext& ctx);
FlowTask representation_flow(SessionContext& ctx);
FlowTask foreign_flow(SessionContext& ctx);

FlowFn flow_for(UseCase use_case);

/// Fixed plaintext values the flows put on the wire (purpose flags).
const std::vector<std::string>& protocol_constants();

/// Text the citizen signs at the qualified-signature step.
std::string consent_text(const std::string& sp, const std::string& session, std::uint64_t ts);

/// Single-session conveniences over run_sessions.
FlowOutcome run_flow_austrian(World& world, const std::string& citizen, const std::string& sp,
                              Mode mode);
FlowOutcome run_flow_representation(World& world, const std::string& citizen,
                                    const std::string& sp, const std::string& selected_mandate,
                                    Mode mode);
FlowOutcome run_flow_foreign(World& world, const std::string& foreign_citizen,
                             const std::string& sp, Mode mode);

}  // namespace eidcloud
