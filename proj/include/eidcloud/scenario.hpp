#pragma once

// Scenario files: a JSON document naming the population, service providers,
// sectors, mandates, foreign parties, consent policy and the sessions to run.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eidcloud {

enum class Mode { current, cloud };
enum class UseCase { austrian, representation, foreign };

std::string_view to_string(Mode m);
std::string_view to_string(UseCase u);
/// Throw ScenarioError for an unknown label.
Mode parse_mode(std::string_view s);
UseCase parse_use_case(std::string_view s);

inline constexpr UseCase kAllUseCases[] = {UseCase::austrian, UseCase::representation,
                                           UseCase::foreign};
inline constexpr Mode kAllModes[] = {Mode::current, Mode::cloud};

struct CitizenSpec {
    std::string id;
    std::string given_name;
    std::string family_name;
    std::string date_of_birth;
    std::string crr_number;
};

struct ServiceProviderSpec {
    std::string id;
    std::string sector;
};

struct LegalPersonSpec {
    std::string register_number;
    std::string name;
};

struct MandateSpec {
    std::string mand_id;
    /// Register number of the legal person.
    std::string mandator;
    /// Citizen id of the representative.
    std::string representative;
    std::string empowerment;
};

struct ForeignCitizenSpec {
    std::string id;
    std::string given_name;
    std::string family_name;
    std::string date_of_birth;
    std::string country;
    std::string identifier;
    /// False models a citizen whose credential the F-IdP does not accept.
    bool credential_valid = true;
};

/// Scripted CCS decision; `request` is "identity_link" or "signature".
struct ConsentRule {
    std::string citizen;
    std::string request;
    bool approve = true;
};

struct SessionSpec {
    UseCase use_case = UseCase::austrian;
    Mode mode = Mode::cloud;
    std::string citizen;
    std::string sp;
    /// Representation only; empty selects the first offered mandate.
    std::string mandate;
};

/// Test hook: the named cloud actor copies a citizen attribute into its
/// memory in plaintext after the named step.
struct LeakSpec {
    std::string actor;
    UseCase use_case = UseCase::austrian;
    std::string step;
    std::string attribute;
};

struct Scenario {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    int security_level = 80;
    int max_levels = 4;
    std::vector<std::string> sectors;
    std::string cr_sector = "business";
    std::vector<CitizenSpec> citizens;
    std::vector<ServiceProviderSpec> service_providers;
    std::vector<LegalPersonSpec> legal_persons;
    std::vector<MandateSpec> mandates;
    std::vector<ForeignCitizenSpec> foreign_citizens;
    bool consent_default = true;
    std::vector<ConsentRule> consent_rules;
    Mode default_mode = Mode::cloud;
    std::vector<SessionSpec> sessions;
    std::optional<LeakSpec> leak;

    bool approves(std::string_view citizen, std::string_view request) const;
    const CitizenSpec* citizen(std::string_view id) const;
    const ForeignCitizenSpec* foreign_citizen(std::string_view id) const;
    const ServiceProviderSpec* service_provider(std::string_view id) const;
};

/// Throws ScenarioError: syntax errors and semantic errors both name a line.
Scenario parse_scenario(std::string_view text);
std::string format_scenario(const Scenario& s);
/// Throws ScenarioError naming the offending entry.
void validate_scenario(const Scenario& s);

/// 1 Austrian citizen, 1 company with 2 mandates, 1 foreign citizen, 3 SPs in 2 sectors.
Scenario default_scenario();

/// One session per (use case, mode) over the scenario's first citizen,
/// foreign citizen and service provider.
std::vector<SessionSpec> comparison_sessions(const Scenario& s);

}  // namespace eidcloud
