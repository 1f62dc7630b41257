#include "eidcloud/scenario.hpp"

#include <algorithm>
#include <set>

#include "eidcloud/eid_model.hpp"
#include "eidcloud/errors.hpp"
#include "json_util.hpp"

namespace eidcloud {

namespace {

using detail::Json;

// Semantic errors carry the offending value so the parser can point at a line.
struct Invalid {
    std::string message;
    std::string needle;
};

void fail(std::string message, std::string needle)
{
    throw Invalid{std::move(message), std::move(needle)};
}

std::optional<Invalid> check(const Scenario& s)
{
    try {
        std::set<std::string> ids;
        auto fresh = [&](const std::string& id, std::string_view what) {
            if (id.empty()) fail(std::string(what) + " with empty id", "");
            if (!ids.insert(id).second) fail("duplicate actor id \"" + id + "\"", id);
        };
        if (s.sectors.empty()) fail("sectors: list is empty", "sectors");
        std::set<std::string> sectors;
        for (const auto& x : s.sectors)
            if (x.empty() || !sectors.insert(x).second)
                fail("sectors: empty or duplicate sector \"" + x + "\"", x);
        if (!sectors.count(s.cr_sector))
            fail("cr_sector: unknown sector \"" + s.cr_sector + "\"", s.cr_sector);
        for (const auto* reserved : {"SRA", "EC", "MOA-ID", "MIS", "SPR-GW", "SR", "CR", "PEPS",
                                     "F-IdP"})
            ids.insert(reserved);
        for (const auto& c : s.citizens) {
            fresh("C_" + c.id, "citizen");
            if (c.given_name.empty() || c.family_name.empty() || c.date_of_birth.empty() ||
                c.crr_number.empty())
                fail("citizens: \"" + c.id + "\" has an empty attribute", c.id);
        }
        for (const auto& c : s.foreign_citizens) {
            fresh("C_" + c.id, "foreign citizen");
            if (c.country.empty() || c.identifier.empty())
                fail("foreign_citizens: \"" + c.id + "\" needs country and identifier", c.id);
        }
        for (const auto& sp : s.service_providers) {
            fresh(sp.id, "service provider");
            if (!sectors.count(sp.sector))
                fail("service_providers: \"" + sp.id + "\" references unknown sector \"" +
                         sp.sector + "\"",
                     sp.sector);
        }
        std::set<std::string> lps;
        for (const auto& l : s.legal_persons)
            if (!lps.insert(l.register_number).second)
                fail("legal_persons: duplicate register number \"" + l.register_number + "\"",
                     l.register_number);
        std::set<std::string> mids;
        for (const auto& m : s.mandates) {
            if (m.mand_id.empty() || !mids.insert(m.mand_id).second)
                fail("mandates: empty or duplicate mand_id \"" + m.mand_id + "\"", m.mand_id);
            if (!lps.count(m.mandator))
                fail("mandates: \"" + m.mand_id + "\" references unknown mandator \"" +
                         m.mandator + "\"",
                     m.mandator);
            if (!s.citizen(m.representative))
                fail("mandates: \"" + m.mand_id + "\" references unknown representative \"" +
                         m.representative + "\"",
                     m.representative);
        }
        for (const auto& r : s.consent_rules) {
            if (!s.citizen(r.citizen) && !s.foreign_citizen(r.citizen))
                fail("consent: unknown citizen \"" + r.citizen + "\"", r.citizen);
            if (r.request != "identity_link" && r.request != "signature")
                fail("consent: unknown request \"" + r.request + "\"", r.request);
        }
        for (const auto& ses : s.sessions) {
            if (!s.service_provider(ses.sp))
                fail("sessions: unknown service provider \"" + ses.sp + "\"", ses.sp);
            const bool foreign = ses.use_case == UseCase::foreign;
            if (foreign ? !s.foreign_citizen(ses.citizen) : !s.citizen(ses.citizen))
                fail("sessions: unknown " + std::string(foreign ? "foreign " : "") +
                         "citizen \"" + ses.citizen + "\"",
                     ses.citizen);
            if (!ses.mandate.empty() && !mids.count(ses.mandate))
                fail("sessions: unknown mandate \"" + ses.mandate + "\"", ses.mandate);
        }
        if (s.leak) {
            if (s.leak->actor != "MOA-ID" && s.leak->actor != "MIS" &&
                s.leak->actor != "SPR-GW" && s.leak->actor != "PEPS")
                fail("leak: \"" + s.leak->actor + "\" is not a cloud-capable actor",
                     s.leak->actor);
        }
        if (s.max_levels < 1) fail("max_levels must be at least 1", "max_levels");
        if (s.security_level != 80 && s.security_level != 128)
            fail("security_level must be 80 or 128", "security_level");
    } catch (const Invalid& e) {
        return e;
    }
    return std::nullopt;
}

std::string with_line(std::string_view text, const Invalid& e)
{
    if (e.needle.empty()) return e.message;
    auto pos = text.find("\"" + e.needle + "\"");
    if (pos == std::string_view::npos) pos = text.find(e.needle);
    if (pos == std::string_view::npos) return e.message;
    return e.message + " (" + detail::line_context(text, pos) + ")";
}

bool bool_member(const Json& j, std::string_view key, bool fallback)
{
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean())
        throw ScenarioError("field \"" + std::string(key) + "\" must be true or false");
    return it->get<bool>();
}

std::uint64_t uint_member(const Json& j, std::string_view key, std::uint64_t fallback)
{
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_unsigned())
        throw ScenarioError("field \"" + std::string(key) + "\" must be a non-negative integer");
    return it->get<std::uint64_t>();
}

const Json& optional_array(const Json& j, std::string_view key)
{
    static const Json empty = Json::array();
    auto it = j.find(key);
    if (it == j.end()) return empty;
    if (!it->is_array()) throw ScenarioError("field \"" + std::string(key) + "\" must be an array");
    return *it;
}

Scenario from_json(const Json& j)
{
    if (!j.is_object()) throw ScenarioError("scenario: top level must be an object");
    using detail::optional_string;
    using detail::string_member;
    Scenario s;
    s.name = optional_string(j, "name", s.name);
    s.seed = uint_member(j, "seed", s.seed);
    s.security_level = static_cast<int>(uint_member(j, "security_level", 80));
    s.max_levels = static_cast<int>(uint_member(j, "max_levels", 4));
    for (const auto& x : optional_array(j, "sectors")) {
        if (!x.is_string()) throw ScenarioError("sectors: entries must be strings");
        s.sectors.push_back(x.get<std::string>());
    }
    if (s.sectors.empty()) s.sectors = default_sectors();
    s.cr_sector = optional_string(j, "cr_sector", s.cr_sector);
    for (const auto& c : optional_array(j, "citizens"))
        s.citizens.push_back({string_member(c, "id", "citizen"),
                              string_member(c, "given_name", "citizen"),
                              string_member(c, "family_name", "citizen"),
                              string_member(c, "date_of_birth", "citizen"),
                              string_member(c, "crr_number", "citizen")});
    for (const auto& c : optional_array(j, "service_providers"))
        s.service_providers.push_back({string_member(c, "id", "service provider"),
                                       string_member(c, "sector", "service provider")});
    for (const auto& c : optional_array(j, "legal_persons"))
        s.legal_persons.push_back({string_member(c, "register_number", "legal person"),
                                   string_member(c, "name", "legal person")});
    for (const auto& c : optional_array(j, "mandates"))
        s.mandates.push_back({string_member(c, "mand_id", "mandate"),
                              string_member(c, "mandator", "mandate"),
                              string_member(c, "representative", "mandate"),
                              string_member(c, "empowerment", "mandate")});
    for (const auto& c : optional_array(j, "foreign_citizens")) {
        ForeignCitizenSpec f{string_member(c, "id", "foreign citizen"),
                             string_member(c, "given_name", "foreign citizen"),
                             string_member(c, "family_name", "foreign citizen"),
                             string_member(c, "date_of_birth", "foreign citizen"),
                             string_member(c, "country", "foreign citizen"),
                             string_member(c, "identifier", "foreign citizen")};
        f.credential_valid = bool_member(c, "credential_valid", true);
        s.foreign_citizens.push_back(std::move(f));
    }
    if (auto it = j.find("consent"); it != j.end()) {
        const auto def = optional_string(*it, "default", "approve");
        if (def != "approve" && def != "deny")
            throw ScenarioError("consent: default must be \"approve\" or \"deny\"");
        s.consent_default = def == "approve";
        for (const auto& r : optional_array(*it, "rules")) {
            const auto decision = string_member(r, "decision", "consent rule");
            if (decision != "approve" && decision != "deny")
                throw ScenarioError("consent rule: decision must be \"approve\" or \"deny\"");
            s.consent_rules.push_back({string_member(r, "citizen", "consent rule"),
                                       string_member(r, "request", "consent rule"),
                                       decision == "approve"});
        }
    }
    s.default_mode = parse_mode(optional_string(j, "mode", "cloud"));
    for (const auto& c : optional_array(j, "sessions")) {
        SessionSpec ses;
        ses.use_case = parse_use_case(string_member(c, "use_case", "session"));
        ses.mode = parse_mode(optional_string(c, "mode", std::string(to_string(s.default_mode))));
        ses.citizen = string_member(c, "citizen", "session");
        ses.sp = string_member(c, "sp", "session");
        ses.mandate = optional_string(c, "mandate");
        s.sessions.push_back(std::move(ses));
    }
    if (auto it = j.find("leak"); it != j.end() && !it->is_null()) {
        LeakSpec l;
        l.actor = string_member(*it, "actor", "leak");
        l.use_case = parse_use_case(string_member(*it, "use_case", "leak"));
        l.step = string_member(*it, "step", "leak");
        l.attribute = string_member(*it, "attribute", "leak");
        s.leak = l;
    }
    return s;
}

}  // namespace

std::string_view to_string(Mode m) { return m == Mode::current ? "current" : "cloud"; }

std::string_view to_string(UseCase u)
{
    switch (u) {
    case UseCase::austrian: return "austrian";
    case UseCase::representation: return "representation";
    case UseCase::foreign: return "foreign";
    }
    return "?";
}

Mode parse_mode(std::string_view s)
{
    if (s == "current") return Mode::current;
    if (s == "cloud") return Mode::cloud;
    throw ScenarioError("unknown mode \"" + std::string(s) + "\" (expected current or cloud)");
}

UseCase parse_use_case(std::string_view s)
{
    if (s == "austrian") return UseCase::austrian;
    if (s == "representation") return UseCase::representation;
    if (s == "foreign") return UseCase::foreign;
    throw ScenarioError("unknown use case \"" + std::string(s) +
                        "\" (expected austrian, representation or foreign)");
}

bool Scenario::approves(std::string_view citizen_id, std::string_view request) const
{
    for (const auto& r : consent_rules)
        if (r.citizen == citizen_id && r.request == request) return r.approve;
    return consent_default;
}

const CitizenSpec* Scenario::citizen(std::string_view id) const
{
    for (const auto& c : citizens)
        if (c.id == id) return &c;
    return nullptr;
}

const ForeignCitizenSpec* Scenario::foreign_citizen(std::string_view id) const
{
    for (const auto& c : foreign_citizens)
        if (c.id == id) return &c;
    return nullptr;
}

const ServiceProviderSpec* Scenario::service_provider(std::string_view id) const
{
    for (const auto& c : service_providers)
        if (c.id == id) return &c;
    return nullptr;
}

void validate_scenario(const Scenario& s)
{
    if (auto e = check(s)) throw ScenarioError(e->message);
}

Scenario parse_scenario(std::string_view text)
{
    const auto j = detail::parse_json(text, "scenario");
    Scenario s;
    try {
        s = from_json(j);
    } catch (const ScenarioError& e) {
        throw ScenarioError(std::string("scenario: ") + e.what());
    }
    if (auto e = check(s)) throw ScenarioError("scenario: " + with_line(text, *e));
    return s;
}

std::string format_scenario(const Scenario& s)
{
    Json j;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["security_level"] = s.security_level;
    j["max_levels"] = s.max_levels;
    j["sectors"] = s.sectors;
    j["cr_sector"] = s.cr_sector;
    j["mode"] = std::string(to_string(s.default_mode));
    auto arr = Json::array();
    for (const auto& c : s.citizens)
        arr.push_back({{"id", c.id},
                       {"given_name", c.given_name},
                       {"family_name", c.family_name},
                       {"date_of_birth", c.date_of_birth},
                       {"crr_number", c.crr_number}});
    j["citizens"] = arr;
    arr = Json::array();
    for (const auto& c : s.service_providers) arr.push_back({{"id", c.id}, {"sector", c.sector}});
    j["service_providers"] = arr;
    arr = Json::array();
    for (const auto& c : s.legal_persons)
        arr.push_back({{"register_number", c.register_number}, {"name", c.name}});
    j["legal_persons"] = arr;
    arr = Json::array();
    for (const auto& c : s.mandates)
        arr.push_back({{"mand_id", c.mand_id},
                       {"mandator", c.mandator},
                       {"representative", c.representative},
                       {"empowerment", c.empowerment}});
    j["mandates"] = arr;
    arr = Json::array();
    for (const auto& c : s.foreign_citizens)
        arr.push_back({{"id", c.id},
                       {"given_name", c.given_name},
                       {"family_name", c.family_name},
                       {"date_of_birth", c.date_of_birth},
                       {"country", c.country},
                       {"identifier", c.identifier},
                       {"credential_valid", c.credential_valid}});
    j["foreign_citizens"] = arr;
    arr = Json::array();
    for (const auto& r : s.consent_rules)
        arr.push_back({{"citizen", r.citizen},
                       {"request", r.request},
                       {"decision", r.approve ? "approve" : "deny"}});
    j["consent"] = {{"default", s.consent_default ? "approve" : "deny"}, {"rules", arr}};
    arr = Json::array();
    for (const auto& ses : s.sessions) {
        Json o{{"use_case", std::string(to_string(ses.use_case))},
               {"mode", std::string(to_string(ses.mode))},
               {"citizen", ses.citizen},
               {"sp", ses.sp}};
        if (!ses.mandate.empty()) o["mandate"] = ses.mandate;
        arr.push_back(o);
    }
    j["sessions"] = arr;
    if (s.leak)
        j["leak"] = {{"actor", s.leak->actor},
                     {"use_case", std::string(to_string(s.leak->use_case))},
                     {"step", s.leak->step},
                     {"attribute", s.leak->attribute}};
    return j.dump(2) + "\n";
}

Scenario default_scenario()
{
    Scenario s;
    s.name = "default";
    s.seed = 2015;
    s.sectors = default_sectors();
    s.cr_sector = "business";
    s.citizens = {{"max", "Maximilian", "Mustermann", "1984-03-17", "000123456789"}};
    s.service_providers = {{"S_1", "tax"}, {"S_2", "tax"}, {"S_3", "health"}};
    s.legal_persons = {{"FN 468123x", "Musterbau Gesellschaft m.b.H."}};
    s.mandates = {{"M-0001", "FN 468123x", "max", "Vertretung in Abgabenangelegenheiten"},
                  {"M-0002", "FN 468123x", "max", "Vertretung in Vergabeverfahren"}};
    s.foreign_citizens = {
        {"erika", "Erika", "Musterfrau", "1979-11-02", "DE", "DE/AT/T22000129", true}};
    s.sessions = comparison_sessions(s);
    return s;
}

std::vector<SessionSpec> comparison_sessions(const Scenario& s)
{
    std::vector<SessionSpec> out;
    if (s.service_providers.empty()) return out;
    for (auto u : kAllUseCases)
        for (auto m : kAllModes) {
            SessionSpec ses;
            ses.use_case = u;
            ses.mode = m;
            ses.sp = s.service_providers.front().id;
            if (u == UseCase::foreign) {
                if (s.foreign_citizens.empty()) continue;
                ses.citizen = s.foreign_citizens.front().id;
            } else {
                if (s.citizens.empty()) continue;
                ses.citizen = s.citizens.front().id;
            }
            out.push_back(ses);
        }
    return out;
}

}  // namespace eidcloud
