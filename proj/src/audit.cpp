#include "eidcloud/audit.hpp"

#include <algorithm>
#include <sstream>

#include "eidcloud/actors.hpp"
#include "json_util.hpp"

namespace eidcloud {

using detail::Json;

namespace {

using C = Category;

bool printable(ByteView b)
{
    return !b.empty() &&
           std::all_of(b.begin(), b.end(), [](std::uint8_t c) { return c >= 0x20 && c < 0x7f; });
}

std::string display(ByteView b) { return printable(b) ? to_string(b) : "hex:" + to_hex(b); }

std::set<Sector> all_sectors(const Scenario& s)
{
    std::set<Sector> out(s.sectors.begin(), s.sectors.end());
    out.insert(s.cr_sector);
    return out;
}

/// Every (register, citizen id) pair with a sourcePIN.
std::vector<SourcePin> all_source_pins(const World& world)
{
    const auto sra = world.sra_keys(actor::sra);
    std::vector<SourcePin> out;
    for (const auto* reg : {&world.crr, &world.sr})
        for (const auto& p : reg->persons) out.push_back(source_pin_of(sra, *reg, p.citizen_id));
    return out;
}

std::vector<Mandate> all_mandates(const World& world)
{
    std::vector<Mandate> out;
    for (const auto& row : world.cr.mandates) out.push_back(row.mandate);
    return out;
}

}  // namespace

std::string_view to_string(Category c)
{
    switch (c) {
    case C::identity_link: return "Identity Link";
    case C::sspin: return "ssPIN";
    case C::signing_certificate: return "Signing certificate";
    case C::governmental_sector: return "Governmental sector";
    case C::mandate_id: return "MandateID";
    case C::mandate_information: return "All information of the mandate";
    case C::selected_mandate: return "Selected mandate for application";
    case C::home_country: return "Citizen's home country";
    case C::citizen_data: return "All requested citizen data";
    case C::protocol_metadata: return "Protocol metadata";
    case C::uncategorized: return "Uncategorized";
    }
    return "?";
}

std::string_view short_name(Category c)
{
    switch (c) {
    case C::identity_link: return "identity_link";
    case C::sspin: return "sspin";
    case C::signing_certificate: return "signing_certificate";
    case C::governmental_sector: return "governmental_sector";
    case C::mandate_id: return "mandate_id";
    case C::mandate_information: return "mandate_information";
    case C::selected_mandate: return "selected_mandate";
    case C::home_country: return "home_country";
    case C::citizen_data: return "citizen_data";
    case C::protocol_metadata: return "protocol_metadata";
    case C::uncategorized: return "uncategorized";
    }
    return "?";
}

void Catalog::add(ByteView value, Category c)
{
    if (value.empty()) return;
    values_.emplace(Bytes(value.begin(), value.end()), c);
}

Category Catalog::classify(ByteView value) const
{
    const auto it = values_.find(Bytes(value.begin(), value.end()));
    return it == values_.end() ? C::uncategorized : it->second;
}

Catalog build_catalog(const World& world, const RunResult& run)
{
    const auto& s = world.scenario;
    Catalog cat;

    for (const auto& [id, _] : world.actors) cat.add(id, C::protocol_metadata);
    for (const auto& sp : s.service_providers) cat.add(sp.id, C::protocol_metadata);
    for (const auto& c : s.citizens) cat.add(actor::citizen(c.id), C::protocol_metadata);
    for (const auto& f : s.foreign_citizens) cat.add(actor::citizen(f.id), C::protocol_metadata);
    for (const auto& [sid, _] : run.sessions) cat.add(sid, C::protocol_metadata);
    for (const auto& m : run.metadata) cat.add(m, C::protocol_metadata);
    for (const auto& c : s.citizens)
        cat.add(world.credential(actor::citizen(c.id), "pseudonym-certificate"),
                C::protocol_metadata);
    for (const auto& k : protocol_constants()) cat.add(k, C::protocol_metadata);

    for (const auto& sector : all_sectors(s)) cat.add(sector, C::governmental_sector);

    for (const auto& c : s.citizens) {
        cat.add(c.given_name, C::identity_link);
        cat.add(c.family_name, C::identity_link);
        cat.add(c.date_of_birth, C::identity_link);
    }
    const auto pins = all_source_pins(world);
    for (const auto& p : pins) cat.add(p.value, C::identity_link);
    for (const auto& p : pins)
        for (const auto& sector : all_sectors(s)) cat.add(derive_sspin(p, sector).value, C::sspin);

    auto add_cert = [&](const ActorId& holder) {
        const auto bytes = world.credential(holder, "certificate");
        cat.add(bytes, C::signing_certificate);
        cat.add(Certificate::decode(bytes).reference(), C::signing_certificate);
    };
    for (const auto& c : s.citizens) add_cert(actor::citizen(c.id));
    for (const auto& f : s.foreign_citizens) add_cert(actor::citizen(f.id));

    const auto mandates = all_mandates(world);
    for (const auto& m : mandates) cat.add(m.mand_id, C::mandate_id);
    for (const auto& m : mandates)
        for (const auto& [_, v] : m.fields()) cat.add(v, C::mandate_information);
    for (const auto& m : mandates) cat.add(m.encode(), C::selected_mandate);

    for (const auto& f : s.foreign_citizens) cat.add(f.country, C::home_country);

    for (const auto& f : s.foreign_citizens) {
        cat.add(f.given_name, C::citizen_data);
        cat.add(f.family_name, C::citizen_data);
        cat.add(f.date_of_birth, C::citizen_data);
        cat.add(f.identifier, C::citizen_data);
    }
    return cat;
}

std::vector<SensitiveValue> sensitive_values(const World& world)
{
    const auto& s = world.scenario;
    std::vector<SensitiveValue> out;
    auto add = [&](std::string label, ByteView v) {
        if (!v.empty()) out.push_back({std::move(label), Bytes(v.begin(), v.end())});
    };
    for (const auto& p : all_source_pins(world)) {
        add("sourcePIN " + p.subject, p.value);
        for (const auto& sector : all_sectors(s))
            add("ssPIN " + p.subject + "/" + sector, derive_sspin(p, sector).value);
    }
    for (const auto& c : s.citizens) {
        add("given name of " + c.id, to_bytes(c.given_name));
        add("family name of " + c.id, to_bytes(c.family_name));
        add("date of birth of " + c.id, to_bytes(c.date_of_birth));
    }
    for (const auto& f : s.foreign_citizens) {
        add("given name of " + f.id, to_bytes(f.given_name));
        add("family name of " + f.id, to_bytes(f.family_name));
        add("date of birth of " + f.id, to_bytes(f.date_of_birth));
        add("identifier of " + f.id, to_bytes(f.identifier));
    }
    for (const auto& m : all_mandates(world)) {
        for (const auto& [name, v] : m.fields())
            if (name != "mand_id" && name != "register")
                add("mandate " + m.mand_id + " " + name, to_bytes(v));
        add("mandate " + m.mand_id + " encoding", m.encode());
    }
    return out;
}

// ---------------------------------------------------------------------------

const std::vector<ActorId>& audited_actors()
{
    static const std::vector<ActorId> a{std::string(actor::moa_id), std::string(actor::mis),
                                        std::string(actor::spr_gw), std::string(actor::peps)};
    return a;
}

std::optional<std::set<Category>> table1_cell(UseCase use_case, Mode mode, const ActorId& actor)
{
    const bool moa = actor == actor::moa_id, mis = actor == actor::mis,
               spr = actor == actor::spr_gw, peps = actor == actor::peps;
    if (mode == Mode::cloud) {
        if (moa) return std::set<Category>{C::governmental_sector};
        if (mis && use_case == UseCase::representation) return std::set<Category>{C::mandate_id};
        return std::nullopt;
    }
    switch (use_case) {
    case UseCase::austrian:
        if (moa)
            return std::set<Category>{C::identity_link, C::sspin, C::signing_certificate,
                                      C::governmental_sector};
        return std::nullopt;
    case UseCase::representation:
        if (moa)
            return std::set<Category>{C::identity_link,       C::sspin,
                                      C::signing_certificate, C::mandate_information,
                                      C::selected_mandate,    C::governmental_sector};
        if (mis)
            return std::set<Category>{C::identity_link,       C::sspin,
                                      C::signing_certificate, C::mandate_information,
                                      C::selected_mandate,    C::governmental_sector};
        return std::nullopt;
    case UseCase::foreign:
        if (moa)
            return std::set<Category>{C::home_country, C::citizen_data, C::signing_certificate,
                                      C::identity_link, C::sspin, C::governmental_sector};
        if (spr)
            return std::set<Category>{C::home_country, C::citizen_data, C::signing_certificate,
                                      C::identity_link};
        if (peps) return std::set<Category>{C::citizen_data, C::signing_certificate};
        return std::nullopt;
    }
    return std::nullopt;
}

DisclosurePolicy policy_for(UseCase use_case, Mode mode)
{
    DisclosurePolicy p{use_case, mode, {}, {}};
    for (const auto& a : audited_actors()) {
        auto& allowed = p.allowed[a];
        if (auto cell = table1_cell(use_case, mode, a)) allowed = *cell;
        // The selected mandate carries its id.
        if (allowed.count(C::selected_mandate)) allowed.insert(C::mandate_id);
    }
    if (mode == Mode::cloud && use_case == UseCase::foreign) {
        p.annotated[std::string(actor::spr_gw)] = {C::governmental_sector};
        p.annotated[std::string(actor::moa_id)] = {C::home_country};
        for (const auto& [a, extra] : p.annotated) p.allowed[a].insert(extra.begin(), extra.end());
    }
    return p;
}

// ---------------------------------------------------------------------------

const ActorReport& AuditReport::actor(const ActorId& id) const
{
    for (const auto& a : actors)
        if (a.actor == id) return a;
    throw LookupError("no report for " + id);
}

bool AuditReport::matches_table() const
{
    return std::all_of(actors.begin(), actors.end(), [&](const ActorReport& a) {
        return a.missing.empty() && (mode == Mode::current || a.extra.empty());
    });
}

AuditReport audit_run(const std::vector<ObservationLog>& logs, const DisclosurePolicy& policy,
                      const Catalog& catalog, bool sound_backend)
{
    if (!sound_backend)
        throw AuditRefused(
            "privacy audit refused: the run used the trusted-dealer test double, whose dealer "
            "holds every key; rerun with the pairing backend");

    AuditReport report;
    report.use_case = policy.use_case;
    report.mode = policy.mode;
    std::set<std::string> sessions;
    for (const auto& log : logs) {
        if (log.use_case != policy.use_case || log.mode != policy.mode)
            throw AuditError("log of " + log.actor + " in session " + log.session + " is " +
                             std::string(to_string(log.use_case)) + "/" +
                             std::string(to_string(log.mode)) + ", policy is " +
                             std::string(to_string(policy.use_case)) + "/" +
                             std::string(to_string(policy.mode)));
        sessions.insert(log.session);
    }
    report.sessions.assign(sessions.begin(), sessions.end());

    for (const auto& a : audited_actors()) {
        ActorReport ar;
        ar.actor = a;
        const auto allowed_it = policy.allowed.find(a);
        const std::set<Category> allowed =
            allowed_it == policy.allowed.end() ? std::set<Category>{} : allowed_it->second;
        const auto ann_it = policy.annotated.find(a);
        const std::set<Category> annotated =
            ann_it == policy.annotated.end() ? std::set<Category>{} : ann_it->second;

        for (const auto& log : logs) {
            if (log.actor != a) continue;
            for (const auto& e : log.entries) {
                ar.involved = true;
                if (!e.plaintext) continue;
                const auto c = catalog.classify(*e.plaintext);
                if (c == C::protocol_metadata) {
                    ++ar.metadata_entries;
                    continue;
                }
                ar.observed.insert(c);
                if (c == C::uncategorized || !allowed.count(c))
                    ar.violations.push_back({log.session, e.step, e.name, c, display(*e.plaintext)});
            }
        }
        const auto cell = table1_cell(policy.use_case, policy.mode, a).value_or(std::set<C>{});
        for (const auto c : ar.observed) {
            if (annotated.count(c))
                ar.annotations.insert(c);
            else if (!allowed.count(c))
                ar.extra.insert(c);
        }
        for (const auto c : cell)
            if (!ar.observed.count(c)) ar.missing.insert(c);
        ar.pass = ar.violations.empty();
        report.pass = report.pass && ar.pass;
        report.actors.push_back(std::move(ar));
    }
    return report;
}

std::vector<AuditReport> audit_sessions(const World& world, const RunResult& run)
{
    const auto catalog = build_catalog(world, run);
    std::vector<AuditReport> out;
    for (const auto uc : kAllUseCases)
        for (const auto mode : kAllModes) {
            std::vector<ObservationLog> logs;
            bool any = false;
            for (const auto& [sid, spec] : run.sessions) {
                if (spec.use_case != uc || spec.mode != mode) continue;
                any = true;
                for (auto& l : run.logs_for(sid)) logs.push_back(std::move(l));
            }
            if (!any) continue;
            auto report = audit_run(logs, policy_for(uc, mode), catalog, run.sound);
            report.sessions.clear();
            for (const auto& [sid, spec] : run.sessions)
                if (spec.use_case == uc && spec.mode == mode) report.sessions.push_back(sid);
            out.push_back(std::move(report));
        }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string_view approach(Mode m) { return m == Mode::current ? "Current" : "Cloud-based"; }

std::string_view use_case_label(UseCase uc)
{
    switch (uc) {
    case UseCase::austrian: return "Austrian citizens";
    case UseCase::representation: return "In representation";
    case UseCase::foreign: return "Foreign citizens";
    }
    return "?";
}

/// Observed categories with markers: '+' annotated, '!' outside the policy.
std::vector<std::string> cell_lines(const ActorReport& a)
{
    if (!a.involved) return {"-"};
    std::set<Category> violating;
    for (const auto& v : a.violations) violating.insert(v.category);
    std::vector<std::string> lines;
    for (const auto c : a.observed) {
        std::string l(to_string(c));
        if (a.annotations.count(c)) l += " [+]";
        if (violating.count(c)) l += " [!]";
        lines.push_back(l);
    }
    for (const auto c : a.missing) lines.push_back("missing: " + std::string(to_string(c)));
    if (lines.empty()) lines.push_back("(routing metadata only)");
    return lines;
}

}  // namespace

std::string render_comparison(const std::vector<AuditReport>& reports)
{
    std::vector<const AuditReport*> rows;
    for (const auto mode : kAllModes)
        for (const auto uc : kAllUseCases) {
            const auto it = std::find_if(reports.begin(), reports.end(), [&](const AuditReport& r) {
                return r.use_case == uc && r.mode == mode;
            });
            if (it == reports.end())
                throw RenderError("no run for " + std::string(to_string(uc)) + "/" +
                                  std::string(to_string(mode)));
            rows.push_back(&*it);
        }

    const auto& actors = audited_actors();
    std::vector<std::size_t> width{11, 17};
    for (const auto& a : actors) width.push_back(a.size());
    std::vector<std::vector<std::vector<std::string>>> cells;
    for (const auto* r : rows) {
        std::vector<std::vector<std::string>> row{{std::string(approach(r->mode))},
                                                  {std::string(use_case_label(r->use_case))}};
        for (const auto& a : actors) row.push_back(cell_lines(r->actor(a)));
        for (std::size_t i = 0; i < row.size(); ++i)
            for (const auto& l : row[i]) width[i] = std::max(width[i], l.size());
        cells.push_back(std::move(row));
    }

    std::ostringstream out;
    auto rule = [&] {
        out << '+';
        for (const auto w : width) out << std::string(w + 2, '-') << '+';
        out << '\n';
    };
    auto emit = [&](const std::vector<std::vector<std::string>>& row) {
        std::size_t h = 0;
        for (const auto& c : row) h = std::max(h, c.size());
        for (std::size_t k = 0; k < h; ++k) {
            out << '|';
            for (std::size_t i = 0; i < row.size(); ++i) {
                const auto s = k < row[i].size() ? row[i][k] : std::string();
                out << ' ' << s << std::string(width[i] - s.size(), ' ') << " |";
            }
            out << '\n';
        }
    };
    rule();
    std::vector<std::vector<std::string>> header{{"Approach"}, {"Use case"}};
    for (const auto& a : actors) header.push_back({a});
    emit(header);
    rule();
    for (const auto& row : cells) {
        emit(row);
        rule();
    }

    out << "[+] annotated: observed and allowed, absent from the published table\n"
        << "[!] outside the disclosure policy\n";
    for (const auto* r : rows) {
        const auto tag = std::string(to_string(r->use_case)) + "/" + std::string(to_string(r->mode));
        for (const auto& a : r->actors) {
            for (const auto c : a.annotations)
                out << "note " << tag << " " << a.actor << ": " << to_string(c)
                    << " visible, omitted by the published table\n";
            for (const auto c : a.extra)
                out << "mismatch " << tag << " " << a.actor << ": " << to_string(c)
                    << " observed, not in the published table\n";
            for (const auto c : a.missing)
                out << "mismatch " << tag << " " << a.actor << ": " << to_string(c)
                    << " in the published table, not observed\n";
            for (const auto& v : a.violations)
                out << "violation " << tag << " " << a.actor << " session " << v.session
                    << " step " << v.step << " " << v.name << ": " << to_string(v.category)
                    << " = " << v.value << '\n';
        }
        out << "verdict " << tag << ": " << (r->pass ? "pass" : "fail")
            << (r->matches_table() ? "" : " (differs from the published table)") << '\n';
    }
    return out.str();
}

std::string report_json(const std::vector<AuditReport>& reports)
{
    auto names = [](const std::set<Category>& s) {
        Json a = Json::array();
        for (const auto c : s) a.push_back(short_name(c));
        return a;
    };
    Json out = Json::array();
    for (const auto& r : reports) {
        Json jr;
        jr["use_case"] = to_string(r.use_case);
        jr["mode"] = to_string(r.mode);
        jr["sessions"] = r.sessions;
        jr["pass"] = r.pass;
        jr["matches_table"] = r.matches_table();
        Json actors = Json::array();
        for (const auto& a : r.actors) {
            Json ja;
            ja["actor"] = a.actor;
            ja["involved"] = a.involved;
            ja["pass"] = a.pass;
            ja["observed"] = names(a.observed);
            ja["annotations"] = names(a.annotations);
            ja["missing"] = names(a.missing);
            ja["extra"] = names(a.extra);
            ja["metadata_entries"] = a.metadata_entries;
            Json vs = Json::array();
            for (const auto& v : a.violations)
                vs.push_back({{"session", v.session},
                              {"step", v.step},
                              {"name", v.name},
                              {"category", short_name(v.category)},
                              {"value", v.value}});
            ja["violations"] = vs;
            actors.push_back(ja);
        }
        jr["actors"] = actors;
        out.push_back(jr);
    }
    return out.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::vector<SweepHit> confidentiality_sweep(const World& world, const RunResult& run)
{
    struct Needle {
        std::string label;
        Bytes raw;
        Bytes hex;
    };
    std::vector<Needle> needles;
    for (auto& v : sensitive_values(world))
        needles.push_back({v.label, v.value, to_bytes(to_hex(v.value))});

    std::vector<SweepHit> hits;
    auto scan = [&](const std::string& where, ByteView hay) {
        for (const auto& n : needles)
            if (contains(hay, n.raw) || contains(hay, n.hex)) hits.push_back({where, n.label});
    };

    std::set<std::string> cloud_sessions;
    for (const auto& [sid, spec] : run.sessions)
        if (spec.mode == Mode::cloud) cloud_sessions.insert(sid);

    for (const auto& log : run.logs) {
        if (!cloud_sessions.count(log.session)) continue;
        for (const auto& e : log.entries) {
            const auto where = log.session + "/" + log.actor + "/" + e.step + "/" + e.name;
            if (e.plaintext) scan(where, *e.plaintext);
            scan(where + " (name)", to_bytes(e.name));
        }
        scan(log.session + "/" + log.actor + " (export)", to_bytes(export_logs_jsonl({log})));
    }
    for (const auto& rec : run.trace.records) {
        if (!cloud_sessions.count(rec.session)) continue;
        const auto& env = rec.envelope;
        if (!actor::cloud_capable(env.receiver) && !actor::cloud_capable(env.sender)) continue;
        scan(rec.session + "/" + env.msg_type + " " + env.sender + "->" + env.receiver,
             env.encode());
    }
    return hits;
}

}  // namespace eidcloud
