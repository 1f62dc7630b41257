#pragma once

// Privacy audit of the observation logs of the cloud-capable components.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eidcloud/harness.hpp"
#include "eidcloud/world.hpp"

namespace eidcloud {

enum class Category {
    identity_link,
    sspin,
    signing_certificate,
    governmental_sector,
    mandate_id,
    mandate_information,
    selected_mandate,
    home_country,
    citizen_data,
    /// Actor ids, session ids, consent texts, pseudonym certificates. Never a violation.
    protocol_metadata,
    /// Always a violation.
    uncategorized,
};

/// Row labels as printed in the comparison table.
std::string_view to_string(Category c);
std::string_view short_name(Category c);

/// Every plaintext value the scenario can produce, mapped to its category.
/// The first registration of a value wins.
class Catalog {
public:
    void add(ByteView value, Category c);
    void add(std::string_view value, Category c) { add(to_bytes(value), c); }
    /// uncategorized when the value is unknown.
    Category classify(ByteView value) const;
    std::size_t size() const { return values_.size(); }

private:
    std::map<Bytes, Category> values_;
};

/// Needs the world after the run: the SR rows of registered foreign citizens.
Catalog build_catalog(const World& world, const RunResult& run);

struct SensitiveValue {
    std::string label;
    Bytes value;
};

/// sourcePINs, ssPINs, names, dates of birth, mandate contents other than the
/// mandate id and register label, foreign identifiers.
std::vector<SensitiveValue> sensitive_values(const World& world);

// ---------------------------------------------------------------------------
// Policies

/// The four components the cloud architecture moves to a public cloud.
const std::vector<ActorId>& audited_actors();

/// The published comparison cell; nullopt for a component the use case does not involve.
std::optional<std::set<Category>> table1_cell(UseCase use_case, Mode mode, const ActorId& actor);

struct DisclosurePolicy {
    UseCase use_case = UseCase::austrian;
    Mode mode = Mode::cloud;
    /// Categories each actor may see beyond protocol metadata.
    std::map<ActorId, std::set<Category>> allowed;
    /// Subset of allowed that the published table omits; reported, not failed.
    std::map<ActorId, std::set<Category>> annotated;
};

DisclosurePolicy policy_for(UseCase use_case, Mode mode);

// ---------------------------------------------------------------------------
// Reports

struct Violation {
    std::string session;
    std::string step;
    std::string name;
    Category category = Category::uncategorized;
    /// Printable value or hex.
    std::string value;
};

struct ActorReport {
    ActorId actor;
    bool involved = false;
    std::set<Category> observed;
    std::size_t metadata_entries = 0;
    std::vector<Violation> violations;
    std::set<Category> annotations;
    /// In the published cell but not observed.
    std::set<Category> missing;
    /// Observed but outside the published cell and not annotated.
    std::set<Category> extra;
    bool pass = true;
};

struct AuditReport {
    UseCase use_case = UseCase::austrian;
    Mode mode = Mode::cloud;
    std::vector<std::string> sessions;
    std::vector<ActorReport> actors;
    bool pass = true;

    const ActorReport& actor(const ActorId& id) const;
    /// Cloud rows: observed minus annotations equals the published cell.
    /// Current rows: every published category observed.
    bool matches_table() const;
};

/// Throws AuditRefused for a run on the test-double backend and AuditError
/// when a log belongs to another use case or mode than the policy.
AuditReport audit_run(const std::vector<ObservationLog>& logs, const DisclosurePolicy& policy,
                      const Catalog& catalog, bool sound_backend);

/// Audits every session of the run, grouped by (use case, mode).
std::vector<AuditReport> audit_sessions(const World& world, const RunResult& run);

/// Table built from the observed categories. Throws RenderError unless all
/// six (use case, mode) pairs are present.
std::string render_comparison(const std::vector<AuditReport>& reports);

std::string report_json(const std::vector<AuditReport>& reports);

// ---------------------------------------------------------------------------
// Confidentiality sweep

struct SweepHit {
    std::string where;
    std::string label;
};

/// Raw byte and hex scan of the cloud-mode sessions: every log entry of the
/// audited actors and every envelope they send or receive.
std::vector<SweepHit> confidentiality_sweep(const World& world, const RunResult& run);

}  // namespace eidcloud
