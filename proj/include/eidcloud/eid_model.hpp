#pragma once

// Austrian identity data model: sourcePIN and ssPIN derivation, the Identity
// Link in its conventional and modified (cloud) forms, certificates, register
// contents, mandates and service-provider registration.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eidcloud/bytes.hpp"
#include "eidcloud/crypto_core.hpp"
#include "eidcloud/proxy_reenc.hpp"
#include "eidcloud/redactable_sig.hpp"
#include "eidcloud/rng.hpp"

namespace eidcloud {

using Sector = std::string;

/// The ten sector labels used when a scenario does not list its own.
std::vector<Sector> default_sectors();

struct SourcePin {
    Bytes value;
    std::string subject;
    bool operator==(const SourcePin&) const = default;
};

struct SsPin {
    Bytes value;
    Sector sector;
    bool operator==(const SsPin&) const = default;
};

/// Keyed one-way derivation of a sourcePIN from a register number.
/// `register_label` is "CRR" for residents and "SR" for foreign citizens.
SourcePin derive_source_pin(ByteView pin_key, std::string_view register_label,
                            std::string_view number, std::string subject);

/// SHA-256(sourcePIN || ':' || sector). Throws ParameterError for an empty sector.
SsPin derive_sspin(const SourcePin& source_pin, const Sector& sector);

// ---------------------------------------------------------------------------
// Attribute labels and encoding

namespace label {
inline constexpr std::string_view given_name = "given_name";
inline constexpr std::string_view family_name = "family_name";
inline constexpr std::string_view date_of_birth = "date_of_birth";
inline constexpr std::string_view source_pin = "source_pin";
inline constexpr std::string_view cert_ref = "cert_ref";
inline constexpr std::string_view mandate = "mandate";
std::string sspin(const Sector& sector);
}  // namespace label

struct Attribute {
    std::string label;
    Bytes value;
    bool operator==(const Attribute&) const = default;
};

Bytes encode_attribute(const Attribute& a);
/// Throws DecodeError.
Attribute decode_attribute(ByteView in);

// ---------------------------------------------------------------------------
// Keys of the SourcePIN Register Authority

struct SraKeys {
    /// Signs Identity Links (DSS) and modified Identity Links (redactable).
    SigKeyPair signing;
    /// Secret of the sourcePIN derivation.
    Bytes pin_key;
};

SraKeys sra_keygen(Rng& rng);

// ---------------------------------------------------------------------------
// Certificates

struct Certificate {
    std::string subject;
    std::string country;
    Bytes public_key;
    std::string issuer;
    Signature issuer_sig;

    Bytes tbs() const;
    Bytes encode() const;
    static Certificate decode(ByteView in);
    /// SHA-256 of the encoding; the "certificate reference" of an Identity Link.
    Bytes reference() const;
    bool operator==(const Certificate&) const = default;
};

Certificate issue_certificate(const SigKeyPair& ca, std::string subject, std::string country,
                              Bytes public_key);
bool verify_certificate(ByteView ca_pk, const Certificate& cert);

// ---------------------------------------------------------------------------
// Registers

enum class RegisterKind { CRR, SR, CR };

std::string_view to_string(RegisterKind kind);

struct PersonRecord {
    std::string citizen_id;
    std::string given_name;
    std::string family_name;
    std::string date_of_birth;
    /// CRR number for residents, foreign identifier for SR rows.
    std::string register_number;
    std::string country;
    bool operator==(const PersonRecord&) const = default;
};

struct LegalPerson {
    std::string register_number;
    std::string name;
    bool operator==(const LegalPerson&) const = default;
};

struct Mandate {
    std::string mand_id;
    std::string mandator_register_number;
    std::string mandator_name;
    std::string representative_name;
    std::string representative_dob;
    std::string empowerment;
    std::string register_label = "CR";

    /// Canonical record; the electronic mandate handed to the service provider.
    Bytes encode() const;
    static Mandate decode(ByteView in);
    /// Named fields in a fixed order, mand_id first.
    std::vector<std::pair<std::string, std::string>> fields() const;
    bool operator==(const Mandate&) const = default;
};

/// A CR row keyed by the representative's ssPIN for the CR sector.
struct MandateRow {
    Bytes representative_sspin;
    Mandate mandate;
    bool operator==(const MandateRow&) const = default;
};

/// Keys the CR needs to answer a representative: the citizen's encryption key
/// (mandate list) and signature verification key (mandID selection).
struct RepresentativeRow {
    Bytes sspin;
    std::string citizen_id;
    Bytes pke_pk;
    Bytes sig_pk;
    bool operator==(const RepresentativeRow&) const = default;
};

struct RegisterStore {
    RegisterKind kind = RegisterKind::CRR;
    /// CR only: the sector its lookups are keyed by.
    Sector sector;
    std::vector<PersonRecord> persons;
    std::vector<LegalPerson> legal_persons;
    std::vector<RepresentativeRow> representatives;
    std::vector<MandateRow> mandates;

    const PersonRecord* find_person(std::string_view citizen_id) const;
    const RepresentativeRow* find_representative(ByteView sspin) const;
    bool operator==(const RegisterStore&) const = default;
};

/// JSON fixture, one file per register. Throws ScenarioError with line context.
std::string format_register(const RegisterStore& store);
RegisterStore parse_register(std::string_view text);

/// All mandates whose representative matches `sspin_cr`, ordered by mand_id.
std::vector<Mandate> cr_find_mandates(const RegisterStore& cr, const SsPin& sspin_cr);
/// Throws LookupError for an unknown id.
Mandate cr_fetch_mandate(const RegisterStore& cr, std::string_view mand_id);
/// Throws LookupError for an unknown id.
const MandateRow& cr_fetch_row(const RegisterStore& cr, std::string_view mand_id);

// ---------------------------------------------------------------------------
// Identity Links

struct IdentityLink {
    std::vector<Attribute> attributes;
    Signature issuer_sig;

    /// Bytes covered by issuer_sig.
    Bytes signed_bytes() const;
    /// Throws LookupError.
    const Bytes& get(std::string_view label) const;
    Bytes encode() const;
    static IdentityLink decode(ByteView in);
    bool operator==(const IdentityLink&) const = default;
};

/// sourcePIN of a registered person: derived from the CRR number, or the SR
/// derivation over country and foreign identifier. Throws IssuanceError.
SourcePin source_pin_of(const SraKeys& sra, const RegisterStore& reg, std::string_view citizen_id);

/// Throws IssuanceError for a person absent from `reg` (CRR or SR).
IdentityLink issue_identity_link(const SraKeys& sra, const RegisterStore& reg,
                                 std::string_view citizen_id, ByteView cert_ref);
bool verify_identity_link(ByteView sra_pk, const IdentityLink& link);

/// Block layout: given name, family name, date of birth, then one ssPIN per sector.
std::vector<std::string> modified_link_labels(const std::vector<Sector>& sectors);

struct ModifiedIdentityLink {
    /// Public layout; each block's plaintext repeats its label.
    std::vector<std::string> labels;
    BlockMessage blocks;
    RedactableSignature rs_sig;

    /// 1-based block index. Throws LookupError.
    std::size_t index_of(std::string_view label) const;
    Bytes encode() const;
    static ModifiedIdentityLink decode(ByteView in);
    bool operator==(const ModifiedIdentityLink&) const = default;
};

/// Every block is an RE ciphertext for `target` of encode_attribute(label, value).
/// Throws IssuanceError for an unknown person or an empty sector list.
ModifiedIdentityLink issue_modified_identity_link(const SraKeys& sra, const ReParams& params,
                                                  const RegisterStore& reg,
                                                  std::string_view citizen_id,
                                                  const std::vector<Sector>& sectors, Rng& rng,
                                                  const std::string& target = "MOA-ID");
bool verify_modified_identity_link(ByteView sra_pk, const ModifiedIdentityLink& link);

/// Redacts every visible block whose label is not in `keep`.
ModifiedIdentityLink redact_modified_link(const ModifiedIdentityLink& link, ByteView sra_pk,
                                          const std::vector<std::string>& keep);

// ---------------------------------------------------------------------------
// Service providers

struct SpRegistry {
    std::map<std::string, Sector> sectors;
};

struct SpRegistration {
    ReIdentityKey sp_key;
    ReEncKey rk_moaid_to_sp;
};

/// Throws RegistrationError for a duplicate id.
SpRegistration register_service_provider(SpRegistry& registry, const ReParams& params,
                                         const ReMasterKey& msk, const std::string& sp_id,
                                         const Sector& sector, Rng& rng);

// ---------------------------------------------------------------------------
// Foreign citizens

struct ForeignCitizenData {
    std::string given_name;
    std::string family_name;
    std::string date_of_birth;
    std::string country;
    std::string identifier;

    Bytes encode() const;
    /// Throws DecodeError.
    static ForeignCitizenData decode(ByteView in);
    bool operator==(const ForeignCitizenData&) const = default;
};

/// SR row id for a foreign citizen.
std::string foreign_citizen_key(const ForeignCitizenData& fc);

/// Idempotent: an existing row is reused. Returns the row id.
/// Throws RegistrationError for malformed data.
std::string sr_register(RegisterStore& sr, const ForeignCitizenData& fc);

struct ForeignRegistration {
    std::string citizen_key;
    bool created = false;
    ModifiedIdentityLink link;
};

/// Registers the citizen and issues a modified link whose only visible ssPIN
/// block is the one for `sector`. Blocks are addressed to `target`.
ForeignRegistration register_foreign_citizen(RegisterStore& sr, const SraKeys& sra,
                                             const ReParams& params, ByteView fc_data,
                                             const Sector& sector,
                                             const std::vector<Sector>& sectors, Rng& rng,
                                             const std::string& target = "SPR-GW");

}  // namespace eidcloud
