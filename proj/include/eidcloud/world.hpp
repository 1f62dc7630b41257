#pragma once

// The deployed ecosystem after setup: every actor with its key store, the
// public directory of verification keys and the trusted registers.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eidcloud/crypto_core.hpp"
#include "eidcloud/eid_model.hpp"
#include "eidcloud/proxy_reenc.hpp"
#include "eidcloud/scenario.hpp"

namespace eidcloud {

enum class Role { CCS, SP, MOA_ID, MIS, SPR_GW, SR, CR, PEPS, F_IdP, SRA, EC };
enum class Trust { trusted, cloud_hosted };

std::string_view to_string(Role r);
std::string_view to_string(Trust t);

namespace actor {
inline constexpr std::string_view moa_id = "MOA-ID";
inline constexpr std::string_view mis = "MIS";
inline constexpr std::string_view spr_gw = "SPR-GW";
inline constexpr std::string_view sr = "SR";
inline constexpr std::string_view cr = "CR";
inline constexpr std::string_view peps = "PEPS";
inline constexpr std::string_view fidp = "F-IdP";
inline constexpr std::string_view sra = "SRA";
inline constexpr std::string_view ec = "EC";
std::string citizen(std::string_view citizen_id);
/// MOA-ID, MIS, SPR-GW and PEPS: the components that move to a public cloud.
bool cloud_capable(std::string_view id);
}  // namespace actor

// Key store conventions, (kind, name):
//   sig-sk / sig-pk <owner>   own signing pair; sig-sk SRA is the SR's copy
//   re-msk msk                SRA only
//   re-sk <identity>          identity secret key
//   re-rk <from>-><to>        re-encryption key
//   pke-sk / pke-pk <owner>   citizen card encryption pair
//   pin-key SRA               sourcePIN derivation secret
//   cred <name>               citizen card credentials
//   record <citizen actor>    F-IdP citizen data
namespace keykind {
inline constexpr std::string_view sig_sk = "sig-sk";
inline constexpr std::string_view sig_pk = "sig-pk";
inline constexpr std::string_view re_msk = "re-msk";
inline constexpr std::string_view re_sk = "re-sk";
inline constexpr std::string_view re_rk = "re-rk";
inline constexpr std::string_view pke_sk = "pke-sk";
inline constexpr std::string_view pke_pk = "pke-pk";
inline constexpr std::string_view pin_key = "pin-key";
inline constexpr std::string_view cred = "cred";
inline constexpr std::string_view record = "record";
}  // namespace keykind

std::string rk_name(std::string_view from, std::string_view to);

struct ActorConfig {
    ActorId id;
    Role role = Role::CCS;
    KeyStore keys;

    bool cloud_capable() const { return actor::cloud_capable(id); }
    /// Cloud-capable actors are cloud-hosted in cloud mode only.
    Trust trust(Mode mode) const
    {
        return cloud_capable() && mode == Mode::cloud ? Trust::cloud_hosted : Trust::trusted;
    }
};

struct World {
    Scenario scenario;
    ReParams params;
    std::map<ActorId, ActorConfig> actors;
    /// DSS verification keys of every party.
    std::map<ActorId, Bytes> directory;
    SpRegistry sp_registry;
    RegisterStore crr;
    RegisterStore cr;
    RegisterStore sr;

    bool has_actor(std::string_view id) const;
    /// Throws LookupError.
    const ActorConfig& actor(std::string_view id) const;
    const KeyStore& keys(std::string_view id) const { return actor(id).keys; }
    /// Throws LookupError.
    const Bytes& verification_key(std::string_view id) const;

    SigKeyPair signing_key(std::string_view holder) const;
    /// The SRA signing pair and pin key as held by `holder` (SRA or SR).
    SraKeys sra_keys(std::string_view holder) const;
    ReIdentityKey identity_key(std::string_view holder, std::string_view identity) const;
    ReEncKey rekey(std::string_view holder, std::string_view from, std::string_view to) const;
    PkeKeyPair pke_key(std::string_view holder) const;
    Bytes credential(std::string_view holder, std::string_view name) const;
    Sector sector_of(std::string_view sp) const;
};

/// Key generation and distribution by the SRA and the EC. Throws SetupError for
/// an inconsistent scenario.
World sra_setup(const Scenario& scenario, ReBackendKind backend = ReBackendKind::pairing);

/// One key store file per actor, the register fixtures, public parameters and
/// the scenario. Files are replaced atomically.
void save_world(const World& world, const std::filesystem::path& dir);
/// Throws SetupError naming the missing or malformed file.
World load_world(const std::filesystem::path& dir);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace eidcloud
