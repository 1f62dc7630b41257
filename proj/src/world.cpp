#include "eidcloud/world.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "eidcloud/errors.hpp"
#include "eidcloud/hash.hpp"

namespace eidcloud {

namespace fs = std::filesystem;

std::string_view to_string(Role r)
{
    switch (r) {
    case Role::CCS: return "CCS";
    case Role::SP: return "SP";
    case Role::MOA_ID: return "MOA-ID";
    case Role::MIS: return "MIS";
    case Role::SPR_GW: return "SPR-GW";
    case Role::SR: return "SR";
    case Role::CR: return "CR";
    case Role::PEPS: return "PEPS";
    case Role::F_IdP: return "F-IdP";
    case Role::SRA: return "SRA";
    case Role::EC: return "EC";
    }
    return "?";
}

std::string_view to_string(Trust t) { return t == Trust::trusted ? "trusted" : "cloud-hosted"; }

std::string actor::citizen(std::string_view citizen_id) { return "C_" + std::string(citizen_id); }

bool actor::cloud_capable(std::string_view id)
{
    return id == moa_id || id == mis || id == spr_gw || id == peps;
}

std::string rk_name(std::string_view from, std::string_view to)
{
    return std::string(from) + "->" + std::string(to);
}

bool World::has_actor(std::string_view id) const { return actors.count(std::string(id)) > 0; }

const ActorConfig& World::actor(std::string_view id) const
{
    auto it = actors.find(std::string(id));
    if (it == actors.end()) throw LookupError("unknown actor \"" + std::string(id) + "\"");
    return it->second;
}

const Bytes& World::verification_key(std::string_view id) const
{
    auto it = directory.find(std::string(id));
    if (it == directory.end())
        throw LookupError("no verification key for \"" + std::string(id) + "\"");
    return it->second;
}

SigKeyPair World::signing_key(std::string_view holder) const
{
    const auto& ks = keys(holder);
    return {ks.get(keykind::sig_sk, holder).material, ks.get(keykind::sig_pk, holder).material,
            std::string(holder)};
}

SraKeys World::sra_keys(std::string_view holder) const
{
    const auto& ks = keys(holder);
    SraKeys k;
    k.signing.sk = ks.get(keykind::sig_sk, actor::sra).material;
    k.signing.pk = dss_public_from_secret(k.signing.sk);
    k.signing.owner = std::string(actor::sra);
    k.pin_key = ks.get(keykind::pin_key, actor::sra).material;
    return k;
}

ReIdentityKey World::identity_key(std::string_view holder, std::string_view identity) const
{
    return {std::string(identity), keys(holder).get(keykind::re_sk, identity).material};
}

ReEncKey World::rekey(std::string_view holder, std::string_view from, std::string_view to) const
{
    return ReEncKey::decode(keys(holder).get(keykind::re_rk, rk_name(from, to)).material);
}

PkeKeyPair World::pke_key(std::string_view holder) const
{
    const auto& ks = keys(holder);
    return {ks.get(keykind::pke_sk, holder).material, ks.get(keykind::pke_pk, holder).material,
            std::string(holder)};
}

Bytes World::credential(std::string_view holder, std::string_view name) const
{
    return keys(holder).get(keykind::cred, name).material;
}

Sector World::sector_of(std::string_view sp) const
{
    auto it = sp_registry.sectors.find(std::string(sp));
    if (it == sp_registry.sectors.end())
        throw LookupError("unregistered service provider \"" + std::string(sp) + "\"");
    return it->second;
}

namespace {

ActorConfig& add_actor(World& w, const std::string& id, Role role)
{
    if (w.actors.count(id)) throw SetupError("duplicate actor id \"" + id + "\"");
    auto& a = w.actors[id];
    a.id = id;
    a.role = role;
    a.keys.owner = id;
    return a;
}

void give_signing_pair(World& w, ActorConfig& a, Rng& rng)
{
    auto rng_k = rng.fork("sig/" + a.id);
    auto pair = dss_keygen(a.id, rng_k);
    a.keys.add(std::string(keykind::sig_sk), a.id, pair.sk);
    a.keys.add(std::string(keykind::sig_pk), a.id, pair.pk);
    w.directory[a.id] = pair.pk;
}

void give_rekey(const World& w, ActorConfig& holder, const ReIdentityKey& from_sk,
                const std::string& to, Rng& rng)
{
    auto r = rng.fork("rk/" + from_sk.id + "/" + to);
    auto rk = re_rkgen(w.params, from_sk, from_sk.id, to, r);
    holder.keys.add(std::string(keykind::re_rk), rk_name(from_sk.id, to), rk.encode());
}

World setup(const Scenario& s, ReBackendKind backend)
{
    validate_scenario(s);
    World w;
    w.scenario = s;
    Rng root(s.seed);
    auto rng = root.fork("setup");

    auto [params, msk] = re_setup(s.security_level, s.max_levels,
                                  rng.fork("re-setup").next_u64(), backend);
    w.params = params;

    auto& sra = add_actor(w, std::string(actor::sra), Role::SRA);
    auto& ec = add_actor(w, std::string(actor::ec), Role::EC);
    auto& moaid = add_actor(w, std::string(actor::moa_id), Role::MOA_ID);
    auto& mis = add_actor(w, std::string(actor::mis), Role::MIS);
    auto& sprgw = add_actor(w, std::string(actor::spr_gw), Role::SPR_GW);
    auto& sr = add_actor(w, std::string(actor::sr), Role::SR);
    auto& cr = add_actor(w, std::string(actor::cr), Role::CR);
    auto& peps = add_actor(w, std::string(actor::peps), Role::PEPS);
    auto& fidp = add_actor(w, std::string(actor::fidp), Role::F_IdP);

    auto sra_rng = rng.fork("sra-keys");
    const auto sra_keys = sra_keygen(sra_rng);
    sra.keys.add(std::string(keykind::sig_sk), sra.id, sra_keys.signing.sk);
    sra.keys.add(std::string(keykind::sig_pk), sra.id, sra_keys.signing.pk);
    sra.keys.add(std::string(keykind::pin_key), sra.id, sra_keys.pin_key);
    sra.keys.add(std::string(keykind::re_msk), "msk", msk.msk);
    w.directory[sra.id] = sra_keys.signing.pk;

    for (auto* a : {&ec, &moaid, &mis, &sprgw, &sr, &cr, &peps, &fidp})
        give_signing_pair(w, *a, rng);

    // Identity keys of cloud-hosted components stay with their authority.
    const auto sk_moaid = re_keygen(params, msk, moaid.id);
    const auto sk_mis = re_keygen(params, msk, mis.id);
    const auto sk_sprgw = re_keygen(params, msk, sprgw.id);
    const auto sk_peps = re_keygen(params, msk, peps.id);
    for (const auto* k : {&sk_moaid, &sk_mis, &sk_sprgw})
        sra.keys.add(std::string(keykind::re_sk), k->id, k->sk);
    ec.keys.add(std::string(keykind::re_sk), sk_peps.id, sk_peps.sk);

    const auto sk_cr = re_keygen(params, msk, cr.id);
    cr.keys.add(std::string(keykind::re_sk), sk_cr.id, sk_cr.sk);
    const auto sk_sr = re_keygen(params, msk, sr.id);
    sr.keys.add(std::string(keykind::re_sk), sk_sr.id, sk_sr.sk);
    sr.keys.add(std::string(keykind::sig_sk), sra.id, sra_keys.signing.sk);
    sr.keys.add(std::string(keykind::pin_key), sra.id, sra_keys.pin_key);

    give_rekey(w, moaid, sk_moaid, mis.id, rng);
    give_rekey(w, moaid, sk_moaid, sprgw.id, rng);
    give_rekey(w, mis, sk_mis, cr.id, rng);
    give_rekey(w, mis, sk_mis, moaid.id, rng);
    give_rekey(w, sprgw, sk_sprgw, sr.id, rng);
    give_rekey(w, sprgw, sk_sprgw, moaid.id, rng);
    give_rekey(w, peps, sk_peps, moaid.id, rng);

    for (const auto& sp : s.service_providers) {
        auto& a = add_actor(w, sp.id, Role::SP);
        give_signing_pair(w, a, rng);
        auto r = rng.fork("sp/" + sp.id);
        auto reg = register_service_provider(w.sp_registry, params, msk, sp.id, sp.sector, r);
        a.keys.add(std::string(keykind::re_sk), reg.sp_key.id, reg.sp_key.sk);
        moaid.keys.add(std::string(keykind::re_rk), rk_name(moaid.id, sp.id),
                       reg.rk_moaid_to_sp.encode());
    }

    w.crr.kind = RegisterKind::CRR;
    for (const auto& c : s.citizens)
        w.crr.persons.push_back(
            {c.id, c.given_name, c.family_name, c.date_of_birth, c.crr_number, "AT"});
    w.sr.kind = RegisterKind::SR;
    w.cr.kind = RegisterKind::CR;
    w.cr.sector = s.cr_sector;
    for (const auto& l : s.legal_persons) w.cr.legal_persons.push_back({l.register_number, l.name});

    for (const auto& c : s.citizens) {
        auto& a = add_actor(w, actor::citizen(c.id), Role::CCS);
        give_signing_pair(w, a, rng);
        auto r = rng.fork("card/" + a.id);
        auto pke = pke_keygen(a.id, r);
        a.keys.add(std::string(keykind::pke_sk), a.id, pke.sk);
        a.keys.add(std::string(keykind::pke_pk), a.id, pke.pk);
        const auto& pk = w.directory[a.id];
        const auto cert = issue_certificate(sra_keys.signing,
                                            c.given_name + " " + c.family_name, "AT", pk);
        const auto pseudo = issue_certificate(
            sra_keys.signing, "pseudonym/" + to_hex(key_fingerprint(pk)), "AT", pk);
        a.keys.add(std::string(keykind::cred), "certificate", cert.encode());
        a.keys.add(std::string(keykind::cred), "pseudonym-certificate", pseudo.encode());
        a.keys.add(std::string(keykind::cred), "identity-link",
                   issue_identity_link(sra_keys, w.crr, c.id, cert.reference()).encode());
        a.keys.add(std::string(keykind::cred), "modified-identity-link",
                   issue_modified_identity_link(sra_keys, params, w.crr, c.id, s.sectors, r)
                       .encode());
        const auto sspin_cr = derive_sspin(source_pin_of(sra_keys, w.crr, c.id), s.cr_sector);
        w.cr.representatives.push_back({sspin_cr.value, c.id, pke.pk, pk});
    }

    for (const auto& m : s.mandates) {
        const auto* rep = s.citizen(m.representative);
        std::string mandator_name;
        for (const auto& l : s.legal_persons)
            if (l.register_number == m.mandator) mandator_name = l.name;
        Mandate mand{m.mand_id,
                     m.mandator,
                     mandator_name,
                     rep->given_name + " " + rep->family_name,
                     rep->date_of_birth,
                     m.empowerment,
                     "CR"};
        const auto sspin_cr = derive_sspin(source_pin_of(sra_keys, w.crr, rep->id), s.cr_sector);
        w.cr.mandates.push_back({sspin_cr.value, mand});
    }

    const auto fidp_pair = w.signing_key(fidp.id);
    for (const auto& f : s.foreign_citizens) {
        auto& a = add_actor(w, actor::citizen(f.id), Role::CCS);
        give_signing_pair(w, a, rng);
        const auto& pk = w.directory[a.id];
        const auto subject = f.given_name + " " + f.family_name;
        Certificate cert;
        if (f.credential_valid) {
            cert = issue_certificate(fidp_pair, subject, f.country, pk);
        } else {
            // Self-issued: the F-IdP will not accept it.
            auto r = rng.fork("rogue-ca/" + a.id);
            cert = issue_certificate(dss_keygen("rogue-ca", r), subject, f.country, pk);
        }
        a.keys.add(std::string(keykind::cred), "certificate", cert.encode());
        const ForeignCitizenData fc{f.given_name, f.family_name, f.date_of_birth, f.country,
                                    f.identifier};
        fidp.keys.add(std::string(keykind::record), a.id, fc.encode());
    }
    return w;
}

}  // namespace

World sra_setup(const Scenario& scenario, ReBackendKind backend)
{
    try {
        return setup(scenario, backend);
    } catch (const ScenarioError& e) {
        throw SetupError(e.what());
    } catch (const RegistrationError& e) {
        throw SetupError(e.what());
    } catch (const IssuanceError& e) {
        throw SetupError(e.what());
    }
}

void write_file_atomic(const fs::path& path, std::string_view content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw SetupError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw SetupError("cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw SetupError("cannot replace " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SetupError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

const std::map<std::string, Role>& role_by_name()
{
    static const std::map<std::string, Role> m = [] {
        std::map<std::string, Role> out;
        for (auto r : {Role::CCS, Role::SP, Role::MOA_ID, Role::MIS, Role::SPR_GW, Role::SR,
                       Role::CR, Role::PEPS, Role::F_IdP, Role::SRA, Role::EC})
            out.emplace(std::string(to_string(r)), r);
        return out;
    }();
    return m;
}

}  // namespace

void save_world(const World& w, const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir / "keys", ec);
    if (ec) throw SetupError("cannot create " + (dir / "keys").string() + ": " + ec.message());
    write_file_atomic(dir / "scenario.json", format_scenario(w.scenario));
    write_file_atomic(dir / "params.hex", to_hex(w.params.encode()) + "\n");
    std::string roles;
    for (const auto& [id, a] : w.actors) {
        roles += id + " " + std::string(to_string(a.role)) + "\n";
        write_file_atomic(dir / "keys" / (id + ".keys"), format_keystore(a.keys));
    }
    write_file_atomic(dir / "actors.txt", roles);
    std::string directory;
    for (const auto& [id, pk] : w.directory) directory += id + " " + to_hex(pk) + "\n";
    write_file_atomic(dir / "directory.txt", directory);
    write_file_atomic(dir / "crr.json", format_register(w.crr));
    write_file_atomic(dir / "cr.json", format_register(w.cr));
    write_file_atomic(dir / "sr.json", format_register(w.sr));
}

World load_world(const fs::path& dir)
{
    World w;
    auto context = [&](const fs::path& p, auto&& fn) {
        try {
            return fn(read_file(p));
        } catch (const SetupError&) {
            throw;
        } catch (const Error& e) {
            throw SetupError(p.string() + ": " + e.what());
        }
    };
    w.scenario = context(dir / "scenario.json",
                         [](const std::string& t) { return parse_scenario(t); });
    w.params = context(dir / "params.hex", [](std::string t) {
        while (!t.empty() && (t.back() == '\n' || t.back() == '\r')) t.pop_back();
        return ReParams::decode(from_hex(t));
    });
    context(dir / "actors.txt", [&](const std::string& t) {
        std::istringstream in(t);
        std::string id, role;
        while (in >> id >> role) {
            auto it = role_by_name().find(role);
            if (it == role_by_name().end()) throw SetupError("unknown role \"" + role + "\"");
            auto& a = w.actors[id];
            a.id = id;
            a.role = it->second;
            a.keys = context(dir / "keys" / (id + ".keys"),
                             [](const std::string& k) { return parse_keystore(k); });
            if (a.keys.owner != id) throw SetupError("key store owner mismatch for " + id);
        }
        return 0;
    });
    context(dir / "directory.txt", [&](const std::string& t) {
        std::istringstream in(t);
        std::string id, hex;
        while (in >> id >> hex) w.directory[id] = from_hex(hex);
        return 0;
    });
    w.crr = context(dir / "crr.json", [](const std::string& t) { return parse_register(t); });
    w.cr = context(dir / "cr.json", [](const std::string& t) { return parse_register(t); });
    w.sr = context(dir / "sr.json", [](const std::string& t) { return parse_register(t); });
    for (const auto& sp : w.scenario.service_providers) w.sp_registry.sectors[sp.id] = sp.sector;
    return w;
}

}  // namespace eidcloud
