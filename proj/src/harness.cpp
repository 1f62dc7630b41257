#include "eidcloud/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>

#include "eidcloud/actors.hpp"
#include "eidcloud/hash.hpp"
#include "json_util.hpp"

namespace eidcloud {

using detail::Json;

std::string_view to_string(Source s)
{
    switch (s) {
    case Source::received: return "received";
    case Source::sent: return "sent";
    case Source::internal: return "internal";
    }
    return "?";
}

std::string_view to_string(FlowStatus s)
{
    switch (s) {
    case FlowStatus::completed: return "completed";
    case FlowStatus::denied: return "denied";
    case FlowStatus::aborted: return "aborted";
    }
    return "?";
}

void observe_internal(ObservationLog& log, std::string step, std::string name, ByteView value,
                      FieldTag visibility, Source source)
{
    ObservationEntry e;
    e.seq = log.entries.size();
    e.step = std::move(step);
    e.name = std::move(name);
    e.visibility = visibility;
    e.source = source;
    e.digest = sha256(value);
    if (visibility == FieldTag::plaintext) e.plaintext = Bytes(value.begin(), value.end());
    log.entries.push_back(std::move(e));
}

// ---------------------------------------------------------------------------

void Observatory::open_session(const std::string& session, UseCase use_case, Mode mode)
{
    sessions_[session] = {use_case, mode};
}

ObservationLog& Observatory::log(const ActorId& actor, const std::string& session)
{
    auto key = std::make_pair(session, actor);
    auto it = logs_.find(key);
    if (it != logs_.end()) return it->second;
    auto s = sessions_.find(session);
    if (s == sessions_.end()) throw LookupError("unknown session \"" + session + "\"");
    auto& log = logs_[key];
    log.actor = actor;
    log.session = session;
    log.use_case = s->second.first;
    log.mode = s->second.second;
    return log;
}

std::vector<ObservationLog> Observatory::logs() const
{
    std::vector<ObservationLog> out;
    for (const auto& [k, v] : logs_) out.push_back(v);
    return out;
}

// ---------------------------------------------------------------------------

std::vector<TraceRecord> BusTrace::sub_trace(const std::string& session) const
{
    std::vector<TraceRecord> out;
    for (const auto& r : records)
        if (r.session == session) out.push_back(r);
    return out;
}

Bus::Bus(std::set<ActorId> participants, Observatory& observatory)
    : participants_(std::move(participants)), observatory_(observatory)
{
}

void Bus::observe(const ActorId& actor, const std::string& session, const std::string& step,
                  const Envelope& env, Source source)
{
    if (!Observatory::instrumented(actor)) return;
    auto& log = observatory_.log(actor, session);
    for (const auto& f : env.fields)
        observe_internal(log, step, env.msg_type + "." + f.name, f.value, f.tag, source);
}

DeliveryReceipt Bus::deliver(const std::string& session, const std::string& step, Envelope env)
{
    ++clock_;
    ++trace_.sent;
    TraceRecord rec{clock_, session, step, DeliveryStatus::delivered, {}, {}};
    std::optional<std::string> error;
    if (!participants_.count(env.receiver))
        error = "unknown receiver \"" + env.receiver + "\"";
    else if (auto bad = validate_envelope(env))
        error = "field \"" + *bad + "\" does not match its tag";
    if (error) {
        rec.status = DeliveryStatus::rejected;
        rec.error = *error;
        rec.envelope = std::move(env);
        trace_.records.push_back(std::move(rec));
        ++trace_.rejected;
        throw RoutingError(*error);
    }
    observe(env.sender, session, step, env, Source::sent);
    if (tamper_) tamper_(session, env);
    observe(env.receiver, session, step, env, Source::received);
    rec.envelope = env;
    trace_.records.push_back(std::move(rec));
    ++trace_.delivered;
    pending_.push_back(std::move(env));
    return {clock_};
}

std::optional<Envelope> Bus::take(const ActorId& receiver, const std::string& correlation,
                                  std::string_view msg_type)
{
    auto it = std::find_if(pending_.begin(), pending_.end(), [&](const Envelope& e) {
        return e.receiver == receiver && e.correlation == correlation && e.msg_type == msg_type;
    });
    if (it == pending_.end()) return std::nullopt;
    Envelope out = std::move(*it);
    pending_.erase(it);
    return out;
}

// ---------------------------------------------------------------------------

void FlowTask::resume()
{
    if (done()) return;
    h_.resume();
    if (h_.done() && h_.promise().error) std::rethrow_exception(h_.promise().error);
}

SessionContext::SessionContext(World& world_, Bus& bus_, Observatory& observatory_,
                               SessionSpec spec_, std::string id_, Rng rng_)
    : world(world_), bus(bus_), observatory(observatory_), spec(std::move(spec_)),
      id(std::move(id_)), rng(std::move(rng_))
{
    outcome.session = id;
    outcome.use_case = spec.use_case;
    outcome.mode = spec.mode;
    outcome.citizen = spec.citizen;
    outcome.sp = spec.sp;
}

std::suspend_always SessionContext::step(std::string name)
{
    finish_step();
    current_step = std::move(name);
    outcome.steps.push_back(current_step);
    return {};
}

void SessionContext::finish_step()
{
    const auto& leak = world.scenario.leak;
    if (!leak || leak->use_case != spec.use_case || leak->step != current_step) return;
    std::string value;
    if (const auto* f = world.scenario.foreign_citizen(spec.citizen)) {
        if (leak->attribute == "given_name") value = f->given_name;
        if (leak->attribute == "family_name") value = f->family_name;
        if (leak->attribute == "date_of_birth") value = f->date_of_birth;
        if (leak->attribute == "identifier") value = f->identifier;
    } else if (const auto* c = world.scenario.citizen(spec.citizen)) {
        if (leak->attribute == "given_name") value = c->given_name;
        if (leak->attribute == "family_name") value = c->family_name;
        if (leak->attribute == "date_of_birth") value = c->date_of_birth;
    }
    if (value.empty()) return;
    remember_text(leak->actor, "leak." + leak->attribute, value);
}

void SessionContext::remember(const ActorId& actor, std::string name, ByteView value, FieldTag tag)
{
    if (Observatory::instrumented(actor))
        observe_internal(observatory.log(actor, id), current_step, name, value, tag);
    memory[actor].push_back({std::move(name), tag, Bytes(value.begin(), value.end())});
}

void SessionContext::send(Envelope env)
{
    env.correlation = id;
    bus.deliver(id, current_step, std::move(env));
}

Envelope SessionContext::receive(const ActorId& receiver, std::string_view msg_type)
{
    auto env = bus.take(receiver, id, msg_type);
    if (!env) abort("no " + std::string(msg_type) + " pending for " + receiver);
    return std::move(*env);
}

Envelope SessionContext::receive_signed(const ActorId& receiver, std::string_view msg_type,
                                        const ActorId& signer)
{
    auto env = receive(receiver, msg_type);
    require(env.sender == signer, std::string(msg_type) + " not sent by " + signer);
    require(verify_envelope(env, world.verification_key(signer)),
            std::string(msg_type) + ": signature of " + signer + " does not verify");
    return env;
}

void SessionContext::abort(const std::string& reason) const { throw FlowAbort(current_step, reason); }

void SessionContext::deny(const std::string& reason) const { throw FlowDenied(current_step, reason); }

// ---------------------------------------------------------------------------

const FlowOutcome& RunResult::outcome(const std::string& session) const
{
    for (const auto& o : outcomes)
        if (o.session == session) return o;
    throw LookupError("unknown session \"" + session + "\"");
}

std::vector<ObservationLog> RunResult::logs_for(const std::string& session) const
{
    std::vector<ObservationLog> out;
    for (const auto& l : logs)
        if (l.session == session) out.push_back(l);
    return out;
}

std::string session_id(std::size_t index)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "s%03zu", index + 1);
    return buf;
}

RunResult run_sessions(World& world, const std::vector<SessionSpec>& sessions,
                       const RunOptions& options)
{
    Observatory observatory;
    std::set<ActorId> participants;
    for (const auto& [id, a] : world.actors) participants.insert(id);
    Bus bus(participants, observatory);
    if (options.tamper) bus.set_tamper(options.tamper);
    const Rng root(options.seed.value_or(world.scenario.seed));

    RunResult result;
    result.sound = world.params.sound();
    std::vector<std::unique_ptr<SessionContext>> contexts;
    std::vector<FlowTask> tasks;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        const auto sid = session_id(i);
        observatory.open_session(sid, sessions[i].use_case, sessions[i].mode);
        contexts.push_back(std::make_unique<SessionContext>(world, bus, observatory, sessions[i],
                                                            sid, root.fork("session/" + sid)));
        tasks.push_back(flow_for(sessions[i].use_case)(*contexts.back()));
        result.sessions.emplace_back(sid, sessions[i]);
    }

    std::vector<bool> active(sessions.size(), true);
    auto remaining = sessions.size();
    while (remaining > 0) {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (!active[i]) continue;
            auto& ctx = *contexts[i];
            auto& out = ctx.outcome;
            bool finished = false;
            try {
                tasks[i].resume();
                if (tasks[i].done()) {
                    ctx.finish_step();
                    out.status = FlowStatus::completed;
                    out.step = ctx.current_step;
                    finished = true;
                }
            } catch (const FlowDenied& e) {
                out.status = FlowStatus::denied;
                out.step = e.step();
                out.reason = e.reason();
                finished = true;
            } catch (const FlowAbort& e) {
                out.status = FlowStatus::aborted;
                out.step = e.step();
                out.reason = e.reason();
                finished = true;
            } catch (const Error& e) {
                out.status = FlowStatus::aborted;
                out.step = ctx.current_step;
                out.reason = e.what();
                finished = true;
            }
            if (finished) {
                active[i] = false;
                --remaining;
            }
        }
    }

    for (auto& c : contexts) {
        result.outcomes.push_back(c->outcome);
        result.metadata.push_back(c->id);
        for (auto& m : c->metadata) result.metadata.push_back(m);
        result.memory[c->id] = c->memory;
    }
    result.trace = bus.trace();
    result.logs = observatory.logs();
    return result;
}

RunResult run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed,
                       ReBackendKind backend)
{
    Scenario s = scenario;
    if (seed) s.seed = *seed;
    World world = sra_setup(s, backend);
    return run_sessions(world, s.sessions);
}

// ---------------------------------------------------------------------------

namespace {

bool printable(ByteView b)
{
    return std::all_of(b.begin(), b.end(), [](std::uint8_t c) { return c >= 0x20 && c < 0x7f; });
}

std::string line(const Json& j) { return j.dump() + "\n"; }

}  // namespace

std::string export_trace_jsonl(const BusTrace& trace)
{
    std::string out;
    for (const auto& r : trace.records) {
        Json j;
        j["ts"] = r.ts;
        j["session"] = r.session;
        j["step"] = r.step;
        j["status"] = r.status == DeliveryStatus::delivered ? "delivered" : "rejected";
        if (!r.error.empty()) j["error"] = r.error;
        j["msg_type"] = r.envelope.msg_type;
        j["sender"] = r.envelope.sender;
        j["receiver"] = r.envelope.receiver;
        auto fields = Json::array();
        for (const auto& f : r.envelope.fields)
            fields.push_back({{"name", f.name},
                              {"tag", std::string(to_string(f.tag))},
                              {"digest", digest_hex(f.value)}});
        j["fields"] = fields;
        j["envelope"] = to_hex(r.envelope.encode());
        out += line(j);
    }
    return out;
}

std::string export_logs_jsonl(const std::vector<ObservationLog>& logs)
{
    std::string out;
    for (const auto& log : logs)
        for (const auto& e : log.entries) {
            Json j;
            j["actor"] = log.actor;
            j["session"] = log.session;
            j["use_case"] = std::string(to_string(log.use_case));
            j["mode"] = std::string(to_string(log.mode));
            j["seq"] = e.seq;
            j["step"] = e.step;
            j["name"] = e.name;
            j["visibility"] = std::string(to_string(e.visibility));
            j["source"] = std::string(to_string(e.source));
            j["digest"] = to_hex(e.digest);
            if (e.plaintext) {
                if (printable(*e.plaintext))
                    j["value"] = to_string(*e.plaintext);
                else
                    j["value_hex"] = to_hex(*e.plaintext);
            }
            out += line(j);
        }
    return out;
}

std::string export_outcomes_jsonl(const std::vector<FlowOutcome>& outcomes)
{
    std::string out;
    for (const auto& o : outcomes) {
        Json j;
        j["session"] = o.session;
        j["use_case"] = std::string(to_string(o.use_case));
        j["mode"] = std::string(to_string(o.mode));
        j["citizen"] = o.citizen;
        j["sp"] = o.sp;
        j["status"] = std::string(to_string(o.status));
        j["step"] = o.step;
        j["reason"] = o.reason;
        j["steps"] = o.steps;
        Json attrs = Json::object();
        for (const auto& [k, v] : o.sp_attributes) attrs[k] = to_hex(v);
        j["attributes"] = attrs;
        Json facts = Json::object();
        for (const auto& [k, v] : o.facts) facts[k] = v;
        j["facts"] = facts;
        out += line(j);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<MutationCase> run_mutation_suite(const World& world, const SessionSpec& session,
                                             std::optional<std::uint64_t> seed)
{
    World clean = world;
    const auto base = run_sessions(clean, {session}, {seed, {}});

    struct Target {
        std::string msg_type;
        std::size_t occurrence;
        std::size_t field;
        std::string name;
    };
    std::vector<Target> targets;
    std::map<std::string, std::size_t> seen;
    for (const auto& r : base.trace.records) {
        if (r.status != DeliveryStatus::delivered) continue;
        const auto& env = r.envelope;
        const auto occurrence = seen[env.msg_type]++;
        const bool is_signed = std::any_of(env.fields.begin(), env.fields.end(), [](const Field& f) {
            return f.tag == FieldTag::signature;
        });
        if (!is_signed) continue;
        for (std::size_t i = 0; i < env.fields.size(); ++i)
            if (!env.fields[i].value.empty())
                targets.push_back({env.msg_type, occurrence, i, env.fields[i].name});
    }

    std::vector<MutationCase> out;
    for (const auto& t : targets) {
        auto counter = std::make_shared<std::size_t>(0);
        RunOptions opts;
        opts.seed = seed;
        opts.tamper = [t, counter](const std::string&, Envelope& env) {
            if (env.msg_type != t.msg_type) return;
            if ((*counter)++ != t.occurrence) return;
            auto& v = env.fields.at(t.field).value;
            v[v.size() / 2] ^= 0x01;
        };
        World w = world;
        auto r = run_sessions(w, {session}, opts);
        out.push_back({t.msg_type, t.occurrence, t.name, r.outcomes.front()});
    }
    return out;
}

}  // namespace eidcloud
