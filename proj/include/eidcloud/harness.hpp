#pragma once

// In-process message bus, honest-but-curious observers on the cloud-capable
// components, and the session scheduler.

#include <coroutine>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "eidcloud/envelope.hpp"
#include "eidcloud/errors.hpp"
#include "eidcloud/rng.hpp"
#include "eidcloud/scenario.hpp"
#include "eidcloud/world.hpp"

namespace eidcloud {

// ---------------------------------------------------------------------------
// Observation logs

enum class Source { received, sent, internal };
std::string_view to_string(Source s);

struct ObservationEntry {
    std::uint64_t seq = 0;
    std::string step;
    std::string name;
    FieldTag visibility = FieldTag::plaintext;
    Source source = Source::internal;
    /// SHA-256 of the value.
    Bytes digest;
    /// Present for plaintext entries only.
    std::optional<Bytes> plaintext;
};

struct ObservationLog {
    ActorId actor;
    std::string session;
    UseCase use_case = UseCase::austrian;
    Mode mode = Mode::cloud;
    std::vector<ObservationEntry> entries;
};

void observe_internal(ObservationLog& log, std::string step, std::string name, ByteView value,
                      FieldTag visibility, Source source = Source::internal);

class Observatory {
public:
    void open_session(const std::string& session, UseCase use_case, Mode mode);
    /// MOA-ID, MIS, SPR-GW and PEPS, in both modes.
    static bool instrumented(std::string_view actor) { return actor::cloud_capable(actor); }
    /// Creates the log on first use. Throws LookupError for an unopened session.
    ObservationLog& log(const ActorId& actor, const std::string& session);
    /// Ordered by (session, actor).
    std::vector<ObservationLog> logs() const;

private:
    std::map<std::string, std::pair<UseCase, Mode>> sessions_;
    std::map<std::pair<std::string, ActorId>, ObservationLog> logs_;
};

// ---------------------------------------------------------------------------
// Bus

enum class DeliveryStatus { delivered, rejected };

struct TraceRecord {
    std::uint64_t ts = 0;
    std::string session;
    std::string step;
    DeliveryStatus status = DeliveryStatus::delivered;
    std::string error;
    Envelope envelope;
};

struct BusTrace {
    std::vector<TraceRecord> records;
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t rejected = 0;

    std::vector<TraceRecord> sub_trace(const std::string& session) const;
};

struct DeliveryReceipt {
    std::uint64_t ts = 0;
};

/// Called on every envelope after validation and before delivery.
using TamperHook = std::function<void(const std::string& session, Envelope&)>;

class Bus {
public:
    Bus(std::set<ActorId> participants, Observatory& observatory);

    /// Throws RoutingError for an unknown receiver or a mislabelled field.
    DeliveryReceipt deliver(const std::string& session, const std::string& step, Envelope env);
    /// Oldest pending envelope for the receiver with this correlation and type.
    std::optional<Envelope> take(const ActorId& receiver, const std::string& correlation,
                                 std::string_view msg_type);
    void set_tamper(TamperHook hook) { tamper_ = std::move(hook); }
    const BusTrace& trace() const { return trace_; }
    std::uint64_t now() const { return clock_; }

private:
    void observe(const ActorId& actor, const std::string& session, const std::string& step,
                 const Envelope& env, Source source);

    std::set<ActorId> participants_;
    Observatory& observatory_;
    TamperHook tamper_;
    BusTrace trace_;
    std::vector<Envelope> pending_;
    std::uint64_t clock_ = 0;
};

// ---------------------------------------------------------------------------
// Flow sessions

enum class FlowStatus { completed, denied, aborted };
std::string_view to_string(FlowStatus s);

/// A failed verification or malformed payload; names the figure step.
class FlowAbort : public Error {
public:
    FlowAbort(std::string step, const std::string& reason)
        : Error("step " + step + ": " + reason), step_(std::move(step)), reason_(reason)
    {
    }
    const std::string& step() const { return step_; }
    const std::string& reason() const { return reason_; }

private:
    std::string step_;
    std::string reason_;
};

/// Consent refused or nothing to select; the SP denies access.
class FlowDenied : public FlowAbort {
public:
    using FlowAbort::FlowAbort;
};

struct FlowOutcome {
    std::string session;
    UseCase use_case = UseCase::austrian;
    Mode mode = Mode::cloud;
    std::string citizen;
    std::string sp;
    FlowStatus status = FlowStatus::aborted;
    /// Last step reached; the failing step for aborts and denials.
    std::string step;
    std::string reason;
    std::vector<std::string> steps;
    /// Identity data the SP holds after step 8 / 17 / 21, keyed by attribute label.
    std::map<std::string, Bytes> sp_attributes;
    /// Small facts recorded for tests, e.g. the RE level seen by the SR.
    std::map<std::string, std::string> facts;
};

struct MemoryItem {
    std::string name;
    FieldTag tag = FieldTag::plaintext;
    Bytes value;
};

class SessionContext;

/// Coroutine handle of one running flow.
class FlowTask {
public:
    struct promise_type {
        std::exception_ptr error;
        FlowTask get_return_object()
        {
            return FlowTask(std::coroutine_handle<promise_type>::from_promise(*this));
        }
        std::suspend_always initial_suspend() noexcept { return {}; }
        std::suspend_always final_suspend() noexcept { return {}; }
        void return_void() {}
        void unhandled_exception() { error = std::current_exception(); }
    };

    explicit FlowTask(std::coroutine_handle<promise_type> h) : h_(h) {}
    FlowTask(FlowTask&& o) noexcept : h_(std::exchange(o.h_, {})) {}
    FlowTask& operator=(FlowTask&& o) noexcept
    {
        if (this != &o) {
            if (h_) h_.destroy();
            h_ = std::exchange(o.h_, {});
        }
        return *this;
    }
    FlowTask(const FlowTask&) = delete;
    FlowTask& operator=(const FlowTask&) = delete;
    ~FlowTask()
    {
        if (h_) h_.destroy();
    }

    bool done() const { return !h_ || h_.done(); }
    /// Runs to the next step boundary; rethrows a failure of the flow.
    void resume();

private:
    std::coroutine_handle<promise_type> h_;
};

class SessionContext {
public:
    SessionContext(World& world, Bus& bus, Observatory& observatory, SessionSpec spec,
                   std::string id, Rng rng);

    World& world;
    Bus& bus;
    Observatory& observatory;
    const SessionSpec spec;
    const std::string id;
    Rng rng;
    std::string current_step;
    FlowOutcome outcome;
    std::map<ActorId, std::vector<MemoryItem>> memory;
    /// Protocol values minted during the session (consent texts and the like).
    std::vector<std::string> metadata;

    /// Enters a figure step; the scheduler may switch sessions here.
    std::suspend_always step(std::string name);
    /// Applies end-of-step hooks for the step just finished.
    void finish_step();

    bool cloud() const { return spec.mode == Mode::cloud; }
    /// Records a value held in the actor's memory; instrumented actors log it.
    void remember(const ActorId& actor, std::string name, ByteView value, FieldTag tag);
    void remember_text(const ActorId& actor, std::string name, std::string_view value)
    {
        remember(actor, std::move(name), to_bytes(value), FieldTag::plaintext);
    }

    void send(Envelope env);
    /// Throws FlowAbort if no such envelope is pending.
    Envelope receive(const ActorId& receiver, std::string_view msg_type);
    /// receive() plus the envelope signature of `signer`, checked before any parsing.
    Envelope receive_signed(const ActorId& receiver, std::string_view msg_type,
                            const ActorId& signer);

    [[noreturn]] void abort(const std::string& reason) const;
    [[noreturn]] void deny(const std::string& reason) const;
    void require(bool ok, const std::string& reason) const
    {
        if (!ok) abort(reason);
    }
};

using FlowFn = FlowTask (*)(SessionContext&);

// ---------------------------------------------------------------------------
// Running scenarios

struct RunOptions {
    std::optional<std::uint64_t> seed;
    TamperHook tamper;
};

struct RunResult {
    bool sound = true;
    BusTrace trace;
    std::vector<ObservationLog> logs;
    std::vector<FlowOutcome> outcomes;
    std::vector<std::pair<std::string, SessionSpec>> sessions;
    std::vector<std::string> metadata;
    /// Session id -> actor -> memory at session end.
    std::map<std::string, std::map<ActorId, std::vector<MemoryItem>>> memory;

    const FlowOutcome& outcome(const std::string& session) const;
    std::vector<ObservationLog> logs_for(const std::string& session) const;
};

std::string session_id(std::size_t index);

/// Runs the sessions round-robin, one figure step each, in session-id order.
RunResult run_sessions(World& world, const std::vector<SessionSpec>& sessions,
                       const RunOptions& options = {});
/// Setup plus run_sessions over the scenario's session list.
RunResult run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed = std::nullopt,
                       ReBackendKind backend = ReBackendKind::pairing);

// Line-delimited JSON, one record per line, stable order.
//   trace:  ts, session, step, status, error?, msg_type, sender, receiver,
//           fields[{name, tag, digest}], envelope (hex)
//   logs:   actor, session, use_case, mode, seq, step, name, visibility, source,
//           digest, value | value_hex
//   outcomes: session, use_case, mode, citizen, sp, status, step, reason, steps,
//           attributes{label: hex}, facts
std::string export_trace_jsonl(const BusTrace& trace);
std::string export_logs_jsonl(const std::vector<ObservationLog>& logs);
std::string export_outcomes_jsonl(const std::vector<FlowOutcome>& outcomes);

// ---------------------------------------------------------------------------
// Mutation harness

struct MutationCase {
    std::string msg_type;
    /// Index among envelopes of this type within the session.
    std::size_t occurrence = 0;
    std::string field;
    FlowOutcome outcome;
};

/// Flips the middle byte of each field of each signed envelope of one session,
/// one mutation per run, on a fresh copy of `world`.
std::vector<MutationCase> run_mutation_suite(const World& world, const SessionSpec& session,
                                             std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace eidcloud
