#pragma once

// Live monitoring of single-arm trials. Each session is an append-only event
// log; the current state is a fold of that log, persisted as one JSON-lines
// file per session plus an index snapshot.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "curtail/estimation.hpp"
#include "curtail/exact_core.hpp"
#include "curtail/intervals.hpp"
#include "curtail/json_io.hpp"

namespace curtail {

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mutation not allowed in the session's current status.
class ConflictError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Optimistic-concurrency failure: the caller's expected sequence is stale.
class VersionConflictError : public ConflictError {
public:
    using ConflictError::ConflictError;
};

enum class SessionStatus { Enrolling, StoppedEfficacy, StoppedFutility, Finalized };

std::string_view to_string(SessionStatus s);

struct FinalReport {
    int m = 0;
    int s = 0;
    EstimateReport estimate;              // stage-wise MUE, plug-in bias adjustment
    double bias_adjusted_root = 0.0;      // root-solve bias adjustment
    std::vector<ConfidenceInterval> intervals;  // kAllIntervalMethods order

    friend bool operator==(const FinalReport& a, const FinalReport& b);
};

json to_json(const FinalReport& r);
FinalReport final_report_from_json(const json& j);

FinalReport compute_final_report(const Design& design, const Hypotheses& hyp, int m, int s);

struct TrialSession {
    std::string id;
    Hypotheses hyp;
    Design design{1, 1};
    std::vector<bool> outcomes;
    SessionStatus status = SessionStatus::Enrolling;
    std::uint64_t seq = 0;  // sequence number of the last applied event
    std::int64_t created_ms = 0;
    std::int64_t updated_ms = 0;
    std::optional<FinalReport> final_report;

    int enrolled() const { return static_cast<int>(outcomes.size()); }
    int responders() const;
    // Decision at the current (k, s); Continue before the first patient.
    StageDecision decision() const;
    int responders_needed() const;
};

// Everything but timestamps.
bool same_state(const TrialSession& a, const TrialSession& b);

json to_json(const TrialSession& s);

// Status implied by the outcomes alone (never Finalized).
SessionStatus derive_status(const Design& design, const std::vector<bool>& outcomes);

enum class EventKind { Created, OutcomeRecorded, OutcomeUndone, Finalized };

std::string_view to_string(EventKind k);

struct EventRecord {
    std::string session_id;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::Created;
    json payload;
    std::int64_t timestamp_ms = 0;
};

json to_json(const EventRecord& e);
EventRecord event_from_json(const json& j);

// Apply one event to a session (Created starts from an empty session).
void apply_event(TrialSession& session, const EventRecord& event);
TrialSession replay(const std::vector<EventRecord>& events);

struct RecordResult {
    StageDecision decision = StageDecision::Continue;
    int responders_needed = 0;
    TrialSession session;
};

// Thread-safe store. Writes to one session are serialised; reads return
// immutable snapshots. With an empty data directory nothing is persisted.
class TrialStore {
public:
    using Clock = std::function<std::int64_t()>;

    explicit TrialStore(std::filesystem::path data_dir = {}, Clock clock = {});

    TrialSession create(const Hypotheses& hyp);
    TrialSession get(const std::string& id) const;
    std::vector<TrialSession> list() const;

    // expected_seq, when given, must equal the session's current seq.
    RecordResult record_outcome(const std::string& id, bool responder,
                                std::optional<std::uint64_t> expected_seq = std::nullopt);
    TrialSession undo_outcome(const std::string& id,
                              std::optional<std::uint64_t> expected_seq = std::nullopt);
    FinalReport finalize(const std::string& id);

    std::vector<EventRecord> events(const std::string& id) const;

private:
    struct Entry {
        std::mutex write_mutex;
        mutable std::shared_mutex snapshot_mutex;
        std::shared_ptr<const TrialSession> snapshot;
        std::vector<EventRecord> log;
    };

    std::shared_ptr<Entry> entry(const std::string& id) const;
    void commit(Entry& e, EventRecord event, TrialSession next);
    void append_to_disk(const EventRecord& event) const;
    void write_index() const;
    void load();
    std::string new_id();

    std::filesystem::path data_dir_;
    Clock clock_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::mutex id_mutex_;
    std::uint64_t id_state_;
    mutable std::mutex index_mutex_;
};

}  // namespace curtail
