#include "curtail/trial_service.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>

#include "curtail/errors.hpp"
#include "curtail/sampling_dist.hpp"
#include "curtail/sim_harness.hpp"

namespace curtail {

namespace {

std::int64_t system_now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

EventKind event_kind_from_string(const std::string& s) {
    for (auto k : {EventKind::Created, EventKind::OutcomeRecorded, EventKind::OutcomeUndone,
                   EventKind::Finalized}) {
        if (to_string(k) == s) return k;
    }
    throw DomainError("unknown event kind '" + s + "'");
}

bool same_interval(const ConfidenceInterval& a, const ConfidenceInterval& b) {
    return a.lower == b.lower && a.upper == b.upper && a.method == b.method && a.level == b.level;
}

bool same_estimate(const EstimateReport& a, const EstimateReport& b) {
    return a.naive == b.naive && a.bias_adjusted == b.bias_adjusted && a.mue == b.mue &&
           a.mue_lower == b.mue_lower && a.mue_upper == b.mue_upper &&
           a.ordering == b.ordering && a.bias_mode == b.bias_mode;
}

}  // namespace

std::string_view to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::Enrolling: return "enrolling";
        case SessionStatus::StoppedEfficacy: return "stopped_efficacy";
        case SessionStatus::StoppedFutility: return "stopped_futility";
        case SessionStatus::Finalized: return "finalized";
    }
    return "unknown";
}

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::Created: return "created";
        case EventKind::OutcomeRecorded: return "outcome_recorded";
        case EventKind::OutcomeUndone: return "outcome_undone";
        case EventKind::Finalized: return "finalized";
    }
    return "unknown";
}

bool operator==(const FinalReport& a, const FinalReport& b) {
    if (a.m != b.m || a.s != b.s || !same_estimate(a.estimate, b.estimate) ||
        a.bias_adjusted_root != b.bias_adjusted_root || a.intervals.size() != b.intervals.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.intervals.size(); ++i) {
        if (!same_interval(a.intervals[i], b.intervals[i])) return false;
    }
    return true;
}

json to_json(const FinalReport& r) {
    json ivs = json::array();
    for (const auto& ci : r.intervals) ivs.push_back(to_json(ci));
    return {{"m", r.m},
            {"s", r.s},
            {"estimate", to_json(r.estimate)},
            {"bias_adjusted_root", r.bias_adjusted_root},
            {"intervals", std::move(ivs)}};
}

FinalReport final_report_from_json(const json& j) {
    FinalReport r;
    r.m = j.at("m").get<int>();
    r.s = j.at("s").get<int>();
    r.estimate = estimate_report_from_json(j.at("estimate"));
    r.bias_adjusted_root = j.at("bias_adjusted_root").get<double>();
    for (const auto& ci : j.at("intervals")) r.intervals.push_back(interval_from_json(ci));
    return r;
}

FinalReport compute_final_report(const Design& design, const Hypotheses& hyp, int m, int s) {
    const SamplingDistribution dist(design);
    FinalReport r;
    r.m = m;
    r.s = s;
    r.estimate = estimate(dist, m, s, Ordering::StageWise, BiasMode::PlugIn);
    r.bias_adjusted_root = bias_adjusted_estimate(dist, m, s, BiasMode::RootSolve);
    r.intervals = all_intervals(dist, m, s, hyp.alpha);
    return r;
}

int TrialSession::responders() const {
    int s = 0;
    for (bool r : outcomes) s += r ? 1 : 0;
    return s;
}

StageDecision TrialSession::decision() const {
    if (outcomes.empty()) return StageDecision::Continue;
    return classify_state(design, enrolled(), responders());
}

int TrialSession::responders_needed() const { return std::max(0, design.u() - responders()); }

bool same_state(const TrialSession& a, const TrialSession& b) {
    const bool reports_match = a.final_report.has_value() == b.final_report.has_value() &&
                               (!a.final_report || *a.final_report == *b.final_report);
    return a.id == b.id && a.hyp.p0 == b.hyp.p0 && a.hyp.p1 == b.hyp.p1 &&
           a.hyp.alpha == b.hyp.alpha && a.hyp.beta == b.hyp.beta && a.design == b.design &&
           a.outcomes == b.outcomes && a.status == b.status && a.seq == b.seq && reports_match;
}

json to_json(const TrialSession& s) {
    json doc{{"id", s.id},
             {"hypotheses", to_json(s.hyp)},
             {"design", design_document(s.hyp, s.design)},
             {"outcomes", s.outcomes},
             {"k", s.enrolled()},
             {"s", s.responders()},
             {"status", std::string(to_string(s.status))},
             {"decision", std::string(to_string(s.decision()))},
             {"responders_needed", s.responders_needed()},
             {"seq", s.seq},
             {"created_ms", s.created_ms},
             {"updated_ms", s.updated_ms}};
    doc["final_report"] = s.final_report ? to_json(*s.final_report) : json(nullptr);
    return doc;
}

SessionStatus derive_status(const Design& design, const std::vector<bool>& outcomes) {
    int s = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        s += outcomes[i] ? 1 : 0;
        const auto d = classify_state(design, static_cast<int>(i) + 1, s);
        if (d == StageDecision::StopEfficacy) return SessionStatus::StoppedEfficacy;
        if (d == StageDecision::StopFutility) return SessionStatus::StoppedFutility;
    }
    return SessionStatus::Enrolling;
}

json to_json(const EventRecord& e) {
    return {{"session", e.session_id},
            {"seq", e.seq},
            {"kind", std::string(to_string(e.kind))},
            {"payload", e.payload},
            {"ts", e.timestamp_ms}};
}

EventRecord event_from_json(const json& j) {
    return {j.at("session").get<std::string>(), j.at("seq").get<std::uint64_t>(),
            event_kind_from_string(j.at("kind").get<std::string>()), j.at("payload"),
            j.at("ts").get<std::int64_t>()};
}

void apply_event(TrialSession& session, const EventRecord& event) {
    if (event.kind == EventKind::Created) {
        if (event.seq != 1) throw DomainError("created event must have seq 1");
        const auto& p = event.payload;
        session = TrialSession{};
        session.id = event.session_id;
        session.hyp = hypotheses_from_json(p.at("hypotheses"));
        session.design = Design(p.at("u").get<int>(), p.at("K").get<int>());
        session.created_ms = event.timestamp_ms;
    } else {
        if (event.session_id != session.id) throw DomainError("event belongs to another session");
        if (event.seq != session.seq + 1) {
            throw DomainError("event seq " + std::to_string(event.seq) + " does not follow " +
                              std::to_string(session.seq));
        }
        switch (event.kind) {
            case EventKind::OutcomeRecorded:
                if (session.status != SessionStatus::Enrolling) {
                    throw ConflictError("session " + session.id + " has already stopped");
                }
                session.outcomes.push_back(event.payload.at("responder").get<bool>());
                break;
            case EventKind::OutcomeUndone:
                if (session.status == SessionStatus::Finalized) {
                    throw ConflictError("session " + session.id + " is finalized");
                }
                if (session.outcomes.empty()) {
                    throw ConflictError("session " + session.id + " has no outcome to undo");
                }
                session.outcomes.pop_back();
                break;
            case EventKind::Finalized:
                if (session.status != SessionStatus::StoppedEfficacy &&
                    session.status != SessionStatus::StoppedFutility) {
                    throw ConflictError("session " + session.id + " has not stopped");
                }
                session.final_report = final_report_from_json(event.payload.at("report"));
                break;
            case EventKind::Created: break;
        }
    }
    session.seq = event.seq;
    session.updated_ms = event.timestamp_ms;
    session.status = session.final_report ? SessionStatus::Finalized
                                          : derive_status(session.design, session.outcomes);
}

TrialSession replay(const std::vector<EventRecord>& events) {
    if (events.empty() || events.front().kind != EventKind::Created) {
        throw DomainError("event log must start with a created event");
    }
    TrialSession s;
    for (const auto& e : events) apply_event(s, e);
    return s;
}

TrialStore::TrialStore(std::filesystem::path data_dir, Clock clock)
    : data_dir_(std::move(data_dir)), clock_(clock ? std::move(clock) : Clock(system_now_ms)) {
    std::random_device rd;
    id_state_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
                static_cast<std::uint64_t>(system_now_ms());
    if (!data_dir_.empty()) {
        std::filesystem::create_directories(data_dir_ / "sessions");
        load();
    }
}

std::string TrialStore::new_id() {
    std::lock_guard lock(id_mutex_);
    while (true) {
        id_state_ += 0x9E3779B97F4A7C15ULL;
        char buf[32];
        std::snprintf(buf, sizeof buf, "s-%016llx",
                      static_cast<unsigned long long>(mix64(id_state_)));
        std::shared_lock map_lock(map_mutex_);
        if (!sessions_.contains(buf)) return buf;
    }
}

std::shared_ptr<TrialStore::Entry> TrialStore::entry(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
    return it->second;
}

void TrialStore::append_to_disk(const EventRecord& event) const {
    if (data_dir_.empty()) return;
    const auto path = data_dir_ / "sessions" / (event.session_id + ".jsonl");
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << to_json(event).dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("failed to append to " + path.string());
}

void TrialStore::write_index() const {
    if (data_dir_.empty()) return;
    json index = json::array();
    for (const auto& s : list()) {
        index.push_back({{"id", s.id},
                         {"status", std::string(to_string(s.status))},
                         {"seq", s.seq},
                         {"updated_ms", s.updated_ms}});
    }
    std::lock_guard lock(index_mutex_);
    const auto tmp = data_dir_ / "index.json.tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << index.dump(2) << '\n';
        if (!out) throw std::runtime_error("failed to write " + tmp.string());
    }
    std::filesystem::rename(tmp, data_dir_ / "index.json");
}

void TrialStore::load() {
    for (const auto& file : std::filesystem::directory_iterator(data_dir_ / "sessions")) {
        if (file.path().extension() != ".jsonl") continue;
        std::ifstream in(file.path());
        std::vector<EventRecord> log;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) log.push_back(event_from_json(json::parse(line)));
        }
        if (log.empty()) continue;
        auto e = std::make_shared<Entry>();
        e->snapshot = std::make_shared<const TrialSession>(replay(log));
        e->log = std::move(log);
        sessions_.emplace(e->snapshot->id, std::move(e));
    }
}

void TrialStore::commit(Entry& e, EventRecord event, TrialSession next) {
    append_to_disk(event);
    e.log.push_back(std::move(event));
    {
        std::unique_lock lock(e.snapshot_mutex);
        e.snapshot = std::make_shared<const TrialSession>(std::move(next));
    }
    write_index();
}

TrialSession TrialStore::create(const Hypotheses& hyp) {
    hyp.validate();
    const auto found = search_design(hyp);
    EventRecord ev{new_id(), 1, EventKind::Created,
                   json{{"hypotheses", to_json(hyp)},
                        {"u", found.design.u()},
                        {"K", found.design.max_n()}},
                   clock_()};
    TrialSession s;
    apply_event(s, ev);

    auto e = std::make_shared<Entry>();
    {
        std::unique_lock lock(map_mutex_);
        sessions_.emplace(s.id, e);
    }
    std::lock_guard write(e->write_mutex);
    commit(*e, std::move(ev), s);
    return s;
}

TrialSession TrialStore::get(const std::string& id) const {
    const auto e = entry(id);
    std::shared_lock lock(e->snapshot_mutex);
    if (!e->snapshot) throw NotFoundError("unknown session '" + id + "'");
    return *e->snapshot;
}

std::vector<TrialSession> TrialStore::list() const {
    std::vector<std::shared_ptr<Entry>> entries;
    {
        std::shared_lock lock(map_mutex_);
        for (const auto& [id, e] : sessions_) entries.push_back(e);
    }
    std::vector<TrialSession> out;
    for (const auto& e : entries) {
        std::shared_lock lock(e->snapshot_mutex);
        if (e->snapshot) out.push_back(*e->snapshot);
    }
    return out;
}

std::vector<EventRecord> TrialStore::events(const std::string& id) const {
    const auto e = entry(id);
    std::lock_guard lock(e->write_mutex);
    return e->log;
}

RecordResult TrialStore::record_outcome(const std::string& id, bool responder,
                                        std::optional<std::uint64_t> expected_seq) {
    const auto e = entry(id);
    std::lock_guard write(e->write_mutex);
    TrialSession next = *e->snapshot;
    if (expected_seq && *expected_seq != next.seq) {
        throw VersionConflictError("session " + id + " is at seq " + std::to_string(next.seq) +
                                   ", expected " + std::to_string(*expected_seq));
    }
    if (next.status != SessionStatus::Enrolling) {
        throw ConflictError("session " + id + " has already stopped (" +
                            std::string(to_string(next.status)) + ")");
    }
    EventRecord ev{id, next.seq + 1, EventKind::OutcomeRecorded, json{{"responder", responder}},
                   clock_()};
    apply_event(next, ev);
    RecordResult result{next.decision(), next.responders_needed(), next};
    commit(*e, std::move(ev), std::move(next));
    return result;
}

TrialSession TrialStore::undo_outcome(const std::string& id,
                                      std::optional<std::uint64_t> expected_seq) {
    const auto e = entry(id);
    std::lock_guard write(e->write_mutex);
    TrialSession next = *e->snapshot;
    if (expected_seq && *expected_seq != next.seq) {
        throw VersionConflictError("session " + id + " is at seq " + std::to_string(next.seq) +
                                   ", expected " + std::to_string(*expected_seq));
    }
    EventRecord ev{id, next.seq + 1, EventKind::OutcomeUndone, json::object(), clock_()};
    apply_event(next, ev);
    const TrialSession result = next;
    commit(*e, std::move(ev), std::move(next));
    return result;
}

FinalReport TrialStore::finalize(const std::string& id) {
    const auto e = entry(id);
    std::lock_guard write(e->write_mutex);
    TrialSession next = *e->snapshot;
    if (next.final_report) return *next.final_report;
    if (next.status == SessionStatus::Enrolling) {
        throw ConflictError("session " + id + " is still enrolling");
    }
    const auto report =
        compute_final_report(next.design, next.hyp, next.enrolled(), next.responders());
    EventRecord ev{id, next.seq + 1, EventKind::Finalized, json{{"report", to_json(report)}},
                   clock_()};
    apply_event(next, ev);
    const FinalReport stored = *next.final_report;
    commit(*e, std::move(ev), std::move(next));
    return stored;
}

}  // namespace curtail
