#include "forge/backends.hpp"

#include <chrono>
#include <charconv>
#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "forge/error.hpp"
#include "forge/strings.hpp"

namespace forge {

namespace {

// Serializes load-modify-save of the state file across processes.
class FileLock {
public:
    explicit FileLock(const fs::path& state_path) {
        if (state_path.empty()) return;
        fs::create_directories(state_path.parent_path());
        auto lock_path = state_path.string() + ".lock";
        fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (fd_ < 0) throw Error(errc::IoError, "cannot open " + lock_path);
        while (::flock(fd_, LOCK_EX) != 0 && errno == EINTR) {
        }
    }
    ~FileLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

std::string_view state_name(int s) {
    static constexpr std::string_view names[] = {"queued", "running", "done"};
    return names[s];
}

std::int64_t to_int(const std::string& text) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw Error(errc::CorruptStore, "batchsim state: bad integer '" + text + "'");
    return v;
}

}  // namespace

BatchSimHandler::BatchSimHandler(BackendEnv env, BatchSimConfig config, std::shared_ptr<const Clock> clock)
    : HandlerBase(std::move(env)), config_(std::move(config)), clock_(std::move(clock)) {
    if (config_.virtual_mode && !clock_) throw Error(errc::ValidationError, "virtual batchsim needs a clock");
    if (config_.queues.empty()) config_.queues.push_back({"default", 3600, 1});
    if (config_.tick_seconds <= 0) throw Error(errc::ValidationError, "tick_seconds must be positive");
}

std::int64_t BatchSimHandler::now() const {
    if (config_.virtual_mode) return clock_->now();
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

const QueueSpec& BatchSimHandler::queue(const std::string& name) const {
    for (const auto& q : config_.queues)
        if (q.name == name) return q;
    throw Error(errc::BackendUnavailable, "no batch queue '" + name + "'");
}

void BatchSimHandler::load_locked() {
    if (config_.state_path.empty() || !fs::exists(config_.state_path)) return;
    KvDocument doc;
    try {
        doc = KvDocument::load(config_.state_path);
    } catch (const Error& e) {
        throw Error(errc::CorruptStore, e.detail());
    }
    entries_.clear();
    order_.clear();
    seq_ = to_int(doc.get_or("seq", "0"));
    last_time_ = to_int(doc.get_or("time", "-1"));
    for (int i : doc.indices("entry")) {
        auto base = "entry." + std::to_string(i) + ".";
        Entry e;
        e.ticket = doc.at(base + "ticket");
        e.job_id = doc.at(base + "job");
        e.queue = doc.at(base + "queue");
        e.dir = doc.at(base + "dir");
        e.cost = to_int(doc.at(base + "cost"));
        e.submitted = to_int(doc.at(base + "submitted"));
        e.started = to_int(doc.at(base + "started"));
        e.finished = to_int(doc.at(base + "finished"));
        auto st = doc.at(base + "state");
        e.state = st == "queued" ? State::Queued : st == "running" ? State::Running : State::Done;
        e.result = parse_status(doc.at(base + "status"));
        e.reason = doc.get_or(base + "reason", "");
        e.pid = static_cast<pid_t>(to_int(doc.get_or(base + "pid", "0")));
        order_.push_back(e.ticket);
        entries_[e.ticket] = std::move(e);
    }
}

void BatchSimHandler::save_locked() const {
    if (config_.state_path.empty()) return;
    KvDocument doc;
    doc.set("seq", std::to_string(seq_));
    doc.set("time", std::to_string(last_time_));
    for (std::size_t i = 0; i < order_.size(); ++i) {
        const auto& e = entries_.at(order_[i]);
        auto base = "entry." + std::to_string(i) + ".";
        doc.set(base + "ticket", e.ticket);
        doc.set(base + "job", e.job_id);
        doc.set(base + "queue", e.queue);
        doc.set(base + "dir", e.dir.string());
        doc.set(base + "cost", std::to_string(e.cost));
        doc.set(base + "submitted", std::to_string(e.submitted));
        doc.set(base + "started", std::to_string(e.started));
        doc.set(base + "finished", std::to_string(e.finished));
        doc.set(base + "state", std::string(state_name(static_cast<int>(e.state))));
        doc.set(base + "status", std::string(to_string(e.result)));
        if (!e.reason.empty()) doc.set(base + "reason", e.reason);
        if (e.pid) doc.set(base + "pid", std::to_string(e.pid));
    }
    write_file_atomic(config_.state_path, doc.serialize("forge batch simulator state"));
}

void BatchSimHandler::finish(Entry& e, std::int64_t t, JobStatus status, std::string reason) {
    e.state = State::Done;
    e.finished = t;
    e.result = status;
    e.reason = std::move(reason);
}

void BatchSimHandler::step_locked(std::int64_t t) {
    for (const auto& ticket : order_) {
        auto& e = entries_.at(ticket);
        if (e.state != State::Running) continue;
        const auto& q = queue(e.queue);
        if (config_.virtual_mode) {
            if (e.cost > q.limit_ticks) {
                if (t >= e.started + q.limit_ticks) finish(e, e.started + q.limit_ticks, JobStatus::Failed, "walltime");
            } else if (t >= e.started + e.cost) {
                auto r = run_sync(e.dir, {"sh", "script.sh"}, payload_env());
                auto res = status_from_exit(r.exit_code);
                finish(e, e.started + e.cost, res.status, res.reason);
            }
        } else {
            auto limit_ms = static_cast<std::int64_t>(static_cast<double>(q.limit_ticks) * config_.tick_seconds * 1000.0);
            if (auto code = read_exit_file(e.dir)) {
                auto res = status_from_exit(*code);
                finish(e, t, res.status, res.reason);
            } else if (!process_alive(e.pid)) {
                if (auto again = read_exit_file(e.dir)) {
                    auto res = status_from_exit(*again);
                    finish(e, t, res.status, res.reason);
                } else {
                    finish(e, t, JobStatus::Failed, "lost");
                }
            } else if (t - e.started > limit_ms) {
                kill_group(e.pid);
                finish(e, t, JobStatus::Failed, "walltime");
            }
        }
    }
    for (const auto& q : config_.queues) {
        int running = 0;
        for (const auto& ticket : order_) {
            const auto& e = entries_.at(ticket);
            if (e.queue == q.name && e.state == State::Running) ++running;
        }
        for (const auto& ticket : order_) {
            if (running >= q.slots) break;
            auto& e = entries_.at(ticket);
            if (e.queue != q.name || e.state != State::Queued) continue;
            if (!config_.virtual_mode) {
                for (const char* name : {".forge-exit", ".forge-exit.tmp", ".forge-killed"}) fs::remove(e.dir / name);
                e.pid = launch_detached(e.dir, exit_capturing_command("script.sh"), payload_env());
            }
            e.started = t;
            e.state = State::Running;
            started_[q.name].push_back(e.ticket);
            ++running;
        }
        if (config_.virtual_mode) samples_.push_back({t, q.name, running});
    }
}

void BatchSimHandler::catch_up_locked(std::int64_t t) {
    bool busy = false;
    for (const auto& [ticket, e] : entries_)
        if (e.state != State::Done) busy = true;
    if (!config_.virtual_mode || !busy || last_time_ < 0) {
        if (busy || !config_.virtual_mode) step_locked(t);
        last_time_ = std::max(last_time_, t);
        return;
    }
    for (std::int64_t tick = last_time_ + 1; tick <= t; ++tick) step_locked(tick);
    last_time_ = std::max(last_time_, t);
}

BatchSimHandler::Entry& BatchSimHandler::entry_locked(const std::string& ticket) {
    auto it = entries_.find(ticket);
    if (it == entries_.end()) throw Error(errc::UnknownTicket, ticket);
    return it->second;
}

std::string BatchSimHandler::submit(Job& job) {
    require_configured(job);
    auto dir = job_dir(job);
    // The script header carries the scheduling directives.
    std::string queue_name = config_.queues.front().name;
    std::int64_t cost = 1;
    for (const auto& line : split(read_file(dir / "script.sh"), '\n')) {
        if (!line.starts_with("#BS ")) continue;
        auto directive = line.substr(4);
        auto eq = directive.find('=');
        if (eq == std::string::npos) continue;
        auto key = directive.substr(0, eq);
        auto value = directive.substr(eq + 1);
        if (key == "queue") queue_name = value;
        else if (key == "cost") {
            double c = 0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), c);
            if (ec != std::errc() || ptr != value.data() + value.size() || c < 1)
                throw Error(errc::ValidationError, "#BS cost must be a number >= 1");
            cost = static_cast<std::int64_t>(c);
        }
    }
    queue(queue_name);
    fs::create_directories(dir / "output");
    stage_inputs(job, dir / "input");

    std::lock_guard lock(mu_);
    FileLock flock(config_.state_path);
    load_locked();
    auto t = now();
    catch_up_locked(t);
    Entry e;
    e.ticket = "bs" + std::to_string(++seq_);
    e.job_id = job.id;
    e.queue = queue_name;
    e.dir = dir;
    e.cost = cost;
    e.submitted = t;
    order_.push_back(e.ticket);
    entries_[e.ticket] = e;
    step_locked(t);
    last_time_ = std::max(last_time_, t);
    save_locked();
    return e.ticket;
}

void BatchSimHandler::advance() {
    std::lock_guard lock(mu_);
    FileLock flock(config_.state_path);
    load_locked();
    catch_up_locked(now());
    save_locked();
}

PollResult BatchSimHandler::poll(const Job& job) {
    std::lock_guard lock(mu_);
    FileLock flock(config_.state_path);
    load_locked();
    catch_up_locked(now());
    save_locked();
    const auto& e = entry_locked(job.ticket);
    switch (e.state) {
        case State::Queued: return {JobStatus::Submitted, {}};
        case State::Running: return {JobStatus::Running, {}};
        case State::Done: return {e.result, e.reason};
    }
    return {};
}

void BatchSimHandler::kill(const Job& job) {
    check_killable(job);
    std::lock_guard lock(mu_);
    FileLock flock(config_.state_path);
    load_locked();
    auto t = now();
    catch_up_locked(t);
    auto& e = entry_locked(job.ticket);
    if (e.state == State::Running && !config_.virtual_mode) {
        write_file(e.dir / ".forge-killed", "killed\n");
        kill_group(e.pid);
    }
    if (e.state != State::Done) finish(e, t, JobStatus::Killed, {});
    // A freed slot goes to the next queued job right away.
    step_locked(t);
    save_locked();
}

std::vector<BatchSimHandler::SlotSample> BatchSimHandler::slot_samples() const {
    std::lock_guard lock(mu_);
    return samples_;
}

std::vector<std::string> BatchSimHandler::start_order(const std::string& queue_name) const {
    std::lock_guard lock(mu_);
    auto it = started_.find(queue_name);
    return it == started_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<std::string> BatchSimHandler::submit_order(const std::string& queue_name) const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& ticket : order_)
        if (entries_.at(ticket).queue == queue_name) out.push_back(ticket);
    return out;
}

std::optional<std::int64_t> BatchSimHandler::finish_time(const std::string& ticket) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(ticket);
    if (it == entries_.end() || it->second.state != State::Done) return std::nullopt;
    return it->second.finished;
}

}  // namespace forge
