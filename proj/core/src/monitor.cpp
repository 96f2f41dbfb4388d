#include "forge/monitor.hpp"

#include "forge/error.hpp"

namespace forge {

std::vector<JobEvent> rollup_parent(Store& store, const std::string& parent_id, std::int64_t now) {
    std::vector<JobEvent> events;
    if (!store.exists(parent_id)) return events;
    Job parent = store.load(parent_id);
    if (parent.subjob_ids.empty()) return events;
    std::vector<JobStatus> statuses;
    for (const auto& sub : parent.subjob_ids)
        if (store.exists(sub)) statuses.push_back(store.load(sub).status);
    auto derived = derive_parent_status(statuses);
    if (derived == parent.status) return events;
    auto path = legal_path(parent.status, derived);
    if (path.empty()) return events;
    for (auto s : path) events.push_back(transition(parent, s, now));
    store.save(parent);
    return events;
}

Monitor::Monitor(Store& store, EventHub& hub, HandlerAccess access, std::shared_ptr<const Clock> clock)
    : store_(store), hub_(hub), access_(std::move(access)), clock_(std::move(clock)) {
    if (!clock_) clock_ = std::make_shared<SystemClock>();
}

Monitor::~Monitor() { stop(); }

std::vector<JobEvent> Monitor::poll_once() {
    std::vector<JobEvent> events;
    {
        std::lock_guard lock(store_.writer());
        store_.refresh();
        for (const auto& row : store_.list()) {
            if (!is_active(row.status)) continue;
            Job job;
            try {
                job = store_.load(row.id);
            } catch (const Error&) {
                continue;
            }
            if (!job.subjob_ids.empty() || !is_active(job.status)) continue;
            auto now = clock_->now();
            PollResult res;
            try {
                access_(job.backend_id, [&](JobHandler& h) { res = h.poll(job); });
            } catch (const Error&) {
                events.push_back({job.id, job.status, job.status, now, "poll-error"});
                continue;
            }
            if (res.status == job.status) continue;
            auto path = legal_path(job.status, res.status);
            if (path.empty()) continue;
            for (std::size_t i = 0; i < path.size(); ++i)
                events.push_back(transition(job, path[i], now, i + 1 == path.size() ? res.reason : std::string()));
            store_.save(job);
            if (job.status == JobStatus::Completed) {
                try {
                    access_(job.backend_id, [&](JobHandler& h) { h.fetch_output(job); });
                } catch (const Error& e) {
                    events.push_back({job.id, job.status, job.status, now, "fetch-error: " + std::string(e.what())});
                }
            }
            if (job.parent_id) {
                auto up = rollup_parent(store_, *job.parent_id, now);
                events.insert(events.end(), up.begin(), up.end());
            }
        }
    }
    hub_.publish(events);
    return events;
}

void Monitor::start(std::int64_t interval_s) {
    if (interval_s < kMinInterval)
        throw Error(errc::InvalidInterval, std::to_string(interval_s) + " s is below the minimum of " + std::to_string(kMinInterval) + " s");
    std::lock_guard lock(mu_);
    interval_ = interval_s;
    if (running_) {
        cv_.notify_all();
        return;
    }
    running_ = true;
    stop_requested_ = false;
    thread_ = std::thread([this] { loop(); });
}

void Monitor::stop() {
    std::thread t;
    {
        std::lock_guard lock(mu_);
        if (!running_) return;
        stop_requested_ = true;
        running_ = false;
        t = std::move(thread_);
    }
    cv_.notify_all();
    if (t.joinable()) t.join();
}

bool Monitor::running() const {
    std::lock_guard lock(mu_);
    return running_;
}

void Monitor::loop() {
    for (;;) {
        try {
            poll_once();
        } catch (const std::exception&) {
            // A broken store must not kill the poller; the next round retries.
        }
        std::unique_lock lock(mu_);
        auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(interval_.load());
        if (cv_.wait_until(lock, deadline, [this] { return stop_requested_; })) return;
    }
}

void Monitor::on_configure(const bus::ParamValues& params) {
    auto it = params.find("poll_interval_s");
    if (it == params.end()) return;
    if (auto* v = std::get_if<std::int64_t>(&it->second)) {
        if (*v < kMinInterval) throw Error(errc::InvalidInterval, std::to_string(*v));
        interval_ = *v;
        std::lock_guard lock(mu_);
        cv_.notify_all();
    }
}

}  // namespace forge
