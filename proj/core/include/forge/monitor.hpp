#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "forge/backends.hpp"
#include "forge/bus.hpp"
#include "forge/clock.hpp"
#include "forge/events.hpp"
#include "forge/registry.hpp"

namespace forge {

/// Runs `use` against the handler for a backend id. Throws when the
/// backend cannot be reached.
using HandlerAccess = std::function<void(const std::string& backend_id, const std::function<void(JobHandler&)>& use)>;

/// Recomputes a parent's status from its subjobs and walks the shortest
/// legal path to it (nothing happens when no legal path exists).
/// Caller holds the store writer lock.
std::vector<JobEvent> rollup_parent(Store& store, const std::string& parent_id, std::int64_t now);

/// Polls handlers for every Submitted/Running job, applies and persists
/// transitions, fetches outputs of completed jobs and publishes events.
class Monitor : public bus::Component {
public:
    static constexpr std::int64_t kMinInterval = 1;
    static constexpr std::int64_t kDefaultInterval = 5;

    Monitor(Store& store, EventHub& hub, HandlerAccess access, std::shared_ptr<const Clock> clock);
    ~Monitor() override;

    std::vector<JobEvent> poll_once();

    /// Idempotent; a second start only changes the interval. Throws InvalidInterval.
    void start(std::int64_t interval_s);
    void start() { start(interval()); }
    /// Idempotent.
    void stop();
    bool running() const;
    std::int64_t interval() const { return interval_.load(); }

    void on_configure(const bus::ParamValues& params) override;

private:
    void loop();

    Store& store_;
    EventHub& hub_;
    HandlerAccess access_;
    std::shared_ptr<const Clock> clock_;
    std::atomic<std::int64_t> interval_{kDefaultInterval};

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::thread thread_;
    bool running_ = false;
    bool stop_requested_ = false;
};

}  // namespace forge
