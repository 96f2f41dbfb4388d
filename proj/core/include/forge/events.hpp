#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "forge/status.hpp"

namespace forge {

/// Status-transition record. A diagnostic event (poll or fetch problem)
/// has old_status == new_status and a non-empty reason.
struct JobEvent {
    std::string job_id;
    JobStatus old_status = JobStatus::InPreparation;
    JobStatus new_status = JobStatus::InPreparation;
    std::int64_t timestamp = 0;
    std::string reason;

    bool is_diagnostic() const { return old_status == new_status; }
    bool operator==(const JobEvent&) const = default;
};

/// `EVT <job_id> <old> <new> <unix_ts> [reason]`
std::string format_event(const JobEvent& e);
/// Throws Error(ParseError).
JobEvent parse_event(std::string_view line);

inline constexpr std::string_view kOverflowMarker = "OVERFLOW";

/// One subscriber's bounded queue. Events arrive exactly once and in
/// publication order; when the queue is full the subscription receives an
/// overflow marker and is closed.
class Subscription {
public:
    explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

    struct Item {
        std::optional<JobEvent> event;  // empty for the overflow marker
        bool overflow() const { return !event; }
    };

    /// Waits up to `timeout`. Returns nullopt on timeout or once closed and drained.
    std::optional<Item> next(std::chrono::milliseconds timeout);
    bool closed() const;
    void close();

private:
    friend class EventHub;
    void push(const JobEvent& e);

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<Item> items_;
    std::size_t capacity_;
    bool closed_ = false;
};

/// Fan-out point for job events. Sinks are called synchronously (the event
/// log); subscriptions get their own bounded queue.
class EventHub {
public:
    using Sink = std::function<void(const JobEvent&)>;

    void add_sink(Sink sink);
    std::shared_ptr<Subscription> subscribe(std::size_t capacity = 1024);
    void publish(const JobEvent& e);
    void publish(const std::vector<JobEvent>& events);
    void close_all();

private:
    std::mutex mu_;
    std::vector<Sink> sinks_;
    std::vector<std::weak_ptr<Subscription>> subscribers_;
};

}  // namespace forge
