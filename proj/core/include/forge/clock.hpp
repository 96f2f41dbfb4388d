#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace forge {

/// Source of "now" in whole seconds (unix time) or, for virtual clocks, ticks.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now() const = 0;
};

class SystemClock final : public Clock {
public:
    std::int64_t now() const override {
        return std::chrono::duration_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }
};

/// Deterministic clock advanced explicitly; used as the batch simulator's
/// virtual clock and to pin timestamps when replaying a session.
class ManualClock final : public Clock {
public:
    explicit ManualClock(std::int64_t start = 0) : now_(start) {}
    std::int64_t now() const override { return now_.load(); }
    void set(std::int64_t t) { now_.store(t); }
    void advance(std::int64_t ticks = 1) { now_.fetch_add(ticks); }

private:
    std::atomic<std::int64_t> now_;
};

}  // namespace forge
