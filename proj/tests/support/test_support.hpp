#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>

#include "forge/fsutil.hpp"
#include "forge/service.hpp"

namespace forge::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = fs::temp_directory_path() /
                ("forge-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

inline fs::path source_share_dir() { return FORGE_TEST_SHARE_DIR; }
inline fs::path golden_dir() { return FORGE_TEST_GOLDEN_DIR; }
inline fs::path tool_bin_dir() { return FORGE_TEST_TOOL_DIR; }

inline ServiceOptions service_options(const fs::path& store, std::shared_ptr<const Clock> clock = nullptr) {
    ServiceOptions o;
    o.store_root = store;
    o.share_dir = source_share_dir();
    o.path_prepend = {tool_bin_dir().string()};
    o.clock = clock ? std::move(clock) : std::make_shared<SystemClock>();
    return o;
}

/// Polls `pred` every `step` until it holds or `timeout` elapses.
inline bool wait_until(const std::function<bool()>& pred, std::chrono::milliseconds timeout,
                       std::chrono::milliseconds step = std::chrono::milliseconds(20)) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
        if (pred()) return true;
        std::this_thread::sleep_for(step);
    }
    return pred();
}

/// Polls the monitor until the job is terminal.
inline Job poll_until_terminal(Service& svc, const std::string& id, std::chrono::milliseconds timeout) {
    wait_until(
        [&] {
            svc.poll();
            return is_terminal(svc.get(id).status);
        },
        timeout, std::chrono::milliseconds(25));
    return svc.get(id);
}

}  // namespace forge::testing
