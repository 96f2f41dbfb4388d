#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forge/clock.hpp"
#include "forge/fsutil.hpp"

namespace forge::tools {

/// System time, unless the calling thread has pinned a value. One CLI
/// invocation or HTTP request pins a single timestamp, so the session log
/// can reproduce it on replay; background threads (the monitor) see real time.
class PinnableClock final : public Clock {
public:
    std::int64_t now() const override;

    class Pin {
    public:
        explicit Pin(std::int64_t t);
        ~Pin();
        Pin(const Pin&) = delete;
        Pin& operator=(const Pin&) = delete;

    private:
        std::optional<std::int64_t> previous_;
    };
};

struct SessionLine {
    int line_no = 0;
    std::optional<std::int64_t> timestamp;
    std::vector<std::string> words;
};

/// `@<unix_ts> <shell-quoted words>` appended to `<store>/session.log`.
void append_session(const fs::path& store_root, std::int64_t ts, const std::vector<std::string>& words);

/// Blank lines and `#` comments are skipped. Throws Error(ParseError) naming the line.
std::vector<SessionLine> parse_session(const std::string& text);

}  // namespace forge::tools
