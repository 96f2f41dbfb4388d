#include "forge_tools/session.hpp"

#include <charconv>
#include <fcntl.h>
#include <unistd.h>

#include "forge/error.hpp"
#include "forge/strings.hpp"

namespace forge::tools {

namespace {
thread_local std::optional<std::int64_t> pinned;
}

std::int64_t PinnableClock::now() const {
    if (pinned) return *pinned;
    return SystemClock().now();
}

PinnableClock::Pin::Pin(std::int64_t t) : previous_(pinned) { pinned = t; }
PinnableClock::Pin::~Pin() { pinned = previous_; }

void append_session(const fs::path& store_root, std::int64_t ts, const std::vector<std::string>& words) {
    auto line = "@" + std::to_string(ts) + " " + shell_join(words) + "\n";
    auto path = (store_root / "session.log").string();
    // O_APPEND keeps concurrent writers from interleaving within a line.
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) throw Error(errc::IoError, "cannot open " + path);
    auto n = ::write(fd, line.data(), line.size());
    ::close(fd);
    if (n != static_cast<ssize_t>(line.size())) throw Error(errc::IoError, "short write to " + path);
}

std::vector<SessionLine> parse_session(const std::string& text) {
    std::vector<SessionLine> out;
    int line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line = trim(std::string_view(text).substr(start, nl - start));
        start = nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        SessionLine s;
        s.line_no = line_no;
        if (line.front() == '@') {
            auto sp = line.find(' ');
            auto ts_text = line.substr(1, sp == std::string_view::npos ? std::string_view::npos : sp - 1);
            std::int64_t ts = 0;
            auto [ptr, ec] = std::from_chars(ts_text.data(), ts_text.data() + ts_text.size(), ts);
            if (ec != std::errc() || ptr != ts_text.data() + ts_text.size())
                throw Error(errc::ParseError, "line " + std::to_string(line_no) + ": bad timestamp");
            s.timestamp = ts;
            line = sp == std::string_view::npos ? std::string_view() : trim(line.substr(sp));
        }
        try {
            s.words = shell_split(line);
        } catch (const Error& e) {
            throw Error(errc::ParseError, "line " + std::to_string(line_no) + ": " + e.detail());
        }
        if (s.words.empty()) throw Error(errc::ParseError, "line " + std::to_string(line_no) + ": no command");
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace forge::tools
