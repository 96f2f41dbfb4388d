#include "forge/events.hpp"

#include <charconv>

#include "forge/error.hpp"
#include "forge/strings.hpp"

namespace forge {

std::string format_event(const JobEvent& e) {
    std::string out = "EVT " + e.job_id + " " + std::string(to_string(e.old_status)) + " " +
                      std::string(to_string(e.new_status)) + " " + std::to_string(e.timestamp);
    if (!e.reason.empty()) out += " " + e.reason;
    return out;
}

JobEvent parse_event(std::string_view line) {
    line = trim(line);
    std::vector<std::string_view> tok;
    std::size_t pos = 0;
    while (tok.size() < 5 && pos < line.size()) {
        auto sp = line.find(' ', pos);
        tok.push_back(line.substr(pos, sp == line.npos ? line.npos : sp - pos));
        pos = sp == line.npos ? line.size() : sp + 1;
    }
    if (tok.size() < 5 || tok[0] != "EVT") throw Error(errc::ParseError, "not an event line: " + std::string(line));
    JobEvent e;
    e.job_id = std::string(tok[1]);
    try {
        e.old_status = parse_status(tok[2]);
        e.new_status = parse_status(tok[3]);
    } catch (const Error& err) {
        throw Error(errc::ParseError, err.detail() + " in: " + std::string(line));
    }
    auto [p, ec] = std::from_chars(tok[4].data(), tok[4].data() + tok[4].size(), e.timestamp);
    if (ec != std::errc{}) throw Error(errc::ParseError, "bad timestamp in: " + std::string(line));
    if (pos < line.size()) e.reason = std::string(line.substr(pos));
    return e;
}

std::optional<Subscription::Item> Subscription::next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    Item item = std::move(items_.front());
    items_.pop_front();
    return item;
}

bool Subscription::closed() const {
    std::lock_guard lock(mu_);
    return closed_;
}

void Subscription::close() {
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

void Subscription::push(const JobEvent& e) {
    {
        std::lock_guard lock(mu_);
        if (closed_) return;
        if (items_.size() >= capacity_) {
            items_.push_back(Item{std::nullopt});
            closed_ = true;
        } else {
            items_.push_back(Item{e});
        }
    }
    cv_.notify_all();
}

void EventHub::add_sink(Sink sink) {
    std::lock_guard lock(mu_);
    sinks_.push_back(std::move(sink));
}

std::shared_ptr<Subscription> EventHub::subscribe(std::size_t capacity) {
    auto sub = std::make_shared<Subscription>(capacity);
    std::lock_guard lock(mu_);
    subscribers_.push_back(sub);
    return sub;
}

void EventHub::publish(const JobEvent& e) {
    std::lock_guard lock(mu_);
    for (auto& sink : sinks_) sink(e);
    for (auto it = subscribers_.begin(); it != subscribers_.end();) {
        if (auto sub = it->lock()) {
            sub->push(e);
            ++it;
        } else {
            it = subscribers_.erase(it);
        }
    }
}

void EventHub::publish(const std::vector<JobEvent>& events) {
    for (const auto& e : events) publish(e);
}

void EventHub::close_all() {
    std::lock_guard lock(mu_);
    for (auto& w : subscribers_)
        if (auto sub = w.lock()) sub->close();
    subscribers_.clear();
}

}  // namespace forge
