#include "forge/status.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "forge/error.hpp"
#include "forge/strings.hpp"

namespace forge {

std::string_view to_string(JobStatus s) {
    switch (s) {
        case JobStatus::InPreparation: return "in-preparation";
        case JobStatus::Submitted: return "submitted";
        case JobStatus::Running: return "running";
        case JobStatus::Completed: return "completed";
        case JobStatus::Failed: return "failed";
        case JobStatus::Killed: return "killed";
    }
    return "?";
}

JobStatus parse_status(std::string_view text) {
    std::string t = to_lower(trim(text));
    for (auto s : kAllStatuses)
        if (t == to_string(s)) return s;
    if (t == "inpreparation") return JobStatus::InPreparation;
    throw Error(errc::ValidationError, "unknown status '" + std::string(text) + "'");
}

bool is_terminal(JobStatus s) {
    return s == JobStatus::Completed || s == JobStatus::Failed || s == JobStatus::Killed;
}

bool is_active(JobStatus s) { return s == JobStatus::Submitted || s == JobStatus::Running; }

bool is_legal_transition(JobStatus from, JobStatus to) {
    switch (from) {
        case JobStatus::InPreparation: return to == JobStatus::Submitted;
        case JobStatus::Submitted:
            return to == JobStatus::Running || to == JobStatus::Failed || to == JobStatus::Killed;
        case JobStatus::Running:
            return to == JobStatus::Completed || to == JobStatus::Failed || to == JobStatus::Killed;
        default: return false;
    }
}

std::vector<JobStatus> legal_path(JobStatus from, JobStatus to) {
    if (from == to) return {};
    std::map<JobStatus, JobStatus> prev;
    std::deque<JobStatus> queue{from};
    while (!queue.empty()) {
        JobStatus cur = queue.front();
        queue.pop_front();
        for (auto next : kAllStatuses) {
            if (!is_legal_transition(cur, next) || prev.count(next) || next == from) continue;
            prev[next] = cur;
            if (next == to) {
                std::vector<JobStatus> path{to};
                while (prev[path.back()] != from) path.push_back(prev[path.back()]);
                std::reverse(path.begin(), path.end());
                return path;
            }
            queue.push_back(next);
        }
    }
    return {};
}

JobStatus derive_parent_status(std::span<const JobStatus> subjobs) {
    if (subjobs.empty()) return JobStatus::InPreparation;
    bool running = false, failed = false, killed = false, all_completed = true;
    for (auto s : subjobs) {
        running = running || is_active(s);
        failed = failed || s == JobStatus::Failed;
        killed = killed || s == JobStatus::Killed;
        all_completed = all_completed && s == JobStatus::Completed;
    }
    if (running) return JobStatus::Running;
    if (failed) return JobStatus::Failed;
    if (killed) return JobStatus::Killed;
    if (all_completed) return JobStatus::Completed;
    return JobStatus::InPreparation;
}

}  // namespace forge
