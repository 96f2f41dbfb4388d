#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace forge {

enum class JobStatus { InPreparation, Submitted, Running, Completed, Failed, Killed };

inline constexpr JobStatus kAllStatuses[] = {JobStatus::InPreparation, JobStatus::Submitted, JobStatus::Running,
                                             JobStatus::Completed,     JobStatus::Failed,    JobStatus::Killed};

/// Wire names: in-preparation, submitted, running, completed, failed, killed.
std::string_view to_string(JobStatus s);
/// Accepts the wire names case-insensitively. Throws Error(ValidationError).
JobStatus parse_status(std::string_view text);

bool is_terminal(JobStatus s);
bool is_active(JobStatus s);  // Submitted or Running

/// InPreparation->Submitted; Submitted->Running|Failed|Killed;
/// Running->Completed|Failed|Killed. Terminal states have no exits.
bool is_legal_transition(JobStatus from, JobStatus to);

/// Shortest sequence of states (excluding `from`) leading to `to` through
/// legal edges. Empty when from == to or `to` is unreachable.
std::vector<JobStatus> legal_path(JobStatus from, JobStatus to);

/// Status of a job that has been split, derived from its subjobs:
/// Running if any subjob is Submitted/Running; otherwise Failed if any
/// failed; otherwise Killed if any was killed; Completed iff all completed;
/// InPreparation in the remaining cases (including no subjobs).
JobStatus derive_parent_status(std::span<const JobStatus> subjobs);

}  // namespace forge
