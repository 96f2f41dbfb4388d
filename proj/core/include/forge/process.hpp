#pragma once

#include <map>
#include <string>
#include <vector>

#include <sys/types.h>

#include "forge/fsutil.hpp"

namespace forge {

struct ProcessEnv {
    std::map<std::string, std::string> set;
    std::vector<std::string> path_prepend;
};

/// Starts `/bin/sh -c command` in `dir` as the leader of a new session,
/// detached from the caller (double fork, so nothing needs reaping).
/// Returns the leader's pid, which is also its process group id.
pid_t launch_detached(const fs::path& dir, const std::string& command, const ProcessEnv& env = {});

/// True while the process exists and is not a zombie.
bool process_alive(pid_t pid);

/// SIGKILL to the whole process group.
void kill_group(pid_t pid);

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs `argv` (through the shell, words quoted) in `dir` and waits.
RunResult run_sync(const fs::path& dir, const std::vector<std::string>& argv, const ProcessEnv& env = {});

/// Wraps a script so that its exit status lands in `<dir>/.forge-exit`
/// (written to a temporary first, then renamed).
std::string exit_capturing_command(const std::string& script);

}  // namespace forge
