#include "forge/process.hpp"

#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include "forge/error.hpp"
#include "forge/strings.hpp"

extern char** environ;

namespace forge {

namespace {

std::vector<std::string> build_env(const ProcessEnv& env) {
    std::map<std::string, std::string> vars;
    for (char** e = environ; *e; ++e) {
        std::string_view kv(*e);
        auto eq = kv.find('=');
        if (eq == std::string_view::npos) continue;
        vars[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
    }
    for (const auto& [k, v] : env.set) vars[k] = v;
    if (!env.path_prepend.empty()) {
        auto path = join(env.path_prepend, ":");
        auto it = vars.find("PATH");
        vars["PATH"] = it == vars.end() || it->second.empty() ? path + ":/usr/bin:/bin" : path + ":" + it->second;
    }
    std::vector<std::string> out;
    for (const auto& [k, v] : vars) out.push_back(k + "=" + v);
    return out;
}

std::vector<char*> pointers(std::vector<std::string>& strings) {
    std::vector<char*> out;
    for (auto& s : strings) out.push_back(s.data());
    out.push_back(nullptr);
    return out;
}

}  // namespace

std::string exit_capturing_command(const std::string& script) {
    return "sh " + shell_quote(script) + "; echo $? > .forge-exit.tmp; mv .forge-exit.tmp .forge-exit";
}

pid_t launch_detached(const fs::path& dir, const std::string& command, const ProcessEnv& env) {
    // Everything the children need is prepared before fork: after fork only
    // async-signal-safe calls are made.
    auto env_strings = build_env(env);
    auto envp = pointers(env_strings);
    std::vector<std::string> args{"/bin/sh", "-c", command};
    auto argv = pointers(args);
    std::string dir_str = dir.string();

    int fds[2];
    if (pipe2(fds, O_CLOEXEC) != 0) throw Error(errc::BackendUnavailable, std::string("pipe: ") + std::strerror(errno));
    pid_t child = fork();
    if (child < 0) {
        close(fds[0]);
        close(fds[1]);
        throw Error(errc::BackendUnavailable, std::string("fork: ") + std::strerror(errno));
    }
    if (child == 0) {
        pid_t grandchild = fork();
        if (grandchild == 0) {
            setsid();
            if (chdir(dir_str.c_str()) != 0) _exit(127);
            int devnull = open("/dev/null", O_RDWR);
            if (devnull >= 0) {
                dup2(devnull, 0);
                dup2(devnull, 1);
                dup2(devnull, 2);
            }
            execve("/bin/sh", argv.data(), envp.data());
            _exit(127);
        }
        ssize_t ignored = write(fds[1], &grandchild, sizeof grandchild);
        (void)ignored;
        _exit(grandchild < 0 ? 1 : 0);
    }
    close(fds[1]);
    pid_t pid = -1;
    ssize_t n = read(fds[0], &pid, sizeof pid);
    close(fds[0]);
    int status = 0;
    waitpid(child, &status, 0);
    if (n != sizeof pid || pid <= 0) throw Error(errc::BackendUnavailable, "could not launch payload");
    return pid;
}

bool process_alive(pid_t pid) {
    if (pid <= 0) return false;
    if (kill(pid, 0) != 0) return errno == EPERM;
    // An orphan whose reaper never waits shows up as a zombie.
    std::string stat;
    try {
        stat = read_file("/proc/" + std::to_string(pid) + "/stat");
    } catch (const Error&) {
        return true;
    }
    auto close_paren = stat.rfind(')');
    if (close_paren == std::string::npos || close_paren + 2 >= stat.size()) return true;
    char state = stat[close_paren + 2];
    return state != 'Z' && state != 'X';
}

void kill_group(pid_t pid) {
    if (pid <= 0) return;
    if (kill(-pid, SIGKILL) != 0) kill(pid, SIGKILL);
}

RunResult run_sync(const fs::path& dir, const std::vector<std::string>& argv_words, const ProcessEnv& env) {
    auto env_strings = build_env(env);
    auto envp = pointers(env_strings);
    std::vector<std::string> args{"/bin/sh", "-c", shell_join(argv_words)};
    auto argv = pointers(args);
    std::string dir_str = dir.string();

    char out_tmpl[] = "/tmp/forge-out-XXXXXX";
    char err_tmpl[] = "/tmp/forge-err-XXXXXX";
    int out_fd = mkstemp(out_tmpl);
    int err_fd = mkstemp(err_tmpl);
    if (out_fd < 0 || err_fd < 0) throw Error(errc::IoError, "mkstemp failed");

    pid_t pid = fork();
    if (pid < 0) throw Error(errc::IoError, std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        if (chdir(dir_str.c_str()) != 0) _exit(127);
        int devnull = open("/dev/null", O_RDONLY);
        if (devnull >= 0) dup2(devnull, 0);
        dup2(out_fd, 1);
        dup2(err_fd, 2);
        execve("/bin/sh", argv.data(), envp.data());
        _exit(127);
    }
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    close(out_fd);
    close(err_fd);
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    r.out = read_file(out_tmpl);
    r.err = read_file(err_tmpl);
    std::remove(out_tmpl);
    std::remove(err_tmpl);
    return r;
}

}  // namespace forge
