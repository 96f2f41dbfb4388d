#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "forge/fsutil.hpp"

namespace forge::tools {

struct CliConfig {
    /// Used when neither --store nor FORGE_STORE is given.
    std::optional<fs::path> store;
    /// Shipped assets; --share and FORGE_SHARE override it.
    fs::path share_dir;
    /// Prepended to payload PATH.
    std::vector<std::string> path_prepend;
};

/// Runs one command line (without the program name). Exit status: 0 ok,
/// 1 domain error (error name on `err`), 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliConfig& config);

/// Usage check only; returns the problem, or nullopt for a valid command.
std::optional<std::string> check_usage(const std::vector<std::string>& words);

/// Verbs whose successful runs are recorded in the session log.
bool is_mutating(const std::vector<std::string>& words);

}  // namespace forge::tools

namespace forge {
struct OptionSet;
class Service;
}  // namespace forge

namespace forge::tools {

/// Saved template (optional), then options text (optional), then `Key=value` edits.
OptionSet compose_options(Service& svc, const std::string& base, const std::string& text,
                          const std::vector<std::string>& sets);

}  // namespace forge::tools
