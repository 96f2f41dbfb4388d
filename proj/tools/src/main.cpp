#include <iostream>

#include "forge_tools/cli.hpp"

namespace {

forge::fs::path exe_dir(const char* argv0) {
    std::error_code ec;
    auto self = forge::fs::read_symlink("/proc/self/exe", ec);
    if (ec) self = forge::fs::absolute(argv0);
    return self.parent_path();
}

}  // namespace

int main(int argc, char** argv) {
    forge::tools::CliConfig config;
    auto dir = exe_dir(argv[0]);
    config.path_prepend.push_back(dir.string());
    auto installed = dir.parent_path() / "share" / "forge";
    config.share_dir = forge::fs::is_directory(installed) ? installed : forge::fs::path(FORGE_SOURCE_SHARE_DIR);
    return forge::tools::run_cli({argv + 1, argv + argc}, std::cout, std::cerr, config);
}
