#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace voxevo {

struct CommandOptions {
    std::filesystem::path config;
    std::filesystem::path champion;
    std::filesystem::path run_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::filesystem::path> out;
};

/// Exit codes: 0 success, 1 runtime/integrity failure, 2 invalid configuration or usage.
int cmd_evolve(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_transfer(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_replay(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_report(const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace voxevo
