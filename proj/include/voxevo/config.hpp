#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "voxevo/evolution.hpp"
#include "voxevo/experiments.hpp"
#include "voxevo/walker.hpp"

namespace voxevo {

/// Sectioned key = value text. '#' and ';' start comments. Keeps line
/// numbers so validation errors can point at the offending line.
class IniDocument {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    /// Throws ConfigError on syntax errors and duplicate keys.
    static IniDocument parse(std::string_view text);

    bool has(const std::string& section, const std::string& key) const;
    const Entry* find(const std::string& section, const std::string& key) const;
    const std::map<std::string, std::map<std::string, Entry>>& sections() const { return sections_; }
    int section_line(const std::string& section) const;

private:
    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::map<std::string, int> section_lines_;
};

/// Everything one invocation of the CLI needs, validated up front.
struct RunConfig {
    TaskConfig task;
    EvolutionConfig evolution;
    MorphologyCatalog catalog = MorphologyCatalog::defaults();
    TransferConfig transfer;
    std::string fixed_body;  // catalog name for fixed-body mode
    std::string out_dir;
    int n_runs = 1;
    int checkpoint_every = 50;
    std::vector<double> snapshot_fractions{0.25, 0.5, 0.75, 1.0};
    std::uint64_t seed = 0;

    /// Generations at which population-best snapshots are kept.
    std::vector<int> snapshot_generations() const;
};

/// Parses and validates a run configuration. Unknown sections or keys, bad
/// values and missing required keys ([run] seed, [run] paradigm,
/// [evolution] generations) raise ConfigError. Relative catalog paths are
/// resolved against `base_dir`.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// A documented configuration listing every key with its default.
std::string default_config_text();

}  // namespace voxevo
