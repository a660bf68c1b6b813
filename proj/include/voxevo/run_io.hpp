#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "voxevo/evolution.hpp"
#include "voxevo/experiments.hpp"
#include "voxevo/walker.hpp"

namespace voxevo {

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

/// Comma-separated, header row, '.' decimal, LF line endings.
inline constexpr const char* kGenerationCsvHeader =
    "generation,best_fitness,mean_fitness,n_body_success,n_brain_success,n_body_attempted,n_brain_attempted";
std::string generation_csv_row(const GenerationLog& log);

inline constexpr const char* kLineageCsvHeader = "id,parent_id,kind,birth_generation,fitness,parent_fitness_at_birth";
std::string lineage_csv_row(const LineageEntry& e);

inline constexpr const char* kTransferCsvHeader =
    "source_id,distance,neighbor,source_fitness,zero_shot_fitness,one_shot_fitness,relative_change_zero,"
    "relative_change_one,guarded";
std::string transfer_csv_row(const TransferSample& s);

/// Parsed rows of a generations CSV. Throws IntegrityError on malformed content.
struct GenerationRow {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    int n_body_success = 0;
    int n_brain_success = 0;
    int n_body_attempted = 0;
    int n_brain_attempted = 0;
};
std::vector<GenerationRow> parse_generation_csv(const std::string& text);
std::vector<LineageEntry> parse_lineage_csv(const std::string& text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// An output directory that lives at "<path>.partial" until commit() renames
/// it into place. Refuses to touch an existing target.
class StagedDirectory {
public:
    explicit StagedDirectory(std::filesystem::path target);
    const std::filesystem::path& path() const { return staging_; }
    const std::filesystem::path& target() const { return target_; }
    void commit();

private:
    std::filesystem::path target_;
    std::filesystem::path staging_;
};

/// Writes the trajectory as JSON lines: one metadata record, then one frame per step.
void write_trajectory(std::ostream& out, const EpisodeResult& result, const SimWorld& initial_world);

}  // namespace voxevo
