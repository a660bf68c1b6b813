#include "voxevo/run_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "voxevo/errors.hpp"

namespace voxevo {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

std::string generation_csv_row(const GenerationLog& log) {
    std::ostringstream out;
    out << log.generation << ',' << format_double(log.best_fitness) << ',' << format_double(log.mean_fitness) << ','
        << log.successes(MutationKind::Body) << ',' << log.successes(MutationKind::Brain) << ','
        << log.attempts(MutationKind::Body) << ',' << log.attempts(MutationKind::Brain);
    return out.str();
}

std::string lineage_csv_row(const LineageEntry& e) {
    std::ostringstream out;
    out << e.id << ',' << (e.parent_id ? std::to_string(*e.parent_id) : "") << ',' << to_string(e.kind) << ','
        << e.birth_generation << ',' << format_double(e.fitness) << ','
        << (e.parent_fitness_at_birth ? format_double(*e.parent_fitness_at_birth) : "");
    return out.str();
}

std::string transfer_csv_row(const TransferSample& s) {
    std::string neighbor;
    for (int code : s.neighbor.codes()) neighbor.push_back(static_cast<char>('0' + code));
    std::ostringstream out;
    out << s.source_id << ',' << s.distance << ',' << neighbor << ',' << format_double(s.source_fitness) << ','
        << format_double(s.zero_shot_fitness) << ',' << format_double(s.one_shot_fitness) << ','
        << format_double(s.relative_change_zero) << ',' << format_double(s.relative_change_one) << ','
        << (s.guarded ? 1 : 0);
    return out.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

template <typename T>
T parse_number(const std::string& s, int line) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw IntegrityError("line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

template <typename Fn>
void for_each_row(const std::string& text, const char* header, std::size_t columns, Fn&& fn) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != header) throw IntegrityError("unexpected CSV header");
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != columns)
            throw IntegrityError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                                 " fields");
        fn(fields, line_no);
    }
}

}  // namespace

std::vector<GenerationRow> parse_generation_csv(const std::string& text) {
    std::vector<GenerationRow> rows;
    for_each_row(text, kGenerationCsvHeader, 7, [&](const auto& f, int line) {
        rows.push_back({parse_number<int>(f[0], line), parse_number<double>(f[1], line),
                        parse_number<double>(f[2], line), parse_number<int>(f[3], line),
                        parse_number<int>(f[4], line), parse_number<int>(f[5], line), parse_number<int>(f[6], line)});
    });
    return rows;
}

std::vector<LineageEntry> parse_lineage_csv(const std::string& text) {
    std::vector<LineageEntry> rows;
    for_each_row(text, kLineageCsvHeader, 6, [&](const auto& f, int line) {
        LineageEntry e;
        e.id = parse_number<IndividualId>(f[0], line);
        if (!f[1].empty()) e.parent_id = parse_number<IndividualId>(f[1], line);
        try {
            e.kind = parse_mutation_kind(f[2]);
        } catch (const RejectedInput& err) {
            throw IntegrityError("line " + std::to_string(line) + ": " + err.what());
        }
        e.birth_generation = parse_number<int>(f[3], line);
        e.fitness = parse_number<double>(f[4], line);
        if (!f[5].empty()) e.parent_fitness_at_birth = parse_number<double>(f[5], line);
        rows.push_back(e);
    });
    return rows;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IntegrityError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out.flush()) throw std::runtime_error("failed to write " + path.string());
}

StagedDirectory::StagedDirectory(std::filesystem::path target)
    : target_(std::move(target)), staging_(target_.string() + ".partial") {
    if (std::filesystem::exists(target_))
        throw std::runtime_error("output path already exists: " + target_.string());
    if (std::filesystem::exists(staging_))
        throw std::runtime_error("stale partial output exists: " + staging_.string());
    if (target_.has_parent_path()) std::filesystem::create_directories(target_.parent_path());
    std::filesystem::create_directory(staging_);
}

void StagedDirectory::commit() { std::filesystem::rename(staging_, target_); }

void write_trajectory(std::ostream& out, const EpisodeResult& result, const SimWorld& initial_world) {
    nlohmann::json springs = nlohmann::json::array();
    for (const auto& s : initial_world.springs) springs.push_back({s.ends[0], s.ends[1]});
    nlohmann::json meta = {
        {"type", "meta"},
        {"fitness", result.fitness},
        {"delta_px", result.delta_px},
        {"reached_end", result.reached_end},
        {"steps", result.steps_used},
        {"diverged", result.diverged},
        {"frames", result.trajectory.size()},
        {"masses", initial_world.masses.size()},
        {"springs", springs},
    };
    out << meta.dump() << '\n';
    for (std::size_t i = 0; i < result.trajectory.size(); ++i) {
        nlohmann::json positions = nlohmann::json::array();
        for (const Vec2& p : result.trajectory[i]) positions.push_back({p.x, p.y});
        out << nlohmann::json{{"step", i}, {"positions", positions}}.dump() << '\n';
    }
}

}  // namespace voxevo
