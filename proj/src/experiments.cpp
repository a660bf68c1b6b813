#include "voxevo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "voxevo/errors.hpp"
#include "voxevo/parallel.hpp"

namespace voxevo {

namespace {

MorphologyGenome filled(std::initializer_list<std::pair<int, std::initializer_list<int>>> rows) {
    MorphologyGenome g;
    for (const auto& [row, cols] : rows)
        for (int c : cols) g.set(Cell{row, c}, Material::HorizontalActuator);
    return g;
}

constexpr std::uint64_t kTransferNeighborStream = 11;
constexpr std::uint64_t kTransferOneShotStream = 12;

}  // namespace

MorphologyCatalog MorphologyCatalog::defaults() {
    const std::initializer_list<int> all{0, 1, 2, 3, 4};
    MorphologyCatalog cat;
    cat.add("biped", filled({{0, all}, {1, all}, {2, all}, {3, {0, 1, 3, 4}}, {4, {0, 1, 3, 4}}}));
    cat.add("worm", filled({{3, all}, {4, all}}));
    cat.add("triped", filled({{0, all}, {1, all}, {2, {0, 2, 4}}, {3, {0, 2, 4}}, {4, {0, 2, 4}}}));
    cat.add("block", filled({{0, all}, {1, all}, {2, all}, {3, all}, {4, all}}));
    return cat;
}

void MorphologyCatalog::add(std::string name, MorphologyGenome genome) {
    if (!validate(genome)) throw RejectedInput("catalog body '" + name + "' is not a valid morphology");
    for (const auto& e : entries_)
        if (e.name == name) throw RejectedInput("duplicate catalog body '" + name + "'");
    entries_.push_back({std::move(name), genome});
}

MorphologyCatalog MorphologyCatalog::parse(std::string_view text) {
    MorphologyCatalog cat;
    std::istringstream in{std::string(text)};
    std::string line, name, rows;
    int line_no = 0, header_line = 0, row_count = 0;
    auto flush = [&] {
        if (name.empty()) return;
        if (row_count != kGridSide)
            throw ConfigError(header_line, "catalog body '" + name + "' needs 5 rows, got " + std::to_string(row_count));
        try {
            cat.add(name, MorphologyGenome::from_text(rows));
        } catch (const RejectedInput& e) {
            throw ConfigError(header_line, e.what());
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto last = line.find_last_not_of(" \t\r");
        std::string trimmed = line.substr(first, last - first + 1);
        if (trimmed.front() == '[') {
            if (trimmed.back() != ']') throw ConfigError(line_no, "unterminated section header");
            flush();
            name = trimmed.substr(1, trimmed.size() - 2);
            if (name.empty()) throw ConfigError(line_no, "empty catalog body name");
            header_line = line_no;
            rows.clear();
            row_count = 0;
            continue;
        }
        if (name.empty()) throw ConfigError(line_no, "grid row before any [name] header");
        if (trimmed.size() != static_cast<std::size_t>(kGridSide) ||
            trimmed.find_first_not_of("01234") != std::string::npos)
            throw ConfigError(line_no, "grid row must be 5 digits in 0-4");
        if (++row_count > kGridSide) throw ConfigError(line_no, "too many rows for body '" + name + "'");
        rows += trimmed + "\n";
    }
    flush();
    if (cat.entries_.empty()) throw ConfigError(0, "catalog has no bodies");
    return cat;
}

std::string MorphologyCatalog::to_text() const {
    std::string out;
    for (const auto& e : entries_) out += "[" + e.name + "]\n" + e.genome.to_text();
    return out;
}

const MorphologyGenome& MorphologyCatalog::at(std::string_view name) const {
    for (const auto& e : entries_)
        if (e.name == name) return e.genome;
    throw RejectedInput("unknown catalog body '" + std::string(name) + "'");
}

std::vector<MorphologyGenome> MorphologyCatalog::genomes() const {
    std::vector<MorphologyGenome> out;
    for (const auto& e : entries_) out.push_back(e.genome);
    return out;
}

std::vector<BatteryRun> run_battery(ControllerKind paradigm, int n_runs, int generations, std::uint64_t base_seed,
                                    const EvolutionConfig& base, const TaskConfig& task,
                                    const std::function<void(int, const BatteryRun&)>& on_run) {
    if (n_runs < 1) throw RejectedInput("run_battery: n_runs must be >= 1");
    std::vector<BatteryRun> runs;
    for (int i = 0; i < n_runs; ++i) {
        EvolutionConfig cfg = base;
        cfg.paradigm = paradigm;
        cfg.generations = generations;
        cfg.master_seed = base_seed + static_cast<std::uint64_t>(i);
        BatteryRun run;
        run.seed = cfg.master_seed;
        try {
            run.artifacts = run_evolution(cfg, task);
        } catch (const std::exception& e) {
            run.error = e.what();
        }
        if (on_run) on_run(i, run);
        runs.push_back(std::move(run));
    }
    return runs;
}

RunArtifacts multi_morph_training(ControllerKind paradigm, const MorphologyCatalog& catalog, int generations,
                                  std::uint64_t seed, const EvolutionConfig& base, const TaskConfig& task) {
    EvolutionConfig cfg = base;
    cfg.paradigm = paradigm;
    cfg.mode = TrainingMode::MultiBody;
    cfg.bodies = catalog.genomes();
    cfg.generations = generations;
    cfg.master_seed = seed;
    return run_evolution(cfg, task);
}

double relative_change(double fitness, double source_fitness) {
    return (fitness - source_fitness) / std::max(std::abs(source_fitness), kRelativeChangeGuard);
}

TransferReport transfer_analysis(const Individual& source, const TransferConfig& cfg, std::uint64_t seed,
                                 const EpisodeFitness& episode) {
    if (cfg.samples_per_distance < 1) throw RejectedInput("transfer: samples_per_distance must be >= 1");
    if (cfg.one_shot_lambda < 0) throw RejectedInput("transfer: one_shot_lambda must be >= 0");
    for (int d : cfg.distances)
        if (d < 1) throw RejectedInput("transfer: distances must be >= 1");

    TransferReport report;
    const double source_fitness = episode(source.morphology, source.controller);

    // Neighbors are drawn sequentially so the set does not depend on worker count.
    for (int d : cfg.distances) {
        Rng rng = make_rng(seed, {kTransferNeighborStream, static_cast<std::uint64_t>(d)});
        std::set<std::array<int, kGridCells>> seen{source.morphology.codes()};
        int found = 0;
        const int attempt_cap = 50 * cfg.samples_per_distance;
        for (int attempt = 0; attempt < attempt_cap && found < cfg.samples_per_distance; ++attempt) {
            MorphologyGenome neighbor;
            try {
                neighbor = sample_neighbor(source.morphology, d, rng, cfg.retry_cap);
            } catch (const MutationFailed& e) {
                report.skipped.push_back("distance " + std::to_string(d) + ": " + e.what());
                continue;
            }
            if (!seen.insert(neighbor.codes()).second) continue;
            TransferSample s;
            s.source_id = source.id;
            s.distance = d;
            s.neighbor = neighbor;
            s.source_fitness = source_fitness;
            report.samples.push_back(std::move(s));
            ++found;
        }
        for (int k = found; k < cfg.samples_per_distance; ++k)
            report.skipped.push_back("distance " + std::to_string(d) + ": no distinct neighbor after " +
                                     std::to_string(attempt_cap) + " draws");
    }

    parallel_for(report.samples.size(), cfg.workers, [&](std::size_t i) {
        TransferSample& s = report.samples[i];
        s.zero_shot_fitness = episode(s.neighbor, source.controller);
        Rng rng = make_rng(seed, {kTransferOneShotStream, static_cast<std::uint64_t>(s.distance), i});
        double best = s.zero_shot_fitness;
        for (int k = 0; k < cfg.one_shot_lambda; ++k)
            best = std::max(best, episode(s.neighbor, mutate_controller(source.controller, rng, cfg.sigma)));
        s.one_shot_fitness = best;
        s.relative_change_zero = relative_change(s.zero_shot_fitness, source_fitness);
        s.relative_change_one = relative_change(s.one_shot_fitness, source_fitness);
        s.guarded = std::abs(source_fitness) < kRelativeChangeGuard;
    });
    return report;
}

std::optional<double> mean_relative_change(const std::vector<TransferSample>& samples, int distance,
                                           bool one_shot) {
    double sum = 0.0;
    int n = 0;
    for (const auto& s : samples) {
        if (s.distance != distance || s.guarded) continue;
        sum += one_shot ? s.relative_change_one : s.relative_change_zero;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

MutationAccounting mutation_accounting(const std::vector<LineageEntry>& lineage, IndividualId champion) {
    MutationAccounting acc;
    std::map<IndividualId, const LineageEntry*> by_id;
    for (const auto& e : lineage) {
        if (!by_id.emplace(e.id, &e).second)
            throw IntegrityError("lineage lists individual " + std::to_string(e.id) + " twice");
        if (e.kind == MutationKind::Fresh) continue;
        if (!e.parent_fitness_at_birth)
            throw IntegrityError("offspring " + std::to_string(e.id) + " has no parent fitness");
        bool success = e.fitness > *e.parent_fitness_at_birth;
        if (e.kind == MutationKind::Body) {
            ++acc.population_body_attempts;
            acc.population_body_successes += success;
        } else {
            ++acc.population_brain_attempts;
            acc.population_brain_successes += success;
        }
    }

    auto it = by_id.find(champion);
    if (it == by_id.end()) throw IntegrityError("champion " + std::to_string(champion) + " missing from lineage");
    std::set<IndividualId> visited;
    for (const LineageEntry* e = it->second; e->kind != MutationKind::Fresh;) {
        if (!visited.insert(e->id).second) throw IntegrityError("lineage contains a cycle");
        if (!e->parent_id) throw IntegrityError("offspring " + std::to_string(e->id) + " has no parent");
        if (e->fitness > *e->parent_fitness_at_birth)
            (e->kind == MutationKind::Body ? acc.lineage_body_successes : acc.lineage_brain_successes)++;
        auto parent = by_id.find(*e->parent_id);
        if (parent == by_id.end())
            throw IntegrityError("broken lineage: parent " + std::to_string(*e->parent_id) + " of " +
                                 std::to_string(e->id) + " is missing");
        e = parent->second;
    }

    auto fraction = [](int body, int brain) -> std::optional<double> {
        if (body + brain == 0) return std::nullopt;
        return static_cast<double>(body) / (body + brain);
    };
    acc.lineage_body_fraction = fraction(acc.lineage_body_successes, acc.lineage_brain_successes);
    acc.population_body_fraction = fraction(acc.population_body_successes, acc.population_brain_successes);
    return acc;
}

MutationAccounting mutation_accounting(const RunArtifacts& run) {
    return mutation_accounting(run.lineage, run.champion.id);
}

ConvergenceMetrics convergence_metrics(const std::vector<double>& best_series) {
    if (best_series.empty()) throw RejectedInput("convergence_metrics: empty series");
    ConvergenceMetrics m;
    std::vector<double> series = best_series;
    if (series.back() <= 0.0) {
        double lo = *std::min_element(series.begin(), series.end());
        for (double& v : series) v -= lo;
        m.shifted = true;
    }
    const double final_value = series.back();
    for (std::size_t k = 0; k < kConvergenceThresholds.size(); ++k) {
        double target = kConvergenceThresholds[k] * final_value;
        auto it = std::find_if(series.begin(), series.end(), [&](double v) { return v >= target; });
        m.generation[k] = static_cast<int>(it - series.begin());
    }
    return m;
}

Spread spread(std::vector<double> values) {
    Spread s;
    s.n = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        double pos = q * static_cast<double>(values.size() - 1);
        auto lo = static_cast<std::size_t>(std::floor(pos));
        std::size_t hi = std::min(lo + 1, values.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    s.median = quantile(0.5);
    s.q1 = quantile(0.25);
    s.q3 = quantile(0.75);
    return s;
}

namespace {

ParadigmStats battery_stats(ControllerKind paradigm, const ComparisonConfig& cmp, const EvolutionConfig& base,
                            const TaskConfig& task) {
    ParadigmStats stats;
    stats.paradigm = paradigm;
    EvolutionConfig cfg = base;
    cfg.mode = TrainingMode::CoOptimize;
    auto runs = run_battery(paradigm, cmp.n_runs, cmp.generations, cmp.base_seed, cfg, task);
    TransferConfig tcfg = cmp.transfer;
    tcfg.workers = base.workers;
    const EpisodeFitness episode = walker_fitness(task);
    for (const auto& run : runs) {
        if (!run.artifacts) {
            ++stats.failed_runs;
            continue;
        }
        const RunArtifacts& art = *run.artifacts;
        stats.champion_fitness.push_back(*art.champion.fitness);
        auto report = transfer_analysis(art.champion, tcfg, derive_seed(run.seed, {0x7A5F}), episode);
        if (auto z = mean_relative_change(report.samples, tcfg.distances.front(), false))
            stats.zero_shot_change.push_back(*z);
        if (auto o = mean_relative_change(report.samples, tcfg.distances.front(), true))
            stats.one_shot_change.push_back(*o);
        auto acc = mutation_accounting(art);
        if (acc.population_body_fraction) stats.population_body_fraction.push_back(*acc.population_body_fraction);
        if (acc.lineage_body_fraction) stats.lineage_body_fraction.push_back(*acc.lineage_body_fraction);
    }
    return stats;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return std::nan("");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string describe(const char* label, const std::vector<double>& v) {
    Spread s = spread(v);
    std::ostringstream out;
    out.precision(4);
    out << "  " << label << ": median " << s.median << " IQR [" << s.q1 << ", " << s.q3 << "] mean " << mean(v)
        << " (n=" << s.n << ")\n";
    return out.str();
}

}  // namespace

ParadigmComparison compare_paradigms(const ComparisonConfig& cmp, const EvolutionConfig& base,
                                     const TaskConfig& task) {
    ParadigmComparison out;
    out.modular = battery_stats(ControllerKind::Modular, cmp, base, task);
    out.global = battery_stats(ControllerKind::Global, cmp, base, task);

    const auto& m = out.modular;
    const auto& g = out.global;
    out.champion_trend = spread(m.champion_fitness).median >= spread(g.champion_fitness).median;
    double mz = mean(m.zero_shot_change), gz = mean(g.zero_shot_change);
    out.transfer_trend = mz < 0.0 && gz < 0.0 && mz >= gz;
    out.body_success_trend =
        spread(m.population_body_fraction).median > spread(g.population_body_fraction).median;

    std::ostringstream s;
    for (const ParadigmStats* p : {&m, &g}) {
        s << to_string(p->paradigm) << " (" << p->champion_fitness.size() << " runs, " << p->failed_runs
          << " failed)\n";
        s << describe("champion fitness", p->champion_fitness);
        s << describe("zero-shot relative change (d=1)", p->zero_shot_change);
        s << describe("one-shot relative change (d=1)", p->one_shot_change);
        s << describe("population body-success fraction", p->population_body_fraction);
        s << describe("lineage body-success fraction", p->lineage_body_fraction);
    }
    out.summary = s.str();
    return out;
}

}  // namespace voxevo
