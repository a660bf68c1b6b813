#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "voxevo/evolution.hpp"

namespace voxevo {

struct CatalogEntry {
    std::string name;
    MorphologyGenome genome;
};

/// Named fixed bodies used for fixed- and multi-morphology training.
class MorphologyCatalog {
public:
    /// biped, worm, triped and block, all horizontal-actuator voxels.
    static MorphologyCatalog defaults();
    /// Parses "[name]" headers each followed by 5 rows of 5 digits.
    /// Throws ConfigError (with line numbers) on malformed text or invalid bodies.
    static MorphologyCatalog parse(std::string_view text);
    std::string to_text() const;

    const std::vector<CatalogEntry>& entries() const { return entries_; }
    /// Throws RejectedInput for unknown names.
    const MorphologyGenome& at(std::string_view name) const;
    std::vector<MorphologyGenome> genomes() const;

    void add(std::string name, MorphologyGenome genome);

private:
    std::vector<CatalogEntry> entries_;
};

struct BatteryRun {
    std::uint64_t seed = 0;
    std::optional<RunArtifacts> artifacts;
    std::string error;  // set when the run failed
};

/// n_runs independent runs with seeds base_seed + i. Failures are recorded
/// per run and do not stop the battery.
std::vector<BatteryRun> run_battery(ControllerKind paradigm, int n_runs, int generations, std::uint64_t base_seed,
                                    const EvolutionConfig& base, const TaskConfig& task,
                                    const std::function<void(int, const BatteryRun&)>& on_run = {});

/// Joint training in multi-body mode over all catalog bodies.
RunArtifacts multi_morph_training(ControllerKind paradigm, const MorphologyCatalog& catalog, int generations,
                                  std::uint64_t seed, const EvolutionConfig& base, const TaskConfig& task);

inline constexpr double kRelativeChangeGuard = 0.1;

struct TransferSample {
    IndividualId source_id = 0;
    int distance = 0;
    MorphologyGenome neighbor;
    double source_fitness = 0.0;
    double zero_shot_fitness = 0.0;
    double one_shot_fitness = 0.0;
    double relative_change_zero = 0.0;
    double relative_change_one = 0.0;
    bool guarded = false;  // |source_fitness| < guard; excluded from means
};

struct TransferConfig {
    std::vector<int> distances{1, 2, 3};
    int samples_per_distance = 20;
    int one_shot_lambda = 16;
    double sigma = 0.1;
    int workers = 1;
    int retry_cap = kDefaultRetryCap;
};

struct TransferReport {
    std::vector<TransferSample> samples;
    std::vector<std::string> skipped;  // one message per neighbor that could not be sampled
};

/// (f - f_source) / |f_source|, with the denominator floored at the guard.
double relative_change(double fitness, double source_fitness);

/// Zero- and one-shot transfer of `source.controller` to mutation-distance
/// neighbors of `source.morphology`. Results depend only on (inputs, seed).
TransferReport transfer_analysis(const Individual& source, const TransferConfig& cfg, std::uint64_t seed,
                                 const EpisodeFitness& episode);

/// Mean relative change over non-guarded samples at one distance; nullopt if none.
std::optional<double> mean_relative_change(const std::vector<TransferSample>& samples, int distance,
                                           bool one_shot);

struct MutationAccounting {
    std::optional<double> lineage_body_fraction;
    std::optional<double> population_body_fraction;
    int lineage_body_successes = 0;
    int lineage_brain_successes = 0;
    int population_body_successes = 0;
    int population_brain_successes = 0;
    int population_body_attempts = 0;
    int population_brain_attempts = 0;
};

/// Body share of successful mutations along the champion's ancestry and over
/// every offspring. Throws IntegrityError if the ancestry chain is broken.
MutationAccounting mutation_accounting(const std::vector<LineageEntry>& lineage, IndividualId champion);
MutationAccounting mutation_accounting(const RunArtifacts& run);

inline constexpr std::array<double, 4> kConvergenceThresholds{0.8, 0.9, 0.95, 0.99};

struct ConvergenceMetrics {
    std::array<int, 4> generation{};  // per kConvergenceThresholds
    bool shifted = false;             // series was shifted to be non-negative
};

/// First index reaching each fraction of the final value. A non-positive
/// final value is handled by shifting the series so its minimum is zero.
ConvergenceMetrics convergence_metrics(const std::vector<double>& best_series);

struct Spread {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    std::size_t n = 0;
};

/// Median and quartiles with linear interpolation between order statistics.
Spread spread(std::vector<double> values);

/// Desk-scale comparison of both paradigms on co-optimization batteries.
struct ParadigmStats {
    ControllerKind paradigm = ControllerKind::Modular;
    std::vector<double> champion_fitness;
    std::vector<double> zero_shot_change;  // per-run mean at distance 1
    std::vector<double> one_shot_change;
    std::vector<double> population_body_fraction;
    std::vector<double> lineage_body_fraction;
    int failed_runs = 0;
};

struct ParadigmComparison {
    ParadigmStats modular;
    ParadigmStats global;
    bool champion_trend = false;   // median modular >= median global
    bool transfer_trend = false;   // both drops negative, modular drop <= global drop
    bool body_success_trend = false;  // modular body fraction higher
    std::string summary;          // human-readable medians / IQRs
};

struct ComparisonConfig {
    int n_runs = 8;
    int generations = 300;
    std::uint64_t base_seed = 1;
    TransferConfig transfer{{1}, 20, 16, 0.1, 1, kDefaultRetryCap};
};

ParadigmComparison compare_paradigms(const ComparisonConfig& cmp, const EvolutionConfig& base,
                                     const TaskConfig& task);

}  // namespace voxevo
