#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "voxevo/control.hpp"
#include "voxevo/morphology.hpp"
#include "voxevo/rng.hpp"
#include "voxevo/walker.hpp"

namespace voxevo {

enum class MutationKind : std::uint8_t { Body = 0, Brain = 1, Fresh = 2 };
const char* to_string(MutationKind kind);
MutationKind parse_mutation_kind(std::string_view text);

enum class TrainingMode : std::uint8_t { CoOptimize, FixedBody, MultiBody };
const char* to_string(TrainingMode mode);
TrainingMode parse_training_mode(std::string_view text);

using IndividualId = std::uint64_t;

struct Individual {
    MorphologyGenome morphology;
    ControllerGenome controller;
    int age = 0;
    std::optional<double> fitness;
    IndividualId id = 0;
    std::optional<IndividualId> parent_id;
    MutationKind mutation_kind = MutationKind::Fresh;
    std::optional<double> parent_fitness_at_birth;
    int birth_generation = 0;
};

struct EvolutionConfig {
    int mu = 16;
    int lambda = 16;
    int generations = 0;
    double p_body_mutation = 0.5;
    double controller_sigma = 0.1;
    TrainingMode mode = TrainingMode::CoOptimize;
    ControllerKind paradigm = ControllerKind::Modular;
    /// FixedBody: exactly one body. MultiBody: the catalog. CoOptimize: unused.
    std::vector<MorphologyGenome> bodies;
    std::uint64_t master_seed = 0;
    int workers = 1;
    int retry_cap = kDefaultRetryCap;
    /// Generations whose population-best individual is kept in RunArtifacts::snapshots.
    std::vector<int> snapshot_generations;

    void validate() const;
    /// Body mutations are only drawn in co-optimization.
    double effective_p_body() const { return mode == TrainingMode::CoOptimize ? p_body_mutation : 0.0; }
};

struct OffspringRecord {
    IndividualId id = 0;
    std::optional<IndividualId> parent_id;
    MutationKind kind = MutationKind::Fresh;
    double fitness = 0.0;
    std::optional<double> parent_fitness_at_birth;
    bool success = false;  // fitness > parent_fitness_at_birth
};

struct GenerationLog {
    int generation = 0;
    double best_fitness = 0.0;  // over the surviving population
    double mean_fitness = 0.0;
    std::size_t pool_size = 0;  // before selection
    std::vector<OffspringRecord> offspring;

    int successes(MutationKind kind) const;
    int attempts(MutationKind kind) const;
};

/// One row per individual ever created in a run.
struct LineageEntry {
    IndividualId id = 0;
    std::optional<IndividualId> parent_id;
    MutationKind kind = MutationKind::Fresh;
    int birth_generation = 0;
    double fitness = 0.0;
    std::optional<double> parent_fitness_at_birth;

    friend bool operator==(const LineageEntry&, const LineageEntry&) = default;
};

struct Snapshot {
    int generation = 0;
    Individual best;
};

struct RunArtifacts {
    Individual champion;  // best-ever by fitness, earliest on ties
    double initial_best_fitness = 0.0;
    std::vector<GenerationLog> logs;
    std::vector<LineageEntry> lineage;
    std::vector<Individual> final_population;
    std::vector<Snapshot> snapshots;

    /// [initial best, best after generation 1, ...].
    std::vector<double> best_fitness_series() const;
};

/// Episode fitness of a controller on a body.
using EpisodeFitness = std::function<double(const MorphologyGenome&, const ControllerGenome&)>;

/// Binds walker_task::evaluate_fitness to a task configuration.
EpisodeFitness walker_fitness(const TaskConfig& task);

/// Non-dominated sorting on (minimize age, maximize fitness). Returns index
/// fronts, best first. Throws RejectedInput for unevaluated individuals.
std::vector<std::vector<std::size_t>> pareto_rank(std::span<const Individual> pool);

/// Fills `mu` survivors front by front; the last partial front is cut by
/// fitness (desc), then age (asc), then id (asc).
std::vector<Individual> select_survivors(std::vector<Individual> pool, int mu);

/// Mutates body (probability effective_p_body) or brain of an evaluated parent.
/// The child has age 0 and no fitness yet.
Individual make_offspring(const Individual& parent, const EvolutionConfig& cfg, Rng& rng, IndividualId id,
                          int generation);

/// A fresh random individual (random body in co-optimization, fixed body otherwise).
Individual make_fresh(const EvolutionConfig& cfg, const ObservationConfig& obs, Rng& rng, IndividualId id,
                      int generation);

/// Fitness per training mode; multi-body takes the minimum over cfg.bodies.
double evaluate_individual(const Individual& ind, const EvolutionConfig& cfg, const EpisodeFitness& episode);

/// Holds the population and id counter of one run. Randomness for every
/// (generation, slot) comes from its own derived stream, so evaluation
/// order and worker count do not affect results.
class Evolver {
public:
    Evolver(EvolutionConfig cfg, ObservationConfig obs, EpisodeFitness episode);

    /// Creates and evaluates the initial mu individuals (generation 0).
    void initialize();
    /// Runs one generation and returns its log.
    GenerationLog step();

    const std::vector<Individual>& population() const { return population_; }
    const Individual& champion() const { return champion_; }
    const std::vector<LineageEntry>& lineage() const { return lineage_; }
    int generation() const { return generation_; }
    const EvolutionConfig& config() const { return cfg_; }

private:
    void evaluate(std::vector<Individual>& batch);
    void record(const Individual& ind);

    EvolutionConfig cfg_;
    ObservationConfig obs_;
    EpisodeFitness episode_;
    std::vector<Individual> population_;
    std::vector<LineageEntry> lineage_;
    Individual champion_;
    IndividualId next_id_ = 0;
    int generation_ = 0;
    bool has_champion_ = false;
};

using GenerationObserver = std::function<void(const GenerationLog&, const Evolver&)>;

RunArtifacts run_evolution(const EvolutionConfig& cfg, const TaskConfig& task,
                           const GenerationObserver& observer = {});
RunArtifacts run_evolution(const EvolutionConfig& cfg, const ObservationConfig& obs,
                           const EpisodeFitness& episode, const GenerationObserver& observer = {});

}  // namespace voxevo
