#include "voxevo/evolution.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "voxevo/errors.hpp"
#include "voxevo/parallel.hpp"

namespace voxevo {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kOffspringStream = 2;
constexpr std::uint64_t kFreshStream = 3;

bool dominates(const Individual& a, const Individual& b) {
    double fa = *a.fitness, fb = *b.fitness;
    return a.age <= b.age && fa >= fb && (a.age < b.age || fa > fb);
}

bool better_in_front(const Individual& a, const Individual& b) {
    if (*a.fitness != *b.fitness) return *a.fitness > *b.fitness;
    if (a.age != b.age) return a.age < b.age;
    return a.id < b.id;
}

}  // namespace

const char* to_string(MutationKind kind) {
    switch (kind) {
        case MutationKind::Body: return "body";
        case MutationKind::Brain: return "brain";
        case MutationKind::Fresh: return "fresh";
    }
    return "fresh";
}

MutationKind parse_mutation_kind(std::string_view text) {
    if (text == "body") return MutationKind::Body;
    if (text == "brain") return MutationKind::Brain;
    if (text == "fresh") return MutationKind::Fresh;
    throw RejectedInput("unknown mutation kind '" + std::string(text) + "'");
}

const char* to_string(TrainingMode mode) {
    switch (mode) {
        case TrainingMode::CoOptimize: return "co-optimize";
        case TrainingMode::FixedBody: return "fixed-body";
        case TrainingMode::MultiBody: return "multi-body";
    }
    return "co-optimize";
}

TrainingMode parse_training_mode(std::string_view text) {
    if (text == "co-optimize") return TrainingMode::CoOptimize;
    if (text == "fixed-body") return TrainingMode::FixedBody;
    if (text == "multi-body") return TrainingMode::MultiBody;
    throw RejectedInput("unknown training mode '" + std::string(text) + "'");
}

void EvolutionConfig::validate() const {
    if (mu < 1) throw ConfigError(0, "evolution: mu must be >= 1");
    if (lambda < 1) throw ConfigError(0, "evolution: lambda must be >= 1");
    if (generations < 0) throw ConfigError(0, "evolution: generations must be >= 0");
    if (!(p_body_mutation >= 0.0 && p_body_mutation <= 1.0))
        throw ConfigError(0, "evolution: p_body_mutation must be in [0, 1]");
    if (!(controller_sigma >= 0.0) || !std::isfinite(controller_sigma))
        throw ConfigError(0, "evolution: controller_sigma must be finite and >= 0");
    if (retry_cap < 1) throw ConfigError(0, "evolution: retry_cap must be >= 1");
    if (mode == TrainingMode::FixedBody && bodies.size() != 1)
        throw ConfigError(0, "evolution: fixed-body mode needs exactly one body");
    if (mode == TrainingMode::MultiBody && bodies.empty())
        throw ConfigError(0, "evolution: multi-body mode needs at least one body");
    for (const auto& b : bodies)
        if (!voxevo::validate(b)) throw ConfigError(0, "evolution: catalog body is not a valid morphology");
}

int GenerationLog::successes(MutationKind kind) const {
    return static_cast<int>(std::count_if(offspring.begin(), offspring.end(),
                                          [&](const auto& r) { return r.kind == kind && r.success; }));
}

int GenerationLog::attempts(MutationKind kind) const {
    return static_cast<int>(
        std::count_if(offspring.begin(), offspring.end(), [&](const auto& r) { return r.kind == kind; }));
}

std::vector<double> RunArtifacts::best_fitness_series() const {
    std::vector<double> series{initial_best_fitness};
    for (const auto& log : logs) series.push_back(log.best_fitness);
    return series;
}

EpisodeFitness walker_fitness(const TaskConfig& task) {
    return [task](const MorphologyGenome& body, const ControllerGenome& controller) {
        return evaluate_fitness(body, controller, task);
    };
}

std::vector<std::vector<std::size_t>> pareto_rank(std::span<const Individual> pool) {
    for (const auto& ind : pool)
        if (!ind.fitness) throw RejectedInput("pareto_rank: individual " + std::to_string(ind.id) + " is unevaluated");

    const std::size_t n = pool.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<int> dominators(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (dominates(pool[i], pool[j])) {
                dominated[i].push_back(j);
                ++dominators[j];
            }
        }

    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (dominators[i] == 0) current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current)
            for (std::size_t j : dominated[i])
                if (--dominators[j] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<Individual> select_survivors(std::vector<Individual> pool, int mu) {
    if (mu < 0) throw RejectedInput("select_survivors: mu must be >= 0");
    if (static_cast<std::size_t>(mu) >= pool.size()) return pool;

    std::vector<Individual> survivors;
    survivors.reserve(static_cast<std::size_t>(mu));
    for (auto& front : pareto_rank(pool)) {
        std::sort(front.begin(), front.end(),
                  [&](std::size_t a, std::size_t b) { return better_in_front(pool[a], pool[b]); });
        for (std::size_t i : front) {
            if (survivors.size() == static_cast<std::size_t>(mu)) return survivors;
            survivors.push_back(std::move(pool[i]));
        }
    }
    return survivors;
}

Individual make_offspring(const Individual& parent, const EvolutionConfig& cfg, Rng& rng, IndividualId id,
                          int generation) {
    if (!parent.fitness) throw RejectedInput("make_offspring: parent is unevaluated");
    Individual child;
    child.id = id;
    child.parent_id = parent.id;
    child.parent_fitness_at_birth = parent.fitness;
    child.birth_generation = generation;
    child.age = 0;

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    bool body = coin(rng) < cfg.effective_p_body();
    if (body) {
        try {
            child.morphology = mutate_morphology(parent.morphology, rng, cfg.retry_cap);
            child.controller = parent.controller;
            child.mutation_kind = MutationKind::Body;
            return child;
        } catch (const MutationFailed&) {
            // Fall through to a brain mutation so every slot yields an offspring.
        }
    }
    child.morphology = parent.morphology;
    child.controller = mutate_controller(parent.controller, rng, cfg.controller_sigma);
    child.mutation_kind = MutationKind::Brain;
    return child;
}

Individual make_fresh(const EvolutionConfig& cfg, const ObservationConfig& obs, Rng& rng, IndividualId id,
                      int generation) {
    Individual ind;
    ind.id = id;
    ind.birth_generation = generation;
    ind.mutation_kind = MutationKind::Fresh;
    ind.morphology = cfg.mode == TrainingMode::CoOptimize ? random_morphology(rng, cfg.retry_cap)
                                                          : cfg.bodies.front();
    ind.controller = init_controller(cfg.paradigm, rng, obs);
    return ind;
}

double evaluate_individual(const Individual& ind, const EvolutionConfig& cfg, const EpisodeFitness& episode) {
    switch (cfg.mode) {
        case TrainingMode::CoOptimize: return episode(ind.morphology, ind.controller);
        case TrainingMode::FixedBody: return episode(cfg.bodies.front(), ind.controller);
        case TrainingMode::MultiBody: {
            double worst = std::numeric_limits<double>::infinity();
            for (const auto& body : cfg.bodies) worst = std::min(worst, episode(body, ind.controller));
            return worst;
        }
    }
    return 0.0;
}

Evolver::Evolver(EvolutionConfig cfg, ObservationConfig obs, EpisodeFitness episode)
    : cfg_(std::move(cfg)), obs_(obs), episode_(std::move(episode)) {
    cfg_.validate();
}

void Evolver::evaluate(std::vector<Individual>& batch) {
    parallel_for(batch.size(), cfg_.workers,
                 [&](std::size_t i) { batch[i].fitness = evaluate_individual(batch[i], cfg_, episode_); });
    for (const auto& ind : batch) record(ind);
}

void Evolver::record(const Individual& ind) {
    lineage_.push_back({ind.id, ind.parent_id, ind.mutation_kind, ind.birth_generation, *ind.fitness,
                        ind.parent_fitness_at_birth});
    if (!has_champion_ || *ind.fitness > *champion_.fitness) {
        champion_ = ind;
        has_champion_ = true;
    }
}

void Evolver::initialize() {
    population_.clear();
    lineage_.clear();
    has_champion_ = false;
    generation_ = 0;
    next_id_ = 0;
    for (int slot = 0; slot < cfg_.mu; ++slot) {
        Rng rng = make_rng(cfg_.master_seed, {kInitStream, static_cast<std::uint64_t>(slot)});
        population_.push_back(make_fresh(cfg_, obs_, rng, next_id_++, 0));
    }
    evaluate(population_);
}

GenerationLog Evolver::step() {
    if (population_.size() != static_cast<std::size_t>(cfg_.mu))
        throw RejectedInput("Evolver::step: population not initialized");
    const int gen = ++generation_;
    const auto g = static_cast<std::uint64_t>(gen);
    for (auto& ind : population_) ++ind.age;

    std::vector<Individual> newcomers;
    newcomers.reserve(static_cast<std::size_t>(cfg_.lambda) + 1);
    for (int slot = 0; slot < cfg_.lambda; ++slot) {
        Rng rng = make_rng(cfg_.master_seed, {kOffspringStream, g, static_cast<std::uint64_t>(slot)});
        std::uniform_int_distribution<std::size_t> pick(0, population_.size() - 1);
        const Individual& parent = population_[pick(rng)];
        newcomers.push_back(make_offspring(parent, cfg_, rng, next_id_++, gen));
    }
    {
        Rng rng = make_rng(cfg_.master_seed, {kFreshStream, g});
        newcomers.push_back(make_fresh(cfg_, obs_, rng, next_id_++, gen));
    }
    evaluate(newcomers);

    GenerationLog log;
    log.generation = gen;
    for (const auto& ind : newcomers) {
        OffspringRecord r{ind.id, ind.parent_id, ind.mutation_kind, *ind.fitness, ind.parent_fitness_at_birth, false};
        r.success = r.parent_fitness_at_birth && r.fitness > *r.parent_fitness_at_birth;
        log.offspring.push_back(r);
    }

    std::vector<Individual> pool = std::move(population_);
    for (auto& ind : newcomers) pool.push_back(std::move(ind));
    log.pool_size = pool.size();
    population_ = select_survivors(std::move(pool), cfg_.mu);

    double best = -std::numeric_limits<double>::infinity(), sum = 0.0;
    for (const auto& ind : population_) {
        best = std::max(best, *ind.fitness);
        sum += *ind.fitness;
    }
    log.best_fitness = best;
    log.mean_fitness = sum / static_cast<double>(population_.size());
    return log;
}

namespace {

const Individual& population_best(const std::vector<Individual>& pop) {
    return *std::max_element(pop.begin(), pop.end(), [](const Individual& a, const Individual& b) {
        if (*a.fitness != *b.fitness) return *a.fitness < *b.fitness;
        return a.id > b.id;
    });
}

}  // namespace

RunArtifacts run_evolution(const EvolutionConfig& cfg, const ObservationConfig& obs,
                           const EpisodeFitness& episode, const GenerationObserver& observer) {
    Evolver evolver(cfg, obs, episode);
    evolver.initialize();

    RunArtifacts run;
    run.initial_best_fitness = *population_best(evolver.population()).fitness;
    auto snapshot = [&](int gen) {
        if (std::find(cfg.snapshot_generations.begin(), cfg.snapshot_generations.end(), gen) !=
            cfg.snapshot_generations.end())
            run.snapshots.push_back({gen, population_best(evolver.population())});
    };
    snapshot(0);
    for (int gen = 1; gen <= cfg.generations; ++gen) {
        run.logs.push_back(evolver.step());
        snapshot(gen);
        if (observer) observer(run.logs.back(), evolver);
    }
    run.champion = evolver.champion();
    run.lineage = evolver.lineage();
    run.final_population = evolver.population();
    return run;
}

RunArtifacts run_evolution(const EvolutionConfig& cfg, const TaskConfig& task, const GenerationObserver& observer) {
    task.validate();
    return run_evolution(cfg, task.observation, walker_fitness(task), observer);
}

}  // namespace voxevo
