#include <doctest.h>

#include <set>

#include "voxevo/errors.hpp"
#include "voxevo/experiments.hpp"

using namespace voxevo;

namespace {

double toy_fitness(const MorphologyGenome& m, const ControllerGenome& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < 16; ++i) s += c.params.values()[i];
    return 2.0 + s - 0.05 * static_cast<double>(m.filled_count());
}

LineageEntry entry(IndividualId id, std::optional<IndividualId> parent, MutationKind kind, double fit,
                   std::optional<double> parent_fit) {
    return {id, parent, kind, 0, fit, parent_fit};
}

}  // namespace

TEST_CASE("default catalog") {
    MorphologyCatalog cat = MorphologyCatalog::defaults();
    REQUIRE(cat.entries().size() == 4);
    for (const auto& e : cat.entries()) {
        CHECK_NOTHROW(validate(e.genome));
        for (int c : e.genome.filled_cells()) CHECK(e.genome.at(c) == Material::HorizontalActuator);
    }
    CHECK(cat.at("block").filled_count() == 25);
    CHECK(cat.at("worm").to_text() == "00000\n00000\n00000\n33333\n33333\n");
    CHECK(cat.at("biped").to_text() == "33333\n33333\n33333\n33033\n33033\n");
    CHECK(cat.at("triped").to_text() == "33333\n33333\n30303\n30303\n30303\n");
    CHECK_THROWS_AS(cat.at("snake"), RejectedInput);
}

TEST_CASE("catalog text round trip and errors") {
    MorphologyCatalog cat = MorphologyCatalog::defaults();
    MorphologyCatalog back = MorphologyCatalog::parse(cat.to_text());
    REQUIRE(back.entries().size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(back.entries()[i].name == cat.entries()[i].name);
        CHECK(back.entries()[i].genome == cat.entries()[i].genome);
    }

    auto line_of = [](std::string_view text) {
        try {
            MorphologyCatalog::parse(text);
        } catch (const ConfigError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("[a]\n33333\n33333\n3333\n00000\n00000\n") == 4);
    CHECK(line_of("33333\n") == 1);
    // Invalid body: single actuator.
    CHECK(line_of("# c\n[a]\n00000\n00000\n00000\n00000\n31111\n") > 0);
    CHECK(line_of("[a]\n00000\n00000\n00000\n33333\n33333\n[a]\n00000\n00000\n00000\n33333\n33333\n") == 7);
    CHECK(line_of("[a]\n00000\n00000\n") > 0);
}

TEST_CASE("relative change") {
    CHECK(relative_change(4.0, 5.0) == doctest::Approx(-0.2));
    CHECK(relative_change(6.0, -2.0) == doctest::Approx(4.0));
    CHECK(relative_change(3.0, 3.0) == 0.0);
    CHECK(relative_change(1.0, 0.0) == doctest::Approx(10.0));
}

TEST_CASE("transfer invariants with a stub episode") {
    Rng rng(4);
    EvolutionConfig ecfg;
    Individual source = make_fresh(ecfg, {}, rng, 9, 0);
    source.fitness = toy_fitness(source.morphology, source.controller);
    TransferConfig cfg;
    cfg.distances = {1, 2};
    cfg.samples_per_distance = 10;
    cfg.one_shot_lambda = 4;
    cfg.workers = 3;
    TransferReport rep = transfer_analysis(source, cfg, 5, toy_fitness);
    CHECK(rep.samples.size() == 20);
    std::set<std::string> seen;
    for (const auto& s : rep.samples) {
        CHECK(s.source_id == 9);
        CHECK(s.one_shot_fitness >= s.zero_shot_fitness);
        CHECK(s.zero_shot_fitness == toy_fitness(s.neighbor, source.controller));
        CHECK(s.relative_change_zero == relative_change(s.zero_shot_fitness, s.source_fitness));
        CHECK_FALSE(s.neighbor == source.morphology);
        CHECK(grid_distance(s.neighbor, source.morphology) <= s.distance * 10);
        CHECK(seen.insert(std::to_string(s.distance) + s.neighbor.to_text()).second);
        CHECK_NOTHROW(validate(s.neighbor));
    }
    cfg.workers = 1;
    TransferReport again = transfer_analysis(source, cfg, 5, toy_fitness);
    REQUIRE(again.samples.size() == rep.samples.size());
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
        CHECK(again.samples[i].neighbor == rep.samples[i].neighbor);
        CHECK(again.samples[i].one_shot_fitness == rep.samples[i].one_shot_fitness);
    }
    auto mean = mean_relative_change(rep.samples, 1, false);
    REQUIRE(mean.has_value());
    CHECK_FALSE(mean_relative_change(rep.samples, 3, false).has_value());
}

TEST_CASE("self transfer has zero relative change") {
    Rng rng(6);
    EvolutionConfig ecfg;
    Individual source = make_fresh(ecfg, {}, rng, 0, 0);
    TaskConfig task;
    double f = evaluate_fitness(source.morphology, source.controller, task);
    double again = evaluate_fitness(source.morphology, source.controller, task);
    CHECK(relative_change(again, f) == 0.0);
}

TEST_CASE("guarded samples are excluded from means") {
    std::vector<TransferSample> s(3);
    for (auto& x : s) x.distance = 1;
    s[0].relative_change_zero = -0.5;
    s[1].relative_change_zero = -0.1;
    s[2].relative_change_zero = 100.0;
    s[2].guarded = true;
    CHECK(*mean_relative_change(s, 1, false) == doctest::Approx(-0.3));
}

TEST_CASE("mutation accounting along a lineage") {
    std::vector<LineageEntry> lin{
        entry(0, std::nullopt, MutationKind::Fresh, 1.0, std::nullopt),
        entry(1, 0, MutationKind::Body, 2.0, 1.0),
        entry(2, 1, MutationKind::Brain, 3.0, 2.0),
        entry(3, 2, MutationKind::Body, 4.0, 3.0),
        entry(4, 0, MutationKind::Brain, 0.5, 1.0),
        entry(5, 3, MutationKind::Brain, 3.5, 4.0),
    };
    MutationAccounting acc = mutation_accounting(lin, 3);
    CHECK(acc.lineage_body_successes == 2);
    CHECK(acc.lineage_brain_successes == 1);
    CHECK(*acc.lineage_body_fraction == doctest::Approx(2.0 / 3.0));
    CHECK(acc.population_body_successes == 2);
    CHECK(acc.population_brain_successes == 1);
    CHECK(acc.population_body_attempts == 2);
    CHECK(acc.population_brain_attempts == 3);
    CHECK(*acc.population_body_fraction == doctest::Approx(2.0 / 3.0));

    std::vector<LineageEntry> none{entry(0, std::nullopt, MutationKind::Fresh, 1.0, std::nullopt),
                                   entry(1, 0, MutationKind::Brain, 0.5, 1.0)};
    MutationAccounting empty = mutation_accounting(none, 1);
    CHECK_FALSE(empty.lineage_body_fraction.has_value());
    CHECK_FALSE(empty.population_body_fraction.has_value());

    std::vector<LineageEntry> broken{entry(3, 2, MutationKind::Body, 4.0, 3.0)};
    CHECK_THROWS_AS(mutation_accounting(broken, 3), IntegrityError);
    CHECK_THROWS_AS(mutation_accounting(lin, 42), IntegrityError);
}

TEST_CASE("convergence metrics") {
    ConvergenceMetrics m = convergence_metrics({0, 5, 9, 10});
    CHECK(m.generation == std::array<int, 4>{2, 2, 3, 3});
    CHECK_FALSE(m.shifted);
    CHECK(convergence_metrics({3, 3, 3}).generation == std::array<int, 4>{0, 0, 0, 0});
    ConvergenceMetrics neg = convergence_metrics({-5, -3, -1});
    CHECK(neg.shifted);
    // Shifted: {0, 2, 4}; 80% of 4 = 3.2 -> index 2.
    CHECK(neg.generation == std::array<int, 4>{2, 2, 2, 2});
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> s{std::normal_distribution<double>(0, 3)(rng)};
        for (int i = 0; i < 30; ++i) s.push_back(s.back() + std::uniform_real_distribution<double>(0, 1)(rng));
        auto g = convergence_metrics(s).generation;
        CHECK(std::is_sorted(g.begin(), g.end()));
    }
}

TEST_CASE("spread") {
    Spread s = spread({4, 1, 3, 2});
    CHECK(s.median == 2.5);
    CHECK(s.q1 == doctest::Approx(1.75));
    CHECK(s.q3 == doctest::Approx(3.25));
    CHECK(s.n == 4);
    CHECK(spread({7}).median == 7);
}

TEST_CASE("battery seeds and reproducibility") {
    TaskConfig task;
    task.episode.max_steps = 20;
    task.episode.shift_constant = 0.2;
    EvolutionConfig base;
    base.mu = 3;
    base.lambda = 3;
    std::vector<int> order;
    auto runs = run_battery(ControllerKind::Modular, 3, 2, 100, base, task,
                            [&](int i, const BatteryRun&) { order.push_back(i); });
    REQUIRE(runs.size() == 3);
    CHECK(order == std::vector<int>{0, 1, 2});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(runs[i].seed == 100 + i);
        REQUIRE(runs[i].artifacts.has_value());
    }
    CHECK(runs[0].artifacts->champion.controller != runs[1].artifacts->champion.controller);
    auto again = run_battery(ControllerKind::Modular, 3, 2, 100, base, task);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(*again[i].artifacts->champion.fitness == *runs[i].artifacts->champion.fitness);
}

TEST_CASE("multi-morphology training uses the minimum") {
    TaskConfig task;
    task.episode.max_steps = 20;
    task.episode.shift_constant = 0.2;
    EvolutionConfig base;
    base.mu = 3;
    base.lambda = 3;
    MorphologyCatalog cat = MorphologyCatalog::defaults();
    RunArtifacts run = multi_morph_training(ControllerKind::Modular, cat, 2, 3, base, task);
    for (const auto& g : cat.genomes()) {
        CHECK(run.champion.morphology == cat.genomes().front());
        CHECK(evaluate_fitness(g, run.champion.controller, task) >= *run.champion.fitness);
    }
    for (const auto& e : run.lineage) CHECK(e.kind != MutationKind::Body);

    MorphologyCatalog single;
    single.add("worm", cat.at("worm"));
    RunArtifacts one = multi_morph_training(ControllerKind::Modular, single, 2, 3, base, task);
    CHECK(*one.champion.fitness == evaluate_fitness(cat.at("worm"), one.champion.controller, task));
}
