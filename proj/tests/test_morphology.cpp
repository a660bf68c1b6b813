#include <doctest.h>

#include <set>

#include "voxevo/errors.hpp"
#include "voxevo/morphology.hpp"

using namespace voxevo;

namespace {

MorphologyGenome grid(const char* text) { return MorphologyGenome::from_text(text); }

}  // namespace

TEST_CASE("validate applies fill, actuator and connectivity constraints") {
    CHECK_FALSE(validate(MorphologyGenome{}));
    // Four cells, two actuators, connected: below the 20% fill floor.
    CHECK_FALSE(validate(grid("00000\n00000\n00000\n00000\n33110\n")));
    CHECK(validate(grid("00000\n00000\n00000\n00000\n33111\n")));
    // One actuator only.
    CHECK_FALSE(validate(grid("00000\n00000\n00000\n00000\n31111\n")));
    // Mixed actuator kinds count together.
    CHECK(validate(grid("00000\n00000\n00000\n00000\n34222\n")));
    // Diagonal contact is not 4-connected.
    CHECK_FALSE(validate(grid("00000\n00000\n00000\n33000\n00333\n")));
}

TEST_CASE("validate rejects malformed grids") {
    std::vector<int> short_grid(24, 1);
    CHECK_THROWS_AS(validate(short_grid), RejectedInput);
    std::vector<int> bad_code(25, 5);
    CHECK_THROWS_AS(validate(bad_code), RejectedInput);
    CHECK_THROWS_AS(MorphologyGenome::from_text("0000\n00000\n00000\n00000\n00000\n"), RejectedInput);
    CHECK_THROWS_AS(MorphologyGenome::from_text("00000\n00000\n00000\n00000\n"), RejectedInput);
    CHECK_THROWS_AS(MorphologyGenome::from_text("00000\n00000\n00000\n00000\n0000x\n"), RejectedInput);
}

TEST_CASE("text serialization round-trips random genomes") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        MorphologyGenome g = mutate_raw(MorphologyGenome{}, rng, 0.5).genome;
        CHECK(MorphologyGenome::from_text(g.to_text()) == g);
        CHECK(g.to_text().size() == 30);
    }
}

TEST_CASE("raw mutation statistics match Bernoulli(0.1) per cell") {
    Rng rng(2024);
    const MorphologyGenome parent = grid("00000\n00000\n33333\n33333\n11111\n");
    constexpr int kDraws = 10000;
    std::array<int, kGridCells> per_cell{};
    long events = 0, changed = 0;
    for (int i = 0; i < kDraws; ++i) {
        RawMutation m = mutate_raw(parent, rng);
        events += static_cast<long>(m.events.count());
        changed += m.changed;
        for (int c = 0; c < kGridCells; ++c) per_cell[static_cast<std::size_t>(c)] += m.events.test(static_cast<std::size_t>(c));
        CHECK(m.changed == grid_distance(parent, m.genome));
    }
    double mean_events = static_cast<double>(events) / kDraws;
    CHECK(mean_events >= 2.3);
    CHECK(mean_events <= 2.7);
    // Identity resamples leave the cell unchanged: 25 * 0.1 * 0.8 = 2.0.
    CHECK(static_cast<double>(changed) / kDraws == doctest::Approx(2.0).epsilon(0.05));

    // Sum of 25 per-cell chi-square terms, df = 25; critical value at 0.001 is 52.62.
    const double expected = kDraws * kCellMutationRate;
    double chi2 = 0.0;
    for (int k : per_cell) chi2 += (k - expected) * (k - expected) / (expected * (1.0 - kCellMutationRate));
    CHECK(chi2 < 52.62);
}

TEST_CASE("mutate_morphology returns valid, changed, reproducible children") {
    const MorphologyGenome parent = grid("00000\n00000\n33333\n33333\n11111\n");
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Rng a(seed), b(seed);
        MorphologyGenome child = mutate_morphology(parent, a);
        CHECK(validate(child));
        CHECK_FALSE(child == parent);
        CHECK(mutate_morphology(parent, b) == child);
    }
}

TEST_CASE("random_morphology grows valid, diverse bodies") {
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        MorphologyGenome g = random_morphology(rng);
        CHECK(validate(g));
        seen.insert(g.to_text());
    }
    int distinct_pairs = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        Rng a(1000 + 2 * i), b(1001 + 2 * i);
        distinct_pairs += !(random_morphology(a) == random_morphology(b));
    }
    CHECK(distinct_pairs >= 95);
}

TEST_CASE("random_morphology gives up after the retry cap") {
    Rng rng(5);
    CHECK_THROWS_AS(random_morphology(rng, 1), MutationFailed);
}

TEST_CASE("sample_neighbor composes mutations") {
    const MorphologyGenome parent = grid("33333\n33333\n33333\n33033\n33033\n");
    Rng a(11), b(11);
    CHECK(sample_neighbor(parent, 1, a) == mutate_morphology(parent, b));
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        MorphologyGenome n = sample_neighbor(parent, 3, rng);
        CHECK(validate(n));
        CHECK(grid_distance(n, parent) >= 1);
    }
    Rng rng(1);
    CHECK_THROWS_AS(sample_neighbor(parent, 0, rng), RejectedInput);
}

TEST_CASE("grid_distance is a Hamming metric") {
    const MorphologyGenome a = grid("33333\n33333\n33333\n33033\n33033\n");
    MorphologyGenome b = a;
    CHECK(grid_distance(a, a) == 0);
    b.set(Cell{0, 0}, Material::Soft);
    CHECK(grid_distance(a, b) == 1);
    CHECK(grid_distance(b, a) == 1);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        MorphologyGenome x = mutate_raw(a, rng, 0.3).genome, y = mutate_raw(a, rng, 0.3).genome;
        CHECK(grid_distance(x, y) == grid_distance(y, x));
        CHECK(grid_distance(x, y) <= grid_distance(x, a) + grid_distance(a, y));
    }
}

TEST_CASE("shift_horizontal moves cells and rejects overflow") {
    const MorphologyGenome worm = grid("00000\n00000\n00000\n33300\n33300\n");
    MorphologyGenome moved = shift_horizontal(worm, 2);
    CHECK(moved == grid("00000\n00000\n00000\n00333\n00333\n"));
    CHECK(occupied_columns(moved) == std::pair{2, 4});
    CHECK_THROWS_AS(shift_horizontal(worm, 3), RejectedInput);
}
