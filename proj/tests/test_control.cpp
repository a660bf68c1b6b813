#include <doctest.h>

#include <cmath>

#include "voxevo/control.hpp"
#include "voxevo/errors.hpp"

using namespace voxevo;

namespace {

// Plain triple loop, written independently of mlp_forward.
std::vector<double> oracle_forward(const MlpParams& p, const std::vector<double>& x) {
    const MlpShape s = p.shape();
    auto v = p.values();
    std::size_t off = 0;
    std::vector<double> hidden(static_cast<std::size_t>(s.hidden));
    std::size_t b1 = static_cast<std::size_t>(s.inputs * s.hidden);
    for (int j = 0; j < s.hidden; ++j) {
        long double acc = v[b1 + static_cast<std::size_t>(j)];
        for (int i = 0; i < s.inputs; ++i) acc += static_cast<long double>(v[off + static_cast<std::size_t>(j * s.inputs + i)]) * x[static_cast<std::size_t>(i)];
        hidden[static_cast<std::size_t>(j)] = acc > 0 ? static_cast<double>(acc) : 0.0;
    }
    std::size_t w2 = b1 + static_cast<std::size_t>(s.hidden);
    std::size_t b2 = w2 + static_cast<std::size_t>(s.hidden * s.outputs);
    std::vector<double> out(static_cast<std::size_t>(s.outputs));
    for (int k = 0; k < s.outputs; ++k) {
        long double acc = v[b2 + static_cast<std::size_t>(k)];
        for (int j = 0; j < s.hidden; ++j) acc += static_cast<long double>(v[w2 + static_cast<std::size_t>(k * s.hidden + j)]) * hidden[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(k)] = static_cast<double>(1.0L / (1.0L + std::exp(-acc)));
    }
    return out;
}

MorphologyGenome grid(const char* text) { return MorphologyGenome::from_text(text); }

}  // namespace

TEST_CASE("parameter counts") {
    Rng rng(1);
    CHECK(init_controller(ControllerKind::Global, rng).params.size() == 7289);
    CHECK(init_controller(ControllerKind::Modular, rng).params.size() == 6497);
    CHECK(controller_shape(ControllerKind::Global) == MlpShape{201, 32, 25});
    CHECK(controller_shape(ControllerKind::Modular) == MlpShape{201, 32, 1});
    ObservationConfig d1;
    d1.neighborhood = 1;
    CHECK(controller_shape(ControllerKind::Modular, d1).inputs == 73);
}

TEST_CASE("kind names round trip") {
    CHECK(parse_controller_kind("global") == ControllerKind::Global);
    CHECK(parse_controller_kind(to_string(ControllerKind::Modular)) == ControllerKind::Modular);
    CHECK_THROWS_AS(parse_controller_kind("cnn"), RejectedInput);
}

TEST_CASE("mlp_forward") {
    MlpParams zero(kGlobalShape);
    std::vector<double> x(201, 3.0);
    for (double y : mlp_forward(zero, x)) CHECK(y == 0.5);

    Rng rng(5);
    for (ControllerKind kind : {ControllerKind::Global, ControllerKind::Modular}) {
        ControllerGenome c = init_controller(kind, rng);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> in(201);
            for (double& v : in) v = std::normal_distribution<double>(0, 3)(rng);
            auto got = mlp_forward(c.params, in);
            auto want = oracle_forward(c.params, in);
            REQUIRE(got.size() == want.size());
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK(std::abs(got[k] - want[k]) < 1e-12);
                CHECK(got[k] > 0.0);
                CHECK(got[k] < 1.0);
            }
        }
    }
    std::vector<double> short_in(200);
    CHECK_THROWS_AS(mlp_forward(zero, short_in), RejectedInput);
    CHECK_THROWS_AS(MlpParams(kGlobalShape, std::vector<double>(10)), RejectedInput);
}

TEST_CASE("global controller only actuates actuator cells") {
    Rng rng(2);
    ControllerGenome c = init_controller(ControllerKind::Global, rng);
    MorphologyGenome g = grid("00000\n00000\n00300\n01410\n03030\n");
    SimWorld w = build_world(g, {});
    ActionAssignment a = act_global(c, w, 0);
    std::vector<int> cells;
    for (const auto& v : a) cells.push_back(v.cell);
    CHECK(cells == g.actuator_cells());

    auto out = mlp_forward(c.params, observe_global(w, 0));
    for (const auto& v : a) CHECK(v.value == out[static_cast<std::size_t>(v.cell)]);
    CHECK(act(c, w, 0) == a);
}

TEST_CASE("modular controller applies the shared network per actuator") {
    Rng rng(3);
    ControllerGenome c = init_controller(ControllerKind::Modular, rng);
    MorphologyGenome g = grid("00000\n00000\n00300\n01410\n03030\n");
    SimWorld w = build_world(g, {});
    ActionAssignment a = act_modular(c, w, 7);
    REQUIRE(a.size() == g.actuator_cells().size());
    for (const auto& v : a) {
        auto out = mlp_forward(c.params, observe_local(w, Cell::from_raster(v.cell), 7));
        CHECK(v.value == out[0]);
    }
    CHECK(act(c, w, 7) == a);
}

TEST_CASE("modular actions are shift equivariant") {
    Rng rng(4);
    ControllerGenome c = init_controller(ControllerKind::Modular, rng);
    MorphologyGenome g = grid("00000\n00000\n03300\n04100\n03300\n");
    SimWorld a = build_world(g, {});
    SimWorld b = build_world(shift_horizontal(g, 2), {});
    ActionAssignment x = act_modular(c, a, 0), y = act_modular(c, b, 0);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(y[i].cell == x[i].cell + 2);
        CHECK(y[i].value == x[i].value);
    }
}

TEST_CASE("kind mismatch is rejected") {
    Rng rng(4);
    ControllerGenome c = init_controller(ControllerKind::Modular, rng);
    SimWorld w = build_world(grid("00000\n00000\n00300\n01410\n03030\n"), {});
    CHECK_THROWS_AS(act_global(c, w, 0), RejectedInput);
}

TEST_CASE("init bounds per layer") {
    Rng rng(6);
    ControllerGenome c = init_controller(ControllerKind::Global, rng);
    const double l1 = 1.0 / std::sqrt(201.0), l2 = 1.0 / std::sqrt(32.0);
    double max1 = 0, max2 = 0, mean1 = 0;
    for (double v : c.params.w1()) {
        max1 = std::max(max1, std::abs(v));
        mean1 += v;
    }
    for (double v : c.params.b1()) max1 = std::max(max1, std::abs(v));
    for (double v : c.params.w2()) max2 = std::max(max2, std::abs(v));
    for (double v : c.params.b2()) max2 = std::max(max2, std::abs(v));
    mean1 /= static_cast<double>(c.params.w1().size());
    CHECK(max1 <= l1);
    CHECK(max1 > 0.95 * l1);
    CHECK(max2 <= l2);
    CHECK(max2 > 0.9 * l2);
    CHECK(std::abs(mean1) < 0.01);
    // Same seed, same controller.
    Rng r1(6);
    CHECK(init_controller(ControllerKind::Global, r1) == c);
}

TEST_CASE("mutation noise statistics") {
    Rng rng(7);
    ControllerGenome parent = init_controller(ControllerKind::Modular, rng);
    // Pool deltas of the first parameter over 10,000 independent mutations.
    double sum = 0, sq = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        ControllerGenome child = mutate_controller(parent, rng, 0.1);
        double d = child.params.values()[0] - parent.params.values()[0];
        sum += d;
        sq += d * d;
    }
    double mean = sum / n;
    double sd = std::sqrt(sq / n - mean * mean);
    CHECK(sd >= 0.098);
    CHECK(sd <= 0.102);

    ControllerGenome child = mutate_controller(parent, rng, 0.1);
    CHECK(child.kind == parent.kind);
    CHECK(child.params.shape() == parent.params.shape());
    int changed = 0;
    for (std::size_t i = 0; i < child.params.size(); ++i) changed += child.params.values()[i] != parent.params.values()[i];
    CHECK(changed == static_cast<int>(child.params.size()));
    CHECK(mutate_controller(parent, rng, 0.0) == parent);
}
