#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "voxevo/config.hpp"
#include "voxevo/errors.hpp"

using namespace voxevo;

namespace {

const char* kMinimal = "[run]\nseed = 7\nparadigm = global\n\n[evolution]\ngenerations = 12\n";

int error_line(const std::string& text) {
    try {
        parse_run_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_CASE("ini syntax") {
    IniDocument doc = IniDocument::parse("# top\n[a]\nx = 1 ; tail\n\n[b]\ny=two words\n");
    REQUIRE(doc.has("a", "x"));
    CHECK(doc.find("a", "x")->value == "1");
    CHECK(doc.find("a", "x")->line == 3);
    CHECK(doc.find("b", "y")->value == "two words");
    CHECK(doc.section_line("b") == 5);
    CHECK(doc.find("a", "y") == nullptr);

    CHECK_THROWS_AS(IniDocument::parse("x = 1\n"), ConfigError);
    CHECK_THROWS_AS(IniDocument::parse("[a]\nnovalue\n"), ConfigError);
    CHECK_THROWS_AS(IniDocument::parse("[a\n"), ConfigError);
    CHECK_THROWS_AS(IniDocument::parse("[a]\nx=1\nx=2\n"), ConfigError);
    CHECK_THROWS_AS(IniDocument::parse("[a]\n[a]\n"), ConfigError);
}

TEST_CASE("minimal config takes defaults") {
    RunConfig cfg = parse_run_config(kMinimal);
    CHECK(cfg.seed == 7);
    CHECK(cfg.evolution.paradigm == ControllerKind::Global);
    CHECK(cfg.evolution.generations == 12);
    CHECK(cfg.evolution.mu == 16);
    CHECK(cfg.evolution.lambda == 16);
    CHECK(cfg.task.episode.max_steps == 500);
    CHECK(cfg.task.episode.shift_constant == 5.0);
    CHECK(cfg.task.physics.physics_dt == 1.0 / 600.0);
    CHECK(cfg.transfer.distances == std::vector<int>{1, 2, 3});
    CHECK(cfg.catalog.entries().size() == 4);
    CHECK(cfg.n_runs == 1);
}

TEST_CASE("default config text parses to the defaults") {
    RunConfig cfg = parse_run_config(default_config_text());
    CHECK(cfg.evolution.generations == 300);
    CHECK(cfg.task.physics.stiffness.rigid == 6000);
    CHECK(cfg.task.physics.contact.friction == 0.8);
    CHECK(cfg.task.physics.physics_dt == 1.0 / 600.0);
    CHECK(cfg.task.observation.neighborhood == 2);
    CHECK(cfg.transfer.sigma == 0.1);
}

TEST_CASE("errors point at lines") {
    CHECK(error_line("[run]\nparadigm = modular\n[evolution]\ngenerations = 3\n") > 0);
    CHECK(error_line(std::string(kMinimal) + "bogus = 1\n") == 7);
    CHECK(error_line(std::string(kMinimal) + "[nowhere]\n") == 7);
    CHECK(error_line("[run]\nseed = x\nparadigm = modular\n[evolution]\ngenerations = 3\n") == 2);
    CHECK(error_line(std::string(kMinimal) + "mu = 0\n") == 7);
    CHECK(error_line(std::string(kMinimal) + "p_body_mutation = 2\n") == 7);
    CHECK(error_line(std::string(kMinimal) + "[episode]\nshift_constant = 3\n") > 0);
    CHECK(error_line(std::string(kMinimal) + "mode = fixed-body\n") > 0);
    CHECK(error_line(std::string(kMinimal) + "mode = fixed-body\nbody = nope\n") == 8);

    RunConfig fixed = parse_run_config(std::string(kMinimal) + "mode = fixed-body\nbody = worm\n");
    CHECK(fixed.evolution.mode == TrainingMode::FixedBody);
    REQUIRE(fixed.evolution.bodies.size() == 1);
    CHECK(fixed.evolution.bodies[0] == fixed.catalog.at("worm"));
}

TEST_CASE("missing required keys") {
    try {
        parse_run_config("[run]\nparadigm = modular\n[evolution]\ngenerations = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("seed") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_run_config("[run]\nseed = 1\n[evolution]\ngenerations = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[run]\nseed = 1\nparadigm = modular\n"), ConfigError);
}

TEST_CASE("catalog path resolves against the config directory") {
    auto dir = std::filesystem::temp_directory_path() / "voxevo_cfg_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "bodies.txt") << "[slab]\n00000\n00000\n00000\n33333\n33333\n";
    std::ofstream(dir / "run.ini") << kMinimal << "catalog = bodies.txt\nmode = multi-body\n";
    RunConfig cfg = load_run_config(dir / "run.ini");
    REQUIRE(cfg.catalog.entries().size() == 1);
    CHECK(cfg.evolution.bodies.size() == 1);
    CHECK_THROWS_AS(load_run_config(dir / "absent.ini"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("snapshot generations") {
    RunConfig cfg = parse_run_config(std::string(kMinimal) + "snapshot_fractions = 0.5, 1.0\n");
    CHECK(cfg.snapshot_generations() == std::vector<int>{6, 12});
}

TEST_CASE("shipped configs parse") {
    int seen = 0;
    for (const auto& e : std::filesystem::directory_iterator(VOXEVO_CONFIG_DIR)) {
        if (e.path().extension() != ".ini") continue;
        INFO(e.path().string());
        CHECK_NOTHROW(load_run_config(e.path()));
        ++seen;
    }
    CHECK(seen >= 4);
    RunConfig multi = load_run_config(std::filesystem::path(VOXEVO_CONFIG_DIR) / "multi_body.ini");
    CHECK(multi.evolution.bodies.size() == 4);
    CHECK(multi.catalog.at("biped") == MorphologyCatalog::defaults().at("biped"));
}
