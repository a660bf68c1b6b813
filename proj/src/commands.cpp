#include "voxevo/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "voxevo/checkpoint.hpp"
#include "voxevo/config.hpp"
#include "voxevo/errors.hpp"
#include "voxevo/experiments.hpp"
#include "voxevo/parallel.hpp"
#include "voxevo/run_io.hpp"

namespace voxevo {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int resolve_worker_count(const CommandOptions& opts, int from_config) {
    if (opts.workers && *opts.workers > 0) return *opts.workers;
    if (const char* env = std::getenv("VOXEVO_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return resolve_workers(from_config);
}

std::string run_dir_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run_%03d", index);
    return buf;
}

std::string generation_file(const char* prefix, int gen) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%06d.ckpt", prefix, gen);
    return buf;
}

/// Loads the config and applies command-line overrides. Errors are reported
/// before anything touches the filesystem.
RunConfig load_with_overrides(const CommandOptions& opts) {
    RunConfig cfg = load_run_config(opts.config);
    if (opts.seed) {
        cfg.seed = *opts.seed;
        cfg.evolution.master_seed = *opts.seed;
    }
    if (opts.out) cfg.out_dir = opts.out->string();
    cfg.evolution.workers = resolve_worker_count(opts, cfg.evolution.workers);
    cfg.transfer.workers = cfg.evolution.workers;
    return cfg;
}

RunArtifacts evolve_into(const fs::path& dir, const RunConfig& cfg, const EvolutionConfig& evo) {
    fs::create_directories(dir / "checkpoints");
    std::ofstream csv(dir / "generations.csv", std::ios::binary);
    csv << kGenerationCsvHeader << '\n';
    if (!csv) throw std::runtime_error("cannot write " + (dir / "generations.csv").string());

    auto observer = [&](const GenerationLog& log, const Evolver& evolver) {
        csv << generation_csv_row(log) << '\n';
        csv.flush();
        if (!csv) throw std::runtime_error("failed writing generations.csv");
        bool last = log.generation == evo.generations;
        if (last || (cfg.checkpoint_every > 0 && log.generation % cfg.checkpoint_every == 0))
            write_checkpoint(dir / "checkpoints" / generation_file("gen", log.generation), log.generation,
                             evolver.population());
    };
    RunArtifacts run = run_evolution(evo, cfg.task, observer);

    write_checkpoint(dir / "champion.ckpt", evo.generations, std::span<const Individual>(&run.champion, 1));
    if (evo.generations == 0) write_checkpoint(dir / "checkpoints" / generation_file("gen", 0), 0, run.final_population);
    if (!run.snapshots.empty()) fs::create_directories(dir / "snapshots");
    for (const Snapshot& s : run.snapshots)
        write_checkpoint(dir / "snapshots" / generation_file("best", s.generation), s.generation,
                         std::span<const Individual>(&s.best, 1));

    std::string lineage = std::string(kLineageCsvHeader) + "\n";
    for (const auto& e : run.lineage) lineage += lineage_csv_row(e) + "\n";
    write_text(dir / "lineage.csv", lineage);

    nlohmann::ordered_json meta = {
        {"seed", evo.master_seed},
        {"paradigm", to_string(evo.paradigm)},
        {"mode", to_string(evo.mode)},
        {"generations", evo.generations},
        {"mu", evo.mu},
        {"lambda", evo.lambda},
        {"initial_best_fitness", run.initial_best_fitness},
        {"champion_id", run.champion.id},
        {"champion_fitness", *run.champion.fitness},
    };
    write_text(dir / "run.json", meta.dump(2) + "\n");
    return run;
}

}  // namespace

int cmd_evolve(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_with_overrides(opts);
    } catch (const ConfigError& e) {
        err << "config error: " << opts.config.string() << ": " << e.what() << '\n';
        return kExitUsage;
    }
    if (cfg.out_dir.empty()) {
        err << "config error: no output directory ([run] out or --out)\n";
        return kExitUsage;
    }

    std::optional<StagedDirectory> staged;
    try {
        staged.emplace(cfg.out_dir);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    try {
        write_text(staged->path() / "config.ini", read_text(opts.config));
        write_text(staged->path() / "catalog.txt", cfg.catalog.to_text());
        for (int i = 0; i < cfg.n_runs; ++i) {
            EvolutionConfig evo = cfg.evolution;
            evo.master_seed = cfg.seed + static_cast<std::uint64_t>(i);
            fs::path dir = cfg.n_runs == 1 ? staged->path() : staged->path() / run_dir_name(i);
            RunArtifacts run = evolve_into(dir, cfg, evo);
            out << (cfg.n_runs == 1 ? std::string("run") : run_dir_name(i)) << " seed " << evo.master_seed
                << " champion fitness " << format_double(*run.champion.fitness) << '\n';
        }
        staged->commit();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\npartial output preserved in " << staged->path().string() << '\n';
        return kExitFailure;
    }
    out << "wrote " << staged->target().string() << '\n';
    return kExitOk;
}

int cmd_transfer(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_with_overrides(opts);
    } catch (const ConfigError& e) {
        err << "config error: " << opts.config.string() << ": " << e.what() << '\n';
        return kExitUsage;
    }
    if (cfg.out_dir.empty()) {
        err << "config error: no output directory ([run] out or --out)\n";
        return kExitUsage;
    }
    Individual champion;
    try {
        champion = read_champion(opts.champion);
        if (champion.controller.params.shape() !=
            controller_shape(champion.controller.kind, cfg.task.observation))
            throw IntegrityError("champion controller shape does not match the observation config");
    } catch (const std::exception& e) {
        err << "integrity error: " << e.what() << '\n';
        return kExitFailure;
    }

    std::optional<StagedDirectory> staged;
    try {
        staged.emplace(cfg.out_dir);
        TransferReport report = transfer_analysis(champion, cfg.transfer, cfg.seed, walker_fitness(cfg.task));

        std::string csv = std::string(kTransferCsvHeader) + "\n";
        for (const auto& s : report.samples) csv += transfer_csv_row(s) + "\n";
        write_text(staged->path() / "transfer.csv", csv);

        std::ostringstream summary;
        summary << "source " << champion.id << " (" << to_string(champion.controller.kind) << ") fitness "
                << (report.samples.empty() ? std::string("n/a") : format_double(report.samples.front().source_fitness))
                << '\n';
        for (int d : cfg.transfer.distances) {
            auto z = mean_relative_change(report.samples, d, false);
            auto o = mean_relative_change(report.samples, d, true);
            summary << "distance " << d << ": zero-shot mean relative change "
                    << (z ? format_double(*z) : std::string("n/a")) << ", one-shot "
                    << (o ? format_double(*o) : std::string("n/a")) << '\n';
        }
        summary << "skipped " << report.skipped.size() << '\n';
        for (const auto& s : report.skipped) summary << "  " << s << '\n';
        write_text(staged->path() / "transfer_summary.txt", summary.str());
        staged->commit();
        out << summary.str();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_replay(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    TaskConfig task;
    if (!opts.config.empty()) {
        try {
            task = load_with_overrides(opts).task;
        } catch (const ConfigError& e) {
            err << "config error: " << opts.config.string() << ": " << e.what() << '\n';
            return kExitUsage;
        }
    }
    if (!opts.out) {
        err << "usage error: replay needs --out\n";
        return kExitUsage;
    }
    try {
        Individual champion = read_champion(opts.champion);
        EpisodeResult result = run_episode(champion.morphology, champion.controller, task, true);
        SimWorld initial = build_world(champion.morphology, task.physics);

        fs::path target = *opts.out;
        if (fs::exists(target)) throw std::runtime_error("output path already exists: " + target.string());
        fs::path partial = target.string() + ".partial";
        {
            std::ofstream file(partial, std::ios::binary | std::ios::trunc);
            write_trajectory(file, result, initial);
            if (!file.flush()) throw std::runtime_error("failed writing " + partial.string());
        }
        fs::rename(partial, target);
        out << "frames " << result.trajectory.size() << " fitness " << format_double(result.fitness)
            << " checkpoint fitness " << format_double(*champion.fitness)
            << (result.diverged ? " (diverged)" : "") << '\n';
    } catch (const IntegrityError& e) {
        err << "integrity error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

namespace {

struct RunSummary {
    std::string name;
    std::uint64_t seed = 0;
    std::string paradigm;
    double champion_fitness = 0.0;
    ConvergenceMetrics convergence;
    MutationAccounting accounting;
};

RunSummary summarize_run(const fs::path& dir, const std::string& name) {
    std::vector<std::string> missing;
    for (const char* f : {"run.json", "generations.csv", "lineage.csv", "champion.ckpt"})
        if (!fs::exists(dir / f)) missing.push_back((dir / f).string());
    if (!missing.empty()) {
        std::string msg = "incomplete run logs; missing:";
        for (const auto& m : missing) msg += " " + m;
        throw IntegrityError(msg);
    }

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_text(dir / "run.json"));
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError((dir / "run.json").string() + ": " + e.what());
    }
    auto rows = parse_generation_csv(read_text(dir / "generations.csv"));
    auto lineage = parse_lineage_csv(read_text(dir / "lineage.csv"));

    RunSummary s;
    s.name = name;
    try {
        s.seed = meta.at("seed").get<std::uint64_t>();
        s.paradigm = meta.at("paradigm").get<std::string>();
        s.champion_fitness = meta.at("champion_fitness").get<double>();
        const int generations = meta.at("generations").get<int>();
        if (static_cast<int>(rows.size()) != generations)
            throw IntegrityError((dir / "generations.csv").string() + " has " + std::to_string(rows.size()) +
                                 " rows, expected " + std::to_string(generations));
        std::vector<double> series{meta.at("initial_best_fitness").get<double>()};
        for (const auto& r : rows) series.push_back(r.best_fitness);
        s.convergence = convergence_metrics(series);
        s.accounting = mutation_accounting(lineage, meta.at("champion_id").get<IndividualId>());
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError((dir / "run.json").string() + ": " + e.what());
    }

    int body = 0, brain = 0;
    for (const auto& r : rows) {
        body += r.n_body_success;
        brain += r.n_brain_success;
    }
    if (body != s.accounting.population_body_successes || brain != s.accounting.population_brain_successes)
        throw IntegrityError(dir.string() + ": generation log and lineage disagree on success counts");
    return s;
}

std::string optional_text(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

int cmd_report(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    const fs::path& run_dir = opts.run_dir;
    std::vector<RunSummary> runs;
    try {
        if (!fs::is_directory(run_dir)) throw IntegrityError("not a run directory: " + run_dir.string());
        if (fs::exists(run_dir / "run.json")) {
            runs.push_back(summarize_run(run_dir, "run"));
        } else {
            std::vector<fs::path> subdirs;
            for (const auto& e : fs::directory_iterator(run_dir))
                if (e.is_directory() && e.path().filename().string().rfind("run_", 0) == 0) subdirs.push_back(e.path());
            std::sort(subdirs.begin(), subdirs.end());
            if (subdirs.empty())
                throw IntegrityError("incomplete run logs; missing: " + (run_dir / "run.json").string());
            for (const auto& d : subdirs) runs.push_back(summarize_run(d, d.filename().string()));
        }
    } catch (const std::exception& e) {
        err << "integrity error: " << e.what() << '\n';
        return kExitFailure;
    }

    std::string csv =
        "run,seed,paradigm,champion_fitness,gen_80,gen_90,gen_95,gen_99,lineage_body_fraction,"
        "population_body_fraction\n";
    std::map<std::string, std::vector<const RunSummary*>> by_paradigm;
    for (const auto& r : runs) {
        csv += r.name + "," + std::to_string(r.seed) + "," + r.paradigm + "," + format_double(r.champion_fitness);
        for (int g : r.convergence.generation) csv += "," + std::to_string(g);
        csv += "," + optional_text(r.accounting.lineage_body_fraction) + "," +
               optional_text(r.accounting.population_body_fraction) + "\n";
        by_paradigm[r.paradigm].push_back(&r);
    }

    std::ostringstream text;
    for (const auto& [paradigm, members] : by_paradigm) {
        std::vector<double> fitness, lineage_frac, pop_frac;
        std::array<std::vector<double>, 4> conv;
        for (const RunSummary* r : members) {
            fitness.push_back(r->champion_fitness);
            for (std::size_t k = 0; k < 4; ++k) conv[k].push_back(r->convergence.generation[k]);
            if (r->accounting.lineage_body_fraction) lineage_frac.push_back(*r->accounting.lineage_body_fraction);
            if (r->accounting.population_body_fraction) pop_frac.push_back(*r->accounting.population_body_fraction);
        }
        auto median_text = [](const std::vector<double>& v) {
            return v.empty() ? std::string() : format_double(spread(v).median);
        };
        csv += "median," + std::string() + "," + paradigm + "," + median_text(fitness);
        for (const auto& c : conv) csv += "," + median_text(c);
        csv += "," + median_text(lineage_frac) + "," + median_text(pop_frac) + "\n";

        auto line = [&](const char* label, const std::vector<double>& v) {
            if (v.empty()) {
                text << "  " << label << ": n/a\n";
                return;
            }
            Spread s = spread(v);
            text << "  " << label << ": median " << format_double(s.median) << " IQR [" << format_double(s.q1)
                 << ", " << format_double(s.q3) << "] (n=" << s.n << ")\n";
        };
        text << paradigm << " (" << members.size() << " runs)\n";
        line("champion fitness", fitness);
        const char* labels[4] = {"generations to 80%", "generations to 90%", "generations to 95%",
                                 "generations to 99%"};
        for (std::size_t k = 0; k < 4; ++k) line(labels[k], conv[k]);
        line("lineage body-success fraction", lineage_frac);
        line("population body-success fraction", pop_frac);
    }

    fs::path target = opts.out ? *opts.out : fs::path(run_dir.string() + "-report");
    try {
        StagedDirectory staged(target);
        write_text(staged.path() / "report.csv", csv);
        write_text(staged.path() / "report.txt", text.str());
        staged.commit();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    out << text.str() << "wrote " << target.string() << '\n';
    return kExitOk;
}

}  // namespace voxevo
