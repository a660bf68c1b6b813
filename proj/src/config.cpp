#include "voxevo/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "voxevo/errors.hpp"

namespace voxevo {

namespace {

std::string trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double to_double(const IniDocument::Entry& e, const std::string& key) {
    double v = 0.0;
    const char* end = e.value.data() + e.value.size();
    auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v))
        throw ConfigError(e.line, key + ": expected a finite number, got '" + e.value + "'");
    return v;
}

long long to_integer(const IniDocument::Entry& e, const std::string& key) {
    long long v = 0;
    const char* end = e.value.data() + e.value.size();
    auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw ConfigError(e.line, key + ": expected an integer, got '" + e.value + "'");
    return v;
}

int to_int(const IniDocument::Entry& e, const std::string& key) {
    long long v = to_integer(e, key);
    if (v < -(1LL << 31) || v >= (1LL << 31)) throw ConfigError(e.line, key + ": integer out of range");
    return static_cast<int>(v);
}

std::uint64_t to_u64(const IniDocument::Entry& e, const std::string& key) {
    std::uint64_t v = 0;
    const char* end = e.value.data() + e.value.size();
    auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError(e.line, key + ": expected a non-negative integer, got '" + e.value + "'");
    return v;
}

bool to_bool(const IniDocument::Entry& e, const std::string& key) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw ConfigError(e.line, key + ": expected true or false, got '" + e.value + "'");
}

template <typename T, typename Convert>
std::vector<T> to_list(const IniDocument::Entry& e, const std::string& key, Convert convert) {
    std::vector<T> out;
    std::istringstream in(e.value);
    std::string item;
    while (std::getline(in, item, ',')) {
        IniDocument::Entry part{trim(item), e.line};
        if (part.value.empty()) throw ConfigError(e.line, key + ": empty list element");
        out.push_back(convert(part, key));
    }
    if (out.empty()) throw ConfigError(e.line, key + ": expected a comma-separated list");
    return out;
}

using Setter = std::function<void(RunConfig&, const IniDocument::Entry&)>;

struct KeySpec {
    Setter set;
    bool required = false;
};

using Schema = std::map<std::string, std::map<std::string, KeySpec>>;

#define VOXEVO_NUM(field) [](RunConfig& c, const IniDocument::Entry& e) { c.field = to_double(e, #field); }
#define VOXEVO_INT(field) [](RunConfig& c, const IniDocument::Entry& e) { c.field = to_int(e, #field); }

const Schema& schema() {
    static const Schema s = {
        {"run",
         {
             {"seed", {[](RunConfig& c, const auto& e) { c.seed = to_u64(e, "seed"); }, true}},
             {"paradigm",
              {[](RunConfig& c, const auto& e) {
                   try {
                       c.evolution.paradigm = parse_controller_kind(e.value);
                   } catch (const RejectedInput& err) {
                       throw ConfigError(e.line, err.what());
                   }
               },
               true}},
             {"out", {[](RunConfig& c, const auto& e) { c.out_dir = e.value; }}},
             {"n_runs", {VOXEVO_INT(n_runs)}},
             {"workers", {VOXEVO_INT(evolution.workers)}},
             {"checkpoint_every", {VOXEVO_INT(checkpoint_every)}},
         }},
        {"evolution",
         {
             {"mu", {VOXEVO_INT(evolution.mu)}},
             {"lambda", {VOXEVO_INT(evolution.lambda)}},
             {"generations", {VOXEVO_INT(evolution.generations), true}},
             {"p_body_mutation", {VOXEVO_NUM(evolution.p_body_mutation)}},
             {"controller_sigma", {VOXEVO_NUM(evolution.controller_sigma)}},
             {"retry_cap", {VOXEVO_INT(evolution.retry_cap)}},
             {"mode",
              {[](RunConfig& c, const auto& e) {
                  try {
                      c.evolution.mode = parse_training_mode(e.value);
                  } catch (const RejectedInput& err) {
                      throw ConfigError(e.line, err.what());
                  }
              }}},
             {"body", {[](RunConfig& c, const auto& e) { c.fixed_body = e.value; }}},
             {"catalog", {[](RunConfig&, const auto&) {}}},  // resolved after parsing
             {"snapshot_fractions",
              {[](RunConfig& c, const auto& e) {
                  c.snapshot_fractions = to_list<double>(e, "snapshot_fractions", to_double);
                  for (double f : c.snapshot_fractions)
                      if (f < 0.0 || f > 1.0) throw ConfigError(e.line, "snapshot_fractions must lie in [0, 1]");
              }}},
         }},
        {"physics",
         {
             {"rigid_stiffness", {VOXEVO_NUM(task.physics.stiffness.rigid)}},
             {"soft_stiffness", {VOXEVO_NUM(task.physics.stiffness.soft)}},
             {"actuator_stiffness", {VOXEVO_NUM(task.physics.stiffness.actuator)}},
             {"damping_ratio", {VOXEVO_NUM(task.physics.damping_ratio)}},
             {"gravity", {VOXEVO_NUM(task.physics.gravity)}},
             {"ground_height", {VOXEVO_NUM(task.physics.ground_height)}},
             {"contact", {[](RunConfig& c, const auto& e) { c.task.physics.contact.enabled = to_bool(e, "contact"); }}},
             {"contact_stiffness", {VOXEVO_NUM(task.physics.contact.normal_stiffness)}},
             {"contact_damping", {VOXEVO_NUM(task.physics.contact.normal_damping)}},
             {"friction", {VOXEVO_NUM(task.physics.contact.friction)}},
             {"dt", {VOXEVO_NUM(task.physics.physics_dt)}},
             {"substeps", {VOXEVO_INT(task.physics.substeps_per_env_step)}},
             {"scale_min", {VOXEVO_NUM(task.physics.scale_min)}},
             {"scale_max", {VOXEVO_NUM(task.physics.scale_max)}},
         }},
        {"observation",
         {
             {"neighborhood", {VOXEVO_INT(task.observation.neighborhood)}},
             {"velocity_clamp", {VOXEVO_NUM(task.observation.velocity_clamp)}},
             {"normalize_volume",
              {[](RunConfig& c, const auto& e) {
                  c.task.observation.normalize_volume = to_bool(e, "normalize_volume");
              }}},
         }},
        {"episode",
         {
             {"max_steps", {VOXEVO_INT(task.episode.max_steps)}},
             {"action_repeat", {VOXEVO_INT(task.episode.action_repeat)}},
             {"terrain_end_x", {VOXEVO_NUM(task.episode.terrain_end_x)}},
             {"step_penalty", {VOXEVO_NUM(task.episode.step_penalty)}},
             {"shift_constant", {VOXEVO_NUM(task.episode.shift_constant)}},
             {"divergence_floor", {VOXEVO_NUM(task.episode.divergence_floor)}},
         }},
        {"transfer",
         {
             {"distances",
              {[](RunConfig& c, const auto& e) { c.transfer.distances = to_list<int>(e, "distances", to_int); }}},
             {"samples_per_distance", {VOXEVO_INT(transfer.samples_per_distance)}},
             {"one_shot_lambda", {VOXEVO_INT(transfer.one_shot_lambda)}},
             {"sigma", {VOXEVO_NUM(transfer.sigma)}},
         }},
    };
    return s;
}

#undef VOXEVO_NUM
#undef VOXEVO_INT

template <typename Fn>
void at_line(int line, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        if (e.line() > 0 || line <= 0) throw;
        throw ConfigError(line, e.what());
    }
}

}  // namespace

IniDocument IniDocument::parse(std::string_view text) {
    IniDocument doc;
    std::istringstream in{std::string(text)};
    std::string raw, section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (auto pos = line.find_first_of("#;"); pos != std::string::npos) line.erase(pos);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(line_no, "empty section name");
            if (doc.section_lines_.count(section)) throw ConfigError(line_no, "duplicate section [" + section + "]");
            doc.section_lines_[section] = line_no;
            doc.sections_[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
        if (section.empty()) throw ConfigError(line_no, "key outside of any [section]");
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError(line_no, "empty key");
        auto& keys = doc.sections_[section];
        if (keys.count(key)) throw ConfigError(line_no, "duplicate key '" + key + "' in [" + section + "]");
        keys[key] = Entry{value, line_no};
    }
    return doc;
}

bool IniDocument::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

const IniDocument::Entry* IniDocument::find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

int IniDocument::section_line(const std::string& section) const {
    auto it = section_lines_.find(section);
    return it == section_lines_.end() ? 0 : it->second;
}

std::vector<int> RunConfig::snapshot_generations() const {
    std::vector<int> gens;
    for (double f : snapshot_fractions)
        gens.push_back(static_cast<int>(std::lround(f * evolution.generations)));
    std::sort(gens.begin(), gens.end());
    gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
    return gens;
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
    IniDocument doc = IniDocument::parse(text);
    const Schema& spec = schema();
    RunConfig cfg;
    bool shift_given = false;

    for (const auto& [section, keys] : doc.sections()) {
        auto s = spec.find(section);
        if (s == spec.end()) throw ConfigError(doc.section_line(section), "unknown section [" + section + "]");
        for (const auto& [key, entry] : keys) {
            auto k = s->second.find(key);
            if (k == s->second.end())
                throw ConfigError(entry.line, "unknown key '" + key + "' in [" + section + "]");
            k->second.set(cfg, entry);
            if (section == "episode" && key == "shift_constant") shift_given = true;
        }
    }
    for (const auto& [section, keys] : spec)
        for (const auto& [key, ks] : keys)
            if (ks.required && !doc.has(section, key))
                throw ConfigError(doc.section_line(section), "missing required key '" + key + "' in [" + section + "]");

    if (!shift_given) cfg.task.episode.shift_constant = cfg.task.episode.max_steps * cfg.task.episode.step_penalty;

    if (const auto* e = doc.find("evolution", "catalog")) {
        std::filesystem::path p = e->value;
        if (p.is_relative()) p = base_dir / p;
        std::ifstream in(p);
        if (!in) throw ConfigError(e->line, "cannot read catalog file '" + p.string() + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            cfg.catalog = MorphologyCatalog::parse(buf.str());
        } catch (const ConfigError& err) {
            throw ConfigError(e->line, "catalog '" + p.string() + "': " + err.what());
        }
    }

    auto line_of = [&](const char* section, const char* key) {
        const auto* e = doc.find(section, key);
        return e ? e->line : doc.section_line(section);
    };

    switch (cfg.evolution.mode) {
        case TrainingMode::FixedBody:
            if (cfg.fixed_body.empty())
                throw ConfigError(line_of("evolution", "mode"), "fixed-body mode needs [evolution] body");
            at_line(line_of("evolution", "body"), [&] {
                try {
                    cfg.evolution.bodies = {cfg.catalog.at(cfg.fixed_body)};
                } catch (const RejectedInput& err) {
                    throw ConfigError(0, err.what());
                }
            });
            break;
        case TrainingMode::MultiBody: cfg.evolution.bodies = cfg.catalog.genomes(); break;
        case TrainingMode::CoOptimize:
            if (!cfg.fixed_body.empty())
                throw ConfigError(line_of("evolution", "body"), "body is only valid in fixed-body mode");
            break;
    }

    cfg.evolution.master_seed = cfg.seed;
    cfg.evolution.snapshot_generations = cfg.snapshot_generations();
    cfg.transfer.sigma = doc.has("transfer", "sigma") ? cfg.transfer.sigma : cfg.evolution.controller_sigma;

    // Validators say "section: key ..."; point at that key when the file sets it.
    auto validated = [&](const char* section, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            if (e.line() > 0) throw;
            std::string_view msg = e.what();
            std::string prefix = std::string(section) + ": ";
            int line = doc.section_line(section);
            if (msg.starts_with(prefix)) {
                std::string_view rest = msg.substr(prefix.size());
                std::string key(rest.substr(0, rest.find(' ')));
                if (const auto* entry = doc.find(section, key)) line = entry->line;
            }
            if (line <= 0) throw;
            throw ConfigError(line, std::string(msg));
        }
    };
    validated("physics", [&] { cfg.task.physics.validate(); });
    validated("observation", [&] { cfg.task.observation.validate(); });
    validated("episode", [&] { cfg.task.episode.validate(); });
    validated("evolution", [&] { cfg.evolution.validate(); });
    if (cfg.n_runs < 1) throw ConfigError(line_of("run", "n_runs"), "n_runs must be >= 1");
    if (cfg.evolution.workers < 0) throw ConfigError(line_of("run", "workers"), "workers must be >= 0");
    if (cfg.checkpoint_every < 0) throw ConfigError(line_of("run", "checkpoint_every"), "checkpoint_every must be >= 0");
    if (cfg.transfer.samples_per_distance < 1)
        throw ConfigError(line_of("transfer", "samples_per_distance"), "samples_per_distance must be >= 1");
    if (cfg.transfer.one_shot_lambda < 0)
        throw ConfigError(line_of("transfer", "one_shot_lambda"), "one_shot_lambda must be >= 0");
    for (int d : cfg.transfer.distances)
        if (d < 1) throw ConfigError(line_of("transfer", "distances"), "distances must be >= 1");
    if (!(cfg.transfer.sigma >= 0.0)) throw ConfigError(line_of("transfer", "sigma"), "sigma must be >= 0");
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot read config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.parent_path());
}

std::string default_config_text() {
    return R"(# voxevo run configuration
[run]
seed = 1                  # master seed; all randomness derives from it
paradigm = modular        # modular | global
out = runs/example
n_runs = 1                # > 1 runs a battery with seeds seed, seed+1, ...
workers = 0               # parallel episode evaluations; 0 = all cores
checkpoint_every = 50     # generations between population checkpoints; 0 = final only

[evolution]
mu = 16
lambda = 16
generations = 300
p_body_mutation = 0.5
controller_sigma = 0.1
retry_cap = 1000
mode = co-optimize        # co-optimize | fixed-body | multi-body
# body = biped            # catalog name, fixed-body mode only
# catalog = catalog.txt   # [name] + 5 rows of 5 digits per body
snapshot_fractions = 0.25, 0.5, 0.75, 1.0

[physics]
rigid_stiffness = 6000
soft_stiffness = 600
actuator_stiffness = 600
damping_ratio = 0.1
gravity = 9.81
ground_height = 0
contact = true
contact_stiffness = 10000
contact_damping = 10
friction = 0.8
dt = 0.0016666666666666668
substeps = 6
scale_min = 0.6
scale_max = 1.6

[observation]
neighborhood = 2
velocity_clamp = 10
normalize_volume = true

[episode]
max_steps = 500
action_repeat = 4
terrain_end_x = 40
step_penalty = 0.01
# shift_constant defaults to max_steps * step_penalty
divergence_floor = -10

[transfer]
distances = 1, 2, 3
samples_per_distance = 20
one_shot_lambda = 16
sigma = 0.1
)";
}

}  // namespace voxevo
