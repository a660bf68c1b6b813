#pragma once

#include <functional>
#include <vector>

#include "voxevo/control.hpp"
#include "voxevo/morphology.hpp"
#include "voxevo/physics.hpp"
#include "voxevo/sensing.hpp"

namespace voxevo {

struct EpisodeConfig {
    int max_steps = 500;
    int action_repeat = 4;
    double terrain_end_x = 40.0;
    double step_penalty = 0.01;
    double shift_constant = 5.0;  // must equal max_steps * step_penalty
    double divergence_floor = -10.0;

    void validate() const;
};

/// Everything a single episode depends on besides the genomes.
struct TaskConfig {
    PhysicsConfig physics;
    ObservationConfig observation;
    EpisodeConfig episode;

    void validate() const {
        physics.validate();
        observation.validate();
        episode.validate();
    }
};

struct EpisodeResult {
    double fitness = 0.0;
    double delta_px = 0.0;
    bool reached_end = false;
    int steps_used = 0;
    bool diverged = false;
    /// Mass positions before each simulated step; empty unless recorded.
    std::vector<std::vector<Vec2>> trajectory;
};

/// delta_px + I(reached_end) - step_penalty * steps + shift_constant.
double walker_reward(double delta_px, bool reached_end, int steps, const EpisodeConfig& cfg);

/// Maps the current world and environment step to actuator commands.
using Policy = std::function<ActionAssignment(const SimWorld&, long env_step)>;

/// Runs the flat-terrain walking episode. The policy is queried on steps
/// divisible by action_repeat and its last actions are held in between.
EpisodeResult run_episode(const MorphologyGenome& morph, const Policy& policy, const TaskConfig& cfg,
                          bool record = false);
EpisodeResult run_episode(const MorphologyGenome& morph, const ControllerGenome& controller,
                          const TaskConfig& cfg, bool record = false);

double evaluate_fitness(const MorphologyGenome& morph, const ControllerGenome& controller,
                        const TaskConfig& cfg);

}  // namespace voxevo
