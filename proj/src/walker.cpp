#include "voxevo/walker.hpp"

#include <cmath>

#include "voxevo/errors.hpp"

namespace voxevo {

void EpisodeConfig::validate() const {
    if (max_steps < 1) throw ConfigError(0, "episode: max_steps must be >= 1");
    if (action_repeat < 1) throw ConfigError(0, "episode: action_repeat must be >= 1");
    if (!std::isfinite(terrain_end_x)) throw ConfigError(0, "episode: terrain_end_x must be finite");
    if (!std::isfinite(step_penalty) || step_penalty < 0)
        throw ConfigError(0, "episode: step_penalty must be finite and >= 0");
    if (std::abs(shift_constant - max_steps * step_penalty) > 1e-9)
        throw ConfigError(0, "episode: shift_constant must equal max_steps * step_penalty");
    if (!std::isfinite(divergence_floor)) throw ConfigError(0, "episode: divergence_floor must be finite");
}

double walker_reward(double delta_px, bool reached_end, int steps, const EpisodeConfig& cfg) {
    return delta_px + (reached_end ? 1.0 : 0.0) - cfg.step_penalty * steps + cfg.shift_constant;
}

EpisodeResult run_episode(const MorphologyGenome& morph, const Policy& policy, const TaskConfig& cfg,
                          bool record) {
    SimWorld world = build_world(morph, cfg.physics);
    const double start_x = center_of_mass(world).x;
    const EpisodeConfig& ep = cfg.episode;

    EpisodeResult result;
    ActionAssignment actions;
    try {
        for (int step = 0; step < ep.max_steps; ++step) {
            if (record) {
                std::vector<Vec2> frame;
                frame.reserve(world.masses.size());
                for (const MassPoint& m : world.masses) frame.push_back(m.position);
                result.trajectory.push_back(std::move(frame));
            }
            if (step % ep.action_repeat == 0) actions = policy(world, step);
            apply_actuation(world, actions);
            step_env(world);
            result.steps_used = step + 1;
            if (center_of_mass(world).x >= ep.terrain_end_x) {
                result.reached_end = true;
                break;
            }
        }
    } catch (const SimulationDiverged&) {
        result.diverged = true;
        result.reached_end = false;
        result.delta_px = 0.0;
        result.fitness = ep.divergence_floor;
        return result;
    }
    result.delta_px = center_of_mass(world).x - start_x;
    result.fitness = walker_reward(result.delta_px, result.reached_end, result.steps_used, ep);
    return result;
}

EpisodeResult run_episode(const MorphologyGenome& morph, const ControllerGenome& controller,
                          const TaskConfig& cfg, bool record) {
    Policy policy = [&](const SimWorld& world, long step) {
        return act(controller, world, step, cfg.observation);
    };
    return run_episode(morph, policy, cfg, record);
}

double evaluate_fitness(const MorphologyGenome& morph, const ControllerGenome& controller,
                        const TaskConfig& cfg) {
    return run_episode(morph, controller, cfg, false).fitness;
}

}  // namespace voxevo
