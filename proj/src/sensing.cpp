#include "voxevo/sensing.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "voxevo/errors.hpp"

namespace voxevo {

namespace {

void write_block(const VoxelObservation& obs, std::span<double> out) {
    out[0] = obs.velocity.x;
    out[1] = obs.velocity.y;
    out[2] = obs.volume;
    std::copy(obs.material.begin(), obs.material.end(), out.begin() + 3);
}

constexpr std::array<double, kFeaturesPerVoxel> kMissingBlock{0, 0, 0, 1, 0, 0, 0, 0};

}  // namespace

void ObservationConfig::validate() const {
    if (neighborhood < 0) throw ConfigError(0, "observation: neighborhood must be >= 0");
    if (!(velocity_clamp > 0) || !std::isfinite(velocity_clamp))
        throw ConfigError(0, "observation: velocity_clamp must be finite and > 0");
}

double time_signal(long env_step) {
    long phase = env_step % kTimePeriod;
    if (phase < 0) phase += kTimePeriod;
    return 2.0 * std::numbers::pi * static_cast<double>(phase) / kTimePeriod;
}

double voxel_area(const SimWorld& world, const VoxelBody& voxel) {
    double twice = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        Vec2 p = world.masses[static_cast<std::size_t>(voxel.corners[i])].position;
        Vec2 q = world.masses[static_cast<std::size_t>(voxel.corners[(i + 1) % 4])].position;
        twice += p.x * q.y - q.x * p.y;
    }
    return 0.5 * twice;
}

VoxelObservation observe_voxel(const SimWorld& world, Cell cell, const ObservationConfig& cfg) {
    if (!cell.in_grid()) return VoxelObservation::missing();
    int slot = world.voxel_slot[static_cast<std::size_t>(cell.raster())];
    if (slot < 0) return VoxelObservation::missing();
    const VoxelBody& voxel = world.voxels[static_cast<std::size_t>(slot)];

    VoxelObservation obs;
    Vec2 v;
    for (int c : voxel.corners) v += world.masses[static_cast<std::size_t>(c)].velocity;
    obs.velocity = {std::clamp(0.25 * v.x, -cfg.velocity_clamp, cfg.velocity_clamp),
                    std::clamp(0.25 * v.y, -cfg.velocity_clamp, cfg.velocity_clamp)};
    // Rest area is one square voxel-length, so normalized and absolute coincide
    // numerically; the flag only records which one is meant.
    double area = std::max(0.0, voxel_area(world, voxel));
    obs.volume = cfg.normalize_volume ? area / 1.0 : area;
    obs.material.fill(0.0);
    obs.material[static_cast<std::size_t>(voxel.material)] = 1.0;
    return obs;
}

ObservationFrame::ObservationFrame(const SimWorld& world, const ObservationConfig& cfg) {
    for (int i = 0; i < kGridCells; ++i)
        write_block(observe_voxel(world, Cell::from_raster(i), cfg),
                    std::span<double>(blocks_).subspan(static_cast<std::size_t>(i * kFeaturesPerVoxel),
                                                       kFeaturesPerVoxel));
}

std::span<const double, kFeaturesPerVoxel> ObservationFrame::block(Cell cell) const {
    if (!cell.in_grid()) return missing_block();
    return std::span<const double>(blocks_)
        .subspan(static_cast<std::size_t>(cell.raster() * kFeaturesPerVoxel))
        .first<kFeaturesPerVoxel>();
}

std::span<const double, kFeaturesPerVoxel> ObservationFrame::missing_block() {
    return std::span<const double, kFeaturesPerVoxel>(kMissingBlock);
}

void observe_global(const ObservationFrame& frame, long env_step, std::span<double> out) {
    if (out.size() != static_cast<std::size_t>(kGlobalInputSize))
        throw RejectedInput("global observation buffer must hold 201 values");
    auto it = out.begin();
    for (int i = 0; i < kGridCells; ++i) it = std::copy_n(frame.block(Cell::from_raster(i)).begin(), kFeaturesPerVoxel, it);
    *it = time_signal(env_step);
}

std::vector<double> observe_global(const SimWorld& world, long env_step, const ObservationConfig& cfg) {
    std::vector<double> out(kGlobalInputSize);
    observe_global(ObservationFrame(world, cfg), env_step, out);
    return out;
}

void observe_local(const ObservationFrame& frame, Cell cell, long env_step, int neighborhood,
                   std::span<double> out) {
    int side = 2 * neighborhood + 1;
    if (out.size() != static_cast<std::size_t>(side * side * kFeaturesPerVoxel + 1))
        throw RejectedInput("local observation buffer has the wrong size");
    auto it = out.begin();
    for (int dr = -neighborhood; dr <= neighborhood; ++dr)
        for (int dc = -neighborhood; dc <= neighborhood; ++dc)
            it = std::copy_n(frame.block(Cell{cell.row + dr, cell.col + dc}).begin(), kFeaturesPerVoxel, it);
    *it = time_signal(env_step);
}

std::vector<double> observe_local(const SimWorld& world, Cell cell, long env_step,
                                  const ObservationConfig& cfg) {
    if (!cell.in_grid()) throw RejectedInput("observe_local: cell outside the grid");
    int slot = world.voxel_slot[static_cast<std::size_t>(cell.raster())];
    if (slot < 0 || !is_actuator(world.voxels[static_cast<std::size_t>(slot)].material))
        throw RejectedInput("observe_local: cell " + std::to_string(cell.raster()) +
                            " is not an actuator voxel");
    std::vector<double> out(static_cast<std::size_t>(cfg.local_input_size()));
    observe_local(ObservationFrame(world, cfg), cell, env_step, cfg.neighborhood, out);
    return out;
}

}  // namespace voxevo
