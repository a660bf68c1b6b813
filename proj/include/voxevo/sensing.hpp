#pragma once

#include <array>
#include <span>
#include <vector>

#include "voxevo/physics.hpp"

namespace voxevo {

inline constexpr int kFeaturesPerVoxel = 8;  // V.x, V.y, volume, material one-hot[5]
inline constexpr int kTimePeriod = 25;
inline constexpr int kGlobalInputSize = kGridCells * kFeaturesPerVoxel + 1;

struct ObservationConfig {
    int neighborhood = 2;  // Moore distance d
    double velocity_clamp = 10.0;
    bool normalize_volume = true;  // divide by rest area (1 voxel-length^2)

    int window_side() const { return 2 * neighborhood + 1; }
    int local_input_size() const { return window_side() * window_side() * kFeaturesPerVoxel + 1; }
    void validate() const;
};

struct VoxelObservation {
    Vec2 velocity;
    double volume = 0.0;
    std::array<double, kMaterialKinds> material{1.0, 0.0, 0.0, 0.0, 0.0};

    static VoxelObservation missing() { return {}; }
    friend bool operator==(const VoxelObservation&, const VoxelObservation&) = default;
};

/// 2*pi*(env_step mod 25)/25.
double time_signal(long env_step);

/// Features of one grid cell. Empty or out-of-grid cells give the missing triple.
VoxelObservation observe_voxel(const SimWorld& world, Cell cell, const ObservationConfig& cfg = {});

/// Signed area of a voxel's quadrilateral (shoelace over its CCW corners).
double voxel_area(const SimWorld& world, const VoxelBody& voxel);

/// The 25 per-cell feature blocks of a world, computed once and reused across windows.
class ObservationFrame {
public:
    ObservationFrame(const SimWorld& world, const ObservationConfig& cfg);

    std::span<const double, kFeaturesPerVoxel> block(Cell cell) const;
    static std::span<const double, kFeaturesPerVoxel> missing_block();

private:
    std::array<double, kGridCells * kFeaturesPerVoxel> blocks_{};
};

/// Raster-ordered blocks of the 5x5 box followed by the time signal (201 entries).
std::vector<double> observe_global(const SimWorld& world, long env_step, const ObservationConfig& cfg = {});
void observe_global(const ObservationFrame& frame, long env_step, std::span<double> out);

/// Moore window of distance d around an actuator cell, then the time signal.
/// Throws RejectedInput if `cell` is not an actuator voxel.
std::vector<double> observe_local(const SimWorld& world, Cell cell, long env_step,
                                  const ObservationConfig& cfg = {});
void observe_local(const ObservationFrame& frame, Cell cell, long env_step, int neighborhood,
                   std::span<double> out);

}  // namespace voxevo
