#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "voxevo/morphology.hpp"

namespace voxevo {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::sqrt(dot(v, v)); }

struct MassPoint {
    Vec2 position;
    Vec2 velocity;
    double mass = 0.0;
};

enum class SpringAxis : std::uint8_t { Horizontal, Vertical, Diagonal };

struct Spring {
    std::array<int, 2> ends{};
    double rest_length = 1.0;       // current, after actuation
    double base_rest_length = 1.0;
    double stiffness = 0.0;
    double damping = 0.0;
    SpringAxis axis = SpringAxis::Horizontal;
    // Voxel slots (indices into SimWorld::voxels) whose scales drive this spring.
    std::array<int, 2> owners{-1, -1};
    int owner_count = 0;
};

/// A compiled voxel. Corners are counter-clockwise from the bottom-left.
struct VoxelBody {
    int cell = 0;  // raster index in the genome
    Material material = Material::Empty;
    std::array<int, 4> corners{};
    double scale_x = 1.0;
    double scale_y = 1.0;
};

struct ContactParams {
    double normal_stiffness = 1e4;
    double normal_damping = 10.0;
    double friction = 0.8;
    bool enabled = true;
};

struct MaterialStiffness {
    double rigid = 6000.0;
    double soft = 600.0;
    double actuator = 600.0;
};

struct PhysicsConfig {
    MaterialStiffness stiffness;
    double damping_ratio = 0.1;
    double gravity = 9.81;
    double ground_height = 0.0;
    ContactParams contact;
    double physics_dt = 1.0 / 600.0;
    int substeps_per_env_step = 6;
    double scale_min = 0.6;
    double scale_max = 1.6;

    /// Throws ConfigError on non-finite values, dt <= 0, or a range not bracketing 1.
    void validate() const;
};

struct SimWorld {
    std::vector<MassPoint> masses;
    std::vector<Spring> springs;
    std::vector<VoxelBody> voxels;
    std::array<int, kGridCells> voxel_slot{};  // raster cell -> index into voxels, -1 if empty
    double gravity = 9.81;
    double ground_height = 0.0;
    ContactParams contact;
    double physics_dt = 1.0 / 600.0;
    int substeps_per_env_step = 6;
    double scale_min = 0.6;
    double scale_max = 1.6;
    std::size_t substeps_taken = 0;
};

/// One control signal for an actuator voxel.
struct VoxelAction {
    int cell = 0;  // raster index
    double value = 0.0;  // in [0, 1]
    friend bool operator==(const VoxelAction&, const VoxelAction&) = default;
};

/// Compiles a genome into a cross-braced mass-spring lattice resting on the ground
/// with its leftmost column at x = 0. Throws RejectedInput for invalid genomes.
SimWorld build_world(const MorphologyGenome& genome, const PhysicsConfig& cfg);

/// Maps each a in [0, 1] to an edge scale and updates rest lengths.
/// Throws RejectedInput for non-actuator cells or out-of-range values.
void apply_actuation(SimWorld& world, std::span<const VoxelAction> actions);

/// Advances one environment tick (substeps_per_env_step physics substeps).
/// Throws SimulationDiverged on non-finite or runaway state.
void step_env(SimWorld& world);

/// A single semi-implicit Euler substep.
void step_substep(SimWorld& world);

Vec2 center_of_mass(const SimWorld& world);

/// Per-mass spring forces (elastic plus axial damping) for the current state.
std::vector<Vec2> internal_forces(const SimWorld& world);

/// Kinetic + spring potential + gravitational energy (contact excluded).
double mechanical_energy(const SimWorld& world);

}  // namespace voxevo
