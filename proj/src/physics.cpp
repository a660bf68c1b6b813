#include "voxevo/physics.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <tuple>

#include "voxevo/errors.hpp"

namespace voxevo {

namespace {

constexpr double kRunawayBound = 1e6;
constexpr double kSqrt2 = 1.4142135623730951;

double material_stiffness(Material m, const MaterialStiffness& k) {
    switch (m) {
        case Material::Rigid: return k.rigid;
        case Material::Soft: return k.soft;
        case Material::HorizontalActuator:
        case Material::VerticalActuator: return k.actuator;
        case Material::Empty: break;
    }
    return 0.0;
}

bool finite(double v) { return std::isfinite(v); }

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(0, "physics: " + what);
}

void refresh_rest_lengths(SimWorld& world) {
    for (Spring& s : world.springs) {
        double ratio;
        if (s.axis == SpringAxis::Diagonal) {
            const VoxelBody& v = world.voxels[static_cast<std::size_t>(s.owners[0])];
            ratio = std::sqrt(v.scale_x * v.scale_x + v.scale_y * v.scale_y) / kSqrt2;
        } else {
            double sum = 0.0;
            for (int i = 0; i < s.owner_count; ++i) {
                const VoxelBody& v = world.voxels[static_cast<std::size_t>(s.owners[static_cast<std::size_t>(i)])];
                sum += s.axis == SpringAxis::Horizontal ? v.scale_x : v.scale_y;
            }
            ratio = sum / s.owner_count;
        }
        ratio = std::clamp(ratio, world.scale_min, world.scale_max);
        s.rest_length = ratio * s.base_rest_length;
    }
}

}  // namespace

void PhysicsConfig::validate() const {
    require(finite(stiffness.rigid) && stiffness.rigid >= 0, "rigid stiffness must be finite and >= 0");
    require(finite(stiffness.soft) && stiffness.soft >= 0, "soft stiffness must be finite and >= 0");
    require(finite(stiffness.actuator) && stiffness.actuator >= 0,
            "actuator stiffness must be finite and >= 0");
    require(finite(damping_ratio) && damping_ratio >= 0, "damping_ratio must be finite and >= 0");
    require(finite(gravity), "gravity must be finite");
    require(finite(ground_height), "ground_height must be finite");
    require(finite(contact.normal_stiffness) && contact.normal_stiffness >= 0,
            "contact normal stiffness must be finite and >= 0");
    require(finite(contact.normal_damping) && contact.normal_damping >= 0,
            "contact normal damping must be finite and >= 0");
    require(finite(contact.friction) && contact.friction >= 0, "friction must be finite and >= 0");
    require(finite(physics_dt) && physics_dt > 0, "physics_dt must be > 0");
    require(substeps_per_env_step >= 1, "substeps_per_env_step must be >= 1");
    require(finite(scale_min) && finite(scale_max) && scale_min > 0 && scale_min < 1.0 &&
                1.0 < scale_max,
            "actuation range must satisfy 0 < scale_min < 1 < scale_max");
}

SimWorld build_world(const MorphologyGenome& genome, const PhysicsConfig& cfg) {
    if (!validate(genome)) throw RejectedInput("build_world: invalid morphology genome");

    SimWorld world;
    world.gravity = cfg.gravity;
    world.ground_height = cfg.ground_height;
    world.contact = cfg.contact;
    world.physics_dt = cfg.physics_dt;
    world.substeps_per_env_step = cfg.substeps_per_env_step;
    world.scale_min = cfg.scale_min;
    world.scale_max = cfg.scale_max;
    world.voxel_slot.fill(-1);

    int min_col = kGridSide, max_row = -1;
    for (int i : genome.filled_cells()) {
        Cell c = Cell::from_raster(i);
        min_col = std::min(min_col, c.col);
        max_row = std::max(max_row, c.row);
    }

    // Lattice corners (row, col) with row in [0, 5], col in [0, 5].
    constexpr int kCornerSide = kGridSide + 1;
    std::array<int, kCornerSide * kCornerSide> corner_id;
    corner_id.fill(-1);
    auto corner = [&](int r, int c) {
        int& id = corner_id[static_cast<std::size_t>(r * kCornerSide + c)];
        if (id < 0) {
            id = static_cast<int>(world.masses.size());
            MassPoint m;
            m.position = {static_cast<double>(c - min_col),
                          cfg.ground_height + static_cast<double>(max_row + 1 - r)};
            world.masses.push_back(m);
        }
        return id;
    };

    using EdgeKey = std::tuple<int, int, SpringAxis>;
    std::map<EdgeKey, std::size_t> edge_index;
    auto add_spring = [&](int a, int b, SpringAxis axis, double rest, double k, int owner) {
        EdgeKey key{std::min(a, b), std::max(a, b), axis};
        if (axis != SpringAxis::Diagonal) {
            if (auto it = edge_index.find(key); it != edge_index.end()) {
                Spring& s = world.springs[it->second];
                s.stiffness += k;
                s.owners[1] = owner;
                s.owner_count = 2;
                return;
            }
            edge_index.emplace(key, world.springs.size());
        }
        Spring s;
        s.ends = {a, b};
        s.rest_length = rest;
        s.base_rest_length = rest;
        s.stiffness = k;
        s.axis = axis;
        s.owners = {owner, -1};
        s.owner_count = 1;
        world.springs.push_back(s);
    };

    for (int i : genome.filled_cells()) {
        Cell c = Cell::from_raster(i);
        VoxelBody v;
        v.cell = i;
        v.material = genome.at(i);
        // Bottom-left, bottom-right, top-right, top-left.
        v.corners = {corner(c.row + 1, c.col), corner(c.row + 1, c.col + 1), corner(c.row, c.col + 1),
                     corner(c.row, c.col)};
        int slot = static_cast<int>(world.voxels.size());
        world.voxel_slot[static_cast<std::size_t>(i)] = slot;
        world.voxels.push_back(v);
        for (int corner_index : v.corners) world.masses[static_cast<std::size_t>(corner_index)].mass += 0.25;

        double k = material_stiffness(v.material, cfg.stiffness);
        auto [bl, br, tr, tl] = v.corners;
        add_spring(bl, br, SpringAxis::Horizontal, 1.0, k, slot);
        add_spring(br, tr, SpringAxis::Vertical, 1.0, k, slot);
        add_spring(tl, tr, SpringAxis::Horizontal, 1.0, k, slot);
        add_spring(bl, tl, SpringAxis::Vertical, 1.0, k, slot);
        add_spring(bl, tr, SpringAxis::Diagonal, kSqrt2, k, slot);
        add_spring(br, tl, SpringAxis::Diagonal, kSqrt2, k, slot);
    }

    for (Spring& s : world.springs) {
        double ma = world.masses[static_cast<std::size_t>(s.ends[0])].mass;
        double mb = world.masses[static_cast<std::size_t>(s.ends[1])].mass;
        double reduced = ma * mb / (ma + mb);
        s.damping = 2.0 * cfg.damping_ratio * std::sqrt(s.stiffness * reduced);
    }
    return world;
}

void apply_actuation(SimWorld& world, std::span<const VoxelAction> actions) {
    for (const VoxelAction& a : actions) {
        if (a.cell < 0 || a.cell >= kGridCells)
            throw RejectedInput("actuation cell out of range: " + std::to_string(a.cell));
        int slot = world.voxel_slot[static_cast<std::size_t>(a.cell)];
        if (slot < 0 || !is_actuator(world.voxels[static_cast<std::size_t>(slot)].material))
            throw RejectedInput("cell " + std::to_string(a.cell) + " is not an actuator voxel");
        if (!(a.value >= 0.0 && a.value <= 1.0))
            throw RejectedInput("action outside [0, 1]: " + std::to_string(a.value));
    }
    for (const VoxelAction& a : actions) {
        VoxelBody& v = world.voxels[static_cast<std::size_t>(world.voxel_slot[static_cast<std::size_t>(a.cell)])];
        double scale = world.scale_min + a.value * (world.scale_max - world.scale_min);
        if (v.material == Material::HorizontalActuator)
            v.scale_x = scale;
        else
            v.scale_y = scale;
    }
    refresh_rest_lengths(world);
}

std::vector<Vec2> internal_forces(const SimWorld& world) {
    std::vector<Vec2> force(world.masses.size());
    for (const Spring& s : world.springs) {
        const MassPoint& a = world.masses[static_cast<std::size_t>(s.ends[0])];
        const MassPoint& b = world.masses[static_cast<std::size_t>(s.ends[1])];
        Vec2 d = b.position - a.position;
        double len = norm(d);
        if (len < 1e-12) continue;
        Vec2 u{d.x / len, d.y / len};
        double f = s.stiffness * (len - s.rest_length) + s.damping * dot(b.velocity - a.velocity, u);
        Vec2 fa = f * u;
        force[static_cast<std::size_t>(s.ends[0])] += fa;
        force[static_cast<std::size_t>(s.ends[1])] -= fa;
    }
    return force;
}

void step_substep(SimWorld& world) {
    std::vector<Vec2> force = internal_forces(world);
    const double dt = world.physics_dt;
    const ContactParams& contact = world.contact;
    for (std::size_t i = 0; i < world.masses.size(); ++i) {
        MassPoint& m = world.masses[i];
        Vec2 f = force[i];
        f.y -= m.mass * world.gravity;
        if (contact.enabled && m.position.y < world.ground_height) {
            double penetration = world.ground_height - m.position.y;
            double normal = std::max(0.0, contact.normal_stiffness * penetration -
                                              contact.normal_damping * m.velocity.y);
            f.y += normal;
            // Kinetic friction, capped so it cannot reverse the sliding direction in one substep.
            double vt = m.velocity.x;
            if (vt != 0.0) {
                double cap = std::min(contact.friction * normal, m.mass * std::abs(vt) / dt);
                f.x -= std::copysign(cap, vt);
            }
        }
        m.velocity.x += f.x / m.mass * dt;
        m.velocity.y += f.y / m.mass * dt;
        m.position.x += m.velocity.x * dt;
        m.position.y += m.velocity.y * dt;
    }
    ++world.substeps_taken;
    for (const MassPoint& m : world.masses) {
        bool ok = std::isfinite(m.position.x) && std::isfinite(m.position.y) &&
                  std::isfinite(m.velocity.x) && std::isfinite(m.velocity.y) &&
                  std::abs(m.position.x) < kRunawayBound && std::abs(m.position.y) < kRunawayBound &&
                  std::abs(m.velocity.x) < kRunawayBound && std::abs(m.velocity.y) < kRunawayBound;
        if (!ok)
            throw SimulationDiverged(world.substeps_taken,
                                     "simulation diverged at substep " +
                                         std::to_string(world.substeps_taken));
    }
}

void step_env(SimWorld& world) {
    for (int i = 0; i < world.substeps_per_env_step; ++i) step_substep(world);
}

Vec2 center_of_mass(const SimWorld& world) {
    Vec2 acc;
    double total = 0.0;
    for (const MassPoint& m : world.masses) {
        acc += m.mass * m.position;
        total += m.mass;
    }
    return {acc.x / total, acc.y / total};
}

double mechanical_energy(const SimWorld& world) {
    double e = 0.0;
    for (const MassPoint& m : world.masses)
        e += 0.5 * m.mass * dot(m.velocity, m.velocity) +
             m.mass * world.gravity * (m.position.y - world.ground_height);
    for (const Spring& s : world.springs) {
        const Vec2 d = world.masses[static_cast<std::size_t>(s.ends[1])].position -
                       world.masses[static_cast<std::size_t>(s.ends[0])].position;
        double stretch = norm(d) - s.rest_length;
        e += 0.5 * s.stiffness * stretch * stretch;
    }
    return e;
}

}  // namespace voxevo
