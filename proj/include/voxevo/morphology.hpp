#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voxevo/rng.hpp"

namespace voxevo {

enum class Material : std::uint8_t {
    Empty = 0,
    Rigid = 1,
    Soft = 2,
    HorizontalActuator = 3,
    VerticalActuator = 4,
};

inline constexpr int kMaterialKinds = 5;
inline constexpr int kGridSide = 5;
inline constexpr int kGridCells = kGridSide * kGridSide;

constexpr bool is_actuator(Material m) {
    return m == Material::HorizontalActuator || m == Material::VerticalActuator;
}

/// Grid position, row 0 at the top.
struct Cell {
    int row = 0;
    int col = 0;

    constexpr int raster() const { return row * kGridSide + col; }
    static constexpr Cell from_raster(int index) { return {index / kGridSide, index % kGridSide}; }
    constexpr bool in_grid() const {
        return row >= 0 && row < kGridSide && col >= 0 && col < kGridSide;
    }
    friend constexpr bool operator==(Cell, Cell) = default;
    friend constexpr auto operator<=>(Cell, Cell) = default;
};

/// The body genome: a 5x5 grid of material codes, row-major with row 0 on top.
class MorphologyGenome {
public:
    MorphologyGenome() { cells_.fill(Material::Empty); }

    /// Throws RejectedInput unless `codes` has 25 entries in [0, 4].
    static MorphologyGenome from_codes(std::span<const int> codes);
    /// Parses 5 lines of 5 digits. Throws RejectedInput on malformed text.
    static MorphologyGenome from_text(std::string_view text);

    Material at(Cell c) const { return cells_[static_cast<std::size_t>(c.raster())]; }
    Material at(int raster) const { return cells_[static_cast<std::size_t>(raster)]; }
    void set(Cell c, Material m) { cells_[static_cast<std::size_t>(c.raster())] = m; }
    void set(int raster, Material m) { cells_[static_cast<std::size_t>(raster)] = m; }

    int filled_count() const;
    int actuator_count() const;
    /// Raster indices of actuator cells in ascending order.
    std::vector<int> actuator_cells() const;
    std::vector<int> filled_cells() const;

    std::array<int, kGridCells> codes() const;
    std::string to_text() const;

    friend bool operator==(const MorphologyGenome&, const MorphologyGenome&) = default;

private:
    std::array<Material, kGridCells> cells_;
};

inline constexpr int kMinFilledCells = 5;
inline constexpr int kMinActuatorCells = 2;
inline constexpr double kCellMutationRate = 0.1;
inline constexpr int kDefaultRetryCap = 1000;

/// Fill >= 20%, at least two actuator voxels, one 4-connected component.
bool validate(const MorphologyGenome& genome);
/// Same check on raw codes; throws RejectedInput if not 25 codes in [0, 4].
bool validate(std::span<const int> codes);
bool is_connected(const MorphologyGenome& genome);

/// One unconstrained application of the per-cell resampling operator.
struct RawMutation {
    MorphologyGenome genome;
    std::bitset<kGridCells> events;  // cells that were resampled (including identity draws)
    int changed = 0;                 // cells whose code actually differs from the parent
};
RawMutation mutate_raw(const MorphologyGenome& parent, Rng& rng, double rate = kCellMutationRate);

/// Resample-and-reject until the child is valid and differs from the parent.
/// Throws MutationFailed once `retry_cap` draws have been rejected.
MorphologyGenome mutate_morphology(const MorphologyGenome& parent, Rng& rng,
                                   int retry_cap = kDefaultRetryCap);

/// Grows a body by repeatedly mutating the empty grid until it becomes valid.
MorphologyGenome random_morphology(Rng& rng, int retry_cap = kDefaultRetryCap);

/// `distance` sequential applications of mutate_morphology; never returns `genome` itself.
MorphologyGenome sample_neighbor(const MorphologyGenome& genome, int distance, Rng& rng,
                                 int retry_cap = kDefaultRetryCap);

/// Hamming distance over material codes.
int grid_distance(const MorphologyGenome& a, const MorphologyGenome& b);

/// Column range [min, max] of occupied cells; {0, -1} for an empty grid.
std::pair<int, int> occupied_columns(const MorphologyGenome& genome);

/// Moves every cell `dx` columns to the right. Throws RejectedInput if an
/// occupied cell would leave the grid.
MorphologyGenome shift_horizontal(const MorphologyGenome& genome, int dx);

}  // namespace voxevo
