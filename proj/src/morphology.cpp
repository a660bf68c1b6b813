#include "voxevo/morphology.hpp"

#include <algorithm>
#include <sstream>

#include "voxevo/errors.hpp"

namespace voxevo {

MorphologyGenome MorphologyGenome::from_codes(std::span<const int> codes) {
    if (codes.size() != static_cast<std::size_t>(kGridCells))
        throw RejectedInput("morphology grid must have 25 cells, got " +
                            std::to_string(codes.size()));
    MorphologyGenome g;
    for (int i = 0; i < kGridCells; ++i) {
        int code = codes[static_cast<std::size_t>(i)];
        if (code < 0 || code >= kMaterialKinds)
            throw RejectedInput("material code out of range: " + std::to_string(code));
        g.set(i, static_cast<Material>(code));
    }
    return g;
}

MorphologyGenome MorphologyGenome::from_text(std::string_view text) {
    std::vector<int> codes;
    int row_len = 0;
    int rows = 0;
    for (char ch : text) {
        if (ch == '\r' || ch == ' ' || ch == '\t') continue;
        if (ch == '\n') {
            if (row_len == 0) continue;
            if (row_len != kGridSide)
                throw RejectedInput("morphology row " + std::to_string(rows) + " has " +
                                    std::to_string(row_len) + " cells");
            ++rows;
            row_len = 0;
            continue;
        }
        if (ch < '0' || ch > '4')
            throw RejectedInput(std::string("invalid material digit '") + ch + "'");
        codes.push_back(ch - '0');
        ++row_len;
    }
    if (row_len != 0) {
        if (row_len != kGridSide) throw RejectedInput("truncated morphology row");
        ++rows;
    }
    if (rows != kGridSide) throw RejectedInput("morphology must have 5 rows");
    return from_codes(codes);
}

int MorphologyGenome::filled_count() const {
    return static_cast<int>(
        std::count_if(cells_.begin(), cells_.end(), [](Material m) { return m != Material::Empty; }));
}

int MorphologyGenome::actuator_count() const {
    return static_cast<int>(std::count_if(cells_.begin(), cells_.end(), is_actuator));
}

std::vector<int> MorphologyGenome::actuator_cells() const {
    std::vector<int> out;
    for (int i = 0; i < kGridCells; ++i)
        if (is_actuator(at(i))) out.push_back(i);
    return out;
}

std::vector<int> MorphologyGenome::filled_cells() const {
    std::vector<int> out;
    for (int i = 0; i < kGridCells; ++i)
        if (at(i) != Material::Empty) out.push_back(i);
    return out;
}

std::array<int, kGridCells> MorphologyGenome::codes() const {
    std::array<int, kGridCells> out{};
    for (int i = 0; i < kGridCells; ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(at(i));
    return out;
}

std::string MorphologyGenome::to_text() const {
    std::string s;
    s.reserve(kGridCells + kGridSide);
    for (int r = 0; r < kGridSide; ++r) {
        for (int c = 0; c < kGridSide; ++c) s.push_back(static_cast<char>('0' + static_cast<int>(at(Cell{r, c}))));
        s.push_back('\n');
    }
    return s;
}

bool is_connected(const MorphologyGenome& genome) {
    std::vector<int> filled = genome.filled_cells();
    if (filled.empty()) return false;
    std::array<bool, kGridCells> seen{};
    std::vector<int> stack{filled.front()};
    seen[static_cast<std::size_t>(filled.front())] = true;
    int reached = 0;
    while (!stack.empty()) {
        Cell c = Cell::from_raster(stack.back());
        stack.pop_back();
        ++reached;
        constexpr int dr[4] = {-1, 1, 0, 0};
        constexpr int dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
            Cell n{c.row + dr[k], c.col + dc[k]};
            if (!n.in_grid() || genome.at(n) == Material::Empty) continue;
            auto& s = seen[static_cast<std::size_t>(n.raster())];
            if (!s) {
                s = true;
                stack.push_back(n.raster());
            }
        }
    }
    return reached == static_cast<int>(filled.size());
}

bool validate(const MorphologyGenome& genome) {
    return genome.filled_count() >= kMinFilledCells &&
           genome.actuator_count() >= kMinActuatorCells && is_connected(genome);
}

bool validate(std::span<const int> codes) { return validate(MorphologyGenome::from_codes(codes)); }

RawMutation mutate_raw(const MorphologyGenome& parent, Rng& rng, double rate) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<int> code(0, kMaterialKinds - 1);
    RawMutation out{parent, {}, 0};
    for (int i = 0; i < kGridCells; ++i) {
        if (coin(rng) >= rate) continue;
        out.events.set(static_cast<std::size_t>(i));
        auto m = static_cast<Material>(code(rng));
        if (m != parent.at(i)) ++out.changed;
        out.genome.set(i, m);
    }
    return out;
}

MorphologyGenome mutate_morphology(const MorphologyGenome& parent, Rng& rng, int retry_cap) {
    for (int attempt = 0; attempt < retry_cap; ++attempt) {
        RawMutation draw = mutate_raw(parent, rng);
        if (draw.changed > 0 && validate(draw.genome)) return draw.genome;
    }
    throw MutationFailed("morphology mutation rejected " + std::to_string(retry_cap) + " times");
}

MorphologyGenome random_morphology(Rng& rng, int retry_cap) {
    MorphologyGenome g;
    for (int attempt = 0; attempt < retry_cap; ++attempt) {
        g = mutate_raw(g, rng).genome;
        if (validate(g)) return g;
    }
    throw MutationFailed("random morphology not found within " + std::to_string(retry_cap) +
                         " mutations of the empty grid");
}

MorphologyGenome sample_neighbor(const MorphologyGenome& genome, int distance, Rng& rng,
                                 int retry_cap) {
    if (distance < 1) throw RejectedInput("neighbor distance must be >= 1");
    // Chains of mutations can revert to the start; those chains are redrawn.
    for (int attempt = 0; attempt < retry_cap; ++attempt) {
        MorphologyGenome g = genome;
        for (int i = 0; i < distance; ++i) g = mutate_morphology(g, rng, retry_cap);
        if (!(g == genome)) return g;
    }
    throw MutationFailed("every neighbor chain returned to the starting body");
}

int grid_distance(const MorphologyGenome& a, const MorphologyGenome& b) {
    int d = 0;
    for (int i = 0; i < kGridCells; ++i) d += a.at(i) != b.at(i);
    return d;
}

std::pair<int, int> occupied_columns(const MorphologyGenome& genome) {
    int lo = kGridSide, hi = -1;
    for (int i : genome.filled_cells()) {
        int c = Cell::from_raster(i).col;
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    if (hi < 0) return {0, -1};
    return {lo, hi};
}

MorphologyGenome shift_horizontal(const MorphologyGenome& genome, int dx) {
    MorphologyGenome out;
    for (int i : genome.filled_cells()) {
        Cell c = Cell::from_raster(i);
        Cell moved{c.row, c.col + dx};
        if (!moved.in_grid()) throw RejectedInput("shift moves an occupied cell out of the grid");
        out.set(moved, genome.at(i));
    }
    return out;
}

}  // namespace voxevo
