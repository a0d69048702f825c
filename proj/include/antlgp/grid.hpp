#pragma once

#include "antlgp/common.hpp"

#include <cstdint>
#include <vector>

namespace antlgp::grid {

// Canonical (already wrapped) cell coordinate.
struct GridCoord {
    int x = 0;
    int y = 0;
    bool operator==(const GridCoord&) const = default;
};

// 2D toroidal substrate: at most one item id per cell, plus a scalar
// pheromone field. Item ids are caller-chosen; kNoItem marks empty cells.
class ToroidalGrid {
public:
    static constexpr std::int64_t kNoItem = -1;

    ToroidalGrid(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    int cell_count() const { return width_ * height_; }

    // Reduces any integer pair into canonical range (handles negatives).
    GridCoord wrap(long long x, long long y) const;

    // The distinct wrapped cells of the Moore square of the given radius
    // around c, excluding c itself. Deterministic order (row-major offsets,
    // first occurrence kept when the torus makes offsets coincide).
    std::vector<GridCoord> neighborhood(GridCoord c, int radius) const;

    bool occupied(GridCoord c) const { return slots_[cell_index(c)] != kNoItem; }
    std::int64_t item_at(GridCoord c) const { return slots_[cell_index(c)]; }
    void place_item(GridCoord c, std::int64_t id);
    std::int64_t remove_item(GridCoord c);
    int item_count() const { return item_count_; }

    // Occupied cells in row-major order with their item ids.
    std::vector<std::pair<GridCoord, std::int64_t>> placed_items() const;

    double pheromone_at(GridCoord c) const { return pheromone_[cell_index(c)]; }
    void add_pheromone(GridCoord c, double amount) { pheromone_[cell_index(c)] += amount; }
    void scale_pheromone(double factor);

    // Places each id in a distinct uniformly sampled empty cell.
    void scatter_items(const std::vector<std::int64_t>& ids, Rng& rng);

private:
    std::size_t cell_index(GridCoord c) const
    {
        return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x);
    }

    int width_;
    int height_;
    std::vector<std::int64_t> slots_;
    std::vector<double> pheromone_;
    int item_count_ = 0;
};

// Number of connected components over a set of occupied cells, where two
// cells are linked if within toroidal Chebyshev distance link_radius.
int component_count(const std::vector<GridCoord>& occupied, int width, int height, int link_radius);

} // namespace antlgp::grid
