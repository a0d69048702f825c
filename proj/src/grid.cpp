#include "antlgp/grid.hpp"

#include <algorithm>
#include <unordered_set>

namespace antlgp::grid {

ToroidalGrid::ToroidalGrid(int width, int height)
    : width_(width)
    , height_(height)
{
    if (width < 1 || height < 1)
        throw ValidationError("grid dimensions must be positive");
    slots_.assign(static_cast<std::size_t>(width) * height, kNoItem);
    pheromone_.assign(static_cast<std::size_t>(width) * height, 0.0);
}

GridCoord ToroidalGrid::wrap(long long x, long long y) const
{
    const long long w = width_;
    const long long h = height_;
    return GridCoord{ static_cast<int>(((x % w) + w) % w), static_cast<int>(((y % h) + h) % h) };
}

std::vector<GridCoord> ToroidalGrid::neighborhood(GridCoord c, int radius) const
{
    if (radius < 1)
        throw ValidationError("neighborhood radius must be >= 1");
    std::vector<GridCoord> cells;
    cells.reserve(static_cast<std::size_t>(2 * radius + 1) * (2 * radius + 1) - 1);
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            if (dx == 0 && dy == 0)
                continue;
            const GridCoord p = wrap(static_cast<long long>(c.x) + dx, static_cast<long long>(c.y) + dy);
            if (p == c)
                continue; // offsets can fold back onto the center on tiny grids
            if (std::find(cells.begin(), cells.end(), p) == cells.end())
                cells.push_back(p);
        }
    }
    return cells;
}

void ToroidalGrid::place_item(GridCoord c, std::int64_t id)
{
    if (id == kNoItem)
        throw ValidationError("invalid item id");
    auto& slot = slots_[cell_index(c)];
    if (slot != kNoItem)
        throw StateError("cell already holds an item");
    slot = id;
    ++item_count_;
}

std::int64_t ToroidalGrid::remove_item(GridCoord c)
{
    auto& slot = slots_[cell_index(c)];
    if (slot == kNoItem)
        throw StateError("cell holds no item");
    const std::int64_t id = slot;
    slot = kNoItem;
    --item_count_;
    return id;
}

std::vector<std::pair<GridCoord, std::int64_t>> ToroidalGrid::placed_items() const
{
    std::vector<std::pair<GridCoord, std::int64_t>> out;
    out.reserve(static_cast<std::size_t>(item_count_));
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x) {
            const GridCoord c{ x, y };
            if (occupied(c))
                out.emplace_back(c, item_at(c));
        }
    return out;
}

void ToroidalGrid::scale_pheromone(double factor)
{
    for (auto& p : pheromone_)
        p *= factor;
}

void ToroidalGrid::scatter_items(const std::vector<std::int64_t>& ids, Rng& rng)
{
    if (static_cast<long long>(ids.size()) > static_cast<long long>(cell_count()) - item_count_)
        throw CapacityError("more items than empty grid cells");
    {
        std::unordered_set<std::int64_t> seen(ids.begin(), ids.end());
        if (seen.size() != ids.size())
            throw ValidationError("duplicate item ids in scatter");
    }
    std::vector<std::size_t> empty_cells;
    empty_cells.reserve(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i)
        if (slots_[i] == kNoItem)
            empty_cells.push_back(i);
    // partial Fisher-Yates: the first |ids| entries become the target cells
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(empty_cells.size() - i));
        std::swap(empty_cells[i], empty_cells[j]);
        slots_[empty_cells[i]] = ids[i];
        ++item_count_;
    }
}

int component_count(const std::vector<GridCoord>& occupied, int width, int height, int link_radius)
{
    if (link_radius < 1)
        throw ValidationError("link radius must be >= 1");
    const ToroidalGrid geometry(width, height); // wrap/neighborhood helper only
    std::vector<char> present(static_cast<std::size_t>(width) * height, 0);
    auto index_of = [width](GridCoord c) { return static_cast<std::size_t>(c.y) * width + c.x; };
    for (const auto& c : occupied)
        present[index_of(c)] = 1;

    std::vector<char> visited(present.size(), 0);
    int components = 0;
    std::vector<GridCoord> stack;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const GridCoord start{ x, y };
            if (!present[index_of(start)] || visited[index_of(start)])
                continue;
            ++components;
            stack.push_back(start);
            visited[index_of(start)] = 1;
            while (!stack.empty()) {
                const GridCoord c = stack.back();
                stack.pop_back();
                for (const auto& n : geometry.neighborhood(c, link_radius)) {
                    if (present[index_of(n)] && !visited[index_of(n)]) {
                        visited[index_of(n)] = 1;
                        stack.push_back(n);
                    }
                }
            }
        }
    }
    return components;
}

} // namespace antlgp::grid
