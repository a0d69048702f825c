#include "antlgp/grid.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace antlgp;
using grid::GridCoord;
using grid::ToroidalGrid;

TEST_CASE("wrap reduces coordinates into canonical range")
{
    const ToroidalGrid g(25, 25);
    CHECK(g.wrap(25, 3) == GridCoord{ 0, 3 });
    CHECK(g.wrap(-1, -1) == GridCoord{ 24, 24 });
    CHECK(g.wrap(7, 7) == GridCoord{ 7, 7 });
}

TEST_CASE("wrap is idempotent on random inputs")
{
    const ToroidalGrid g(13, 7);
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        const auto x = static_cast<long long>(rng.next_u64() % 2001) - 1000;
        const auto y = static_cast<long long>(rng.next_u64() % 2001) - 1000;
        const auto once = g.wrap(x, y);
        CHECK(g.wrap(once.x, once.y) == once);
    }
}

TEST_CASE("neighborhood is the Moore square minus the center")
{
    const ToroidalGrid g(25, 25);
    CHECK(g.neighborhood(GridCoord{ 12, 12 }, 1).size() == 8);

    const auto corner = g.neighborhood(GridCoord{ 0, 0 }, 1);
    CHECK(corner.size() == 8);
    CHECK(std::find(corner.begin(), corner.end(), GridCoord{ 24, 24 }) != corner.end());
}

TEST_CASE("neighborhood deduplicates on grids smaller than the square")
{
    const ToroidalGrid g(2, 2);
    const auto cells = g.neighborhood(GridCoord{ 0, 0 }, 1);
    // independent enumeration: wrap all 8 offsets and deduplicate
    std::set<std::pair<int, int>> expected;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0)
                continue;
            const auto p = g.wrap(dx, dy);
            if (!(p == GridCoord{ 0, 0 }))
                expected.insert({ p.x, p.y });
        }
    CHECK(expected.size() == 3);
    CHECK(cells.size() == expected.size());
    for (const auto& c : cells)
        CHECK(expected.count({ c.x, c.y }) == 1);
}

TEST_CASE("neighborhood is symmetric")
{
    const ToroidalGrid g(11, 6);
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const GridCoord p{ static_cast<int>(rng.uniform_int(11)), static_cast<int>(rng.uniform_int(6)) };
        const GridCoord q{ static_cast<int>(rng.uniform_int(11)), static_cast<int>(rng.uniform_int(6)) };
        const int r = 1 + static_cast<int>(rng.uniform_int(3));
        const auto np = g.neighborhood(p, r);
        const auto nq = g.neighborhood(q, r);
        const bool q_in_p = std::find(np.begin(), np.end(), q) != np.end();
        const bool p_in_q = std::find(nq.begin(), nq.end(), p) != nq.end();
        CHECK(q_in_p == p_in_q);
    }
}

TEST_CASE("scatter rejects more items than cells")
{
    ToroidalGrid g(25, 25);
    std::vector<std::int64_t> ids(626);
    for (std::size_t i = 0; i < ids.size(); ++i)
        ids[i] = static_cast<std::int64_t>(i);
    Rng rng(1);
    CHECK_THROWS_AS(g.scatter_items(ids, rng), CapacityError);
}

TEST_CASE("scatter of zero items leaves the grid unchanged")
{
    ToroidalGrid g(5, 5);
    Rng rng(1);
    g.scatter_items({}, rng);
    CHECK(g.item_count() == 0);
}

TEST_CASE("scatter is deterministic and places items in distinct cells")
{
    std::vector<std::int64_t> ids;
    for (std::int64_t i = 1; i <= 30; ++i)
        ids.push_back(i);

    ToroidalGrid a(8, 8);
    ToroidalGrid b(8, 8);
    Rng ra(42);
    Rng rb(42);
    a.scatter_items(ids, ra);
    b.scatter_items(ids, rb);

    CHECK(a.item_count() == 30);
    CHECK(a.placed_items() == b.placed_items());

    std::set<std::int64_t> seen;
    for (const auto& [coord, id] : a.placed_items())
        CHECK(seen.insert(id).second);
    CHECK(seen.size() == ids.size());
}

TEST_CASE("component_count joins across the toroidal seam")
{
    CHECK(grid::component_count({ { 0, 0 }, { 24, 24 } }, 25, 25, 1) == 1);
    CHECK(grid::component_count({ { 0, 0 }, { 3, 3 } }, 25, 25, 1) == 2);
    CHECK(grid::component_count({}, 5, 5, 1) == 0);
}
