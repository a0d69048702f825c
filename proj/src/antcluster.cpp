#include "antlgp/antcluster.hpp"

#include <algorithm>
#include <cmath>

namespace antlgp::antcluster {

void ColonyConfig::validate() const
{
    if (grid_width < 1 || grid_height < 1)
        throw ValidationError("colony grid dimensions must be positive");
    if (n_ants < 1)
        throw ValidationError("colony needs at least one ant");
    if (radius < 1)
        throw ValidationError("stimulus radius must be >= 1");
    if (thresholds.k1 <= 0.0 || thresholds.k2 <= 0.0)
        throw ValidationError("threshold constants k1, k2 must be > 0");
    if (thresholds.exponent < 1)
        throw ValidationError("threshold exponent must be a positive integer");
    if (pheromone.deposit <= 0.0)
        throw ValidationError("pheromone deposit must be > 0");
    if (pheromone.evaporation <= 0.0 || pheromone.evaporation >= 1.0)
        throw ValidationError("evaporation rate must lie in (0,1)");
    if (pheromone.beta <= 0.0)
        throw ValidationError("pheromone sensitivity beta must be > 0");
    if (pheromone.delta < 0.0)
        throw ValidationError("pheromone saturation delta must be >= 0");
    if (alpha <= 0.0)
        throw ValidationError("similarity scale alpha must be > 0");
    if (max_steps < 1)
        throw ValidationError("max_steps must be >= 1");
    for (const long long s : snapshot_steps)
        if (s < 0)
            throw ValidationError("snapshot steps must be >= 0");
}

ItemStore::ItemStore(std::vector<DataItem> items)
    : items_(std::move(items))
{
    index_.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const auto [it, inserted] = index_.emplace(items_[i].id, i);
        (void)it;
        if (!inserted)
            throw ValidationError("duplicate item id " + std::to_string(items_[i].id));
    }
}

const DataItem& ItemStore::get(std::int64_t id) const
{
    const auto it = index_.find(id);
    if (it == index_.end())
        throw ValidationError("unknown item id " + std::to_string(id));
    return items_[it->second];
}

double dissimilarity(const DataItem& a, const DataItem& b)
{
    if (a.features.size() != b.features.size())
        throw ValidationError("feature dimension mismatch");
    if (a.features.empty())
        throw ValidationError("items have no features");
    double sq = 0.0;
    for (std::size_t i = 0; i < a.features.size(); ++i) {
        const double d = a.features[i] - b.features[i];
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(a.features.size()));
}

Stimuli local_stimuli(const grid::ToroidalGrid& g, const ItemStore& items, grid::GridCoord pos,
    const DataItem& subject, int radius, double alpha)
{
    const auto cells = g.neighborhood(pos, radius);
    int occupied = 0;
    double similarity_sum = 0.0;
    for (const auto& c : cells) {
        if (!g.occupied(c))
            continue;
        ++occupied;
        const double d = dissimilarity(subject, items.get(g.item_at(c)));
        similarity_sum += std::max(0.0, 1.0 - d / alpha);
    }
    Stimuli s;
    if (occupied > 0) {
        s.density = static_cast<double>(occupied) / static_cast<double>(cells.size());
        s.similarity = similarity_sum / static_cast<double>(occupied);
    }
    return s;
}

namespace {

double int_pow(double base, int n)
{
    double r = 1.0;
    for (int i = 0; i < n; ++i)
        r *= base;
    return r;
}

} // namespace

double pick_probability(double density, double similarity, const ThresholdParams& p)
{
    const double fd = p.k1 / (p.k1 + density);
    const double fs = p.k1 / (p.k1 + similarity);
    return int_pow(fd, p.exponent) * int_pow(fs, p.exponent);
}

double drop_probability(double density, double similarity, const ThresholdParams& p)
{
    const double fd = density / (p.k2 + density);
    const double fs = similarity / (p.k2 + similarity);
    return int_pow(fd, p.exponent) * int_pow(fs, p.exponent);
}

std::vector<double> transition_weights(const std::vector<double>& pheromone, const PheromoneParams& p)
{
    std::vector<double> w;
    w.reserve(pheromone.size());
    for (const double s : pheromone)
        w.push_back(std::pow(1.0 + s / (1.0 + p.delta * s), p.beta));
    return w;
}

TransitionDistribution transition_distribution(const grid::ToroidalGrid& g, grid::GridCoord pos,
    const PheromoneParams& p)
{
    TransitionDistribution dist;
    dist.cells = g.neighborhood(pos, 1);
    std::vector<double> sigma;
    sigma.reserve(dist.cells.size());
    for (const auto& c : dist.cells)
        sigma.push_back(g.pheromone_at(c));
    dist.probabilities = transition_weights(sigma, p);
    double total = 0.0;
    for (const double w : dist.probabilities)
        total += w;
    for (double& w : dist.probabilities)
        w /= total; // W >= 1 everywhere, so total >= |cells| > 0
    return dist;
}

void evaporate_and_deposit(grid::ToroidalGrid& g, const std::vector<Ant>& ants, const PheromoneParams& p)
{
    g.scale_pheromone(1.0 - p.evaporation);
    for (const auto& ant : ants)
        g.add_pheromone(ant.position, ant.laden() ? 2.0 * p.deposit : p.deposit);
}

ColonyState make_colony(const ColonyConfig& cfg, std::vector<DataItem> items)
{
    cfg.validate();
    const std::size_t dim = items.empty() ? 0 : items.front().features.size();
    for (const auto& item : items) {
        if (item.features.size() != dim)
            throw ValidationError("inconsistent feature dimension across items");
        for (const double f : item.features)
            if (!(f >= 0.0 && f <= 1.0))
                throw ValidationError("item features must lie in [0,1]");
    }

    ColonyState state{
        grid::ToroidalGrid(cfg.grid_width, cfg.grid_height),
        {},
        ItemStore(std::move(items)),
        0,
        Rng(cfg.seed),
    };

    std::vector<std::int64_t> ids;
    ids.reserve(state.items.size());
    for (const auto& item : state.items.all())
        ids.push_back(item.id);
    state.grid.scatter_items(ids, state.rng);

    state.ants.resize(static_cast<std::size_t>(cfg.n_ants));
    for (auto& ant : state.ants) {
        const int x = static_cast<int>(state.rng.uniform_int(static_cast<std::uint64_t>(cfg.grid_width)));
        const int y = static_cast<int>(state.rng.uniform_int(static_cast<std::uint64_t>(cfg.grid_height)));
        ant.position = grid::GridCoord{ x, y };
    }
    return state;
}

namespace {

grid::GridCoord sample_move(const TransitionDistribution& dist, Rng& rng)
{
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.cells.size(); ++i) {
        acc += dist.probabilities[i];
        if (u < acc)
            return dist.cells[i];
    }
    return dist.cells.back(); // u landed in the rounding tail
}

// Nearest empty cell by growing Chebyshev rings; scan order inside a ring is
// fixed (row-major offsets) so the search is deterministic.
grid::GridCoord nearest_empty_cell(const grid::ToroidalGrid& g, grid::GridCoord from)
{
    if (!g.occupied(from))
        return from;
    const int max_radius = std::max(g.width(), g.height());
    for (int radius = 1; radius <= max_radius; ++radius) {
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != radius)
                    continue;
                const grid::GridCoord c = g.wrap(static_cast<long long>(from.x) + dx,
                    static_cast<long long>(from.y) + dy);
                if (!g.occupied(c))
                    return c;
            }
        }
    }
    throw StateError("no empty cell available");
}

} // namespace

void step(ColonyState& state, const ColonyConfig& cfg)
{
    for (auto& ant : state.ants) {
        ant.position = sample_move(transition_distribution(state.grid, ant.position, cfg.pheromone), state.rng);
        if (!ant.laden() && state.grid.occupied(ant.position)) {
            const std::int64_t id = state.grid.item_at(ant.position);
            const auto s = local_stimuli(state.grid, state.items, ant.position, state.items.get(id),
                cfg.radius, cfg.alpha);
            if (state.rng.uniform01() < pick_probability(s.density, s.similarity, cfg.thresholds))
                ant.carrying = state.grid.remove_item(ant.position);
        } else if (ant.laden() && !state.grid.occupied(ant.position)) {
            const auto s = local_stimuli(state.grid, state.items, ant.position, state.items.get(ant.carrying),
                cfg.radius, cfg.alpha);
            if (state.rng.uniform01() < drop_probability(s.density, s.similarity, cfg.thresholds)) {
                state.grid.place_item(ant.position, ant.carrying);
                ant.carrying = grid::ToroidalGrid::kNoItem;
            }
        }
    }
    evaporate_and_deposit(state.grid, state.ants, cfg.pheromone);
    ++state.step;
}

GridSnapshot take_snapshot(const ColonyState& state)
{
    GridSnapshot snap;
    snap.step = state.step;
    snap.width = state.grid.width();
    snap.height = state.grid.height();
    for (const auto& [coord, id] : state.grid.placed_items())
        snap.entries.push_back({ coord.x, coord.y, id, state.items.get(id).truth_label });
    return snap;
}

RunResult run(const ColonyConfig& cfg, std::vector<DataItem> items)
{
    cfg.validate();
    if (static_cast<long long>(items.size()) > static_cast<long long>(cfg.grid_width) * cfg.grid_height)
        throw CapacityError("more items than grid cells");

    RunResult result{ make_colony(cfg, std::move(items)), {} };

    std::vector<long long> wanted = cfg.snapshot_steps;
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
    auto next_wanted = wanted.begin();
    auto maybe_snapshot = [&](long long at) {
        while (next_wanted != wanted.end() && *next_wanted == at) {
            result.snapshots.push_back(take_snapshot(result.state));
            ++next_wanted;
        }
    };

    maybe_snapshot(0);
    for (long long t = 1; t <= cfg.max_steps; ++t) {
        step(result.state, cfg);
        maybe_snapshot(t);
    }

    // force-drop so extraction never sees carried items
    for (auto& ant : result.state.ants) {
        if (!ant.laden())
            continue;
        const auto cell = nearest_empty_cell(result.state.grid, ant.position);
        result.state.grid.place_item(cell, ant.carrying);
        ant.carrying = grid::ToroidalGrid::kNoItem;
    }
    return result;
}

ClusterAssignment extract_clusters(const grid::ToroidalGrid& g, const ItemStore& items, int link_radius)
{
    if (link_radius < 1)
        throw ValidationError("link radius must be >= 1");
    if (static_cast<std::size_t>(g.item_count()) != items.size())
        throw StateError("cluster extraction requires all items placed on the grid");

    struct Component {
        ClusterSummary summary;
        std::vector<std::int64_t> member_ids;
        std::int64_t min_id = 0;
    };
    std::vector<Component> components;

    const auto placed = g.placed_items();
    std::vector<char> visited(static_cast<std::size_t>(g.cell_count()), 0);
    auto index_of = [&g](grid::GridCoord c) {
        return static_cast<std::size_t>(c.y) * g.width() + c.x;
    };

    for (const auto& [start, start_id] : placed) {
        if (visited[index_of(start)])
            continue;
        Component comp;
        std::vector<grid::GridCoord> stack{ start };
        visited[index_of(start)] = 1;
        while (!stack.empty()) {
            const grid::GridCoord c = stack.back();
            stack.pop_back();
            const std::int64_t id = g.item_at(c);
            comp.member_ids.push_back(id);
            const auto& feats = items.get(id).features;
            if (comp.summary.centroid.empty())
                comp.summary.centroid.assign(feats.size(), 0.0);
            for (std::size_t i = 0; i < feats.size(); ++i)
                comp.summary.centroid[i] += feats[i];
            ++comp.summary.count;
            for (const auto& n : g.neighborhood(c, link_radius)) {
                if (g.occupied(n) && !visited[index_of(n)]) {
                    visited[index_of(n)] = 1;
                    stack.push_back(n);
                }
            }
        }
        for (auto& v : comp.summary.centroid)
            v /= static_cast<double>(comp.summary.count);
        comp.min_id = *std::min_element(comp.member_ids.begin(), comp.member_ids.end());
        components.push_back(std::move(comp));
    }

    // dense ids ordered by centroid so the cluster label tracks feature
    // space monotonically instead of spatial discovery order
    std::sort(components.begin(), components.end(), [](const Component& a, const Component& b) {
        if (a.summary.centroid != b.summary.centroid)
            return a.summary.centroid < b.summary.centroid;
        return a.min_id < b.min_id;
    });

    ClusterAssignment assignment;
    for (std::size_t cluster_id = 0; cluster_id < components.size(); ++cluster_id) {
        for (const std::int64_t id : components[cluster_id].member_ids)
            assignment.cluster_of[id] = static_cast<int>(cluster_id);
        assignment.clusters.push_back(std::move(components[cluster_id].summary));
    }
    return assignment;
}

double purity(const ClusterAssignment& a, const std::map<std::int64_t, int>& truth)
{
    if (a.cluster_of.empty())
        throw ValidationError("empty assignment");
    // per-cluster label histogram
    std::vector<std::map<int, int>> histograms(static_cast<std::size_t>(a.cluster_count()));
    for (const auto& [id, cluster] : a.cluster_of) {
        const auto it = truth.find(id);
        if (it == truth.end())
            throw ValidationError("missing truth label for item " + std::to_string(id));
        ++histograms[static_cast<std::size_t>(cluster)][it->second];
    }
    long long majority_total = 0;
    for (const auto& hist : histograms) {
        int best = 0;
        for (const auto& [label, count] : hist)
            best = std::max(best, count);
        majority_total += best;
    }
    return static_cast<double>(majority_total) / static_cast<double>(a.cluster_of.size());
}

double rand_index(const ClusterAssignment& a, const ClusterAssignment& b)
{
    if (a.cluster_of.size() != b.cluster_of.size() || a.cluster_of.size() < 2)
        throw ValidationError("rand index needs two assignments over the same >=2 items");
    std::vector<std::pair<int, int>> labels;
    labels.reserve(a.cluster_of.size());
    for (const auto& [id, ca] : a.cluster_of) {
        const auto it = b.cluster_of.find(id);
        if (it == b.cluster_of.end())
            throw ValidationError("assignments cover different item ids");
        labels.emplace_back(ca, it->second);
    }
    long long agree = 0;
    long long total = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
            const bool together_a = labels[i].first == labels[j].first;
            const bool together_b = labels[i].second == labels[j].second;
            agree += (together_a == together_b) ? 1 : 0;
            ++total;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

} // namespace antlgp::antcluster
