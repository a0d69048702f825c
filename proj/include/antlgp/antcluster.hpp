#pragma once

#include "antlgp/common.hpp"
#include "antlgp/grid.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

namespace antlgp::antcluster {

// One clusterable record: a normalized feature vector plus identity.
// truth_label carries the hidden regime id of synthetic data (-1 = none).
struct DataItem {
    std::int64_t id = 0;
    std::vector<double> features;
    int truth_label = -1;
};

struct Ant {
    grid::GridCoord position;
    std::int64_t carrying = grid::ToroidalGrid::kNoItem;
    bool laden() const { return carrying != grid::ToroidalGrid::kNoItem; }
};

// Response-threshold constants: k1 gates picking, k2 gates dropping.
struct ThresholdParams {
    double k1 = 0.1;
    double k2 = 0.3;
    int exponent = 2;
};

// Movement field parameters: deposit per ant-step (doubled when laden),
// multiplicative evaporation, and the weighting. W(s) = (1 + s/(1+delta*s))^beta.
struct PheromoneParams {
    double deposit = 1.0;
    double evaporation = 0.01;
    double beta = 3.5;
    double delta = 0.2;
};

struct ColonyConfig {
    int grid_width = 25;
    int grid_height = 25;
    int n_ants = 14;
    int radius = 1;          // stimulus neighborhood radius
    ThresholdParams thresholds;
    PheromoneParams pheromone;
    double alpha = 0.5;      // similarity scale: dissimilarity >= alpha counts as 0 similar
    long long max_steps = 1000000;
    std::vector<long long> snapshot_steps;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ClusterSummary {
    int count = 0;
    std::vector<double> centroid;
};

struct ClusterAssignment {
    std::map<std::int64_t, int> cluster_of; // item id -> dense cluster id
    std::vector<ClusterSummary> clusters;
    int cluster_count() const { return static_cast<int>(clusters.size()); }
};

// Placed items at one step (carried items are in transit and not included).
struct GridSnapshot {
    long long step = 0;
    int width = 0;
    int height = 0;
    struct Entry {
        int x;
        int y;
        std::int64_t item_id;
        int label; // truth label when known, else -1
    };
    std::vector<Entry> entries;
};

// Id-addressable item storage with deterministic iteration order.
class ItemStore {
public:
    ItemStore() = default;
    explicit ItemStore(std::vector<DataItem> items);

    const DataItem& get(std::int64_t id) const;
    bool contains(std::int64_t id) const { return index_.count(id) != 0; }
    std::size_t size() const { return items_.size(); }
    const std::vector<DataItem>& all() const { return items_; }

private:
    std::vector<DataItem> items_;
    std::unordered_map<std::int64_t, std::size_t> index_;
};

struct ColonyState {
    grid::ToroidalGrid grid;
    std::vector<Ant> ants;
    ItemStore items;
    long long step = 0;
    Rng rng;
};

// Normalized Euclidean distance ||a-b||_2 / sqrt(d), in [0,1] for
// feature vectors inside the unit cube.
double dissimilarity(const DataItem& a, const DataItem& b);

struct Stimuli {
    double density = 0.0;    // occupied fraction of the neighborhood
    double similarity = 0.0; // mean of max(0, 1 - dissimilarity/alpha) over occupied cells
};

Stimuli local_stimuli(const grid::ToroidalGrid& g, const ItemStore& items, grid::GridCoord pos,
    const DataItem& subject, int radius, double alpha);

// (k1/(k1+density))^n * (k1/(k1+similarity))^n: high when sparse and dissimilar.
double pick_probability(double density, double similarity, const ThresholdParams& p);

// (density/(k2+density))^n * (similarity/(k2+similarity))^n: high when crowded and similar.
double drop_probability(double density, double similarity, const ThresholdParams& p);

// One weight per pheromone value; probabilities are these normalized.
std::vector<double> transition_weights(const std::vector<double>& pheromone, const PheromoneParams& p);

struct TransitionDistribution {
    std::vector<grid::GridCoord> cells; // Moore-8 neighbors (fewer on tiny grids)
    std::vector<double> probabilities;  // sums to 1
};

TransitionDistribution transition_distribution(const grid::ToroidalGrid& g, grid::GridCoord pos,
    const PheromoneParams& p);

// Multiplies every cell by (1 - evaporation), then each ant deposits at its
// cell: `deposit` when unladen, 2x when carrying an item.
void evaporate_and_deposit(grid::ToroidalGrid& g, const std::vector<Ant>& ants, const PheromoneParams& p);

// Scatters the items and the ants; step counter starts at 0.
ColonyState make_colony(const ColonyConfig& cfg, std::vector<DataItem> items);

// One colony step: each ant (in roster order) moves by the transition
// distribution, then tries to pick (unladen, occupied cell) or drop (laden,
// empty cell); finally the field evaporates and all ants deposit.
void step(ColonyState& state, const ColonyConfig& cfg);

GridSnapshot take_snapshot(const ColonyState& state);

struct RunResult {
    ColonyState state;
    std::vector<GridSnapshot> snapshots;
};

// Full run: scatter, max_steps steps, snapshots at the requested steps
// (step 0 = the initial scatter). Laden ants force-drop at the nearest empty
// cell on termination so every item ends up placed.
RunResult run(const ColonyConfig& cfg, std::vector<DataItem> items);

// Connected components over occupied cells within Chebyshev distance
// link_radius (toroidal); cluster ids dense from 0 in row-major discovery
// order. All items must be placed.
ClusterAssignment extract_clusters(const grid::ToroidalGrid& g, const ItemStore& items, int link_radius);

// Fraction of items whose cluster's majority truth label matches their own.
double purity(const ClusterAssignment& a, const std::map<std::int64_t, int>& truth);

// Pair-counting agreement between two assignments over the same item ids.
double rand_index(const ClusterAssignment& a, const ClusterAssignment& b);

} // namespace antlgp::antcluster
