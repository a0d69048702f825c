#pragma once

#include "antlgp/antcluster.hpp"
#include "antlgp/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace antlgp::weblog {

enum class Granularity { daily, hourly };

std::string to_string(Granularity g);
std::optional<Granularity> granularity_from_string(std::string_view s);

struct FeatureRange {
    double min = 0.0;
    double max = 0.0;
};

// Original (min,max) per feature, recorded at normalization time.
struct FeatureRanges {
    FeatureRange requests;
    FeatureRange bytes;
    FeatureRange index;
};

struct UsageRecord {
    std::int64_t index = 0;      // unique sequence position, most recent highest
    std::string label;           // e.g. "Mon" or "14:00"
    double requests = 0.0;       // raw count, or [0,1] once normalized
    double bytes = 0.0;
    double index_feature = 0.0;  // normalized index, set by normalize()
    int cluster = -1;            // set by reindex_by_cluster
    double cluster_feature = 0.0;
    int truth_label = -1;        // synthetic regime id, -1 = none
};

struct UsageDataset {
    std::vector<UsageRecord> records;
    Granularity granularity = Granularity::daily;
    std::optional<FeatureRanges> feature_ranges; // present iff normalized
    int num_clusters = 0;                        // > 0 after reindex_by_cluster

    bool normalized() const { return feature_ranges.has_value(); }
};

// Two inclusive index intervals; test must follow train.
struct SplitSpec {
    std::int64_t train_begin = 0;
    std::int64_t train_end = 0;
    std::int64_t test_begin = 0;
    std::int64_t test_end = 0;
};

// CSV with header `index,label,requests,bytes` and optional trailing
// `truth` / `cluster` columns; `# granularity: hourly|daily` comment line
// honored unless the override is given.
UsageDataset parse_usage_csv(std::istream& in, std::optional<Granularity> override_granularity = {});
void write_usage_csv(const UsageDataset& d, std::ostream& out);

// Min-max scaling of requests, bytes and index into [0,1]; constant features
// map to 0. Requires >= 2 records and a not-yet-normalized dataset.
UsageDataset normalize(const UsageDataset& d);

// Inverse of normalize() for the requests feature.
double denormalize_requests(const FeatureRanges& ranges, double value);

// Re-sorts records by (cluster id, previous index), reassigns indexes to the
// new sequence positions 1..N, renormalizes the index feature, and attaches
// the cluster id as one scalar feature in [0,1].
UsageDataset reindex_by_cluster(const UsageDataset& d, const antcluster::ClusterAssignment& a);

// Partition by index interval; the two ranges must be disjoint, in order,
// within bounds, and together cover every record.
std::pair<UsageDataset, UsageDataset> split(const UsageDataset& d, const SplitSpec& s);

// Deterministic synthetic substitute for real log-analyzer output: `regimes`
// traffic regimes assigned cyclically over the sequence, each with its own
// base level and slope for requests and bytes, plus additive uniform noise.
// The regime id is recorded as the hidden ground-truth label.
UsageDataset synth_generate(std::uint64_t seed, int n, int regimes, double noise,
    Granularity granularity = Granularity::daily);

// Items for the clustering stage: (requests, bytes) of a normalized dataset,
// item id = record index.
std::vector<antcluster::DataItem> to_items(const UsageDataset& d);

} // namespace antlgp::weblog
