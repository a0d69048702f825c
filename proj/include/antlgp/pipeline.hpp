#pragma once

#include "antlgp/antcluster.hpp"
#include "antlgp/common.hpp"
#include "antlgp/lgp.hpp"
#include "antlgp/weblog.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace antlgp::pipeline {

// Full hybrid configuration. Colony grid/ant counts of 0 mean "pick the
// preset for the dataset granularity": 25x25 with 14 ants for daily data,
// 45x45 with 48 ants for hourly data. Stage seeds are derived from the
// master seed, so the colony and evolution seeds in the sub-configs are
// overwritten at run time.
struct PipelineConfig {
    antcluster::ColonyConfig colony;
    lgp::EvolutionConfig evolution;
    std::optional<weblog::SplitSpec> split; // default: leading 80% / trailing 20% of examples
    int link_radius = 1;
    int horizon = 1;
    bool use_cluster_feature = true;
    std::uint64_t master_seed = 1;
};

struct PipelineReport {
    antcluster::ClusterAssignment assignment;
    std::vector<int> cluster_sizes;
    double purity = 0.0;     // NaN when no ground truth is available
    double rand_index = 0.0; // agreement between two clustering seeds
    std::vector<antcluster::GridSnapshot> snapshots;
    weblog::Granularity granularity = weblog::Granularity::daily;
    lgp::EvolutionReport evolution;
    double rmse_train = 0.0;
    double rmse_test = 0.0;
    double cc_train = 0.0;
    double cc_test = 0.0;
};

// Sliding-window supervision: inputs are (requests, bytes, index[, cluster])
// of the record at position t, the target is the requests value at t+horizon.
lgp::SupervisedData make_supervised(const weblog::UsageDataset& d, int horizon, bool include_cluster);

// Positional split of supervised examples (1-based inclusive ranges).
std::pair<lgp::SupervisedData, lgp::SupervisedData> split_supervised(const lgp::SupervisedData& d,
    const weblog::SplitSpec& s);

// Resolves granularity presets and derived stage seeds into a concrete config.
PipelineConfig resolve_config(const PipelineConfig& cfg, weblog::Granularity granularity);

// The full hybrid: normalize -> colony run -> cluster extraction ->
// cluster-major reindex -> supervised windowing -> split -> evolve.
// The cluster stage always runs; use_cluster_feature only controls whether
// the cluster column enters the supervised inputs.
PipelineReport run_antlgp(const PipelineConfig& cfg, const weblog::UsageDataset& d);

struct AblationRow {
    std::uint64_t master_seed = 0;
    double rmse_with = 0.0;
    double rmse_without = 0.0;
};

struct AblationTable {
    std::vector<AblationRow> rows;
    int wins_with = 0;    // strictly lower test RMSE with the cluster feature
    int wins_without = 0;
};

// Runs the hybrid with and without the cluster feature for n_seeds derived
// master seeds; both arms of one seed share the clustering stage output.
AblationTable compare_ablation(const PipelineConfig& cfg, const weblog::UsageDataset& d, int n_seeds);

// Literature comparison rows embedded for side-by-side reporting.
struct LiteratureRow {
    const char* method;
    double rmse_train;
    double rmse_test;
    double cc;
};
const std::vector<LiteratureRow>& literature_rows(weblog::Granularity g);

// Report directory: summary.csv, history.csv, clusters.csv, best_program.txt,
// manifest and snapshots/. Byte-deterministic for a fixed config and dataset.
void write_report(const std::filesystem::path& dir, const PipelineConfig& cfg, const PipelineReport& report);

void write_snapshot_csv(std::ostream& out, const antcluster::GridSnapshot& snap);
antcluster::GridSnapshot read_snapshot_csv(std::istream& in);

// Final placement with cluster ids: item_id,x,y,cluster_id,truth.
void write_clusters_csv(std::ostream& out, const antcluster::GridSnapshot& final_state,
    const antcluster::ClusterAssignment& assignment);

// PGM render of a snapshot: occupied cells shaded by label, scale pixels per cell.
void write_snapshot_pgm(std::ostream& out, const antcluster::GridSnapshot& snap, int scale = 8);

} // namespace antlgp::pipeline
