#include "antlgp/pipeline.hpp"

#include "antlgp/config.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace antlgp::pipeline {

namespace {

// Re-throws stage failures with the stage name prepended, preserving the
// exception type so the CLI exit-code mapping still applies.
template <typename F>
auto stage(const char* name, F&& fn) -> decltype(fn())
{
    const auto tag = [name](const std::exception& e) {
        return std::string("stage ") + name + ": " + e.what();
    };
    try {
        return fn();
    } catch (const ParseError& e) {
        throw ParseError(tag(e));
    } catch (const CapacityError& e) {
        throw CapacityError(tag(e));
    } catch (const ValidationError& e) {
        throw ValidationError(tag(e));
    } catch (const StateError& e) {
        throw StateError(tag(e));
    } catch (const IoError& e) {
        throw IoError(tag(e));
    }
}

} // namespace

lgp::SupervisedData make_supervised(const weblog::UsageDataset& d, int horizon, bool include_cluster)
{
    if (horizon < 1)
        throw ValidationError("forecast horizon must be >= 1");
    if (static_cast<long long>(d.records.size()) <= horizon)
        throw ValidationError("dataset too small for forecast horizon "
            + std::to_string(horizon));
    if (!d.normalized())
        throw StateError("supervised windowing requires a normalized dataset");
    if (include_cluster && d.num_clusters < 1)
        throw ValidationError("dataset carries no cluster information");

    lgp::SupervisedData out;
    out.input_names = { "requests", "bytes", "index" };
    if (include_cluster)
        out.input_names.push_back("cluster");
    out.n_inputs = static_cast<int>(out.input_names.size());

    const std::size_t n_examples = d.records.size() - static_cast<std::size_t>(horizon);
    out.inputs.reserve(n_examples * static_cast<std::size_t>(out.n_inputs));
    out.targets.reserve(n_examples);
    for (std::size_t t = 0; t < n_examples; ++t) {
        const auto& rec = d.records[t];
        out.inputs.push_back(rec.requests);
        out.inputs.push_back(rec.bytes);
        out.inputs.push_back(rec.index_feature);
        if (include_cluster)
            out.inputs.push_back(rec.cluster_feature);
        out.targets.push_back(d.records[t + static_cast<std::size_t>(horizon)].requests);
    }
    return out;
}

std::pair<lgp::SupervisedData, lgp::SupervisedData> split_supervised(const lgp::SupervisedData& d,
    const weblog::SplitSpec& s)
{
    d.validate();
    const auto n = static_cast<std::int64_t>(d.rows());
    if (s.train_begin > s.train_end || s.test_begin > s.test_end)
        throw ValidationError("split ranges must be non-empty");
    if (s.test_begin <= s.train_end)
        throw ValidationError("test range must follow the train range");
    if (s.train_begin < 1 || s.test_end > n)
        throw ValidationError("split ranges out of bounds for " + std::to_string(n) + " examples");
    if (s.train_begin != 1 || s.test_begin != s.train_end + 1 || s.test_end != n)
        throw ValidationError("split ranges must cover every example");

    auto take = [&](std::int64_t begin, std::int64_t end) {
        lgp::SupervisedData part;
        part.input_names = d.input_names;
        part.n_inputs = d.n_inputs;
        for (std::int64_t pos = begin; pos <= end; ++pos) {
            const auto row = d.row(static_cast<std::size_t>(pos - 1));
            part.inputs.insert(part.inputs.end(), row.begin(), row.end());
            part.targets.push_back(d.targets[static_cast<std::size_t>(pos - 1)]);
        }
        return part;
    };
    return { take(s.train_begin, s.train_end), take(s.test_begin, s.test_end) };
}

PipelineConfig resolve_config(const PipelineConfig& cfg, weblog::Granularity granularity)
{
    PipelineConfig out = cfg;
    if (out.colony.grid_width == 0 || out.colony.grid_height == 0) {
        out.colony.grid_width = granularity == weblog::Granularity::daily ? 25 : 45;
        out.colony.grid_height = out.colony.grid_width;
    }
    if (out.colony.n_ants == 0)
        out.colony.n_ants = granularity == weblog::Granularity::daily ? 14 : 48;
    out.colony.seed = derive_seed(out.master_seed, "colony");
    out.evolution.seed = derive_seed(out.master_seed, "evolve");
    return out;
}

namespace {

struct ClusterStage {
    antcluster::RunResult colony;
    antcluster::ClusterAssignment assignment;
    std::vector<int> cluster_sizes;
    double purity;
    weblog::UsageDataset reindexed;
};

ClusterStage cluster_stage(const PipelineConfig& resolved, const weblog::UsageDataset& normalized)
{
    auto colony = stage("cluster", [&] {
        return antcluster::run(resolved.colony, weblog::to_items(normalized));
    });
    auto assignment = stage("extract", [&] {
        return antcluster::extract_clusters(colony.state.grid, colony.state.items,
            resolved.link_radius);
    });
    std::vector<int> cluster_sizes;
    for (const auto& cluster : assignment.clusters)
        cluster_sizes.push_back(cluster.count);

    double purity = std::numeric_limits<double>::quiet_NaN();
    const auto& items = colony.state.items.all();
    if (!items.empty()
        && std::all_of(items.begin(), items.end(), [](const auto& it) { return it.truth_label >= 0; })) {
        std::map<std::int64_t, int> truth;
        for (const auto& item : items)
            truth[item.id] = item.truth_label;
        purity = antcluster::purity(assignment, truth);
    }

    auto reindexed = stage("reindex", [&] {
        return weblog::reindex_by_cluster(normalized, assignment);
    });
    return ClusterStage{ std::move(colony), std::move(assignment), std::move(cluster_sizes),
        purity, std::move(reindexed) };
}

weblog::SplitSpec default_split(std::size_t n_examples)
{
    if (n_examples < 2)
        throw ValidationError("need at least 2 supervised examples to split");
    const auto n = static_cast<std::int64_t>(n_examples);
    std::int64_t train_end = (n * 8) / 10;
    train_end = std::clamp<std::int64_t>(train_end, 1, n - 1);
    return weblog::SplitSpec{ 1, train_end, train_end + 1, n };
}

lgp::EvolutionReport evolve_stage(const PipelineConfig& resolved, const weblog::UsageDataset& reindexed,
    bool include_cluster)
{
    const auto supervised = stage("supervise", [&] {
        return make_supervised(reindexed, resolved.horizon, include_cluster);
    });
    const auto split_spec = resolved.split ? *resolved.split : default_split(supervised.rows());
    auto [train, test] = stage("split", [&] { return split_supervised(supervised, split_spec); });
    return stage("evolve", [&] {
        const auto machine = lgp::default_machine_spec(supervised.n_inputs,
            resolved.evolution.n_calc_registers, resolved.evolution.seed);
        return lgp::evolve(resolved.evolution, train, test, machine);
    });
}

} // namespace

PipelineReport run_antlgp(const PipelineConfig& cfg, const weblog::UsageDataset& d)
{
    const auto resolved = resolve_config(cfg, d.granularity);
    const auto normalized = d.normalized() ? d : stage("normalize", [&] { return weblog::normalize(d); });

    auto clustering = cluster_stage(resolved, normalized);

    // second clustering run on an independent seed, reported as a
    // stability check (membership agreement between the two runs)
    const auto check = stage("cluster-check", [&] {
        auto colony_cfg = resolved.colony;
        colony_cfg.seed = derive_seed(resolved.master_seed, "colony-check");
        colony_cfg.snapshot_steps.clear();
        const auto rerun = antcluster::run(colony_cfg, weblog::to_items(normalized));
        return antcluster::extract_clusters(rerun.state.grid, rerun.state.items, resolved.link_radius);
    });

    PipelineReport report;
    report.granularity = normalized.granularity;
    report.rand_index = antcluster::rand_index(clustering.assignment, check);
    report.purity = clustering.purity;
    report.cluster_sizes = std::move(clustering.cluster_sizes);
    report.snapshots = std::move(clustering.colony.snapshots);
    report.snapshots.push_back(antcluster::take_snapshot(clustering.colony.state));
    report.assignment = std::move(clustering.assignment);

    report.evolution = evolve_stage(resolved, clustering.reindexed,
        resolved.use_cluster_feature && clustering.reindexed.num_clusters > 0);
    report.rmse_train = report.evolution.rmse_train;
    report.rmse_test = report.evolution.rmse_test;
    report.cc_train = report.evolution.cc_train;
    report.cc_test = report.evolution.cc_test;
    return report;
}

AblationTable compare_ablation(const PipelineConfig& cfg, const weblog::UsageDataset& d, int n_seeds)
{
    if (n_seeds < 1)
        throw ValidationError("need at least one comparison seed");
    const auto normalized = d.normalized() ? d : stage("normalize", [&] { return weblog::normalize(d); });

    AblationTable table;
    table.rows.resize(static_cast<std::size_t>(n_seeds));

    std::atomic<std::size_t> next{ 0 };
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= table.rows.size())
                return;
            try {
                PipelineConfig sub = cfg;
                sub.master_seed = derive_seed(cfg.master_seed, "ablation", i);
                const auto resolved = resolve_config(sub, normalized.granularity);
                const auto clustering = cluster_stage(resolved, normalized);
                const bool has_clusters = clustering.reindexed.num_clusters > 0;
                const auto with = evolve_stage(resolved, clustering.reindexed, has_clusters);
                const auto without = evolve_stage(resolved, clustering.reindexed, false);
                table.rows[i] = AblationRow{ sub.master_seed, with.rmse_test, without.rmse_test };
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                return;
            }
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto n_workers = std::min<std::size_t>(hw, table.rows.size());
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w)
        threads.emplace_back(worker);
    for (auto& t : threads)
        t.join();
    if (failure)
        std::rethrow_exception(failure);

    for (const auto& row : table.rows) {
        if (row.rmse_with < row.rmse_without)
            ++table.wins_with;
        else if (row.rmse_without < row.rmse_with)
            ++table.wins_without;
    }
    return table;
}

const std::vector<LiteratureRow>& literature_rows(weblog::Granularity g)
{
    static const std::vector<LiteratureRow> daily = {
        { "ANT-LGP", 0.0191, 0.0291, 0.9963 },
        { "i-Miner", 0.0044, 0.0053, 0.9967 },
        { "ANN", 0.0345, 0.0481, 0.9292 },
        { "LGP", 0.0543, 0.0749, 0.9315 },
    };
    static const std::vector<LiteratureRow> hourly = {
        { "ANT-LGP", 0.2561, 0.035, 0.9921 },
        { "i-Miner", 0.0012, 0.0041, 0.9981 },
        { "SOM-ANN", 0.0546, 0.0639, 0.9493 },
        { "SOM-LGP", 0.0654, 0.0516, 0.9446 },
    };
    return g == weblog::Granularity::daily ? daily : hourly;
}

void write_snapshot_csv(std::ostream& out, const antcluster::GridSnapshot& snap)
{
    out << "# grid: " << snap.width << "x" << snap.height << "\n";
    out << "step,x,y,item_id,label\n";
    for (const auto& e : snap.entries)
        out << snap.step << ',' << e.x << ',' << e.y << ',' << e.item_id << ',' << e.label << "\n";
}

antcluster::GridSnapshot read_snapshot_csv(std::istream& in)
{
    antcluster::GridSnapshot snap;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty())
            continue;
        if (stripped[0] == '#') {
            const std::string comment = trim(stripped.substr(1));
            if (comment.rfind("grid:", 0) == 0) {
                if (std::sscanf(comment.c_str(), "grid: %dx%d", &snap.width, &snap.height) != 2)
                    throw ParseError("line " + std::to_string(line_no) + ": bad grid comment");
            }
            continue;
        }
        if (!header_seen) {
            if (stripped != "step,x,y,item_id,label")
                throw ParseError("line " + std::to_string(line_no)
                    + ": expected header 'step,x,y,item_id,label'");
            header_seen = true;
            continue;
        }
        antcluster::GridSnapshot::Entry e{};
        long long step = 0;
        long long item = 0;
        if (std::sscanf(stripped.c_str(), "%lld,%d,%d,%lld,%d", &step, &e.x, &e.y, &item, &e.label) != 5)
            throw ParseError("line " + std::to_string(line_no) + ": bad snapshot row");
        e.item_id = item;
        snap.step = step;
        snap.entries.push_back(e);
    }
    if (!header_seen)
        throw ParseError("missing snapshot header");
    if (snap.width < 1 || snap.height < 1)
        throw ParseError("snapshot file lacks a '# grid: WxH' line");
    for (const auto& e : snap.entries)
        if (e.x < 0 || e.x >= snap.width || e.y < 0 || e.y >= snap.height)
            throw ValidationError("snapshot entry outside the grid");
    return snap;
}

void write_clusters_csv(std::ostream& out, const antcluster::GridSnapshot& final_state,
    const antcluster::ClusterAssignment& assignment)
{
    out << "item_id,x,y,cluster_id,truth\n";
    for (const auto& e : final_state.entries) {
        const auto it = assignment.cluster_of.find(e.item_id);
        const int cluster = it == assignment.cluster_of.end() ? -1 : it->second;
        out << e.item_id << ',' << e.x << ',' << e.y << ',' << cluster << ',' << e.label << "\n";
    }
}

void write_snapshot_pgm(std::ostream& out, const antcluster::GridSnapshot& snap, int scale)
{
    if (scale < 1)
        throw ValidationError("pgm scale must be >= 1");
    const int w = snap.width * scale;
    const int h = snap.height * scale;
    std::vector<int> shade(static_cast<std::size_t>(snap.width) * snap.height, 255);
    for (const auto& e : snap.entries) {
        const int gray = e.label < 0 ? 0 : 30 + (e.label * 83) % 180;
        shade[static_cast<std::size_t>(e.y) * snap.width + e.x] = gray;
    }
    out << "P2\n" << w << " " << h << "\n255\n";
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x)
            out << shade[static_cast<std::size_t>(y / scale) * snap.width + (x / scale)]
                << (x + 1 == w ? "\n" : " ");
    }
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    return out;
}

} // namespace

void write_report(const std::filesystem::path& dir, const PipelineConfig& cfg, const PipelineReport& report)
{
    std::error_code ec;
    std::filesystem::create_directories(dir / "snapshots", ec);
    if (ec)
        throw IoError("cannot create report directory " + dir.string());

    const auto resolved = resolve_config(cfg, report.granularity);

    {
        auto out = open_for_write(dir / "summary.csv");
        out << "method,rmse_train,rmse_test,cc,source\n";
        out << "antlgp," << format_double(report.rmse_train) << ',' << format_double(report.rmse_test)
            << ',' << format_double(report.cc_test) << ",run\n";
        for (const auto& row : literature_rows(report.granularity))
            out << row.method << ',' << format_double(row.rmse_train) << ','
                << format_double(row.rmse_test) << ',' << format_double(row.cc) << ",paper\n";
    }
    {
        auto out = open_for_write(dir / "history.csv");
        lgp::write_history_csv(out, report.evolution);
    }
    {
        auto out = open_for_write(dir / "clusters.csv");
        write_clusters_csv(out, report.snapshots.back(), report.assignment);
    }
    {
        auto out = open_for_write(dir / "best_program.txt");
        lgp::write_program(out, report.evolution.best_program, report.evolution.machine);
    }
    {
        auto out = open_for_write(dir / "stats.csv");
        out << "key,value\n";
        out << "n_clusters," << report.assignment.cluster_count() << "\n";
        out << "purity," << format_double(report.purity) << "\n";
        out << "rand_index," << format_double(report.rand_index) << "\n";
        out << "rmse_train," << format_double(report.rmse_train) << "\n";
        out << "rmse_test," << format_double(report.rmse_test) << "\n";
        out << "cc_train," << format_double(report.cc_train) << "\n";
        out << "cc_test," << format_double(report.cc_test) << "\n";
    }
    for (const auto& snap : report.snapshots) {
        char name[40];
        std::snprintf(name, sizeof name, "snapshot_%07lld.csv", snap.step);
        auto out = open_for_write(dir / "snapshots" / name);
        write_snapshot_csv(out, snap);
    }
    {
        auto out = open_for_write(dir / "manifest");
        config::write_manifest(out, resolved, {});
    }
}

} // namespace antlgp::pipeline
