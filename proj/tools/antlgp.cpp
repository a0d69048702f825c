// antlgp command-line tool: synthetic data generation, ant-colony
// clustering, LGP evolution, the full hybrid pipeline and snapshot
// rendering. Diagnostics go to stderr, data to files; exit codes:
// 0 success, 1 validation/usage error, 2 I/O error.

#include "antlgp/config.hpp"
#include "antlgp/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace antlgp;

namespace {

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + path);
    return in;
}

std::ofstream open_output(const fs::path& path)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    return out;
}

void write_kv_file(const fs::path& path, const config::KeyValues& kvs)
{
    auto out = open_output(path);
    for (const auto& [key, value] : kvs)
        out << key << " = " << value << "\n";
}

weblog::Granularity parse_granularity_flag(const std::string& value)
{
    const auto g = weblog::granularity_from_string(value);
    if (!g)
        throw ValidationError("granularity must be 'daily' or 'hourly'");
    return *g;
}

struct CommonOpts {
    std::string config_path;
    std::string in_path;
    std::string out_path;
    std::string granularity;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

pipeline::PipelineConfig load_config(const CommonOpts& opts)
{
    pipeline::PipelineConfig cfg;
    if (!opts.config_path.empty())
        config::apply(cfg, config::load_key_values(opts.config_path));
    if (opts.seed_given)
        cfg.master_seed = opts.seed;
    return cfg;
}

weblog::UsageDataset load_dataset(const CommonOpts& opts)
{
    auto in = open_input(opts.in_path);
    std::optional<weblog::Granularity> override_granularity;
    if (!opts.granularity.empty())
        override_granularity = parse_granularity_flag(opts.granularity);
    return weblog::parse_usage_csv(in, override_granularity);
}

weblog::SplitSpec supervised_split(const pipeline::PipelineConfig& cfg, std::size_t n_examples)
{
    if (cfg.split)
        return *cfg.split;
    const auto n = static_cast<std::int64_t>(n_examples);
    if (n < 2)
        throw ValidationError("need at least 2 supervised examples");
    const std::int64_t train_end = std::clamp<std::int64_t>((n * 8) / 10, 1, n - 1);
    return weblog::SplitSpec{ 1, train_end, train_end + 1, n };
}

// ---------------------------------------------------------------- synth

int run_synth(std::uint64_t seed, int n, int regimes, double noise, const std::string& granularity,
    const std::string& out_path)
{
    const auto g = granularity.empty() ? weblog::Granularity::daily : parse_granularity_flag(granularity);
    const auto dataset = weblog::synth_generate(seed, n, regimes, noise, g);
    {
        auto out = open_output(out_path);
        weblog::write_usage_csv(dataset, out);
    }
    write_kv_file(out_path + ".manifest",
        { { "command", "synth" }, { "seed", std::to_string(seed) }, { "n", std::to_string(n) },
            { "regimes", std::to_string(regimes) }, { "noise", format_double(noise) },
            { "granularity", weblog::to_string(g) }, { "out", out_path } });
    std::cerr << "synth: wrote " << dataset.records.size() << " records to " << out_path << "\n";
    return 0;
}

// -------------------------------------------------------------- cluster

int run_cluster(const CommonOpts& opts, const std::string& snapshot_list)
{
    auto cfg = load_config(opts);
    if (!snapshot_list.empty()) {
        std::vector<long long> steps;
        std::stringstream ss(snapshot_list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string token = trim(item);
            char* end = nullptr;
            const long long step = std::strtoll(token.c_str(), &end, 10);
            if (token.empty() || end != token.c_str() + token.size() || step < 0)
                throw ValidationError("--snapshots expects a comma-separated list of steps");
            steps.push_back(step);
        }
        cfg.colony.snapshot_steps = std::move(steps);
    }

    const auto dataset = load_dataset(opts);
    const auto normalized = weblog::normalize(dataset);
    auto resolved = pipeline::resolve_config(cfg, normalized.granularity);
    resolved.colony.seed = cfg.master_seed; // standalone run: the seed is the colony seed

    const auto result = antcluster::run(resolved.colony, weblog::to_items(normalized));
    const auto assignment = antcluster::extract_clusters(result.state.grid, result.state.items,
        resolved.link_radius);

    const fs::path out_dir(opts.out_path);
    std::error_code ec;
    fs::create_directories(out_dir / "snapshots", ec);
    if (ec)
        throw IoError("cannot create output directory " + out_dir.string());
    {
        auto out = open_output(out_dir / "clusters.csv");
        pipeline::write_clusters_csv(out, antcluster::take_snapshot(result.state), assignment);
    }
    for (const auto& snap : result.snapshots) {
        char name[40];
        std::snprintf(name, sizeof name, "snapshot_%07lld.csv", snap.step);
        auto out = open_output(out_dir / "snapshots" / name);
        pipeline::write_snapshot_csv(out, snap);
    }
    {
        auto out = open_output(out_dir / "manifest");
        config::write_manifest(out, resolved,
            { { "command", "cluster" }, { "in", opts.in_path }, { "out", opts.out_path } });
    }

    std::cerr << "cluster: " << assignment.cluster_count() << " clusters from "
              << result.state.items.size() << " items";
    const auto& items = result.state.items.all();
    if (!items.empty()
        && std::all_of(items.begin(), items.end(), [](const auto& it) { return it.truth_label >= 0; })) {
        std::map<std::int64_t, int> truth;
        for (const auto& item : items)
            truth[item.id] = item.truth_label;
        std::cerr << ", purity " << format_double(antcluster::purity(assignment, truth));
    }
    std::cerr << "\n";
    return 0;
}

// --------------------------------------------------------------- evolve

int run_evolve(const CommonOpts& opts)
{
    auto cfg = load_config(opts);
    cfg.evolution.seed = cfg.master_seed; // standalone run: the seed is the evolution seed

    lgp::SupervisedData data;
    {
        auto in = open_input(opts.in_path);
        data = lgp::parse_supervised_csv(in);
    }
    auto [train, test] = pipeline::split_supervised(data, supervised_split(cfg, data.rows()));
    const auto machine = lgp::default_machine_spec(data.n_inputs, cfg.evolution.n_calc_registers,
        cfg.evolution.seed);
    const auto report = lgp::evolve(cfg.evolution, train, test, machine);

    const fs::path out_dir(opts.out_path);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + out_dir.string());
    {
        auto out = open_output(out_dir / "history.csv");
        lgp::write_history_csv(out, report);
    }
    {
        auto out = open_output(out_dir / "best_program.txt");
        lgp::write_program(out, report.best_program, report.machine);
    }
    {
        auto out = open_output(out_dir / "summary.csv");
        out << "rmse_train,rmse_test,cc_train,cc_test\n";
        out << format_double(report.rmse_train) << ',' << format_double(report.rmse_test) << ','
            << format_double(report.cc_train) << ',' << format_double(report.cc_test) << "\n";
    }
    {
        auto out = open_output(out_dir / "manifest");
        config::write_manifest(out, cfg,
            { { "command", "evolve" }, { "in", opts.in_path }, { "out", opts.out_path } });
    }
    std::cerr << "evolve: train rmse " << format_double(report.rmse_train) << ", test rmse "
              << format_double(report.rmse_test) << "\n";
    return 0;
}

// ------------------------------------------------------------- pipeline

int run_pipeline(const CommonOpts& opts, int n_seeds, bool ablation)
{
    const auto cfg = load_config(opts);
    const auto dataset = load_dataset(opts);
    const fs::path out_dir(opts.out_path);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + out_dir.string());

    if (ablation) {
        const auto table = pipeline::compare_ablation(cfg, dataset, n_seeds);
        {
            auto out = open_output(out_dir / "ablation.csv");
            out << "seed,rmse_with_cluster,rmse_without_cluster\n";
            for (const auto& row : table.rows)
                out << row.master_seed << ',' << format_double(row.rmse_with) << ','
                    << format_double(row.rmse_without) << "\n";
        }
        {
            auto out = open_output(out_dir / "manifest");
            config::write_manifest(out, pipeline::resolve_config(cfg, dataset.granularity),
                { { "command", "pipeline --ablation" }, { "in", opts.in_path },
                    { "out", opts.out_path }, { "seeds", std::to_string(n_seeds) } });
        }
        std::cerr << "ablation: cluster feature wins " << table.wins_with << "/" << table.rows.size()
                  << " (loses " << table.wins_without << ")\n";
        return 0;
    }

    if (n_seeds == 1) {
        const auto report = pipeline::run_antlgp(cfg, dataset);
        pipeline::write_report(out_dir, cfg, report);
        std::cerr << "pipeline: " << report.assignment.cluster_count() << " clusters, test rmse "
                  << format_double(report.rmse_test) << ", cc " << format_double(report.cc_test) << "\n";
        return 0;
    }

    // Multi-seed: one sub-directory per run, aggregate table on top.
    std::vector<pipeline::PipelineReport> reports;
    for (int i = 0; i < n_seeds; ++i) {
        auto sub = cfg;
        sub.master_seed = derive_seed(cfg.master_seed, "seed", static_cast<std::uint64_t>(i));
        reports.push_back(pipeline::run_antlgp(sub, dataset));
        pipeline::write_report(out_dir / ("seed_" + std::to_string(i)), sub, reports.back());
    }
    {
        auto out = open_output(out_dir / "summary.csv");
        out << "method,rmse_train,rmse_test,cc,source\n";
        double mean_train = 0.0;
        double mean_test = 0.0;
        std::size_t best = 0;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            out << "antlgp[seed_" << i << "]," << format_double(r.rmse_train) << ','
                << format_double(r.rmse_test) << ',' << format_double(r.cc_test) << ",run\n";
            mean_train += r.rmse_train;
            mean_test += r.rmse_test;
            if (r.rmse_test < reports[best].rmse_test)
                best = i;
        }
        out << "antlgp[mean]," << format_double(mean_train / reports.size()) << ','
            << format_double(mean_test / reports.size()) << ",,run\n";
        out << "antlgp[best]," << format_double(reports[best].rmse_train) << ','
            << format_double(reports[best].rmse_test) << ',' << format_double(reports[best].cc_test)
            << ",run\n";
        for (const auto& row : pipeline::literature_rows(dataset.granularity))
            out << row.method << ',' << format_double(row.rmse_train) << ','
                << format_double(row.rmse_test) << ',' << format_double(row.cc) << ",paper\n";
    }
    {
        auto out = open_output(out_dir / "manifest");
        config::write_manifest(out, pipeline::resolve_config(cfg, dataset.granularity),
            { { "command", "pipeline" }, { "in", opts.in_path }, { "out", opts.out_path },
                { "seeds", std::to_string(n_seeds) } });
    }
    std::cerr << "pipeline: " << n_seeds << " seeds done\n";
    return 0;
}

// --------------------------------------------------------------- render

int run_render(const std::string& in_path, const std::string& out_path, int scale)
{
    antcluster::GridSnapshot snap;
    {
        auto in = open_input(in_path);
        snap = pipeline::read_snapshot_csv(in);
    }
    {
        auto out = open_output(out_path);
        pipeline::write_snapshot_pgm(out, snap, scale);
    }
    write_kv_file(out_path + ".manifest",
        { { "command", "render" }, { "in", in_path }, { "out", out_path },
            { "scale", std::to_string(scale) } });
    std::cerr << "render: " << snap.entries.size() << " items onto " << snap.width << "x"
              << snap.height << " grid\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{ "ant-colony clustering + linear genetic programming toolkit for "
                  "web traffic trend analysis" };
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic usage dataset");
    std::uint64_t synth_seed = 1;
    int synth_n = 60;
    int synth_regimes = 3;
    double synth_noise = 0.05;
    std::string synth_granularity;
    std::string synth_out;
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--n", synth_n, "number of records");
    synth->add_option("--regimes", synth_regimes, "number of traffic regimes");
    synth->add_option("--noise", synth_noise, "noise fraction in [0,1)");
    synth->add_option("--granularity", synth_granularity, "daily or hourly");
    synth->add_option("--out", synth_out, "output CSV path")->required();

    auto add_common = [](CLI::App* cmd, CommonOpts& opts, bool with_granularity) {
        cmd->add_option("--config", opts.config_path, "flat key = value config file");
        cmd->add_option("--in", opts.in_path, "input CSV")->required();
        cmd->add_option("--out", opts.out_path, "output directory")->required();
        cmd->add_option("--seed", opts.seed, "seed override")->each([&opts](const std::string&) {
            opts.seed_given = true;
        });
        if (with_granularity)
            cmd->add_option("--granularity", opts.granularity, "override dataset granularity");
    };

    // cluster
    auto* cluster = app.add_subcommand("cluster", "run the ant colony and extract clusters");
    CommonOpts cluster_opts;
    std::string cluster_snapshots;
    add_common(cluster, cluster_opts, true);
    cluster->add_option("--snapshots", cluster_snapshots, "comma-separated snapshot steps");

    // evolve
    auto* evolve = app.add_subcommand("evolve", "evolve a predictor on a supervised CSV");
    CommonOpts evolve_opts;
    add_common(evolve, evolve_opts, false);

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "run the full clustering + evolution hybrid");
    CommonOpts pipe_opts;
    int pipe_seeds = 1;
    bool pipe_ablation = false;
    add_common(pipe, pipe_opts, true);
    pipe->add_option("--seeds", pipe_seeds, "number of master seeds")->check(CLI::PositiveNumber);
    pipe->add_flag("--ablation", pipe_ablation, "compare with/without the cluster feature");

    // render
    auto* render = app.add_subcommand("render", "convert a snapshot CSV to a PGM image");
    std::string render_in;
    std::string render_out;
    int render_scale = 8;
    render->add_option("--in", render_in, "snapshot CSV")->required();
    render->add_option("--out", render_out, "output PGM path")->required();
    render->add_option("--scale", render_scale, "pixels per grid cell")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << "run '" << (argc > 0 ? argv[0] : "antlgp") << " --help' for usage\n";
        return 1;
    }

    try {
        if (app.got_subcommand(synth))
            return run_synth(synth_seed, synth_n, synth_regimes, synth_noise, synth_granularity, synth_out);
        if (app.got_subcommand(cluster))
            return run_cluster(cluster_opts, cluster_snapshots);
        if (app.got_subcommand(evolve))
            return run_evolve(evolve_opts);
        if (app.got_subcommand(pipe))
            return run_pipeline(pipe_opts, pipe_seeds, pipe_ablation);
        if (app.got_subcommand(render))
            return run_render(render_in, render_out, render_scale);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
