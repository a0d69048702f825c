#include "antlgp/common.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const char* cli_path()
{
    return ANTLGP_CLI_PATH;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string("\"") + cli_path() + "\" " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "antlgp_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("synth is byte-deterministic")
{
    const auto dir = fresh_dir("synth");
    const auto a = dir / "a.csv";
    const auto b = dir / "b.csv";
    CHECK(run_cli("synth --seed 42 --n 60 --regimes 3 --out " + a.string()) == 0);
    CHECK(run_cli("synth --seed 42 --n 60 --regimes 3 --out " + b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(fs::exists(a.string() + ".manifest"));

    const auto c = dir / "c.csv";
    CHECK(run_cli("synth --seed 43 --n 60 --regimes 3 --out " + c.string()) == 0);
    CHECK(slurp(a) != slurp(c));
}

TEST_CASE("usage errors exit with code 1")
{
    CHECK(run_cli("evolve --out somewhere") == 1);        // missing --in
    CHECK(run_cli("--bogus-flag") == 1);                  // unknown flag
    CHECK(run_cli("") == 1);                              // missing subcommand
}

TEST_CASE("missing input files exit with code 2")
{
    const auto dir = fresh_dir("io");
    CHECK(run_cli("cluster --in " + (dir / "nope.csv").string() + " --out " + (dir / "out").string()) == 2);
}

TEST_CASE("cluster writes snapshots, clusters and a manifest without touching its input")
{
    const auto dir = fresh_dir("cluster");
    const auto data = dir / "d.csv";
    REQUIRE(run_cli("synth --seed 7 --n 40 --regimes 3 --noise 0.05 --out " + data.string()) == 0);
    const std::string input_before = slurp(data);

    const auto cfg = dir / "colony.cfg";
    {
        std::ofstream out(cfg);
        out << "grid_width = 12\ngrid_height = 12\nn_ants = 6\nmax_steps = 2000\n";
    }
    const auto out_dir = dir / "out";
    CHECK(run_cli("cluster --config " + cfg.string() + " --in " + data.string() + " --out "
              + out_dir.string() + " --snapshots 1,100,500,2000 --seed 5")
        == 0);

    CHECK(slurp(data) == input_before);
    CHECK(fs::exists(out_dir / "clusters.csv"));
    CHECK(fs::exists(out_dir / "manifest"));
    int snapshot_files = 0;
    for (const auto& entry : fs::directory_iterator(out_dir / "snapshots"))
        snapshot_files += entry.is_regular_file() ? 1 : 0;
    CHECK(snapshot_files == 4);

    // a snapshot renders to a PGM
    const auto pgm = dir / "snap.pgm";
    CHECK(run_cli("render --in " + (out_dir / "snapshots" / "snapshot_0000100.csv").string()
              + " --out " + pgm.string())
        == 0);
    CHECK(slurp(pgm).rfind("P2\n", 0) == 0);
}

TEST_CASE("evolve runs on a supervised csv")
{
    const auto dir = fresh_dir("evolve");
    const auto data = dir / "sup.csv";
    {
        std::ofstream out(data);
        out << "x0,x1,target\n";
        antlgp::Rng rng(3);
        for (int i = 0; i < 40; ++i) {
            const double x0 = rng.uniform01();
            const double x1 = rng.uniform01();
            out << x0 << ',' << x1 << ',' << (0.5 * x0 + 0.5 * x1) << "\n";
        }
    }
    const auto cfg = dir / "evo.cfg";
    {
        std::ofstream out(cfg);
        out << "population = 16\nn_demes = 2\nmax_tournaments = 300\ntarget_subset_size = 16\n"
            << "max_program_size = 32\n";
    }
    const auto out_dir = dir / "out";
    CHECK(run_cli("evolve --config " + cfg.string() + " --in " + data.string() + " --out "
              + out_dir.string() + " --seed 11")
        == 0);
    CHECK(fs::exists(out_dir / "history.csv"));
    CHECK(fs::exists(out_dir / "best_program.txt"));
    CHECK(fs::exists(out_dir / "summary.csv"));
    CHECK(slurp(out_dir / "summary.csv").rfind("rmse_train,rmse_test,cc_train,cc_test\n", 0) == 0);
    const std::string manifest = slurp(out_dir / "manifest");
    CHECK(manifest.find("command = evolve") != std::string::npos);
    CHECK(manifest.find("seed = 11") != std::string::npos);
}

TEST_CASE("pipeline writes a full report directory")
{
    const auto dir = fresh_dir("pipeline");
    const auto data = dir / "d.csv";
    REQUIRE(run_cli("synth --seed 9 --n 30 --regimes 3 --noise 0.05 --out " + data.string()) == 0);

    const auto cfg = dir / "pipe.cfg";
    {
        std::ofstream out(cfg);
        out << "grid_width = 10\ngrid_height = 10\nn_ants = 5\nmax_steps = 400\n"
            << "population = 16\nn_demes = 2\nmax_tournaments = 200\ntarget_subset_size = 16\n"
            << "max_program_size = 32\nsnapshot_steps = 1,400\n";
    }
    const auto out_dir = dir / "out";
    CHECK(run_cli("pipeline --config " + cfg.string() + " --in " + data.string() + " --out "
              + out_dir.string() + " --seed 4")
        == 0);
    for (const char* name : { "summary.csv", "history.csv", "clusters.csv", "stats.csv",
             "best_program.txt", "manifest" })
        CHECK(fs::exists(out_dir / name));
    CHECK(slurp(out_dir / "summary.csv").find(",paper\n") != std::string::npos);

    // ablation table
    const auto ab_dir = dir / "ablation";
    CHECK(run_cli("pipeline --config " + cfg.string() + " --in " + data.string() + " --out "
              + ab_dir.string() + " --seed 4 --seeds 2 --ablation")
        == 0);
    const auto table = slurp(ab_dir / "ablation.csv");
    CHECK(table.rfind("seed,rmse_with_cluster,rmse_without_cluster\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);
}
