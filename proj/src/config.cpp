#include "antlgp/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace antlgp::config {

KeyValues parse_key_values(std::istream& in)
{
    KeyValues kvs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        const std::string body = trim(comment == std::string::npos ? line : line.substr(0, comment));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty key");
        kvs.emplace_back(key, value);
    }
    return kvs;
}

KeyValues load_key_values(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file " + path);
    return parse_key_values(in);
}

namespace {

double to_double(const std::string& key, const std::string& value)
{
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v))
        throw ValidationError("config key '" + key + "': bad number '" + value + "'");
    return v;
}

long long to_int(const std::string& key, const std::string& value)
{
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (value.empty() || end != value.c_str() + value.size())
        throw ValidationError("config key '" + key + "': bad integer '" + value + "'");
    return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value)
{
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (value.empty() || end != value.c_str() + value.size())
        throw ValidationError("config key '" + key + "': bad seed '" + value + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& value)
{
    if (value == "true" || value == "1")
        return true;
    if (value == "false" || value == "0")
        return false;
    throw ValidationError("config key '" + key + "': expected true/false");
}

std::vector<long long> to_int_list(const std::string& key, const std::string& value)
{
    std::vector<long long> out;
    if (trim(value).empty())
        return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(to_int(key, trim(item)));
    return out;
}

std::string join_int_list(const std::vector<long long>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

} // namespace

void apply(pipeline::PipelineConfig& cfg, const KeyValues& kvs)
{
    for (const auto& [key, value] : kvs) {
        auto& colony = cfg.colony;
        auto& evo = cfg.evolution;
        if (key == "grid_width")
            colony.grid_width = static_cast<int>(to_int(key, value));
        else if (key == "grid_height")
            colony.grid_height = static_cast<int>(to_int(key, value));
        else if (key == "n_ants")
            colony.n_ants = static_cast<int>(to_int(key, value));
        else if (key == "radius")
            colony.radius = static_cast<int>(to_int(key, value));
        else if (key == "k1")
            colony.thresholds.k1 = to_double(key, value);
        else if (key == "k2")
            colony.thresholds.k2 = to_double(key, value);
        else if (key == "threshold_exponent")
            colony.thresholds.exponent = static_cast<int>(to_int(key, value));
        else if (key == "deposit")
            colony.pheromone.deposit = to_double(key, value);
        else if (key == "evaporation")
            colony.pheromone.evaporation = to_double(key, value);
        else if (key == "beta")
            colony.pheromone.beta = to_double(key, value);
        else if (key == "delta")
            colony.pheromone.delta = to_double(key, value);
        else if (key == "alpha")
            colony.alpha = to_double(key, value);
        else if (key == "max_steps")
            colony.max_steps = to_int(key, value);
        else if (key == "snapshot_steps")
            colony.snapshot_steps = to_int_list(key, value);
        else if (key == "population")
            evo.population = static_cast<int>(to_int(key, value));
        else if (key == "max_tournaments")
            evo.max_tournaments = to_int(key, value);
        else if (key == "mutation_frequency")
            evo.mutation_frequency = to_double(key, value);
        else if (key == "crossover_frequency")
            evo.crossover_frequency = to_double(key, value);
        else if (key == "n_demes")
            evo.n_demes = static_cast<int>(to_int(key, value));
        else if (key == "max_program_size")
            evo.max_program_size = static_cast<int>(to_int(key, value));
        else if (key == "target_subset_size")
            evo.target_subset_size = static_cast<int>(to_int(key, value));
        else if (key == "migration_interval")
            evo.migration_interval = to_int(key, value);
        else if (key == "migration_rate")
            evo.migration_rate = static_cast<int>(to_int(key, value));
        else if (key == "n_calc_registers")
            evo.n_calc_registers = static_cast<int>(to_int(key, value));
        else if (key == "link_radius")
            cfg.link_radius = static_cast<int>(to_int(key, value));
        else if (key == "horizon")
            cfg.horizon = static_cast<int>(to_int(key, value));
        else if (key == "use_cluster_feature")
            cfg.use_cluster_feature = to_bool(key, value);
        else if (key == "seed")
            cfg.master_seed = to_u64(key, value);
        else if (key == "train_begin" || key == "train_end" || key == "test_begin" || key == "test_end") {
            weblog::SplitSpec spec = cfg.split.value_or(weblog::SplitSpec{});
            const auto v = to_int(key, value);
            if (key == "train_begin")
                spec.train_begin = v;
            else if (key == "train_end")
                spec.train_end = v;
            else if (key == "test_begin")
                spec.test_begin = v;
            else
                spec.test_end = v;
            cfg.split = spec;
        } else
            throw ValidationError("unknown config key '" + key + "'");
    }
}

KeyValues to_key_values(const pipeline::PipelineConfig& cfg)
{
    KeyValues kvs;
    const auto& colony = cfg.colony;
    const auto& evo = cfg.evolution;
    kvs.emplace_back("grid_width", std::to_string(colony.grid_width));
    kvs.emplace_back("grid_height", std::to_string(colony.grid_height));
    kvs.emplace_back("n_ants", std::to_string(colony.n_ants));
    kvs.emplace_back("radius", std::to_string(colony.radius));
    kvs.emplace_back("k1", format_double(colony.thresholds.k1));
    kvs.emplace_back("k2", format_double(colony.thresholds.k2));
    kvs.emplace_back("threshold_exponent", std::to_string(colony.thresholds.exponent));
    kvs.emplace_back("deposit", format_double(colony.pheromone.deposit));
    kvs.emplace_back("evaporation", format_double(colony.pheromone.evaporation));
    kvs.emplace_back("beta", format_double(colony.pheromone.beta));
    kvs.emplace_back("delta", format_double(colony.pheromone.delta));
    kvs.emplace_back("alpha", format_double(colony.alpha));
    kvs.emplace_back("max_steps", std::to_string(colony.max_steps));
    kvs.emplace_back("snapshot_steps", join_int_list(colony.snapshot_steps));
    kvs.emplace_back("population", std::to_string(evo.population));
    kvs.emplace_back("max_tournaments", std::to_string(evo.max_tournaments));
    kvs.emplace_back("mutation_frequency", format_double(evo.mutation_frequency));
    kvs.emplace_back("crossover_frequency", format_double(evo.crossover_frequency));
    kvs.emplace_back("n_demes", std::to_string(evo.n_demes));
    kvs.emplace_back("max_program_size", std::to_string(evo.max_program_size));
    kvs.emplace_back("target_subset_size", std::to_string(evo.target_subset_size));
    kvs.emplace_back("migration_interval", std::to_string(evo.migration_interval));
    kvs.emplace_back("migration_rate", std::to_string(evo.migration_rate));
    kvs.emplace_back("n_calc_registers", std::to_string(evo.n_calc_registers));
    kvs.emplace_back("link_radius", std::to_string(cfg.link_radius));
    kvs.emplace_back("horizon", std::to_string(cfg.horizon));
    kvs.emplace_back("use_cluster_feature", cfg.use_cluster_feature ? "true" : "false");
    kvs.emplace_back("seed", std::to_string(cfg.master_seed));
    if (cfg.split) {
        kvs.emplace_back("train_begin", std::to_string(cfg.split->train_begin));
        kvs.emplace_back("train_end", std::to_string(cfg.split->train_end));
        kvs.emplace_back("test_begin", std::to_string(cfg.split->test_begin));
        kvs.emplace_back("test_end", std::to_string(cfg.split->test_end));
    }
    return kvs;
}

void write_manifest(std::ostream& out, const pipeline::PipelineConfig& resolved, const KeyValues& extras)
{
    for (const auto& [key, value] : extras)
        out << key << " = " << value << "\n";
    for (const auto& [key, value] : to_key_values(resolved))
        out << key << " = " << value << "\n";
    out << "colony_seed = " << resolved.colony.seed << "\n";
    out << "colony_check_seed = " << derive_seed(resolved.master_seed, "colony-check") << "\n";
    out << "evolve_seed = " << resolved.evolution.seed << "\n";
}

} // namespace antlgp::config
