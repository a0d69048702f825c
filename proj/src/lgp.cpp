#include "antlgp/lgp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

namespace antlgp::lgp {

void MachineSpec::validate() const
{
    if (n_inputs < 1)
        throw ValidationError("machine needs at least one input register");
    if (n_calc_registers < 1)
        throw ValidationError("machine needs at least one calculation register");
    if (register_count() > 256)
        throw ValidationError("register count exceeds the 8-bit field range");
    if (constants.empty() || constants.size() > 128)
        throw ValidationError("constant pool must hold 1..128 values");
    for (const double c : constants)
        if (!std::isfinite(c))
            throw ValidationError("constant pool values must be finite");
}

MachineSpec default_machine_spec(int n_inputs, int n_calc_registers, std::uint64_t seed)
{
    MachineSpec m;
    m.n_inputs = n_inputs;
    m.n_calc_registers = n_calc_registers;
    m.constants = { 0.0, 0.5, 1.0, 2.0, std::numbers::pi };
    Rng rng(derive_seed(seed, "constants"));
    for (int i = 0; i < 11; ++i)
        m.constants.push_back(rng.uniform_real(-1.0, 1.0));
    m.validate();
    return m;
}

std::uint32_t encode(const Instruction& ins)
{
    return static_cast<std::uint32_t>(ins.opcode)
        | (static_cast<std::uint32_t>(ins.dest) << 8)
        | (static_cast<std::uint32_t>(ins.src1) << 16)
        | (static_cast<std::uint32_t>(ins.src2_is_constant ? 1u : 0u) << 24)
        | ((static_cast<std::uint32_t>(ins.src2) & 0x7fu) << 25);
}

Instruction decode(std::uint32_t word, const MachineSpec& m)
{
    const auto regs = static_cast<std::uint32_t>(m.register_count());
    Instruction ins;
    ins.opcode = static_cast<Opcode>((word & 0xffu) % kOpcodeCount);
    ins.dest = static_cast<std::uint8_t>(((word >> 8) & 0xffu) % regs);
    ins.src1 = static_cast<std::uint8_t>(((word >> 16) & 0xffu) % regs);
    ins.src2_is_constant = ((word >> 24) & 1u) != 0;
    const std::uint32_t raw = (word >> 25) & 0x7fu;
    const auto bound = ins.src2_is_constant ? static_cast<std::uint32_t>(m.constants.size()) : regs;
    ins.src2 = static_cast<std::uint8_t>(raw % bound);
    return ins;
}

std::vector<Instruction> decode_all(const Program& p, const MachineSpec& m)
{
    std::vector<Instruction> code;
    code.reserve(p.blocks.size());
    for (const std::uint32_t w : p.blocks)
        code.push_back(decode(w, m));
    return code;
}

namespace {

constexpr double kDivisionGuard = 1e-12;

double run_decoded(std::span<const Instruction> code, std::span<const double> inputs,
    const MachineSpec& m, std::vector<double>& regs)
{
    regs.assign(static_cast<std::size_t>(m.register_count()), 0.0);
    std::copy(inputs.begin(), inputs.end(), regs.begin());
    for (const auto& ins : code) {
        const double a = regs[ins.src1];
        const double b = ins.src2_is_constant ? m.constants[ins.src2] : regs[ins.src2];
        double r;
        switch (ins.opcode) {
        case Opcode::add: r = a + b; break;
        case Opcode::sub: r = a - b; break;
        case Opcode::mul: r = a * b; break;
        default: r = std::abs(b) < kDivisionGuard ? 1.0 : a / b; break;
        }
        if (!std::isfinite(r))
            r = 0.0;
        regs[ins.dest] = r;
    }
    return regs[0];
}

} // namespace

double eval(const Program& p, std::span<const double> inputs, const MachineSpec& m)
{
    if (static_cast<int>(inputs.size()) != m.n_inputs)
        throw ValidationError("input vector size does not match machine spec");
    const auto code = decode_all(p, m);
    std::vector<double> regs;
    return run_decoded(code, inputs, m, regs);
}

void SupervisedData::validate() const
{
    if (n_inputs < 1)
        throw ValidationError("supervised data needs at least one input column");
    if (targets.empty())
        throw ValidationError("supervised data is empty");
    if (inputs.size() != targets.size() * static_cast<std::size_t>(n_inputs))
        throw ValidationError("supervised data shape mismatch");
}

SupervisedData parse_supervised_csv(std::istream& in)
{
    SupervisedData d;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    std::size_t n_columns = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#')
            continue;
        auto fields = split_csv_line(stripped);
        if (!header_seen) {
            if (fields.size() < 2)
                throw ParseError("line " + std::to_string(line_no) + ": need at least one input and a target column");
            n_columns = fields.size();
            d.n_inputs = static_cast<int>(n_columns) - 1;
            d.input_names.assign(fields.begin(), fields.end() - 1);
            header_seen = true;
            continue;
        }
        if (fields.size() != n_columns)
            throw ParseError("line " + std::to_string(line_no) + ": expected "
                + std::to_string(n_columns) + " fields, got " + std::to_string(fields.size()));
        for (std::size_t i = 0; i < fields.size(); ++i) {
            char* end = nullptr;
            const double v = std::strtod(fields[i].c_str(), &end);
            if (fields[i].empty() || end != fields[i].c_str() + fields[i].size() || !std::isfinite(v))
                throw ParseError("line " + std::to_string(line_no) + ": bad numeric value '" + fields[i] + "'");
            if (i + 1 < fields.size())
                d.inputs.push_back(v);
            else
                d.targets.push_back(v);
        }
    }
    if (!header_seen)
        throw ParseError("missing supervised CSV header");
    d.validate();
    return d;
}

void write_supervised_csv(const SupervisedData& d, std::ostream& out)
{
    d.validate();
    for (int i = 0; i < d.n_inputs; ++i) {
        if (i)
            out << ',';
        out << (i < static_cast<int>(d.input_names.size()) ? d.input_names[i] : "x" + std::to_string(i));
    }
    out << ",target\n";
    for (std::size_t r = 0; r < d.rows(); ++r) {
        const auto row = d.row(r);
        for (const double v : row)
            out << format_double(v) << ',';
        out << format_double(d.targets[r]) << "\n";
    }
}

double rmse(std::span<const double> predictions, std::span<const double> targets)
{
    if (predictions.size() != targets.size() || targets.empty())
        throw ValidationError("rmse needs two equal-length non-empty vectors");
    double sq = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double e = predictions[i] - targets[i];
        sq += e * e;
    }
    return std::sqrt(sq / static_cast<double>(targets.size()));
}

double fitness(const Program& p, const SupervisedData& data, std::span<const std::size_t> subset,
    const MachineSpec& m)
{
    data.validate();
    if (subset.empty())
        throw ValidationError("fitness subset is empty");
    const auto code = decode_all(p, m);
    std::vector<double> regs;
    double sq = 0.0;
    for (const std::size_t i : subset) {
        const double e = run_decoded(code, data.row(i), m, regs) - data.targets[i];
        sq += e * e;
    }
    return std::sqrt(sq / static_cast<double>(subset.size()));
}

double correlation(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.size() < 2)
        throw ValidationError("correlation needs two equal-length vectors of >= 2 values");
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0;
    double mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0)
        throw ValidationError("correlation undefined for a constant input");
    return cov / std::sqrt(var_a * var_b);
}

void EvolutionConfig::validate() const
{
    if (n_demes < 1)
        throw ValidationError("need at least one deme");
    if (population < 4 * n_demes)
        throw ValidationError("each deme needs at least 4 individuals");
    if (population % n_demes != 0)
        throw ValidationError("population must be divisible by the deme count");
    if (max_tournaments < 0)
        throw ValidationError("max_tournaments must be >= 0");
    if (!(mutation_frequency >= 0.0 && mutation_frequency <= 1.0))
        throw ValidationError("mutation_frequency must lie in [0,1]");
    if (!(crossover_frequency >= 0.0 && crossover_frequency <= 1.0))
        throw ValidationError("crossover_frequency must lie in [0,1]");
    if (max_program_size < 1)
        throw ValidationError("max_program_size must be >= 1");
    if (target_subset_size < 1)
        throw ValidationError("target_subset_size must be >= 1");
    if (migration_interval < 1)
        throw ValidationError("migration_interval must be >= 1");
    if (migration_rate < 0 || migration_rate > population / n_demes)
        throw ValidationError("migration_rate must lie in [0, deme size]");
    if (n_calc_registers < 1)
        throw ValidationError("n_calc_registers must be >= 1");
}

std::pair<Program, Program> crossover(const Program& a, const Program& b, int max_program_size, Rng& rng)
{
    if (a.blocks.empty() || b.blocks.empty())
        throw ValidationError("crossover parents must be non-empty");

    // one block-aligned segment per parent, drawn independently so lengths
    // can drift; segment lengths are capped so recombination moves compact
    // motifs instead of whole program halves. Redraw on the rare cut
    // combination that would empty a child.
    constexpr std::size_t kMaxSegment = 10;
    std::size_t s1a, s2a, s1b, s2b;
    do {
        s1a = rng.uniform_int(a.size() + 1);
        s2a = s1a + rng.uniform_int(std::min(kMaxSegment, a.size() - s1a) + 1);
        s1b = rng.uniform_int(b.size() + 1);
        s2b = s1b + rng.uniform_int(std::min(kMaxSegment, b.size() - s1b) + 1);
    } while ((s2a - s1a == a.size() && s1b == s2b) || (s2b - s1b == b.size() && s1a == s2a));

    auto child = [max_program_size](const Program& base, std::size_t cut1, std::size_t cut2,
                     const Program& donor, std::size_t from, std::size_t to) {
        Program out;
        out.blocks.reserve(cut1 + (to - from) + (base.size() - cut2));
        out.blocks.insert(out.blocks.end(), base.blocks.begin(), base.blocks.begin() + cut1);
        out.blocks.insert(out.blocks.end(), donor.blocks.begin() + from, donor.blocks.begin() + to);
        out.blocks.insert(out.blocks.end(), base.blocks.begin() + cut2, base.blocks.end());
        if (out.blocks.size() > static_cast<std::size_t>(max_program_size))
            out.blocks.resize(static_cast<std::size_t>(max_program_size));
        return out;
    };
    return { child(a, s1a, s2a, b, s1b, s2b), child(b, s1b, s2b, a, s1a, s2a) };
}

Program mutate(const Program& p, Rng& rng)
{
    if (p.blocks.empty())
        throw ValidationError("cannot mutate an empty program");
    Program out = p;
    const std::size_t block = rng.uniform_int(out.blocks.size());
    const std::uint32_t bit = static_cast<std::uint32_t>(rng.uniform_int(32));
    out.blocks[block] ^= (1u << bit);
    return out;
}

namespace {

std::vector<std::size_t> sample_distinct(Rng& rng, std::size_t universe, std::size_t count)
{
    std::vector<std::size_t> idx(universe);
    std::iota(idx.begin(), idx.end(), std::size_t{ 0 });
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(universe - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

std::vector<std::size_t> sample_subset(Rng& rng, std::size_t rows, int subset_size)
{
    return sample_distinct(rng, rows, std::min(rows, static_cast<std::size_t>(subset_size)));
}

} // namespace

std::pair<std::size_t, std::size_t> tournament(Deme& deme, const SupervisedData& train,
    const EvolutionConfig& cfg, const MachineSpec& m)
{
    if (deme.members.size() < 4)
        throw ValidationError("tournament needs a deme of at least 4 individuals");

    const auto subset = sample_subset(deme.rng, train.rows(), cfg.target_subset_size);
    auto contestants = sample_distinct(deme.rng, deme.members.size(), 4);
    for (const std::size_t c : contestants)
        deme.members[c].cached_fitness = fitness(deme.members[c].program, train, subset, m);
    std::sort(contestants.begin(), contestants.end(), [&](std::size_t x, std::size_t y) {
        const double fx = deme.members[x].cached_fitness;
        const double fy = deme.members[y].cached_fitness;
        return fx != fy ? fx < fy : x < y;
    });
    const std::size_t winner1 = contestants[0];
    const std::size_t winner2 = contestants[1];

    Program o1;
    Program o2;
    if (deme.rng.uniform01() < cfg.crossover_frequency) {
        std::tie(o1, o2) = crossover(deme.members[winner1].program, deme.members[winner2].program,
            cfg.max_program_size, deme.rng);
    } else {
        o1 = deme.members[winner1].program;
        o2 = deme.members[winner2].program;
    }
    // geometric repeat: each round applies one single-bit mutation and
    // continues with the mutation frequency, so 0.9 yields ~9 flipped bits
    auto apply_mutation = [&](Program& p) {
        while (deme.rng.uniform01() < cfg.mutation_frequency)
            p = mutate(p, deme.rng);
    };
    apply_mutation(o1);
    apply_mutation(o2);

    deme.members[contestants[2]] = Individual{ std::move(o1), 0.0 };
    deme.members[contestants[2]].cached_fitness = fitness(deme.members[contestants[2]].program, train, subset, m);
    deme.members[contestants[3]] = Individual{ std::move(o2), 0.0 };
    deme.members[contestants[3]].cached_fitness = fitness(deme.members[contestants[3]].program, train, subset, m);
    return { contestants[2], contestants[3] };
}

void migrate(std::vector<Deme>& demes, const EvolutionConfig& cfg)
{
    if (demes.size() < 2 || cfg.migration_rate < 1)
        return;
    const auto rate = static_cast<std::size_t>(cfg.migration_rate);

    auto ranked = [](const Deme& d) {
        std::vector<std::size_t> idx(d.members.size());
        std::iota(idx.begin(), idx.end(), std::size_t{ 0 });
        std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
            const double fx = d.members[x].cached_fitness;
            const double fy = d.members[y].cached_fitness;
            return fx != fy ? fx < fy : x < y;
        });
        return idx;
    };

    // gather all migrants before touching any deme so the ring is symmetric
    std::vector<std::vector<Individual>> migrants(demes.size());
    std::vector<std::vector<std::size_t>> rankings(demes.size());
    for (std::size_t d = 0; d < demes.size(); ++d) {
        rankings[d] = ranked(demes[d]);
        for (std::size_t i = 0; i < rate; ++i)
            migrants[d].push_back(demes[d].members[rankings[d][i]]);
    }
    for (std::size_t d = 0; d < demes.size(); ++d) {
        const std::size_t dest = (d + 1) % demes.size();
        const auto& order = rankings[dest];
        for (std::size_t i = 0; i < rate; ++i)
            demes[dest].members[order[order.size() - 1 - i]] = migrants[d][i];
    }
}

namespace {

constexpr long long kCheckpointInterval = 1000;

double full_rmse(const Program& p, const SupervisedData& data, const MachineSpec& m)
{
    const auto code = decode_all(p, m);
    std::vector<double> regs;
    double sq = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const double e = run_decoded(code, data.row(i), m, regs) - data.targets[i];
        sq += e * e;
    }
    return std::sqrt(sq / static_cast<double>(data.rows()));
}

std::vector<double> predictions_of(const Program& p, const SupervisedData& data, const MachineSpec& m)
{
    const auto code = decode_all(p, m);
    std::vector<double> regs;
    std::vector<double> preds;
    preds.reserve(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i)
        preds.push_back(run_decoded(code, data.row(i), m, regs));
    return preds;
}

double correlation_or_nan(std::span<const double> a, std::span<const double> b)
{
    try {
        return correlation(a, b);
    } catch (const ValidationError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

} // namespace

EvolutionReport evolve(const EvolutionConfig& cfg, const SupervisedData& train,
    const SupervisedData& test, const MachineSpec& m)
{
    cfg.validate();
    m.validate();
    train.validate();
    test.validate();
    if (train.n_inputs != m.n_inputs || test.n_inputs != m.n_inputs)
        throw ValidationError("dataset arity does not match the machine spec");

    const int deme_size = cfg.population / cfg.n_demes;
    const int init_max_len = std::min(32, cfg.max_program_size);

    std::vector<Deme> demes;
    demes.reserve(static_cast<std::size_t>(cfg.n_demes));
    for (int d = 0; d < cfg.n_demes; ++d) {
        Deme deme{ {}, Rng(derive_seed(cfg.seed, "deme", static_cast<std::uint64_t>(d))) };
        deme.members.reserve(static_cast<std::size_t>(deme_size));
        for (int i = 0; i < deme_size; ++i) {
            Program p;
            const std::size_t len = 1 + deme.rng.uniform_int(static_cast<std::uint64_t>(init_max_len));
            p.blocks.reserve(len);
            for (std::size_t b = 0; b < len; ++b)
                p.blocks.push_back(static_cast<std::uint32_t>(deme.rng.next_u64() >> 32));
            deme.members.push_back(Individual{ std::move(p), 0.0 });
        }
        const auto subset = sample_subset(deme.rng, train.rows(), cfg.target_subset_size);
        for (auto& member : deme.members)
            member.cached_fitness = fitness(member.program, train, subset, m);
        demes.push_back(std::move(deme));
    }

    EvolutionReport report;
    report.machine = m;

    auto checkpoint = [&](long long t) {
        double length_sum = 0.0;
        double fitness_sum = 0.0;
        const Individual* best = nullptr;
        std::size_t count = 0;
        for (const auto& deme : demes) {
            for (const auto& member : deme.members) {
                length_sum += static_cast<double>(member.program.size());
                fitness_sum += member.cached_fitness;
                if (!best || member.cached_fitness < best->cached_fitness)
                    best = &member;
                ++count;
            }
        }
        Checkpoint cp;
        cp.tournament = t;
        cp.avg_program_length = length_sum / static_cast<double>(count);
        cp.avg_train_rmse = fitness_sum / static_cast<double>(count);
        cp.best_train_rmse = full_rmse(best->program, train, m);
        cp.test_rmse = full_rmse(best->program, test, m);
        report.history.push_back(cp);
    };

    // saved model: the best full-train program seen at any point of the run;
    // per-tournament subset selection can evict it from the population
    Program saved_model;
    double saved_rmse = std::numeric_limits<double>::infinity();
    auto archive = [&](const Program& p) {
        const double r = full_rmse(p, train, m);
        if (r < saved_rmse) {
            saved_rmse = r;
            saved_model = p;
        }
    };
    for (const auto& deme : demes)
        for (const auto& member : deme.members)
            archive(member.program);

    checkpoint(0);
    for (long long t = 1; t <= cfg.max_tournaments; ++t) {
        auto& deme = demes[static_cast<std::size_t>((t - 1) % cfg.n_demes)];
        const auto replaced = tournament(deme, train, cfg, m);
        archive(deme.members[replaced.first].program);
        archive(deme.members[replaced.second].program);
        if (cfg.n_demes >= 2 && t % cfg.migration_interval == 0)
            migrate(demes, cfg);
        if (t % kCheckpointInterval == 0 || t == cfg.max_tournaments)
            checkpoint(t);
    }

    report.best_program = std::move(saved_model);
    report.rmse_train = saved_rmse;
    report.rmse_test = full_rmse(report.best_program, test, m);
    const auto train_preds = predictions_of(report.best_program, train, m);
    const auto test_preds = predictions_of(report.best_program, test, m);
    report.cc_train = correlation_or_nan(train_preds, train.targets);
    report.cc_test = correlation_or_nan(test_preds, test.targets);
    return report;
}

void write_program(std::ostream& out, const Program& p, const MachineSpec& m)
{
    out << "lgp-program v1\n";
    out << "inputs " << m.n_inputs << "\n";
    out << "calc " << m.n_calc_registers << "\n";
    out << "constants " << m.constants.size();
    char buf[24];
    for (const double c : m.constants) {
        std::snprintf(buf, sizeof buf, " %016llx",
            static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(c)));
        out << buf;
    }
    out << "\n";
    out << "blocks " << p.blocks.size() << "\n";
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%08x", p.blocks[i]);
        out << buf << ((i + 1) % 16 == 0 || i + 1 == p.blocks.size() ? "\n" : " ");
    }
}

std::pair<Program, MachineSpec> read_program(std::istream& in)
{
    std::string token;
    auto expect = [&](const char* word) {
        if (!(in >> token) || token != word)
            throw ParseError(std::string("program file: expected '") + word + "'");
    };
    expect("lgp-program");
    expect("v1");

    MachineSpec m;
    expect("inputs");
    if (!(in >> m.n_inputs))
        throw ParseError("program file: bad input count");
    expect("calc");
    if (!(in >> m.n_calc_registers))
        throw ParseError("program file: bad calc register count");
    expect("constants");
    std::size_t n_constants = 0;
    if (!(in >> n_constants))
        throw ParseError("program file: bad constant count");
    m.constants.clear();
    for (std::size_t i = 0; i < n_constants; ++i) {
        if (!(in >> token))
            throw ParseError("program file: truncated constant pool");
        const std::uint64_t bits = std::strtoull(token.c_str(), nullptr, 16);
        m.constants.push_back(std::bit_cast<double>(bits));
    }
    expect("blocks");
    std::size_t n_blocks = 0;
    if (!(in >> n_blocks))
        throw ParseError("program file: bad block count");
    Program p;
    for (std::size_t i = 0; i < n_blocks; ++i) {
        if (!(in >> token))
            throw ParseError("program file: truncated block list");
        p.blocks.push_back(static_cast<std::uint32_t>(std::strtoul(token.c_str(), nullptr, 16)));
    }
    m.validate();
    if (p.blocks.empty())
        throw ParseError("program file: empty program");
    return { std::move(p), std::move(m) };
}

void write_history_csv(std::ostream& out, const EvolutionReport& report)
{
    out << "tournament,avg_program_length,best_train_rmse,avg_train_rmse,test_rmse\n";
    for (const auto& cp : report.history) {
        out << cp.tournament << ',' << format_double(cp.avg_program_length) << ','
            << format_double(cp.best_train_rmse) << ',' << format_double(cp.avg_train_rmse) << ','
            << format_double(cp.test_rmse) << "\n";
    }
}

} // namespace antlgp::lgp
