#pragma once

#include "antlgp/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace antlgp::lgp {

enum class Opcode : std::uint8_t { add = 0, sub = 1, mul = 2, div = 3 };
constexpr int kOpcodeCount = 4;

// One register-machine instruction: dest = src1 <op> src2, where src2 reads
// a register or a constant-pool entry.
struct Instruction {
    Opcode opcode = Opcode::add;
    std::uint8_t dest = 0;
    std::uint8_t src1 = 0;
    bool src2_is_constant = false;
    std::uint8_t src2 = 0;

    bool operator==(const Instruction&) const = default;
};

// Register file layout: r[0..n_inputs) hold the inputs, then
// n_calc_registers scratch registers initialized to 0. r0 is the output.
struct MachineSpec {
    int n_inputs = 1;
    int n_calc_registers = 4;
    std::vector<double> constants;

    int register_count() const { return n_inputs + n_calc_registers; }
    void validate() const;
};

// Builds the default constant pool: {0, 0.5, 1, 2, pi} plus 11 uniform
// reals in [-1,1] drawn from the seed.
MachineSpec default_machine_spec(int n_inputs, int n_calc_registers, std::uint64_t seed);

// Bit layout from bit 0: opcode 8, dest 8, src1 8, src2_kind 1, src2 7.
// decode() is total: out-of-range fields are reduced modulo the machine
// bounds, so any 32-bit word (e.g. after a bit mutation) is a valid
// instruction. encode(decode(w)) is the stable canonical form of w.
std::uint32_t encode(const Instruction& ins);
Instruction decode(std::uint32_t word, const MachineSpec& m);

// Genome: an ordered list of 32-bit instruction blocks.
struct Program {
    std::vector<std::uint32_t> blocks;

    std::size_t size() const { return blocks.size(); }
    bool operator==(const Program&) const = default;
};

std::vector<Instruction> decode_all(const Program& p, const MachineSpec& m);

// Executes the program and returns r0. Total: division by |d| < 1e-12
// yields 1.0, and any non-finite intermediate is replaced by 0.0.
double eval(const Program& p, std::span<const double> inputs, const MachineSpec& m);

// Row-major supervised regression data.
struct SupervisedData {
    std::vector<std::string> input_names;
    int n_inputs = 0;
    std::vector<double> inputs; // rows() x n_inputs
    std::vector<double> targets;

    std::size_t rows() const { return targets.size(); }
    std::span<const double> row(std::size_t i) const
    {
        return std::span<const double>(inputs).subspan(i * static_cast<std::size_t>(n_inputs),
            static_cast<std::size_t>(n_inputs));
    }
    void validate() const;
};

// CSV for standalone evolution runs: numeric columns, last one the target.
SupervisedData parse_supervised_csv(std::istream& in);
void write_supervised_csv(const SupervisedData& d, std::ostream& out);

double rmse(std::span<const double> predictions, std::span<const double> targets);

// RMSE over the sampled row subset.
double fitness(const Program& p, const SupervisedData& data, std::span<const std::size_t> subset,
    const MachineSpec& m);

// Pearson correlation coefficient; throws when either side is constant.
double correlation(std::span<const double> a, std::span<const double> b);

struct Individual {
    Program program;
    double cached_fitness = 0.0;
};

struct Deme {
    std::vector<Individual> members;
    Rng rng;
};

struct EvolutionConfig {
    int population = 500;
    long long max_tournaments = 120000;
    double mutation_frequency = 0.90;
    double crossover_frequency = 0.80;
    int n_demes = 10;
    int max_program_size = 512;
    int target_subset_size = 100;
    long long migration_interval = 1000;
    int migration_rate = 2;
    int n_calc_registers = 4;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Checkpoint {
    long long tournament = 0;
    double avg_program_length = 0.0;
    double best_train_rmse = 0.0; // full train set, current cached-best individual
    double avg_train_rmse = 0.0;  // mean of cached (subset) fitnesses
    double test_rmse = 0.0;       // full test set, same individual
};

struct EvolutionReport {
    std::vector<Checkpoint> history;
    Program best_program;
    MachineSpec machine;
    double rmse_train = 0.0;
    double rmse_test = 0.0;
    double cc_train = 0.0; // NaN when the correlation is undefined
    double cc_test = 0.0;
};

// Segment crossover on block boundaries: one block-aligned segment is drawn
// independently in each parent and the two are swapped, so program lengths
// drift over the run. Offspring over max_program_size are tail-truncated and
// never end up empty.
std::pair<Program, Program> crossover(const Program& a, const Program& b, int max_program_size, Rng& rng);

// Flips one uniformly chosen bit of one uniformly chosen block.
Program mutate(const Program& p, Rng& rng);

// One steady-state tournament inside a deme: 4 distinct contestants are
// compared on a freshly sampled shared row subset; the two losers are
// replaced by crossover offspring of the winners (else copies). Each
// replacement then receives a geometric number of single-bit mutations
// (continuation probability = mutation_frequency) and is re-evaluated on
// the same subset. Returns the two member slots holding the replacements.
std::pair<std::size_t, std::size_t> tournament(Deme& deme, const SupervisedData& train,
    const EvolutionConfig& cfg, const MachineSpec& m);

// Ring migration: copies of each deme's `migration_rate` best replace the
// worst of the next deme. Deterministic.
void migrate(std::vector<Deme>& demes, const EvolutionConfig& cfg);

EvolutionReport evolve(const EvolutionConfig& cfg, const SupervisedData& train,
    const SupervisedData& test, const MachineSpec& m);

// Bit-exact text serialization (constants as raw IEEE-754 hex words).
void write_program(std::ostream& out, const Program& p, const MachineSpec& m);
std::pair<Program, MachineSpec> read_program(std::istream& in);

void write_history_csv(std::ostream& out, const EvolutionReport& report);

} // namespace antlgp::lgp
