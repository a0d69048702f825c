#include "antlgp/lgp.hpp"

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

using namespace antlgp;
using namespace antlgp::lgp;

namespace {

std::uint32_t word(Opcode op, int dest, int src1, bool constant, int src2)
{
    return encode(Instruction{ op, static_cast<std::uint8_t>(dest), static_cast<std::uint8_t>(src1),
        constant, static_cast<std::uint8_t>(src2) });
}

MachineSpec test_machine(int n_inputs = 2)
{
    return default_machine_spec(n_inputs, 4, 77);
}

SupervisedData identity_data(std::size_t rows, std::uint64_t seed)
{
    SupervisedData d;
    d.n_inputs = 2;
    d.input_names = { "x0", "x1" };
    Rng rng(seed);
    for (std::size_t i = 0; i < rows; ++i) {
        const double x0 = rng.uniform01();
        const double x1 = rng.uniform01();
        d.inputs.push_back(x0);
        d.inputs.push_back(x1);
        d.targets.push_back(x0); // y = x0, and x0 sits in the output register
    }
    return d;
}

} // namespace

TEST_CASE("decode of the zero word is ADD r0, r0, r0")
{
    const auto m = test_machine();
    const auto ins = decode(0x00000000u, m);
    CHECK(ins.opcode == Opcode::add);
    CHECK(ins.dest == 0);
    CHECK(ins.src1 == 0);
    CHECK_FALSE(ins.src2_is_constant);
    CHECK(ins.src2 == 0);
}

TEST_CASE("encode/decode round-trips in-range instructions")
{
    const auto m = test_machine();
    Rng rng(3);
    for (int i = 0; i < 5000; ++i) {
        Instruction ins;
        ins.opcode = static_cast<Opcode>(rng.uniform_int(kOpcodeCount));
        ins.dest = static_cast<std::uint8_t>(rng.uniform_int(m.register_count()));
        ins.src1 = static_cast<std::uint8_t>(rng.uniform_int(m.register_count()));
        ins.src2_is_constant = rng.uniform01() < 0.5;
        ins.src2 = static_cast<std::uint8_t>(
            rng.uniform_int(ins.src2_is_constant ? m.constants.size() : m.register_count()));
        CHECK(decode(encode(ins), m) == ins);
    }
}

TEST_CASE("decode is total and encode∘decode is a stable canonical form")
{
    const auto m = test_machine();
    Rng rng(4);
    for (int i = 0; i < 10000; ++i) {
        const auto w = static_cast<std::uint32_t>(rng.next_u64() >> 32);
        const Instruction ins = decode(w, m);
        CHECK(ins.dest < m.register_count());
        CHECK(ins.src1 < m.register_count());
        CHECK(ins.src2 < (ins.src2_is_constant ? m.constants.size() : m.register_count()));
        const std::uint32_t canonical = encode(ins);
        CHECK(decode(canonical, m) == ins);
        CHECK(encode(decode(canonical, m)) == canonical);
    }
}

TEST_CASE("eval executes the register machine")
{
    const auto m = test_machine();

    SUBCASE("single add")
    {
        const Program p{ { word(Opcode::add, 0, 0, false, 1) } };
        const double inputs[] = { 2.0, 3.0 };
        CHECK(eval(p, inputs, m) == 5.0);
    }

    SUBCASE("protected division")
    {
        const Program p{ { word(Opcode::div, 0, 0, false, 1) } };
        const double inputs[] = { 1.0, 0.0 };
        CHECK(eval(p, inputs, m) == 1.0);
    }

    SUBCASE("writes to a dead register leave the output untouched")
    {
        const Program p{ { word(Opcode::mul, 3, 1, false, 1) } };
        const double inputs[] = { 0.75, 0.5 };
        CHECK(eval(p, inputs, m) == 0.75);
    }

    SUBCASE("always finite on random programs")
    {
        Rng rng(12);
        for (int trial = 0; trial < 300; ++trial) {
            Program p;
            const std::size_t len = 1 + rng.uniform_int(64);
            for (std::size_t i = 0; i < len; ++i)
                p.blocks.push_back(static_cast<std::uint32_t>(rng.next_u64() >> 32));
            const double inputs[] = { rng.uniform_real(-1e8, 1e8), rng.uniform_real(-1e8, 1e8) };
            CHECK(std::isfinite(eval(p, inputs, m)));
        }
    }
}

TEST_CASE("fitness is the subset RMSE")
{
    const auto m = test_machine();
    auto data = identity_data(10, 9);
    std::vector<std::size_t> all(10);
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;

    // perfect predictor: r0 already holds x0
    const Program identity{ { word(Opcode::add, 3, 3, false, 3) } };
    CHECK(fitness(identity, data, all, m) == 0.0);

    // constant-zero predictor against targets all 1
    SupervisedData ones = data;
    std::fill(ones.targets.begin(), ones.targets.end(), 1.0);
    const Program zero{ { word(Opcode::mul, 0, 0, true, 0) } }; // r0 = r0 * 0.0
    CHECK(fitness(zero, ones, all, m) == doctest::Approx(1.0));
}

TEST_CASE("rmse of predictions (0,0) against targets (1,3) is sqrt 5")
{
    const std::vector<double> preds{ 0.0, 0.0 };
    const std::vector<double> targets{ 1.0, 3.0 };
    CHECK(rmse(preds, targets) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("pearson correlation")
{
    const std::vector<double> x{ 1.0, 2.0, 3.0 };
    const std::vector<double> y{ 1.0, 2.0, 4.0 };
    const std::vector<double> neg{ -1.0, -2.0, -3.0 };
    const std::vector<double> flat{ 2.0, 2.0, 2.0 };
    CHECK(correlation(x, x) == doctest::Approx(1.0));
    CHECK(correlation(x, neg) == doctest::Approx(-1.0));
    CHECK(correlation(x, y) == doctest::Approx(0.9820).epsilon(1e-4));
    CHECK_THROWS_AS(correlation(x, flat), ValidationError);
    CHECK_THROWS_AS(correlation(flat, x), ValidationError);
}

TEST_CASE("crossover")
{
    Rng rng(15);

    SUBCASE("identical parents still only exchange their own blocks")
    {
        Program p;
        for (int i = 0; i < 12; ++i)
            p.blocks.push_back(static_cast<std::uint32_t>(1000 + i));
        for (int trial = 0; trial < 50; ++trial) {
            const auto [a, b] = crossover(p, p, 512, rng);
            CHECK(a.size() + b.size() == 2 * p.size());
            for (const auto w : a.blocks)
                CHECK(std::find(p.blocks.begin(), p.blocks.end(), w) != p.blocks.end());
            for (const auto w : b.blocks)
                CHECK(std::find(p.blocks.begin(), p.blocks.end(), w) != p.blocks.end());
        }
    }

    SUBCASE("offspring never exceed the size cap and never go empty")
    {
        for (int trial = 0; trial < 500; ++trial) {
            Program a;
            Program b;
            const std::size_t la = 1 + rng.uniform_int(512);
            const std::size_t lb = 1 + rng.uniform_int(512);
            for (std::size_t i = 0; i < la; ++i)
                a.blocks.push_back(static_cast<std::uint32_t>(rng.next_u64() >> 32));
            for (std::size_t i = 0; i < lb; ++i)
                b.blocks.push_back(static_cast<std::uint32_t>(rng.next_u64() >> 32));
            const auto [o1, o2] = crossover(a, b, 512, rng);
            CHECK(o1.size() >= 1);
            CHECK(o2.size() >= 1);
            CHECK(o1.size() <= 512);
            CHECK(o2.size() <= 512);
        }
    }

    SUBCASE("blocks come from the parents and the combined count is conserved")
    {
        // small programs with distinct markers so multiset bookkeeping is exact
        for (int trial = 0; trial < 300; ++trial) {
            Program a;
            Program b;
            const std::size_t la = 1 + rng.uniform_int(10);
            const std::size_t lb = 1 + rng.uniform_int(10);
            for (std::size_t i = 0; i < la; ++i)
                a.blocks.push_back(static_cast<std::uint32_t>(1000 + i));
            for (std::size_t i = 0; i < lb; ++i)
                b.blocks.push_back(static_cast<std::uint32_t>(2000 + i));
            const auto [o1, o2] = crossover(a, b, 1024, rng); // cap above la+lb: no truncation
            CHECK(o1.size() + o2.size() == la + lb);

            std::multiset<std::uint32_t> parents(a.blocks.begin(), a.blocks.end());
            parents.insert(b.blocks.begin(), b.blocks.end());
            std::multiset<std::uint32_t> children(o1.blocks.begin(), o1.blocks.end());
            children.insert(o2.blocks.begin(), o2.blocks.end());
            CHECK(parents == children);
        }
    }

    SUBCASE("empty parents are rejected")
    {
        Program empty;
        Program one{ { 7u } };
        CHECK_THROWS_AS(crossover(empty, one, 512, rng), ValidationError);
    }
}

TEST_CASE("mutation flips exactly one bit and preserves length")
{
    Rng rng(16);
    Program p;
    for (int i = 0; i < 20; ++i)
        p.blocks.push_back(static_cast<std::uint32_t>(rng.next_u64() >> 32));

    for (int trial = 0; trial < 200; ++trial) {
        Rng before = rng; // copy: replay the same draws for the involution check
        const Program m1 = mutate(p, rng);
        CHECK(m1.size() == p.size());
        int changed_bits = 0;
        for (std::size_t i = 0; i < p.blocks.size(); ++i)
            changed_bits += std::popcount(p.blocks[i] ^ m1.blocks[i]);
        CHECK(changed_bits == 1);

        Rng replay = before;
        const Program back = mutate(mutate(p, before), replay);
        CHECK(back == p);
    }
}

namespace {

Deme fixed_deme(const MachineSpec& m, const SupervisedData& data)
{
    // four programs with strictly ordered fitness on y = x0:
    // offsets 0, 1, 2, 3 added to the output register
    Deme deme{ {}, Rng(5) };
    Program base{ { word(Opcode::add, 3, 3, false, 3) } }; // no-op on r0
    deme.members.push_back({ base, 0.0 });
    for (int k = 1; k <= 3; ++k) {
        Program p;
        for (int i = 0; i < k; ++i)
            p.blocks.push_back(word(Opcode::add, 0, 0, true, 2)); // r0 += 1.0
        deme.members.push_back({ p, 0.0 });
    }
    std::vector<std::size_t> all(data.rows());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    for (auto& member : deme.members)
        member.cached_fitness = fitness(member.program, data, all, m);
    return deme;
}

} // namespace

TEST_CASE("tournament with degenerate frequencies clones the winners")
{
    const auto m = test_machine();
    const auto data = identity_data(20, 31);
    auto deme = fixed_deme(m, data);
    const Program winner1 = deme.members[0].program;
    const Program winner2 = deme.members[1].program;

    EvolutionConfig cfg;
    cfg.population = 4;
    cfg.n_demes = 1;
    cfg.crossover_frequency = 0.0;
    cfg.mutation_frequency = 0.0;
    cfg.target_subset_size = 100;
    tournament(deme, data, cfg, m);

    int copies1 = 0;
    int copies2 = 0;
    for (const auto& member : deme.members) {
        if (member.program == winner1)
            ++copies1;
        if (member.program == winner2)
            ++copies2;
    }
    CHECK(copies1 == 2);
    CHECK(copies2 == 2);
}

TEST_CASE("tournament needs at least four individuals")
{
    const auto m = test_machine();
    const auto data = identity_data(10, 32);
    auto deme = fixed_deme(m, data);
    deme.members.pop_back();
    EvolutionConfig cfg;
    CHECK_THROWS_AS(tournament(deme, data, cfg, m), ValidationError);
}

TEST_CASE("tournament is deterministic under a fixed seed")
{
    const auto m = test_machine();
    const auto data = identity_data(30, 33);
    auto a = fixed_deme(m, data);
    auto b = fixed_deme(m, data);
    EvolutionConfig cfg;
    cfg.population = 4;
    cfg.n_demes = 1;
    for (int t = 0; t < 20; ++t) {
        tournament(a, data, cfg, m);
        tournament(b, data, cfg, m);
    }
    for (std::size_t i = 0; i < a.members.size(); ++i) {
        CHECK(a.members[i].program == b.members[i].program);
        CHECK(a.members[i].cached_fitness == b.members[i].cached_fitness);
    }
}

TEST_CASE("migration moves the best into the next deme's worst slots")
{
    const auto m = test_machine();
    const auto data = identity_data(10, 34);
    EvolutionConfig cfg;
    cfg.population = 8;
    cfg.n_demes = 2;
    cfg.migration_rate = 1;

    std::vector<Deme> demes{ fixed_deme(m, data), fixed_deme(m, data) };
    // make deme 1's members distinct so the swap is observable
    for (auto& member : demes[1].members) {
        member.program.blocks.push_back(word(Opcode::add, 0, 0, true, 0)); // + 0.0
        member.cached_fitness += 0.25;
    }
    const Program best0 = demes[0].members[0].program;
    const Program best1 = demes[1].members[0].program;

    SUBCASE("rate zero is a no-op")
    {
        auto copy = demes;
        EvolutionConfig none = cfg;
        none.migration_rate = 0;
        migrate(copy, none);
        for (std::size_t d = 0; d < 2; ++d)
            for (std::size_t i = 0; i < 4; ++i)
                CHECK(copy[d].members[i].program == demes[d].members[i].program);
    }

    SUBCASE("ring of two swaps bests into worst slots")
    {
        migrate(demes, cfg);
        CHECK(demes[1].members[3].program == best0); // deme 1's worst was slot 3
        CHECK(demes[0].members[3].program == best1);
        std::size_t total = 0;
        for (const auto& deme : demes)
            total += deme.members.size();
        CHECK(total == 8);
    }
}

TEST_CASE("the published evolution parameter set validates")
{
    EvolutionConfig cfg; // defaults are the published settings
    CHECK(cfg.population == 500);
    CHECK(cfg.max_tournaments == 120000);
    CHECK(cfg.mutation_frequency == 0.90);
    CHECK(cfg.crossover_frequency == 0.80);
    CHECK(cfg.n_demes == 10);
    CHECK(cfg.max_program_size == 512);
    CHECK(cfg.target_subset_size == 100);
    CHECK_NOTHROW(cfg.validate());

    EvolutionConfig bad = cfg;
    bad.population = 501;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("evolve with zero tournaments reports only the initial checkpoint")
{
    EvolutionConfig cfg;
    cfg.population = 16;
    cfg.n_demes = 2;
    cfg.max_tournaments = 0;
    cfg.max_program_size = 32;
    const auto m = test_machine();
    const auto train = identity_data(20, 41);
    const auto test = identity_data(10, 42);
    const auto report = evolve(cfg, train, test, m);
    REQUIRE(report.history.size() == 1);
    CHECK(report.history[0].tournament == 0);
    CHECK(report.best_program.size() >= 1);
}

TEST_CASE("evolve is deterministic for a fixed seed")
{
    EvolutionConfig cfg;
    cfg.population = 16;
    cfg.n_demes = 2;
    cfg.max_tournaments = 400;
    cfg.max_program_size = 64;
    cfg.target_subset_size = 16;
    cfg.seed = 2718;
    const auto m = test_machine();
    const auto train = identity_data(30, 51);
    const auto test = identity_data(10, 52);

    const auto a = evolve(cfg, train, test, m);
    const auto b = evolve(cfg, train, test, m);
    CHECK(a.best_program == b.best_program);
    CHECK(a.rmse_train == b.rmse_train);
    CHECK(a.rmse_test == b.rmse_test);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].tournament == b.history[i].tournament);
        CHECK(a.history[i].avg_program_length == b.history[i].avg_program_length);
        CHECK(a.history[i].best_train_rmse == b.history[i].best_train_rmse);
        CHECK(a.history[i].test_rmse == b.history[i].test_rmse);
    }
}

TEST_CASE("steady state never loses its best under zero mutation")
{
    // subset covers the whole train set here, so cached fitness is exact and
    // the true best can only ever win its tournaments
    EvolutionConfig cfg;
    cfg.population = 24;
    cfg.n_demes = 2;
    cfg.max_tournaments = 5000;
    cfg.mutation_frequency = 0.0;
    cfg.crossover_frequency = 0.8;
    cfg.target_subset_size = 100;
    cfg.max_program_size = 64;
    cfg.seed = 7;
    const auto m = test_machine();
    const auto train = identity_data(50, 61);
    const auto test = identity_data(20, 62);

    const auto report = evolve(cfg, train, test, m);
    for (std::size_t i = 1; i < report.history.size(); ++i)
        CHECK(report.history[i].best_train_rmse <= report.history[i - 1].best_train_rmse + 1e-15);
}

TEST_CASE("program serialization is bit-exact")
{
    const auto m = test_machine(3);
    Rng rng(8);
    Program p;
    for (int i = 0; i < 40; ++i)
        p.blocks.push_back(static_cast<std::uint32_t>(rng.next_u64() >> 32));

    std::ostringstream out;
    write_program(out, p, m);
    std::istringstream in(out.str());
    const auto [q, spec] = read_program(in);
    CHECK(q == p);
    CHECK(spec.n_inputs == m.n_inputs);
    CHECK(spec.n_calc_registers == m.n_calc_registers);
    REQUIRE(spec.constants.size() == m.constants.size());
    for (std::size_t i = 0; i < m.constants.size(); ++i)
        CHECK(std::bit_cast<std::uint64_t>(spec.constants[i]) == std::bit_cast<std::uint64_t>(m.constants[i]));

    const double inputs[] = { 0.1, 0.2, 0.3 };
    CHECK(eval(q, inputs, spec) == eval(p, inputs, m));
}

TEST_CASE("supervised csv round-trips")
{
    const auto d = identity_data(12, 71);
    std::ostringstream out;
    write_supervised_csv(d, out);
    std::istringstream in(out.str());
    const auto back = parse_supervised_csv(in);
    CHECK(back.n_inputs == d.n_inputs);
    REQUIRE(back.rows() == d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) {
        CHECK(back.targets[i] == d.targets[i]);
        for (int j = 0; j < d.n_inputs; ++j)
            CHECK(back.row(i)[static_cast<std::size_t>(j)] == d.row(i)[static_cast<std::size_t>(j)]);
    }
    std::istringstream bad("x\n1\n");
    CHECK_THROWS_AS(parse_supervised_csv(bad), ParseError);
}
