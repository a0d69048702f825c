#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace antlgp {

// Error taxonomy. The CLI maps ValidationError (and subclasses) and
// StateError to exit code 1, IoError to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input data; message names the offending line where possible.
class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class CapacityError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Operation illegal in the object's current state.
class StateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// xoshiro256** seeded through splitmix64. Self-contained so identical seeds
// give identical streams on every platform and compiler; every stochastic
// stage in the toolkit draws from one of these.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01();

    // Uniform integer in [0, bound), unbiased. bound must be >= 1.
    std::uint64_t uniform_int(std::uint64_t bound);

    double uniform_real(double lo, double hi);

private:
    std::uint64_t state_[4];
};

// Deterministic per-stage seed fan-out: a fixed hash of (master, stage[, k]),
// so adding stages never perturbs the streams of existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage);
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::uint64_t k);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

// Split one CSV line on commas; fields are trimmed of surrounding blanks.
std::vector<std::string> split_csv_line(const std::string& line);

std::string trim(std::string_view s);

} // namespace antlgp
