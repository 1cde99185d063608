#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ideal {

using Vector = std::vector<double>;
using SampleId = std::uint64_t;
using Rng = std::mt19937_64;

// Error hierarchy. The CLI maps each family onto an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

class ConfigError : public UsageError {
public:
    ConfigError(std::string key, const std::string& what)
        : UsageError("config key '" + key + "': " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class FilesystemError : public Error {
public:
    using Error::Error;
};

/// A probability vector over C classes. Construction validates the simplex
/// (entries in [0,1], sum 1 within 1e-6).
class PredictionDist {
public:
    static constexpr double kSumTolerance = 1e-6;

    PredictionDist() = default;
    explicit PredictionDist(Vector probs);

    /// Builds without validation. For hot paths whose output is a simplex by
    /// construction (softmax, convex combinations of simplexes).
    static PredictionDist trusted(Vector probs) {
        PredictionDist p;
        p.probs_ = std::move(probs);
        return p;
    }

    static PredictionDist one_hot(std::size_t classes, std::size_t index);
    static PredictionDist uniform(std::size_t classes);

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t c) const { return probs_[c]; }
    std::span<const double> values() const noexcept { return probs_; }
    const Vector& vector() const noexcept { return probs_; }
    std::size_t argmax() const;

    friend bool operator==(const PredictionDist&, const PredictionDist&) = default;

private:
    Vector probs_;
};

bool is_simplex(std::span<const double> p, double tolerance = PredictionDist::kSumTolerance);

/// Deterministic seed derivation (splitmix64 finalizer over the mixed words).
/// Used to give every (run, cycle, sample) its own independent stream so that
/// results do not depend on thread scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

inline Rng make_rng(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    return Rng(derive_seed(base, a, b, c));
}

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

}  // namespace ideal
