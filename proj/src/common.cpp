#include "ideal/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ideal {

bool is_simplex(std::span<const double> p, double tolerance) {
    if (p.empty()) return false;
    double sum = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0 + tolerance) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= tolerance;
}

PredictionDist::PredictionDist(Vector probs) : probs_(std::move(probs)) {
    if (!is_simplex(probs_)) throw UsageError("prediction is not a valid probability simplex");
}

PredictionDist PredictionDist::one_hot(std::size_t classes, std::size_t index) {
    if (index >= classes) throw ShapeError("one-hot index out of range");
    Vector p(classes, 0.0);
    p[index] = 1.0;
    return trusted(std::move(p));
}

PredictionDist PredictionDist::uniform(std::size_t classes) {
    if (classes == 0) throw ShapeError("uniform distribution needs at least one class");
    return trusted(Vector(classes, 1.0 / static_cast<double>(classes)));
}

std::size_t PredictionDist::argmax() const {
    return static_cast<std::size_t>(std::distance(probs_.begin(), std::max_element(probs_.begin(), probs_.end())));
}

namespace {
std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = splitmix(base);
    h = splitmix(h ^ a);
    h = splitmix(h ^ b);
    h = splitmix(h ^ c);
    return h;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("dot: dimension mismatch");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double l2_norm(std::span<const double> a) {
    return std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
}

}  // namespace ideal
