#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ideal/common.hpp"
#include "ideal/nn.hpp"

namespace ideal::augment {

enum class TransformKind { roll, block_sign_flip, jitter };

std::string to_string(TransformKind kind);
TransformKind transform_from_string(const std::string& name);

/// Which transform ran and with what parameters. A roll or flip whose
/// displacement did not clear the threshold is followed by a jitter; that
/// composition is recorded through `jitter_magnitude > 0`.
struct TransformDescriptor {
    TransformKind kind = TransformKind::jitter;
    std::size_t shift = 0;        // roll
    std::size_t block_begin = 0;  // flip
    std::size_t block_length = 0; // flip
    double jitter_magnitude = 0.0;
};

struct CoarseAugmentSet {
    SampleId source_id = 0;
    std::vector<Vector> variants;
    std::vector<TransformDescriptor> transforms;
};

/// Transform family drawn from by coarse_augment. Must be nonempty.
using TransformFamily = std::vector<TransformKind>;

TransformFamily default_family();

/// Sign flips are taken about this centre (the midpoint of unit-normalised
/// features).
inline constexpr double kFlipCentre = 0.5;

/// k perceivable variants of x; every variant is more than `delta` away from
/// x in sup-norm.
CoarseAugmentSet coarse_augment(SampleId id, std::span<const double> x, std::size_t k, double delta, Rng& rng,
                                const TransformFamily& family = default_family());

struct Perturbation {
    Vector r_adv;
    double epsilon = 0.0;
    bool degenerate = false;  // gradient vanished; r_adv is epsilon times the random probe
};

/// Gradient norms below this trigger the random-direction fallback.
inline constexpr double kDegenerateGradient = 1e-12;

/// One power-iteration step of the virtual adversarial direction at the
/// model's tap-layer representation x_bar with reference prediction y_bar.
Perturbation vat_perturbation(const nn::Classifier& model, std::span<const double> x_bar, const PredictionDist& y_bar,
                              double epsilon, double xi, Rng& rng);

/// Tap-layer representation of every coarse variant displaced by its own
/// adversarial perturbation. Degenerate perturbations are counted in
/// `degenerate_count` when given.
std::vector<Vector> fine_augment_set(const nn::Classifier& model, const CoarseAugmentSet& coarse, double epsilon,
                                     double xi, Rng& rng, std::size_t* degenerate_count = nullptr);

}  // namespace ideal::augment
