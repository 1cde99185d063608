#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ideal/augment.hpp"
#include "ideal/common.hpp"

#include "json.hpp"

namespace ideal {

enum class Strategy { ideal, random, entropy, coreset };

std::string to_string(Strategy s);
/// Throws ConfigError("strategy") for unknown names.
Strategy strategy_from_string(const std::string& name);

/// Component switches; each removes one row's module of the ablation table.
struct AblationFlags {
    bool disable_ranker = false;
    bool disable_reranker = false;
    bool disable_coarse = false;
    bool disable_fine = false;
    bool disable_density = false;

    friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct LoopConfig {
    // Selection
    std::size_t k_aug = 5;
    std::size_t m_cand = 0;  // 0: ceil(2.6 * budget)
    std::size_t budget = 20;
    std::size_t cycles = 5;
    double gamma = 0.4;
    double epsilon = 0.1;
    double xi = 0.1;
    double delta = 0.05;
    std::string transforms = "roll,flip,jitter";
    Strategy strategy = Strategy::ideal;
    AblationFlags ablation;

    // Propagation and training
    double alpha = 0.75;
    Vector weights;  // K_aug + 1 entries (w_u first); empty means all ones
    std::size_t train_steps_per_cycle = 100;
    double lambda_u = 1.0;
    double learning_rate = 0.05;
    std::size_t labeled_batch = 32;
    std::size_t unlabeled_batch = 16;
    std::vector<std::size_t> hidden_layers{64, 64};
    std::size_t tap_layer = 0;
    bool cold_restart = false;

    // Data
    std::size_t initial_per_class = 2;
    double test_fraction = 0.2;
    std::string dataset;  // path, used by the CLI
    std::uint64_t seed = 0;

    std::size_t effective_m_cand() const;
    Vector effective_weights() const;
    augment::TransformFamily transform_family() const;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

nlohmann::json to_json(const LoopConfig& config);

/// Keys absent from `j` keep their defaults; unknown keys and ill-typed
/// values throw ConfigError. The result is validated.
LoopConfig config_from_json(const nlohmann::json& j);
LoopConfig load_config(const std::filesystem::path& path);

/// Every key recognised in a config file.
const std::vector<std::string>& config_keys();

}  // namespace ideal
