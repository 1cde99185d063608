#include "ideal/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ideal {

using nlohmann::json;

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::ideal: return "ideal";
        case Strategy::random: return "random";
        case Strategy::entropy: return "entropy";
        case Strategy::coreset: return "coreset";
    }
    return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
    if (name == "ideal") return Strategy::ideal;
    if (name == "random") return Strategy::random;
    if (name == "entropy") return Strategy::entropy;
    if (name == "coreset") return Strategy::coreset;
    throw ConfigError("strategy", "unknown strategy '" + name + "' (expected ideal|random|entropy|coreset)");
}

std::size_t LoopConfig::effective_m_cand() const {
    if (m_cand != 0) return m_cand;
    return static_cast<std::size_t>(std::ceil(2.6 * static_cast<double>(budget)));
}

Vector LoopConfig::effective_weights() const {
    if (weights.empty()) return Vector(k_aug + 1, 1.0);
    return weights;
}

augment::TransformFamily LoopConfig::transform_family() const {
    augment::TransformFamily family;
    std::stringstream ss(transforms);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            family.push_back(augment::transform_from_string(item));
        } catch (const UsageError& e) {
            throw ConfigError("transforms", e.what());
        }
    }
    if (family.empty()) throw ConfigError("transforms", "no transforms listed");
    return family;
}

void LoopConfig::validate() const {
    auto positive = [](const char* key, double v) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be a finite value > 0");
    };
    if (budget == 0) throw ConfigError("budget", "must be at least 1");
    if (cycles == 0) throw ConfigError("cycles", "must be at least 1");
    if (k_aug == 0) throw ConfigError("k_aug", "must be at least 1");
    if (m_cand != 0 && m_cand < budget) throw ConfigError("m_cand", "must be at least the budget");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma", "must lie in [0, 1]");
    positive("epsilon", epsilon);
    positive("xi", xi);
    positive("delta", delta);
    positive("alpha", alpha);
    positive("learning_rate", learning_rate);
    if (!(lambda_u >= 0.0) || !std::isfinite(lambda_u)) throw ConfigError("lambda_u", "must be a finite value >= 0");
    if (!weights.empty()) {
        if (weights.size() != k_aug + 1) throw ConfigError("weights", "needs k_aug + 1 entries (w_u first)");
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights", "entries must be finite and >= 0");
            total += w;
        }
        if (total == 0.0) throw ConfigError("weights", "must not all be zero");
    }
    if (train_steps_per_cycle == 0) throw ConfigError("train_steps_per_cycle", "must be at least 1");
    if (labeled_batch == 0) throw ConfigError("labeled_batch", "must be at least 1");
    if (unlabeled_batch == 0) throw ConfigError("unlabeled_batch", "must be at least 1");
    for (std::size_t w : hidden_layers)
        if (w == 0) throw ConfigError("hidden_layers", "widths must be at least 1");
    if (tap_layer > hidden_layers.size()) throw ConfigError("tap_layer", "exceeds the number of hidden layers");
    if (initial_per_class == 0) throw ConfigError("initial_per_class", "must be at least 1");
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction", "must lie in [0, 1)");
    (void)transform_family();
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "k_aug",          "m_cand",           "budget",        "cycles",
        "gamma",          "epsilon",          "xi",            "delta",
        "transforms",     "strategy",         "disable_ranker", "disable_reranker",
        "disable_coarse", "disable_fine",     "disable_density", "alpha",
        "weights",        "train_steps_per_cycle", "lambda_u", "learning_rate",
        "labeled_batch",  "unlabeled_batch",  "hidden_layers", "tap_layer",
        "cold_restart",   "initial_per_class", "test_fraction", "dataset",
        "seed"};
    return keys;
}

json to_json(const LoopConfig& c) {
    return json{
        {"k_aug", c.k_aug},
        {"m_cand", c.effective_m_cand()},
        {"budget", c.budget},
        {"cycles", c.cycles},
        {"gamma", c.gamma},
        {"epsilon", c.epsilon},
        {"xi", c.xi},
        {"delta", c.delta},
        {"transforms", c.transforms},
        {"strategy", to_string(c.strategy)},
        {"disable_ranker", c.ablation.disable_ranker},
        {"disable_reranker", c.ablation.disable_reranker},
        {"disable_coarse", c.ablation.disable_coarse},
        {"disable_fine", c.ablation.disable_fine},
        {"disable_density", c.ablation.disable_density},
        {"alpha", c.alpha},
        {"weights", c.effective_weights()},
        {"train_steps_per_cycle", c.train_steps_per_cycle},
        {"lambda_u", c.lambda_u},
        {"learning_rate", c.learning_rate},
        {"labeled_batch", c.labeled_batch},
        {"unlabeled_batch", c.unlabeled_batch},
        {"hidden_layers", c.hidden_layers},
        {"tap_layer", c.tap_layer},
        {"cold_restart", c.cold_restart},
        {"initial_per_class", c.initial_per_class},
        {"test_fraction", c.test_fraction},
        {"dataset", c.dataset},
        {"seed", c.seed},
    };
}

namespace {

template <typename T>
void read_key(const json& j, const char* key, T& out) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
            if (!it->is_number_integer() || (!it->is_number_unsigned() && it->template get<long long>() < 0))
                throw ConfigError(key, "must be a nonnegative integer");
        } else if constexpr (std::is_same_v<T, double>) {
            if (!it->is_number()) throw ConfigError(key, "must be a number");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ConfigError(key, "must be true or false");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) throw ConfigError(key, "must be a string");
        }
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, e.what());
    }
}

}  // namespace

LoopConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("<root>", "config must be a flat object");
    const auto& known = config_keys();
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(key, "unknown key");

    LoopConfig c;
    read_key(j, "k_aug", c.k_aug);
    read_key(j, "m_cand", c.m_cand);
    read_key(j, "budget", c.budget);
    read_key(j, "cycles", c.cycles);
    read_key(j, "gamma", c.gamma);
    read_key(j, "epsilon", c.epsilon);
    read_key(j, "xi", c.xi);
    read_key(j, "delta", c.delta);
    read_key(j, "transforms", c.transforms);
    if (j.contains("strategy")) {
        if (!j["strategy"].is_string()) throw ConfigError("strategy", "must be a string");
        c.strategy = strategy_from_string(j["strategy"].get<std::string>());
    }
    read_key(j, "disable_ranker", c.ablation.disable_ranker);
    read_key(j, "disable_reranker", c.ablation.disable_reranker);
    read_key(j, "disable_coarse", c.ablation.disable_coarse);
    read_key(j, "disable_fine", c.ablation.disable_fine);
    read_key(j, "disable_density", c.ablation.disable_density);
    read_key(j, "alpha", c.alpha);
    if (j.contains("weights")) {
        const auto& w = j["weights"];
        if (!w.is_array()) throw ConfigError("weights", "must be an array of numbers");
        for (const auto& v : w) {
            if (!v.is_number()) throw ConfigError("weights", "must be an array of numbers");
            c.weights.push_back(v.get<double>());
        }
    }
    read_key(j, "train_steps_per_cycle", c.train_steps_per_cycle);
    read_key(j, "lambda_u", c.lambda_u);
    read_key(j, "learning_rate", c.learning_rate);
    read_key(j, "labeled_batch", c.labeled_batch);
    read_key(j, "unlabeled_batch", c.unlabeled_batch);
    if (j.contains("hidden_layers")) {
        const auto& h = j["hidden_layers"];
        if (!h.is_array()) throw ConfigError("hidden_layers", "must be an array of widths");
        c.hidden_layers.clear();
        for (const auto& v : h) {
            if (!v.is_number_integer() || v.get<long long>() <= 0)
                throw ConfigError("hidden_layers", "widths must be positive integers");
            c.hidden_layers.push_back(v.get<std::size_t>());
        }
    }
    read_key(j, "tap_layer", c.tap_layer);
    read_key(j, "cold_restart", c.cold_restart);
    read_key(j, "initial_per_class", c.initial_per_class);
    read_key(j, "test_fraction", c.test_fraction);
    read_key(j, "dataset", c.dataset);
    read_key(j, "seed", c.seed);
    c.validate();
    return c;
}

LoopConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("malformed config: ") + e.what());
    }
    return config_from_json(j);
}

}  // namespace ideal
