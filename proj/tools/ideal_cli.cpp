// Command-line front end: run, synth, ablate, report.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 runtime numeric
// error, 1 anything else.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "ideal/config.hpp"
#include "ideal/dataset.hpp"
#include "ideal/loop.hpp"
#include "ideal/reports.hpp"

namespace fs = std::filesystem;
using namespace ideal;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kNumeric = 4 };

struct RunOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> strategy;
    std::optional<std::string> data_path;
    std::string out_dir = "ideal-run";
};

LoopConfig resolve_config(const RunOptions& opts) {
    LoopConfig config = load_config(opts.config_path);
    if (opts.seed) config.seed = *opts.seed;
    if (opts.strategy) config.strategy = strategy_from_string(*opts.strategy);
    if (opts.data_path) config.dataset = *opts.data_path;
    if (config.dataset.empty()) throw ConfigError("dataset", "no dataset path given (config key or --data)");
    fs::path data = config.dataset;
    if (data.is_relative() && !opts.data_path) data = fs::path(opts.config_path).parent_path() / data;
    config.dataset = fs::absolute(data).lexically_normal().string();
    config.validate();
    return config;
}

void run_one(const LoopConfig& config, const Dataset& data, const fs::path& out_dir, bool verbose) {
    ReportWriter writer(config, out_dir);
    loop::run(config, data, [&](const loop::CycleReport& r) {
        writer.write(r);
        if (verbose) {
            std::cout << "cycle " << r.cycle << "  labeled " << r.n_labeled << "  accuracy " << r.accuracy
                      << "  select " << r.select_ms << " ms\n";
        }
    });
}

int cmd_run(const RunOptions& opts) {
    const LoopConfig config = resolve_config(opts);
    const Dataset data = load_dataset(config.dataset);
    run_one(config, data, opts.out_dir, true);
    std::cout << "artifacts written to " << opts.out_dir << '\n';
    return kOk;
}

int cmd_ablate(const RunOptions& opts) {
    const LoopConfig base = resolve_config(opts);
    const Dataset data = load_dataset(base.dataset);

    std::vector<std::pair<std::string, LoopConfig>> lattice;
    auto add = [&](std::string name, auto mutate) {
        LoopConfig c = base;
        c.strategy = Strategy::ideal;
        c.ablation = {};
        mutate(c);
        lattice.emplace_back(std::move(name), std::move(c));
    };
    add("ideal", [](LoopConfig&) {});
    add("no_density", [](LoopConfig& c) { c.ablation.disable_density = true; });
    add("no_reranker", [](LoopConfig& c) { c.ablation.disable_reranker = true; });
    add("no_coarse", [](LoopConfig& c) { c.ablation.disable_coarse = true; });
    add("no_fine", [](LoopConfig& c) { c.ablation.disable_fine = true; });
    add("no_ranker", [](LoopConfig& c) { c.ablation.disable_ranker = true; });
    add("random", [](LoopConfig& c) { c.strategy = Strategy::random; });

    for (const auto& [name, config] : lattice) {
        std::cout << "== " << name << '\n';
        run_one(config, data, fs::path(opts.out_dir) / name, true);
    }
    std::cout << '\n';
    summarize_runs(opts.out_dir, std::cout);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pool-based active learning with inconsistency ranking and density-aware re-ranking"};
    app.require_subcommand(1);

    RunOptions run_opts;
    auto* run = app.add_subcommand("run", "Run the active-learning loop from a config file");
    run->add_option("--config", run_opts.config_path, "Config file (flat JSON object)")->required();
    run->add_option("--seed", run_opts.seed, "Override the config seed");
    run->add_option("--strategy", run_opts.strategy, "ideal|random|entropy|coreset");
    run->add_option("--data", run_opts.data_path, "Override the dataset path");
    run->add_option("--out", run_opts.out_dir, "Output directory")->capture_default_str();

    RunOptions ablate_opts;
    ablate_opts.out_dir = "ideal-ablation";
    auto* ablate = app.add_subcommand("ablate", "Run every ablation variant plus the random baseline");
    ablate->add_option("--config", ablate_opts.config_path, "Config file")->required();
    ablate->add_option("--seed", ablate_opts.seed, "Override the config seed");
    ablate->add_option("--data", ablate_opts.data_path, "Override the dataset path");
    ablate->add_option("--out", ablate_opts.out_dir, "Output directory")->capture_default_str();

    SynthSpec synth_spec;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Generate a Gaussian-mixture dataset");
    synth->add_option("--classes", synth_spec.classes, "Number of classes")->capture_default_str();
    synth->add_option("--clusters", synth_spec.clusters_per_class, "Clusters per class")->capture_default_str();
    synth->add_option("--per-class", synth_spec.per_class, "Samples per class")->capture_default_str();
    synth->add_option("--dim", synth_spec.dim, "Feature dimension")->capture_default_str();
    synth->add_option("--noise", synth_spec.noise, "Within-cluster standard deviation")->capture_default_str();
    synth->add_option("--spread", synth_spec.spread, "Side of the cube that cluster centres are drawn from")->capture_default_str();
    synth->add_option("--seed", synth_spec.seed, "Random seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Output CSV file")->required();

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Summarise the runs in a directory");
    report->add_option("--in", report_dir, "Run or ablation directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*run) return cmd_run(run_opts);
        if (*ablate) return cmd_ablate(ablate_opts);
        if (*synth) {
            save_dataset(generate_synthetic(synth_spec), synth_out);
            return kOk;
        }
        if (*report) {
            summarize_runs(report_dir, std::cout);
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const LookupError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const ShapeError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
    return kOther;
}
