// Serial reference vs OpenMP scoring of the unlabeled pool, plus the
// selection pass, at two pool sizes.
//
//   bench_scoring [n1 n2 ...]      (default: 20000 40000)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "ideal/dataset.hpp"
#include "ideal/scoring.hpp"
#include "ideal/selector.hpp"

using namespace ideal;

namespace {

template <typename F>
double time_ms(F&& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> sizes{20000, 40000};
    if (argc > 1) {
        sizes.clear();
        for (int i = 1; i < argc; ++i) sizes.push_back(std::strtoull(argv[i], nullptr, 10));
    }

    std::printf("threads available: %d\n", scoring::max_threads());
    std::printf("%10s %12s %12s %10s %12s\n", "N", "serial_ms", "parallel_ms", "speedup", "select_ms");
    for (std::size_t n : sizes) {
        SynthSpec spec;
        spec.classes = 2;
        spec.clusters_per_class = 4;
        spec.per_class = n / 2;
        spec.dim = 16;
        const Dataset data = generate_synthetic(spec);
        Rng rng(1);
        const std::size_t hidden[] = {64, 64};
        const auto model = nn::Classifier::random(data.dim(), hidden, data.classes, 0, rng);
        std::vector<std::size_t> rows(data.size());
        std::iota(rows.begin(), rows.end(), std::size_t{0});

        scoring::ScoringParams params;
        params.stream_seed = 7;
        scoring::ScoredPool serial;
        scoring::ScoredPool parallel;
        const double t_serial =
            time_ms([&] { serial = scoring::score_pool_serial(model, data.features, rows, data.ids, params); });
        const double t_parallel =
            time_ms([&] { parallel = scoring::score_pool(model, data.features, rows, data.ids, params); });
        const double t_select = time_ms([&] {
            selector::fuse_inconsistency(parallel.records, 0.4);
            selector::select(parallel.records, 52, 20);
        });
        std::printf("%10zu %12.1f %12.1f %10.2f %12.2f\n", data.size(), t_serial, t_parallel, t_serial / t_parallel,
                    t_select);
    }
    return 0;
}
