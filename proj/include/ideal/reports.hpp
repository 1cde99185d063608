#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ideal/config.hpp"
#include "ideal/loop.hpp"

#include "json.hpp"

namespace ideal {

/// Where a run's artifacts live inside its output directory.
struct RunArtifacts {
    std::filesystem::path metrics;          // metrics.jsonl, one record per cycle
    std::filesystem::path config_snapshot;  // config.json
    std::vector<std::filesystem::path> selected;  // selected/cycle_NNN.csv
};

nlohmann::json metric_record(const loop::CycleReport& report, const LoopConfig& config);

/// Writes metrics, selected-id audit files and the resolved config into
/// out_dir (created if needed). Throws FilesystemError when unwritable.
RunArtifacts write_reports(std::span<const loop::CycleReport> reports, const LoopConfig& config,
                           const std::filesystem::path& out_dir);

/// Streaming variant used by the CLI: the snapshot is written up front and
/// each cycle is appended as it completes.
class ReportWriter {
public:
    ReportWriter(const LoopConfig& config, const std::filesystem::path& out_dir);
    void write(const loop::CycleReport& report);
    const RunArtifacts& artifacts() const noexcept { return artifacts_; }

private:
    LoopConfig config_;
    std::filesystem::path out_dir_;
    RunArtifacts artifacts_;
};

/// Parsed metrics.jsonl.
std::vector<nlohmann::json> read_metrics(const std::filesystem::path& metrics_file);

/// Learning-curve table and final-accuracy comparison over every run found
/// under `dir` (the directory itself or its immediate subdirectories).
void summarize_runs(const std::filesystem::path& dir, std::ostream& out);

}  // namespace ideal
