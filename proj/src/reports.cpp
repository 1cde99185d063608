#include "ideal/reports.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>

namespace ideal {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json metric_record(const loop::CycleReport& report, const LoopConfig& config) {
    return json{
        {"cycle", report.cycle},
        {"n_labeled", report.n_labeled},
        {"accuracy", report.accuracy},
        {"mean_in_total", report.mean_in_total},
        {"max_in_total", report.max_in_total},
        {"select_ms", report.select_ms},
        {"strategy", to_string(config.strategy)},
        {"seed", config.seed},
    };
}

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw FilesystemError("cannot create directory '" + dir.string() + "'");
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw FilesystemError("cannot write '" + path.string() + "'");
    return out;
}

fs::path selected_path(const fs::path& dir, std::size_t cycle) {
    char name[32];
    std::snprintf(name, sizeof name, "cycle_%03zu.csv", cycle);
    return dir / "selected" / name;
}

}  // namespace

ReportWriter::ReportWriter(const LoopConfig& config, const fs::path& out_dir) : config_(config), out_dir_(out_dir) {
    ensure_dir(out_dir_);
    ensure_dir(out_dir_ / "selected");
    artifacts_.metrics = out_dir_ / "metrics.jsonl";
    artifacts_.config_snapshot = out_dir_ / "config.json";
    open_out(artifacts_.config_snapshot) << to_json(config_).dump(2) << '\n';
    open_out(artifacts_.metrics, std::ios::out | std::ios::trunc);
}

void ReportWriter::write(const loop::CycleReport& report) {
    auto metrics = open_out(artifacts_.metrics, std::ios::out | std::ios::app);
    metrics << metric_record(report, config_).dump() << '\n';
    if (!metrics) throw FilesystemError("write failed for '" + artifacts_.metrics.string() + "'");

    const fs::path ids_path = selected_path(out_dir_, report.cycle);
    auto ids = open_out(ids_path);
    ids << "id\n";
    for (SampleId id : report.selected) ids << id << '\n';
    if (!ids) throw FilesystemError("write failed for '" + ids_path.string() + "'");
    artifacts_.selected.push_back(ids_path);
}

RunArtifacts write_reports(std::span<const loop::CycleReport> reports, const LoopConfig& config,
                           const fs::path& out_dir) {
    ReportWriter writer(config, out_dir);
    for (const auto& r : reports) writer.write(r);
    return writer.artifacts();
}

std::vector<json> read_metrics(const fs::path& metrics_file) {
    std::ifstream in(metrics_file);
    if (!in) throw FilesystemError("cannot read '" + metrics_file.string() + "'");
    std::vector<json> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, std::string("malformed metrics record: ") + e.what());
        }
    }
    return records;
}

void summarize_runs(const fs::path& dir, std::ostream& out) {
    std::map<std::string, std::vector<json>> runs;
    if (fs::exists(dir / "metrics.jsonl")) runs[dir.filename().string()] = read_metrics(dir / "metrics.jsonl");
    if (fs::is_directory(dir)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_directory() && fs::exists(entry.path() / "metrics.jsonl"))
                runs[entry.path().filename().string()] = read_metrics(entry.path() / "metrics.jsonl");
        }
    }
    if (runs.empty()) throw DataError("no metrics.jsonl found in '" + dir.string() + "'");

    std::size_t max_cycles = 0;
    for (const auto& [name, recs] : runs) max_cycles = std::max(max_cycles, recs.size());

    out << "Learning curves (accuracy by cycle)\n";
    out << std::left << std::setw(28) << "run";
    for (std::size_t c = 1; c <= max_cycles; ++c) out << std::right << std::setw(9) << ("c" + std::to_string(c));
    out << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& [name, recs] : runs) {
        out << std::left << std::setw(28) << name;
        for (std::size_t c = 0; c < max_cycles; ++c) {
            if (c < recs.size())
                out << std::right << std::setw(9) << recs[c].value("accuracy", 0.0);
            else
                out << std::right << std::setw(9) << "-";
        }
        out << '\n';
    }

    out << "\nFinal accuracy\n";
    out << std::left << std::setw(28) << "run" << std::right << std::setw(10) << "n_labeled" << std::setw(10)
        << "accuracy" << std::setw(12) << "select_ms" << '\n';
    for (const auto& [name, recs] : runs) {
        if (recs.empty()) continue;
        double total_ms = 0.0;
        for (const auto& r : recs) total_ms += r.value("select_ms", 0.0);
        const auto& last = recs.back();
        out << std::left << std::setw(28) << name << std::right << std::setw(10) << last.value("n_labeled", 0)
            << std::setw(10) << last.value("accuracy", 0.0) << std::setw(12) << std::setprecision(1)
            << total_ms / static_cast<double>(recs.size()) << std::setprecision(4) << '\n';
    }
}

}  // namespace ideal
