#include "ideal/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace ideal {

void FeatureMatrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw ShapeError("append_row: row width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

void normalize_min_max(FeatureMatrix& features) {
    for (std::size_t j = 0; j < features.cols(); ++j) {
        double lo = INFINITY;
        double hi = -INFINITY;
        for (std::size_t i = 0; i < features.rows(); ++i) {
            lo = std::min(lo, features.row(i)[j]);
            hi = std::max(hi, features.row(i)[j]);
        }
        const double range = hi - lo;
        for (std::size_t i = 0; i < features.rows(); ++i) {
            double& v = features.row(i)[j];
            v = range > 0.0 ? (v - lo) / range : 0.0;
        }
    }
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view f = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
        fields.push_back(f);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Dataset read_dataset(std::istream& in) {
    Dataset data;
    std::string line;
    std::size_t line_no = 0;
    std::size_t expected_fields = 0;
    bool header_seen = false;
    std::unordered_set<SampleId> seen;
    Vector row;
    int max_class = -1;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_fields(line);
        if (!header_seen) {
            header_seen = true;
            expected_fields = fields.size();
            if (expected_fields < 3) throw ParseError(line_no, "header needs id, class and at least one feature");
            continue;
        }
        if (fields.size() != expected_fields) {
            throw ParseError(line_no, "expected " + std::to_string(expected_fields) + " fields, found " +
                                          std::to_string(fields.size()));
        }
        SampleId id = 0;
        if (!parse_number(fields[0], id)) throw ParseError(line_no, "malformed id '" + std::string(fields[0]) + "'");
        int cls = 0;
        if (!parse_number(fields[1], cls) || cls < 0)
            throw ParseError(line_no, "malformed class index '" + std::string(fields[1]) + "'");
        row.resize(expected_fields - 2);
        for (std::size_t j = 2; j < fields.size(); ++j) {
            if (!parse_number(fields[j], row[j - 2]) || !std::isfinite(row[j - 2]))
                throw ParseError(line_no, "malformed feature value '" + std::string(fields[j]) + "'");
        }
        if (!seen.insert(id).second) throw DataError("duplicate sample id " + std::to_string(id) +
                                                     " (line " + std::to_string(line_no) + ")");
        data.ids.push_back(id);
        data.labels.push_back(cls);
        data.features.append_row(row);
        max_class = std::max(max_class, cls);
    }
    if (!header_seen) throw DataError("dataset is empty");
    if (data.ids.empty()) throw DataError("dataset has a header but no rows");
    data.classes = static_cast<std::size_t>(max_class + 1);
    normalize_min_max(data.features);
    return data;
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
    return read_dataset(in);
}

void write_dataset(const Dataset& data, std::ostream& out) {
    out << "id,class";
    for (std::size_t j = 0; j < data.dim(); ++j) out << ",f" << j;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.ids[i] << ',' << data.labels[i];
        for (double v : data.features.row(i)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FilesystemError("cannot write '" + path.string() + "'");
    write_dataset(data, out);
    if (!out) throw FilesystemError("write failed for '" + path.string() + "'");
}

Dataset generate_synthetic(const SynthSpec& spec) {
    if (spec.classes < 1) throw UsageError("synthetic data needs at least one class");
    if (spec.clusters_per_class < 1) throw UsageError("synthetic data needs at least one cluster per class");
    if (spec.dim < 1) throw UsageError("synthetic data needs at least one feature");
    if (spec.per_class < 1) throw UsageError("synthetic data needs at least one sample per class");
    if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) throw UsageError("noise must be a finite value >= 0");
    if (!(spec.spread > 0.0) || !std::isfinite(spec.spread)) throw UsageError("spread must be a finite value > 0");

    Rng rng(derive_seed(spec.seed, 0x5e7d));
    std::uniform_real_distribution<double> unit(0.0, spec.spread);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<Vector> centres(spec.classes * spec.clusters_per_class, Vector(spec.dim));
    for (auto& c : centres)
        for (double& v : c) v = unit(rng);

    Dataset data;
    data.classes = spec.classes;
    Vector row(spec.dim);
    SampleId next_id = 0;
    for (std::size_t cls = 0; cls < spec.classes; ++cls) {
        for (std::size_t k = 0; k < spec.clusters_per_class; ++k) {
            const std::size_t count =
                spec.per_class / spec.clusters_per_class + (k < spec.per_class % spec.clusters_per_class ? 1 : 0);
            const Vector& centre = centres[cls * spec.clusters_per_class + k];
            for (std::size_t n = 0; n < count; ++n) {
                for (std::size_t j = 0; j < spec.dim; ++j) row[j] = centre[j] + spec.noise * normal(rng);
                data.ids.push_back(next_id++);
                data.labels.push_back(static_cast<int>(cls));
                data.features.append_row(row);
            }
        }
    }
    normalize_min_max(data.features);
    return data;
}

std::unordered_map<SampleId, std::size_t> index_by_id(const Dataset& data) {
    std::unordered_map<SampleId, std::size_t> index;
    index.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) index.emplace(data.ids[i], i);
    return index;
}

}  // namespace ideal
