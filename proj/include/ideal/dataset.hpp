#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ideal/common.hpp"

namespace ideal {

/// Dense row-major matrix of sample features.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    const Vector& data() const noexcept { return data_; }

    void append_row(std::span<const double> values);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

struct Dataset {
    std::vector<SampleId> ids;
    std::vector<int> labels;
    FeatureMatrix features;
    std::size_t classes = 0;

    std::size_t size() const noexcept { return ids.size(); }
    std::size_t dim() const noexcept { return features.cols(); }
};

/// Maps each column onto [0, 1]; constant columns become 0.
void normalize_min_max(FeatureMatrix& features);

/// Reads `id,class,f0..f{d-1}` rows after a header line, validates them and
/// min-max normalises every feature column. C is one past the largest class.
Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);

/// Writes values with round-trip precision.
void write_dataset(const Dataset& data, std::ostream& out);
void save_dataset(const Dataset& data, const std::filesystem::path& path);

struct SynthSpec {
    std::size_t classes = 2;
    std::size_t clusters_per_class = 2;
    std::size_t per_class = 1000;  // split evenly over the class's clusters
    std::size_t dim = 16;
    double noise = 0.15;           // within-cluster standard deviation
    double spread = 1.0;           // centres are uniform in [0, spread]^dim
    std::uint64_t seed = 0;
};

/// Class-balanced Gaussian mixture with cluster centres uniform in the unit
/// cube, min-max normalised so that loading it back is lossless.
Dataset generate_synthetic(const SynthSpec& spec);

/// id -> row index.
std::unordered_map<SampleId, std::size_t> index_by_id(const Dataset& data);

}  // namespace ideal
