#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoforge/grid.hpp"

namespace geoforge {

/// Dense real field with `channels` values per voxel, channels-first and
/// x-fastest within a channel.
class Field {
public:
    Field() = default;
    Field(int channels, Index3 dims, double value = 0.0)
        : channels_(channels), dims_(dims), data_(static_cast<std::size_t>(channels) * voxels_of(dims), value) {
        if (channels < 1 || dims.x < 1 || dims.y < 1 || dims.z < 1) throw std::invalid_argument("field: invalid shape");
    }

    int channels() const { return channels_; }
    const Index3& dims() const { return dims_; }
    std::size_t voxels() const { return voxels_of(dims_); }
    std::size_t size() const { return data_.size(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::span<double> channel(int c) { return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * voxels(), voxels()); }
    std::span<const double> channel(int c) const {
        return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * voxels(), voxels());
    }

    double& operator()(int c, std::size_t voxel) { return data_[static_cast<std::size_t>(c) * voxels() + voxel]; }
    double operator()(int c, std::size_t voxel) const { return data_[static_cast<std::size_t>(c) * voxels() + voxel]; }

    bool same_shape(const Field& o) const { return channels_ == o.channels_ && dims_ == o.dims_; }

    friend bool operator==(const Field&, const Field&) = default;

private:
    static std::size_t voxels_of(const Index3& d) {
        return static_cast<std::size_t>(d.x) * static_cast<std::size_t>(d.y) * static_cast<std::size_t>(d.z);
    }

    int channels_ = 0;
    Index3 dims_{};
    std::vector<double> data_;
};

inline void require_same_shape(const Field& a, const Field& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("field shape mismatch");
}

inline std::vector<double> one_hot(int label, int num_categories) {
    if (label < 0 || label >= num_categories) throw std::out_of_range("label out of range for one-hot");
    std::vector<double> v(static_cast<std::size_t>(num_categories), 0.0);
    v[static_cast<std::size_t>(label)] = 1.0;
    return v;
}

/// Normalized simplex-vertex embedding: row i = (e_i - 1/N) / sqrt(1 - 1/N).
/// Rows are unit length, zero-sum, with pairwise dot -1/(N-1).
class EmbeddingTable {
public:
    explicit EmbeddingTable(int num_categories) : n_(num_categories) {
        if (n_ < 2) throw std::invalid_argument("embedding needs N >= 2");
        const double inv_n = 1.0 / n_;
        const double denom = std::sqrt(1.0 - inv_n);
        rows_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                rows_[static_cast<std::size_t>(i * n_ + j)] = ((i == j ? 1.0 : 0.0) - inv_n) / denom;
    }

    int num_categories() const { return n_; }
    std::span<const double> row(int i) const {
        if (i < 0 || i >= n_) throw std::out_of_range("category out of range for embedding");
        return std::span<const double>(rows_).subspan(static_cast<std::size_t>(i * n_), static_cast<std::size_t>(n_));
    }

private:
    int n_;
    std::vector<double> rows_;
};

inline EmbeddingTable build_table(int num_categories) { return EmbeddingTable(num_categories); }

inline Field embed_model(const GeoModel& model, const EmbeddingTable& table) {
    const int n = table.num_categories();
    if (model.num_categories() != n) throw std::invalid_argument("embedding N does not match model N");
    Field f(n, model.grid().dims);
    const std::size_t voxels = f.voxels();
    for (std::size_t v = 0; v < voxels; ++v) {
        const auto r = table.row(model.at(v));
        for (int c = 0; c < n; ++c) f(c, v) = r[static_cast<std::size_t>(c)];
    }
    return f;
}

/// argmax_i <v, row_i>; ties go to the smallest index.
///
/// For this table <v, row_i> = (v_i - mean(v)) / sqrt(1 - 1/N), so the
/// argmax is taken over the components of v directly. Exact ties then stay
/// exact regardless of summation order.
inline int decode_voxel(std::span<const double> v, const EmbeddingTable& table) {
    const int n = table.num_categories();
    if (static_cast<int>(v.size()) != n) throw std::invalid_argument("decode: vector length does not match N");
    bool nonzero = false;
    for (double x : v) {
        if (!std::isfinite(x)) throw std::invalid_argument("undecodable voxel");
        nonzero = nonzero || x != 0.0;
    }
    if (!nonzero) throw std::invalid_argument("undecodable voxel");
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
    return best;
}

inline GeoModel decode_model(const Field& field, const EmbeddingTable& table, const GridSpec& grid) {
    const int n = table.num_categories();
    if (field.channels() != n) throw std::invalid_argument("decode: channel count does not match N");
    if (!(field.dims() == grid.dims)) throw std::invalid_argument("decode: field dims do not match grid");
    std::vector<Label> labels(field.voxels());
    std::vector<double> v(static_cast<std::size_t>(n));
    for (std::size_t x = 0; x < labels.size(); ++x) {
        for (int c = 0; c < n; ++c) v[static_cast<std::size_t>(c)] = field(c, x);
        try {
            labels[x] = static_cast<Label>(decode_voxel(v, table));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string(e.what()) + " at voxel " + std::to_string(x));
        }
    }
    return GeoModel(grid, n, std::move(labels));
}

}  // namespace geoforge
