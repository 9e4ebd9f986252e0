#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "geoforge/codec.hpp"
#include "geoforge/flow.hpp"
#include "geoforge/grid.hpp"
#include "geoforge/rng.hpp"

namespace geoforge {

enum class Provenance { Borehole, Surface, Merged };

struct ObservedVoxel {
    Index3 index;
    Label label;

    friend bool operator==(const ObservedVoxel&, const ObservedVoxel&) = default;
};

/// Observed voxels d = A m. Entries are kept sorted by linear index and
/// contain no duplicates.
class SparseObservation {
public:
    SparseObservation(GridSpec grid, Provenance provenance, std::vector<ObservedVoxel> entries = {})
        : grid_(std::move(grid)), provenance_(provenance), entries_(std::move(entries)) {
        for (const auto& e : entries_)
            if (!grid_.contains(e.index)) throw std::out_of_range("observation index out of bounds");
        std::sort(entries_.begin(), entries_.end(),
                  [&](const ObservedVoxel& a, const ObservedVoxel& b) { return grid_.linear(a.index) < grid_.linear(b.index); });
        for (std::size_t i = 1; i < entries_.size(); ++i)
            if (entries_[i].index == entries_[i - 1].index) throw std::invalid_argument("duplicate observation index");
    }

    const GridSpec& grid() const { return grid_; }
    Provenance provenance() const { return provenance_; }
    const std::vector<ObservedVoxel>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// Throws unless every category is below `num_categories`.
    void check_categories(int num_categories) const {
        for (const auto& e : entries_)
            if (e.label >= num_categories) throw std::invalid_argument("observed category out of range");
    }

private:
    GridSpec grid_;
    Provenance provenance_;
    std::vector<ObservedVoxel> entries_;
};

/// `count` distinct vertical columns, chosen uniformly without replacement,
/// each recorded over its full depth.
inline SparseObservation extract_boreholes(const GeoModel& model, std::size_t count, Rng& rng) {
    const GridSpec& g = model.grid();
    const std::size_t columns = static_cast<std::size_t>(g.dims.x) * static_cast<std::size_t>(g.dims.y);
    if (count > columns) throw std::invalid_argument("borehole count exceeds number of columns");
    std::vector<std::size_t> order(columns);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `count` slots are the sample.
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(columns - i));
        std::swap(order[i], order[j]);
    }
    std::vector<ObservedVoxel> entries;
    entries.reserve(count * static_cast<std::size_t>(g.dims.z));
    for (std::size_t i = 0; i < count; ++i) {
        const int x = static_cast<int>(order[i] % static_cast<std::size_t>(g.dims.x));
        const int y = static_cast<int>(order[i] / static_cast<std::size_t>(g.dims.x));
        for (int z = 0; z < g.dims.z; ++z) entries.push_back({{x, y, z}, model.at({x, y, z})});
    }
    return SparseObservation(g, Provenance::Borehole, std::move(entries));
}

/// Topmost non-air voxel of every column; all-air columns are skipped.
inline SparseObservation extract_surface(const GeoModel& model) {
    const GridSpec& g = model.grid();
    std::vector<ObservedVoxel> entries;
    for (int y = 0; y < g.dims.y; ++y)
        for (int x = 0; x < g.dims.x; ++x)
            for (int z = g.dims.z - 1; z >= 0; --z) {
                const Label l = model.at({x, y, z});
                if (l != kAir) {
                    entries.push_back({{x, y, z}, l});
                    break;
                }
            }
    return SparseObservation(g, Provenance::Surface, std::move(entries));
}

inline SparseObservation merge(const SparseObservation& a, const SparseObservation& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("cannot merge observations on different grids");
    const GridSpec& g = a.grid();
    std::vector<ObservedVoxel> out;
    out.reserve(a.size() + b.size());
    auto ia = a.entries().begin();
    auto ib = b.entries().begin();
    while (ia != a.entries().end() || ib != b.entries().end()) {
        if (ib == b.entries().end() || (ia != a.entries().end() && g.linear(ia->index) < g.linear(ib->index))) {
            out.push_back(*ia++);
        } else if (ia == a.entries().end() || g.linear(ib->index) < g.linear(ia->index)) {
            out.push_back(*ib++);
        } else {
            if (ia->label != ib->label)
                throw std::invalid_argument("conflicting observations at voxel (" + std::to_string(ia->index.x) + "," +
                                            std::to_string(ia->index.y) + "," + std::to_string(ia->index.z) + ")");
            out.push_back(*ia++);
            ++ib;
        }
    }
    return SparseObservation(g, Provenance::Merged, std::move(out));
}

/// Mask of observed voxels and the embedded data A^T d.
inline Guidance to_guidance(const SparseObservation& obs, const EmbeddingTable& table) {
    const GridSpec& g = obs.grid();
    obs.check_categories(table.num_categories());
    Guidance out{std::vector<std::uint8_t>(g.voxel_count(), 0), Field(table.num_categories(), g.dims)};
    for (const auto& e : obs.entries()) {
        const std::size_t v = g.linear(e.index);
        out.mask[v] = 1;
        const auto row = table.row(e.label);
        for (int c = 0; c < table.num_categories(); ++c) out.data(c, v) = row[static_cast<std::size_t>(c)];
    }
    return out;
}

/// Per-voxel frequency of one category across an ensemble. Stored as exact
/// counts; value = count / ensemble_size.
class ProbVolume {
public:
    ProbVolume(GridSpec grid, int target_category, std::size_t ensemble_size, std::vector<std::uint32_t> counts)
        : grid_(std::move(grid)), target_(target_category), size_(ensemble_size), counts_(std::move(counts)) {
        if (size_ == 0) throw std::invalid_argument("probability volume needs a nonempty ensemble");
        if (counts_.size() != grid_.voxel_count()) throw std::invalid_argument("probability volume size mismatch");
        for (auto c : counts_)
            if (c > size_) throw std::invalid_argument("count exceeds ensemble size");
    }

    const GridSpec& grid() const { return grid_; }
    int target_category() const { return target_; }
    std::size_t ensemble_size() const { return size_; }
    const std::vector<std::uint32_t>& counts() const { return counts_; }
    double value(std::size_t voxel) const { return static_cast<double>(counts_[voxel]) / static_cast<double>(size_); }
    std::vector<double> values() const {
        std::vector<double> v(counts_.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = value(i);
        return v;
    }

private:
    GridSpec grid_;
    int target_;
    std::size_t size_;
    std::vector<std::uint32_t> counts_;
};

inline ProbVolume ensemble_probability(std::span<const GeoModel> models, int category) {
    if (models.empty()) throw std::invalid_argument("ensemble is empty");
    const GridSpec& g = models.front().grid();
    const int n = models.front().num_categories();
    if (category < 0 || category >= n) throw std::invalid_argument("ensemble category out of range");
    std::vector<std::uint32_t> counts(g.voxel_count(), 0);
    for (const GeoModel& m : models) {
        if (!(m.grid() == g) || m.num_categories() != n) throw std::invalid_argument("ensemble members have mixed grids");
        for (std::size_t v = 0; v < counts.size(); ++v) counts[v] += m.at(v) == category ? 1u : 0u;
    }
    return ProbVolume(g, category, models.size(), std::move(counts));
}

struct BinaryVolume {
    GridSpec grid;
    std::vector<std::uint8_t> values;
};

/// 1 where the probability is at least `level`.
inline BinaryVolume threshold(const ProbVolume& prob, double level) {
    if (!(level >= 0.0 && level <= 1.0)) throw std::invalid_argument("threshold level must be in [0, 1]");
    BinaryVolume out{prob.grid(), std::vector<std::uint8_t>(prob.counts().size())};
    for (std::size_t v = 0; v < out.values.size(); ++v) out.values[v] = prob.value(v) >= level ? 1 : 0;
    return out;
}

}  // namespace geoforge
