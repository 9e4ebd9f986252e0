#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "geoforge/vec3.hpp"

namespace geoforge {

/// Category id; 0 is air, 1 is basement, rock units start at 2.
using Label = std::uint8_t;

inline constexpr Label kAir = 0;
inline constexpr Label kBasement = 1;

struct Index3 {
    int x = 0;
    int y = 0;
    int z = 0;

    friend constexpr bool operator==(const Index3&, const Index3&) = default;
};

/// Uniform cubic voxel lattice. `origin` is the center of voxel (0,0,0) and
/// +z points up.
struct GridSpec {
    Index3 dims{1, 1, 1};
    double voxel_size = 1.0;
    Vec3 origin{};

    GridSpec() = default;
    GridSpec(Index3 d, double size, Vec3 o = {}) : dims(d), voxel_size(size), origin(o) { validate(); }

    void validate() const {
        if (dims.x < 1 || dims.y < 1 || dims.z < 1) throw std::invalid_argument("grid dims must be >= 1");
        if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) throw std::invalid_argument("voxel_size must be > 0");
        if (!is_finite(origin)) throw std::invalid_argument("grid origin must be finite");
    }

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims.x) * static_cast<std::size_t>(dims.y) * static_cast<std::size_t>(dims.z);
    }

    /// Physical edge lengths, dims * voxel_size.
    Vec3 extent() const { return {dims.x * voxel_size, dims.y * voxel_size, dims.z * voxel_size}; }

    /// Axis-aligned bounds of the voxel faces.
    Vec3 lower_corner() const { return origin - 0.5 * Vec3{voxel_size, voxel_size, voxel_size}; }
    Vec3 upper_corner() const { return lower_corner() + extent(); }

    bool contains(const Index3& i) const {
        return i.x >= 0 && i.y >= 0 && i.z >= 0 && i.x < dims.x && i.y < dims.y && i.z < dims.z;
    }

    /// x-fastest linear index.
    std::size_t linear(const Index3& i) const {
        return static_cast<std::size_t>(i.x) +
               static_cast<std::size_t>(dims.x) *
                   (static_cast<std::size_t>(i.y) + static_cast<std::size_t>(dims.y) * static_cast<std::size_t>(i.z));
    }

    Index3 unlinear(std::size_t n) const {
        const auto nx = static_cast<std::size_t>(dims.x);
        const auto ny = static_cast<std::size_t>(dims.y);
        return {static_cast<int>(n % nx), static_cast<int>((n / nx) % ny), static_cast<int>(n / (nx * ny))};
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline Vec3 voxel_center(const GridSpec& grid, const Index3& index) {
    if (!grid.contains(index)) throw std::out_of_range("index out of bounds");
    return {grid.origin.x + index.x * grid.voxel_size, grid.origin.y + index.y * grid.voxel_size,
            grid.origin.z + index.z * grid.voxel_size};
}

/// Nearest voxel coordinate along one axis, unclamped. Exact midpoints round
/// toward negative infinity. Far-away positions saturate at +-2^40.
inline long nearest_axis_index(double position, double origin, double voxel_size) {
    constexpr double kLimit = 0x1.0p40;
    double q = std::ceil((position - origin) / voxel_size - 0.5);
    q = q < -kLimit ? -kLimit : (q > kLimit ? kLimit : q);
    return static_cast<long>(q);
}

/// Dense categorical volume. Immutable once built.
class GeoModel {
public:
    GeoModel(GridSpec grid, int num_categories, std::vector<Label> labels)
        : grid_(std::move(grid)), num_categories_(num_categories), labels_(std::move(labels)) {
        grid_.validate();
        if (num_categories_ < 2 || num_categories_ > 256)
            throw std::invalid_argument("num_categories must be in [2, 256]");
        if (labels_.size() != grid_.voxel_count()) throw std::invalid_argument("label array size does not match grid");
        for (Label l : labels_)
            if (l >= num_categories_)
                throw std::invalid_argument("label " + std::to_string(l) + " out of range for N=" +
                                            std::to_string(num_categories_));
    }

    /// Constant-valued model.
    static GeoModel filled(const GridSpec& grid, int num_categories, Label value) {
        return GeoModel(grid, num_categories, std::vector<Label>(grid.voxel_count(), value));
    }

    const GridSpec& grid() const { return grid_; }
    int num_categories() const { return num_categories_; }
    const std::vector<Label>& labels() const { return labels_; }

    Label at(const Index3& i) const {
        if (!grid_.contains(i)) throw std::out_of_range("index out of bounds");
        return labels_[grid_.linear(i)];
    }
    Label at(std::size_t linear) const { return labels_[linear]; }

    friend bool operator==(const GeoModel&, const GeoModel&) = default;

private:
    GridSpec grid_;
    int num_categories_;
    std::vector<Label> labels_;
};

/// Backward-interpolation lookup: label of the voxel whose center is nearest
/// to `position`. Outside the volume, lateral coordinates are clamped first;
/// then anything above the top face is air and anything below the bottom
/// face is basement.
inline Label sample_label(const GeoModel& model, const Vec3& position) {
    const GridSpec& g = model.grid();
    if (!is_finite(position)) return kAir;
    const long k = nearest_axis_index(position.z, g.origin.z, g.voxel_size);
    if (k >= g.dims.z) return kAir;
    if (k < 0) return kBasement;
    auto clamp_axis = [](long v, int n) { return static_cast<int>(v < 0 ? 0 : (v >= n ? n - 1 : v)); };
    const long i = nearest_axis_index(position.x, g.origin.x, g.voxel_size);
    const long j = nearest_axis_index(position.y, g.origin.y, g.voxel_size);
    return model.at(g.linear({clamp_axis(i, g.dims.x), clamp_axis(j, g.dims.y), static_cast<int>(k)}));
}

}  // namespace geoforge
