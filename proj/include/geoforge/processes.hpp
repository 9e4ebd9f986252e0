#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "geoforge/grid.hpp"
#include "geoforge/vec3.hpp"

namespace geoforge {

// ---------------------------------------------------------------------------
// Transformations: m'(x) = m(x + u(x)).
// ---------------------------------------------------------------------------

/// Sinusoidal fold: u = amplitude * sin(2*pi*(x.direction)/wavelength + phase) * displacement_axis.
struct FoldParams {
    Vec3 direction{1, 0, 0};
    Vec3 displacement_axis{0, 0, 1};
    double amplitude = 0.0;
    double wavelength = 1.0;
    double phase = 0.0;

    friend bool operator==(const FoldParams&, const FoldParams&) = default;
};

/// Rigid offset of the half-space (x - plane_point).plane_normal >= 0.
struct FaultParams {
    Vec3 plane_point{};
    Vec3 plane_normal{0, 0, 1};
    Vec3 slip{};

    friend bool operator==(const FaultParams&, const FaultParams&) = default;
};

/// Simple shear parallel to a plane: u grows linearly with signed distance.
struct ShearParams {
    Vec3 plane_point{};
    Vec3 plane_normal{0, 0, 1};
    Vec3 shear_direction{1, 0, 0};
    double gradient = 0.0;

    friend bool operator==(const ShearParams&, const ShearParams&) = default;
};

/// Rigid rotation about `axis` through `pivot`; sampled backward by -angle.
struct TiltParams {
    Vec3 axis{1, 0, 0};
    Vec3 pivot{};
    double angle = 0.0;

    friend bool operator==(const TiltParams&, const TiltParams&) = default;
};

using Transformation = std::variant<FoldParams, FaultParams, ShearParams, TiltParams>;

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

inline bool orthogonal(const Vec3& a, const Vec3& b, double tol = 1e-9) { return std::abs(dot(a, b)) <= tol; }

}  // namespace detail

inline void validate(const FoldParams& p) {
    detail::require(is_unit(p.direction) && is_unit(p.displacement_axis), "fold: direction and axis must be unit");
    detail::require(detail::orthogonal(p.direction, p.displacement_axis), "fold: axis must be orthogonal to direction");
    detail::require(p.amplitude >= 0.0 && std::isfinite(p.amplitude), "fold: amplitude must be >= 0");
    detail::require(p.wavelength > 0.0 && std::isfinite(p.wavelength), "fold: wavelength must be > 0");
    detail::require(std::isfinite(p.phase), "fold: phase must be finite");
}

inline void validate(const FaultParams& p) {
    detail::require(is_finite(p.plane_point) && is_finite(p.slip), "fault: non-finite parameters");
    detail::require(is_unit(p.plane_normal), "fault: plane_normal must be unit");
    detail::require(detail::orthogonal(p.slip, p.plane_normal), "fault: slip must lie in the fault plane");
}

inline void validate(const ShearParams& p) {
    detail::require(is_finite(p.plane_point) && std::isfinite(p.gradient), "shear: non-finite parameters");
    detail::require(is_unit(p.plane_normal) && is_unit(p.shear_direction), "shear: unit vectors required");
    detail::require(detail::orthogonal(p.plane_normal, p.shear_direction),
                    "shear: direction must be orthogonal to plane_normal");
}

inline void validate(const TiltParams& p) {
    detail::require(is_unit(p.axis), "tilt: axis must be unit");
    detail::require(is_finite(p.pivot) && std::isfinite(p.angle), "tilt: non-finite parameters");
}

inline void validate(const Transformation& t) {
    std::visit([](const auto& p) { validate(p); }, t);
}

/// Right-continuous Heaviside step, H(0) = 1.
constexpr double heaviside(double s) { return s >= 0.0 ? 1.0 : 0.0; }

inline Vec3 displacement(const FoldParams& p, const Vec3& x) {
    const double arg = 2.0 * std::numbers::pi * dot(x, p.direction) / p.wavelength + p.phase;
    return (p.amplitude * std::sin(arg)) * p.displacement_axis;
}

inline Vec3 displacement(const FaultParams& p, const Vec3& x) {
    return heaviside(dot(x - p.plane_point, p.plane_normal)) * p.slip;
}

inline Vec3 displacement(const ShearParams& p, const Vec3& x) {
    return (p.gradient * dot(x - p.plane_point, p.plane_normal)) * p.shear_direction;
}

inline Vec3 displacement(const TiltParams& p, const Vec3& x) {
    return rotate(x - p.pivot, p.axis, -p.angle) + p.pivot - x;
}

inline Vec3 displacement(const Transformation& t, const Vec3& x) {
    if (!is_finite(x)) throw std::invalid_argument("invalid coordinates");
    const Vec3 u = std::visit([&](const auto& p) { return displacement(p, x); }, t);
    if (!is_finite(u)) throw std::invalid_argument("invalid coordinates");
    return u;
}

/// Backward-interpolated transformation of a whole model.
inline GeoModel apply_transformation(const GeoModel& model, const Transformation& t) {
    validate(t);
    const GridSpec& g = model.grid();
    std::vector<Label> out(g.voxel_count());
    for (std::size_t n = 0; n < out.size(); ++n) {
        const Vec3 x = voxel_center(g, g.unlinear(n));
        out[n] = sample_label(model, x + displacement(t, x));
    }
    return GeoModel(g, model.num_categories(), std::move(out));
}

// ---------------------------------------------------------------------------
// Windows and depositions.
// ---------------------------------------------------------------------------

/// Axis-angle rotation. The identity is angle 0 about any unit axis.
struct Rotation {
    Vec3 axis{0, 0, 1};
    double angle = 0.0;

    friend bool operator==(const Rotation&, const Rotation&) = default;
};

/// Maps the canonical box [-1,1)^3 into world space: scale, then rotate,
/// then translate, then bend.
struct WindowParams {
    Vec3 scale{1, 1, 1};
    Rotation rotation{};
    Vec3 translation{};
    std::optional<FoldParams> bend{};

    friend bool operator==(const WindowParams&, const WindowParams&) = default;
};

enum class DepositMode { Overwrite, FillAir };

inline void validate(const WindowParams& w) {
    detail::require(w.scale.x > 0.0 && w.scale.y > 0.0 && w.scale.z > 0.0 && is_finite(w.scale),
                    "window: scale components must be > 0");
    detail::require(is_unit(w.rotation.axis) && std::isfinite(w.rotation.angle), "window: invalid rotation");
    detail::require(is_finite(w.translation), "window: translation must be finite");
    if (w.bend) validate(*w.bend);
}

/// w0(x) = prod_i (H(x_i + 1) - H(x_i - 1)); the unit box, closed below.
inline int canonical_window(const Vec3& x) {
    const double w = (heaviside(x.x + 1.0) - heaviside(x.x - 1.0)) * (heaviside(x.y + 1.0) - heaviside(x.y - 1.0)) *
                     (heaviside(x.z + 1.0) - heaviside(x.z - 1.0));
    return w != 0.0 ? 1 : 0;
}

/// Pulls a world coordinate back to canonical window coordinates:
/// unbend, untranslate, unrotate, unscale.
inline Vec3 window_inverse_map(const WindowParams& w, Vec3 x) {
    if (w.bend) x += displacement(*w.bend, x);
    x -= w.translation;
    if (w.rotation.angle != 0.0) x = rotate(x, w.rotation.axis, -w.rotation.angle);
    return {x.x / w.scale.x, x.y / w.scale.y, x.z / w.scale.z};
}

inline int window_indicator(const WindowParams& w, const Vec3& x) { return canonical_window(window_inverse_map(w, x)); }

/// D(m, a) = (1 - w) m + a w. FillAir restricts the replacement to air voxels.
inline GeoModel apply_deposition(const GeoModel& model, const WindowParams& window, int category, DepositMode mode) {
    if (category < 0 || category >= model.num_categories())
        throw std::invalid_argument("deposition category " + std::to_string(category) + " out of range");
    validate(window);
    const GridSpec& g = model.grid();
    std::vector<Label> out(model.labels());
    for (std::size_t n = 0; n < out.size(); ++n) {
        if (mode == DepositMode::FillAir && out[n] != kAir) continue;
        const int w = window_indicator(window, voxel_center(g, g.unlinear(n)));
        out[n] = static_cast<Label>((1 - w) * out[n] + category * w);
    }
    return GeoModel(g, model.num_categories(), std::move(out));
}

// ---------------------------------------------------------------------------
// Initial strata.
// ---------------------------------------------------------------------------

struct StrataParams {
    std::vector<double> thicknesses;
    std::vector<int> categories;
    double base_elevation = 0.0;

    friend bool operator==(const StrataParams&, const StrataParams&) = default;
};

/// Horizontal layering m0(x3): basement below `base_elevation`, the listed
/// layers stacked upward, air above the stack.
inline GeoModel init_strata(const GridSpec& grid, int num_categories, const StrataParams& strata) {
    if (strata.thicknesses.size() != strata.categories.size())
        throw std::invalid_argument("strata: thickness and category lists differ in length");
    if (strata.thicknesses.empty()) throw std::invalid_argument("strata: at least one layer required");
    if (!std::isfinite(strata.base_elevation)) throw std::invalid_argument("strata: base_elevation must be finite");
    for (double t : strata.thicknesses)
        if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("strata: thicknesses must be > 0");
    for (int c : strata.categories)
        if (c <= 0 || c >= num_categories) throw std::invalid_argument("strata: layer category out of range");

    std::vector<double> tops(strata.thicknesses.size());
    double acc = strata.base_elevation;
    for (std::size_t i = 0; i < tops.size(); ++i) tops[i] = acc += strata.thicknesses[i];

    const GridSpec g = grid;
    g.validate();
    std::vector<Label> column(static_cast<std::size_t>(g.dims.z));
    for (int k = 0; k < g.dims.z; ++k) {
        const double z = g.origin.z + k * g.voxel_size;
        Label l = kAir;
        if (z < strata.base_elevation) {
            l = kBasement;
        } else {
            for (std::size_t i = 0; i < tops.size(); ++i)
                if (z < tops[i]) {
                    l = static_cast<Label>(strata.categories[i]);
                    break;
                }
        }
        column[static_cast<std::size_t>(k)] = l;
    }
    std::vector<Label> labels(g.voxel_count());
    const std::size_t slab = static_cast<std::size_t>(g.dims.x) * static_cast<std::size_t>(g.dims.y);
    for (std::size_t n = 0; n < labels.size(); ++n) labels[n] = column[n / slab];
    return GeoModel(g, num_categories, std::move(labels));
}

}  // namespace geoforge
