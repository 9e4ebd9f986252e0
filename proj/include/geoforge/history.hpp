#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "geoforge/grid.hpp"
#include "geoforge/processes.hpp"
#include "geoforge/rng.hpp"

namespace geoforge {

enum class ProcessKind : int { Fold = 0, Fault, Shear, Tilt, Dike, Sediment, Erosion, End };

inline constexpr int kProcessKinds = 7;
inline constexpr int kChainStates = 8;  // the seven kinds plus End

inline constexpr std::array<std::string_view, kChainStates> kKindNames = {"FOLD", "FAULT",    "SHEAR",   "TILT",
                                                                          "DIKE", "SEDIMENT", "EROSION", "END"};

inline std::string_view to_string(ProcessKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

inline ProcessKind kind_from_string(std::string_view name) {
    for (int i = 0; i < kChainStates; ++i)
        if (kKindNames[static_cast<std::size_t>(i)] == name) return static_cast<ProcessKind>(i);
    throw std::invalid_argument("unknown process kind '" + std::string(name) + "'");
}

/// A windowed replacement (dike intrusion, erosion).
struct Deposition {
    WindowParams window{};
    int category = 0;
    DepositMode mode = DepositMode::Overwrite;

    friend bool operator==(const Deposition&, const Deposition&) = default;
};

/// Sediment package: layers accumulate in air only, bottom-up from
/// `base_elevation`. The first layer also fills any air below the base.
struct SedimentParams {
    double base_elevation = 0.0;
    std::vector<double> thicknesses;
    std::vector<int> categories;

    friend bool operator==(const SedimentParams&, const SedimentParams&) = default;
};

using ProcessParams = std::variant<FoldParams, FaultParams, ShearParams, TiltParams, Deposition, SedimentParams>;

struct ProcessDescriptor {
    ProcessKind kind = ProcessKind::Fold;
    ProcessParams params{};

    friend bool operator==(const ProcessDescriptor&, const ProcessDescriptor&) = default;
};

struct History {
    StrataParams initial{};
    std::vector<ProcessDescriptor> steps;
    std::uint64_t seed = 0;

    friend bool operator==(const History&, const History&) = default;
};

// ---------------------------------------------------------------------------
// Markov chain over process kinds.
// ---------------------------------------------------------------------------

using StateDistribution = std::array<double, kChainStates>;

/// `start` is the distribution of the first state; `rows[k]` is the
/// distribution of the next state after kind k. Index 7 is End.
struct TransitionMatrix {
    StateDistribution start{};
    std::array<StateDistribution, kProcessKinds> rows{};

    /// Start in `first`; after every kind, End with `end_probability` and
    /// otherwise uniform over the seven kinds.
    static TransitionMatrix uniform(double end_probability = 0.15, ProcessKind first = ProcessKind::Sediment) {
        TransitionMatrix m;
        m.start[static_cast<std::size_t>(first)] = 1.0;
        for (auto& row : m.rows) {
            row.fill((1.0 - end_probability) / kProcessKinds);
            row[kChainStates - 1] = end_probability;
        }
        return m;
    }

    void validate() const {
        check_row(start, "start");
        for (int k = 0; k < kProcessKinds; ++k) check_row(rows[static_cast<std::size_t>(k)], std::string(kKindNames[static_cast<std::size_t>(k)]));
    }

    static void check_row(const StateDistribution& row, const std::string& name) {
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("transition row " + name + ": negative or non-finite entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("transition row " + name + ": does not sum to 1");
    }
};

/// Inverse-CDF draw from the row for `prev` (std::nullopt = the start row).
inline ProcessKind sample_next(const TransitionMatrix& chain, std::optional<ProcessKind> prev, Rng& rng) {
    if (prev && *prev == ProcessKind::End) throw std::invalid_argument("no transitions out of END");
    const StateDistribution& row = prev ? chain.rows[static_cast<std::size_t>(*prev)] : chain.start;
    TransitionMatrix::check_row(row, prev ? std::string(to_string(*prev)) : "start");
    const double u = rng.uniform();
    double cum = 0.0;
    int last_positive = 0;
    for (int s = 0; s < kChainStates; ++s) {
        const double p = row[static_cast<std::size_t>(s)];
        if (p <= 0.0) continue;
        last_positive = s;
        cum += p;
        if (u < cum) return static_cast<ProcessKind>(s);
    }
    return static_cast<ProcessKind>(last_positive);
}

// ---------------------------------------------------------------------------
// Parameter priors.
// ---------------------------------------------------------------------------

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    friend bool operator==(const Range&, const Range&) = default;
};

/// Independent per-parameter distributions. Lengths are in meters, angles in
/// degrees; positions are drawn uniformly inside `domain`.
struct ParamPriors {
    GridSpec domain{};
    int num_categories = 8;
    /// Weight per deposit category (index = category id). Empty means uniform
    /// over the rock categories 2..N-1 (or {1} when N = 2).
    std::vector<double> category_weights{};

    Range strata_thickness{100, 600};
    Range strata_fill_fraction{0.6, 0.95};

    Range fold_amplitude{50, 500};
    Range fold_wavelength{500, 5000};  // log-uniform
    Range fold_axis_tilt_deg{0, 20};

    Range fault_slip{60, 600};
    Range fault_dip_deg{45, 90};

    Range shear_gradient{-0.25, 0.25};
    Range shear_dip_deg{0, 90};

    Range tilt_angle_deg{-15, 15};

    Range dike_half_thickness{30, 120};
    Range dike_dip_deg{60, 90};

    Range sediment_layers{1, 3};  // integer, inclusive
    Range sediment_thickness{100, 600};
    Range sediment_base_fraction{0.3, 0.9};

    Range erosion_level_fraction{2.0 / 3.0, 1.0};
    double erosion_bend_probability = 0.5;
    Range erosion_bend_amplitude{50, 300};
    Range erosion_bend_wavelength{1000, 5000};  // log-uniform

    static ParamPriors for_grid(const GridSpec& grid, int num_categories) {
        ParamPriors p;
        p.domain = grid;
        p.num_categories = num_categories;
        return p;
    }

    void validate() const {
        domain.validate();
        if (num_categories < 2 || num_categories > 256) throw std::invalid_argument("priors: num_categories out of range");
        const std::pair<const Range*, const char*> ranges[] = {
            {&strata_thickness, "strata_thickness"},   {&strata_fill_fraction, "strata_fill_fraction"},
            {&fold_amplitude, "fold_amplitude"},       {&fold_wavelength, "fold_wavelength"},
            {&fold_axis_tilt_deg, "fold_axis_tilt_deg"}, {&fault_slip, "fault_slip"},
            {&fault_dip_deg, "fault_dip_deg"},         {&shear_gradient, "shear_gradient"},
            {&shear_dip_deg, "shear_dip_deg"},         {&tilt_angle_deg, "tilt_angle_deg"},
            {&dike_half_thickness, "dike_half_thickness"}, {&dike_dip_deg, "dike_dip_deg"},
            {&sediment_layers, "sediment_layers"},     {&sediment_thickness, "sediment_thickness"},
            {&sediment_base_fraction, "sediment_base_fraction"}, {&erosion_level_fraction, "erosion_level_fraction"},
            {&erosion_bend_amplitude, "erosion_bend_amplitude"}, {&erosion_bend_wavelength, "erosion_bend_wavelength"},
        };
        for (auto [r, name] : ranges)
            if (!(r->lo <= r->hi) || !std::isfinite(r->lo) || !std::isfinite(r->hi))
                throw std::invalid_argument(std::string("priors: empty range ") + name);
        auto positive = [](const Range& r) { return r.lo > 0.0; };
        if (!positive(strata_thickness) || !positive(fold_wavelength) || !positive(dike_half_thickness) ||
            !positive(sediment_thickness) || !positive(erosion_bend_wavelength) || !positive(sediment_layers))
            throw std::invalid_argument("priors: lengths, wavelengths and layer counts must be positive");
        if (fold_amplitude.lo < 0.0 || erosion_bend_amplitude.lo < 0.0)
            throw std::invalid_argument("priors: amplitudes must be >= 0");
        if (std::abs(tilt_angle_deg.lo) > 45.0 || std::abs(tilt_angle_deg.hi) > 45.0)
            throw std::invalid_argument("priors: |tilt angle| must be <= 45 degrees");
        if (!(erosion_bend_probability >= 0.0 && erosion_bend_probability <= 1.0))
            throw std::invalid_argument("priors: erosion_bend_probability must be in [0,1]");
        if (!category_weights.empty()) {
            if (static_cast<int>(category_weights.size()) != num_categories)
                throw std::invalid_argument("priors: category_weights must have N entries");
            double sum = 0.0;
            for (double w : category_weights) {
                if (!(w >= 0.0)) throw std::invalid_argument("priors: negative category weight");
                sum += w;
            }
            if (category_weights[kAir] > 0.0) throw std::invalid_argument("priors: air cannot be a deposit category");
            if (!(sum > 0.0)) throw std::invalid_argument("priors: category weights sum to zero");
        }
    }
};

namespace detail {

inline double sample(const Range& r, Rng& rng) { return rng.uniform(r.lo, r.hi); }
inline double sample_log(const Range& r, Rng& rng) { return rng.log_uniform(r.lo, r.hi); }
inline double deg(double d) { return d * std::numbers::pi / 180.0; }

inline int sample_category(const ParamPriors& p, Rng& rng) {
    if (p.category_weights.empty()) {
        if (p.num_categories == 2) return kBasement;
        return 2 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(p.num_categories - 2)));
    }
    double total = 0.0;
    for (double w : p.category_weights) total += w;
    const double u = rng.uniform() * total;
    double cum = 0.0;
    int last = 1;
    for (int c = 0; c < p.num_categories; ++c) {
        const double w = p.category_weights[static_cast<std::size_t>(c)];
        if (w <= 0.0) continue;
        last = c;
        cum += w;
        if (u < cum) return c;
    }
    return last;
}

inline Vec3 sample_point(const GridSpec& g, Rng& rng) {
    const Vec3 lo = g.lower_corner();
    const Vec3 hi = g.upper_corner();
    const double x = rng.uniform(lo.x, hi.x);
    const double y = rng.uniform(lo.y, hi.y);
    const double z = rng.uniform(lo.z, hi.z);
    return {x, y, z};
}

inline Vec3 horizontal(double azimuth) { return {std::cos(azimuth), std::sin(azimuth), 0.0}; }

/// Unit normal of a plane with the given strike azimuth and dip (radians).
inline Vec3 plane_normal(double strike, double dip) {
    const Vec3 dip_dir = horizontal(strike + std::numbers::pi / 2.0);
    return normalized(std::sin(dip) * dip_dir + Vec3{0, 0, std::cos(dip)});
}

inline double largest_extent(const GridSpec& g) {
    const Vec3 e = g.extent();
    return std::max({e.x, e.y, e.z});
}

/// Axis-angle rotation carrying e_x onto the unit vector `n`.
inline Rotation rotation_from_x(const Vec3& n) {
    const Vec3 ex{1, 0, 0};
    const Vec3 c = cross(ex, n);
    const double s = norm(c);
    if (s < 1e-12) return dot(ex, n) > 0 ? Rotation{} : Rotation{{0, 0, 1}, std::numbers::pi};
    return {normalized(c), std::atan2(s, dot(ex, n))};
}

}  // namespace detail

/// Window covering the horizontal slab lo <= z < hi across the whole domain.
inline WindowParams slab_window(const GridSpec& g, double lo, double hi) {
    const double lateral = 4.0 * detail::largest_extent(g);
    const Vec3 mid = 0.5 * (g.lower_corner() + g.upper_corner());
    WindowParams w;
    w.scale = {lateral, lateral, 0.5 * (hi - lo)};
    w.translation = {mid.x, mid.y, 0.5 * (lo + hi)};
    return w;
}

inline StrataParams sample_strata(const ParamPriors& p, Rng& rng) {
    StrataParams s;
    const double bottom = p.domain.lower_corner().z;
    s.base_elevation = bottom;
    const double fill = detail::sample(p.strata_fill_fraction, rng) * p.domain.extent().z;
    double total = 0.0;
    while (total < fill) {
        double t = detail::sample(p.strata_thickness, rng);
        if (total + t > fill) t = fill - total;
        if (!(t > 0.0)) break;
        s.thicknesses.push_back(t);
        s.categories.push_back(detail::sample_category(p, rng));
        total += t;
    }
    if (s.thicknesses.empty()) {
        s.thicknesses.push_back(p.domain.voxel_size);
        s.categories.push_back(detail::sample_category(p, rng));
    }
    return s;
}

/// Draws fully instantiated parameters for one process of the given kind.
inline ProcessDescriptor sample_process(ProcessKind kind, const ParamPriors& p, Rng& rng) {
    using namespace detail;
    const GridSpec& g = p.domain;
    const double pi = std::numbers::pi;
    ProcessDescriptor d{kind, {}};
    switch (kind) {
        case ProcessKind::Fold: {
            FoldParams f;
            const double az = rng.uniform(0.0, 2.0 * pi);
            f.direction = horizontal(az);
            // Tilt the displacement axis away from vertical within the plane
            // orthogonal to the propagation direction.
            const double tilt = deg(sample(p.fold_axis_tilt_deg, rng));
            f.displacement_axis = normalized(std::cos(tilt) * Vec3{0, 0, 1} + std::sin(tilt) * horizontal(az + pi / 2));
            f.amplitude = sample(p.fold_amplitude, rng);
            f.wavelength = sample_log(p.fold_wavelength, rng);
            f.phase = rng.uniform(0.0, 2.0 * pi);
            d.params = f;
            break;
        }
        case ProcessKind::Fault: {
            FaultParams f;
            f.plane_point = sample_point(g, rng);
            const double strike = rng.uniform(0.0, 2.0 * pi);
            const double dip = deg(sample(p.fault_dip_deg, rng));
            f.plane_normal = plane_normal(strike, dip);
            const Vec3 strike_dir = horizontal(strike);
            const Vec3 dip_dir = normalized(cross(f.plane_normal, strike_dir));
            const double rake = rng.uniform(0.0, 2.0 * pi);
            const double slip = sample(p.fault_slip, rng);
            f.slip = slip * normalized(std::cos(rake) * strike_dir + std::sin(rake) * dip_dir);
            d.params = f;
            break;
        }
        case ProcessKind::Shear: {
            ShearParams s;
            s.plane_point = sample_point(g, rng);
            const double strike = rng.uniform(0.0, 2.0 * pi);
            s.plane_normal = plane_normal(strike, deg(sample(p.shear_dip_deg, rng)));
            const Vec3 strike_dir = horizontal(strike);
            const Vec3 dip_dir = normalized(cross(s.plane_normal, strike_dir));
            const double rake = rng.uniform(0.0, 2.0 * pi);
            s.shear_direction = normalized(std::cos(rake) * strike_dir + std::sin(rake) * dip_dir);
            s.gradient = sample(p.shear_gradient, rng);
            d.params = s;
            break;
        }
        case ProcessKind::Tilt: {
            TiltParams t;
            t.axis = horizontal(rng.uniform(0.0, pi));
            t.pivot = sample_point(g, rng);
            t.angle = deg(sample(p.tilt_angle_deg, rng));
            d.params = t;
            break;
        }
        case ProcessKind::Dike: {
            Deposition dep;
            const double strike = rng.uniform(0.0, 2.0 * pi);
            const double dip = deg(sample(p.dike_dip_deg, rng));
            const double length = 2.0 * largest_extent(g);
            dep.window.scale = {sample(p.dike_half_thickness, rng), length, length};
            dep.window.rotation = rotation_from_x(plane_normal(strike, dip));
            dep.window.translation = sample_point(g, rng);
            dep.category = sample_category(p, rng);
            dep.mode = DepositMode::Overwrite;
            d.params = dep;
            break;
        }
        case ProcessKind::Sediment: {
            SedimentParams s;
            const double height = g.extent().z;
            s.base_elevation = g.lower_corner().z + sample(p.sediment_base_fraction, rng) * height;
            const auto lo = static_cast<std::uint64_t>(std::lround(p.sediment_layers.lo));
            const auto hi = static_cast<std::uint64_t>(std::lround(p.sediment_layers.hi));
            const std::uint64_t layers = lo + rng.uniform_index(hi - lo + 1);
            for (std::uint64_t i = 0; i < layers; ++i) {
                s.thicknesses.push_back(sample(p.sediment_thickness, rng));
                s.categories.push_back(sample_category(p, rng));
            }
            d.params = s;
            break;
        }
        case ProcessKind::Erosion: {
            Deposition dep;
            const double height = g.extent().z;
            const double level = g.lower_corner().z + sample(p.erosion_level_fraction, rng) * height;
            const double big = 4.0 * largest_extent(g);
            dep.window = slab_window(g, level, level + 2.0 * big);
            if (rng.uniform() < p.erosion_bend_probability) {
                FoldParams bend;
                bend.direction = horizontal(rng.uniform(0.0, 2.0 * pi));
                bend.displacement_axis = {0, 0, 1};
                bend.amplitude = sample(p.erosion_bend_amplitude, rng);
                bend.wavelength = sample_log(p.erosion_bend_wavelength, rng);
                bend.phase = rng.uniform(0.0, 2.0 * pi);
                dep.window.bend = bend;
            }
            dep.category = kAir;
            dep.mode = DepositMode::Overwrite;
            d.params = dep;
            break;
        }
        case ProcessKind::End:
            throw std::invalid_argument("END has no parameters");
    }
    return d;
}

struct StepLimits {
    std::size_t min_steps = 3;
    std::size_t max_steps = 12;
};

/// Samples a random history. An END drawn before `min_steps` is discarded and
/// redrawn; reaching `max_steps` ends the history.
inline History sample_history(const TransitionMatrix& chain, const ParamPriors& priors, std::uint64_t seed,
                              StepLimits limits = {}) {
    if (limits.min_steps > limits.max_steps) throw std::invalid_argument("min_steps exceeds max_steps");
    chain.validate();
    priors.validate();
    Rng rng(seed);
    History h;
    h.seed = seed;
    h.initial = sample_strata(priors, rng);
    std::optional<ProcessKind> prev;
    while (h.steps.size() < limits.max_steps) {
        ProcessKind next = sample_next(chain, prev, rng);
        if (next == ProcessKind::End && h.steps.size() < limits.min_steps) {
            const StateDistribution& row = prev ? chain.rows[static_cast<std::size_t>(*prev)] : chain.start;
            if (row[kChainStates - 1] >= 1.0) throw std::invalid_argument("chain cannot reach min_steps");
            do {
                next = sample_next(chain, prev, rng);
            } while (next == ProcessKind::End);
        }
        if (next == ProcessKind::End) break;
        h.steps.push_back(sample_process(next, priors, rng));
        prev = next;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Realization.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_category(int c, int n) {
    if (c < 0 || c >= n) throw std::invalid_argument("category " + std::to_string(c) + " out of range");
}

inline bool kind_matches(ProcessKind kind, const ProcessParams& p) {
    switch (kind) {
        case ProcessKind::Fold: return std::holds_alternative<FoldParams>(p);
        case ProcessKind::Fault: return std::holds_alternative<FaultParams>(p);
        case ProcessKind::Shear: return std::holds_alternative<ShearParams>(p);
        case ProcessKind::Tilt: return std::holds_alternative<TiltParams>(p);
        case ProcessKind::Dike:
        case ProcessKind::Erosion: return std::holds_alternative<Deposition>(p);
        case ProcessKind::Sediment: return std::holds_alternative<SedimentParams>(p);
        case ProcessKind::End: return false;
    }
    return false;
}

}  // namespace detail

/// Applies one process to a model.
inline GeoModel apply_process(const GeoModel& model, const ProcessDescriptor& step) {
    if (!detail::kind_matches(step.kind, step.params)) throw std::invalid_argument("parameters do not match kind");
    const int n = model.num_categories();
    const GridSpec& g = model.grid();
    switch (step.kind) {
        case ProcessKind::Fold: return apply_transformation(model, std::get<FoldParams>(step.params));
        case ProcessKind::Fault: return apply_transformation(model, std::get<FaultParams>(step.params));
        case ProcessKind::Shear: return apply_transformation(model, std::get<ShearParams>(step.params));
        case ProcessKind::Tilt: return apply_transformation(model, std::get<TiltParams>(step.params));
        case ProcessKind::Dike:
        case ProcessKind::Erosion: {
            const auto& d = std::get<Deposition>(step.params);
            detail::check_category(d.category, n);
            if (step.kind == ProcessKind::Erosion && d.category != kAir)
                throw std::invalid_argument("erosion must deposit air");
            return apply_deposition(model, d.window, d.category, d.mode);
        }
        case ProcessKind::Sediment: {
            const auto& s = std::get<SedimentParams>(step.params);
            if (s.thicknesses.size() != s.categories.size() || s.thicknesses.empty())
                throw std::invalid_argument("sediment: thickness and category lists must be nonempty and equal length");
            if (!std::isfinite(s.base_elevation)) throw std::invalid_argument("sediment: base_elevation must be finite");
            GeoModel out = model;
            const double floor = std::min(g.lower_corner().z, s.base_elevation) - g.voxel_size;
            double lo = floor;
            double top = s.base_elevation;
            for (std::size_t i = 0; i < s.thicknesses.size(); ++i) {
                if (!(s.thicknesses[i] > 0.0) || !std::isfinite(s.thicknesses[i]))
                    throw std::invalid_argument("sediment: thicknesses must be > 0");
                detail::check_category(s.categories[i], n);
                if (s.categories[i] == kAir) throw std::invalid_argument("sediment: category must not be air");
                top += s.thicknesses[i];
                out = apply_deposition(out, slab_window(g, lo, top), s.categories[i], DepositMode::FillAir);
                lo = top;
            }
            return out;
        }
        case ProcessKind::End: break;
    }
    throw std::invalid_argument("END is not an applicable process");
}

/// m = P^n o ... o P^1 (m0).
inline GeoModel realize(const History& history, const GridSpec& grid, int num_categories) {
    GeoModel m = init_strata(grid, num_categories, history.initial);
    for (std::size_t i = 0; i < history.steps.size(); ++i) {
        try {
            m = apply_process(m, history.steps[i]);
        } catch (const std::exception& e) {
            throw std::invalid_argument("step " + std::to_string(i) + " (" + std::string(to_string(history.steps[i].kind)) +
                                        "): " + e.what());
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Streaming dataset.
// ---------------------------------------------------------------------------

struct StreamItem {
    History history;
    GeoModel model;
};

/// Random-access, unbounded dataset of (History, GeoModel) pairs. Item k is
/// generated from split_seed(base_seed, k) and depends on nothing else.
class HistoryStream {
public:
    HistoryStream(TransitionMatrix chain, ParamPriors priors, GridSpec grid, int num_categories, std::uint64_t base_seed,
                  StepLimits limits = {})
        : chain_(chain), priors_(std::move(priors)), grid_(grid), n_(num_categories), base_seed_(base_seed), limits_(limits) {
        chain_.validate();
        priors_.validate();
        grid_.validate();
    }

    StreamItem item(std::uint64_t k) const {
        History h = sample_history(chain_, priors_, split_seed(base_seed_, k), limits_);
        GeoModel m = realize(h, grid_, n_);
        return {std::move(h), std::move(m)};
    }

    class iterator {
    public:
        using value_type = StreamItem;
        using difference_type = std::ptrdiff_t;

        iterator() = default;
        iterator(const HistoryStream* s, std::uint64_t k) : stream_(s), k_(k) {}

        StreamItem operator*() const { return stream_->item(k_); }
        iterator& operator++() {
            ++k_;
            return *this;
        }
        void operator++(int) { ++k_; }
        std::uint64_t index() const { return k_; }
        friend bool operator==(const iterator& a, const iterator& b) { return a.k_ == b.k_; }

    private:
        const HistoryStream* stream_ = nullptr;
        std::uint64_t k_ = 0;
    };

    iterator begin() const { return {this, 0}; }
    /// Unbounded iteration never reaches this sentinel.
    std::unreachable_sentinel_t end() const { return {}; }

    /// The first `count` items, in order.
    std::vector<StreamItem> take(std::uint64_t count) const {
        std::vector<StreamItem> out;
        out.reserve(count);
        for (std::uint64_t k = 0; k < count; ++k) out.push_back(item(k));
        return out;
    }

    const GridSpec& grid() const { return grid_; }
    int num_categories() const { return n_; }
    std::uint64_t base_seed() const { return base_seed_; }

private:
    TransitionMatrix chain_;
    ParamPriors priors_;
    GridSpec grid_;
    int n_;
    std::uint64_t base_seed_;
    StepLimits limits_;
};

}  // namespace geoforge
