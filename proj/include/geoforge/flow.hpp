#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "geoforge/codec.hpp"
#include "geoforge/history.hpp"
#include "geoforge/rng.hpp"
#include "geoforge/velocity.hpp"

namespace geoforge {

// ---------------------------------------------------------------------------
// Interpolant and objective.
// ---------------------------------------------------------------------------

/// m_t = t m + (1 - t) z.
inline Field interpolant(const Field& m, const Field& z, double t) {
    require_same_shape(m, z);
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("interpolant: t must be in [0, 1]");
    Field out(m.channels(), m.dims());
    auto o = out.data();
    const auto a = m.data();
    const auto b = z.data();
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = t * a[k] + (1.0 - t) * b[k];
    return out;
}

/// d/dt m_t = m - z, constant along the path.
inline Field fm_target(const Field& m, const Field& z) {
    require_same_shape(m, z);
    Field out(m.channels(), m.dims());
    auto o = out.data();
    const auto a = m.data();
    const auto b = z.data();
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = a[k] - b[k];
    return out;
}

struct FmSample {
    Field embedded;  // m^(e)
    Field noise;     // z
    double t = 0.0;
};

/// (1/2) mean over the batch of the per-sample mean squared velocity error.
inline double fm_loss(const VelocityField& v, std::span<const FmSample> batch) {
    if (batch.empty()) throw std::invalid_argument("fm_loss: empty batch");
    double total = 0.0;
    for (const FmSample& s : batch) {
        const Field pred = v.evaluate(interpolant(s.embedded, s.noise, s.t), s.t);
        const Field target = fm_target(s.embedded, s.noise);
        require_same_shape(pred, target);
        double sq = 0.0;
        const auto p = pred.data();
        const auto q = target.data();
        for (std::size_t k = 0; k < p.size(); ++k) sq += (p[k] - q[k]) * (p[k] - q[k]);
        total += sq / static_cast<double>(p.size());
    }
    return 0.5 * total / static_cast<double>(batch.size());
}

/// fm_loss and its exact parameter gradient (written into `grad`).
inline double fm_loss_and_gradient(const VelocityField& v, std::span<const FmSample> batch, std::span<double> grad) {
    if (batch.empty()) throw std::invalid_argument("fm_loss: empty batch");
    if (grad.size() != v.parameter_count()) throw std::invalid_argument("gradient buffer size mismatch");
    std::fill(grad.begin(), grad.end(), 0.0);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const FmSample& s : batch) {
        const Field target = fm_target(s.embedded, s.noise);
        const double inv_n = 1.0 / static_cast<double>(target.size());
        v.pullback(
            interpolant(s.embedded, s.noise, s.t), s.t,
            [&](const Field& pred) {
                require_same_shape(pred, target);
                Field cot(pred.channels(), pred.dims());
                auto c = cot.data();
                const auto p = pred.data();
                const auto q = target.data();
                double sq = 0.0;
                for (std::size_t k = 0; k < c.size(); ++k) {
                    const double r = p[k] - q[k];
                    sq += r * r;
                    c[k] = r * inv_n * inv_b;
                }
                total += sq * inv_n;
                return cot;
            },
            grad);
    }
    return 0.5 * total * inv_b;
}

/// Largest relative discrepancy between the analytic gradient of fm_loss
/// and central finite differences with step `h`. Entries where both
/// gradients are below `floor` in magnitude are compared against `floor`.
inline double gradient_check(VelocityField& v, std::span<const FmSample> batch, double h = 1e-4, double floor = 1e-6) {
    const std::size_t n = v.parameter_count();
    if (n == 0) return 0.0;
    std::vector<double> analytic(n);
    fm_loss_and_gradient(v, batch, analytic);
    std::vector<double> p(v.parameters().begin(), v.parameters().end());
    const std::vector<double> original = p;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = original[i] + h;
        v.set_parameters(p);
        const double up = fm_loss(v, batch);
        p[i] = original[i] - h;
        v.set_parameters(p);
        const double down = fm_loss(v, batch);
        p[i] = original[i];
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    v.set_parameters(original);
    return worst;
}

/// Exact minimizer of the flow-matching objective for an equally weighted
/// finite dataset: sum_k w_k (m_k - y) / (1 - t) with
/// w_k proportional to exp(-|y - t m_k|^2 / (2 (1 - t)^2)).
inline Field oracle_velocity(std::span<const Field> dataset, const Field& y, double t) {
    if (dataset.empty()) throw std::invalid_argument("oracle: empty dataset");
    if (!(t < 1.0)) throw std::invalid_argument("oracle singular at t=1");
    const double s = 1.0 - t;
    std::vector<double> logw(dataset.size());
    for (std::size_t k = 0; k < dataset.size(); ++k) {
        require_same_shape(dataset[k], y);
        const auto m = dataset[k].data();
        const auto yd = y.data();
        double d2 = 0.0;
        for (std::size_t i = 0; i < yd.size(); ++i) {
            const double r = yd[i] - t * m[i];
            d2 += r * r;
        }
        logw[k] = -d2 / (2.0 * s * s);
    }
    const double mx = *std::max_element(logw.begin(), logw.end());
    double z = 0.0;
    for (double& l : logw) z += (l = std::exp(l - mx));
    Field out(y.channels(), y.dims());
    auto o = out.data();
    const auto yd = y.data();
    for (std::size_t k = 0; k < dataset.size(); ++k) {
        const double w = logw[k] / z;
        if (w == 0.0) continue;
        const auto m = dataset[k].data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += w * m[i];
    }
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = (o[i] - yd[i]) / s;
    return out;
}

// ---------------------------------------------------------------------------
// Fixed-step ODE integration.
// ---------------------------------------------------------------------------

enum class SolverMethod { Euler, Heun, Rk4 };

struct SolverConfig {
    SolverMethod method = SolverMethod::Rk4;
    int steps = 100;
    double t_end = 1.0;

    void validate() const {
        if (steps < 1) throw std::invalid_argument("solver: step_count must be >= 1");
        if (!(t_end > 0.0 && t_end <= 1.0)) throw std::invalid_argument("solver: t_end must be in (0, 1]");
    }
};

/// Called after every step with the new time and state.
using StepObserver = std::function<void(int step, double t, const Field& y)>;

namespace detail {

inline void axpy(std::span<double> y, double a, std::span<const double> x) {
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

inline Field shifted(const Field& y, double a, const Field& k) {
    Field out = y;
    axpy(out.data(), a, k.data());
    return out;
}

}  // namespace detail

/// Integrates dy/dt = rhs(y, t) from t = 0 to config.t_end.
template <typename Rhs>
Field integrate_rhs(Rhs&& rhs, Field y, const SolverConfig& config, const StepObserver& observer = {}) {
    config.validate();
    const double h = config.t_end / config.steps;
    for (int n = 0; n < config.steps; ++n) {
        const double t = n * h;
        switch (config.method) {
            case SolverMethod::Euler: {
                const Field k1 = rhs(y, t);
                detail::axpy(y.data(), h, k1.data());
                break;
            }
            case SolverMethod::Heun: {
                const Field k1 = rhs(y, t);
                const Field k2 = rhs(detail::shifted(y, h, k1), t + h);
                auto yd = y.data();
                const auto a = k1.data();
                const auto b = k2.data();
                for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += 0.5 * h * (a[i] + b[i]);
                break;
            }
            case SolverMethod::Rk4: {
                const Field k1 = rhs(y, t);
                const Field k2 = rhs(detail::shifted(y, 0.5 * h, k1), t + 0.5 * h);
                const Field k3 = rhs(detail::shifted(y, 0.5 * h, k2), t + 0.5 * h);
                const Field k4 = rhs(detail::shifted(y, h, k3), t + h);
                auto yd = y.data();
                const auto a = k1.data();
                const auto b = k2.data();
                const auto c = k3.data();
                const auto d = k4.data();
                for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += (h / 6.0) * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
                break;
            }
        }
        for (double x : y.data())
            if (!std::isfinite(x)) throw std::runtime_error("non-finite state at step " + std::to_string(n));
        if (observer) observer(n + 1, (n + 1) * h, y);
    }
    return y;
}

inline Field integrate(const VelocityField& v, const Field& y0, const SolverConfig& config,
                       const StepObserver& observer = {}) {
    return integrate_rhs([&v](const Field& y, double t) { return v.evaluate(y, t); }, y0, config, observer);
}

/// Linear observation operator A restricted to voxel selection: A selects all
/// channels at voxels where mask = 1; `data` holds d scattered back (A^T d).
struct Guidance {
    std::vector<std::uint8_t> mask;  // one entry per voxel
    Field data;
};

/// Integrates dy/dt = v(y, t) - mu A^T (A y - d).
inline Field integrate_guided(const VelocityField& v, const Field& y0, const Guidance& guidance, double mu,
                              const SolverConfig& config, const StepObserver& observer = {}) {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("guidance: mu must be >= 0");
    if (mu == 0.0) return integrate(v, y0, config, observer);
    require_same_shape(guidance.data, y0);
    if (guidance.mask.size() != y0.voxels()) throw std::invalid_argument("guidance: mask size does not match field");
    const std::size_t voxels = y0.voxels();
    auto rhs = [&](const Field& y, double t) {
        Field k = v.evaluate(y, t);
        auto kd = k.data();
        const auto yd = y.data();
        const auto dd = guidance.data.data();
        for (int c = 0; c < y.channels(); ++c) {
            const std::size_t base = static_cast<std::size_t>(c) * voxels;
            for (std::size_t i = 0; i < voxels; ++i)
                if (guidance.mask[i]) kd[base + i] -= mu * (yd[base + i] - dd[base + i]);
        }
        return k;
    };
    return integrate_rhs(rhs, y0, config, observer);
}

inline Field standard_normal_field(int channels, Index3 dims, Rng& rng) {
    Field z(channels, dims);
    for (double& x : z.data()) x = rng.normal();
    return z;
}

// ---------------------------------------------------------------------------
// Training.
// ---------------------------------------------------------------------------

/// Source of training volumes; each call yields a fresh model.
class ModelSource {
public:
    virtual ~ModelSource() = default;
    virtual GeoModel next() = 0;
};

/// Walks a HistoryStream from a starting index.
class StreamSource final : public ModelSource {
public:
    explicit StreamSource(const HistoryStream& stream, std::uint64_t first = 0) : stream_(stream), k_(first) {}
    GeoModel next() override { return stream_.item(k_++).model; }

private:
    const HistoryStream& stream_;
    std::uint64_t k_;
};

/// Cycles through a fixed list of models.
class FixedSource final : public ModelSource {
public:
    explicit FixedSource(std::vector<GeoModel> models) : models_(std::move(models)) {
        if (models_.empty()) throw std::invalid_argument("fixed source needs at least one model");
    }
    GeoModel next() override { return models_[k_++ % models_.size()]; }

private:
    std::vector<GeoModel> models_;
    std::size_t k_ = 0;
};

struct TrainConfig {
    int batch_size = 8;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    int steps = 1000;
    Index3 dims{8, 8, 8};
    int num_categories = 4;
    std::uint64_t seed = 0;

    void validate() const {
        if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("train: momentum must be in [0, 1)");
        if (steps < 0) throw std::invalid_argument("train: steps must be >= 0");
    }
};

struct TrainResult {
    std::vector<double> parameters;
    std::vector<double> loss_trace;
};

using TrainObserver = std::function<void(int step, double loss)>;

/// Stochastic gradient descent with momentum on the flow-matching objective.
/// Each step draws batch_size fresh models, z ~ N(0, I) and t ~ U(0, 1) per
/// sample. Updates are buf = momentum * buf + g; xi -= learning_rate * buf.
inline TrainResult train(VelocityField& v, ModelSource& source, const EmbeddingTable& table, const TrainConfig& config,
                         const TrainObserver& observer = {}) {
    config.validate();
    if (table.num_categories() != config.num_categories) throw std::invalid_argument("train: table N does not match config");
    Rng rng(config.seed);
    const std::size_t n = v.parameter_count();
    std::vector<double> params(v.parameters().begin(), v.parameters().end());
    std::vector<double> grad(n), buf(n, 0.0);
    TrainResult result;
    result.loss_trace.reserve(static_cast<std::size_t>(config.steps));
    std::vector<FmSample> batch(static_cast<std::size_t>(config.batch_size));
    for (int step = 0; step < config.steps; ++step) {
        for (FmSample& s : batch) {
            const GeoModel m = source.next();
            if (!(m.grid().dims == config.dims) || m.num_categories() != config.num_categories)
                throw std::invalid_argument("train: source model does not match configured dims/N");
            s.embedded = embed_model(m, table);
            s.noise = standard_normal_field(config.num_categories, config.dims, rng);
            s.t = rng.uniform();
        }
        const double loss = fm_loss_and_gradient(v, batch, grad);
        if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss at training step " + std::to_string(step));
        for (std::size_t i = 0; i < n; ++i) {
            buf[i] = config.momentum * buf[i] + grad[i];
            params[i] -= config.learning_rate * buf[i];
        }
        v.set_parameters(params);
        result.loss_trace.push_back(loss);
        if (observer) observer(step, loss);
    }
    result.parameters = std::move(params);
    return result;
}

/// Cosine similarity of two flattened fields.
inline double cosine_similarity(const Field& a, const Field& b) {
    require_same_shape(a, b);
    double ab = 0.0, aa = 0.0, bb = 0.0;
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t k = 0; k < x.size(); ++k) {
        ab += x[k] * y[k];
        aa += x[k] * x[k];
        bb += y[k] * y[k];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return ab / std::sqrt(aa * bb);
}

}  // namespace geoforge
