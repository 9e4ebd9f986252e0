#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "geoforge/codec.hpp"
#include "geoforge/rng.hpp"

namespace geoforge {

/// Maps the cotangent dL/dv for a computed output v.
using CotangentFn = std::function<Field(const Field& output)>;

/// Parametric velocity field v(y, t; xi). Output has the shape of y.
class VelocityField {
public:
    virtual ~VelocityField() = default;

    virtual Field evaluate(const Field& y, double t) const = 0;

    virtual std::span<const double> parameters() const { return {}; }
    virtual void set_parameters(std::span<const double> p) {
        if (!p.empty()) throw std::invalid_argument("model has no parameters");
    }
    std::size_t parameter_count() const { return parameters().size(); }

    /// Evaluates v(y, t), obtains dL/dv from `cotangent`, and accumulates
    /// dL/dxi into `grad` (length parameter_count()). Returns v.
    virtual Field pullback(const Field& y, double t, const CotangentFn& cotangent, std::span<double> grad) const {
        (void)grad;
        Field v = evaluate(y, t);
        cotangent(v);
        return v;
    }
};

/// Parameter-free field backed by a callable.
class FunctionVelocity final : public VelocityField {
public:
    using Fn = std::function<Field(const Field&, double)>;
    explicit FunctionVelocity(Fn fn) : fn_(std::move(fn)) {}
    Field evaluate(const Field& y, double t) const override { return fn_(y, t); }

private:
    Fn fn_;
};

// ---------------------------------------------------------------------------
// 3x3x3 same-padded convolution kernels over channels-first volumes.
// ---------------------------------------------------------------------------

namespace conv {

inline constexpr int kTaps = 27;

struct Shape {
    int nx, ny, nz;
    std::size_t voxels() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz); }
};

/// Visits every (output row, input row, length) pair touched by tap
/// (dx, dy, dz) with zero padding: out[x] pairs with in[x + dx].
template <typename RowFn>
inline void for_each_row(const Shape& s, int dx, int dy, int dz, RowFn&& fn) {
    const int x0 = std::max(0, -dx);
    const int x1 = std::min(s.nx, s.nx - dx);
    if (x1 <= x0) return;
    const int y0 = std::max(0, -dy), y1 = std::min(s.ny, s.ny - dy);
    const int z0 = std::max(0, -dz), z1 = std::min(s.nz, s.nz - dz);
    for (int z = z0; z < z1; ++z)
        for (int y = y0; y < y1; ++y) {
            const std::size_t out_off = (static_cast<std::size_t>(z) * s.ny + y) * s.nx + x0;
            const std::size_t in_off = (static_cast<std::size_t>(z + dz) * s.ny + (y + dy)) * s.nx + (x0 + dx);
            fn(out_off, in_off, x1 - x0);
        }
}

/// out[o] = bias[o] + sum_i W[o][i] * in[i]. Weights are [out][in][dz][dy][dx].
inline void forward(const Shape& s, int cin, int cout, std::span<const double> in, std::span<const double> weights,
                    std::span<const double> bias, std::span<double> out) {
    const std::size_t v = s.voxels();
    for (int o = 0; o < cout; ++o) {
        double* out_c = out.data() + static_cast<std::size_t>(o) * v;
        std::fill(out_c, out_c + v, bias[static_cast<std::size_t>(o)]);
        for (int i = 0; i < cin; ++i) {
            const double* in_c = in.data() + static_cast<std::size_t>(i) * v;
            const double* w = weights.data() + (static_cast<std::size_t>(o) * cin + i) * kTaps;
            for (int tap = 0; tap < kTaps; ++tap) {
                const double wt = w[tap];
                const int dx = tap % 3 - 1, dy = (tap / 3) % 3 - 1, dz = tap / 9 - 1;
                for_each_row(s, dx, dy, dz, [&](std::size_t oo, std::size_t io, int n) {
                    double* __restrict dst = out_c + oo;
                    const double* __restrict src = in_c + io;
                    for (int x = 0; x < n; ++x) dst[x] += wt * src[x];
                });
            }
        }
    }
}

/// Accumulates weight/bias gradients and (if nonempty) the input gradient.
inline void backward(const Shape& s, int cin, int cout, std::span<const double> in, std::span<const double> weights,
                     std::span<const double> grad_out, std::span<double> grad_weights, std::span<double> grad_bias,
                     std::span<double> grad_in) {
    const std::size_t v = s.voxels();
    for (int o = 0; o < cout; ++o) {
        const double* g_c = grad_out.data() + static_cast<std::size_t>(o) * v;
        double gb = 0.0;
        for (std::size_t k = 0; k < v; ++k) gb += g_c[k];
        grad_bias[static_cast<std::size_t>(o)] += gb;
        for (int i = 0; i < cin; ++i) {
            const double* in_c = in.data() + static_cast<std::size_t>(i) * v;
            const double* w = weights.data() + (static_cast<std::size_t>(o) * cin + i) * kTaps;
            double* gw = grad_weights.data() + (static_cast<std::size_t>(o) * cin + i) * kTaps;
            double* gi_c = grad_in.empty() ? nullptr : grad_in.data() + static_cast<std::size_t>(i) * v;
            for (int tap = 0; tap < kTaps; ++tap) {
                const double wt = w[tap];
                const int dx = tap % 3 - 1, dy = (tap / 3) % 3 - 1, dz = tap / 9 - 1;
                double acc = 0.0;
                for_each_row(s, dx, dy, dz, [&](std::size_t oo, std::size_t io, int n) {
                    const double* __restrict g = g_c + oo;
                    const double* __restrict src = in_c + io;
                    for (int x = 0; x < n; ++x) acc += g[x] * src[x];
                    if (gi_c) {
                        double* __restrict dst = gi_c + io;
                        for (int x = 0; x < n; ++x) dst[x] += wt * g[x];
                    }
                });
                gw[tap] += acc;
            }
        }
    }
}

}  // namespace conv

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }

inline double silu_derivative(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

/// Layer sizes of the reference model.
struct ReferenceArchitecture {
    int channels = 4;       // N, the embedding dimension
    int time_features = 8;  // sinusoidal features of t, even
    std::vector<int> hidden{16, 16};

    void validate() const {
        if (channels < 2) throw std::invalid_argument("architecture: channels must be >= 2");
        if (time_features < 0 || time_features % 2 != 0)
            throw std::invalid_argument("architecture: time_features must be even and >= 0");
        if (hidden.empty()) throw std::invalid_argument("architecture: at least one hidden layer required");
        for (int h : hidden)
            if (h < 1) throw std::invalid_argument("architecture: hidden widths must be >= 1");
    }

    /// Descriptor stored in checkpoints: channels, time_features, hidden...
    std::vector<std::uint32_t> descriptor() const {
        std::vector<std::uint32_t> d{static_cast<std::uint32_t>(channels), static_cast<std::uint32_t>(time_features)};
        for (int h : hidden) d.push_back(static_cast<std::uint32_t>(h));
        return d;
    }

    static ReferenceArchitecture from_descriptor(std::span<const std::uint32_t> d) {
        if (d.size() < 3) throw std::invalid_argument("architecture descriptor too short");
        ReferenceArchitecture a;
        a.channels = static_cast<int>(d[0]);
        a.time_features = static_cast<int>(d[1]);
        a.hidden.assign(d.begin() + 2, d.end());
        a.validate();
        return a;
    }

    friend bool operator==(const ReferenceArchitecture&, const ReferenceArchitecture&) = default;
};

/// Features sin(w_k t), cos(w_k t) with w_k = (pi/2) 2^k.
inline std::vector<double> time_features(double t, int count) {
    std::vector<double> f(static_cast<std::size_t>(count));
    for (int k = 0; k < count / 2; ++k) {
        const double w = 0.5 * std::numbers::pi * static_cast<double>(1 << k);
        f[static_cast<std::size_t>(2 * k)] = std::sin(w * t);
        f[static_cast<std::size_t>(2 * k + 1)] = std::cos(w * t);
    }
    return f;
}

/// Small convolutional velocity model.
///
/// Input is y concatenated with constant time-feature channels, followed by
/// 3x3x3 convolutions with SiLU between them. The output layer is residual
/// and time-modulated:
///
///     v = (1 + c . phi(t)) * h + (a0 + a . phi(t)) * y
///
/// where h is the last convolution. Zero padding at the volume faces; away
/// from them the model is translation-equivariant.
class ReferenceVelocityModel final : public VelocityField {
public:
    explicit ReferenceVelocityModel(ReferenceArchitecture arch, std::uint64_t init_seed = 0) : arch_(std::move(arch)) {
        arch_.validate();
        build_layout();
        params_.assign(total_, 0.0);
        initialize(init_seed);
    }

    const ReferenceArchitecture& architecture() const { return arch_; }

    std::span<const double> parameters() const override { return params_; }
    void set_parameters(std::span<const double> p) override {
        if (p.size() != params_.size()) throw std::invalid_argument("parameter count mismatch");
        std::copy(p.begin(), p.end(), params_.begin());
    }

    Field evaluate(const Field& y, double t) const override {
        Tape tape;
        return run_forward(y, t, tape);
    }

    Field pullback(const Field& y, double t, const CotangentFn& cotangent, std::span<double> grad) const override {
        if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer size mismatch");
        Tape tape;
        Field out = run_forward(y, t, tape);
        const Field g = cotangent(out);
        require_same_shape(g, out);
        run_backward(y, tape, g, grad);
        return out;
    }

private:
    struct Layer {
        int cin, cout;
        std::size_t weights, bias;  // offsets into params_
    };

    struct Tape {
        std::vector<double> phi;
        std::vector<std::vector<double>> inputs;  // input of each conv layer
        std::vector<std::vector<double>> pre;     // pre-activation of each hidden layer
        std::vector<double> head;                 // last convolution output h
        double gate_h = 1.0, gate_y = 0.0;
    };

    void build_layout() {
        std::size_t off = 0;
        int cin = arch_.channels + arch_.time_features;
        std::vector<int> widths = arch_.hidden;
        widths.push_back(arch_.channels);
        for (int w : widths) {
            Layer l{cin, w, off, 0};
            off += static_cast<std::size_t>(w) * cin * conv::kTaps;
            l.bias = off;
            off += static_cast<std::size_t>(w);
            layers_.push_back(l);
            cin = w;
        }
        gate_h_ = off;
        off += static_cast<std::size_t>(arch_.time_features);
        gate_y_ = off;
        off += static_cast<std::size_t>(arch_.time_features) + 1;
        total_ = off;
    }

    void initialize(std::uint64_t seed) {
        Rng rng(seed);
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            const Layer& l = layers_[li];
            const bool last = li + 1 == layers_.size();
            const double scale = (last ? 0.1 : 1.0) * std::sqrt(2.0 / (static_cast<double>(l.cin) * conv::kTaps));
            const std::size_t n = static_cast<std::size_t>(l.cout) * l.cin * conv::kTaps;
            for (std::size_t k = 0; k < n; ++k) params_[l.weights + k] = scale * rng.normal();
        }
    }

    std::span<const double> span_at(std::size_t off, std::size_t n) const {
        return std::span<const double>(params_).subspan(off, n);
    }

    Field run_forward(const Field& y, double t, Tape& tape) const {
        if (y.channels() != arch_.channels) throw std::invalid_argument("reference model: channel count mismatch");
        if (!std::isfinite(t)) throw std::invalid_argument("reference model: non-finite time");
        const conv::Shape s{y.dims().x, y.dims().y, y.dims().z};
        const std::size_t v = s.voxels();
        const int tf = arch_.time_features;
        tape.phi = time_features(t, tf);

        std::vector<double> x0(static_cast<std::size_t>(arch_.channels + tf) * v);
        std::copy(y.data().begin(), y.data().end(), x0.begin());
        for (int k = 0; k < tf; ++k)
            std::fill_n(x0.begin() + static_cast<std::ptrdiff_t>((arch_.channels + k) * v), v, tape.phi[static_cast<std::size_t>(k)]);

        tape.inputs.assign(layers_.size(), {});
        tape.pre.assign(layers_.size() - 1, {});
        tape.inputs[0] = std::move(x0);
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            const Layer& l = layers_[li];
            std::vector<double> z(static_cast<std::size_t>(l.cout) * v);
            conv::forward(s, l.cin, l.cout, tape.inputs[li], span_at(l.weights, static_cast<std::size_t>(l.cout) * l.cin * conv::kTaps),
                          span_at(l.bias, static_cast<std::size_t>(l.cout)), z);
            if (li + 1 == layers_.size()) {
                tape.head = std::move(z);
            } else {
                std::vector<double> a(z.size());
                for (std::size_t k = 0; k < z.size(); ++k) a[k] = silu(z[k]);
                tape.pre[li] = std::move(z);
                tape.inputs[li + 1] = std::move(a);
            }
        }

        tape.gate_h = 1.0;
        tape.gate_y = params_[gate_y_];
        for (int k = 0; k < tf; ++k) {
            tape.gate_h += params_[gate_h_ + static_cast<std::size_t>(k)] * tape.phi[static_cast<std::size_t>(k)];
            tape.gate_y += params_[gate_y_ + 1 + static_cast<std::size_t>(k)] * tape.phi[static_cast<std::size_t>(k)];
        }
        Field out(y.channels(), y.dims());
        auto od = out.data();
        const auto yd = y.data();
        for (std::size_t k = 0; k < od.size(); ++k) od[k] = tape.gate_h * tape.head[k] + tape.gate_y * yd[k];
        return out;
    }

    void run_backward(const Field& y, const Tape& tape, const Field& g, std::span<double> grad) const {
        const conv::Shape s{y.dims().x, y.dims().y, y.dims().z};
        const std::size_t v = s.voxels();
        const int tf = arch_.time_features;
        const auto gd = g.data();
        const auto yd = y.data();

        double gh = 0.0, gy = 0.0;
        for (std::size_t k = 0; k < gd.size(); ++k) {
            gh += gd[k] * tape.head[k];
            gy += gd[k] * yd[k];
        }
        grad[gate_y_] += gy;
        for (int k = 0; k < tf; ++k) {
            grad[gate_h_ + static_cast<std::size_t>(k)] += gh * tape.phi[static_cast<std::size_t>(k)];
            grad[gate_y_ + 1 + static_cast<std::size_t>(k)] += gy * tape.phi[static_cast<std::size_t>(k)];
        }

        std::vector<double> upstream(gd.size());
        for (std::size_t k = 0; k < gd.size(); ++k) upstream[k] = tape.gate_h * gd[k];

        for (std::size_t li = layers_.size(); li-- > 0;) {
            const Layer& l = layers_[li];
            const std::size_t wn = static_cast<std::size_t>(l.cout) * l.cin * conv::kTaps;
            std::vector<double> grad_in;
            if (li > 0) grad_in.assign(static_cast<std::size_t>(l.cin) * v, 0.0);
            conv::backward(s, l.cin, l.cout, tape.inputs[li], span_at(l.weights, wn), upstream, grad.subspan(l.weights, wn),
                           grad.subspan(l.bias, static_cast<std::size_t>(l.cout)), grad_in);
            if (li == 0) break;
            const std::vector<double>& z = tape.pre[li - 1];
            for (std::size_t k = 0; k < grad_in.size(); ++k) grad_in[k] *= silu_derivative(z[k]);
            upstream = std::move(grad_in);
        }
    }

    ReferenceArchitecture arch_;
    std::vector<Layer> layers_;
    std::size_t gate_h_ = 0, gate_y_ = 0, total_ = 0;
    std::vector<double> params_;
};

}  // namespace geoforge
