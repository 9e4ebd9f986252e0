#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "geoforge/flow.hpp"
#include "geoforge/formats.hpp"
#include "geoforge/history.hpp"
#include "geoforge/json_schema.hpp"
#include "geoforge/velocity.hpp"

namespace geoforge {

/// Everything an experiment needs, with defaults sized for a desktop run.
/// Every key is optional in the JSON document; unknown keys are rejected.
struct ExperimentConfig {
    GridSpec grid{{8, 8, 8}, 480.0, {0, 0, 0}};
    int num_categories = 4;

    TransitionMatrix chain = TransitionMatrix::uniform();
    StepLimits limits{};
    ParamPriors priors = ParamPriors::for_grid(grid, num_categories);

    int time_features = 8;
    std::vector<int> hidden{16, 16};

    int batch_size = 8;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    int train_steps = 1000;

    SolverConfig solver{};
    double mu = 20.0;

    std::uint64_t stream_seed = 1;  // dataset stream for generate and train
    std::uint64_t train_seed = 2;   // noise and time draws during training
    std::uint64_t init_seed = 3;    // model weight initialisation

    ReferenceArchitecture architecture() const { return {num_categories, time_features, hidden}; }

    TrainConfig train_config() const {
        TrainConfig t;
        t.batch_size = batch_size;
        t.learning_rate = learning_rate;
        t.momentum = momentum;
        t.steps = train_steps;
        t.dims = grid.dims;
        t.num_categories = num_categories;
        t.seed = train_seed;
        return t;
    }

    HistoryStream stream() const { return HistoryStream(chain, priors, grid, num_categories, stream_seed, limits); }

    void validate() const {
        grid.validate();
        if (num_categories < 2 || num_categories > 256) throw std::invalid_argument("num_categories must be in [2, 256]");
        chain.validate();
        if (limits.min_steps > limits.max_steps) throw std::invalid_argument("chain: min_steps exceeds max_steps");
        priors.validate();
        architecture().validate();
        train_config().validate();
        solver.validate();
        if (!(mu >= 0.0)) throw std::invalid_argument("guidance: mu must be >= 0");
    }
};

namespace detail {

using schema::json;
using schema::Node;

struct RangeField {
    const char* key;
    Range ParamPriors::*member;
};

inline constexpr RangeField kPriorRanges[] = {
    {"strata_thickness", &ParamPriors::strata_thickness},
    {"strata_fill_fraction", &ParamPriors::strata_fill_fraction},
    {"fold_amplitude", &ParamPriors::fold_amplitude},
    {"fold_wavelength", &ParamPriors::fold_wavelength},
    {"fold_axis_tilt_deg", &ParamPriors::fold_axis_tilt_deg},
    {"fault_slip", &ParamPriors::fault_slip},
    {"fault_dip_deg", &ParamPriors::fault_dip_deg},
    {"shear_gradient", &ParamPriors::shear_gradient},
    {"shear_dip_deg", &ParamPriors::shear_dip_deg},
    {"tilt_angle_deg", &ParamPriors::tilt_angle_deg},
    {"dike_half_thickness", &ParamPriors::dike_half_thickness},
    {"dike_dip_deg", &ParamPriors::dike_dip_deg},
    {"sediment_layers", &ParamPriors::sediment_layers},
    {"sediment_thickness", &ParamPriors::sediment_thickness},
    {"sediment_base_fraction", &ParamPriors::sediment_base_fraction},
    {"erosion_level_fraction", &ParamPriors::erosion_level_fraction},
    {"erosion_bend_amplitude", &ParamPriors::erosion_bend_amplitude},
    {"erosion_bend_wavelength", &ParamPriors::erosion_bend_wavelength},
};

inline const char* method_name(SolverMethod m) {
    switch (m) {
        case SolverMethod::Euler: return "EULER";
        case SolverMethod::Heun: return "HEUN";
        case SolverMethod::Rk4: return "RK4";
    }
    return "RK4";
}

inline SolverMethod method_from(const Node& n) {
    const std::string s = n.string();
    if (s == "EULER") return SolverMethod::Euler;
    if (s == "HEUN") return SolverMethod::Heun;
    if (s == "RK4") return SolverMethod::Rk4;
    throw SchemaError(n.path, "method must be EULER, HEUN or RK4");
}

inline StateDistribution distribution_from(const Node& n) {
    if (n.array_size() != kChainStates) throw SchemaError(n.path, "expected 8 probabilities (7 kinds then END)");
    StateDistribution d{};
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = n[i].number();
    return d;
}

}  // namespace detail

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    using nlohmann::json;
    json rows = json::object();
    for (int k = 0; k < kProcessKinds; ++k)
        rows[std::string(kKindNames[static_cast<std::size_t>(k)])] = c.chain.rows[static_cast<std::size_t>(k)];
    json priors = json::object();
    for (const auto& f : detail::kPriorRanges) priors[f.key] = {(c.priors.*f.member).lo, (c.priors.*f.member).hi};
    priors["erosion_bend_probability"] = c.priors.erosion_bend_probability;
    priors["category_weights"] = c.priors.category_weights;
    return {
        {"grid", {{"dims", {c.grid.dims.x, c.grid.dims.y, c.grid.dims.z}}, {"voxel_size", c.grid.voxel_size}, {"origin", schema::to_json(c.grid.origin)}}},
        {"num_categories", c.num_categories},
        {"chain", {{"start", c.chain.start}, {"rows", rows}, {"min_steps", c.limits.min_steps}, {"max_steps", c.limits.max_steps}}},
        {"priors", priors},
        {"model", {{"time_features", c.time_features}, {"hidden", c.hidden}}},
        {"train", {{"batch_size", c.batch_size}, {"learning_rate", c.learning_rate}, {"momentum", c.momentum}, {"steps", c.train_steps}}},
        {"solver", {{"method", detail::method_name(c.solver.method)}, {"steps", c.solver.steps}, {"t_end", c.solver.t_end}}},
        {"guidance", {{"mu", c.mu}}},
        {"seeds", {{"stream", c.stream_seed}, {"train", c.train_seed}, {"init", c.init_seed}}},
    };
}

/// Parses a config document. Missing keys keep their defaults.
///
/// chain.start is either a kind name (start there with probability 1) or 8
/// probabilities. chain.end_probability rebuilds every row as "END with this
/// probability, otherwise uniform"; chain.rows then overrides single rows.
inline ExperimentConfig config_from_json(std::string_view text) {
    const nlohmann::json doc = schema::parse(text);
    const schema::Node root{doc, ""};
    root.only({"grid", "num_categories", "chain", "priors", "model", "train", "solver", "guidance", "seeds"});
    ExperimentConfig c;

    if (root.has("grid")) {
        const auto g = root["grid"];
        g.only({"dims", "voxel_size", "origin"});
        if (g.has("dims")) {
            const auto d = g["dims"];
            if (d.array_size() != 3) throw SchemaError(d.path, "expected 3 positive integers");
            c.grid.dims = {static_cast<int>(d[0].integer(1, 4096)), static_cast<int>(d[1].integer(1, 4096)),
                           static_cast<int>(d[2].integer(1, 4096))};
        }
        if (g.has("voxel_size")) {
            c.grid.voxel_size = g["voxel_size"].number();
            if (!(c.grid.voxel_size > 0.0)) throw SchemaError(g.path + "/voxel_size", "must be > 0");
        }
        if (g.has("origin")) c.grid.origin = g["origin"].vec3();
    }
    if (root.has("num_categories")) c.num_categories = static_cast<int>(root["num_categories"].integer(2, 256));

    if (root.has("chain")) {
        const auto ch = root["chain"];
        ch.only({"start", "end_probability", "rows", "min_steps", "max_steps"});
        if (ch.has("end_probability")) {
            const auto e = ch["end_probability"];
            const double p = e.number();
            if (!(p >= 0.0 && p <= 1.0)) throw SchemaError(e.path, "must be in [0, 1]");
            c.chain = TransitionMatrix::uniform(p);
        }
        if (ch.has("start")) {
            const auto s = ch["start"];
            if (s.value.is_string()) {
                ProcessKind k;
                try {
                    k = kind_from_string(s.string());
                } catch (const std::invalid_argument& e) {
                    throw SchemaError(s.path, e.what());
                }
                c.chain.start.fill(0.0);
                c.chain.start[static_cast<std::size_t>(k)] = 1.0;
            } else {
                c.chain.start = detail::distribution_from(s);
            }
        }
        if (ch.has("rows")) {
            const auto rows = ch["rows"];
            rows.require_object();
            for (auto it = rows.value.begin(); it != rows.value.end(); ++it) {
                const schema::Node row{*it, rows.path + "/" + it.key()};
                ProcessKind k;
                try {
                    k = kind_from_string(it.key());
                } catch (const std::invalid_argument&) {
                    throw SchemaError(row.path, "unknown process kind");
                }
                if (k == ProcessKind::End) throw SchemaError(row.path, "END has no outgoing row");
                c.chain.rows[static_cast<std::size_t>(k)] = detail::distribution_from(row);
            }
        }
        if (ch.has("min_steps")) c.limits.min_steps = static_cast<std::size_t>(ch["min_steps"].integer(0, 10000));
        if (ch.has("max_steps")) c.limits.max_steps = static_cast<std::size_t>(ch["max_steps"].integer(0, 10000));
        try {
            c.chain.validate();
        } catch (const std::invalid_argument& e) {
            throw SchemaError(ch.path, e.what());
        }
    }

    ParamPriors p = ParamPriors::for_grid(c.grid, c.num_categories);
    if (root.has("priors")) {
        const auto pr = root["priors"];
        pr.require_object();
        for (auto it = pr.value.begin(); it != pr.value.end(); ++it) {
            const schema::Node v{*it, pr.path + "/" + it.key()};
            if (it.key() == "erosion_bend_probability") {
                p.erosion_bend_probability = v.number();
            } else if (it.key() == "category_weights") {
                p.category_weights = v.numbers();
            } else {
                bool found = false;
                for (const auto& f : detail::kPriorRanges) {
                    if (it.key() != f.key) continue;
                    const auto vals = v.numbers();
                    if (vals.size() != 2) throw SchemaError(v.path, "expected [lo, hi]");
                    p.*f.member = {vals[0], vals[1]};
                    found = true;
                }
                if (!found) throw SchemaError(v.path, "unknown key");
            }
        }
        try {
            p.validate();
        } catch (const std::invalid_argument& e) {
            throw SchemaError(pr.path, e.what());
        }
    }
    c.priors = p;

    if (root.has("model")) {
        const auto m = root["model"];
        m.only({"time_features", "hidden"});
        if (m.has("time_features")) c.time_features = static_cast<int>(m["time_features"].integer(0, 64));
        if (m.has("hidden")) c.hidden = m["hidden"].integers(1, 1024);
    }
    if (root.has("train")) {
        const auto t = root["train"];
        t.only({"batch_size", "learning_rate", "momentum", "steps"});
        if (t.has("batch_size")) c.batch_size = static_cast<int>(t["batch_size"].integer(1, 1 << 16));
        if (t.has("learning_rate")) c.learning_rate = t["learning_rate"].number();
        if (t.has("momentum")) c.momentum = t["momentum"].number();
        if (t.has("steps")) c.train_steps = static_cast<int>(t["steps"].integer(0, 1 << 30));
    }
    if (root.has("solver")) {
        const auto s = root["solver"];
        s.only({"method", "steps", "t_end"});
        if (s.has("method")) c.solver.method = detail::method_from(s["method"]);
        if (s.has("steps")) c.solver.steps = static_cast<int>(s["steps"].integer(1, 1 << 24));
        if (s.has("t_end")) c.solver.t_end = s["t_end"].number();
    }
    if (root.has("guidance")) {
        const auto g = root["guidance"];
        g.only({"mu"});
        if (g.has("mu")) c.mu = g["mu"].number();
    }
    if (root.has("seeds")) {
        const auto s = root["seeds"];
        s.only({"stream", "train", "init"});
        if (s.has("stream")) c.stream_seed = s["stream"].unsigned64();
        if (s.has("train")) c.train_seed = s["train"].unsigned64();
        if (s.has("init")) c.init_seed = s["init"].unsigned64();
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    try {
        return config_from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    } catch (const SchemaError& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace geoforge
