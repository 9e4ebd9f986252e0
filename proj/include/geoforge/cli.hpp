#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geoforge/codec.hpp"
#include "geoforge/config.hpp"
#include "geoforge/flow.hpp"
#include "geoforge/formats.hpp"
#include "geoforge/history_json.hpp"
#include "geoforge/observe.hpp"
#include "geoforge/parallel.hpp"

namespace geoforge {

namespace cli_detail {

namespace fs = std::filesystem;

inline std::string numbered(const char* pattern, std::uint64_t k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, static_cast<unsigned long long>(k));
    return buf;
}

/// e.g. "grid 64x64x64, voxel 60 m, span 3.84 x 3.84 x 3.84 km"
inline std::string grid_summary(const GridSpec& g) {
    const Vec3 e = g.extent();
    char buf[160];
    std::snprintf(buf, sizeof buf, "grid %dx%dx%d, voxel %g m, span %g x %g x %g km", g.dims.x, g.dims.y, g.dims.z,
                  g.voxel_size, e.x / 1000.0, e.y / 1000.0, e.z / 1000.0);
    return buf;
}

inline ExperimentConfig config_or_default(const std::string& path) {
    return path.empty() ? ExperimentConfig{} : load_config(path);
}

/// Sampling geometry comes from the config; the category count from the
/// checkpoint. An explicit config must agree with the checkpoint.
inline GridSpec sampling_grid(const std::string& config_path, const ExperimentConfig& cfg, const ReferenceVelocityModel& model) {
    if (!config_path.empty() && cfg.num_categories != model.architecture().channels)
        throw std::runtime_error("config num_categories (" + std::to_string(cfg.num_categories) +
                                 ") does not match checkpoint (" + std::to_string(model.architecture().channels) + ")");
    return cfg.grid;
}

/// Shortest decimal for a threshold level, used in file names.
inline std::string level_name(double level) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", level);
    return buf;
}

struct Options {
    std::string config;
    std::string out;
    std::string ckpt;
    std::string obs;
    std::string model;
    std::string dir;
    std::string axis = "z";
    std::uint64_t count = 0;
    std::uint64_t first = 0;
    std::uint64_t seed = 0;
    std::uint64_t boreholes = 0;
    std::optional<int> steps;
    std::optional<double> mu;
    int category = 0;
    int snapshot_every = 0;
    bool surface = false;
    bool quiet = false;
    std::vector<double> thresholds;
};

inline int cmd_generate(const Options& o, std::ostream& out) {
    const ExperimentConfig cfg = config_or_default(o.config);
    if (o.count == 0) return 0;
    const HistoryStream stream = cfg.stream();
    fs::create_directories(o.out);
    parallel_for(o.count, worker_count(), [&](std::size_t i) {
        const std::uint64_t k = o.first + i;
        const StreamItem item = stream.item(k);
        const fs::path base = fs::path(o.out) / numbered("item_%06llu", k);
        save_volume(base.string() + ".gvox", item.model);
        io::write_file(base.string() + ".json", history_to_json(item.history));
    });
    out << grid_summary(cfg.grid) << "\n";
    out << "wrote " << o.count << " items to " << o.out << "\n";
    return 0;
}

inline int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg = config_or_default(o.config);
    if (o.steps) cfg.train_steps = *o.steps;
    cfg.validate();
    const HistoryStream stream = cfg.stream();
    StreamSource source(stream);
    ReferenceVelocityModel model(cfg.architecture(), cfg.init_seed);
    const EmbeddingTable table(cfg.num_categories);
    const int every = std::max(1, cfg.train_steps / 20);
    const TrainResult r = train(model, source, table, cfg.train_config(), [&](int step, double loss) {
        if (!o.quiet && (step % every == 0 || step + 1 == cfg.train_steps))
            err << "step " << step << " loss " << loss << "\n";
    });
    model.set_parameters(r.parameters);
    save_checkpoint(o.out, model);
    io::write_file(o.out + ".loss.csv", encode_loss_csv(r.loss_trace));
    out << "trained " << model.parameter_count() << " parameters for " << cfg.train_steps << " steps; wrote " << o.out << "\n";
    return 0;
}

/// Shared by sample and inpaint: realization k starts from noise seeded by
/// split_seed(seed, k), so outputs do not depend on the worker count.
inline int run_realizations(const Options& o, std::ostream& out, const std::optional<SparseObservation>& obs_in) {
    const ExperimentConfig cfg = config_or_default(o.config);
    const ReferenceVelocityModel model = load_checkpoint(o.ckpt);
    const int n = model.architecture().channels;
    const GridSpec grid = sampling_grid(o.config, cfg, model);
    const EmbeddingTable table(n);
    SolverConfig solver = cfg.solver;
    if (o.steps) solver.steps = *o.steps;
    solver.validate();
    const double mu = o.mu.value_or(cfg.mu);
    std::optional<Guidance> guidance;
    if (obs_in) guidance = to_guidance(*obs_in, table);
    fs::create_directories(o.out);
    if (o.snapshot_every > 0) fs::create_directories(fs::path(o.out) / "snapshots");
    parallel_for(o.count, worker_count(), [&](std::size_t i) {
        Rng rng(split_seed(o.seed, i));
        const Field y0 = standard_normal_field(n, grid.dims, rng);
        StepObserver snap;
        if (o.snapshot_every > 0)
            snap = [&, i](int step, double, const Field& y) {
                if ((step + 1) % o.snapshot_every != 0) return;
                const std::string name = numbered("realization_%04llu", i) + numbered("_step%04llu.gvox", step + 1);
                save_volume(fs::path(o.out) / "snapshots" / name, decode_model(y, table, grid));
            };
        const Field y = guidance ? integrate_guided(model, y0, *guidance, mu, solver, snap) : integrate(model, y0, solver, snap);
        save_volume(fs::path(o.out) / (numbered("realization_%04llu", i) + ".gvox"), decode_model(y, table, grid));
    });
    out << "wrote " << o.count << " realizations to " << o.out << "\n";
    return 0;
}

inline int cmd_inpaint(const Options& o, std::ostream& out) {
    const ExperimentConfig cfg = config_or_default(o.config);
    const SparseObservation obs = load_observation_csv(o.obs, cfg.grid);
    return run_realizations(o, out, obs);
}

inline int cmd_extract(const Options& o, std::ostream& out) {
    const GeoModel m = load_volume(o.model);
    Rng rng(o.seed);
    SparseObservation obs = extract_boreholes(m, o.boreholes, rng);
    if (o.surface) obs = merge(obs, extract_surface(m));
    save_observation_csv(o.out, obs);
    out << grid_summary(m.grid()) << "\n";
    out << "wrote " << obs.size() << " observed voxels to " << o.out << "\n";
    return 0;
}

inline int cmd_ensemble(const Options& o, std::ostream& out) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(o.dir))
        if (e.is_regular_file() && e.path().extension() == ".gvox") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .gvox files in " + o.dir);
    std::vector<GeoModel> models;
    models.reserve(files.size());
    for (const auto& f : files) models.push_back(load_volume(f));
    const ProbVolume prob = ensemble_probability(models, o.category);
    export_npy(prob, o.out + "_prob.npy");
    out << "ensemble of " << models.size() << " realizations, category " << o.category << "\n";
    for (double level : o.thresholds) {
        const BinaryVolume b = threshold(prob, level);
        export_npy(b, o.out + "_thr" + level_name(level) + ".npy");
        out << "threshold " << level << ": " << std::count(b.values.begin(), b.values.end(), 1) << " voxels\n";
    }
    return 0;
}

inline int cmd_slices(const Options& o, std::ostream& out) {
    const GeoModel m = load_volume(o.model);
    const auto paths = export_slices(m, slice_axis_from_string(o.axis), o.out);
    out << "wrote " << paths.size() << " slices\n";
    return 0;
}

inline int cmd_npy(const Options& o, std::ostream& out) {
    export_npy(load_volume(o.model), o.out);
    out << "wrote " << o.out << "\n";
    return 0;
}

}  // namespace cli_detail

/// Entry point of the geoforge tool. Exit codes: 0 success, 1 runtime error,
/// 2 usage error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    using namespace cli_detail;
    Options o;
    CLI::App app{"geoforge: procedural geomodels and flow-matching inpainting"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all help");
    const auto nonneg = CLI::NonNegativeNumber;

    auto* gen = app.add_subcommand("generate", "Stream (history, model) pairs to .gvox + .json files");
    gen->add_option("--config", o.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    gen->add_option("--count", o.count, "Number of items")->required()->check(nonneg);
    gen->add_option("--first", o.first, "Index of the first stream item");
    gen->add_option("--out", o.out, "Output directory")->required();

    auto* tr = app.add_subcommand("train", "Train the reference velocity model on the history stream");
    tr->add_option("--config", o.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    tr->add_option("--out", o.out, "Checkpoint path; the loss trace goes to <out>.loss.csv")->required();
    tr->add_option("--steps", o.steps, "Override train.steps")->check(nonneg);
    tr->add_flag("--quiet", o.quiet, "No progress output");

    auto* sm = app.add_subcommand("sample", "Unconditional sampling");
    auto* ip = app.add_subcommand("inpaint", "Observation-guided sampling");
    for (auto* s : {sm, ip}) {
        s->add_option("--ckpt", o.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
        s->add_option("--count", o.count, "Number of realizations")->required()->check(nonneg);
        s->add_option("--seed", o.seed, "Base seed")->required();
        s->add_option("--out", o.out, "Output directory")->required();
        s->add_option("--config", o.config, "Experiment config for grid and solver")->check(CLI::ExistingFile);
        s->add_option("--steps", o.steps, "Override solver.steps")->check(CLI::PositiveNumber);
        s->add_option("--snapshot-every", o.snapshot_every, "Write decoded states every S steps to <out>/snapshots")
            ->check(nonneg);
    }
    ip->add_option("--obs", o.obs, "Observation CSV")->required()->check(CLI::ExistingFile);
    ip->add_option("--mu", o.mu, "Guidance strength (default: guidance.mu)")->check(nonneg);

    auto* ex = app.add_subcommand("extract", "Extract boreholes and/or the surface from a model");
    ex->add_option("--model", o.model, "Model (.gvox)")->required()->check(CLI::ExistingFile);
    ex->add_option("--boreholes", o.boreholes, "Number of vertical boreholes")->check(nonneg);
    ex->add_option("--seed", o.seed, "Borehole placement seed");
    ex->add_flag("--surface", o.surface, "Also record the topmost non-air voxel of every column");
    ex->add_option("--out", o.out, "Observation CSV")->required();

    auto* en = app.add_subcommand("ensemble", "Probability volume and thresholded binaries from realizations");
    en->add_option("--dir", o.dir, "Directory of .gvox realizations")->required()->check(CLI::ExistingDirectory);
    en->add_option("--category", o.category, "Target category")->required()->check(nonneg);
    en->add_option("--thresholds", o.thresholds, "Comma-separated levels in [0, 1]")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));
    en->add_option("--out", o.out, "Output prefix")->required();

    auto* sl = app.add_subcommand("slices", "Export PGM slices of a model");
    sl->add_option("--model", o.model, "Model (.gvox)")->required()->check(CLI::ExistingFile);
    sl->add_option("--axis", o.axis, "Slice axis")->check(CLI::IsMember({"x", "y", "z"}));
    sl->add_option("--out", o.out, "Output prefix")->required();

    auto* np = app.add_subcommand("npy", "Export a model as an NPY array");
    np->add_option("--model", o.model, "Model (.gvox)")->required()->check(CLI::ExistingFile);
    np->add_option("--out", o.out, "Output .npy path")->required();

    auto* sc = app.add_subcommand("show-config", "Print the effective config");
    sc->add_option("--config", o.config, "Experiment config (JSON)")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_generate(o, out);
        if (tr->parsed()) return cmd_train(o, out, err);
        if (sm->parsed()) return run_realizations(o, out, std::nullopt);
        if (ip->parsed()) return cmd_inpaint(o, out);
        if (ex->parsed()) return cmd_extract(o, out);
        if (en->parsed()) return cmd_ensemble(o, out);
        if (sl->parsed()) return cmd_slices(o, out);
        if (np->parsed()) return cmd_npy(o, out);
        if (sc->parsed()) {
            out << config_to_json(config_or_default(o.config)).dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace geoforge
