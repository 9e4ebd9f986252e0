#include <gtest/gtest.h>

#include "geoforge/geoforge.hpp"

using namespace geoforge;

namespace {

std::string error_of(const std::string& text) {
    try {
        config_from_json(text);
    } catch (const SchemaError& e) {
        return e.what();
    } catch (const std::exception& e) {
        return std::string("other: ") + e.what();
    }
    return "";
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
    const ExperimentConfig c = config_from_json("{}");
    const ExperimentConfig d;
    EXPECT_EQ(c.grid, d.grid);
    EXPECT_EQ(c.num_categories, 4);
    EXPECT_EQ(c.hidden, (std::vector<int>{16, 16}));
    EXPECT_EQ(c.solver.method, SolverMethod::Rk4);
    EXPECT_EQ(c.solver.steps, 100);
    EXPECT_EQ(c.chain.start[static_cast<std::size_t>(ProcessKind::Sediment)], 1.0);
    EXPECT_EQ(c.chain.rows[0][static_cast<std::size_t>(ProcessKind::End)], 0.15);
    EXPECT_EQ(c.limits.min_steps, 3u);
    EXPECT_EQ(c.limits.max_steps, 12u);
}

TEST(Config, RoundTripThroughJson) {
    ExperimentConfig c = config_from_json(R"({"grid": {"dims": [4, 5, 6], "voxel_size": 20},
        "num_categories": 6, "train": {"learning_rate": 0.01, "steps": 7},
        "solver": {"method": "HEUN", "steps": 9}, "seeds": {"stream": 18446744073709551615}})");
    EXPECT_EQ(c.grid.dims, (Index3{4, 5, 6}));
    EXPECT_EQ(c.priors.domain, c.grid);
    EXPECT_EQ(c.priors.num_categories, 6);
    EXPECT_EQ(c.stream_seed, 18446744073709551615ull);
    const ExperimentConfig back = config_from_json(config_to_json(c).dump());
    EXPECT_EQ(back.grid, c.grid);
    EXPECT_EQ(back.learning_rate, 0.01);
    EXPECT_EQ(back.train_steps, 7);
    EXPECT_EQ(back.solver.method, SolverMethod::Heun);
    EXPECT_EQ(back.chain.rows, c.chain.rows);
    EXPECT_EQ(back.priors.fold_amplitude, c.priors.fold_amplitude);
    EXPECT_EQ(back.stream_seed, c.stream_seed);
}

TEST(Config, ChainOverrides) {
    const ExperimentConfig c = config_from_json(R"({"chain": {"start": "FOLD", "end_probability": 0.5,
        "rows": {"TILT": [0, 0, 0, 0, 0, 0, 0, 1]}, "max_steps": 4}})");
    EXPECT_EQ(c.chain.start[static_cast<std::size_t>(ProcessKind::Fold)], 1.0);
    EXPECT_EQ(c.chain.rows[static_cast<std::size_t>(ProcessKind::Fold)][7], 0.5);
    EXPECT_EQ(c.chain.rows[static_cast<std::size_t>(ProcessKind::Tilt)][7], 1.0);
    EXPECT_EQ(c.limits.max_steps, 4u);
}

TEST(Config, PriorOverrides) {
    const ExperimentConfig c = config_from_json(R"({"priors": {"fold_amplitude": [10, 20], "erosion_bend_probability": 0}})");
    EXPECT_EQ(c.priors.fold_amplitude, (Range{10, 20}));
    EXPECT_EQ(c.priors.erosion_bend_probability, 0.0);
}

TEST(Config, Errors) {
    EXPECT_EQ(error_of(R"({"gird": {}})"), "/gird: unknown key");
    EXPECT_EQ(error_of(R"({"train": {"lr": 1}})"), "/train/lr: unknown key");
    EXPECT_EQ(error_of(R"({"priors": {"fold_amp": [1, 2]}})"), "/priors/fold_amp: unknown key");
    EXPECT_EQ(error_of(R"({"priors": {"fold_amplitude": [1]}})"), "/priors/fold_amplitude: expected [lo, hi]");
    EXPECT_EQ(error_of(R"({"chain": {"rows": {"END": [0,0,0,0,0,0,0,1]}}})"), "/chain/rows/END: END has no outgoing row");
    EXPECT_EQ(error_of(R"({"chain": {"start": "MAGMA"}})").rfind("/chain/start: ", 0), 0u);
    EXPECT_EQ(error_of(R"({"chain": {"rows": {"FOLD": [1,0,0,0,0,0,0,0.5]}}})").rfind("/chain: ", 0), 0u);
    EXPECT_EQ(error_of(R"({"grid": {"dims": [1, 2]}})"), "/grid/dims: expected 3 positive integers");
    EXPECT_FALSE(error_of(R"({"solver": {"method": "MIDPOINT"}})").empty());
    EXPECT_FALSE(error_of(R"({"num_categories": 1})").empty());
    EXPECT_FALSE(error_of(R"({"train": {"momentum": 1.0}})").empty());
}

TEST(Config, ShippedDeskConfigLoads) {
    const ExperimentConfig c = load_config(GEOFORGE_SOURCE_DIR "/configs/desk.json");
    EXPECT_NO_THROW(c.validate());
    EXPECT_THROW(load_config(GEOFORGE_SOURCE_DIR "/configs/missing.json"), std::runtime_error);
}
