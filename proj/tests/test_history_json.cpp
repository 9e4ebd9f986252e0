#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace geoforge;
using nlohmann::json;

namespace {

const GridSpec kGrid({16, 16, 16}, 100.0, {0, 0, 0});

HistoryStream stream() {
    return HistoryStream(TransitionMatrix::uniform(), ParamPriors::for_grid(kGrid, 5), kGrid, 5, 17);
}

std::string error_of(const std::string& text) {
    try {
        history_from_json(text);
    } catch (const SchemaError& e) {
        return e.what();
    }
    return "";
}

History single_fold() {
    History h;
    h.initial = {{400.0, 500.0, 300.0}, {2, 3, 4}, 100.0};
    FoldParams f;
    f.direction = {1, 0, 0};
    f.displacement_axis = {0, 0, 1};
    f.amplitude = 150.0;
    f.wavelength = 900.0;
    f.phase = 0.3;
    h.steps.push_back({ProcessKind::Fold, f});
    return h;
}

}  // namespace

TEST(HistoryJson, StreamRoundTripIsExact) {
    const auto s = stream();
    for (std::uint64_t k = 0; k < 40; ++k) {
        const StreamItem item = s.item(k);
        const History back = history_from_json(history_to_json(item.history));
        ASSERT_EQ(back, item.history) << k;
        ASSERT_EQ(realize(back, kGrid, 5), item.model) << k;
    }
}

TEST(HistoryJson, EveryKindAppearsAndRoundTrips) {
    const auto s = stream();
    std::array<bool, kProcessKinds> seen{};
    for (std::uint64_t k = 0; k < 300; ++k)
        for (const auto& st : s.item(k).history.steps) seen[static_cast<std::size_t>(st.kind)] = true;
    for (bool b : seen) EXPECT_TRUE(b);
}

TEST(HistoryJson, EmptyHistory) {
    History h;
    h.initial = {{1000.0}, {1}, 0.0};
    const History back = history_from_json(history_to_json(h));
    EXPECT_EQ(back, h);
    EXPECT_TRUE(back.steps.empty());
    EXPECT_EQ(realize(back, kGrid, 5), init_strata(kGrid, 5, h.initial));
}

TEST(HistoryJson, HandEditedAmplitudeMatchesOracle) {
    json doc = history_to_json_value(single_fold());
    doc["steps"][0]["amplitude"] = 420.0;
    const History edited = history_from_json(doc.dump());
    FoldParams f = std::get<FoldParams>(single_fold().steps[0].params);
    f.amplitude = 420.0;
    const GeoModel expected = oracle::transform(init_strata(kGrid, 5, single_fold().initial), f);
    EXPECT_EQ(realize(edited, kGrid, 5), expected);
}

TEST(HistoryJson, ErrorsNameThePath) {
    const auto s = stream();
    History h = s.item(0).history;
    while (h.steps.size() < 3) h.steps.push_back(single_fold().steps[0]);
    h.steps[2] = single_fold().steps[0];
    json doc = history_to_json_value(h);

    json bad = doc;
    bad["steps"][2].erase("amplitude");
    EXPECT_EQ(error_of(bad.dump()), "/steps/2/amplitude: missing required key");

    bad = doc;
    bad["steps"][2]["amplitude"] = "big";
    EXPECT_EQ(error_of(bad.dump()).rfind("/steps/2/amplitude: ", 0), 0u);

    bad = doc;
    bad["steps"][2]["colour"] = 1;
    EXPECT_EQ(error_of(bad.dump()), "/steps/2/colour: unknown key");

    bad = doc;
    bad["steps"][2]["kind"] = "VOLCANO";
    EXPECT_EQ(error_of(bad.dump()).rfind("/steps/2/kind: ", 0), 0u);

    bad = doc;
    bad.erase("initial");
    EXPECT_EQ(error_of(bad.dump()), "/initial: missing required key");

    EXPECT_NE(error_of("{not json").find("/"), std::string::npos);
}

TEST(HistoryJson, OutputIsStable) {
    const History h = single_fold();
    EXPECT_EQ(history_to_json(h), history_to_json(history_from_json(history_to_json(h))));
    EXPECT_EQ(history_to_json(h).back(), '\n');
}
