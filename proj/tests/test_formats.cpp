#include <gtest/gtest.h>

#include <fstream>

#include "geoforge/geoforge.hpp"

using namespace geoforge;
namespace fs = std::filesystem;

namespace {

fs::path tmpdir(const std::string& name) {
    const fs::path p = fs::path(GEOFORGE_TEST_TMP) / "formats" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

std::string error_of(const std::vector<std::uint8_t>& b) {
    try {
        decode_volume(b, "v");
    } catch (const FormatError& e) {
        return e.what();
    }
    return "";
}

GeoModel sample_model(Index3 d, int n) {
    const GridSpec g(d, 30.0, {1.5, -2.0, 7.0});
    std::vector<Label> l(g.voxel_count());
    for (std::size_t i = 0; i < l.size(); ++i) l[i] = static_cast<Label>((i * 7 + 3) % static_cast<std::size_t>(n));
    return GeoModel(g, n, l);
}

}  // namespace

TEST(Gvox, RoundTrip) {
    const GeoModel m = sample_model({5, 3, 4}, 6);
    const std::string enc = encode_volume(m);
    EXPECT_EQ(enc.size(), 4u + 4 + 12 + 32 + 4 + 60);
    EXPECT_EQ(decode_volume(bytes_of(enc)), m);
    const fs::path d = tmpdir("gvox");
    save_volume(d / "a.gvox", m);
    EXPECT_EQ(load_volume(d / "a.gvox"), m);
}

TEST(Gvox, CorruptionIsReported) {
    const GeoModel m = sample_model({4, 4, 4}, 3);
    std::string enc = encode_volume(m);
    EXPECT_EQ(error_of(bytes_of(enc.substr(0, enc.size() - 1))), "v: truncated payload (expected 64 bytes, found 63)");
    EXPECT_EQ(error_of(bytes_of(enc + "x")), "v: trailing bytes after payload");
    EXPECT_NE(error_of(bytes_of(enc.substr(0, 10))).find("truncated header"), std::string::npos);
    std::string bad = enc;
    bad[0] = 'X';
    EXPECT_EQ(error_of(bytes_of(bad)), "v: corrupt header (bad magic)");
    bad = enc;
    bad[4] = 2;
    EXPECT_NE(error_of(bytes_of(bad)).find("unsupported version"), std::string::npos);
    bad = enc;
    bad.back() = 3;  // label == N
    EXPECT_EQ(error_of(bytes_of(bad)), "v: label 3 >= num_categories 3");
}

TEST(Npy, HeaderLayout) {
    const GeoModel m = sample_model({2, 2, 2}, 3);
    const std::string npy = encode_npy(m);
    ASSERT_EQ(npy.size(), 80u + 8u);
    EXPECT_EQ(npy.substr(0, 6), "\x93NUMPY");
    EXPECT_EQ(npy[6], 1);
    EXPECT_EQ(npy[7], 0);
    const std::size_t hlen = static_cast<unsigned char>(npy[8]) | (static_cast<unsigned char>(npy[9]) << 8);
    EXPECT_EQ(10 + hlen, 80u);
    const std::string header = npy.substr(10, hlen);
    EXPECT_NE(header.find("'descr': '|u1'"), std::string::npos);
    EXPECT_NE(header.find("'shape': (2, 2, 2)"), std::string::npos);
    EXPECT_EQ(header.back(), '\n');
    EXPECT_EQ(npy.substr(80), std::string(m.labels().begin(), m.labels().end()));
}

TEST(Npy, ShapeIsZYX) {
    const std::string h = npy_header("<f4", {5, 3, 2});
    EXPECT_NE(h.find("(2, 3, 5)"), std::string::npos);
    EXPECT_EQ(h.size() % 16, 0u);
}

TEST(Npy, ProbabilityPayload) {
    const GridSpec g({2, 1, 1}, 1.0, {});
    const ProbVolume p(g, 1, 4, {1, 4});
    const std::string npy = encode_npy(p);
    float v[2];
    std::memcpy(v, npy.data() + npy.size() - 8, 8);
    EXPECT_EQ(v[0], 0.25f);
    EXPECT_EQ(v[1], 1.0f);
}

TEST(Pgm, ConstantModelSlices) {
    const GridSpec g({4, 4, 4}, 1.0, {});
    const GeoModel m(g, 4, std::vector<Label>(64, 3));
    const fs::path d = tmpdir("pgm");
    const auto paths = export_slices(m, SliceAxis::Z, (d / "m").string());
    ASSERT_EQ(paths.size(), 4u);
    std::string first;
    for (const auto& p : paths) {
        const auto b = io::read_file(p);
        const std::string s(b.begin(), b.end());
        EXPECT_EQ(s, std::string("P5\n4 4\n255\n") + std::string(16, static_cast<char>(255)));
        if (first.empty()) first = s;
        EXPECT_EQ(s, first);
    }
    EXPECT_EQ(paths[2].filename(), "m_z002.pgm");
    EXPECT_EQ(palette_gray(0, 4), 0);
    EXPECT_EQ(palette_gray(1, 4), 85);
    EXPECT_EQ(palette_gray(3, 4), 255);
}

TEST(Pgm, VerticalSlicesPutTopFirst) {
    const GridSpec g({2, 1, 2}, 1.0, {});
    // z = 0 is category 1 (gray 127), z = 1 is air.
    const GeoModel m(g, 3, {1, 1, 0, 0});
    const fs::path d = tmpdir("pgm_x");
    const auto paths = export_slices(m, SliceAxis::Y, (d / "s").string());
    ASSERT_EQ(paths.size(), 1u);
    const auto b = io::read_file(paths[0]);
    const std::string s(b.begin(), b.end());
    EXPECT_EQ(s, std::string("P5\n2 2\n255\n") + std::string("\0\0", 2) + std::string(2, static_cast<char>(127)));
    EXPECT_THROW(slice_axis_from_string("w"), std::invalid_argument);
}

TEST(ObservationCsv, RoundTripAndErrors) {
    const GridSpec g({3, 3, 3}, 1.0, {});
    const SparseObservation o(g, Provenance::Borehole, {{{0, 1, 2}, 1}, {{2, 2, 2}, 3}});
    const std::string csv = encode_observation_csv(o);
    EXPECT_EQ(csv, "x,y,z,label\n0,1,2,1\n2,2,2,3\n");
    const auto back = decode_observation_csv(csv, g);
    EXPECT_EQ(back.entries(), o.entries());
    EXPECT_EQ(back.provenance(), Provenance::Merged);
    EXPECT_THROW(decode_observation_csv("a,b\n", g), FormatError);
    EXPECT_THROW(decode_observation_csv("x,y,z,label\n0,1\n", g), FormatError);
    EXPECT_THROW(decode_observation_csv("x,y,z,label\n0,1,3,1\n", g), FormatError);
    EXPECT_NO_THROW(decode_observation_csv("x,y,z,label\r\n0,1,2,1\r\n\n", g));
}

TEST(Checkpoint, RoundTripAtSinglePrecision) {
    const ReferenceVelocityModel m({3, 4, {5, 2}}, 77);
    const fs::path d = tmpdir("ckpt");
    save_checkpoint(d / "m.gfck", m);
    const ReferenceVelocityModel back = load_checkpoint(d / "m.gfck");
    EXPECT_EQ(back.architecture(), m.architecture());
    ASSERT_EQ(back.parameter_count(), m.parameter_count());
    for (std::size_t k = 0; k < m.parameter_count(); ++k)
        EXPECT_EQ(back.parameters()[k], static_cast<double>(static_cast<float>(m.parameters()[k])));
    std::string enc = encode_checkpoint(m.architecture(), m.parameters());
    EXPECT_THROW(decode_checkpoint(bytes_of(enc.substr(0, enc.size() - 2))), FormatError);
    enc[0] = 'Q';
    EXPECT_THROW(decode_checkpoint(bytes_of(enc)), FormatError);
}

TEST(LossCsv, Rows) {
    const std::vector<double> trace{0.5, 0.25};
    EXPECT_EQ(encode_loss_csv(trace), "step,loss\n0,0.5\n1,0.25\n");
}
