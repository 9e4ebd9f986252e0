#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "geoforge/grid.hpp"
#include "geoforge/observe.hpp"
#include "geoforge/velocity.hpp"

namespace geoforge {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace io {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// Little-endian byte sink.
class Writer {
public:
    template <typename T>
    void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        std::array<char, sizeof(T)> b;
        std::memcpy(b.data(), &value, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
        bytes_.append(b.data(), b.size());
    }
    void put_bytes(std::string_view s) { bytes_.append(s); }
    const std::string& bytes() const { return bytes_; }

private:
    std::string bytes_;
};

/// Little-endian byte source with bounds checking.
class Reader {
public:
    Reader(const std::vector<std::uint8_t>& bytes, std::string context) : bytes_(bytes), context_(std::move(context)) {}

    template <typename T>
    T get(const char* what) {
        if (remaining() < sizeof(T)) throw FormatError(context_ + ": truncated header (" + what + ")");
        std::array<char, sizeof(T)> b;
        std::memcpy(b.data(), bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
        pos_ += sizeof(T);
        T v;
        std::memcpy(&v, b.data(), sizeof(T));
        return v;
    }
    std::string get_bytes(std::size_t n, const char* what) {
        if (remaining() < n) throw FormatError(context_ + ": truncated header (" + what + ")");
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    std::size_t position() const { return pos_; }
    const std::uint8_t* cursor() const { return bytes_.data() + pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::string context_;
    std::size_t pos_ = 0;
};

}  // namespace io

// ---------------------------------------------------------------------------
// GVOX: categorical volume container.
//
//   "GVOX" | version u32 | nx ny nz u32 | voxel_size f64 | origin 3 x f64 |
//   num_categories u32 | labels u8[nx*ny*nz], x fastest. Little-endian.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kVolumeVersion = 1;

inline std::string encode_volume(const GeoModel& m) {
    io::Writer w;
    w.put_bytes("GVOX");
    w.put<std::uint32_t>(kVolumeVersion);
    const GridSpec& g = m.grid();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(g.dims.x));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(g.dims.y));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(g.dims.z));
    w.put<double>(g.voxel_size);
    w.put<double>(g.origin.x);
    w.put<double>(g.origin.y);
    w.put<double>(g.origin.z);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.num_categories()));
    w.put_bytes(std::string_view(reinterpret_cast<const char*>(m.labels().data()), m.labels().size()));
    return w.bytes();
}

inline GeoModel decode_volume(const std::vector<std::uint8_t>& bytes, const std::string& context = "volume") {
    io::Reader r(bytes, context);
    if (r.get_bytes(4, "magic") != "GVOX") throw FormatError(context + ": corrupt header (bad magic)");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kVolumeVersion)
        throw FormatError(context + ": corrupt header (unsupported version " + std::to_string(version) + ")");
    const auto nx = r.get<std::uint32_t>("dims");
    const auto ny = r.get<std::uint32_t>("dims");
    const auto nz = r.get<std::uint32_t>("dims");
    const auto size = r.get<double>("voxel_size");
    const double ox = r.get<double>("origin");
    const double oy = r.get<double>("origin");
    const double oz = r.get<double>("origin");
    const auto n = r.get<std::uint32_t>("num_categories");
    if (nx == 0 || ny == 0 || nz == 0 || nx > (1u << 16) || ny > (1u << 16) || nz > (1u << 16))
        throw FormatError(context + ": corrupt header (invalid dims)");
    if (!(size > 0.0) || !std::isfinite(size) || !std::isfinite(ox) || !std::isfinite(oy) || !std::isfinite(oz))
        throw FormatError(context + ": corrupt header (invalid geometry)");
    if (n < 2 || n > 256) throw FormatError(context + ": corrupt header (invalid num_categories)");
    const std::size_t count = static_cast<std::size_t>(nx) * ny * nz;
    if (r.remaining() < count)
        throw FormatError(context + ": truncated payload (expected " + std::to_string(count) + " bytes, found " +
                          std::to_string(r.remaining()) + ")");
    if (r.remaining() > count) throw FormatError(context + ": trailing bytes after payload");
    std::vector<Label> labels(r.cursor(), r.cursor() + count);
    for (Label l : labels)
        if (l >= n) throw FormatError(context + ": label " + std::to_string(l) + " >= num_categories " + std::to_string(n));
    return GeoModel(GridSpec({static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz)}, size, {ox, oy, oz}),
                    static_cast<int>(n), std::move(labels));
}

inline void save_volume(const std::filesystem::path& path, const GeoModel& m) { io::write_file(path, encode_volume(m)); }

inline GeoModel load_volume(const std::filesystem::path& path) { return decode_volume(io::read_file(path), path.string()); }

// ---------------------------------------------------------------------------
// NPY v1.0, C order, shape (nz, ny, nx).
// ---------------------------------------------------------------------------

/// Header padded with spaces and a trailing newline so that the payload
/// starts on a 16-byte boundary.
inline std::string npy_header(std::string_view descr, const Index3& dims) {
    std::ostringstream dict;
    dict << "{'descr': '" << descr << "', 'fortran_order': False, 'shape': (" << dims.z << ", " << dims.y << ", " << dims.x
         << "), }";
    std::string h = dict.str();
    const std::size_t unpadded = 10 + h.size() + 1;
    h.append((16 - unpadded % 16) % 16, ' ');
    h.push_back('\n');
    io::Writer w;
    w.put_bytes("\x93NUMPY");
    w.put<std::uint8_t>(1);
    w.put<std::uint8_t>(0);
    w.put<std::uint16_t>(static_cast<std::uint16_t>(h.size()));
    w.put_bytes(h);
    return w.bytes();
}

inline std::string encode_npy(const GeoModel& m) {
    std::string out = npy_header("|u1", m.grid().dims);
    out.append(reinterpret_cast<const char*>(m.labels().data()), m.labels().size());
    return out;
}

inline std::string encode_npy(const ProbVolume& p) {
    io::Writer w;
    w.put_bytes(npy_header("<f4", p.grid().dims));
    for (std::size_t v = 0; v < p.counts().size(); ++v) w.put<float>(static_cast<float>(p.value(v)));
    return w.bytes();
}

inline std::string encode_npy(const BinaryVolume& b) {
    std::string out = npy_header("|u1", b.grid.dims);
    out.append(reinterpret_cast<const char*>(b.values.data()), b.values.size());
    return out;
}

template <typename Volume>
void export_npy(const Volume& v, const std::filesystem::path& path) {
    io::write_file(path, encode_npy(v));
}

// ---------------------------------------------------------------------------
// PGM (P5) slices.
// ---------------------------------------------------------------------------

enum class SliceAxis { X, Y, Z };

inline SliceAxis slice_axis_from_string(std::string_view s) {
    if (s == "x") return SliceAxis::X;
    if (s == "y") return SliceAxis::Y;
    if (s == "z") return SliceAxis::Z;
    throw std::invalid_argument("axis must be one of x, y, z");
}

inline Label palette_gray(int label, int num_categories) {
    return static_cast<Label>((255 * label) / (num_categories - 1));
}

namespace detail {

/// Writes one image per slice along `axis`. `gray(linear_index)` gives the
/// pixel value. Z slices put y = 0 on the first row; X and Y slices put the
/// top of the volume on the first row.
template <typename Gray>
std::vector<std::filesystem::path> write_slices(const GridSpec& g, SliceAxis axis, const std::string& prefix, Gray&& gray) {
    const int count = axis == SliceAxis::X ? g.dims.x : (axis == SliceAxis::Y ? g.dims.y : g.dims.z);
    const int width = axis == SliceAxis::X ? g.dims.y : g.dims.x;
    const int height = axis == SliceAxis::Z ? g.dims.y : g.dims.z;
    const char name = axis == SliceAxis::X ? 'x' : (axis == SliceAxis::Y ? 'y' : 'z');
    std::vector<std::filesystem::path> paths;
    for (int s = 0; s < count; ++s) {
        std::string img = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
        for (int row = 0; row < height; ++row)
            for (int col = 0; col < width; ++col) {
                Index3 i;
                switch (axis) {
                    case SliceAxis::X: i = {s, col, g.dims.z - 1 - row}; break;
                    case SliceAxis::Y: i = {col, s, g.dims.z - 1 - row}; break;
                    case SliceAxis::Z: i = {col, row, s}; break;
                }
                img.push_back(static_cast<char>(gray(g.linear(i))));
            }
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "_%c%03d.pgm", name, s);
        paths.emplace_back(prefix + suffix);
        io::write_file(paths.back(), img);
    }
    return paths;
}

}  // namespace detail

/// Gray level floor(255 * label / (N - 1)).
inline std::vector<std::filesystem::path> export_slices(const GeoModel& m, SliceAxis axis, const std::string& prefix) {
    return detail::write_slices(m.grid(), axis, prefix,
                                [&](std::size_t v) { return palette_gray(m.at(v), m.num_categories()); });
}

/// Gray level floor(255 * p).
inline std::vector<std::filesystem::path> export_slices(const ProbVolume& p, SliceAxis axis, const std::string& prefix) {
    return detail::write_slices(p.grid(), axis, prefix, [&](std::size_t v) {
        return static_cast<Label>((255u * p.counts()[v]) / p.ensemble_size());
    });
}

// ---------------------------------------------------------------------------
// Observation CSV: header x,y,z,label; zero-based indices.
// ---------------------------------------------------------------------------

inline std::string encode_observation_csv(const SparseObservation& obs) {
    std::string out = "x,y,z,label\n";
    for (const auto& e : obs.entries())
        out += std::to_string(e.index.x) + "," + std::to_string(e.index.y) + "," + std::to_string(e.index.z) + "," +
               std::to_string(static_cast<int>(e.label)) + "\n";
    return out;
}

inline SparseObservation decode_observation_csv(std::string_view text, const GridSpec& grid) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw FormatError("observation csv: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,y,z,label") throw FormatError("observation csv: header must be x,y,z,label");
    std::vector<ObservedVoxel> entries;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        long vals[4];
        const char* p = line.c_str();
        for (int k = 0; k < 4; ++k) {
            char* end = nullptr;
            vals[k] = std::strtol(p, &end, 10);
            if (end == p || (k < 3 && *end != ',') || (k == 3 && *end != '\0'))
                throw FormatError("observation csv: malformed row " + std::to_string(row));
            p = end + 1;
        }
        if (vals[3] < 0 || vals[3] > 255) throw FormatError("observation csv: label out of range on row " + std::to_string(row));
        const Index3 idx{static_cast<int>(vals[0]), static_cast<int>(vals[1]), static_cast<int>(vals[2])};
        if (!grid.contains(idx)) throw FormatError("observation csv: index out of bounds on row " + std::to_string(row));
        entries.push_back({idx, static_cast<Label>(vals[3])});
    }
    return SparseObservation(grid, Provenance::Merged, std::move(entries));
}

inline void save_observation_csv(const std::filesystem::path& path, const SparseObservation& obs) {
    io::write_file(path, encode_observation_csv(obs));
}

inline SparseObservation load_observation_csv(const std::filesystem::path& path, const GridSpec& grid) {
    const auto bytes = io::read_file(path);
    return decode_observation_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), grid);
}

// ---------------------------------------------------------------------------
// Checkpoint: "GFCK" | version u32 | descriptor length u32 | descriptor u32[] |
// parameter count u64 | parameters f32[]. Little-endian.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ReferenceArchitecture architecture;
    std::vector<double> parameters;
};

inline std::string encode_checkpoint(const ReferenceArchitecture& arch, std::span<const double> params) {
    io::Writer w;
    w.put_bytes("GFCK");
    w.put<std::uint32_t>(kCheckpointVersion);
    const auto desc = arch.descriptor();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(desc.size()));
    for (auto d : desc) w.put<std::uint32_t>(d);
    w.put<std::uint64_t>(params.size());
    for (double p : params) w.put<float>(static_cast<float>(p));
    return w.bytes();
}

inline Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& context = "checkpoint") {
    io::Reader r(bytes, context);
    if (r.get_bytes(4, "magic") != "GFCK") throw FormatError(context + ": corrupt header (bad magic)");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kCheckpointVersion) throw FormatError(context + ": unsupported version " + std::to_string(version));
    const auto len = r.get<std::uint32_t>("descriptor length");
    if (len > 1024) throw FormatError(context + ": corrupt header (descriptor too long)");
    std::vector<std::uint32_t> desc(len);
    for (auto& d : desc) d = r.get<std::uint32_t>("descriptor");
    Checkpoint ck;
    try {
        ck.architecture = ReferenceArchitecture::from_descriptor(desc);
    } catch (const std::invalid_argument& e) {
        throw FormatError(context + ": " + e.what());
    }
    const auto count = r.get<std::uint64_t>("parameter count");
    const ReferenceVelocityModel probe(ck.architecture);
    if (count != probe.parameter_count()) throw FormatError(context + ": parameter count does not match architecture");
    if (r.remaining() != count * sizeof(float)) throw FormatError(context + ": truncated or oversized parameter payload");
    ck.parameters.resize(count);
    for (auto& p : ck.parameters) p = static_cast<double>(r.get<float>("parameters"));
    return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const ReferenceVelocityModel& model) {
    io::write_file(path, encode_checkpoint(model.architecture(), model.parameters()));
}

inline ReferenceVelocityModel load_checkpoint(const std::filesystem::path& path) {
    Checkpoint ck = decode_checkpoint(io::read_file(path), path.string());
    ReferenceVelocityModel model(ck.architecture);
    model.set_parameters(ck.parameters);
    return model;
}

inline std::string encode_loss_csv(std::span<const double> trace) {
    std::string out = "step,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, trace[i]);
        out += buf;
    }
    return out;
}

}  // namespace geoforge
