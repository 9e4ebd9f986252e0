#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geoforge/vec3.hpp"

namespace geoforge {

/// A document did not match its schema. The message starts with the JSON
/// pointer of the offending value.
class SchemaError : public std::runtime_error {
public:
    SchemaError(const std::string& path, const std::string& what)
        : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

namespace schema {

using nlohmann::json;

/// A JSON value together with its pointer from the document root.
struct Node {
    const json& value;
    std::string path;

    Node operator[](std::string_view key) const {
        require_object();
        auto it = value.find(key);
        if (it == value.end()) throw SchemaError(path + "/" + std::string(key), "missing required key");
        return {*it, path + "/" + std::string(key)};
    }
    Node operator[](std::size_t i) const { return {value.at(i), path + "/" + std::to_string(i)}; }

    bool has(std::string_view key) const { return value.is_object() && value.contains(key); }

    void require_object() const {
        if (!value.is_object()) throw SchemaError(path, "expected an object");
    }

    /// Rejects keys outside `allowed`.
    void only(std::initializer_list<std::string_view> allowed) const {
        require_object();
        for (auto it = value.begin(); it != value.end(); ++it) {
            bool ok = false;
            for (auto a : allowed) ok = ok || it.key() == a;
            if (!ok) throw SchemaError(path + "/" + it.key(), "unknown key");
        }
    }

    std::size_t array_size() const {
        if (!value.is_array()) throw SchemaError(path, "expected an array");
        return value.size();
    }

    double number() const {
        if (!value.is_number()) throw SchemaError(path, "expected a number");
        const double d = value.get<double>();
        if (!std::isfinite(d)) throw SchemaError(path, "expected a finite number");
        return d;
    }

    std::int64_t integer(std::int64_t lo = std::numeric_limits<std::int64_t>::min(),
                         std::int64_t hi = std::numeric_limits<std::int64_t>::max()) const {
        std::int64_t v = 0;
        if (value.is_number_unsigned()) {
            if (value.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
                throw SchemaError(path, "integer out of range");
            v = static_cast<std::int64_t>(value.get<std::uint64_t>());
        } else if (value.is_number_integer()) {
            v = value.get<std::int64_t>();
        } else {
            throw SchemaError(path, "expected an integer");
        }
        if (v < lo || v > hi) throw SchemaError(path, "integer out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
    }

    std::uint64_t unsigned64() const {
        if (value.is_number_unsigned()) return value.get<std::uint64_t>();
        if (value.is_number_integer() && value.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(value.get<std::int64_t>());
        throw SchemaError(path, "expected a non-negative integer");
    }

    bool boolean() const {
        if (!value.is_boolean()) throw SchemaError(path, "expected true or false");
        return value.get<bool>();
    }

    std::string string() const {
        if (!value.is_string()) throw SchemaError(path, "expected a string");
        return value.get<std::string>();
    }

    Vec3 vec3() const {
        if (array_size() != 3) throw SchemaError(path, "expected an array of 3 numbers");
        return {(*this)[0].number(), (*this)[1].number(), (*this)[2].number()};
    }

    std::vector<double> numbers() const {
        std::vector<double> out(array_size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)[i].number();
        return out;
    }

    std::vector<int> integers(std::int64_t lo, std::int64_t hi) const {
        std::vector<int> out(array_size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>((*this)[i].integer(lo, hi));
        return out;
    }
};

inline json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline json parse(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError("", std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace schema
}  // namespace geoforge
