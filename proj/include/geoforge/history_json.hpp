#pragma once

#include <string>
#include <string_view>

#include "geoforge/history.hpp"
#include "geoforge/json_schema.hpp"

namespace geoforge {

namespace detail {

using schema::json;
using schema::Node;
using schema::to_json;

inline json fold_json(const FoldParams& f) {
    return {{"direction", to_json(f.direction)},
            {"displacement_axis", to_json(f.displacement_axis)},
            {"amplitude", f.amplitude},
            {"wavelength", f.wavelength},
            {"phase", f.phase}};
}

inline FoldParams fold_from(const Node& n, std::initializer_list<std::string_view> extra = {}) {
    std::vector<std::string_view> keys{"direction", "displacement_axis", "amplitude", "wavelength", "phase"};
    keys.insert(keys.end(), extra.begin(), extra.end());
    n.require_object();
    for (auto it = n.value.begin(); it != n.value.end(); ++it)
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) throw SchemaError(n.path + "/" + it.key(), "unknown key");
    return {n["direction"].vec3(), n["displacement_axis"].vec3(), n["amplitude"].number(), n["wavelength"].number(),
            n["phase"].number()};
}

inline json window_json(const WindowParams& w) {
    return {{"scale", to_json(w.scale)},
            {"rotation", {{"axis", to_json(w.rotation.axis)}, {"angle", w.rotation.angle}}},
            {"translation", to_json(w.translation)},
            {"bend", w.bend ? fold_json(*w.bend) : json(nullptr)}};
}

inline WindowParams window_from(const Node& n) {
    n.only({"scale", "rotation", "translation", "bend"});
    WindowParams w;
    w.scale = n["scale"].vec3();
    const Node r = n["rotation"];
    r.only({"axis", "angle"});
    w.rotation = {r["axis"].vec3(), r["angle"].number()};
    w.translation = n["translation"].vec3();
    if (n.has("bend") && !n["bend"].value.is_null()) w.bend = fold_from(n["bend"]);
    return w;
}

inline json strata_json(double base, const std::vector<double>& thick, const std::vector<int>& cats) {
    return {{"base_elevation", base}, {"thicknesses", thick}, {"categories", cats}};
}

inline json step_json(const ProcessDescriptor& s) {
    json j = std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FoldParams>) {
                return fold_json(p);
            } else if constexpr (std::is_same_v<T, FaultParams>) {
                return {{"plane_point", to_json(p.plane_point)}, {"plane_normal", to_json(p.plane_normal)}, {"slip", to_json(p.slip)}};
            } else if constexpr (std::is_same_v<T, ShearParams>) {
                return {{"plane_point", to_json(p.plane_point)},
                        {"plane_normal", to_json(p.plane_normal)},
                        {"shear_direction", to_json(p.shear_direction)},
                        {"gradient", p.gradient}};
            } else if constexpr (std::is_same_v<T, TiltParams>) {
                return {{"axis", to_json(p.axis)}, {"pivot", to_json(p.pivot)}, {"angle", p.angle}};
            } else if constexpr (std::is_same_v<T, Deposition>) {
                return {{"window", window_json(p.window)},
                        {"category", p.category},
                        {"mode", p.mode == DepositMode::Overwrite ? "OVERWRITE" : "FILL_AIR"}};
            } else {
                return strata_json(p.base_elevation, p.thicknesses, p.categories);
            }
        },
        s.params);
    j["kind"] = std::string(to_string(s.kind));
    return j;
}

inline ProcessDescriptor step_from(const Node& n) {
    n.require_object();
    const Node kind_node = n["kind"];
    ProcessKind kind;
    try {
        kind = kind_from_string(kind_node.string());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(kind_node.path, e.what());
    }
    ProcessDescriptor d{kind, {}};
    switch (kind) {
        case ProcessKind::Fold:
            d.params = fold_from(n, {"kind"});
            break;
        case ProcessKind::Fault:
            n.only({"kind", "plane_point", "plane_normal", "slip"});
            d.params = FaultParams{n["plane_point"].vec3(), n["plane_normal"].vec3(), n["slip"].vec3()};
            break;
        case ProcessKind::Shear:
            n.only({"kind", "plane_point", "plane_normal", "shear_direction", "gradient"});
            d.params = ShearParams{n["plane_point"].vec3(), n["plane_normal"].vec3(), n["shear_direction"].vec3(),
                                   n["gradient"].number()};
            break;
        case ProcessKind::Tilt:
            n.only({"kind", "axis", "pivot", "angle"});
            d.params = TiltParams{n["axis"].vec3(), n["pivot"].vec3(), n["angle"].number()};
            break;
        case ProcessKind::Dike:
        case ProcessKind::Erosion: {
            n.only({"kind", "window", "category", "mode"});
            Deposition dep;
            dep.window = window_from(n["window"]);
            dep.category = static_cast<int>(n["category"].integer(0, 255));
            const Node mode = n["mode"];
            const std::string m = mode.string();
            if (m == "OVERWRITE")
                dep.mode = DepositMode::Overwrite;
            else if (m == "FILL_AIR")
                dep.mode = DepositMode::FillAir;
            else
                throw SchemaError(mode.path, "mode must be OVERWRITE or FILL_AIR");
            d.params = dep;
            break;
        }
        case ProcessKind::Sediment:
            n.only({"kind", "base_elevation", "thicknesses", "categories"});
            d.params = SedimentParams{n["base_elevation"].number(), n["thicknesses"].numbers(), n["categories"].integers(0, 255)};
            break;
        case ProcessKind::End:
            throw SchemaError(kind_node.path, "END is not a history step");
    }
    return d;
}

}  // namespace detail

inline nlohmann::json history_to_json_value(const History& h) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : h.steps) steps.push_back(detail::step_json(s));
    return {{"seed", h.seed},
            {"initial", detail::strata_json(h.initial.base_elevation, h.initial.thicknesses, h.initial.categories)},
            {"steps", steps}};
}

/// Doubles are written as shortest round-trip decimals, so parsing restores
/// every parameter exactly.
inline std::string history_to_json(const History& h) { return history_to_json_value(h).dump(2) + "\n"; }

inline History history_from_json_value(const nlohmann::json& doc) {
    const schema::Node root{doc, ""};
    root.only({"seed", "initial", "steps"});
    History h;
    h.seed = root["seed"].unsigned64();
    const schema::Node init = root["initial"];
    init.only({"base_elevation", "thicknesses", "categories"});
    h.initial = {init["thicknesses"].numbers(), init["categories"].integers(0, 255), init["base_elevation"].number()};
    const schema::Node steps = root["steps"];
    for (std::size_t i = 0; i < steps.array_size(); ++i) h.steps.push_back(detail::step_from(steps[i]));
    return h;
}

inline History history_from_json(std::string_view text) { return history_from_json_value(schema::parse(text)); }

}  // namespace geoforge
