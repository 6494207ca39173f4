#pragma once

// JSON model files:
//   {"mu": .., "sigma": .., "lambda_plus": .., "up_components": [{"eta": .., "weights": [..]}],
//    "lambda_minus": .., "down_components": [{"theta": .., "weights": [..]}]}

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "occtime/errors.hpp"
#include "occtime/model.hpp"

namespace occtime {

namespace detail {

inline std::vector<ErlangComponent> components_from_json(const nlohmann::json& j, const char* list_key,
                                                         const char* rate_key) {
    std::vector<ErlangComponent> out;
    if (!j.contains(list_key)) return out;
    const auto& arr = j.at(list_key);
    if (!arr.is_array()) throw ValidationError(std::string(list_key) + " must be an array");
    for (const auto& c : arr) {
        if (!c.contains(rate_key) || !c.contains("weights"))
            throw ValidationError(std::string(list_key) + " entries need '" + rate_key + "' and 'weights'");
        ErlangComponent comp;
        comp.rate = c.at(rate_key).get<double>();
        comp.weights = c.at("weights").get<std::vector<double>>();
        out.push_back(std::move(comp));
    }
    return out;
}

inline nlohmann::json components_to_json(const std::vector<ErlangComponent>& comps, const char* rate_key) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : comps) arr.push_back({{rate_key, c.rate}, {"weights", c.weights}});
    return arr;
}

}  // namespace detail

inline RationalJumpModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("model document must be a JSON object");
    RationalJumpModel m;
    try {
        if (!j.contains("sigma")) throw ValidationError("model is missing 'sigma'");
        m.mu = j.value("mu", 0.0);
        m.sigma = j.at("sigma").get<double>();
        m.lambda_plus = j.value("lambda_plus", 0.0);
        m.lambda_minus = j.value("lambda_minus", 0.0);
        m.up = detail::components_from_json(j, "up_components", "eta");
        m.down = detail::components_from_json(j, "down_components", "theta");
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad model field: ") + e.what());
    }
    validate(m);
    return m;
}

inline nlohmann::json model_to_json(const RationalJumpModel& m) {
    return {{"mu", m.mu},
            {"sigma", m.sigma},
            {"lambda_plus", m.lambda_plus},
            {"up_components", detail::components_to_json(m.up, "eta")},
            {"lambda_minus", m.lambda_minus},
            {"down_components", detail::components_to_json(m.down, "theta")}};
}

/// Unreadable or unparsable files raise IoError; well-formed JSON with bad content raises ValidationError.
inline RationalJumpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("cannot parse model file '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

}  // namespace occtime
