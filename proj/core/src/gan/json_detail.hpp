#pragma once

#include <json.hpp>

#include "cilab/errors.hpp"
#include "cilab/losses.hpp"

// Shared JSON (de)serialization for loss weights, used by the training
// config and the checkpoint manifest. Internal to the library.

namespace cilab::gan::detail {

inline nlohmann::json weights_to_json(const LossWeights& w) {
    return nlohmann::json{
        {"lambda_e", w.lambda_e},
        {"lambda_r", w.lambda_r},
        {"lambda_mae", w.lambda_mae},
        {"lambda_mu", w.lambda_mu},
        {"lambda_sigma", w.lambda_sigma},
        {"lambda_gp", w.lambda_gp},
        {"s_steps", w.s_steps},
        {"energy_match", w.energy_match == EnergyMatch::Abs ? "abs" : "squared"},
    };
}

/// Missing keys keep defaults; unknown keys are rejected.
inline LossWeights weights_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("weights must be a JSON object");
    }
    LossWeights w;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "lambda_e") {
                w.lambda_e = value.get<double>();
            } else if (key == "lambda_r") {
                w.lambda_r = value.get<double>();
            } else if (key == "lambda_mae") {
                w.lambda_mae = value.get<double>();
            } else if (key == "lambda_mu") {
                w.lambda_mu = value.get<double>();
            } else if (key == "lambda_sigma") {
                w.lambda_sigma = value.get<double>();
            } else if (key == "lambda_gp") {
                w.lambda_gp = value.get<double>();
            } else if (key == "s_steps") {
                w.s_steps = value.get<int>();
            } else if (key == "energy_match") {
                const auto mode = value.get<std::string>();
                if (mode == "abs") {
                    w.energy_match = EnergyMatch::Abs;
                } else if (mode == "squared") {
                    w.energy_match = EnergyMatch::Squared;
                } else {
                    throw ConfigError("energy_match must be \"abs\" or \"squared\"");
                }
            } else {
                throw ConfigError("unknown weights key: " + key);
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("bad weights value for \"" + key + "\": " + e.what());
        }
    }
    w.validate();
    return w;
}

} // namespace cilab::gan::detail
