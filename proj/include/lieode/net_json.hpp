#pragma once

#include <json.hpp>

#include "lieode/net.hpp"

namespace lieode {

// Serialized form: {"m": ..., "w1": [...], "b1": [...], "w2": [...], "b2": ...}
void to_json(nlohmann::json& j, const ScalarNet& net);
void from_json(const nlohmann::json& j, ScalarNet& net);

}  // namespace lieode
