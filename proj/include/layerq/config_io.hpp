#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "layerq/repair_layer.hpp"
#include "layerq/sim_config.hpp"

namespace layerq {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config schema (version 1). Distributions are {"family": ..., "params":
// {...}} maps; g functions are {"tag": ...} with tag-specific fields.
nlohmann::json to_json(const DistSpec& d);
DistSpec dist_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json to_json(const GFunction& g);
GFunction g_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json to_json(const DependencePair& p);
DependencePair pair_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json to_json(const MachineParams& m);
MachineParams machine_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json to_json(const LayeredSpec& s);
LayeredSpec layered_from_json(const nlohmann::json& j, const std::string& path);

SimConfig sim_from_json(const nlohmann::json& j, const std::string& path, SimConfig defaults);

}  // namespace layerq
