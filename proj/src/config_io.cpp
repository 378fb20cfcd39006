#include "layerq/config_io.hpp"

namespace layerq {

using nlohmann::json;

namespace {

double num_at(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError(path + ": missing numeric field '" + key + "'");
  return j[key].get<double>();
}

}  // namespace

json to_json(const DistSpec& d) {
  json params;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          params = {{"rate", v.rate}};
        } else if constexpr (std::is_same_v<T, Deterministic>) {
          params = {{"value", v.value}};
        } else if constexpr (std::is_same_v<T, ErlangMixture>) {
          params = {{"k", v.k}, {"gamma", v.gamma}, {"q", v.q}};
        } else {
          params = {{"p1", v.p1}, {"rate1", v.rate1}, {"rate2", v.rate2}};
        }
      },
      d);
  return {{"family", family_name(d)}, {"params", params}};
}

DistSpec dist_from_json(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("family"))
    throw ConfigError(path + ": expected a {family, params} distribution object");
  const std::string fam = j["family"].get<std::string>();
  const json params = j.value("params", json::object());
  DistSpec out;
  if (fam == "exponential") {
    out = Exponential{num_at(params, "rate", path)};
  } else if (fam == "deterministic") {
    out = Deterministic{num_at(params, "value", path)};
  } else if (fam == "erlang-mixture") {
    out = ErlangMixture{static_cast<int>(num_at(params, "k", path)),
                        num_at(params, "gamma", path), num_at(params, "q", path)};
  } else if (fam == "hyper2") {
    out = Hyper2{num_at(params, "p1", path), num_at(params, "rate1", path),
                 num_at(params, "rate2", path)};
  } else {
    throw ConfigError(path + ": unknown family '" + fam + "'");
  }
  try {
    validate(out);
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return out;
}

json to_json(const GFunction& g) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GZero>) {
          return {{"tag", "zero"}};
        } else if constexpr (std::is_same_v<T, GLinear>) {
          return {{"tag", "linear"}, {"slope", v.slope}};
        } else if constexpr (std::is_same_v<T, GCompoundPoisson>) {
          return {{"tag", "compound-poisson"}, {"theta", v.theta}, {"jump", to_json(v.jump)}};
        } else {
          return {{"tag", "log-lst"}, {"base", to_json(v.base)}};
        }
      },
      g);
}

GFunction g_from_json(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("tag"))
    throw ConfigError(path + ": expected a {tag, ...} g-function object");
  const std::string tag = j["tag"].get<std::string>();
  if (tag == "zero") return GZero{};
  if (tag == "linear") return GLinear{num_at(j, "slope", path)};
  if (tag == "compound-poisson")
    return GCompoundPoisson{num_at(j, "theta", path),
                            dist_from_json(j.value("jump", json()), path + ".jump")};
  if (tag == "log-lst") return GLogLst{dist_from_json(j.value("base", json()), path + ".base")};
  throw ConfigError(path + ": unknown g tag '" + tag + "'");
}

json to_json(const DependencePair& p) { return {{"chi", to_json(p.chi)}, {"g", to_json(p.g)}}; }

DependencePair pair_from_json(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("chi"))
    throw ConfigError(path + ": expected a {chi, g} dependence object");
  try {
    return DependencePair::make(dist_from_json(j["chi"], path + ".chi"),
                                g_from_json(j.value("g", json({{"tag", "zero"}})), path + ".g"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json to_json(const MachineParams& m) {
  return {{"lambda", m.lambda},
          {"service", to_json(m.service)},
          {"sigma", m.sigma},
          {"repair", to_json(m.repair)}};
}

MachineParams machine_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected a machine object");
  MachineParams m;
  m.lambda = num_at(j, "lambda", path);
  m.sigma = num_at(j, "sigma", path);
  if (!j.contains("service")) throw ConfigError(path + ": missing 'service'");
  if (!j.contains("repair")) throw ConfigError(path + ": missing 'repair'");
  m.service = dist_from_json(j["service"], path + ".service");
  m.repair = dist_from_json(j["repair"], path + ".repair");
  if (m.lambda < 0.0) throw ConfigError(path + ": lambda must be >= 0");
  if (!(m.sigma > 0.0)) throw ConfigError(path + ": sigma must be > 0");
  return m;
}

json to_json(const LayeredSpec& s) {
  return {{"machine1", to_json(s.machine1)}, {"machine2", to_json(s.machine2)}};
}

LayeredSpec layered_from_json(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("machine1") || !j.contains("machine2"))
    throw ConfigError(path + ": expected {machine1, machine2}");
  return {machine_from_json(j["machine1"], path + ".machine1"),
          machine_from_json(j["machine2"], path + ".machine2")};
}

SimConfig sim_from_json(const json& j, const std::string& path, SimConfig defaults) {
  if (j.is_null()) return defaults;
  if (!j.is_object()) throw ConfigError(path + ": expected a sim object");
  SimConfig cfg = defaults;
  if (j.contains("warmup")) cfg.warmup = j["warmup"].get<double>();
  if (j.contains("horizon")) cfg.horizon = j["horizon"].get<double>();
  if (j.contains("cycles")) cfg.cycles = j["cycles"].get<std::uint64_t>();
  if (j.contains("replications")) cfg.replications = j["replications"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("batches")) cfg.batches = j["batches"].get<int>();
  try {
    cfg.check();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return cfg;
}

}  // namespace layerq
