#include "epchain/config.hpp"

#include <cmath>
#include <fstream>

#include "epchain/error.hpp"

namespace epchain {

namespace {

using nlohmann::json;

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("invalid number '" + s + "' in " + what);
}

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

StateRequest init_from_json(const json& j) {
  if (j.is_string()) {
    try {
      return parse_init(j.get<std::string>());
    } catch (const UsageError& e) {
      throw ConfigError(e.what());
    }
  }
  if (!j.is_object()) throw ConfigError("config key 'init' must be a string or object");
  StateRequest r;
  for (const auto& [k, v] : j.items()) {
    if (k == "kind") r.kind = get_as<std::string>(v, "init.kind");
    else if (k == "site") r.defect.site = get_as<int>(v, "init.site");
    else if (k == "theta") r.defect.theta = get_as<double>(v, "init.theta");
    else if (k == "phi") r.defect.phi = get_as<double>(v, "init.phi");
    else if (k == "center") r.center = get_as<double>(v, "init.center");
    else if (k == "width") r.width = get_as<double>(v, "init.width");
    else throw ConfigError("unknown config key 'init." + k + "'");
  }
  return r;
}

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(',', start);
    std::string item = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!item.empty()) out.push_back(item);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

StateRequest parse_init(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto end = text.find(':', start);
    parts.push_back(text.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  StateRequest r;
  r.kind = parts[0];
  if (r.kind == "uniform" || r.kind == "polarized") {
    if (parts.size() != 1) throw UsageError("init '" + r.kind + "' takes no arguments");
  } else if (r.kind == "defect") {
    if (parts.size() < 2 || parts.size() > 4) throw UsageError("init 'defect' needs site[:theta[:phi]]");
    r.defect.site = static_cast<int>(parse_number(parts[1], "init"));
    r.defect.theta = parts.size() > 2 ? parse_number(parts[2], "init") : std::acos(-1.0) / 2;
    if (parts.size() > 3) r.defect.phi = parse_number(parts[3], "init");
  } else if (r.kind == "gaussian_defect") {
    if (parts.size() > 3) throw UsageError("init 'gaussian_defect' takes center[:width]");
    if (parts.size() > 1) r.center = parse_number(parts[1], "init");
    if (parts.size() > 2) r.width = parse_number(parts[2], "init");
  } else {
    throw UsageError("unknown init kind '" + r.kind + "'");
  }
  return r;
}

nlohmann::json to_json(const StateRequest& r) {
  json j{{"kind", r.kind}};
  if (r.kind == "defect") {
    j["site"] = r.defect.site;
    j["theta"] = r.defect.theta;
    j["phi"] = r.defect.phi;
  } else if (r.kind == "gaussian_defect") {
    j["center"] = r.center;
    j["width"] = r.width;
  }
  return j;
}

void merge_config(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (k == "L") cfg.L = get_as<int>(v, k);
    else if (k == "J") cfg.J = get_as<double>(v, k);
    else if (k == "g") cfg.g = get_as<double>(v, k);
    else if (k == "delta") cfg.delta = get_as<double>(v, k);
    else if (k == "t_max") cfg.t_max = get_as<double>(v, k);
    else if (k == "dt_out") cfg.dt_out = get_as<double>(v, k);
    else if (k == "rel_tol") cfg.rel_tol = get_as<double>(v, k);
    else if (k == "observables") {
      cfg.observables = v.is_string() ? split_list(v.get<std::string>()) : get_as<std::vector<std::string>>(v, k);
    } else if (k == "init") cfg.init = init_from_json(v);
    else if (k == "seed") {
      if (!v.is_number_unsigned()) throw ConfigError("config key 'seed' must be a non-negative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (k == "shots") {
      if (!v.is_number_unsigned()) throw ConfigError("config key 'shots' must be a positive integer");
      cfg.shots = v.get<std::uint64_t>();
    } else if (k == "output") cfg.output = get_as<std::string>(v, k);
    else throw ConfigError("unknown config key '" + k + "'");
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  RunConfig cfg;
  merge_config(cfg, j);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.L < 1 || cfg.L > kMaxStateSites) throw ConfigError("L must be in 1.." + std::to_string(kMaxStateSites));
  for (double v : {cfg.J, cfg.g, cfg.delta, cfg.t_max, cfg.dt_out, cfg.rel_tol}) {
    if (!std::isfinite(v)) throw ConfigError("numeric config values must be finite");
  }
  if (!(cfg.t_max > 0)) throw ConfigError("t_max must be positive");
  if (!(cfg.dt_out > 0)) throw ConfigError("dt_out must be positive");
  if (!(cfg.rel_tol > 0)) throw ConfigError("rel_tol must be positive");
  if (cfg.shots < 1) throw ConfigError("shots must be >= 1");
  if (cfg.observables.empty()) throw ConfigError("at least one observable is required");
}

nlohmann::json to_json(const RunConfig& cfg) {
  return {{"L", cfg.L},           {"J", cfg.J},
          {"g", cfg.g},           {"delta", cfg.delta},
          {"t_max", cfg.t_max},   {"dt_out", cfg.dt_out},
          {"rel_tol", cfg.rel_tol}, {"observables", cfg.observables},
          {"init", to_json(cfg.init)}, {"seed", cfg.seed},
          {"shots", cfg.shots},   {"output", cfg.output}};
}

std::vector<double> parse_grid(const std::string& text) {
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) {
    std::vector<double> out;
    for (const auto& s : split_list(text)) out.push_back(parse_number(s, "grid"));
    if (out.empty()) throw UsageError("empty grid");
    return out;
  }
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos) throw UsageError("grid must be lo:hi:logN or lo:hi:linN");
  const double lo = parse_number(text.substr(0, c1), "grid");
  const double hi = parse_number(text.substr(c1 + 1, c2 - c1 - 1), "grid");
  const std::string kind = text.substr(c2 + 1, 3);
  const double n = parse_number(text.substr(c2 + 4), "grid");
  if ((kind != "log" && kind != "lin") || n < 1 || n != std::floor(n)) {
    throw UsageError("grid must be lo:hi:logN or lo:hi:linN");
  }
  if (kind == "log" && !(lo > 0 && hi > 0)) throw UsageError("log grid needs positive bounds");
  const int count = static_cast<int>(n);
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(kind == "log" ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo));
  }
  return out;
}

}  // namespace epchain
