#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "epchain/chain.hpp"

namespace epchain {

struct RunConfig {
  int L = 6;
  double J = 1.0;
  double g = 1.0;
  double delta = 0.0;
  double t_max = 30.0;
  double dt_out = 0.1;
  double rel_tol = 1e-10;
  std::vector<std::string> observables{"C1", "C2", "C3"};
  StateRequest init{};
  std::uint64_t seed = 1;
  std::uint64_t shots = 100000;
  std::string output;

  SpinChainParams params() const { return {L, J, g, delta}; }
};

// Throws ConfigError on unknown keys, wrong types, or out-of-range values.
void merge_config(RunConfig& cfg, const nlohmann::json& j);
RunConfig load_config(const std::string& path);
void validate_config(const RunConfig& cfg);
nlohmann::json to_json(const RunConfig& cfg);

// "uniform", "polarized", "defect:<site>[:theta[:phi]]", "gaussian_defect[:center[:width]]".
StateRequest parse_init(const std::string& text);
nlohmann::json to_json(const StateRequest& r);

// "a,b,c", "lo:hi:logN" or "lo:hi:linN".
std::vector<double> parse_grid(const std::string& text);
std::vector<std::string> split_list(const std::string& text);

}  // namespace epchain
