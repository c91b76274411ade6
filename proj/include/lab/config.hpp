#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "lab/common.hpp"
#include "lab/corners.hpp"
#include "lab/finitary.hpp"
#include "lab/sequences.hpp"
#include "lab/systems.hpp"

namespace lab {

// Line-oriented key = value file with [section] headers.
struct ConfigFile {
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
  };
  std::map<std::string, std::vector<Entry>> sections;

  static ConfigFile parse_text(const std::string& text);
  static ConfigFile load(const std::string& path);

  std::optional<std::string> find(const std::string& section, const std::string& key) const;
  std::string require(const std::string& section, const std::string& key) const;
  // order- and whitespace-insensitive content hash (FNV-1a 64, hex)
  std::string digest() const;
};

struct ExperimentConfig {
  ConfigFile raw;

  FiniteSystem build_system() const;
  // observable spec: "char k1 k2 ...", "indicator 0,1,5",
  // "indicator density=0.5 seed=7", "random-unimodular seed=7",
  // "random-pm1 seed=7", "const re im"
  Observable build_observable(const std::string& key, const FiniteSystem& sys,
                              uint64_t seed) const;
  std::vector<uint8_t> build_subset(const std::string& key, int m, uint64_t seed) const;
};

// Parses and validates (whitelisted keys, specs parse, tolerances
// positive). Errors name the offending key and line.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

struct RunManifest {
  std::string command_line;
  std::string config_digest;
  uint64_t seed = 0;
  std::string version = "lab 0.1.0";
  double wall_ms = 0;
  std::vector<std::pair<std::string, double>> timings;

  // digest of the deterministic core (no timings), embedded in artifacts
  std::string core_digest() const;
  std::string to_json_string() const;  // full manifest incl. timings
};

// fnv-1a 64 as hex
std::string fnv1a_hex(const std::string& data);

// GridFunction file format: {"ell": 2, "N": 8, "values": [[re, im], ...]}
std::string grid_to_json(const GridFunction& f);
GridFunction grid_from_json(const std::string& text);
GridFunction grid_load(const std::string& path);

// PlaneSet file format: {"q": 7, "rows": ["0101010", ...]}
std::string plane_to_json(const PlaneSet& L);
PlaneSet plane_from_json(const std::string& text);
PlaneSet plane_load(const std::string& path);

std::vector<uint64_t> parse_u64_list(const std::string& text);  // "1,2,3"
std::vector<double> parse_double_list(const std::string& text);

}  // namespace lab
