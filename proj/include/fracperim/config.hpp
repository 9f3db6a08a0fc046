#pragma once

#include "fracperim/geometry.hpp"
#include "fracperim/integration.hpp"
#include "fracperim/kernels.hpp"
#include "fracperim/minimize.hpp"
#include "fracperim/momentbody.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace fracperim {

inline constexpr const char* kVersion = "fracperim 1.0.0";

/// Malformed or invalid configuration, anchored at a 1-based line and column.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }
  /// The bare message without the position.
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  int column_;
  std::string detail_;
};

struct SourcePos {
  int line = 1;
  int column = 1;
};

/// Parsed JSON text together with the source position of every value, keyed by
/// JSON pointer.
class ConfigDocument {
 public:
  static ConfigDocument parse(const std::string& text);

  const nlohmann::json& root() const { return root_; }
  /// Position of the value at `pointer`, or of its nearest recorded ancestor.
  SourcePos position(const std::string& pointer) const;
  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const;

 private:
  nlohmann::json root_;
  std::map<std::string, SourcePos> positions_;
};

struct ValidationSettings {
  std::vector<double> s_values = {0.1, 0.5, 0.9, 0.99};
  int directions = 64;
  double tolerance = 1e-9;
};

struct MomentSettings {
  MomentEngineSpec spec;
  std::vector<Vec> directions;
};

struct LemmaSettings {
  /// boundary_term, halfspace_cube, strip, additivity or coarea.
  std::string kind;
  double s = 0.95;
  double d1 = 0.0;
  double d2 = 0.0;
  std::optional<double> constant;
  std::optional<SetRegion> omega1;
  std::optional<SetRegion> omega2;
  /// (lo, hi, value) pieces of a piecewise-constant function.
  std::vector<std::tuple<double, double, double>> pieces;
};

struct MinimizeSettings {
  int cells = 32;
  std::optional<SetRegion> exterior;
  std::string mask_file;
  std::vector<double> s_list = {0.6, 0.8, 0.95};
  Schedule schedule;
  WeightScheme scheme = WeightScheme::Exact;
  std::optional<double> flat_target;
};

struct RunConfig {
  int dim = 0;
  std::optional<KernelFamily> kernel;
  std::optional<SetRegion> set;
  Domain domain;
  EngineSpec engine;
  std::vector<double> s;
  std::vector<double> s_grid;
  std::optional<double> tolerance;
  std::optional<double> target;
  bool p1_only = false;
  ValidationSettings validation;
  MomentSettings moment;
  std::optional<LemmaSettings> lemma;
  std::optional<MinimizeSettings> minimize;
  /// Config with defaults filled in, sorted keys and numbers as doubles; the
  /// digest is computed from it.
  nlohmann::json canonical;
};

/// Parses and validates a config. Unknown keys, wrong types and invalid
/// geometry or kernels raise ConfigError.
RunConfig parse_run_config(const std::string& text);

/// Region from its JSON description, e.g. {"type": "ball", "center": [0, 0], "radius": 1}.
SetRegion region_from_json(const ConfigDocument& doc, const nlohmann::json& j, const std::string& pointer, int dim,
                           nlohmann::json& canonical);

/// 16 hex digits of the FNV-1a hash of the canonical dump.
std::string config_digest(const nlohmann::json& canonical);

/// Reads a '0'/'1' occupancy text (top row first) into the grid.
void load_mask_text(const std::string& text, VoxelGrid& grid);

nlohmann::json to_json(const EstimateResult& r);

}  // namespace fracperim
