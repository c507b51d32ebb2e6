#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cechstat/experiments.hpp"

namespace cechstat {

/// Reads keys from one JSON object, filling defaults and recording the
/// resolved value of every key. `finish()` rejects keys that were never
/// read, so typos fail loudly.
class StrictObject {
 public:
  StrictObject(const nlohmann::json& source, std::string path);

  template <typename T>
  T get(const std::string& key, const T& fallback);
  template <typename T>
  T require(const std::string& key);
  bool has(const std::string& key) const;
  /// Nested object (empty object if absent).
  StrictObject child(const std::string& key);
  void put(const std::string& key, nlohmann::json resolved) { resolved_[key] = std::move(resolved); }

  const nlohmann::json& resolved() const noexcept { return resolved_; }
  const std::string& path() const noexcept { return path_; }
  void finish();

 private:
  nlohmann::json source_;
  nlohmann::json resolved_ = nlohmann::json::object();
  std::vector<std::string> seen_;
  std::string path_;
};

Density parse_density(StrictObject& obj);
nlohmann::json density_to_json(const Density& density);

struct SampleConfig {
  Density density = Density::uniform_cube(2);
  double n = 1000.0;
  double scale = 1.0;
  std::uint64_t seed = 1;
};

struct BettiConfig {
  std::optional<std::string> input;
  Density density = Density::uniform_cube(2);
  double n = 100.0;
  double scale = 1.0;
  int k = 1;
  double t_max = 1.0;
  std::vector<double> grid;
  std::size_t budget = kDefaultSimplexBudget;
  std::uint64_t seed = 1;
};

struct ConstantRequest {
  std::string name;
  nlohmann::json params;  // resolved parameters
};

struct ConstantsConfig {
  Density density = Density::uniform_cube(2);
  std::uint64_t seed = 1;
  std::vector<ConstantRequest> requests;
};

/// The whole document: shared keys plus one block per subcommand.
struct CliConfig {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out = "out";
  std::optional<SampleConfig> sample;
  std::optional<BettiConfig> betti;
  std::optional<ConstantsConfig> constants;
  std::optional<RegimeConfig> experiment;
  nlohmann::json resolved;
};

/// Parses a config document. `seed_override` replaces the base seed before
/// blocks are resolved. Throws ConfigError on unknown keys or bad values.
CliConfig parse_config(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override = {});

RegimeConfig parse_regime(StrictObject& obj, std::uint64_t seed);

/// Runs one constants request; returns its JSON record.
nlohmann::json evaluate_constant(const ConstantRequest& request, const Density& density,
                                 std::uint64_t seed);

// ---------------------------------------------------------------------------

template <typename T>
T StrictObject::get(const std::string& key, const T& fallback) {
  seen_.push_back(key);
  T value = fallback;
  if (source_.contains(key)) {
    try {
      value = source_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }
  resolved_[key] = value;
  return value;
}

template <typename T>
T StrictObject::require(const std::string& key) {
  if (!source_.contains(key)) throw ConfigError(path_ + "." + key + " is required");
  return get<T>(key, T{});
}

}  // namespace cechstat
