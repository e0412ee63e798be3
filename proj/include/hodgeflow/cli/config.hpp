#pragma once

// Scenario and system documents for the command-line tool. Documents are
// JSON; every diagnostic names the offending field path.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hodgeflow/dynamics.hpp"
#include "hodgeflow/intersect.hpp"

namespace hodgeflow::cli {

inline constexpr double kDefaultTolerance = 1e-6;

// Bad document: malformed text, missing or ill-typed field.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string &what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}
  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

struct ScenarioConfig {
  std::string name;
  Scenario scenario;
  double tolerance = kDefaultTolerance;
  std::optional<std::string> base_field_name;
};

nlohmann::json parse_document(const std::string &text, const std::string &source);
nlohmann::json load_document(const std::filesystem::path &path);

ScalarField parse_polynomial(const nlohmann::json &j, int dim, const std::string &field);
MetricField parse_metric(const nlohmann::json &j, int dim, const std::string &field);

ScenarioConfig parse_scenario(const nlohmann::json &doc);
HyperplaneSystemd parse_system(const nlohmann::json &doc);
std::vector<Point> parse_points(const nlohmann::json &doc, int dim);

// Built-in scenario documents by name; nullopt when the name is unknown.
std::optional<std::string> builtin_scenario_text(const std::string &name);
std::vector<std::string> builtin_scenario_names();

// Named base vector fields usable as "base_field" in a scenario.
std::optional<VectorField> builtin_base_field(const std::string &name, int dim);

// A built-in name or a path to a scenario document.
ScenarioConfig resolve_scenario(const std::string &name_or_path);

} // namespace hodgeflow::cli
