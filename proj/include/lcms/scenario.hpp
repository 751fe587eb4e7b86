#pragma once

// Config-driven scenario runner behind the lcms command-line tool.
//
// Configs are INI files.  [scenario] holds kind, name and seed; [chart],
// [hamiltonian] and [lee] describe the geometry; the remaining sections are
// read by the scenario kind.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "lcms/bundle.hpp"

namespace lcms {

/// Config text with typed lookups.  Every failure is a ParseError or
/// ValidationError naming the offending field.
class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config from_string(const std::string& text, const std::string& origin = "<string>");

  [[nodiscard]] bool has(const std::string& key) const;
  [[nodiscard]] std::string text(const std::string& key) const;
  [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] double number(const std::string& key) const;
  [[nodiscard]] double number(const std::string& key, double fallback) const;
  [[nodiscard]] int integer(const std::string& key, int fallback) const;
  [[nodiscard]] bool flag(const std::string& key, bool fallback) const;
  /// Comma-separated entries, trimmed.
  [[nodiscard]] std::vector<std::string> list(const std::string& key) const;
  [[nodiscard]] std::vector<double> numbers(const std::string& key) const;
  /// Semicolon-separated rows of comma-separated numbers.
  [[nodiscard]] std::vector<std::vector<double>> rows(const std::string& key) const;
  [[nodiscard]] const std::string& origin() const { return origin_; }

 private:
  boost::property_tree::ptree tree_;
  std::string origin_;
};

struct Check {
  enum class Bound { AtMost, AtLeast, Near, Holds };

  std::string name;
  Bound bound = Bound::Holds;
  double value = 0.0;
  /// Upper bound, lower bound or allowed |value - target|.
  double tolerance = 0.0;
  double target = 0.0;
  bool pass = false;

  static Check at_most(std::string name, double value, double tolerance);
  static Check at_least(std::string name, double value, double bound);
  static Check near(std::string name, double value, double target, double tolerance);
  static Check holds(std::string name, bool ok);

  [[nodiscard]] std::string describe() const;
};

enum class RunStatus { Pass, CheckFailure, ConfigError, NumericAbort };

struct RunReport {
  std::string scenario;
  std::string kind;
  std::vector<Check> checks;
  double seconds = 0.0;
  RunStatus status = RunStatus::Pass;
  std::string message;
  /// Extra key: value lines for report.txt (symbolic residuals, orders, ...).
  std::vector<std::string> notes;

  [[nodiscard]] bool pass() const { return status == RunStatus::Pass; }
  /// 0 pass, 1 check failure, 2 config error, 3 numeric abort.
  [[nodiscard]] int exit_code() const;
  [[nodiscard]] std::string to_text() const;
  [[nodiscard]] std::string to_csv() const;
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  double tolerance_scale = 1.0;
  int refine = 0;
};

/// Geometry pieces shared by every scenario kind.
struct ScenarioGeometry {
  ChartFamily family;
  HamiltonianData hamiltonian;
  LeeForm theta;
};

ScenarioGeometry build_geometry(const Config& cfg);

/// Never throws for config, validation or numeric problems: they are
/// reported through RunReport::status.
RunReport run_scenario(const Config& cfg, const RunOptions& options = {});

/// Loads and runs; a config that cannot be read yields ConfigError.
RunReport run_scenario_file(const std::filesystem::path& path, const RunOptions& options = {});

/// %.17g formatting used by every CSV writer.
std::string format_number(double v);

}  // namespace lcms
