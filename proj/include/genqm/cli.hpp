#pragma once

// Config-driven front end: scenario files, task dispatch and artifact output.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "genqm/dynamics.hpp"
#include "genqm/error.hpp"
#include "genqm/model.hpp"

namespace genqm::cli {

extern const char* const kVersion;

/// Configuration error naming the offending JSON path, e.g. "grid.points".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(ErrorCode::Config, path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct EigenTask {
  std::size_t count = 1;
};

struct EvolveTask {
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t cadence = 1;
  InitialCondition initial;
};

struct CheckTask {};

/// One eigen solve per value, with `parameter` replaced by "(value)" in A and V.
struct SweepTask {
  std::string parameter = "PARAM";
  std::vector<double> values;
  EigenTask inner;
};

using Task = std::variant<EigenTask, EvolveTask, CheckTask, SweepTask>;

struct OutputConfig {
  std::string directory = "genqm-out";
  std::string prefix;
};

struct ScenarioConfig {
  double xmin = 0.0;
  double xmax = 0.0;
  std::size_t points = 0;
  PhysicalConstants constants;
  std::string A;
  std::string V;
  Mode mode = Mode::Hermitian;
  Representation representation = Representation::Psi;
  Task task;
  OutputConfig output;
};

/// Strict schema check: missing, mistyped and unknown fields raise
/// ConfigError with the full path.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& file);

/// The config with every default filled in.
nlohmann::json to_json(const ScenarioConfig& c);

/// Problem spec with expressions parsed; parse errors become ConfigError on "A" or "V".
ProblemSpec make_problem_spec(const ScenarioConfig& c);

/// Whole-word replacement of `name` by "(value)" with 17 significant digits.
std::string substitute_parameter(const std::string& text, const std::string& name, double value);

/// 17 significant digits; integral-looking results get a trailing ".0".
std::string format_number(double v);

/// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::filesystem::path& file, const std::string& contents);

std::string sha256_hex(const std::string& data);

enum class Command { Run, Sweep, Check };

/// Parallelism for sweeps from GENQM_THREADS (default 1).
std::size_t sweep_threads();

/// Executes a command on a config file. Artifacts go to `out_dir` when given,
/// otherwise to output.directory. Returns the process exit status: 0 on
/// success, 2 for configuration errors, 1 for any other failure. Failures
/// also produce a JSON error record on `err` and in error.json.
int execute(Command command, const std::filesystem::path& config_file,
            const std::optional<std::filesystem::path>& out_dir, std::ostream& out,
            std::ostream& err);

}  // namespace genqm::cli
