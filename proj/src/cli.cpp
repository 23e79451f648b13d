#include "genqm/cli.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "genqm/diagnostics.hpp"
#include "genqm/operators.hpp"
#include "genqm/spectra.hpp"

namespace genqm::cli {

const char* const kVersion = GENQM_VERSION;

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---- schema helpers ---------------------------------------------------------

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const char* type_name(const json& v) { return v.type_name(); }

void expect_object(const json& v, const std::string& path) {
  if (!v.is_object()) {
    throw ConfigError(path, std::string("expected an object, got ") + type_name(v));
  }
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError(join(path, key), "unknown field");
    }
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(path, key), "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, std::string("expected a number, got ") + type_name(v));
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
  return d;
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, join(path, key));
}

std::size_t as_count(const json& v, const std::string& path, std::size_t min) {
  if (!v.is_number_integer()) {
    throw ConfigError(path, std::string("expected an integer, got ") + type_name(v));
  }
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u >= min) return static_cast<std::size_t>(u);
  } else if (v.get<std::int64_t>() >= static_cast<std::int64_t>(min)) {
    return static_cast<std::size_t>(v.get<std::int64_t>());
  }
  throw ConfigError(path, "must be at least " + std::to_string(min));
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, std::string("expected a string, got ") + type_name(v));
  return v.get<std::string>();
}

std::string string_or(const json& obj, const std::string& path, const char* key, std::string fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : as_string(*it, join(path, key));
}

// Exactly one key of a tagged union such as {"eigen": {...}}.
std::pair<std::string, const json*> single_variant(const json& v, const std::string& path,
                                                   std::initializer_list<const char*> kinds) {
  expect_object(v, path);
  if (v.size() != 1) {
    std::string names;
    for (const char* k : kinds) names += (names.empty() ? "" : ", ") + std::string(k);
    throw ConfigError(path, "expected exactly one of: " + names);
  }
  allow_keys(v, path, kinds);
  const auto it = v.begin();
  return {it.key(), &it.value()};
}

EigenTask parse_eigen(const json& v, const std::string& path, std::size_t points) {
  expect_object(v, path);
  allow_keys(v, path, {"count"});
  EigenTask t;
  t.count = as_count(require(v, path, "count"), join(path, "count"), 1);
  if (t.count > points - 2) {
    throw ConfigError(join(path, "count"),
                      "must not exceed the " + std::to_string(points - 2) + " interior points");
  }
  return t;
}

InitialCondition parse_initial(const json& v, const std::string& path) {
  const auto [kind, body] = single_variant(v, path, {"gaussian", "eigenstate"});
  const std::string p = join(path, kind);
  expect_object(*body, p);
  if (kind == "gaussian") {
    allow_keys(*body, p, {"x0", "sigma", "k0"});
    GaussianPacket g;
    g.x0 = number_or(*body, p, "x0", 0.0);
    g.sigma = as_number(require(*body, p, "sigma"), join(p, "sigma"));
    g.k0 = number_or(*body, p, "k0", 0.0);
    if (!(g.sigma > 0.0)) throw ConfigError(join(p, "sigma"), "must be > 0");
    return g;
  }
  allow_keys(*body, p, {"index"});
  return EigenstateIndex{as_count(require(*body, p, "index"), join(p, "index"), 0)};
}

EvolveTask parse_evolve(const json& v, const std::string& path) {
  expect_object(v, path);
  allow_keys(v, path, {"dt", "steps", "cadence", "initial"});
  EvolveTask t;
  t.dt = as_number(require(v, path, "dt"), join(path, "dt"));
  if (!(t.dt > 0.0)) throw ConfigError(join(path, "dt"), "must be > 0");
  t.steps = as_count(require(v, path, "steps"), join(path, "steps"), 1);
  t.cadence = as_count(require(v, path, "cadence"), join(path, "cadence"), 1);
  t.initial = parse_initial(require(v, path, "initial"), join(path, "initial"));
  return t;
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool contains_word(const std::string& text, const std::string& word) {
  return substitute_parameter(text, word, 0.0) != text;
}

SweepTask parse_sweep(const json& v, const std::string& path, const ScenarioConfig& c) {
  expect_object(v, path);
  allow_keys(v, path, {"parameter", "values", "task"});
  SweepTask t;
  t.parameter = string_or(v, path, "parameter", "PARAM");
  const std::string ppath = join(path, "parameter");
  if (!is_identifier(t.parameter)) throw ConfigError(ppath, "must be an identifier");
  for (const char* reserved : {"x", "pi", "i", "exp", "sin", "cos", "sinh", "cosh", "tanh", "sqrt"}) {
    if (t.parameter == reserved) throw ConfigError(ppath, "collides with a name of the expression language");
  }
  if (!contains_word(c.A, t.parameter) && !contains_word(c.V, t.parameter)) {
    throw ConfigError(ppath, "\"" + t.parameter + "\" appears in neither A nor V");
  }
  const json& values = require(v, path, "values");
  const std::string vpath = join(path, "values");
  if (!values.is_array()) throw ConfigError(vpath, std::string("expected an array, got ") + type_name(values));
  if (values.empty()) throw ConfigError(vpath, "must not be empty");
  for (std::size_t k = 0; k < values.size(); ++k) {
    t.values.push_back(as_number(values[k], vpath + "[" + std::to_string(k) + "]"));
  }
  const std::string tpath = join(path, "task");
  const auto [kind, body] = single_variant(require(v, path, "task"), tpath, {"eigen"});
  t.inner = parse_eigen(*body, join(tpath, kind), c.points);
  return t;
}

template <class E>
E parse_enum(const json& obj, const std::string& path, const char* key, E fallback,
             std::initializer_list<std::pair<const char*, E>> names) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  const std::string text = as_string(*it, join(path, key));
  for (const auto& [name, value] : names) {
    if (text == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  throw ConfigError(join(path, key), "\"" + text + "\" is not one of: " + allowed);
}

// ---- serialization ------------------------------------------------------------

json initial_to_json(const InitialCondition& ic) {
  if (const auto* g = std::get_if<GaussianPacket>(&ic)) {
    return {{"gaussian", {{"x0", g->x0}, {"sigma", g->sigma}, {"k0", g->k0}}}};
  }
  return {{"eigenstate", {{"index", std::get<EigenstateIndex>(ic).index}}}};
}

json task_to_json(const Task& task) {
  if (const auto* e = std::get_if<EigenTask>(&task)) return {{"eigen", {{"count", e->count}}}};
  if (const auto* e = std::get_if<EvolveTask>(&task)) {
    return {{"evolve",
             {{"dt", e->dt}, {"steps", e->steps}, {"cadence", e->cadence}, {"initial", initial_to_json(e->initial)}}}};
  }
  if (std::holds_alternative<CheckTask>(task)) return {{"check", json::object()}};
  const auto& s = std::get<SweepTask>(task);
  return {{"sweep",
           {{"parameter", s.parameter}, {"values", s.values}, {"task", {{"eigen", {{"count", s.inner.count}}}}}}}};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string complex_cells(complex z) { return format_number(z.real()) + "," + format_number(z.imag()); }

// ---- artifacts ----------------------------------------------------------------

struct OutputFile {
  std::string name;  // relative to the output directory
  std::string sha256;
  std::size_t bytes;
};

class Artifacts {
 public:
  Artifacts(fs::path root, std::string prefix) : root_(std::move(root)), prefix_(std::move(prefix)) {}

  void write(const std::string& relative_dir, const std::string& name, const std::string& contents) {
    const std::string rel = (relative_dir.empty() ? "" : relative_dir + "/") + prefix_ + name;
    const fs::path target = root_ / rel;
    fs::create_directories(target.parent_path());
    write_atomic(target, contents);
    std::lock_guard<std::mutex> lock(mutex_);
    files_.push_back({rel, sha256_hex(contents), contents.size()});
  }

  std::vector<OutputFile> files() const {
    std::vector<OutputFile> out = files_;
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
  }

  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  std::string prefix_;
  std::mutex mutex_;
  std::vector<OutputFile> files_;
};

std::string spectrum_csv(const std::vector<EigenPair>& pairs) {
  std::string s = "index,energy_re,energy_im\n";
  for (const EigenPair& e : pairs) s += std::to_string(e.index) + "," + complex_cells(e.energy) + "\n";
  return s;
}

std::string state_csv(const WaveState& w, const SampledProfiles& p) {
  const CVector rho = probability_density(w, p);
  std::string s = "x,psi_re,psi_im,rho_re,rho_im\n";
  for (std::size_t i = 0; i < p.points(); ++i) {
    s += format_number(p.grid.node(i)) + "," + complex_cells(w.psi[i]) + "," + complex_cells(rho[i]) + "\n";
  }
  return s;
}

std::string current_csv(const WaveState& w, const SampledProfiles& p) {
  const CVector J = current_density(w, p);
  std::string s = "x_half,J_re,J_im\n";
  for (std::size_t i = 0; i < J.size(); ++i) {
    s += format_number(p.grid.half_node(i)) + "," + complex_cells(J[i]) + "\n";
  }
  return s;
}

std::string timeseries_csv(const std::vector<DiagnosticsReport>& series) {
  std::string s = "step,t,total_prob_re,total_prob_im,energy_re,energy_im,continuity_max,continuity_l2\n";
  for (const DiagnosticsReport& r : series) {
    s += std::to_string(r.step) + "," + format_number(r.t) + "," + complex_cells(r.total_probability) + "," +
         complex_cells(r.energy_functional) + "," + format_number(r.continuity_residual_max) + "," +
         format_number(r.continuity_residual_l2) + "\n";
  }
  return s;
}

struct JobResult {
  std::vector<std::string> warnings;
};

JobResult run_eigen(const ScenarioConfig& c, const EigenTask& task, Artifacts& art,
                    const std::string& subdir, std::vector<EigenPair>* pairs_out = nullptr) {
  const SampledProfiles p = build_problem(make_problem_spec(c));
  const TridiagonalOperator H = assemble_hamiltonian(p);
  std::vector<EigenPair> pairs = solve_spectrum(H, task.count, p);
  art.write(subdir, "spectrum.csv", spectrum_csv(pairs));
  for (const EigenPair& e : pairs) {
    const WaveState w = make_wave_state(e.state, p.grid, p.mode);
    const std::string k = std::to_string(e.index);
    art.write(subdir, "state_" + k + ".csv", state_csv(w, p));
    art.write(subdir, "current_" + k + ".csv", current_csv(w, p));
  }
  JobResult r{p.warnings};
  for (const EigenPair& e : pairs) {
    if (e.self_orthogonal) {
      r.warnings.push_back("eigenstate " + std::to_string(e.index) +
                           " has a vanishing PT norm; it is L2-normalized");
    }
  }
  if (pairs_out) *pairs_out = std::move(pairs);
  return r;
}

JobResult run_evolve(const ScenarioConfig& c, const EvolveTask& task, Artifacts& art) {
  const SampledProfiles p = build_problem(make_problem_spec(c));
  const TridiagonalOperator H = assemble_hamiltonian(p);
  const EvolutionState initial = make_initial_state(task.initial, p, H);
  const EvolutionResult result = evolve(p, H, initial, task.dt, task.steps, task.cadence);
  art.write("", "timeseries.csv", timeseries_csv(result.series));
  for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
    art.write("", "state_" + std::to_string(k) + ".csv", state_csv(result.snapshots[k], p));
    art.write("", "current_" + std::to_string(k) + ".csv", current_csv(result.snapshots[k], p));
  }
  return {p.warnings};
}

json operator_report(const TridiagonalOperator& H) {
  return {{"symmetry_gap", H.symmetry_gap()},
          {"hermiticity_gap", H.hermiticity_gap()},
          {"scale", H.scale()},
          {"structurally_symmetric", H.symmetric}};
}

JobResult run_check(const ScenarioConfig& c, Artifacts& art, std::ostream& out) {
  const ProblemSpec spec = make_problem_spec(c);
  const SampledProfiles p = build_problem(spec);
  json report;
  report["mode"] = to_string(c.mode);
  report["symmetric_grid"] = p.grid.symmetric();
  json pt = {{"threshold", kPtWarnThreshold}};
  if (p.grid.symmetric()) {
    pt["A"] = pt_symmetry_report(spec.A, p.grid);
    pt["V"] = pt_symmetry_report(spec.V, p.grid);
  } else {
    pt["A"] = nullptr;
    pt["V"] = nullptr;
  }
  report["pt_residual"] = pt;
  double min_abs = std::numeric_limits<double>::infinity();
  for (const complex& a : p.A) min_abs = std::min(min_abs, std::abs(a));
  for (const complex& a : p.A_half) min_abs = std::min(min_abs, std::abs(a));
  report["min_abs_A"] = min_abs;
  report["operators"] = {{"psi", operator_report(assemble_hamiltonian(p, Representation::Psi))},
                         {"phi", operator_report(assemble_hamiltonian(p, Representation::Phi))}};
  report["warnings"] = p.warnings;
  art.write("", "check.json", report.dump(2) + "\n");
  out << report.dump(2) << "\n";
  return {p.warnings};
}

struct SweepOutcome {
  std::vector<std::string> warnings;
  bool all_ok = true;
};

SweepOutcome run_sweep(const ScenarioConfig& c, const SweepTask& task, Artifacts& art) {
  struct Row {
    std::vector<EigenPair> pairs;
    std::optional<std::string> error;
    std::vector<std::string> warnings;
  };
  std::vector<Row> rows(task.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) {
      ScenarioConfig local = c;
      local.A = substitute_parameter(c.A, task.parameter, task.values[k]);
      local.V = substitute_parameter(c.V, task.parameter, task.values[k]);
      local.task = task.inner;
      try {
        rows[k].warnings = run_eigen(local, task.inner, art, "value_" + std::to_string(k), &rows[k].pairs).warnings;
      } catch (const Error& e) {
        rows[k].error = std::string(to_string(e.code())) + ": " + e.what();
      } catch (const std::exception& e) {
        rows[k].error = std::string("internal: ") + e.what();
      }
    }
  };
  const std::size_t threads = std::min(sweep_threads(), rows.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::string s = "value,status";
  for (std::size_t k = 0; k < task.inner.count; ++k) {
    s += ",energy_" + std::to_string(k) + "_re,energy_" + std::to_string(k) + "_im";
  }
  s += ",max_abs_im,message\n";
  SweepOutcome outcome;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    s += format_number(task.values[k]);
    if (rows[k].error) {
      outcome.all_ok = false;
      s += ",error";
      for (std::size_t j = 0; j < task.inner.count; ++j) s += ",,";
      s += ",," + csv_escape(*rows[k].error) + "\n";
      continue;
    }
    double max_im = 0.0;
    s += ",ok";
    for (const EigenPair& e : rows[k].pairs) {
      s += "," + complex_cells(e.energy);
      max_im = std::max(max_im, std::fabs(e.energy.imag()));
    }
    s += "," + format_number(max_im) + ",\n";
    for (const std::string& w : rows[k].warnings) {
      outcome.warnings.push_back("value_" + std::to_string(k) + ": " + w);
    }
  }
  art.write("", "summary.csv", s);
  return outcome;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::Syntax:
    case ErrorCode::UnknownIdentifier:
    case ErrorCode::NonIntegerExponent:
    case ErrorCode::InvalidGrid:
    case ErrorCode::InvalidConstants:
    case ErrorCode::AsymmetricGrid:
    case ErrorCode::NonRealProfile:
    case ErrorCode::ZeroAuxiliary:
      return 2;
    default:
      return 1;
  }
}

const char* command_name(Command c) {
  switch (c) {
    case Command::Run:
      return "run";
    case Command::Sweep:
      return "sweep";
    case Command::Check:
      return "check";
  }
  return "run";
}

}  // namespace

// ---- public --------------------------------------------------------------------

ScenarioConfig parse_config(const json& j) {
  expect_object(j, "");
  allow_keys(j, "", {"grid", "constants", "A", "V", "mode", "representation", "boundary", "task", "output"});
  ScenarioConfig c;

  const json& grid = require(j, "", "grid");
  expect_object(grid, "grid");
  allow_keys(grid, "grid", {"xmin", "xmax", "points"});
  c.xmin = as_number(require(grid, "grid", "xmin"), "grid.xmin");
  c.xmax = as_number(require(grid, "grid", "xmax"), "grid.xmax");
  c.points = as_count(require(grid, "grid", "points"), "grid.points", 3);
  if (!(c.xmin < c.xmax)) throw ConfigError("grid.xmax", "must be greater than grid.xmin");

  if (const auto it = j.find("constants"); it != j.end()) {
    expect_object(*it, "constants");
    allow_keys(*it, "constants", {"hbar", "mass"});
    c.constants.hbar = number_or(*it, "constants", "hbar", 1.0);
    c.constants.mass = number_or(*it, "constants", "mass", 1.0);
  }
  if (!(c.constants.hbar > 0.0)) throw ConfigError("constants.hbar", "must be > 0");
  if (!(c.constants.mass > 0.0)) throw ConfigError("constants.mass", "must be > 0");

  c.A = as_string(require(j, "", "A"), "A");
  c.V = as_string(require(j, "", "V"), "V");
  c.mode = parse_enum(j, "", "mode", Mode::Hermitian, {{"hermitian", Mode::Hermitian}, {"pt", Mode::PT}});
  c.representation = parse_enum(j, "", "representation", Representation::Psi,
                                {{"psi", Representation::Psi}, {"phi", Representation::Phi}});
  parse_enum(j, "", "boundary", Boundary::Dirichlet, {{"dirichlet", Boundary::Dirichlet}});
  if (c.mode == Mode::PT && c.xmin != -c.xmax) {
    throw ConfigError("grid.xmin", "pt mode needs a symmetric grid (xmin = -xmax)");
  }

  if (const auto it = j.find("output"); it != j.end()) {
    expect_object(*it, "output");
    allow_keys(*it, "output", {"directory", "prefix"});
    c.output.directory = string_or(*it, "output", "directory", c.output.directory);
    c.output.prefix = string_or(*it, "output", "prefix", "");
    if (c.output.prefix.find('/') != std::string::npos) {
      throw ConfigError("output.prefix", "must not contain '/'");
    }
  }

  const auto [kind, body] = single_variant(require(j, "", "task"), "task", {"eigen", "evolve", "check", "sweep"});
  const std::string tpath = join("task", kind);
  if (kind == "eigen") {
    c.task = parse_eigen(*body, tpath, c.points);
  } else if (kind == "evolve") {
    c.task = parse_evolve(*body, tpath);
  } else if (kind == "check") {
    expect_object(*body, tpath);
    allow_keys(*body, tpath, {});
    c.task = CheckTask{};
  } else {
    c.task = parse_sweep(*body, tpath, c);
  }

  // Expressions must parse (sweep templates after substitution).
  ScenarioConfig probe = c;
  if (const auto* s = std::get_if<SweepTask>(&c.task)) {
    probe.A = substitute_parameter(c.A, s->parameter, s->values.front());
    probe.V = substitute_parameter(c.V, s->parameter, s->values.front());
  }
  make_problem_spec(probe);
  return c;
}

ScenarioConfig load_config(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read config file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ScenarioConfig& c) {
  return {{"grid", {{"xmin", c.xmin}, {"xmax", c.xmax}, {"points", c.points}}},
          {"constants", {{"hbar", c.constants.hbar}, {"mass", c.constants.mass}}},
          {"A", c.A},
          {"V", c.V},
          {"mode", to_string(c.mode)},
          {"representation", to_string(c.representation)},
          {"boundary", "dirichlet"},
          {"task", task_to_json(c.task)},
          {"output", {{"directory", c.output.directory}, {"prefix", c.output.prefix}}}};
}

ProblemSpec make_problem_spec(const ScenarioConfig& c) {
  auto parse_field = [](const std::string& text, const char* path) {
    try {
      return expr::parse(text);
    } catch (const ParseError& e) {
      throw ConfigError(path, e.what());
    }
  };
  return ProblemSpec{parse_field(c.A, "A"), parse_field(c.V, "V"), c.constants,
                     Grid(c.xmin, c.xmax, c.points), c.mode, c.representation};
}

std::string substitute_parameter(const std::string& text, const std::string& name, double value) {
  auto ident = [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; };
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t hit = text.find(name, pos);
    if (hit == std::string::npos) break;
    const bool starts = hit == 0 || !ident(text[hit - 1]);
    const std::size_t end = hit + name.size();
    const bool ends = end == text.size() || !ident(text[end]);
    out.append(text, pos, hit - pos);
    if (starts && ends) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", value);
      out += "(" + std::string(buf) + ")";
    } else {
      out.append(name);
    }
    pos = end;
  }
  out.append(text, pos, std::string::npos);
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void write_atomic(const fs::path& file, const std::string& contents) {
  static std::atomic<unsigned> counter{0};
  const fs::path tmp = file.parent_path() / ("." + file.filename().string() + ".tmp-" +
                                             std::to_string(::getpid()) + "-" + std::to_string(counter++));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.close();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(ErrorCode::Io, "cannot write " + file.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot move output into place: " + file.string());
  }
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int k = 0; k < len; ++k) {
    s += hex[md[k] >> 4];
    s += hex[md[k] & 15];
  }
  return s;
}

std::size_t sweep_threads() {
  const char* env = std::getenv("GENQM_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw ConfigError("GENQM_THREADS", "must be a positive integer");
  return static_cast<std::size_t>(v);
}

int execute(Command command, const fs::path& config_file, const std::optional<fs::path>& out_dir,
            std::ostream& out, std::ostream& err) {
  std::optional<ScenarioConfig> config;
  std::optional<fs::path> root = out_dir;
  std::unique_ptr<Artifacts> art;
  auto manifest = [&](const char* status) {
    json m;
    m["tool"] = "genqm";
    m["version"] = kVersion;
    m["command"] = command_name(command);
    m["config_file"] = config_file.string();
    m["config"] = config ? to_json(*config) : json(nullptr);
    m["status"] = status;
    m["timestamp"] = utc_timestamp();
    json files = json::array();
    if (art) {
      for (const OutputFile& f : art->files()) {
        files.push_back({{"file", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
      }
    }
    m["outputs"] = files;
    return m;
  };

  try {
    config = load_config(config_file);
    if (!root) root = config->output.directory;
    fs::create_directories(*root);
    art = std::make_unique<Artifacts>(*root, config->output.prefix);

    std::vector<std::string> warnings;
    bool ok = true;
    if (command == Command::Check) {
      ScenarioConfig probe = *config;
      if (const auto* s = std::get_if<SweepTask>(&config->task)) {
        probe.A = substitute_parameter(config->A, s->parameter, s->values.front());
        probe.V = substitute_parameter(config->V, s->parameter, s->values.front());
      }
      warnings = run_check(probe, *art, out).warnings;
    } else if (command == Command::Sweep && !std::holds_alternative<SweepTask>(config->task)) {
      throw ConfigError("task", "the sweep command needs a sweep task");
    } else if (const auto* e = std::get_if<EigenTask>(&config->task)) {
      warnings = run_eigen(*config, *e, *art, "").warnings;
    } else if (const auto* e = std::get_if<EvolveTask>(&config->task)) {
      warnings = run_evolve(*config, *e, *art).warnings;
    } else if (std::holds_alternative<CheckTask>(config->task)) {
      warnings = run_check(*config, *art, out).warnings;
    } else {
      const SweepOutcome s = run_sweep(*config, std::get<SweepTask>(config->task), *art);
      warnings = s.warnings;
      ok = s.all_ok;
    }
    for (const std::string& w : warnings) err << "warning: " << w << "\n";
    json m = manifest(ok ? "ok" : "partial");
    m["warnings"] = warnings;
    write_atomic(*root / (config->output.prefix + "manifest.json"), m.dump(2) + "\n");
    if (!ok) {
      err << json{{"error", {{"code", "sweep_partial"}, {"message", "some sweep values failed; see summary.csv"}}}}.dump()
          << "\n";
      return 1;
    }
    out << "wrote " << art->files().size() << " files to " << root->string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    json record;
    int status = 1;
    if (const auto* ge = dynamic_cast<const Error*>(&e)) {
      record = {{"code", std::string(to_string(ge->code()))}, {"message", ge->what()}};
      status = exit_status(ge->code());
      if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) record["path"] = ce->path();
    } else if (dynamic_cast<const fs::filesystem_error*>(&e)) {
      record = {{"code", "io"}, {"message", e.what()}};
    } else {
      record = {{"code", "internal"}, {"message", e.what()}};
    }
    const json full = {{"error", record}, {"exit_status", status}};
    err << full.dump() << "\n";
    if (root) {
      try {
        fs::create_directories(*root);
        const std::string prefix = config ? config->output.prefix : "";
        write_atomic(*root / (prefix + "error.json"), full.dump(2) + "\n");
        json m = manifest("error");
        m["error"] = record;
        write_atomic(*root / (prefix + "manifest.json"), m.dump(2) + "\n");
      } catch (const std::exception&) {
        // The record on stderr is all that can be offered.
      }
    }
    return status;
  }
}

}  // namespace genqm::cli
