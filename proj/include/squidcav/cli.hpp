#pragma once

// Run configuration, result records and the run / sweep / validate commands.
// Kept out of the umbrella header: this layer pulls in nlohmann::json.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "squidcav/squidcav.hpp"

namespace squidcav::cli {

using nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kConfigError = 2, kIoError = 3 };

enum class OutputFormat { json, csv };

inline const char* to_string(OutputFormat f) { return f == OutputFormat::json ? "json" : "csv"; }

/// Malformed document, unknown key or invalid value; `key()` names the culprit.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public std::runtime_error {
 public:
  IoError(std::string path, const std::string& what)
      : std::runtime_error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct RunConfig {
  SystemParams params{};
  Model model = Model::effective;
  PreparationMode mode = PreparationMode::physical_pulse;
  IntegratorConfig integrator{};
  std::string output_path;  // empty: standard output
  OutputFormat output_format = OutputFormat::json;
  bool drive_on_window2 = true;
  bool phase_optimized = false;

  ProtocolOptions protocol_options() const {
    ProtocolOptions o;
    o.sequence.mode = mode;
    o.sequence.drive_on_window2 = drive_on_window2;
    o.phase_optimized = phase_optimized;
    return o;
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline const std::vector<std::string>& schema_keys() {
  static const std::vector<std::string> keys = {
      "g",     "delta", "k",          "k_prime",   "nbar",        "n_max",         "model",
      "mode",  "dt_initial", "tolerance", "output_path", "output_format", "drive_on_window2",
      "phase_optimized"};
  return keys;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key, "expected a finite number, got '" + std::string(v) + "'");
  }
  return out;
}

inline std::int64_t parse_int(const std::string& key, std::string_view v) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key, "expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + std::string(v) + "'");
}

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

using Entries = std::map<std::string, std::string>;

/// Splits a flat `key = value` document. Entries are separated by newlines or
/// commas; `#` starts a comment. Unknown and repeated keys are rejected.
inline Entries parse_entries(std::string_view text) {
  Entries out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t line_end = text.find('\n', pos);
    if (line_end == std::string_view::npos) line_end = text.size();
    std::string_view line = text.substr(pos, line_end - pos);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::size_t item_pos = 0;
    while (item_pos <= line.size()) {
      std::size_t item_end = line.find(',', item_pos);
      if (item_end == std::string_view::npos) item_end = line.size();
      const std::string_view item = detail::trim(line.substr(item_pos, item_end - item_pos));
      item_pos = item_end + 1;
      if (item.empty()) continue;

      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(std::string(item), "expected 'key = value'");
      }
      const std::string key(detail::trim(item.substr(0, eq)));
      const std::string value(detail::trim(item.substr(eq + 1)));
      const auto& keys = schema_keys();
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError(key, "unknown key");
      }
      if (!out.emplace(key, value).second) throw ConfigError(key, "key given more than once");
    }
    pos = line_end + 1;
  }
  return out;
}

/// Builds a validated RunConfig. When k or k_prime is absent it is derived
/// from the document's g and delta at the default drive ratio.
inline RunConfig build_config(const Entries& entries) {
  RunConfig c;
  auto get = [&](const char* key) -> std::optional<std::string> {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return it->second;
  };

  if (auto v = get("g")) c.params.g = detail::parse_double("g", *v);
  if (auto v = get("delta")) c.params.delta = detail::parse_double("delta", *v);
  if (!(c.params.g > 0.0)) throw ConfigError("g", "must be > 0");
  if (!(c.params.delta > 0.0)) throw ConfigError("delta", "must be > 0");
  c.params.k = regime_k(c.params.g, c.params.delta);
  c.params.k_prime = regime_k_prime(c.params.g, c.params.delta);
  if (auto v = get("k")) c.params.k = detail::parse_int("k", *v);
  if (auto v = get("k_prime")) c.params.k_prime = detail::parse_int("k_prime", *v);
  if (auto v = get("nbar")) c.params.nbar = detail::parse_double("nbar", *v);
  if (auto v = get("n_max")) c.params.n_max = detail::parse_int("n_max", *v);

  if (auto v = get("model")) {
    if (*v == "effective") c.model = Model::effective;
    else if (*v == "full") c.model = Model::full;
    else throw ConfigError("model", "expected effective or full, got '" + *v + "'");
  }
  if (auto v = get("mode")) {
    if (*v == "physical-pulse") c.mode = PreparationMode::physical_pulse;
    else if (*v == "as-published") c.mode = PreparationMode::as_published;
    else throw ConfigError("mode", "expected physical-pulse or as-published, got '" + *v + "'");
  }
  if (auto v = get("dt_initial")) c.integrator.dt_initial = detail::parse_double("dt_initial", *v);
  if (auto v = get("tolerance")) c.integrator.tolerance = detail::parse_double("tolerance", *v);
  if (auto v = get("output_path")) c.output_path = *v;
  if (auto v = get("output_format")) {
    if (*v == "json") c.output_format = OutputFormat::json;
    else if (*v == "csv") c.output_format = OutputFormat::csv;
    else throw ConfigError("output_format", "expected json or csv, got '" + *v + "'");
  }
  if (auto v = get("drive_on_window2")) c.drive_on_window2 = detail::parse_bool("drive_on_window2", *v);
  if (auto v = get("phase_optimized")) c.phase_optimized = detail::parse_bool("phase_optimized", *v);

  try {
    c.params.validate();
    c.integrator.validate();
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    throw ConfigError(e.key(), what.substr(std::min(what.size(), e.key().size() + 2)));
  }
  return c;
}

inline RunConfig parse_config(std::string_view text) { return build_config(parse_entries(text)); }

/// Parses the document, then applies `KEY=VALUE` overrides before validation.
inline RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
  Entries entries = parse_entries(text);
  for (const auto& o : overrides) {
    Entries one = parse_entries(o);
    if (one.size() != 1) throw ConfigError(o, "override must be a single KEY=VALUE");
    entries[one.begin()->first] = one.begin()->second;
  }
  return build_config(entries);
}

/// Canonical document for `c`; parse_config(echo_config(c)) == c.
inline std::string echo_config(const RunConfig& c) {
  std::ostringstream out;
  out << "g = " << detail::format_double(c.params.g) << '\n'
      << "delta = " << detail::format_double(c.params.delta) << '\n'
      << "k = " << c.params.k << '\n'
      << "k_prime = " << c.params.k_prime << '\n'
      << "nbar = " << detail::format_double(c.params.nbar) << '\n'
      << "n_max = " << c.params.n_max << '\n'
      << "model = " << to_string(c.model) << '\n'
      << "mode = " << to_string(c.mode) << '\n'
      << "dt_initial = " << detail::format_double(c.integrator.dt_initial) << '\n'
      << "tolerance = " << detail::format_double(c.integrator.tolerance) << '\n';
  if (!c.output_path.empty()) out << "output_path = " << c.output_path << '\n';
  out << "output_format = " << to_string(c.output_format) << '\n'
      << "drive_on_window2 = " << (c.drive_on_window2 ? "true" : "false") << '\n'
      << "phase_optimized = " << (c.phase_optimized ? "true" : "false") << '\n';
  return out.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path, "read failed");
  return ss.str();
}

inline void write_output(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  out << text;
  if (!out) throw IoError(path, "write failed");
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline ordered_json optional_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

inline ordered_json matrix_json(const ComplexMatrix& m) {
  ordered_json re = ordered_json::array(), im = ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    ordered_json rr = ordered_json::array(), ri = ordered_json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return {{"re", std::move(re)}, {"im", std::move(im)}};
}

inline ordered_json regime_json(const RegimeReport& r) {
  return {{"ratio_drive", r.ratio_drive},
          {"ratio_drive_window2", r.ratio_drive_window2},
          {"ratio_detuning", r.ratio_detuning},
          {"threshold_drive", r.thresholds.drive},
          {"threshold_detuning", r.thresholds.detuning},
          {"regime_ok", r.regime_ok}};
}

inline ordered_json result_json(const ProtocolResult& r) {
  ordered_json j;
  j["model"] = to_string(r.model);
  j["mode"] = to_string(r.mode);
  j["n_max_used"] = r.n_max_used;
  j["fidelity_to_target"] = r.fidelity_to_target;
  j["phase_optimized_fidelity"] = optional_json(r.phase_optimized_fidelity);
  j["entropy"] = optional_json(r.entropy);
  j["negativity"] = r.negativity;
  j["purity"] = r.purity;
  j["norm_deviation"] = r.norm_deviation;
  j["regime"] = regime_json(r.regime);
  j["regime_warning"] = r.regime_warning;
  const auto& c = r.certificate;
  j["timing"] = {{"k", c.k},
                 {"k_prime", c.k_prime},
                 {"lambda_t1", c.lambda_t1},
                 {"omega_t1_over_pi", c.omega_t1_over_pi},
                 {"lambda_t2", c.lambda_t2},
                 {"omega_prime_t2_over_2pi", c.omega_prime_t2_over_2pi},
                 {"holds", c.holds()}};
  ordered_json windows = ordered_json::array();
  for (const auto& w : r.windows) {
    windows.push_back({{"label", w.label},
                       {"steps", w.integrator.steps},
                       {"final_dt", w.integrator.final_dt},
                       {"halvings", w.integrator.halvings},
                       {"last_change", w.integrator.last_change},
                       {"unitarity_error", w.integrator.unitarity_error}});
  }
  j["windows"] = std::move(windows);
  ordered_json snaps = ordered_json::array();
  for (const auto& s : r.snapshots) {
    snaps.push_back({{"label", s.label},
                     {"time", s.time},
                     {"purity", s.pair_state.purity()},
                     {"pair_state", matrix_json(s.pair_state.matrix())}});
  }
  j["snapshots"] = std::move(snaps);
  return j;
}

inline ordered_json run_record(const RunConfig& config, const ProtocolResult& r,
                               const std::string& timestamp) {
  ordered_json j;
  j["version"] = kVersion;
  j["timestamp"] = timestamp;
  j["config"] = echo_config(config);
  j["result"] = result_json(r);
  return j;
}

// Sweep table rows. Column order is fixed; a failed point leaves the numeric
// columns empty and fills `error`.
inline const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols = {
      "delta",      "k",          "k_prime",          "nbar",       "n_max",
      "g",          "n_max_used", "fidelity",         "phase_optimized_fidelity",
      "entropy",    "negativity", "ratio_drive",      "ratio_drive_window2",
      "ratio_detuning", "regime_ok", "final_dt",       "halvings",   "error"};
  return cols;
}

inline SweepRecord record_from_result(const ProtocolResult& r) {
  SweepRecord rec;
  rec.params = r.params;
  rec.fidelity_to_target = r.fidelity_to_target;
  rec.phase_optimized_fidelity = r.phase_optimized_fidelity;
  rec.entropy = r.entropy;
  rec.negativity = r.negativity;
  rec.regime = r.regime;
  rec.n_max_used = r.n_max_used;
  for (const auto& w : r.windows) {
    rec.final_dt = rec.final_dt == 0.0 ? w.integrator.final_dt
                                       : std::min(rec.final_dt, w.integrator.final_dt);
    rec.halvings = std::max(rec.halvings, w.integrator.halvings);
  }
  return rec;
}

inline ordered_json row_json(const SweepRecord& rec) {
  ordered_json j;
  const auto& p = rec.params;
  j["delta"] = p.delta;
  j["k"] = p.k;
  j["k_prime"] = p.k_prime;
  j["nbar"] = p.nbar;
  j["n_max"] = p.n_max;
  j["g"] = p.g;
  const bool ok = !rec.error;
  j["n_max_used"] = ok ? ordered_json(rec.n_max_used) : ordered_json(nullptr);
  j["fidelity"] = ok ? ordered_json(rec.fidelity_to_target) : ordered_json(nullptr);
  j["phase_optimized_fidelity"] = optional_json(rec.phase_optimized_fidelity);
  j["entropy"] = optional_json(rec.entropy);
  j["negativity"] = ok ? ordered_json(rec.negativity) : ordered_json(nullptr);
  j["ratio_drive"] = rec.regime.ratio_drive;
  j["ratio_drive_window2"] = rec.regime.ratio_drive_window2;
  j["ratio_detuning"] = rec.regime.ratio_detuning;
  j["regime_ok"] = rec.regime.regime_ok;
  j["final_dt"] = ok && rec.final_dt > 0.0 ? ordered_json(rec.final_dt) : ordered_json(nullptr);
  j["halvings"] = ok ? ordered_json(rec.halvings) : ordered_json(nullptr);
  j["error"] = rec.error ? ordered_json(*rec.error) : ordered_json(nullptr);
  return j;
}

inline std::string csv_cell(const ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return detail::format_double(v.get<double>());
  if (v.is_number()) return v.dump();
  std::string s = v.get<std::string>();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

inline std::string render_table(const std::vector<SweepRecord>& rows, OutputFormat format) {
  if (format == OutputFormat::json) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) arr.push_back(row_json(r));
    return arr.dump(2) + '\n';
  }
  std::ostringstream out;
  const auto& cols = table_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    const ordered_json j = row_json(r);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << csv_cell(j[cols[i]]);
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct CommandOutput {
  int exit_code = kOk;
  std::string text;
};

/// JSON: one record with config echo and version. CSV: a one-row table.
inline CommandOutput cmd_run(const RunConfig& config,
                             const std::string& timestamp = utc_timestamp()) {
  try {
    const ProtocolResult r =
        run_protocol(config.params, config.model, config.integrator, config.protocol_options());
    if (config.output_format == OutputFormat::csv) {
      return {kOk, render_table({record_from_result(r)}, OutputFormat::csv)};
    }
    return {kOk, run_record(config, r, timestamp).dump(2) + '\n'};
  } catch (const IntegratorError& e) {
    ordered_json j;
    j["version"] = kVersion;
    j["timestamp"] = timestamp;
    j["config"] = echo_config(config);
    j["error"] = e.what();
    return {kValidationFailure, j.dump(2) + '\n'};
  }
}

/// Grid values per key, e.g. {"delta", {5, 10, 20}}. Keys: delta, k, nbar, n_max.
using GridSpec = std::vector<std::pair<std::string, std::vector<std::string>>>;

inline SweepGrid build_grid(const GridSpec& spec) {
  SweepGrid grid;
  for (const auto& [key, values] : spec) {
    if (values.empty()) throw ConfigError(key, "grid needs at least one value");
    for (const auto& v : values) {
      if (key == "delta") grid.delta.push_back(detail::parse_double(key, v));
      else if (key == "nbar") grid.nbar.push_back(detail::parse_double(key, v));
      else if (key == "k") grid.k.push_back(detail::parse_int(key, v));
      else if (key == "n_max") grid.n_max.push_back(static_cast<Index>(detail::parse_int(key, v)));
      else throw ConfigError(key, "not a sweepable key (delta, k, nbar, n_max)");
    }
  }
  if (grid.empty()) throw ConfigError("grid", "sweep grid is empty");
  return grid;
}

/// Sweeping delta re-derives k and k_prime per point at the default drive
/// ratio unless `fixed_drive` is set.
inline CommandOutput cmd_sweep(const RunConfig& config, const SweepGrid& grid,
                               bool fixed_drive = false, unsigned threads = 0) {
  SweepSpec spec;
  spec.base = config.params;
  spec.model = config.model;
  spec.integrator = config.integrator;
  spec.options = config.protocol_options();
  spec.max_threads = threads;
  if (!grid.delta.empty() && !fixed_drive) spec.auto_drive_ratio = kDefaultDriveRatio;
  const auto rows = sweep(grid, spec);
  const bool any_ok = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return !r.error; });
  return {any_ok ? kOk : kValidationFailure, render_table(rows, config.output_format)};
}

/// Built-in verification battery.
inline std::vector<CheckEntry> validation_battery() {
  std::vector<CheckEntry> checks = verify_printed_states();
  checks.push_back(make_check("[H0,He] commutator", max_commutator_h0_he(), 1e-12,
                              "max Frobenius norm over 100 random (Omega, lambda)"));

  double spread = 0.0;
  std::optional<DensityMatrix> reference;
  for (double nbar : {0.0, 0.5, 2.0}) {
    SystemParams p;
    p.nbar = nbar;
    const ProtocolResult r = run_protocol(p, Model::effective);
    if (!reference) reference = r.final_state();
    else spread = std::max(spread, trace_distance(*reference, r.final_state()));
  }
  checks.push_back(make_check("thermal invariance", spread, 1e-9,
                              "effective model, nbar in {0, 0.5, 2}, max trace distance"));

  const ProtocolResult eff = run_protocol(SystemParams{}, Model::effective);
  checks.push_back(make_check("entropy", std::abs(*eff.entropy - std::log2(3.0)), 1e-6,
                              "|S - log2 3|"));
  checks.push_back(make_check("negativity", std::abs(eff.negativity - 1.0), 1e-6, "|N - 1|"));

  const SystemParams shallow = SystemParams::for_detuning(5.0);
  const ProtocolResult full = run_protocol(shallow, Model::full);
  checks.push_back(make_check("unitarity audit", full.norm_deviation, 1e-9,
                              "full model, delta = 5, max norm deviation over the run"));

  const SystemParams ref = SystemParams::for_detuning(10.0);
  const auto layout = HilbertLayout::composite(ref.n_max);
  const OrderStudy order = integrator_order(FullModel::from(ref, ref.omega()),
                                            PureState::basis(layout, 0, 0, 0), 0.0, 1.0, 128);
  checks.push_back(make_check("integrator order", std::abs(order.ratio - 4.0), 1.0,
                              "|ratio - 4|, delta = 10, duration 1, dt = 1/128"));
  return checks;
}

inline CommandOutput cmd_validate(OutputFormat format = OutputFormat::json) {
  const auto checks = validation_battery();
  const bool all = std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  std::ostringstream out;
  if (format == OutputFormat::json) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : checks) {
      arr.push_back({{"check", c.name},
                     {"measured", c.measured},
                     {"tolerance", c.tolerance},
                     {"passed", c.passed},
                     {"note", c.note}});
    }
    ordered_json j;
    j["version"] = kVersion;
    j["all_passed"] = all;
    j["checks"] = std::move(arr);
    out << j.dump(2) << '\n';
  } else {
    out << "check,measured,tolerance,passed,note\n";
    for (const auto& c : checks) {
      out << csv_cell(c.name) << ',' << detail::format_double(c.measured) << ','
          << detail::format_double(c.tolerance) << ',' << (c.passed ? "true" : "false") << ','
          << csv_cell(c.note) << '\n';
    }
  }
  return {all ? kOk : kValidationFailure, out.str()};
}

}  // namespace squidcav::cli
