#pragma once

// Scenario presets, the scenario runner, file output and the oracle suite.
//
// Units: omega_m = 1; rates in omega_m, times in 1/omega_m.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "omx/dissipators.hpp"
#include "omx/dynamics.hpp"
#include "omx/model.hpp"

namespace omx {

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class ModelKind { single, two_cavity };
enum class Equation { dsme, sme };

std::string to_string(ModelKind m);
std::string to_string(Equation e);

struct InitialState {
  /// "cavity_superposition" (args n1 n2), "fock" (one occupation per mode),
  /// or "cavity_bell" ((|01> + |10>)/sqrt2 on two cavities).
  std::string kind;
  std::vector<int> args;
};

struct SweepGrid {
  std::string parameter = "beta0";
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;

  /// start, start + step, ... up to stop (inclusive within 1e-9 step).
  std::vector<double> values() const;
};

struct ScenarioConfig {
  std::string name = "scenario";
  ModelKind model = ModelKind::single;
  std::vector<Equation> equations{Equation::dsme, Equation::sme};

  OmcParams single;
  TwoCavityParams two;
  std::vector<double> n_th{0.0};

  /// Cavity drive in the rotating frame. With `detuning_at_polaron_shift`
  /// the detuning follows g0^2/omega_m at every sweep point.
  std::optional<DriveParams> drive;
  bool detuning_at_polaron_shift = false;

  std::optional<InitialState> initial_state;

  int n_c = 4;
  int n_c2 = 2;
  /// Mechanical truncation per n_th entry (or one value for all);
  /// 0 selects the displacement/thermal heuristic.
  std::vector<int> n_m{0};

  /// Horizon per n_th entry (or one value for all).
  std::vector<double> t_end{100.0};
  double dt_out = 0.05;

  std::optional<SweepGrid> sweep;
  SolverConfig solver;
  std::vector<std::string> outputs;

  bool convergence = false;
  double convergence_tol = 1e-4;
  int convergence_levels = 2;

  /// Peak separation for envelope fits; 0 means half a mechanical period.
  double envelope_min_separation = 0.0;
  std::vector<double> expected_peaks;
  bool expect_dsme_equals_sme = false;

  bool is_sweep() const { return sweep.has_value(); }
  bool has(Equation e) const;
  void validate() const;

  /// Mechanical truncation used for n_th entry `i` at coupling beta0
  /// (two-cavity: the configured couplings).
  int mechanical_dim(std::size_t i, std::optional<double> beta0 = {}) const;
  double horizon(std::size_t i) const;
};

/// Parse the key-value configuration format. Unknown keys throw.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);
/// Inverse of parse_config (round-trips every field).
std::string format_config(const ScenarioConfig& cfg);

/// Sets one key from its text form (same syntax as a config line value).
/// Setting n_th remaps per-entry n_m and t_end to the nearest old entry.
/// Does not validate; callers validate once all keys are set.
void apply_setting(ScenarioConfig& cfg, const std::string& key,
                   const std::string& value);

ScenarioConfig scenario_fig2();
ScenarioConfig scenario_fig3();
/// Equal couplings (1.5, 1.5) and unequal couplings (1.5, 0.5).
std::vector<ScenarioConfig> scenario_fig4();

/// Looks up "fig2", "fig3", "fig4_equal", "fig4_unequal".
std::vector<ScenarioConfig> preset(const std::string& name);

/// One column of a data table.
struct Column {
  std::string name;
  std::vector<double> values;
};

/// Per-run bookkeeping carried into the JSON sidecar.
struct RunInfo {
  std::string label;  // e.g. "dsme_nth20" or "sme_nth0_beta0=1.2"
  double n_th = 0.0;
  double kT_over_omega_m = 0.0;
  std::vector<int> dims;
  IntegrationStats stats;
  StateValidity worst_validity;
  double steady_state_residual = 0.0;
};

struct DataTable {
  std::string file_stem;
  std::vector<Column> columns;  // first column is t or beta0
  std::vector<RunInfo> runs;
  const Column& column(const std::string& name) const;
};

struct EnvelopeSummary {
  std::string column;
  std::optional<double> rate;
  std::size_t peaks = 0;
  double fit_residual = 0.0;
  std::string note;
};

struct ScenarioResult {
  std::vector<DataTable> tables;
  std::vector<ConvergenceReport> convergence;
  std::vector<EnvelopeSummary> envelopes;
  std::vector<std::string> notes;
  StateValidity worst_validity;
  bool expectations_met = true;
  double wall_seconds = 0.0;
};

/// Runs every (n_th, equation) combination of the scenario in memory.
/// Convergence checks run too when cfg.convergence is set.
ScenarioResult simulate(const ScenarioConfig& cfg);

/// Column name `<observable>_<equation>[_nth<k>]`.
std::string column_name(const std::string& observable, Equation eq,
                        std::optional<double> n_th = {});
std::string nth_tag(double n_th);

/// Mechanical-truncation convergence of the scenario's first output.
std::vector<ConvergenceReport> converge(const ScenarioConfig& cfg);

struct RunRecord {
  ScenarioResult result;
  std::string config_snapshot;
  std::string engine_version;
  double wall_seconds = 0.0;
  std::vector<ConvergenceReport> convergence;
  std::vector<std::filesystem::path> output_files;
  bool passed = true;
  std::string summary;
};

/// simulate() plus CSV and JSON-sidecar output into `out_dir`.
RunRecord run(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

/// Writes a table as CSV (17 significant digits) and returns its path.
std::filesystem::path write_csv(const DataTable& table,
                                const std::filesystem::path& out_dir);

struct CheckResult {
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  std::string text() const;
};

/// Analytical-oracle and identity checks on small problem sizes.
ValidationReport validate();

const char* engine_version();

}  // namespace omx
