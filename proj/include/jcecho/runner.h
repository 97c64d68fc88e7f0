#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jcecho/evolution.h"
#include "jcecho/observables.h"
#include "jcecho/operators.h"
#include "jcecho/semiclassical.h"
#include "jcecho/wigner.h"

namespace jcecho {

enum class Regime { Chaotic, Regular };
enum class Mode { Correlations, Echo, Wigner, Semiclassical };

std::string_view to_string(Regime r);
std::string_view to_string(Mode m);
Regime parse_regime(std::string_view s);
Mode parse_mode(std::string_view s);

/// Raised for bad configuration; line() is 0 for values that did not come from a file.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Full parameterization of one run. Keys accepted by set():
///   regime, mode, spin, omega, epsilon, g, gprime, nboson, delta, theta, phi, alpha,
///   spin_state, seed, tmax, dt, fit_tmin, fit_tmax, snapshots, out, matrix, drift,
///   check_convergence, sidecar
/// Complex values are written "re" or "re,im"; snapshots as a comma-separated list.
struct ExperimentSpec {
  Regime regime = Regime::Chaotic;
  Mode mode = Mode::Echo;
  JCParams params;
  double delta = 0.1;
  double theta = 1.0;
  double phi = 1.0;
  Complex alpha{1.15, 0.0};
  std::string spin_state = "coherent";  // or "random"
  std::uint64_t seed = 1;
  double t_max = 100.0;
  double dt = 0.25;
  FitWindow window;
  std::vector<double> snapshots{0.0, 25.0, 50.0, 75.0, 100.0};
  std::string out = "jcecho.csv";
  std::string matrix_file;
  std::string drift_file;
  bool check_convergence = false;
  bool sidecar = false;

  /// Model constants of the two regimes with J = 4 and hbar = 1/J.
  static ExperimentSpec preset(Regime regime);

  void set(std::string_view key, std::string_view value);
  void validate() const;

  /// t = 0, dt, ... up to t_max (inclusive within dt * 1e-9).
  std::vector<double> times() const;

  /// Every key with its current value, in the order documented above.
  std::vector<std::pair<std::string, std::string>> config_echo() const;
};

/// key = value lines; '#' starts a comment. Duplicate or unknown keys are errors.
std::vector<std::pair<int, std::pair<std::string, std::string>>> read_config(std::istream& in);

/// Preset of the effective regime (override, else file, else chaotic), then the file entries,
/// then the overrides, each in order. Errors carry the config line number.
ExperimentSpec build_spec(std::istream* config,
                          const std::vector<std::pair<std::string, std::string>>& overrides);

/// Shares Hamiltonians and their diagonalizations between runs in one process.
class ModelCache {
 public:
  std::shared_ptr<const JCModel> model(const JCParams& params);
  std::shared_ptr<const SpectralDecomposition> spectrum(const JCParams& params, double delta);

 private:
  std::map<std::string, std::shared_ptr<const JCModel>> models_;
  std::map<std::string, std::shared_ptr<const SpectralDecomposition>> spectra_;
};

/// Numeric CSV body.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(std::string_view name) const;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct RunResult {
  Table table;
  Metadata meta;
};

struct CorrelationRun : RunResult {
  CorrelationSeries series;
  DecayFit fit;
};

struct WignerSnapshot {
  double t = 0.0;
  WignerField field;
  double purity = 0.0;             // tr rho_1^2
  double quadrature_purity = 0.0;  // closed-sphere integral of W^2
};

struct WignerRun : RunResult {  // table is the snapshot index
  std::vector<WignerSnapshot> snapshots;
};

/// The product initial state described by the spec.
ProductInitialState initial_state(const ExperimentSpec& spec);

CorrelationRun run_correlations(const ExperimentSpec& spec, ModelCache& cache);
RunResult run_echo(const ExperimentSpec& spec, ModelCache& cache);
WignerRun run_wigner(const ExperimentSpec& spec, ModelCache& cache);
RunResult run_semiclassical(const ExperimentSpec& spec);

/// Dispatches on spec.mode. With check_convergence set, repeats the run at twice the boson
/// truncation and records converged / max_change (threshold 1e-6) in the metadata.
RunResult run(const ExperimentSpec& spec, ModelCache& cache, WignerRun* wigner = nullptr);

/// Shortest round-trip decimal form.
std::string format_number(double x);

void write_csv(std::ostream& out, const ExperimentSpec& spec, const RunResult& result);

/// Writes spec.out, the per-snapshot Wigner files next to it, and the JSON sidecar if asked.
/// Returns the paths written.
std::vector<std::string> write_outputs(const ExperimentSpec& spec, const RunResult& result,
                                       const WignerRun* wigner);

/// Path of snapshot k for an index file at `index_path`.
std::string snapshot_path(const std::string& index_path, std::size_t k);

}  // namespace jcecho
