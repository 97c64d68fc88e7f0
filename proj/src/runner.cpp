#include "jcecho/runner.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "jcecho/states.h"

namespace jcecho {

namespace {

constexpr double kZenoTime = 1.0;
constexpr double kConvergenceThreshold = 1e-6;
constexpr int kRegularBosons = 64;
constexpr int kChaoticBosons = 384;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(x)) {
    throw ConfigError(0, std::string(key) + ": expected a finite number, got '" + s + "'");
  }
  return x;
}

template <typename Int>
Int parse_integer(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  Int x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(0, std::string(key) + ": expected an integer, got '" + s + "'");
  }
  return x;
}

Complex parse_complex(std::string_view key, std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) return {parse_double(key, text), 0.0};
  return {parse_double(key, text.substr(0, comma)), parse_double(key, text.substr(comma + 1))};
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(0, std::string(key) + ": expected true or false, got '" + s + "'");
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_double(key, text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_complex(Complex z) {
  if (z.imag() == 0.0) return format_number(z.real());
  return format_number(z.real()) + "," + format_number(z.imag());
}

std::string params_key(const JCParams& p) {
  return std::to_string(p.spin.twice()) + "|" + format_number(p.omega) + "|" + format_number(p.epsilon) +
         "|" + format_complex(p.g) + "|" + format_complex(p.gprime) + "|" + std::to_string(p.nboson);
}

bool in_window(double t, const FitWindow& w) { return t > 0.0 && t >= w.t_min && t <= w.t_max; }

void add_fit_metadata(Metadata& meta, const ExperimentSpec& spec, const CorrelationSeries& series,
                      DecayFit* fit_out) {
  const bool any = std::any_of(series.times.begin(), series.times.end(),
                               [&](double t) { return in_window(t, spec.window); });
  meta.emplace_back("zeno_time", format_number(kZenoTime));
  if (!any) {
    meta.emplace_back("fit", "none: no grid points in fit window");
    return;
  }
  const DecayFit fit = fit_decay(series, spec.window, spec.delta, spec.params.hbar);
  meta.emplace_back("fit_samples", std::to_string(fit.samples));
  meta.emplace_back("sigma", format_number(fit.sigma));
  meta.emplace_back("two_sigma", format_number(2.0 * fit.sigma));
  meta.emplace_back("cbar", format_number(fit.cbar));
  meta.emplace_back("tau_em", format_number(fit.tau_em));
  meta.emplace_back("tau_ne", format_number(fit.tau_ne));
  if (fit_out != nullptr) *fit_out = fit;
}

void add_model_metadata(Metadata& meta, const ExperimentSpec& spec) {
  meta.emplace_back("dim", std::to_string(spec.params.space().dim()));
  meta.emplace_back("hbar", format_number(spec.params.hbar));
  meta.emplace_back("coherent_tail_weight", format_number(coherent_tail_weight(spec.alpha, spec.params.nboson)));
  meta.emplace_back("rng_algorithm", std::string(kRandomStateAlgorithm));
}

double max_table_change(const Table& a, const Table& b) {
  if (a.columns != b.columns || a.rows.size() != b.rows.size()) return std::numeric_limits<double>::infinity();
  double change = 0.0;
  for (std::size_t r = 0; r < a.rows.size(); ++r)
    for (std::size_t c = 0; c < a.rows[r].size(); ++c) {
      const double x = a.rows[r][c];
      const double y = b.rows[r][c];
      if (std::isnan(x) && std::isnan(y)) continue;
      change = std::max(change, std::abs(x - y));
    }
  return change;
}

std::string file_stem_path(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

void write_header(std::ostream& out, const ExperimentSpec& spec, const Metadata& meta) {
  out << "# jcecho " << to_string(spec.mode) << '\n';
  for (const auto& [k, v] : spec.config_echo()) out << "# config " << k << " = " << v << '\n';
  for (const auto& [k, v] : meta) out << "# meta " << k << " = " << v << '\n';
}

void write_body(std::ostream& out, const Table& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

std::string_view to_string(Regime r) { return r == Regime::Chaotic ? "chaotic" : "regular"; }

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Correlations: return "correlations";
    case Mode::Echo: return "echo";
    case Mode::Wigner: return "wigner";
    case Mode::Semiclassical: return "semiclassical";
  }
  return "";
}

Regime parse_regime(std::string_view s) {
  const std::string t = trim(s);
  if (t == "chaotic") return Regime::Chaotic;
  if (t == "regular") return Regime::Regular;
  throw ConfigError(0, "regime: expected chaotic or regular, got '" + t + "'");
}

Mode parse_mode(std::string_view s) {
  const std::string t = trim(s);
  for (Mode m : {Mode::Correlations, Mode::Echo, Mode::Wigner, Mode::Semiclassical})
    if (t == to_string(m)) return m;
  throw ConfigError(0, "mode: expected correlations, echo, wigner or semiclassical, got '" + t + "'");
}

ConfigError::ConfigError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + what : what), line_(line) {}

ExperimentSpec ExperimentSpec::preset(Regime regime) {
  ExperimentSpec s;
  s.regime = regime;
  const bool chaotic = regime == Regime::Chaotic;
  s.params = JCParams::with_spin(HalfInteger::from_twice(8), 0.3, 0.3, 1.0, chaotic ? 1.0 : 0.0,
                                 chaotic ? kChaoticBosons : kRegularBosons);
  return s;
}

void ExperimentSpec::set(std::string_view key, std::string_view value) {
  const std::string k = trim(key);
  if (k == "regime") {
    regime = parse_regime(value);
    params = preset(regime).params;
  } else if (k == "mode") {
    mode = parse_mode(value);
  } else if (k == "spin") {
    try {
      params.spin = HalfInteger::from_double(parse_double(k, value));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(0, "spin: " + std::string(e.what()));
    }
    if (params.spin.twice() < 1) throw ConfigError(0, "spin: must be positive");
    params.hbar = 1.0 / params.spin.value();
  } else if (k == "omega") {
    params.omega = parse_double(k, value);
  } else if (k == "epsilon") {
    params.epsilon = parse_double(k, value);
  } else if (k == "g") {
    params.g = parse_complex(k, value);
  } else if (k == "gprime") {
    params.gprime = parse_complex(k, value);
  } else if (k == "nboson") {
    params.nboson = parse_integer<int>(k, value);
  } else if (k == "delta") {
    delta = parse_double(k, value);
  } else if (k == "theta") {
    theta = parse_double(k, value);
  } else if (k == "phi") {
    phi = parse_double(k, value);
  } else if (k == "alpha") {
    alpha = parse_complex(k, value);
  } else if (k == "spin_state") {
    spin_state = trim(value);
  } else if (k == "seed") {
    seed = parse_integer<std::uint64_t>(k, value);
  } else if (k == "tmax") {
    t_max = parse_double(k, value);
  } else if (k == "dt") {
    dt = parse_double(k, value);
  } else if (k == "fit_tmin") {
    window.t_min = parse_double(k, value);
  } else if (k == "fit_tmax") {
    window.t_max = parse_double(k, value);
  } else if (k == "snapshots") {
    snapshots = parse_list(k, value);
  } else if (k == "out") {
    out = trim(value);
  } else if (k == "matrix") {
    matrix_file = trim(value);
  } else if (k == "drift") {
    drift_file = trim(value);
  } else if (k == "check_convergence") {
    check_convergence = parse_bool(k, value);
  } else if (k == "sidecar") {
    sidecar = parse_bool(k, value);
  } else {
    throw ConfigError(0, "unknown key '" + k + "'");
  }
}

void ExperimentSpec::validate() const {
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  if (delta < 0.0) throw ConfigError(0, "delta must be >= 0");
  if (!(dt > 0.0)) throw ConfigError(0, "dt must be > 0");
  if (t_max < 0.0) throw ConfigError(0, "tmax must be >= 0");
  if (!(window.t_min < window.t_max)) throw ConfigError(0, "fit window needs fit_tmin < fit_tmax");
  if (spin_state != "coherent" && spin_state != "random") {
    throw ConfigError(0, "spin_state: expected coherent or random, got '" + spin_state + "'");
  }
  if (mode == Mode::Wigner) {
    if (snapshots.empty()) throw ConfigError(0, "wigner mode needs snapshot times");
    for (double t : snapshots)
      if (t < 0.0 || t > t_max) throw ConfigError(0, "snapshot time " + format_number(t) + " outside [0, tmax]");
  }
  if (mode == Mode::Semiclassical && matrix_file.empty()) throw ConfigError(0, "semiclassical mode needs matrix");
  if (out.empty()) throw ConfigError(0, "out must name a file");
}

std::vector<double> ExperimentSpec::times() const {
  const auto n = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
  std::vector<double> t(n + 1);
  for (std::size_t k = 0; k <= n; ++k) t[k] = static_cast<double>(k) * dt;
  return t;
}

std::vector<std::pair<std::string, std::string>> ExperimentSpec::config_echo() const {
  std::string snaps;
  for (std::size_t i = 0; i < snapshots.size(); ++i) snaps += (i ? "," : "") + format_number(snapshots[i]);
  return {
      {"regime", std::string(to_string(regime))},
      {"mode", std::string(to_string(mode))},
      {"spin", format_number(params.spin.value())},
      {"omega", format_number(params.omega)},
      {"epsilon", format_number(params.epsilon)},
      {"g", format_complex(params.g)},
      {"gprime", format_complex(params.gprime)},
      {"nboson", std::to_string(params.nboson)},
      {"delta", format_number(delta)},
      {"theta", format_number(theta)},
      {"phi", format_number(phi)},
      {"alpha", format_complex(alpha)},
      {"spin_state", spin_state},
      {"seed", std::to_string(seed)},
      {"tmax", format_number(t_max)},
      {"dt", format_number(dt)},
      {"fit_tmin", format_number(window.t_min)},
      {"fit_tmax", format_number(window.t_max)},
      {"snapshots", snaps},
      {"out", out},
      {"matrix", matrix_file},
      {"drift", drift_file},
      {"check_convergence", check_convergence ? "true" : "false"},
      {"sidecar", sidecar ? "true" : "false"},
  };
}

std::vector<std::pair<int, std::pair<std::string, std::string>>> read_config(std::istream& in) {
  std::vector<std::pair<int, std::pair<std::string, std::string>>> entries;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected key = value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "missing key");
    if (!seen.insert(key).second) throw ConfigError(line_no, "duplicate key '" + key + "'");
    entries.push_back({line_no, {std::move(key), std::move(value)}});
  }
  return entries;
}

ExperimentSpec build_spec(std::istream* config,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::vector<std::pair<int, std::pair<std::string, std::string>>> entries;
  if (config != nullptr) entries = read_config(*config);

  Regime regime = Regime::Chaotic;
  for (const auto& [line, kv] : entries) {
    if (kv.first != "regime") continue;
    try {
      regime = parse_regime(kv.second);
    } catch (const ConfigError& e) {
      throw ConfigError(line, e.what());
    }
  }
  for (const auto& [k, v] : overrides)
    if (k == "regime") regime = parse_regime(v);

  ExperimentSpec spec = ExperimentSpec::preset(regime);
  for (const auto& [line, kv] : entries) {
    if (kv.first == "regime") continue;
    try {
      spec.set(kv.first, kv.second);
    } catch (const ConfigError& e) {
      throw ConfigError(line, e.what());
    }
  }
  for (const auto& [k, v] : overrides)
    if (k != "regime") spec.set(k, v);
  spec.validate();
  return spec;
}

std::shared_ptr<const JCModel> ModelCache::model(const JCParams& params) {
  const std::string key = params_key(params);
  auto it = models_.find(key);
  if (it == models_.end()) it = models_.emplace(key, std::make_shared<const JCModel>(build_jc(params))).first;
  return it->second;
}

std::shared_ptr<const SpectralDecomposition> ModelCache::spectrum(const JCParams& params, double delta) {
  const std::string key = params_key(params) + "|" + format_number(delta);
  auto it = spectra_.find(key);
  if (it != spectra_.end()) return it->second;
  const auto m = model(params);
  auto spec = std::make_shared<const SpectralDecomposition>(
      delta == 0.0 ? diagonalize(m->hamiltonian) : diagonalize(m->hamiltonian + delta * m->perturbation));
  spectra_.emplace(key, spec);
  return spec;
}

std::vector<double> Table::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column " + std::string(name));
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

ProductInitialState initial_state(const ExperimentSpec& spec) {
  const int n1 = spec.params.spin.twice() + 1;
  QuantumState spin = spec.spin_state == "random" ? random_state(n1, spec.seed)
                                                  : su2_coherent(spec.theta, spec.phi, spec.params.spin);
  return ProductInitialState(std::move(spin), oscillator_coherent(spec.alpha, spec.params.nboson));
}

CorrelationRun run_correlations(const ExperimentSpec& spec, ModelCache& cache) {
  spec.validate();
  const auto model = cache.model(spec.params);
  const auto spec_h = cache.spectrum(spec.params, 0.0);
  const ProductInitialState initial = initial_state(spec);
  const CorrelationEvaluator eval(spec_h, model->perturbation, initial, spec.params.hbar);
  const std::vector<double> times = spec.times();

  CorrelationRun run;
  run.series = eval.series(times);

  // Small-t limits: C ~ t^2 Var(V), so C/t and D/t vanish and C/t^2 -> Var(V).
  const Vector& psi = initial.joint.amplitudes();
  const Vector vpsi = model->perturbation.matrix() * psi;
  const double var_v = vpsi.squaredNorm() - std::norm(psi.dot(vpsi));

  run.table.columns = {"t", "C", "D", "C/t", "D/t", "C/(2t)", "C/t^2"};
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    const double c = run.series.c[k];
    const double d = run.series.d[k];
    if (t == 0.0) {
      run.table.rows.push_back({t, c, d, 0.0, 0.0, 0.0, var_v});
    } else {
      run.table.rows.push_back({t, c, d, c / t, d / t, c / (2.0 * t), c / (t * t)});
    }
  }
  add_model_metadata(run.meta, spec);
  run.meta.emplace_back("var_v", format_number(var_v));
  add_fit_metadata(run.meta, spec, run.series, &run.fit);
  run.meta.emplace_back("columns", "t | C(t) | D(t) | C/t | D/t | C/(2t) | C/t^2; t=0 row holds the t->0 limits");
  return run;
}

RunResult run_echo(const ExperimentSpec& spec, ModelCache& cache) {
  spec.validate();
  const std::vector<double> times = spec.times();
  RunResult run;
  run.table.columns = {"t", "F2", "F4", "FP", "F2_pred", "FP_pred"};
  add_model_metadata(run.meta, spec);

  if (spec.delta == 0.0) {
    // The echo operator is the identity.
    for (double t : times) run.table.rows.push_back({t, 1.0, 1.0, 1.0, 1.0, 1.0});
  } else {
    const auto model = cache.model(spec.params);
    const auto spec_h = cache.spectrum(spec.params, 0.0);
    const auto spec_hd = cache.spectrum(spec.params, spec.delta);
    const ProductInitialState initial = initial_state(spec);
    const double hbar = spec.params.hbar;
    const EchoPropagator echo(spec_h, spec_hd, initial.joint, hbar);
    const CorrelationEvaluator eval(spec_h, model->perturbation, initial, hbar);
    const CorrelationSeries series = eval.series(times);
    const LinearResponse lr = linear_response_curves(series, spec.delta, hbar);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const QuantumState psi = echo.at(times[k]);
      const double f2 = fidelity(initial.joint, psi);
      const double fp = purity(partial_trace(psi, initial.space, Factor::First));
      run.table.rows.push_back({times[k], f2, f2 * f2, fp, lr.fidelity[k], lr.purity[k]});
    }
    add_fit_metadata(run.meta, spec, series, nullptr);
  }
  run.meta.emplace_back("saturation_estimate", format_number(1.0 / (spec.params.spin.twice() + 1)));
  run.meta.emplace_back("columns",
                        "t | |F|^2 | |F|^4 | F_P | 1 - delta^2 C / hbar^2 | 1 - 2 delta^2 (C - D) / hbar^2");
  return run;
}

WignerRun run_wigner(const ExperimentSpec& spec, ModelCache& cache) {
  spec.validate();
  const ProductInitialState initial = initial_state(spec);
  const double hbar = spec.params.hbar;
  std::unique_ptr<EchoPropagator> echo;
  if (spec.delta != 0.0) {
    echo = std::make_unique<EchoPropagator>(cache.spectrum(spec.params, 0.0),
                                            cache.spectrum(spec.params, spec.delta), initial.joint, hbar);
  }
  const SphereGrid grid = SphereGrid::for_spin(spec.params.spin);

  WignerRun run;
  run.table.columns = {"snapshot", "t", "quadrature_purity", "purity", "max_imag"};
  for (std::size_t k = 0; k < spec.snapshots.size(); ++k) {
    WignerSnapshot snap;
    snap.t = spec.snapshots[k];
    const QuantumState psi = echo ? echo->at(snap.t) : initial.joint;
    const ReducedDensityMatrix rho = partial_trace(psi, initial.space, Factor::First);
    snap.field = wigner_function(rho, spec.params.spin, grid);
    snap.purity = purity(rho);
    snap.quadrature_purity = snap.field.integrate_squared();
    run.table.rows.push_back(
        {static_cast<double>(k), snap.t, snap.quadrature_purity, snap.purity, snap.field.max_imag});
    run.snapshots.push_back(std::move(snap));
  }
  add_model_metadata(run.meta, spec);
  run.meta.emplace_back("grid", std::to_string(grid.thetas.size()) + "x" + std::to_string(grid.phis.size()) +
                                    " Gauss-Legendre(cos theta) x uniform phi");
  run.meta.emplace_back("snapshot_files", file_stem_path(spec.out) + "_snapNN.csv");
  run.meta.emplace_back("columns", "snapshot | t | integral of W^2 over the sphere | tr rho_1^2 | max |Im W|");
  return run;
}

RunResult run_semiclassical(const ExperimentSpec& spec) {
  spec.validate();
  const CovarianceMatrix a0(read_block_matrix_file(spec.matrix_file));
  RunResult run;
  run.meta.emplace_back("d1", std::to_string(a0.d1()));
  run.meta.emplace_back("d2", std::to_string(a0.d2()));
  run.meta.emplace_back("purity_a0", format_number(wavepacket_purity(a0)));
  run.table.columns = {"t", "FP", "FP_quadratic"};
  if (spec.drift_file.empty()) {
    run.table.rows.push_back({0.0, wavepacket_purity(a0), std::numeric_limits<double>::quiet_NaN()});
    run.meta.emplace_back("columns", "t | F_P(A) | (no drift given)");
    return run;
  }
  const BlockMatrix drift = read_block_matrix_file(spec.drift_file);
  if (drift.d1 != a0.d1() || drift.d2 != a0.d2()) throw ConfigError(0, "drift block sizes differ from matrix");
  if (!(spec.delta > 0.0)) throw ConfigError(0, "semiclassical decay needs delta > 0");
  const QuadraticDecay decay = quadratic_decay_constant(a0, drift.entries, spec.delta);
  run.meta.emplace_back("K", format_number(decay.k));
  run.meta.emplace_back("curvature", format_number(decay.curvature));
  run.meta.emplace_back("fd_step", format_number(decay.step));
  std::size_t invalid = 0;
  for (double t : spec.times()) {
    double fp = std::numeric_limits<double>::quiet_NaN();
    try {
      fp = wavepacket_purity(CovarianceMatrix(a0.d1(), a0.d2(), a0.matrix() + (t * spec.delta) * drift.entries));
    } catch (const std::exception&) {
      ++invalid;  // Im A left the positive cone, or M degenerated
    }
    const double x = decay.decays() ? t * spec.delta / decay.k : 0.0;
    run.table.rows.push_back({t, fp, 1.0 - x * x});
  }
  run.meta.emplace_back("invalid_points", std::to_string(invalid));
  run.meta.emplace_back("columns", "t | F_P(A0 + t delta B) | 1 - (t delta / K)^2");
  return run;
}

RunResult run(const ExperimentSpec& spec, ModelCache& cache, WignerRun* wigner) {
  auto once = [&](const ExperimentSpec& s, WignerRun* w) -> RunResult {
    switch (s.mode) {
      case Mode::Correlations: return run_correlations(s, cache);
      case Mode::Echo: return run_echo(s, cache);
      case Mode::Semiclassical: return run_semiclassical(s);
      case Mode::Wigner: {
        WignerRun r = run_wigner(s, cache);
        RunResult base{r.table, r.meta};
        if (w != nullptr) *w = std::move(r);
        return base;
      }
    }
    throw std::logic_error("unhandled mode");
  };

  RunResult result = once(spec, wigner);
  if (!spec.check_convergence || spec.mode == Mode::Semiclassical) {
    result.meta.emplace_back("converged", "unchecked");
    return result;
  }
  ExperimentSpec doubled = spec;
  doubled.params.nboson *= 2;
  WignerRun doubled_wigner;
  const RunResult reference = once(doubled, &doubled_wigner);
  double change = max_table_change(result.table, reference.table);
  if (wigner != nullptr && spec.mode == Mode::Wigner) {
    for (std::size_t k = 0; k < wigner->snapshots.size(); ++k) {
      change = std::max(change, max_abs(wigner->snapshots[k].field.values -
                                        doubled_wigner.snapshots[k].field.values));
    }
  }
  result.meta.emplace_back("converged", change <= kConvergenceThreshold ? "true" : "false");
  result.meta.emplace_back("convergence_nboson", std::to_string(doubled.params.nboson));
  result.meta.emplace_back("convergence_max_change", format_number(change));
  return result;
}

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const ExperimentSpec& spec, const RunResult& result) {
  write_header(out, spec, result.meta);
  write_body(out, result.table);
}

std::string snapshot_path(const std::string& index_path, std::size_t k) {
  char idx[16];
  std::snprintf(idx, sizeof idx, "%02zu", k);
  return file_stem_path(index_path) + "_snap" + idx + ".csv";
}

std::vector<std::string> write_outputs(const ExperimentSpec& spec, const RunResult& result,
                                       const WignerRun* wigner) {
  std::vector<std::string> written;
  {
    auto out = open_output(spec.out);
    write_csv(out, spec, result);
    written.push_back(spec.out);
  }
  if (wigner != nullptr) {
    for (std::size_t k = 0; k < wigner->snapshots.size(); ++k) {
      const WignerSnapshot& snap = wigner->snapshots[k];
      Metadata meta = {{"snapshot", std::to_string(k)},
                       {"t", format_number(snap.t)},
                       {"purity", format_number(snap.purity)},
                       {"quadrature_purity", format_number(snap.quadrature_purity)},
                       {"max_imag", format_number(snap.field.max_imag)},
                       {"columns", "theta | phi | W | W^2 | quadrature weight"}};
      Table table;
      table.columns = {"theta", "phi", "W", "W2", "weight"};
      const auto& g = snap.field.grid;
      for (Index i = 0; i < g.thetas.size(); ++i)
        for (Index j = 0; j < g.phis.size(); ++j) {
          const double w = snap.field.values(i, j);
          table.rows.push_back({g.thetas[i], g.phis[j], w, w * w, g.weights(i, j)});
        }
      const std::string path = snapshot_path(spec.out, k);
      auto out = open_output(path);
      write_header(out, spec, meta);
      write_body(out, table);
      written.push_back(path);
    }
  }
  if (spec.sidecar) {
    nlohmann::ordered_json j;
    j["mode"] = to_string(spec.mode);
    for (const auto& [k, v] : spec.config_echo()) j["config"][k] = v;
    for (const auto& [k, v] : result.meta) j["meta"][k] = v;
    j["columns"] = result.table.columns;
    const std::string path = file_stem_path(spec.out) + ".json";
    auto out = open_output(path);
    out << j.dump(2) << '\n';
    written.push_back(path);
  }
  return written;
}

}  // namespace jcecho
