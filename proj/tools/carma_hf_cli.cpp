// carma-hf: command-line front end for the carma_hf library.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "carma_hf/carma_hf.hpp"
#include "model_file.hpp"

namespace {

using namespace carma_hf;
using nlohmann::json;

enum ExitCode { exit_ok = 0, exit_io = 1, exit_validation = 2, exit_numeric = 3 };

using Cell = std::variant<std::monostate, double, long long, std::string>;

struct Document {
  std::string command;
  RawModel model;
  std::optional<double> delta;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  json extra = json::object();
};

struct OutputOptions {
  std::string format = "csv";
  bool timestamp = true;
};

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(const std::string& s) const { return csv_field(s); }
  } visitor;
  return std::visit(visitor, c);
}

json cell_json(const Cell& c) {
  struct {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(double v) const { return std::isfinite(v) ? json(v) : json(format_number(v)); }
    json operator()(long long v) const { return v; }
    json operator()(const std::string& s) const { return s; }
  } visitor;
  return std::visit(visitor, c);
}

std::string model_echo(const RawModel& m) {
  auto list = [](const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_number(v[i]);
    return out + "]";
  };
  std::string echo = "a=" + list(m.a) + ";b=" + list(m.b) + ";sigma2=" + format_number(m.sigma2);
  return m.label.empty() ? echo : m.label + ";" + echo;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit(const Document& doc, const OutputOptions& out) {
  const std::string stamp = out.timestamp ? utc_timestamp() : "";
  if (out.format == "json") {
    json j;
    j["command"] = doc.command;
    j["version"] = carma_hf::version;
    j["model"] = cli::model_to_json(doc.model);
    j["delta"] = doc.delta ? json(*doc.delta) : json(nullptr);
    j["columns"] = doc.columns;
    json rows = json::array();
    for (const auto& r : doc.rows) {
      json row = json::array();
      for (const auto& c : r) row.push_back(cell_json(c));
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    for (const auto& [k, v] : doc.extra.items()) j[k] = v;
    if (out.timestamp) j["timestamp"] = stamp;
    std::cout << j.dump(2) << '\n';
    return;
  }
  const bool own_delta = std::find(doc.columns.begin(), doc.columns.end(), "delta") != doc.columns.end();
  std::string header;
  for (const auto& c : doc.columns) header += (header.empty() ? "" : ",") + c;
  if (!own_delta) header += ",delta";
  header += ",model,version";
  if (out.timestamp) header += ",timestamp";
  std::cout << header << '\n';
  const std::string tail = csv_field(model_echo(doc.model)) + "," + carma_hf::version + (out.timestamp ? "," + stamp : "");
  for (const auto& r : doc.rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) line += (i ? "," : "") + cell_text(r[i]);
    if (!own_delta) line += "," + (doc.delta ? format_number(*doc.delta) : std::string());
    std::cout << line << ',' << tail << '\n';
  }
}

struct ModelArgs {
  std::string path;
  double coprime_tol = default_coprime_tolerance;
};

struct Loaded {
  RawModel raw;
  CarmaModel model;
};

Loaded load(const ModelArgs& args) {
  RawModel raw = cli::load_model_file(args.path);
  ValidationPolicy policy;
  policy.coprime_tolerance = args.coprime_tol;
  CarmaModel model = validate(raw, policy);
  return {std::move(raw), std::move(model)};
}

double max_root_modulus(const CarmaModel& m) {
  double worst = 0;
  for (const auto& r : m.roots()) worst = std::max(worst, std::abs(r.value));
  return worst;
}

double min_root_real(const CarmaModel& m) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : m.roots()) best = std::min(best, std::abs(r.value.real()));
  return best;
}

std::vector<double> omega_grid(int points) {
  std::vector<double> w(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) w[static_cast<std::size_t>(k)] = -std::numbers::pi + 2 * std::numbers::pi * k / (points - 1);
  w.front() = -std::numbers::pi;
  w.back() = std::numbers::pi;
  return w;
}

// ---- acvf -------------------------------------------------------------------

struct AcvfArgs {
  double delta = 0;
  int lags = -1;
  std::string mode = "exact";
};

Document cmd_acvf(const ModelArgs& margs, const AcvfArgs& args) {
  auto [raw, model] = load(margs);
  const SamplingGrid grid(args.delta);
  const int max_lag = args.lags >= 0 ? args.lags : model.p() - 1;
  Document doc{"acvf", raw, args.delta, {"lag", "gamma", "mode"}, {}};
  for (int n = 0; n <= max_lag; ++n) {
    double value = 0.0;  // identically zero beyond lag p-1
    if (n < model.p())
      value = args.mode == "exact" ? acvf_filtered(model, grid, n) : gamma_ma_asymptotic(model, grid, n);
    doc.rows.push_back({static_cast<long long>(n), value, args.mode});
  }
  return doc;
}

// ---- spectrum ---------------------------------------------------------------

struct SpectrumArgs {
  std::optional<double> delta;
  std::string which = "filtered";
  int grid_points = 1001;
  std::optional<double> omega_max;
};

/// Half-width for the continuous spectrum: wide enough that the two-sided tail
/// sigma2 b_q^2 / (pi (2d-1) W^{2d-1}) stays below 3e-5 gamma_Y(0), narrow
/// enough that the grid step resolves the slowest pole, and never below
/// 10 max|lambda|.
double auto_omega_max(const CarmaModel& m, int points) {
  const int d = m.order_gap();
  const double bq = m.b_coeffs().back();
  const double tail_width =
      std::pow(m.sigma2() * bq * bq / (std::numbers::pi * (2 * d - 1) * 3e-5 * acvf_continuous(m, 0.0)), 1.0 / (2 * d - 1));
  const double resolved_width = 0.25 * min_root_real(m) * (points - 1) / 2;
  return std::max(10 * max_root_modulus(m), std::min(tail_width, resolved_width));
}

Document cmd_spectrum(const ModelArgs& margs, const SpectrumArgs& args) {
  auto [raw, model] = load(margs);
  Document doc{"spectrum", raw, args.delta, {"omega", "f", "which"}, {}};
  if (args.which == "continuous") {
    const double w_max = args.omega_max ? *args.omega_max : auto_omega_max(model, args.grid_points);
    doc.extra["omega_max"] = w_max;
    for (int k = 0; k < args.grid_points; ++k) {
      const double w = k == args.grid_points - 1 ? w_max : -w_max + 2 * w_max * k / (args.grid_points - 1);
      doc.rows.push_back({w, spectral_density_continuous(model, w), args.which});
    }
    return doc;
  }
  if (!args.delta) throw Error(ErrorCode::invalid_argument, "--delta is required for --which " + args.which);
  const SamplingGrid grid(*args.delta);
  const auto omegas = omega_grid(args.grid_points);
  std::vector<double> values;
  if (args.which == "sampled") values = spectral_density_sampled(model, grid, omegas);
  if (args.which == "filtered") values = spectral_density_filtered(model, grid, omegas);
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    Cell value;
    if (args.which == "asymptotic") {
      if (std::abs(1.0 - std::cos(omegas[k])) > omega_exclusion) value = f_ma_asymptotic(model, grid, omegas[k]);
    } else {
      value = values[k];
    }
    doc.rows.push_back({omegas[k], value, args.which});
  }
  return doc;
}

// ---- sampled-arma -----------------------------------------------------------

Document cmd_sampled_arma(const ModelArgs& margs, double delta) {
  auto [raw, model] = load(margs);
  const auto arma = sampled_arma(model, SamplingGrid(delta));
  Document doc{"sampled-arma", raw, delta, {"component", "index", "value", "residual"}, {}};
  for (std::size_t k = 0; k < arma.phi.A.size(); ++k)
    doc.rows.push_back({std::string("phi"), static_cast<long long>(k), arma.phi.A[k], arma.residual});
  for (std::size_t k = 0; k < arma.theta.size(); ++k)
    doc.rows.push_back({std::string("theta"), static_cast<long long>(k + 1), arma.theta[k], arma.residual});
  doc.rows.push_back({std::string("tau2"), std::monostate{}, arma.tau2, arma.residual});
  doc.extra["boundary_roots"] = arma.boundary_roots;
  return doc;
}

// ---- validate ---------------------------------------------------------------

struct ValidateArgs {
  std::string sweep = "1e-1:1e-3:0.1";
  std::uint64_t seed = 20240601;
  int paths = 4;
  int length = 200000;
};

inline constexpr double ratio_tolerance = 0.02;
inline constexpr double regime_bound = 0.005;  // Δ max|λ| at which the ratio gate applies

std::vector<double> parse_sweep(const std::string& text) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = text.find(':', start);
    const std::string piece = text.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--delta-sweep", "cannot parse '" + piece + "' in '" + text + "'");
    }
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3) throw CLI::ValidationError("--delta-sweep", "expected start:stop:factor");
  const double first = parts[0], last = parts[1], factor = parts[2];
  if (!(first > 0) || !(last > 0) || !(factor > 0) || factor == 1.0 || (last < first) != (factor < 1.0))
    throw CLI::ValidationError("--delta-sweep", "start, stop > 0 and factor must move start towards stop");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    double d = first * std::pow(factor, k);
    if (factor < 1 ? d < last * (1 - 1e-9) : d > last * (1 + 1e-9)) break;
    // drop the trailing rounding noise of the repeated product (0.010000000000000002)
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", d);
    out.push_back(std::strtod(buf, nullptr));
  }
  return out;
}

struct CheckRow {
  std::string check;
  double delta;
  std::string point;
  double measured;
  double tolerance;
  std::string status;
};

Document cmd_validate(const ModelArgs& margs, const ValidateArgs& args, bool& all_pass) {
  auto [raw, model] = load(margs);
  const auto deltas = parse_sweep(args.sweep);
  const int p = model.p();
  const double scale = max_root_modulus(model);
  std::vector<CheckRow> rows;
  auto in_regime = [&](double d) { return d * scale <= regime_bound; };

  const std::vector<std::pair<std::string, double>> omegas{
      {"omega=pi/4", std::numbers::pi / 4}, {"omega=pi/2", std::numbers::pi / 2}, {"omega=pi", std::numbers::pi}};

  // |ratio - 1| per Δ for every lag and frequency, computed in parallel and
  // reported in sweep order.
  struct PerDelta {
    std::vector<double> lag_err, omega_err;
    double extended_ratio = 0;
    double residual = 0;
  };
  const auto per_delta = parallel_map(deltas.size(), [&](std::size_t i) {
    const SamplingGrid grid(deltas[i]);
    PerDelta r;
    double g0 = 0;
    for (int n = 0; n < p; ++n) {
      const double exact = acvf_filtered(model, grid, n);
      if (n == 0) g0 = exact;
      r.lag_err.push_back(std::abs(exact / gamma_ma_asymptotic(model, grid, n) - 1));
    }
    for (const auto& [name, w] : omegas)
      r.omega_err.push_back(std::abs(spectral_density_filtered(model, grid, w) / f_ma_asymptotic(model, grid, w) - 1));
    r.extended_ratio = std::max(std::abs(acvf_filtered_extended(model, grid, p)),
                                std::abs(acvf_filtered_extended(model, grid, p + 1))) /
                       g0;
    r.residual = sampled_arma(model, grid).residual;
    return r;
  });

  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double d = deltas[i];
    const std::string gate = in_regime(d) ? "" : "warning";
    for (int n = 0; n < p; ++n) {
      const double e = per_delta[i].lag_err[static_cast<std::size_t>(n)];
      rows.push_back({"acvf_asymptotic_ratio", d, "lag=" + std::to_string(n), e, ratio_tolerance,
                      gate.empty() ? (e <= ratio_tolerance ? "pass" : "fail") : gate});
    }
    for (std::size_t k = 0; k < omegas.size(); ++k) {
      const double e = per_delta[i].omega_err[k];
      rows.push_back({"spectrum_asymptotic_ratio", d, omegas[k].first, e, ratio_tolerance,
                      gate.empty() ? (e <= ratio_tolerance ? "pass" : "fail") : gate});
    }
    rows.push_back({"extended_lag_vanishes", d, "lags=p,p+1", per_delta[i].extended_ratio, 1e-9,
                    per_delta[i].extended_ratio <= 1e-9 ? "pass" : "fail"});
    rows.push_back({"factorization_residual", d, "all lags", per_delta[i].residual, 1e-8,
                    per_delta[i].residual < 1e-8 ? "pass" : "fail"});
    if (i > 0) {
      // convergence: the error at the finer Δ must be smaller than at the coarser one
      const bool finer_first = d < deltas[i - 1];
      const auto& fine = per_delta[finer_first ? i : i - 1];
      const auto& coarse = per_delta[finer_first ? i - 1 : i];
      const double fine_delta = std::min(d, deltas[i - 1]);
      const std::string mgate = in_regime(fine_delta) ? "" : "warning";
      for (int n = 0; n < p; ++n) {
        const double e = fine.lag_err[static_cast<std::size_t>(n)], c = coarse.lag_err[static_cast<std::size_t>(n)];
        rows.push_back({"acvf_ratio_monotone", fine_delta, "lag=" + std::to_string(n), e, c,
                        mgate.empty() ? (e < c ? "pass" : "fail") : mgate});
      }
      for (std::size_t k = 0; k < omegas.size(); ++k) {
        const double e = fine.omega_err[k], c = coarse.omega_err[k];
        rows.push_back({"spectrum_ratio_monotone", fine_delta, omegas[k].first, e, c,
                        mgate.empty() ? (e < c ? "pass" : "fail") : mgate});
      }
    }
  }

  // Monte Carlo at the coarsest sweep point: pooled empirical filtered
  // autocovariances against the exact values (zero beyond lag p-1).
  const double mc_delta = *std::max_element(deltas.begin(), deltas.end());
  const SamplingGrid mc_grid(mc_delta);
  const auto sims = simulate_gaussian_exact_paths(model, mc_grid, static_cast<std::size_t>(args.length), args.seed,
                                                  static_cast<std::size_t>(args.paths));
  const std::size_t max_lag = static_cast<std::size_t>(p) + 1;
  std::vector<double> mean(max_lag + 1, 0.0), var(max_lag + 1, 0.0);
  for (const auto& s : sims) {
    const auto e = empirical_filtered_acvf(s, model, max_lag);
    for (std::size_t h = 0; h <= max_lag; ++h) {
      mean[h] += e.values[h] / args.paths;
      var[h] += e.standard_errors[h] * e.standard_errors[h] / (static_cast<double>(args.paths) * args.paths);
    }
  }
  for (std::size_t h = 0; h <= max_lag; ++h) {
    const double exact = h < static_cast<std::size_t>(p) ? acvf_filtered(model, mc_grid, static_cast<int>(h)) : 0.0;
    const double z = std::abs(mean[h] - exact) / std::sqrt(var[h]);
    rows.push_back({"monte_carlo_acvf", mc_delta, "lag=" + std::to_string(h), z, 4.0, z <= 4.0 ? "pass" : "fail"});
  }

  Document doc{"validate", raw, std::nullopt, {"check", "delta", "point", "measured", "tolerance", "status"}, {}};
  all_pass = true;
  for (const auto& r : rows) {
    if (r.status == "fail") all_pass = false;
    doc.rows.push_back({r.check, r.delta, r.point, r.measured, r.tolerance, r.status});
  }
  doc.extra["seed"] = args.seed;
  doc.extra["paths"] = args.paths;
  doc.extra["length"] = args.length;
  doc.extra["delta_sweep"] = args.sweep;
  doc.extra["passed"] = all_pass;
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-frequency sampled structure of Levy-driven CARMA(p,q) processes"};
  app.set_version_flag("--version", std::string(carma_hf::version));
  app.require_subcommand(1);

  ModelArgs margs;
  OutputOptions out;
  bool no_timestamp = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("model", margs.path, "Model spec JSON file")->required();
    sub->add_option("--format", out.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--no-timestamp", no_timestamp, "Omit the timestamp field");
    sub->add_option("--coprime-tol", margs.coprime_tol,
                    "Common-zero tolerance for a(z), b(z); 0 disables the check");
  };

  AcvfArgs acvf;
  auto* acvf_cmd = app.add_subcommand("acvf", "Autocovariances of the filtered sampled sequence");
  common(acvf_cmd);
  acvf_cmd->add_option("--delta", acvf.delta, "Grid spacing")->required()->check(CLI::PositiveNumber);
  acvf_cmd->add_option("--lags", acvf.lags, "Largest lag (default p-1)")->check(CLI::NonNegativeNumber);
  acvf_cmd->add_option("--mode", acvf.mode, "exact or asymptotic")->check(CLI::IsMember({"exact", "asymptotic"}));

  SpectrumArgs spec;
  auto* spec_cmd = app.add_subcommand("spectrum", "Spectral density on a frequency grid");
  common(spec_cmd);
  spec_cmd->add_option("--delta", spec.delta, "Grid spacing")->check(CLI::PositiveNumber);
  spec_cmd->add_option("--which", spec.which, "continuous, sampled, filtered or asymptotic")
      ->check(CLI::IsMember({"continuous", "sampled", "filtered", "asymptotic"}));
  spec_cmd->add_option("--grid-points", spec.grid_points, "Number of frequencies")->check(CLI::Range(2, 100000000));
  spec_cmd->add_option("--omega-max", spec.omega_max, "Half-width of the continuous window (default: automatic)")
      ->check(CLI::PositiveNumber);

  double arma_delta = 0;
  auto* arma_cmd = app.add_subcommand("sampled-arma", "ARMA(p, p-1) representation of the sampled sequence");
  common(arma_cmd);
  arma_cmd->add_option("--delta", arma_delta, "Grid spacing")->required()->check(CLI::PositiveNumber);

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "Exact/asymptotic and Monte Carlo consistency checks");
  common(val_cmd);
  val_cmd->add_option("--delta-sweep", val.sweep, "start:stop:factor");
  val_cmd->add_option("--seed", val.seed, "Random seed");
  val_cmd->add_option("--paths", val.paths, "Monte Carlo paths")->check(CLI::Range(1, 1000000));
  val_cmd->add_option("--length", val.length, "Samples per path")->check(CLI::Range(1, 1000000000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_io;
  }
  out.timestamp = !no_timestamp;

  try {
    if (*acvf_cmd) emit(cmd_acvf(margs, acvf), out);
    if (*spec_cmd) emit(cmd_spectrum(margs, spec), out);
    if (*arma_cmd) emit(cmd_sampled_arma(margs, arma_delta), out);
    if (*val_cmd) {
      bool all_pass = false;
      emit(cmd_validate(margs, val, all_pass), out);
      if (!all_pass) {
        std::cerr << "carma-hf: validate: one or more checks failed\n";
        return exit_numeric;
      }
    }
  } catch (const cli::IoError& e) {
    std::cerr << "carma-hf: " << e.what() << '\n';
    return exit_io;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "carma-hf: " << e.what() << '\n';
    return exit_io;
  } catch (const Error& e) {
    std::cerr << "carma-hf: " << e.what() << '\n';
    return is_validation_error(e.code()) ? exit_validation : exit_numeric;
  } catch (const std::exception& e) {
    std::cerr << "carma-hf: " << e.what() << '\n';
    return exit_numeric;
  }
  return exit_ok;
}
