#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "propimp/dataset.hpp"
#include "propimp/estimator.hpp"
#include "propimp/exact.hpp"
#include "propimp/forecast.hpp"
#include "propimp/simulate.hpp"

namespace propimp::io {

// Malformed or unreadable input; the CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal form, locale-independent ('.' separator always).
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << content;
}

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n\"");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n\"");
  return s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& token, const std::string& where) {
  const std::string t = trim(token);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw InputError("invalid number '" + token + "' in " + where);
  return v;
}

inline void check_unit(double x, double t, double t0, std::size_t row) {
  if (!(x > 0.0) || !(t > 0.0) || x + t > t0)
    throw InputError("unit " + std::to_string(row) +
                     " violates 0 < x, 0 < t, x + t <= t0");
}

}  // namespace detail

inline Family parse_family(const std::string& name) {
  const std::string n = detail::lower(name);
  if (n == "exponential" || n == "exp") return Family::exponential;
  if (n == "weibull" || n == "wei") return Family::weibull;
  throw InputError("unknown family '" + name + "' (expected exponential or weibull)");
}

inline Distribution make_distribution(Family family, const std::vector<double>& params) {
  if (family == Family::exponential) {
    if (params.size() != 1) throw InputError("exponential takes exactly one parameter (rate)");
    return Distribution::exponential(params[0]);
  }
  if (params.size() != 2) throw InputError("weibull takes exactly two parameters (shape, scale)");
  return Distribution::weibull(params[0], params[1]);
}

// JSON manifest: {"n_total": N, "t0": T, "units": [{"x": ..., "t": ...}, ...]}.
inline BatchDataset read_dataset_json(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("n_total") || !j.contains("t0") || !j.contains("units"))
    throw InputError(path + ": manifest needs n_total, t0 and units");
  if (!j["n_total"].is_number_integer() || j["n_total"].get<long>() < 1)
    throw InputError(path + ": n_total must be a positive integer");
  const int n_total = j["n_total"].get<int>();
  const double t0 = j["t0"].get<double>();
  if (!(t0 > 0.0)) throw InputError(path + ": t0 must be positive");
  if (!j["units"].is_array()) throw InputError(path + ": units must be an array");
  if (j["units"].size() > static_cast<std::size_t>(n_total))
    throw InputError(path + ": more units than n_total");
  std::vector<ObservedPair> units;
  std::size_t row = 0;
  for (const auto& u : j["units"]) {
    ++row;
    if (!u.is_object() || !u.contains("x") || !u.contains("t"))
      throw InputError(path + ": unit " + std::to_string(row) + " needs fields x and t");
    const double x = u["x"].get<double>();
    const double t = u["t"].get<double>();
    detail::check_unit(x, t, t0, row);
    units.push_back({x, t});
  }
  return BatchDataset(n_total, t0, std::move(units));
}

// Bare CSV with a case-insensitive "x,t" (or "t,x") header; batch size and
// horizon come from the caller since the file cannot carry them.
inline BatchDataset read_dataset_csv(const std::string& path, int n_total, double t0) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  std::size_t comma = line.find(',');
  if (comma == std::string::npos) throw InputError(path + ": header must be 'x,t'");
  const std::string h0 = detail::lower(detail::trim(line.substr(0, comma)));
  const std::string h1 = detail::lower(detail::trim(line.substr(comma + 1)));
  int x_col;
  if (h0 == "x" && h1 == "t")
    x_col = 0;
  else if (h0 == "t" && h1 == "x")
    x_col = 1;
  else
    throw InputError(path + ": header must be 'x,t' (case-insensitive)");

  std::vector<ObservedPair> units;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    comma = line.find(',');
    if (comma == std::string::npos)
      throw InputError(path + ": row " + std::to_string(row) + " needs two columns");
    const std::string where = path + " row " + std::to_string(row);
    const double a = detail::parse_number(line.substr(0, comma), where);
    const double b = detail::parse_number(line.substr(comma + 1), where);
    const double x = x_col == 0 ? a : b;
    const double t = x_col == 0 ? b : a;
    detail::check_unit(x, t, t0, row);
    units.push_back({x, t});
  }
  if (units.size() > static_cast<std::size_t>(n_total))
    throw InputError(path + ": more rows than n_total");
  return BatchDataset(n_total, t0, std::move(units));
}

// Dispatch on extension; CSV needs the batch size and horizon flags.
inline BatchDataset read_dataset(const std::string& path, std::optional<int> n_total,
                                 std::optional<double> t0) {
  const std::string p = detail::lower(path);
  if (p.size() >= 4 && p.substr(p.size() - 4) == ".csv") {
    if (!n_total || !t0) throw InputError("CSV input requires --n-total and --t0");
    return read_dataset_csv(path, *n_total, *t0);
  }
  return read_dataset_json(path);
}

inline nlohmann::json dataset_to_json(const BatchDataset& ds) {
  nlohmann::json units = nlohmann::json::array();
  for (const auto& u : ds.observed()) units.push_back({{"x", u.x}, {"t", u.t}});
  return {{"n_total", ds.n_total()}, {"t0", ds.horizon()}, {"units", units}};
}

inline nlohmann::json distribution_to_json(const Distribution& d) {
  nlohmann::json params;
  for (std::size_t i = 0; i < d.n_params(); ++i) params[d.param_name(i)] = d.param(i);
  return {{"family", family_name(d.family())}, {"params", params}};
}

inline nlohmann::json estimate_to_json(const MarginEstimate& e) {
  const Distribution point = e.to_distribution();
  nlohmann::json params;
  for (std::size_t i = 0; i < e.params.size(); ++i)
    params[point.param_name(i)] = {{"mean", e.params[i].mean}, {"sd", e.params[i].sd}};
  return {{"family", family_name(e.family)}, {"params", params}};
}

inline nlohmann::json config_to_json(const EstimatorConfig& c, Family fx, Family ft,
                                     bool rescale) {
  return {{"iterations", c.iterations}, {"burn_in", c.burn_in},       {"p", c.lag},
          {"epsilon", c.epsilon},       {"seed", c.seed},             {"family_x", family_name(fx)},
          {"family_t", family_name(ft)}, {"rescale", rescale}};
}

inline nlohmann::json report_to_json(const FitResult& r, const EstimatorConfig& c, Family fx,
                                     Family ft, bool rescale, int n_observed) {
  nlohmann::json j;
  j["config"] = config_to_json(c, fx, ft, rescale);
  j["n_observed"] = n_observed;
  j["initial_estimates"] = {{"x", distribution_to_json(r.initial_x)},
                            {"t", distribution_to_json(r.initial_t)}};
  j["estimates"] = {{"x", estimate_to_json(r.estimate_x)}, {"t", estimate_to_json(r.estimate_t)}};
  j["average_imputations"] = r.average_imputations;
  if (r.convergence_iteration)
    j["convergence_iteration"] = *r.convergence_iteration;
  else
    j["convergence_iteration"] = nullptr;
  j["failed_iterations"] = r.failed_iterations;
  return j;
}

inline std::string trajectories_csv(const FitResult& r) {
  std::ostringstream out;
  const Distribution px = r.estimate_x.to_distribution();
  const Distribution pt = r.estimate_t.to_distribution();
  out << "iteration";
  for (std::size_t i = 0; i < px.n_params(); ++i) out << ",x." << px.param_name(i);
  for (std::size_t i = 0; i < pt.n_params(); ++i) out << ",t." << pt.param_name(i);
  out << ",n_imputed\r\n";
  for (std::size_t it = 0; it < r.trajectory_x.size(); ++it) {
    out << (it + 1);
    for (double v : r.trajectory_x[it]) out << ',' << format_double(v);
    for (double v : r.trajectory_t[it]) out << ',' << format_double(v);
    out << ',' << r.imputations[it] << "\r\n";
  }
  return out.str();
}

inline nlohmann::json experiment_to_json(const ExperimentSpec& spec,
                                         const ExperimentReport& report) {
  nlohmann::json j;
  j["spec"] = {{"x", distribution_to_json(spec.dist_x)},
               {"t", distribution_to_json(spec.dist_t)},
               {"n_total", spec.n_total},
               {"t0", spec.t0},
               {"replications", spec.replications},
               {"seed", spec.base_seed},
               {"config", config_to_json(spec.config, spec.dist_x.family(), spec.dist_t.family(),
                                         false)}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.replications) {
    nlohmann::json row;
    row["C"] = r.n_observed;
    row["D"] = r.n_installed_surviving;
    row["B"] = r.n_not_installed;
    row["initial"] = {{"x", r.initial_x}, {"t", r.initial_t}};
    row["estimates"] = {{"x", estimate_to_json(r.estimate_x)},
                        {"t", estimate_to_json(r.estimate_t)}};
    row["average_imputations"] = r.average_imputations;
    row["convergence_iteration"] =
        r.convergence_iteration ? nlohmann::json(*r.convergence_iteration) : nlohmann::json(nullptr);
    row["wall_seconds"] = r.wall_seconds;
    if (r.exact)
      row["exact_iid_exponential"] = {{"rate", r.exact->rate}, {"sd", r.exact->asymptotic_sd}};
    rows.push_back(std::move(row));
  }
  j["replications"] = rows;
  auto stats = [](const std::vector<ParamStats>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : v) a.push_back({{"mean", p.mean}, {"sd", p.sd}});
    return a;
  };
  j["aggregate"] = {{"fitted_x", stats(report.fitted_x)},
                    {"fitted_t", stats(report.fitted_t)},
                    {"initial_x", stats(report.initial_x)},
                    {"initial_t", stats(report.initial_t)},
                    {"mean_average_imputations", report.mean_average_imputations}};
  return j;
}

// Grid CSV: first row is the second-axis values after an empty corner cell,
// first column is the first-axis values, body is log-likelihood.
inline std::string surface_csv(const SurfaceGrid& grid) {
  std::ostringstream out;
  for (double v : grid.axis2) out << ',' << format_double(v);
  out << "\r\n";
  for (std::size_t i = 0; i < grid.axis1.size(); ++i) {
    out << format_double(grid.axis1[i]);
    for (double v : grid.loglik[i]) out << ',' << format_double(v);
    out << "\r\n";
  }
  return out.str();
}

inline std::string curves_csv(const std::vector<ForecastCurve>& curves) {
  std::ostringstream out;
  out << "time";
  for (const auto& c : curves) out << ',' << (c.label.empty() ? "expected" : c.label);
  out << "\r\n";
  if (curves.empty()) return out.str();
  for (std::size_t i = 0; i < curves.front().times.size(); ++i) {
    out << format_double(curves.front().times[i]);
    for (const auto& c : curves) out << ',' << format_double(c.expected[i]);
    out << "\r\n";
  }
  return out.str();
}

inline std::string rolling_csv(const RollingForecast& rolling) {
  std::ostringstream out;
  out << "horizon,observed,imputed,truncated\r\n";
  for (std::size_t j = 0; j < rolling.horizons.size(); ++j) {
    const auto& rec = rolling.records[j];
    if (rec.skipped) continue;
    out << format_double(rolling.horizons[j]) << ',' << rolling.realized[j] << ','
        << format_double(rec.imputed_curve.expected[j]) << ','
        << format_double(rec.truncated_curve.expected[j]) << "\r\n";
  }
  return out.str();
}

}  // namespace propimp::io
