// propimp: batch reliability estimation under ambiguous censoring.
//
// Subcommands: fit, simulate, exact, forecast. All randomness flows from
// --seed; repeated runs with the same flags produce byte-identical output.
// Exit codes: 0 success, 2 malformed input, 3 estimation failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "propimp/io.hpp"
#include "propimp/propimp.hpp"

namespace {

using namespace propimp;

struct ConfigFlags {
  int iterations = 1000;
  int burn_in = 100;
  int lag = 5;
  double epsilon = 5e-4;
  std::uint64_t seed = 1;

  void attach(CLI::App* cmd, bool with_seed = true) {
    cmd->add_option("--iterations", iterations, "Imputation iterations to run");
    cmd->add_option("--burn-in", burn_in, "Leading iterations excluded from the statistics");
    cmd->add_option("--p", lag, "Lag of the relative-change convergence diagnostic");
    cmd->add_option("--epsilon", epsilon, "Tolerance of the convergence diagnostic");
    if (with_seed) cmd->add_option("--seed", seed, "Root seed; the only source of randomness");
  }

  EstimatorConfig to_config() const { return {iterations, burn_in, lag, epsilon, seed}; }
};

void emit(const std::optional<std::string>& out_path, const std::string& content) {
  if (out_path)
    io::write_file(*out_path, content);
  else
    std::cout << content;
}

std::vector<double> split_params(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string tok = csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    out.push_back(io::detail::parse_number(tok, "parameter list"));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<double> parse_times(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    const std::size_t c1 = spec.find(':');
    const std::size_t c2 = spec.find(':', c1 + 1);
    if (c2 == std::string::npos) throw io::InputError("--times range must be start:stop:step");
    const double start = io::detail::parse_number(spec.substr(0, c1), "--times");
    const double stop = io::detail::parse_number(spec.substr(c1 + 1, c2 - c1 - 1), "--times");
    const double step = io::detail::parse_number(spec.substr(c2 + 1), "--times");
    if (!(step > 0.0) || stop < start) throw io::InputError("--times range must be increasing");
    for (double t = start; t <= stop + 0.5 * step; t += step) out.push_back(std::min(t, stop));
    return out;
  }
  out = split_params(spec);
  return out;
}

// Axis form: x.rate=lo:hi:n or t.shape=lo:hi:n etc.
AxisSpec parse_axis(const std::string& token, const Distribution& base_x,
                    const Distribution& base_t) {
  const std::size_t eq = token.find('=');
  const std::size_t dot = token.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw io::InputError("grid axis must look like x.rate=lo:hi:n");
  const std::string margin = token.substr(0, dot);
  const std::string pname = token.substr(dot + 1, eq - dot - 1);
  AxisSpec axis;
  if (margin == "x")
    axis.margin = MarginSide::installation;
  else if (margin == "t")
    axis.margin = MarginSide::failure;
  else
    throw io::InputError("grid axis margin must be x or t");
  const Distribution& base = axis.margin == MarginSide::installation ? base_x : base_t;
  bool found = false;
  for (std::size_t i = 0; i < base.n_params(); ++i)
    if (pname == base.param_name(i)) {
      axis.param_index = i;
      found = true;
    }
  if (!found)
    throw io::InputError("margin " + margin + " has no parameter named '" + pname + "'");
  const std::string range = token.substr(eq + 1);
  const std::size_t c1 = range.find(':');
  const std::size_t c2 = range.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw io::InputError("grid axis range must be lo:hi:n");
  const double lo = io::detail::parse_number(range.substr(0, c1), "--grid");
  const double hi = io::detail::parse_number(range.substr(c1 + 1, c2 - c1 - 1), "--grid");
  const long n = static_cast<long>(io::detail::parse_number(range.substr(c2 + 1), "--grid"));
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw io::InputError("grid axis range must be positive");
  for (long i = 0; i < n; ++i)
    axis.values.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
  return axis;
}

int run(int argc, char** argv) {
  CLI::App app{"Batch reliability estimation under ambiguous censoring"};
  app.require_subcommand(1);

  // ---- fit ----
  auto* fit_cmd = app.add_subcommand("fit", "Fit installation/failure distributions to a dataset");
  std::string fit_path;
  std::string fit_family_x = "exponential", fit_family_t = "exponential";
  std::optional<int> fit_n_total;
  std::optional<double> fit_t0;
  bool fit_rescale = false;
  std::optional<std::string> fit_out, fit_traj;
  ConfigFlags fit_flags;
  fit_cmd->add_option("dataset", fit_path, "Dataset manifest (.json) or bare CSV (.csv)")->required();
  fit_cmd->add_option("--family-x", fit_family_x, "Installation family: exponential|weibull");
  fit_cmd->add_option("--family-t", fit_family_t, "Failure family: exponential|weibull");
  fit_cmd->add_option("--n-total", fit_n_total, "Batch size (required for CSV input)");
  fit_cmd->add_option("--t0", fit_t0, "Study horizon (required for CSV input)");
  fit_cmd->add_flag("--rescale", fit_rescale,
                    "Fit on standard-deviation rescaled data; reported parameters are always "
                    "back-transformed to the original scale");
  fit_cmd->add_option("--out", fit_out, "Write the JSON report here instead of stdout");
  fit_cmd->add_option("--trajectories", fit_traj, "Also write per-iteration trajectories CSV here");
  fit_flags.attach(fit_cmd);

  // ---- simulate ----
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic batch (optionally fit it)");
  std::string sim_family_x = "exponential", sim_family_t = "exponential";
  std::string sim_params_x, sim_params_t;
  int sim_n = 200;
  double sim_t0 = 6.0;
  std::uint64_t sim_seed = 1;
  int sim_replications = 1;
  bool sim_fit = false;
  std::optional<std::string> sim_out, sim_report_out;
  ConfigFlags sim_flags;
  sim_cmd->add_option("--family-x", sim_family_x, "Installation family");
  sim_cmd->add_option("--params-x", sim_params_x, "Installation parameters, comma-separated")->required();
  sim_cmd->add_option("--family-t", sim_family_t, "Failure family");
  sim_cmd->add_option("--params-t", sim_params_t, "Failure parameters, comma-separated")->required();
  sim_cmd->add_option("--n", sim_n, "Batch size");
  sim_cmd->add_option("--t0", sim_t0, "Study horizon");
  sim_cmd->add_option("--seed", sim_seed, "Root seed for the batch draw");
  sim_cmd->add_option("--replications", sim_replications,
                      "With --fit: run a replicated experiment and report aggregates");
  sim_cmd->add_flag("--fit", sim_fit, "Chain the generated dataset into fit");
  sim_cmd->add_option("--out", sim_out, "Write the dataset JSON here");
  sim_cmd->add_option("--report-out", sim_report_out, "Write the fit/experiment report here");
  sim_flags.attach(sim_cmd, false);  // --seed above drives the batch and the chained fit

  // ---- exact ----
  auto* exact_cmd = app.add_subcommand("exact", "Exact-likelihood baseline tools");
  std::string exact_path;
  bool exact_iid = false, exact_surface = false;
  std::string exact_grid;
  std::string exact_family_x = "exponential", exact_family_t = "exponential";
  std::string exact_params_x, exact_params_t;
  std::optional<int> exact_n_total;
  std::optional<double> exact_t0;
  std::optional<std::string> exact_out;
  exact_cmd->add_option("dataset", exact_path, "Dataset manifest or CSV")->required();
  exact_cmd->add_flag("--iid-exp", exact_iid, "Exact MLE for a shared exponential rate");
  exact_cmd->add_flag("--surface", exact_surface, "Emit a log-likelihood grid as CSV");
  exact_cmd->add_option("--grid", exact_grid, "Two axes, e.g. x.rate=0.05:1:100,t.rate=0.05:1:100");
  exact_cmd->add_option("--family-x", exact_family_x, "Installation family");
  exact_cmd->add_option("--family-t", exact_family_t, "Failure family");
  exact_cmd->add_option("--params-x", exact_params_x, "Fixed installation parameters for the slice");
  exact_cmd->add_option("--params-t", exact_params_t, "Fixed failure parameters for the slice");
  exact_cmd->add_option("--n-total", exact_n_total, "Batch size (CSV input)");
  exact_cmd->add_option("--t0", exact_t0, "Study horizon (CSV input)");
  exact_cmd->add_option("--out", exact_out, "Write output here instead of stdout");

  // ---- forecast ----
  auto* fc_cmd = app.add_subcommand("forecast", "Expected cumulative failures over calendar time");
  std::string fc_path;
  std::string fc_family_x = "exponential", fc_family_t = "exponential";
  std::string fc_params_x, fc_params_t;
  std::optional<int> fc_n;
  std::optional<double> fc_t0;
  std::optional<int> fc_n_total_csv;
  std::string fc_times;
  std::string fc_baseline = "both";
  bool fc_rolling = false;
  std::optional<std::string> fc_out;
  ConfigFlags fc_flags;
  fc_cmd->add_option("dataset", fc_path, "Dataset to fit before forecasting (omit to pass parameters)");
  fc_cmd->add_option("--family-x", fc_family_x, "Installation family");
  fc_cmd->add_option("--family-t", fc_family_t, "Failure family");
  fc_cmd->add_option("--params-x", fc_params_x, "Installation parameters (parameter mode)");
  fc_cmd->add_option("--params-t", fc_params_t, "Failure parameters (parameter mode)");
  fc_cmd->add_option("--n", fc_n, "Batch size (parameter mode)");
  fc_cmd->add_option("--n-total", fc_n_total_csv, "Batch size (CSV input)");
  fc_cmd->add_option("--t0", fc_t0, "Study horizon (CSV input / parameter mode)");
  fc_cmd->add_option("--times", fc_times, "Evaluation times: start:stop:step or comma list");
  fc_cmd->add_option("--baseline", fc_baseline, "Curves to emit: imputed|truncated|both");
  fc_cmd->add_flag("--rolling", fc_rolling,
                   "Re-estimate at each time and emit horizon,observed,imputed,truncated");
  fc_cmd->add_option("--out", fc_out, "Write CSV here instead of stdout");
  fc_flags.attach(fc_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // malformed command line
  }

  if (*fit_cmd) {
    const Family fx = io::parse_family(fit_family_x);
    const Family ft = io::parse_family(fit_family_t);
    const BatchDataset ds = io::read_dataset(fit_path, fit_n_total, fit_t0);
    const EstimatorConfig cfg = fit_flags.to_config();
    const FitResult result =
        fit_rescale ? fit_rescaled(ds, fx, ft, cfg) : fit(ds, fx, ft, cfg);
    if (fit_traj) io::write_file(*fit_traj, io::trajectories_csv(result));
    emit(fit_out, io::report_to_json(result, cfg, fx, ft, fit_rescale,
                                     static_cast<int>(ds.num_observed()))
                          .dump(2) +
                      "\n");
    return 0;
  }

  if (*sim_cmd) {
    const Distribution dx = io::make_distribution(io::parse_family(sim_family_x), split_params(sim_params_x));
    const Distribution dt = io::make_distribution(io::parse_family(sim_family_t), split_params(sim_params_t));
    if (sim_n < 1) throw io::InputError("--n must be >= 1");
    if (sim_replications < 1) throw io::InputError("--replications must be >= 1");
    if (sim_fit && sim_replications > 1) {
      ExperimentSpec spec{dx, dt, sim_n, sim_t0, sim_replications, sim_seed, sim_flags.to_config()};
      const ExperimentReport report = run_experiment(spec);
      emit(sim_report_out ? sim_report_out : sim_out,
           io::experiment_to_json(spec, report).dump(2) + "\n");
      return 0;
    }
    const SimulatedBatch batch = simulate_batch(dx, dt, sim_n, sim_t0, sim_seed);
    const std::string dataset_text = io::dataset_to_json(batch.dataset).dump(2) + "\n";
    if (sim_fit) {
      if (!sim_out) throw io::InputError("--fit needs --out for the dataset file");
      io::write_file(*sim_out, dataset_text);
      EstimatorConfig cfg = sim_flags.to_config();
      cfg.seed = derive_seed(sim_seed, 1);  // one root seed per command
      const Family fx = dx.family();
      const Family ft = dt.family();
      const FitResult result = fit(batch.dataset, fx, ft, cfg);
      emit(sim_report_out, io::report_to_json(result, cfg, fx, ft, false,
                                              static_cast<int>(batch.dataset.num_observed()))
                                   .dump(2) +
                               "\n");
      return 0;
    }
    emit(sim_out, dataset_text);
    return 0;
  }

  if (*exact_cmd) {
    const BatchDataset ds = io::read_dataset(exact_path, exact_n_total, exact_t0);
    if (exact_iid == exact_surface)
      throw io::InputError("exact needs exactly one of --iid-exp or --surface");
    if (exact_iid) {
      const auto mle = exact_mle_iid_exponential(ds);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "lambda_hat %.6g\nsigma_hat %.6g\n", mle.rate,
                    mle.asymptotic_sd);
      emit(exact_out, buf);
      return 0;
    }
    const Family fx = io::parse_family(exact_family_x);
    const Family ft = io::parse_family(exact_family_t);
    const std::size_t comma = exact_grid.find(',');
    if (exact_grid.empty() || comma == std::string::npos)
      throw io::InputError("--surface needs --grid with exactly two axes");
    // Fixed-slice values are required for any parameter not on an axis; a
    // one-parameter family fully covered by its axis needs no --params flag.
    auto base_for = [&](Family fam, const std::string& params, const std::string& axes,
                        const char* margin) {
      if (!params.empty()) return io::make_distribution(fam, split_params(params));
      const std::size_t free_params = fam == Family::exponential ? 1 : 2;
      std::size_t on_axis = 0;
      for (const std::string& piece : {axes.substr(0, comma), axes.substr(comma + 1)})
        if (piece.rfind(std::string(margin) + ".", 0) == 0) ++on_axis;
      if (on_axis < free_params)
        throw io::InputError(std::string("margin ") + margin +
                             " has free parameters off the grid; fix them with --params-" + margin);
      return fam == Family::exponential ? Distribution::exponential(1.0)
                                        : Distribution::weibull(1.0, 1.0);
    };
    const Distribution base_x = base_for(fx, exact_params_x, exact_grid, "x");
    const Distribution base_t = base_for(ft, exact_params_t, exact_grid, "t");
    const AxisSpec axis1 = parse_axis(exact_grid.substr(0, comma), base_x, base_t);
    const AxisSpec axis2 = parse_axis(exact_grid.substr(comma + 1), base_x, base_t);
    const SurfaceGrid grid = loglik_surface(base_x, base_t, ds, axis1, axis2);
    emit(exact_out, io::surface_csv(grid));
    return 0;
  }

  if (*fc_cmd) {
    const Family fx = io::parse_family(fc_family_x);
    const Family ft = io::parse_family(fc_family_t);
    if (fc_path.empty()) {
      // Parameter mode: evaluate the curve directly, no fitting.
      if (fc_params_x.empty() || fc_params_t.empty() || !fc_n || !fc_t0)
        throw io::InputError("parameter mode needs --params-x, --params-t, --n and --t0");
      const Distribution dx = io::make_distribution(fx, split_params(fc_params_x));
      const Distribution dt = io::make_distribution(ft, split_params(fc_params_t));
      const std::vector<double> times =
          fc_times.empty() ? default_horizons(*fc_t0) : parse_times(fc_times);
      emit(fc_out, io::curves_csv({expected_failures(dx, dt, *fc_n, times, "expected")}));
      return 0;
    }
    const BatchDataset ds = io::read_dataset(fc_path, fc_n_total_csv, fc_t0);
    const std::vector<double> times =
        fc_times.empty() ? default_horizons(ds.horizon()) : parse_times(fc_times);
    const EstimatorConfig cfg = fc_flags.to_config();
    if (fc_rolling) {
      std::vector<double> horizons;
      for (double t : times)
        if (t > 0.0) horizons.push_back(t);
      emit(fc_out, io::rolling_csv(rolling_refit_forecast(ds, horizons, fx, ft, cfg)));
      return 0;
    }
    std::vector<ForecastCurve> curves;
    if (fc_baseline == "imputed" || fc_baseline == "both") {
      const FitResult result = fit(ds, fx, ft, cfg);
      curves.push_back(expected_failures(result.estimate_x.to_distribution(),
                                         result.estimate_t.to_distribution(), ds.n_total(), times,
                                         "imputed"));
    }
    if (fc_baseline == "truncated" || fc_baseline == "both") {
      const auto [tx, tt] = initial_estimates(ds, fx, ft);
      curves.push_back(expected_failures(tx, tt, ds.n_total(), times, "truncated"));
    }
    if (curves.empty()) throw io::InputError("--baseline must be imputed, truncated or both");
    emit(fc_out, io::curves_csv(curves));
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const propimp::io::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const propimp::EstimationError& e) {
    std::cerr << "estimation error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
