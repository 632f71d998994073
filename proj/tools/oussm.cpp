#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oussm/canonical.hpp"
#include "oussm/config.hpp"
#include "oussm/errors.hpp"
#include "oussm/estimate.hpp"
#include "oussm/io.hpp"
#include "oussm/kalman.hpp"
#include "oussm/modelsel.hpp"
#include "oussm/simulate.hpp"

using namespace oussm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Args {
  RunConfig cfg;
  std::string config_path;
  std::string times_from;
  std::string mode;  // preprocess: logratio | deseason
};

fs::path output_path(const RunConfig& cfg, const std::string& name) {
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir / name;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  return out;
}

void require_set(const std::string& value, const std::string& flag) {
  if (value.empty()) throw InvalidInput(flag + " is required");
}

FitOptions fit_options(const RunConfig& cfg, unsigned threads) {
  FitOptions fo;
  fo.n_starts = cfg.n_starts;
  fo.max_evals = cfg.max_evals;
  fo.tol = cfg.tol;
  fo.seed = cfg.seed;
  fo.threads = threads;
  return fo;
}

std::vector<Index> to_index(const std::vector<int>& v) { return {v.begin(), v.end()}; }

json fit_report(const FitResult& res, const TimeSeries& series, const RunConfig& cfg) {
  json j = params_to_json(res.params);
  const Index n = series.observed_rows();
  const InformationCriteria ic = information_criteria(res.loglik, res.params.m(), res.params.p(), n);
  j["loglik"] = res.loglik;
  j["n_obs"] = n;
  j["information_criteria"] = {{"k", ic.k}, {"aic", ic.aic}, {"bic", ic.bic}};
  json starts = json::array();
  for (const auto& s : res.starts) {
    starts.push_back({{"loglik", std::isfinite(s.loglik) ? json(s.loglik) : json(nullptr)},
                      {"n_evals", s.n_evals},
                      {"iterations", s.iterations},
                      {"converged", s.converged},
                      {"grad_inf_norm", s.grad_inf_norm},
                      {"message", s.message}});
  }
  j["optimizer"] = {{"converged", res.converged},
                    {"n_evals", res.n_evals},
                    {"start_index", res.start_index},
                    {"grad_inf_norm", res.grad_inf_norm},
                    {"n_starts", cfg.n_starts},
                    {"max_evals", cfg.max_evals},
                    {"tol", cfg.tol},
                    {"seed", cfg.seed},
                    {"starts", starts}};
  j["spectral"] = spectral_to_json(spectral_summary(res.params.theta));
  try {
    j["block_form"] = block_form_to_json(block_diagonalize(res.params));
  } catch (const DegenerateSpectrum& e) {
    j["block_form"] = nullptr;
    j["block_form_error"] = e.what();
  }
  return j;
}

void print_params(const OussmParams& p) {
  const Eigen::IOFormat fmt(6, 0, ", ", "\n", "  [", "]");
  std::cout << "theta =\n" << p.theta.format(fmt) << "\nz =\n" << p.z.format(fmt) << "\nmu =\n"
            << p.mu.transpose().format(fmt) << "\nh_diag =\n"
            << p.h_diag.transpose().format(fmt) << "\n";
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Args& args) {
  const RunConfig& cfg = args.cfg;
  OussmParams params;
  std::string source;
  if (!cfg.params.empty()) {
    params = read_params(cfg.params);
    source = cfg.params;
  } else {
    require_set(cfg.scenario, "--scenario or --params");
    params = scenario_params(find_scenario(cfg.scenario), cfg.measurement_variance);
    source = cfg.scenario;
  }
  std::vector<double> times;
  if (!args.times_from.empty()) {
    times = read_series(args.times_from).times;
  } else {
    times = regular_times(cfg.n, cfg.dt);
  }
  const Simulation sim = simulate(params, times, cfg.seed, cfg.measurement_error);
  const fs::path series_path = output_path(cfg, "series.csv");
  write_series(series_path.string(), sim.series);
  TimeSeries latent;
  latent.times = sim.series.times;
  latent.values = sim.latent;
  std::vector<std::string> xl;
  for (Index j = 0; j < params.m(); ++j) xl.push_back("x" + std::to_string(j + 1));
  const fs::path latent_path = output_path(cfg, "latent.csv");
  write_series(latent_path.string(), latent, xl);
  std::cout << "simulated " << sim.series.rows() << " rows from " << source << " (seed "
            << cfg.seed << ")\nwrote " << series_path.string() << "\nwrote "
            << latent_path.string() << "\n";
  return 0;
}

int cmd_fit(const Args& args) {
  const RunConfig& cfg = args.cfg;
  require_set(cfg.input, "--input");
  const LabeledSeries data = read_series_labeled(cfg.input);
  const FitResult res = fit(data.series, cfg.m, fit_options(cfg, cfg.threads));
  json report = fit_report(res, data.series, cfg);
  report["labels"] = data.labels;
  const fs::path path = output_path(cfg, "fit.json");
  write_json(path.string(), report);
  std::cout << "m = " << cfg.m << ", loglik = " << format_double(res.loglik)
            << ", converged = " << (res.converged ? "yes" : "no") << "\n";
  print_params(res.params);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_select(const Args& args) {
  const RunConfig& cfg = args.cfg;
  require_set(cfg.input, "--input");
  const TimeSeries series = read_series(cfg.input);
  SelectOptions so;
  so.fit = fit_options(cfg, cfg.threads);
  const SelectionTable table = select_dimension(series, to_index(cfg.m_range), so);
  const fs::path csv = output_path(cfg, "selection.csv");
  {
    std::ofstream out = open_out(csv);
    write_selection_csv(out, table);
  }
  const std::string text = format_selection_table(table);
  const fs::path txt = output_path(cfg, "selection.txt");
  {
    std::ofstream out = open_out(txt);
    out << text;
  }
  std::cout << text << "wrote " << csv.string() << "\nwrote " << txt.string() << "\n";
  return table.argmin_aic == 0 ? 2 : 0;
}

int cmd_predict(const Args& args) {
  const RunConfig& cfg = args.cfg;
  require_set(cfg.input, "--input");
  const LabeledSeries data = read_series_labeled(cfg.input);
  const Index rows = data.series.rows();
  const Index n_train = static_cast<Index>(std::floor(cfg.train_fraction * static_cast<double>(rows)));
  if (n_train < 1 || n_train >= rows) {
    throw InvalidInput("train fraction leaves an empty training or test set");
  }
  const TimeSeries train = slice(data.series, 0, n_train);
  const TimeSeries test = slice(data.series, n_train, rows);

  OussmParams params;
  if (!cfg.params.empty()) {
    params = read_params(cfg.params);
  } else {
    const FitResult res = fit(train, cfg.m, fit_options(cfg, cfg.threads));
    params = res.params;
    json report = fit_report(res, train, cfg);
    report["labels"] = data.labels;
    report["train_rows"] = n_train;
    const fs::path fit_path = output_path(cfg, "predict_fit.json");
    write_json(fit_path.string(), report);
    std::cout << "fitted m = " << cfg.m << " on " << n_train << " training rows, wrote "
              << fit_path.string() << "\n";
  }
  const std::vector<Prediction> preds = predict_one_step(params, train, test);
  const fs::path path = output_path(cfg, "predictions.csv");
  {
    std::ofstream out = open_out(path);
    write_predictions(out, preds, test, data.labels);
  }
  Index inside = 0, total = 0;
  for (Index i = 0; i < test.rows(); ++i) {
    if (test.is_missing(i)) continue;
    const Prediction& p = preds[static_cast<std::size_t>(i)];
    for (Index j = 0; j < test.dim(); ++j) {
      ++total;
      const double y = test.values(i, j);
      if (y >= p.lower95(j) && y <= p.upper95(j)) ++inside;
    }
  }
  std::cout << "test rows " << test.rows() << ", 95% interval coverage " << inside << "/" << total
            << "\nwrote " << path.string() << "\n";
  return 0;
}

int cmd_canonicalize(const Args& args) {
  const RunConfig& cfg = args.cfg;
  require_set(cfg.params, "--params");
  const OussmParams params = read_params(cfg.params);
  const CanonicalTransform ct = canonicalize(params.theta, params.sigma);
  const MatrixXd a_inv = ct.a.inverse();
  const SignNormalized sn = sign_normalize(params.z * a_inv, ct.theta_tilde);
  OussmParams canon = params;
  canon.theta = sn.theta;
  canon.z = sn.z;
  canon.sigma = MatrixXd::Identity(params.m(), params.m());

  json j = params_to_json(canon);
  j["transform"] = matrix_to_json(sn.signs.asDiagonal() * ct.a);
  j["diffusion_diagonal"] = std::vector<double>(ct.d.data(), ct.d.data() + ct.d.size());
  j["repeated_diagonal"] = ct.repeated_diagonal;
  j["spectral"] = spectral_to_json(spectral_summary(canon.theta));
  try {
    j["block_form"] = block_form_to_json(block_diagonalize(canon));
  } catch (const DegenerateSpectrum& e) {
    j["block_form"] = nullptr;
    j["block_form_error"] = e.what();
  }
  const fs::path path = output_path(cfg, "canonical.json");
  write_json(path.string(), j);
  if (ct.repeated_diagonal) {
    std::cerr << "warning: repeated diffusion eigenvalues; canonical form is not unique\n";
  }
  print_params(canon);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_experiment(const Args& args) {
  const RunConfig& cfg = args.cfg;
  require_set(cfg.scenario, "--scenario");
  std::vector<Scenario> scenarios;
  if (cfg.scenario == "all") {
    scenarios = scenario_suite();
  } else {
    std::stringstream ss(cfg.scenario);
    std::string id;
    while (std::getline(ss, id, ',')) scenarios.push_back(find_scenario(id));
  }
  ExperimentOptions eo;
  eo.n_replicates = cfg.replicates;
  eo.series_length = cfg.n;
  eo.dt = cfg.dt;
  eo.seed = cfg.seed;
  eo.measurement_variance = cfg.measurement_variance;
  eo.m_values = to_index(cfg.m_range);
  std::sort(eo.m_values.begin(), eo.m_values.end());
  eo.m_values.erase(std::unique(eo.m_values.begin(), eo.m_values.end()), eo.m_values.end());
  eo.fit = fit_options(cfg, 1);
  eo.threads = cfg.threads;

  const fs::path csv_path = output_path(cfg, "experiment.csv");
  std::ofstream csv = open_out(csv_path);
  csv << "scenario,replicate,ok,exp_error_ratio,log_exp_error_ratio,aic_choice,bic_choice";
  for (const char* what : {"loglik", "aic", "bic"}) {
    for (Index m : eo.m_values) csv << ',' << what << "_m" << m;
  }
  csv << ",message\n";

  json summary = json::array();
  for (const Scenario& sc : scenarios) {
    const std::vector<ReplicateResult> reps = run_experiment(sc, eo);
    std::vector<double> logs;
    std::map<Index, int> aic_count, bic_count;
    int n_ok = 0;
    for (const auto& r : reps) {
      const double lr = std::log(r.exp_error_ratio);
      csv << sc.id << ',' << r.replicate << ',' << (r.ok ? 1 : 0) << ','
          << format_double(r.exp_error_ratio) << ',' << format_double(lr) << ',' << r.aic_choice
          << ',' << r.bic_choice;
      for (const auto* col : {&r.loglik, &r.aic, &r.bic}) {
        for (std::size_t k = 0; k < eo.m_values.size(); ++k) {
          csv << ',' << (k < col->size() ? format_double((*col)[k]) : std::string("NaN"));
        }
      }
      csv << ',' << csv_escape(r.message) << '\n';
      if (!r.ok) continue;
      ++n_ok;
      if (std::isfinite(lr)) logs.push_back(lr);
      ++aic_count[r.aic_choice];
      ++bic_count[r.bic_choice];
    }
    json aic = json::object(), bic = json::object();
    for (Index m : eo.m_values) {
      const double denom = n_ok > 0 ? n_ok : 1;
      aic[std::to_string(m)] = aic_count[m] / denom;
      bic[std::to_string(m)] = bic_count[m] / denom;
    }
    const SpectralSummary spec = spectral_summary(sc.theta);
    const double med = median(logs);
    summary.push_back({{"scenario", sc.id},
                       {"theta", matrix_to_json(sc.theta)},
                       {"z", matrix_to_json(sc.z)},
                       {"table_label", sc.eigen_label},
                       {"eigen_kind", to_string(spec.kind)},
                       {"max_modulus", spec.max_modulus},
                       {"replicates", static_cast<int>(reps.size())},
                       {"replicates_ok", n_ok},
                       {"median_log_exp_error_ratio", std::isfinite(med) ? json(med) : json(nullptr)},
                       {"aic_selection", aic},
                       {"bic_selection", bic}});
    std::cout << sc.id << ": ok " << n_ok << "/" << reps.size()
              << ", median log ratio " << format_double(med) << "\n";
  }
  json out = {{"series_length", eo.series_length},
              {"dt", eo.dt},
              {"seed", eo.seed},
              {"measurement_variance", eo.measurement_variance},
              {"n_starts", eo.fit.n_starts},
              {"scenarios", summary}};
  const fs::path json_path = output_path(cfg, "experiment_summary.json");
  write_json(json_path.string(), out);
  std::cout << "wrote " << csv_path.string() << "\nwrote " << json_path.string() << "\n";
  return 0;
}

int cmd_preprocess(const Args& args) {
  const RunConfig& cfg = args.cfg;
  require_set(cfg.input, "--input");
  if (args.mode == "logratio") {
    const RawCounts raw = read_counts(cfg.input, cfg.reference);
    const LabeledSeries y = logratio_transform(raw, cfg.pseudocount);
    const fs::path path = output_path(cfg, "logratio.csv");
    write_series(path.string(), y.series, y.labels);
    std::cout << "log-ratios against '" << raw.labels[static_cast<std::size_t>(raw.reference)]
              << "' with pseudocount " << cfg.pseudocount << "\nwrote "
              << path.string() << "\n";
    return 0;
  }
  const DatedSeries dated = read_dated_series(cfg.input);
  const Deseasonalized d = deseasonalize(dated);
  if (d.short_record) {
    std::cerr << "warning: record spans less than two years; the day-of-year climatology is "
                 "poorly estimated\n";
  }
  const fs::path path = output_path(cfg, "anomalies.csv");
  write_series(path.string(), d.anomalies.series, d.anomalies.labels, "day");
  TimeSeries clim;
  for (int k = 1; k <= 365; ++k) clim.times.push_back(k);
  clim.values = d.climatology;
  const fs::path clim_path = output_path(cfg, "climatology.csv");
  {
    std::ofstream out = open_out(clim_path);
    out << "day_of_year";
    for (const auto& l : dated.labels) out << ',' << csv_escape(l);
    out << '\n';
    for (Index k = 0; k < 365; ++k) {
      out << k + 1;
      for (Index j = 0; j < clim.values.cols(); ++j) {
        out << ',';
        if (!std::isnan(clim.values(k, j))) out << format_double(clim.values(k, j));
      }
      out << '\n';
    }
  }
  std::cout << "wrote " << path.string() << "\nwrote " << clim_path.string() << "\n";
  return 0;
}

// Config keys set explicitly on the command line (long flag name, '-' -> '_').
std::set<std::string> explicit_keys(const CLI::App& app) {
  std::set<std::string> keys;
  auto collect = [&](const CLI::App* a) {
    for (const CLI::Option* opt : a->get_options()) {
      if (opt->count() == 0 || opt->get_lnames().empty()) continue;
      std::string name = opt->get_lnames().front();
      std::replace(name.begin(), name.end(), '-', '_');
      keys.insert(name);
    }
  };
  collect(&app);
  for (const CLI::App* sub : app.get_subcommands()) collect(sub);
  return keys;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor Ornstein-Uhlenbeck state space models: simulate, fit, select, predict"};
  app.require_subcommand(1);
  app.fallthrough();
  Args args;
  RunConfig& cfg = args.cfg;

  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--threads", cfg.threads, "Worker threads");
  app.add_option("--out-dir", cfg.out_dir, "Directory for output files");
  app.add_option("--config", args.config_path, "JSON config file (flags take precedence)");

  auto add_input = [&](CLI::App* s) { s->add_option("-i,--input", cfg.input, "Input CSV"); };
  auto add_fit_flags = [&](CLI::App* s) {
    s->add_option("--n-starts", cfg.n_starts, "Optimizer starts");
    s->add_option("--max-evals", cfg.max_evals, "Objective evaluations per start");
    s->add_option("--tol", cfg.tol, "Relative objective change for convergence");
  };

  auto* sim = app.add_subcommand("simulate", "Simulate a series from a scenario or a params file");
  sim->add_option("--scenario", cfg.scenario, "Scenario id, e.g. theta01_p2-orth");
  sim->add_option("--params", cfg.params, "Parameter JSON file");
  sim->add_option("--n", cfg.n, "Number of rows");
  sim->add_option("--dt", cfg.dt, "Time step");
  sim->add_option("--times-from", args.times_from, "Take the time grid from this series CSV");
  sim->add_option("--measurement-variance", cfg.measurement_variance,
                  "Measurement error variance for scenarios");
  sim->add_flag("--measurement-error,!--no-measurement-error", cfg.measurement_error,
                "Add measurement error (default on)");

  auto* fitc = app.add_subcommand("fit", "Fit a model of state dimension m");
  add_input(fitc);
  fitc->add_option("--m", cfg.m, "State dimension");
  add_fit_flags(fitc);

  auto* sel = app.add_subcommand("select", "Fit a range of m and report AIC/BIC");
  add_input(sel);
  sel->add_option("--m-range", cfg.m_range, "State dimensions, e.g. 1,2,3")->delimiter(',');
  add_fit_flags(sel);

  auto* pred = app.add_subcommand("predict", "One-step-ahead predictions on a held-out tail");
  add_input(pred);
  pred->add_option("--m", cfg.m, "State dimension when fitting");
  pred->add_option("--params", cfg.params, "Use these parameters instead of fitting");
  pred->add_option("--train-fraction", cfg.train_fraction, "Leading fraction used for training");
  add_fit_flags(pred);

  auto* can = app.add_subcommand("canonicalize", "Canonical and block-diagonal forms");
  can->add_option("--params", cfg.params, "Parameter JSON file");

  auto* exp = app.add_subcommand("experiment", "Simulation study over scenarios");
  exp->add_option("--scenario", cfg.scenario, "Scenario ids (comma separated) or 'all'");
  exp->add_option("--replicates", cfg.replicates, "Replicates per scenario");
  exp->add_option("--n", cfg.n, "Series length");
  exp->add_option("--dt", cfg.dt, "Time step");
  exp->add_option("--measurement-variance", cfg.measurement_variance,
                  "Measurement error variance");
  exp->add_option("--m-range", cfg.m_range, "State dimensions to fit")->delimiter(',');
  add_fit_flags(exp);

  auto* pre = app.add_subcommand("preprocess", "Log-ratio or day-of-year deseasonalization");
  pre->add_option("mode", args.mode, "logratio | deseason")
      ->required()
      ->check(CLI::IsMember({"logratio", "deseason"}));
  add_input(pre);
  pre->add_option("--pseudocount", cfg.pseudocount, "Pseudocount added to counts");
  pre->add_option("--reference", cfg.reference, "Reference column (default: last)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (!args.config_path.empty()) load_run_config(args.config_path, cfg, explicit_keys(app));
    validate_run_config(cfg);
    if (sim->parsed()) return cmd_simulate(args);
    if (fitc->parsed()) return cmd_fit(args);
    if (sel->parsed()) return cmd_select(args);
    if (pred->parsed()) return cmd_predict(args);
    if (can->parsed()) return cmd_canonicalize(args);
    if (exp->parsed()) return cmd_experiment(args);
    if (pre->parsed()) return cmd_preprocess(args);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
