#include "oussm/simulate.hpp"

#include <cmath>
#include <sstream>

#include "oussm/canonical.hpp"
#include "oussm/errors.hpp"
#include "oussm/modelsel.hpp"
#include "oussm/parallel.hpp"
#include "oussm/random.hpp"

namespace oussm {

MatrixXd symmetric_sqrt(const MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (cov + cov.transpose()));
  const VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

std::vector<double> regular_times(Index count, double dt) {
  if (count < 1 || !(dt > 0.0)) throw InvalidInput("need count >= 1 and dt > 0");
  std::vector<double> t(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i) * dt;
  return t;
}

Simulation simulate(const OussmParams& params, const std::vector<double>& times,
                    std::uint64_t seed, bool include_measurement_error) {
  validate_model(params);
  if (times.empty()) throw InvalidInput("no simulation times");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InvalidInput("simulation times not strictly increasing at index " +
                         std::to_string(i));
    }
  }
  const Index m = params.m();
  const Index p = params.p();
  const Index n = static_cast<Index>(times.size());
  const MatrixXd q_inf = stationary_covariance(params.theta, params.sigma);

  struct Step {
    double gap;
    MatrixXd transition;
    MatrixXd noise_root;
  };
  std::vector<Step> cache;
  auto step_for = [&](double gap) -> const Step& {
    for (const auto& s : cache) {
      if (s.gap == gap) return s;
    }
    MatrixXd c = transition_matrix(params.theta, gap);
    MatrixXd q = innovation_covariance_from(q_inf, c);
    cache.push_back({gap, std::move(c), symmetric_sqrt(q)});
    return cache.back();
  };

  Rng rng(seed);
  const VectorXd h_root = params.h_diag.cwiseSqrt();
  Simulation out;
  out.latent.resize(n, m);
  MatrixXd y(n, p);
  VectorXd x = symmetric_sqrt(q_inf) * rng.normal_vector(m);
  for (Index i = 0; i < n; ++i) {
    out.latent.row(i) = x.transpose();
    VectorXd obs = params.mu + params.z * x;
    if (include_measurement_error) {
      obs += h_root.cwiseProduct(rng.normal_vector(p));
    }
    y.row(i) = obs.transpose();
    if (i + 1 < n) {
      const std::size_t ui = static_cast<std::size_t>(i);
      const Step& s = step_for(times[ui + 1] - times[ui]);
      x = s.transition * x + s.noise_root * rng.normal_vector(m);
    }
  }
  out.series.times = times;
  out.series.values = std::move(y);
  return out;
}

namespace {

struct ThetaRow {
  double t11, t12, t22;
  const char* label;
  const char* separation;
  const char* magnitude;
};

constexpr ThetaRow kThetaTable[] = {
    {0.16, 0.02, 0.1, "Two real roots", "close", "small"},
    {0.8, 0.3, 0.1, "Two real roots", "far", "small"},
    {2.4, 0.1, 2.0, "Two real roots", "close", "large"},
    {2.4, 0.5, 1.0, "Two real roots", "far", "large"},
    {0.16, 0.04, 0.1, "Two complex roots, small imaginary part", "close", "small"},
    {0.8, 0.4, 0.1, "Two complex roots, small imaginary part", "far", "small"},
    {2.4, 0.25, 2.0, "Two complex roots, small imaginary part", "close", "large"},
    {2.4, 0.75, 1.0, "Two complex roots, small imaginary part", "far", "large"},
    {0.16, 1.0, 0.1, "Two complex roots, large imaginary part", "close", "small"},
    {0.8, 1.8, 0.1, "Two complex roots, large imaginary part", "far", "small"},
    {2.4, 2.0, 2.0, "Two complex roots, large imaginary part", "close", "large"},
    {2.4, 2.0, 1.0, "Two complex roots, large imaginary part", "far", "large"},
    {6.0, 2.0, 1.8, "Two real roots, large imaginary part", "far", "large"},
    {6.0, 1.5, 1.8, "Two real roots, large imaginary part", "far", "large"},
    {6.0, 0.5, 1.8, "Two real roots, large imaginary part", "far", "large"},
};

struct ZEntry {
  const char* tag;
  const char* angle;
  std::vector<double> rows;  // row-major, two columns
};

const std::vector<ZEntry>& z_table() {
  static const std::vector<ZEntry> table = {
      {"p2-small", "small-angle", {0.7, 0.8, 0.1, -0.1}},
      {"p3-small", "small-angle", {0.1, 0.2, 0.8, -0.1, 4.0, 1.5}},
      {"p4-small", "small-angle", {0.1, 0.2, 0.8, -0.1, 4.0, 1.5, -0.5, -0.2}},
      {"p2-orth", "orthogonal", {0.2, 0.5, 0.5, -0.2}},
      {"p3-orth", "orthogonal", {0.1, 0.2, 0.8, -0.1, -0.2, -0.3}},
      {"p4-orth", "orthogonal", {0.1, 0.2, 0.8, -0.1, -0.2, -0.9, 0.6, -0.2}},
  };
  return table;
}

}  // namespace

std::vector<Scenario> scenario_suite() {
  std::vector<Scenario> out;
  int ti = 0;
  for (const auto& row : kThetaTable) {
    ++ti;
    int zi = 0;
    for (const auto& ze : z_table()) {
      ++zi;
      Scenario s;
      s.theta_index = ti;
      s.z_index = zi;
      s.theta.resize(2, 2);
      s.theta << row.t11, row.t12, -row.t12, row.t22;
      const Index p = static_cast<Index>(ze.rows.size() / 2);
      s.z = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          ze.rows.data(), p, 2);
      s.eigen_label = row.label;
      s.diag_separation = row.separation;
      s.diag_magnitude = row.magnitude;
      s.z_angle = ze.angle;
      std::ostringstream id;
      id << "theta" << (ti < 10 ? "0" : "") << ti << "_" << ze.tag;
      s.id = id.str();
      out.push_back(std::move(s));
    }
  }
  return out;
}

Scenario find_scenario(const std::string& id) {
  for (auto& s : scenario_suite()) {
    if (s.id == id) return s;
  }
  throw InvalidInput("unknown scenario id '" + id + "'");
}

OussmParams scenario_params(const Scenario& s, double measurement_variance) {
  if (!(measurement_variance > 0.0)) {
    throw InvalidInput("measurement variance must be positive");
  }
  const Index p = s.z.rows();
  return OussmParams::with_unit_diffusion(s.theta, s.z, VectorXd::Zero(p),
                                          VectorXd::Constant(p, measurement_variance));
}

std::vector<ReplicateResult> run_experiment(const Scenario& scenario,
                                            const ExperimentOptions& options) {
  if (options.n_replicates < 1) throw InvalidInput("need at least one replicate");
  if (options.series_length < 4) throw InvalidInput("series too short");
  if (options.m_values.empty()) throw InvalidInput("no state dimensions to fit");
  const OussmParams truth = scenario_params(scenario, options.measurement_variance);
  const std::vector<double> times = regular_times(options.series_length, options.dt);

  std::vector<ReplicateResult> out(static_cast<std::size_t>(options.n_replicates));
  parallel_for(out.size(), options.threads, [&](std::size_t r) {
    ReplicateResult& rep = out[r];
    rep.replicate = static_cast<int>(r);
    rep.m_values = options.m_values;
    try {
      const auto rr = static_cast<std::uint64_t>(r);
      const std::uint64_t sim_seed = Rng::stream(options.seed, 2 * rr).bits();
      const Simulation sim = simulate(truth, times, sim_seed, true);

      SelectOptions sel;
      sel.fit = options.fit;
      sel.fit.seed = Rng::stream(options.seed, 2 * rr + 1).bits();
      const SelectionTable table = select_dimension(sim.series, options.m_values, sel);

      for (const auto& row : table.rows) {
        rep.loglik.push_back(row.available ? row.loglik : std::nan(""));
        rep.aic.push_back(row.available ? row.aic : std::nan(""));
        rep.bic.push_back(row.available ? row.bic : std::nan(""));
        if (row.m == 2 && row.available) {
          rep.theta_hat = row.fit.params.theta;
          rep.exp_error_ratio = exp_error_ratio(truth.theta, rep.theta_hat);
        }
      }
      rep.aic_choice = table.argmin_aic;
      rep.bic_choice = table.argmin_bic;
      rep.ok = table.argmin_aic > 0;
      if (!rep.ok) rep.message = "no dimension could be fitted";
    } catch (const Error& e) {
      rep.ok = false;
      rep.message = e.what();
    }
  });
  return out;
}

}  // namespace oussm
