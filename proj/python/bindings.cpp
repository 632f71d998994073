#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "oussm/canonical.hpp"
#include "oussm/errors.hpp"
#include "oussm/estimate.hpp"
#include "oussm/io.hpp"
#include "oussm/kalman.hpp"
#include "oussm/modelsel.hpp"
#include "oussm/ou_core.hpp"
#include "oussm/simulate.hpp"

namespace py = pybind11;
using namespace oussm;

namespace {

FitOptions fit_options(int n_starts, int max_evals, double tol, std::uint64_t seed,
                       unsigned threads) {
  FitOptions o;
  o.n_starts = n_starts;
  o.max_evals = max_evals;
  o.tol = tol;
  o.seed = seed;
  o.threads = threads;
  return o;
}

py::dict prediction_arrays(const std::vector<Prediction>& preds, Index p) {
  const Index n = static_cast<Index>(preds.size());
  VectorXd times(n);
  MatrixXd mean(n, p), lower(n, p), upper(n, p);
  for (Index i = 0; i < n; ++i) {
    const Prediction& pr = preds[static_cast<std::size_t>(i)];
    times(i) = pr.time;
    mean.row(i) = pr.mean.transpose();
    lower.row(i) = pr.lower95.transpose();
    upper.row(i) = pr.upper95.transpose();
  }
  py::dict d;
  d["times"] = times;
  d["mean"] = mean;
  d["lower95"] = lower;
  d["upper95"] = upper;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Factor Ornstein-Uhlenbeck state-space models";

  auto error = py::register_exception<Error>(mod, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(mod, "InvalidInput", PyExc_ValueError);
  auto numerical = py::register_exception<NumericalError>(mod, "NumericalError", error.ptr());
  py::register_exception<NoStationaryState>(mod, "NoStationaryState", numerical.ptr());
  py::register_exception<DegenerateSpectrum>(mod, "DegenerateSpectrum", numerical.ptr());
  py::register_exception<FilterDivergence>(mod, "FilterDivergence", numerical.ptr());
  py::register_exception<EstimationFailed>(mod, "EstimationFailed", numerical.ptr());

  py::class_<OussmParams>(mod, "Params")
      .def(py::init([](MatrixXd theta, MatrixXd z, VectorXd mu, VectorXd h_diag,
                       std::optional<MatrixXd> sigma) {
             OussmParams p;
             p.sigma = sigma ? *sigma : MatrixXd::Identity(theta.rows(), theta.rows());
             p.theta = std::move(theta);
             p.z = std::move(z);
             p.mu = std::move(mu);
             p.h_diag = std::move(h_diag);
             validate_model(p);
             return p;
           }),
           py::arg("theta"), py::arg("z"), py::arg("mu"), py::arg("h_diag"),
           py::arg("sigma") = py::none())
      .def_readwrite("theta", &OussmParams::theta)
      .def_readwrite("z", &OussmParams::z)
      .def_readwrite("mu", &OussmParams::mu)
      .def_readwrite("h_diag", &OussmParams::h_diag)
      .def_readwrite("sigma", &OussmParams::sigma)
      .def_property_readonly("m", &OussmParams::m)
      .def_property_readonly("p", &OussmParams::p)
      .def("to_json", [](const OussmParams& p) { return params_to_json(p).dump(2); })
      .def_static("from_json",
                  [](const std::string& text) { return params_from_json(nlohmann::json::parse(text)); })
      .def("__repr__", [](const OussmParams& p) {
        return "Params(m=" + std::to_string(p.m()) + ", p=" + std::to_string(p.p()) + ")";
      });

  py::class_<TimeSeries>(mod, "TimeSeries")
      .def(py::init([](std::vector<double> times, MatrixXd values) {
             TimeSeries s = make_series(std::move(times), std::move(values));
             validate_series(s);
             return s;
           }),
           py::arg("times"), py::arg("values"),
           "Rows of `values` that are entirely NaN are treated as missing.")
      .def_readonly("times", &TimeSeries::times)
      .def_readonly("values", &TimeSeries::values)
      .def_property_readonly("missing",
                             [](const TimeSeries& s) {
                               std::vector<bool> out;
                               for (Index i = 0; i < s.rows(); ++i) out.push_back(s.is_missing(i));
                               return out;
                             })
      .def_property_readonly("rows", &TimeSeries::rows)
      .def_property_readonly("dim", &TimeSeries::dim)
      .def("slice", &slice, py::arg("begin"), py::arg("end"));

  mod.def("transition_matrix", &transition_matrix, py::arg("theta"), py::arg("dt"));
  mod.def("stationary_covariance", &stationary_covariance, py::arg("theta"), py::arg("sigma"));
  mod.def("innovation_covariance", &innovation_covariance, py::arg("theta"), py::arg("sigma"),
          py::arg("dt"));
  mod.def(
      "spectral_summary",
      [](const MatrixXd& theta) {
        const SpectralSummary s = spectral_summary(theta);
        py::dict d;
        d["eigenvalues"] = s.eigenvalues;
        d["max_modulus"] = s.max_modulus;
        d["squared_difference"] = s.sq_diff;
        d["kind"] = std::string(to_string(s.kind));
        return d;
      },
      py::arg("theta"));

  py::class_<CanonicalTransform>(mod, "CanonicalTransform")
      .def_readonly("a", &CanonicalTransform::a)
      .def_readonly("theta_tilde", &CanonicalTransform::theta_tilde)
      .def_readonly("d", &CanonicalTransform::d)
      .def_readonly("repeated_diagonal", &CanonicalTransform::repeated_diagonal);
  mod.def(
      "canonicalize",
      [](const MatrixXd& theta, const MatrixXd& sigma) { return canonicalize(theta, sigma); },
      py::arg("theta"), py::arg("sigma"));
  mod.def("to_canonical", &to_canonical, py::arg("params"));

  py::class_<BlockForm>(mod, "BlockForm")
      .def_readonly("transform", &BlockForm::transform)
      .def_readonly("inverse", &BlockForm::inverse)
      .def_readonly("theta_block", &BlockForm::theta_block)
      .def_readonly("z_transformed", &BlockForm::z_transformed)
      .def_readonly("sigma_transformed", &BlockForm::sigma_transformed)
      .def_property_readonly("blocks", [](const BlockForm& b) {
        py::list out;
        for (const auto& blk : b.blocks) {
          py::dict d;
          d["offset"] = blk.offset;
          d["size"] = blk.size;
          d["real"] = blk.real;
          d["imag"] = blk.imag;
          out.append(d);
        }
        return out;
      });
  mod.def("block_diagonalize", &block_diagonalize, py::arg("params"));
  mod.def("theta_distance", &theta_distance, py::arg("theta"), py::arg("theta_hat"));
  mod.def("exp_error_ratio", &exp_error_ratio, py::arg("theta_true"), py::arg("theta_hat"));

  mod.def(
      "loglikelihood",
      [](const OussmParams& p, const TimeSeries& s) { return loglikelihood(p, s); },
      py::arg("params"), py::arg("series"));
  mod.def(
      "filter",
      [](const OussmParams& p, const TimeSeries& s) {
        const FilterResult r = filter(p, s);
        py::dict d;
        d["loglik"] = r.loglik;
        d["innovations"] = r.innovations;
        d["innovation_cov"] = r.innovation_cov;
        d["predicted_means"] = r.predicted_means;
        d["predicted_cov"] = r.predicted_cov;
        return d;
      },
      py::arg("params"), py::arg("series"));
  mod.def(
      "predict_one_step",
      [](const OussmParams& p, const TimeSeries& train, const TimeSeries& test) {
        return prediction_arrays(predict_one_step(p, train, test), test.dim());
      },
      py::arg("params"), py::arg("train"), py::arg("test"));

  mod.def("parameter_count", &parameter_count, py::arg("p"), py::arg("m"));
  mod.def("pack", &pack, py::arg("params"));
  mod.def("unpack", &unpack, py::arg("packed"), py::arg("p"), py::arg("m"));

  py::class_<FitResult>(mod, "FitResult")
      .def_readonly("params", &FitResult::params)
      .def_readonly("loglik", &FitResult::loglik)
      .def_readonly("n_evals", &FitResult::n_evals)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("packed_optimum", &FitResult::packed_optimum)
      .def_readonly("start_index", &FitResult::start_index)
      .def_readonly("grad_inf_norm", &FitResult::grad_inf_norm);
  mod.def(
      "fit",
      [](const TimeSeries& s, Index m, int n_starts, int max_evals, double tol,
         std::uint64_t seed, unsigned threads) {
        return fit(s, m, fit_options(n_starts, max_evals, tol, seed, threads));
      },
      py::arg("series"), py::arg("m"), py::arg("n_starts") = 5, py::arg("max_evals") = 5000,
      py::arg("tol") = 1e-8, py::arg("seed") = 0, py::arg("threads") = 1,
      py::call_guard<py::gil_scoped_release>());

  mod.def(
      "information_criteria",
      [](double loglik, Index m, Index p, Index n) {
        const InformationCriteria ic = information_criteria(loglik, m, p, n);
        py::dict d;
        d["aic"] = ic.aic;
        d["bic"] = ic.bic;
        d["k"] = ic.k;
        return d;
      },
      py::arg("loglik"), py::arg("m"), py::arg("p"), py::arg("n"));

  py::class_<SelectionRow>(mod, "SelectionRow")
      .def_readonly("m", &SelectionRow::m)
      .def_readonly("available", &SelectionRow::available)
      .def_readonly("loglik", &SelectionRow::loglik)
      .def_readonly("k", &SelectionRow::k)
      .def_readonly("aic", &SelectionRow::aic)
      .def_readonly("bic", &SelectionRow::bic)
      .def_readonly("converged", &SelectionRow::converged)
      .def_readonly("refit", &SelectionRow::refit)
      .def_readonly("message", &SelectionRow::message)
      .def_readonly("fit", &SelectionRow::fit);
  py::class_<SelectionTable>(mod, "SelectionTable")
      .def_readonly("rows", &SelectionTable::rows)
      .def_readonly("n", &SelectionTable::n)
      .def_readonly("argmin_aic", &SelectionTable::argmin_aic)
      .def_readonly("argmin_bic", &SelectionTable::argmin_bic)
      .def("__str__", &format_selection_table);
  mod.def(
      "select_dimension",
      [](const TimeSeries& s, std::vector<Index> m_range, int n_starts, int max_evals,
         double tol, std::uint64_t seed, unsigned threads) {
        SelectOptions o;
        o.fit = fit_options(n_starts, max_evals, tol, seed, threads);
        return select_dimension(s, std::move(m_range), o);
      },
      py::arg("series"), py::arg("m_range") = std::vector<Index>{1, 2, 3},
      py::arg("n_starts") = 5, py::arg("max_evals") = 5000, py::arg("tol") = 1e-8,
      py::arg("seed") = 0, py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

  mod.def(
      "simulate",
      [](const OussmParams& p, const std::vector<double>& times, std::uint64_t seed,
         bool include_measurement_error) {
        Simulation sim = simulate(p, times, seed, include_measurement_error);
        return py::make_tuple(sim.series, sim.latent);
      },
      py::arg("params"), py::arg("times"), py::arg("seed"),
      py::arg("include_measurement_error") = true);
  mod.def("regular_times", &regular_times, py::arg("count"), py::arg("dt"));

  py::class_<Scenario>(mod, "Scenario")
      .def_readonly("id", &Scenario::id)
      .def_readonly("theta_index", &Scenario::theta_index)
      .def_readonly("z_index", &Scenario::z_index)
      .def_readonly("theta", &Scenario::theta)
      .def_readonly("z", &Scenario::z)
      .def_readonly("eigen_label", &Scenario::eigen_label)
      .def_readonly("diag_separation", &Scenario::diag_separation)
      .def_readonly("diag_magnitude", &Scenario::diag_magnitude)
      .def_readonly("z_angle", &Scenario::z_angle);
  mod.def("scenario_suite", &scenario_suite);
  mod.def("find_scenario", &find_scenario, py::arg("id"));
  mod.def("scenario_params", &scenario_params, py::arg("scenario"),
          py::arg("measurement_variance") = 0.1);

  py::class_<ReplicateResult>(mod, "ReplicateResult")
      .def_readonly("replicate", &ReplicateResult::replicate)
      .def_readonly("ok", &ReplicateResult::ok)
      .def_readonly("message", &ReplicateResult::message)
      .def_readonly("theta_hat", &ReplicateResult::theta_hat)
      .def_readonly("exp_error_ratio", &ReplicateResult::exp_error_ratio)
      .def_readonly("m_values", &ReplicateResult::m_values)
      .def_readonly("loglik", &ReplicateResult::loglik)
      .def_readonly("aic", &ReplicateResult::aic)
      .def_readonly("bic", &ReplicateResult::bic)
      .def_readonly("aic_choice", &ReplicateResult::aic_choice)
      .def_readonly("bic_choice", &ReplicateResult::bic_choice);
  mod.def(
      "run_experiment",
      [](const Scenario& sc, int n_replicates, Index series_length, double dt,
         std::uint64_t seed, double measurement_variance, std::vector<Index> m_values,
         int n_starts, unsigned threads) {
        ExperimentOptions o;
        o.n_replicates = n_replicates;
        o.series_length = series_length;
        o.dt = dt;
        o.seed = seed;
        o.measurement_variance = measurement_variance;
        o.m_values = std::move(m_values);
        o.fit.n_starts = n_starts;
        o.threads = threads;
        return run_experiment(sc, o);
      },
      py::arg("scenario"), py::arg("n_replicates") = 20, py::arg("series_length") = 2000,
      py::arg("dt") = 1.0, py::arg("seed") = 1, py::arg("measurement_variance") = 0.1,
      py::arg("m_values") = std::vector<Index>{1, 2, 3}, py::arg("n_starts") = 5,
      py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

  mod.def(
      "read_series",
      [](const std::string& path) {
        LabeledSeries ls = read_series_labeled(path);
        return py::make_tuple(ls.series, ls.labels);
      },
      py::arg("path"));
  mod.def(
      "write_series",
      [](const std::string& path, const TimeSeries& s, const std::vector<std::string>& labels) {
        write_series(path, s, labels);
      },
      py::arg("path"), py::arg("series"), py::arg("labels") = std::vector<std::string>{});
  mod.def("read_params", &read_params, py::arg("path"));
  mod.def(
      "logratio",
      [](const std::string& path, double pseudocount, const std::string& reference) {
        LabeledSeries ls = logratio_transform(read_counts(path, reference), pseudocount);
        return py::make_tuple(ls.series, ls.labels);
      },
      py::arg("path"), py::arg("pseudocount") = 0.3, py::arg("reference") = "");
}
