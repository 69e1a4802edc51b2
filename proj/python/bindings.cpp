#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "mtmbsp/distributions.hpp"
#include "mtmbsp/errors.hpp"
#include "mtmbsp/gibbs.hpp"
#include "mtmbsp/io.hpp"
#include "mtmbsp/model.hpp"
#include "mtmbsp/random.hpp"
#include "mtmbsp/selection.hpp"
#include "mtmbsp/simulate.hpp"

namespace py = pybind11;
using namespace mtmbsp;

namespace {

ResponseKind kind_from_dict(const py::dict& spec) {
  const auto name = spec["kind"].cast<std::string>();
  if (name == "gaussian") return ResponseKind::gaussian();
  if (name == "bernoulli") return ResponseKind::bernoulli();
  if (name == "binomial") {
    if (spec.contains("trials-per-row")) {
      return ResponseKind::binomial_rows(spec["trials-per-row"].cast<std::vector<double>>());
    }
    return ResponseKind::binomial(spec["trials"].cast<double>());
  }
  if (name == "neg-binomial") {
    ResponseKind k = ResponseKind::neg_binomial(
        spec.contains("r-init") ? spec["r-init"].cast<double>() : 1.0);
    if (spec.contains("c1")) k.c1 = spec["c1"].cast<double>();
    if (spec.contains("c2")) k.c2 = spec["c2"].cast<double>();
    return k;
  }
  throw ParameterError("unknown response kind '" + name + "'");
}

ResponseSchema schema_from_list(const py::list& kinds) {
  ResponseSchema schema;
  for (const auto& item : kinds) schema.kinds.push_back(kind_from_dict(item.cast<py::dict>()));
  return schema;
}

Dataset make_dataset(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const py::list& kinds) {
  Dataset d;
  d.x = x;
  d.y = y;
  d.schema = schema_from_list(kinds);
  const ValidationReport report = validate_dataset(d);
  if (!report.ok()) throw ValidationError(report.to_string());
  return d;
}

Hyperparameters hyper_from_kwargs(double tau, double u, double a, double d1, double d2,
                                  double pg_threshold) {
  Hyperparameters h;
  h.tau = tau;
  h.u = u;
  h.a = a;
  h.d1 = d1;
  h.d2 = d2;
  h.pg_threshold = pg_threshold;
  return h;
}

ChainConfig chain_from_kwargs(int iterations, int burn_in, int thin, std::uint64_t seed,
                              bool keep_sigma) {
  ChainConfig cfg;
  cfg.iterations = iterations;
  cfg.burn_in = burn_in;
  cfg.thin = thin;
  cfg.seed = seed;
  cfg.keep_sigma = keep_sigma;
  return cfg;
}

py::dict summary_to_dict(const CredibleSummary& s) {
  py::dict out;
  out["q025"] = s.q025;
  out["q50"] = s.q50;
  out["q975"] = s.q975;
  return out;
}

py::dict metrics_to_dict(const Metrics& m) {
  py::dict out;
  out["rmse"] = m.rmse;
  out["cp"] = m.cp;
  out["sens"] = m.sens;
  out["spec"] = m.spec;
  out["mcc"] = m.mcc;
  out["tp"] = m.tp;
  out["fp"] = m.fp;
  out["tn"] = m.tn;
  out["fn"] = m.fn;
  return out;
}

}  // namespace

PYBIND11_MODULE(_mtmbsp, m) {
  m.doc() = "Gibbs sampler for sparse Bayesian multivariate regression with "
            "mixed continuous/discrete responses";
  m.attr("__version__") = kVersion;

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);

  m.def(
      "run_chain",
      [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const py::list& kinds,
         double tau, double u, double a, double d1, double d2, double pg_threshold,
         int iterations, int burn_in, int thin, std::uint64_t seed, bool keep_sigma) {
        const Dataset d = make_dataset(x, y, kinds);
        const PosteriorSamples ps =
            run_chain(d, hyper_from_kwargs(tau, u, a, d1, d2, pg_threshold),
                      chain_from_kwargs(iterations, burn_in, thin, seed, keep_sigma));
        py::dict out;
        out["p"] = ps.p;
        out["q"] = ps.q;
        out["draws_b"] = ps.draws_b;
        out["draws_sigma"] = ps.draws_sigma;
        out["draws_r"] = ps.draws_r;
        out["seconds_total"] = ps.seconds_total;
        out["iterations_run"] = ps.iterations_run;
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("kinds"), py::arg("tau") = 0.001,
      py::arg("u") = 0.5, py::arg("a") = 0.5, py::arg("d1") = -1.0, py::arg("d2") = 10.0,
      py::arg("pg_threshold") = 30.0, py::arg("iterations") = 3000,
      py::arg("burn_in") = 1000, py::arg("thin") = 1, py::arg("seed") = 0,
      py::arg("keep_sigma") = true,
      "Run the one-step Gibbs sampler and return the retained draws.");

  m.def(
      "one_step_fit",
      [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const py::list& kinds,
         double tau, double u, double a, double d1, double d2, double pg_threshold,
         int iterations, int burn_in, int thin, std::uint64_t seed) {
        const Dataset d = make_dataset(x, y, kinds);
        const OneStepFit fit =
            one_step_fit(d, hyper_from_kwargs(tau, u, a, d1, d2, pg_threshold),
                         chain_from_kwargs(iterations, burn_in, thin, seed, true));
        py::dict out;
        out["bhat"] = fit.bhat;
        out["selected"] = fit.selected;
        out["summary"] = summary_to_dict(fit.summary);
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("kinds"), py::arg("tau") = 0.001,
      py::arg("u") = 0.5, py::arg("a") = 0.5, py::arg("d1") = -1.0, py::arg("d2") = 10.0,
      py::arg("pg_threshold") = 30.0, py::arg("iterations") = 3000,
      py::arg("burn_in") = 1000, py::arg("thin") = 1, py::arg("seed") = 0,
      "Posterior-median estimate and credible-interval selection on all predictors.");

  m.def(
      "two_step_fit",
      [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const py::list& kinds,
         double gamma, const std::string& screen_semantics, double tau, double u, double a,
         double d1, double d2, double pg_threshold, int iterations, int burn_in, int thin,
         std::uint64_t seed) {
        const Dataset d = make_dataset(x, y, kinds);
        if (screen_semantics != "literal" && screen_semantics != "per-column") {
          throw ParameterError("screen_semantics must be 'literal' or 'per-column'");
        }
        const ScreenSemantics sem = screen_semantics == "literal"
                                        ? ScreenSemantics::Literal
                                        : ScreenSemantics::PerColumn;
        const TwoStepEstimate est =
            two_step_fit(d, hyper_from_kwargs(tau, u, a, d1, d2, pg_threshold),
                         chain_from_kwargs(iterations, burn_in, thin, seed, true), gamma, sem);
        py::dict out;
        out["btilde"] = est.btilde;
        out["selected"] = est.selected;
        out["an"] = est.sets.an;
        out["jn"] = est.sets.jn;
        out["kn"] = est.sets.kn;
        out["summary"] = summary_to_dict(est.summary);
        out["null_model"] = est.null_model;
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("kinds"), py::arg("gamma") = 0.02,
      py::arg("screen_semantics") = "per-column", py::arg("tau") = 0.001, py::arg("u") = 0.5,
      py::arg("a") = 0.5, py::arg("d1") = -1.0, py::arg("d2") = 10.0,
      py::arg("pg_threshold") = 30.0, py::arg("iterations") = 3000,
      py::arg("burn_in") = 1000, py::arg("thin") = 1, py::arg("seed") = 0,
      "Screen-then-refit estimator; rows outside the candidate set are exactly zero.");

  m.def(
      "simulate_replicates",
      [](int scenario, Eigen::Index n, Eigen::Index p, Eigen::Index s0, int replicates,
         const std::string& method, double gamma, std::uint64_t seed, int iterations,
         int burn_in) {
        ScenarioSpec spec;
        spec.scenario = scenario;
        spec.n = n;
        spec.p = p;
        spec.s0 = s0;
        spec.seed = seed;
        Hyperparameters h;
        ChainConfig cfg;
        cfg.iterations = iterations;
        cfg.burn_in = burn_in;
        cfg.seed = seed;
        const FitMethod fm = method == "one-step"   ? FitMethod::OneStep
                             : method == "two-step" ? FitMethod::TwoStep
                                                    : FitMethod::Both;
        if (method != "one-step" && method != "two-step" && method != "both") {
          throw ParameterError("method must be 'one-step', 'two-step', or 'both'");
        }
        const MetricTable t = run_replicates(spec, h, cfg, fm, replicates, gamma);
        py::list rows;
        for (const ReplicateRow& row : t.rows) {
          py::dict r;
          r["replicate"] = row.replicate;
          r["ok"] = row.ok;
          r["error"] = row.error;
          r["seconds"] = row.seconds;
          if (row.has_one_step) r["one_step"] = metrics_to_dict(row.one_step);
          if (row.has_two_step) r["two_step"] = metrics_to_dict(row.two_step);
          rows.append(r);
        }
        py::dict out;
        out["rows"] = rows;
        out["failures"] = t.failures;
        return out;
      },
      py::arg("scenario") = 1, py::arg("n") = 150, py::arg("p") = 500, py::arg("s0") = 10,
      py::arg("replicates") = 10, py::arg("method") = "both", py::arg("gamma") = 0.02,
      py::arg("seed") = 0, py::arg("iterations") = 3000, py::arg("burn_in") = 1000,
      "Synthetic benchmark replicates with estimation and selection metrics.");

  // Low-level samplers, vectorized over the draw count.
  m.def(
      "sample_polya_gamma",
      [](double b, double c, int size, std::uint64_t seed, double approx_threshold) {
        RandomStream s(seed);
        Eigen::VectorXd out(size);
        for (int i = 0; i < size; ++i) out(i) = sample_polya_gamma(b, c, s, approx_threshold);
        return out;
      },
      py::arg("b"), py::arg("c"), py::arg("size") = 1, py::arg("seed") = 0,
      py::arg("approx_threshold") = 30.0);

  m.def(
      "sample_gig",
      [](double chi, double psi, double lam, int size, std::uint64_t seed) {
        RandomStream s(seed);
        Eigen::VectorXd out(size);
        for (int i = 0; i < size; ++i) out(i) = sample_gig(chi, psi, lam, s);
        return out;
      },
      py::arg("chi"), py::arg("psi"), py::arg("lam"), py::arg("size") = 1, py::arg("seed") = 0);

  m.def(
      "sample_crt",
      [](std::int64_t y, double r, int size, std::uint64_t seed) {
        RandomStream s(seed);
        std::vector<std::int64_t> out(static_cast<std::size_t>(size));
        for (auto& x : out) x = sample_crt(y, r, s);
        return out;
      },
      py::arg("y"), py::arg("r"), py::arg("size") = 1, py::arg("seed") = 0);

  m.def(
      "sample_inverse_wishart",
      [](double df, const Eigen::MatrixXd& scale, std::uint64_t seed) {
        RandomStream s(seed);
        return sample_inverse_wishart(df, scale, s);
      },
      py::arg("df"), py::arg("scale"), py::arg("seed") = 0);

  m.def("pg_mean", &pg_mean, py::arg("b"), py::arg("c"));
  m.def("pg_var", &pg_var, py::arg("b"), py::arg("c"));
}
