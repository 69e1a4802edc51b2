#include "mtmbsp/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mtmbsp/distributions.hpp"
#include "mtmbsp/errors.hpp"

namespace mtmbsp {

namespace {

constexpr double kPsiClamp = 1e-12;

std::vector<ResponseKind::Tag> scenario_mix(int scenario) {
  using Tag = ResponseKind::Tag;
  switch (scenario) {
    case 1:
      return {Tag::Gaussian, Tag::Gaussian, Tag::Bernoulli, Tag::Bernoulli};
    case 2:
      return {Tag::Gaussian, Tag::Gaussian, Tag::Bernoulli, Tag::Bernoulli,
              Tag::NegBinomial, Tag::NegBinomial};
    case 3:
      return {Tag::NegBinomial, Tag::NegBinomial, Tag::NegBinomial, Tag::Gaussian,
              Tag::Gaussian};
    case 4:
      return {Tag::Bernoulli, Tag::Bernoulli, Tag::Bernoulli, Tag::Bernoulli};
    case 5:
      return {Tag::Bernoulli, Tag::Bernoulli, Tag::Bernoulli, Tag::NegBinomial,
              Tag::NegBinomial};
    case 6:
      return {Tag::NegBinomial, Tag::NegBinomial, Tag::NegBinomial};
    default:
      throw ValidationError("scenario id must be in 1..6");
  }
}

double signed_uniform_magnitude(double lo, double hi, RandomStream& s) {
  const double mag = lo + (hi - lo) * s.uniform();
  return s.uniform() < 0.5 ? -mag : mag;
}

}  // namespace

ResponseSchema ScenarioSpec::schema() const {
  ResponseSchema schema;
  for (const auto tag : scenario_mix(scenario)) {
    switch (tag) {
      case ResponseKind::Tag::Gaussian:
        schema.kinds.push_back(ResponseKind::gaussian());
        break;
      case ResponseKind::Tag::Bernoulli:
        schema.kinds.push_back(ResponseKind::bernoulli());
        break;
      case ResponseKind::Tag::NegBinomial:
        schema.kinds.push_back(ResponseKind::neg_binomial(r_true, 10.0, 1.0));
        break;
      default:
        break;
    }
  }
  return schema;
}

Eigen::Index ScenarioSpec::q() const {
  return static_cast<Eigen::Index>(scenario_mix(scenario).size());
}

void ScenarioSpec::validate() const {
  scenario_mix(scenario);
  if (n < 2 || p < 1) throw ValidationError("scenario: need n >= 2, p >= 1");
  if (s0 < 1 || s0 > p) throw ValidationError("scenario: need 1 <= s0 <= p");
  if (!(ar_corr > -1.0 && ar_corr < 1.0)) throw ValidationError("scenario: arCorr in (-1,1)");
  if (!(sigma2 > 0.0)) throw ValidationError("scenario: sigma2 must be positive");
  if (!(rho > -1.0 / (static_cast<double>(q()) - 1.0 + 1e-12) && rho < 1.0)) {
    throw ValidationError("scenario: rho outside the positive-definite range");
  }
  if (!(r_true > 0.0)) throw ValidationError("scenario: rTrue must be positive");
}

Eigen::MatrixXd generate_design(const ScenarioSpec& spec, RandomStream& s) {
  Eigen::MatrixXd x(spec.n, spec.p);
  const double rho = spec.ar_corr;
  const double innov_sd = std::sqrt(1.0 - rho * rho);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    x(i, 0) = s.normal();
    for (Eigen::Index j = 1; j < spec.p; ++j) {
      x(i, j) = rho * x(i, j - 1) + innov_sd * s.normal();
    }
  }
  return x;
}

CoefficientDraw generate_coefficients(const ScenarioSpec& spec, RandomStream& s) {
  CoefficientDraw out;
  const auto mix = scenario_mix(spec.scenario);
  const auto q = static_cast<Eigen::Index>(mix.size());
  out.b0 = Eigen::MatrixXd::Zero(spec.p, q);

  // Uniform sample of s0 rows without replacement (partial Fisher-Yates).
  std::vector<Eigen::Index> indices(static_cast<std::size_t>(spec.p));
  for (Eigen::Index j = 0; j < spec.p; ++j) indices[static_cast<std::size_t>(j)] = j;
  for (Eigen::Index i = 0; i < spec.s0; ++i) {
    const auto pick = i + static_cast<Eigen::Index>(
                              s.uniform() * static_cast<double>(spec.p - i));
    std::swap(indices[static_cast<std::size_t>(i)],
              indices[static_cast<std::size_t>(std::min(pick, spec.p - 1))]);
  }
  out.s0.assign(indices.begin(), indices.begin() + spec.s0);
  std::sort(out.s0.begin(), out.s0.end());

  for (const Eigen::Index j : out.s0) {
    for (Eigen::Index k = 0; k < q; ++k) {
      if (mix[static_cast<std::size_t>(k)] == ResponseKind::Tag::NegBinomial) {
        out.b0(j, k) = signed_uniform_magnitude(spec.coef_count_lo, spec.coef_count_hi, s);
      } else {
        out.b0(j, k) = signed_uniform_magnitude(spec.coef_cont_lo, spec.coef_cont_hi, s);
      }
    }
  }
  return out;
}

Eigen::MatrixXd emit_responses(const Eigen::MatrixXd& theta, const ResponseSchema& schema,
                               const Eigen::VectorXd& r_per_col, RandomStream& s) {
  const Eigen::Index n = theta.rows();
  const Eigen::Index q = theta.cols();
  if (schema.q() != q) throw ParameterError("emit_responses: schema/theta mismatch");
  Eigen::MatrixXd y(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < q; ++k) {
      const ResponseKind& kind = schema.kinds[static_cast<std::size_t>(k)];
      const double th = theta(i, k);
      switch (kind.tag) {
        case ResponseKind::Tag::Gaussian:
          y(i, k) = th + s.normal();
          break;
        case ResponseKind::Tag::Bernoulli:
          y(i, k) = s.uniform() < 1.0 / (1.0 + std::exp(-th)) ? 1.0 : 0.0;
          break;
        case ResponseKind::Tag::Binomial: {
          const double prob = 1.0 / (1.0 + std::exp(-th));
          double count = 0.0;
          const double m = kind.trials_at(i);
          for (double t = 0.0; t < m; t += 1.0) {
            if (s.uniform() < prob) count += 1.0;
          }
          y(i, k) = count;
          break;
        }
        case ResponseKind::Tag::NegBinomial: {
          // Gamma-Poisson mixture; success probability logistic(theta).
          double psi = 1.0 / (1.0 + std::exp(-th));
          psi = std::clamp(psi, kPsiClamp, 1.0 - kPsiClamp);
          const double rate = (1.0 - psi) / psi;
          const double lambda = sample_gamma(r_per_col(k), rate, s);
          y(i, k) = sample_poisson(lambda, s);
          break;
        }
      }
    }
  }
  return y;
}

Eigen::MatrixXd generate_responses(const ScenarioSpec& spec, const Eigen::MatrixXd& x,
                                   const Eigen::MatrixXd& b0, RandomStream& s) {
  const Eigen::Index q = b0.cols();
  Eigen::MatrixXd sigma =
      spec.sigma2 * ((1.0 - spec.rho) * Eigen::MatrixXd::Identity(q, q).array() +
                     spec.rho * Eigen::MatrixXd::Ones(q, q).array())
                        .matrix();
  const Eigen::MatrixXd sigma_l = chol_spd(sigma);
  Eigen::MatrixXd theta = x * b0;
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    Eigen::VectorXd z(q);
    for (Eigen::Index k = 0; k < q; ++k) z(k) = s.normal();
    theta.row(i) += (sigma_l * z).transpose();
  }
  const Eigen::VectorXd r_per_col = Eigen::VectorXd::Constant(q, spec.r_true);
  return emit_responses(theta, spec.schema(), r_per_col, s);
}

Metrics compute_metrics(const Eigen::MatrixXd& bhat, const CredibleSummary& intervals,
                        const std::vector<Eigen::Index>& selected, const Eigen::MatrixXd& b0,
                        const std::vector<Eigen::Index>& s0) {
  const Eigen::Index p = b0.rows();
  const Eigen::Index q = b0.cols();
  if (bhat.rows() != p || bhat.cols() != q) {
    throw ParameterError("compute_metrics: estimator shape mismatch");
  }
  Metrics m;
  m.rmse = (bhat - b0).norm() / std::sqrt(static_cast<double>(p * q));

  Eigen::Index covered = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = 0; k < q; ++k) {
      if (intervals.q025(j, k) <= b0(j, k) && b0(j, k) <= intervals.q975(j, k)) ++covered;
    }
  }
  m.cp = static_cast<double>(covered) / static_cast<double>(p * q);

  std::vector<bool> truth(static_cast<std::size_t>(p), false);
  std::vector<bool> called(static_cast<std::size_t>(p), false);
  for (const Eigen::Index j : s0) truth[static_cast<std::size_t>(j)] = true;
  for (const Eigen::Index j : selected) called[static_cast<std::size_t>(j)] = true;
  for (Eigen::Index j = 0; j < p; ++j) {
    const bool t = truth[static_cast<std::size_t>(j)];
    const bool c = called[static_cast<std::size_t>(j)];
    if (t && c) ++m.tp;
    if (!t && c) ++m.fp;
    if (t && !c) ++m.fn;
    if (!t && !c) ++m.tn;
  }
  m.sens = (m.tp + m.fn) > 0
               ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn)
               : 1.0;
  m.spec = (m.tn + m.fp) > 0
               ? static_cast<double>(m.tn) / static_cast<double>(m.tn + m.fp)
               : 1.0;
  const double denom = std::sqrt(static_cast<double>(m.tp + m.fp)) *
                       std::sqrt(static_cast<double>(m.tp + m.fn)) *
                       std::sqrt(static_cast<double>(m.tn + m.fp)) *
                       std::sqrt(static_cast<double>(m.tn + m.fn));
  m.mcc = denom > 0.0 ? (static_cast<double>(m.tp) * static_cast<double>(m.tn) -
                         static_cast<double>(m.fp) * static_cast<double>(m.fn)) /
                            denom
                      : 0.0;
  return m;
}

namespace {

Metrics aggregate(const MetricTable& table, FitMethod which, bool want_sd) {
  std::vector<Metrics> rows;
  for (const auto& row : table.rows) {
    if (!row.ok) continue;
    if (which == FitMethod::OneStep && row.has_one_step) rows.push_back(row.one_step);
    if (which == FitMethod::TwoStep && row.has_two_step) rows.push_back(row.two_step);
  }
  Metrics out;
  if (rows.empty()) return out;
  const double count = static_cast<double>(rows.size());
  auto moment = [&rows, count, want_sd](auto field) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r.*field;
    mean /= count;
    if (!want_sd) return mean;
    if (rows.size() < 2) return 0.0;
    double ss = 0.0;
    for (const auto& r : rows) ss += (r.*field - mean) * (r.*field - mean);
    return std::sqrt(ss / (count - 1.0));
  };
  out.rmse = moment(&Metrics::rmse);
  out.cp = moment(&Metrics::cp);
  out.sens = moment(&Metrics::sens);
  out.spec = moment(&Metrics::spec);
  out.mcc = moment(&Metrics::mcc);
  return out;
}

}  // namespace

Metrics MetricTable::mean(FitMethod which) const { return aggregate(*this, which, false); }

Metrics MetricTable::sd(FitMethod which) const { return aggregate(*this, which, true); }

MetricTable run_replicates(const ScenarioSpec& spec, const Hyperparameters& h,
                           const ChainConfig& cfg, FitMethod method, int replicates,
                           double gamma) {
  spec.validate();
  if (replicates < 1) throw ValidationError("run_replicates: need at least 1 replicate");
  MetricTable table;
  RandomStream root(spec.seed, 0x5253u);
  for (int rep = 0; rep < replicates; ++rep) {
    ReplicateRow row;
    row.replicate = rep;
    const auto start = std::chrono::steady_clock::now();
    try {
      RandomStream rep_stream = root.child(static_cast<std::uint64_t>(rep));
      RandomStream design_stream = rep_stream.child(0);
      RandomStream coef_stream = rep_stream.child(1);
      RandomStream response_stream = rep_stream.child(2);

      Dataset data;
      data.x = generate_design(spec, design_stream);
      const CoefficientDraw coef = generate_coefficients(spec, coef_stream);
      data.y = generate_responses(spec, data.x, coef.b0, response_stream);
      data.schema = spec.schema();

      if (method == FitMethod::OneStep || method == FitMethod::Both) {
        ChainConfig one_cfg = cfg;
        one_cfg.seed = rep_stream.child(3).next_u64();
        const OneStepFit fit = one_step_fit(data, h, one_cfg);
        row.one_step = compute_metrics(fit.bhat, fit.summary, fit.selected, coef.b0, coef.s0);
        row.has_one_step = true;
      }
      if (method == FitMethod::TwoStep || method == FitMethod::Both) {
        ChainConfig two_cfg = cfg;
        two_cfg.seed = rep_stream.child(4).next_u64();
        const TwoStepEstimate fit = two_step_fit(data, h, two_cfg, gamma);
        row.two_step =
            compute_metrics(fit.btilde, fit.summary, fit.selected, coef.b0, coef.s0);
        row.has_two_step = true;
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      ++table.failures;
    }
    const auto end = std::chrono::steady_clock::now();
    row.seconds = std::chrono::duration<double>(end - start).count();
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mtmbsp
