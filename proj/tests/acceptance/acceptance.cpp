// Acceptance gate: one criterion per invocation (`acceptance N`), one
// PASS/FAIL line per criterion on stdout, exit 0 on pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "mtmbsp/distributions.hpp"
#include "mtmbsp/gibbs.hpp"
#include "mtmbsp/model.hpp"
#include "mtmbsp/random.hpp"
#include "mtmbsp/selection.hpp"
#include "mtmbsp/simulate.hpp"
#include "../geweke.hpp"
#include "../oracles.hpp"

using namespace mtmbsp;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
};

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(4);
  ss << x;
  return ss.str();
}

// |sample mean - truth| within `mult` standard errors of the mean.
void check_mean(Check& c, const std::vector<double>& draws, double truth,
                const std::string& label, double mult = 4.0) {
  const double m = oracle::mean(draws);
  const double se = oracle::mean_se(draws);
  c.expect(std::fabs(m - truth) <= mult * se,
           label + ": mean " + fmt(m) + " vs " + fmt(truth) + " (se " + fmt(se) + ")");
}

// ---------------------------------------------------------------- criterion 1

bool criterion_sampler_moments() {
  Check c;
  const int n_draws = 100000;
  RandomStream s(101);

  // Polya-Gamma moment grid, including the c = 0 limit b/4.
  for (const double b : {0.5, 1.0, 2.0, 30.0, 51.0}) {
    for (const double cc : {0.0, 0.5, 2.0}) {
      std::vector<double> draws(n_draws);
      for (auto& x : draws) x = sample_polya_gamma(b, cc, s);
      check_mean(c, draws, pg_mean(b, cc), "PG(" + fmt(b) + "," + fmt(cc) + ")");
    }
  }

  // GIG: gamma reduction, inverse-gamma reduction, and a Bessel-ratio oracle.
  {
    std::vector<double> draws(n_draws);
    for (auto& x : draws) x = sample_gig(0.0, 4.0, 3.0, s);  // Gamma(3, 2)
    check_mean(c, draws, 1.5, "GIG(0,4,3)");
    for (auto& x : draws) x = sample_gig(4.0, 0.0, -3.0, s);  // 1/Gamma(3, 2)
    check_mean(c, draws, 1.0, "GIG(4,0,-3)");
    for (auto& x : draws) x = sample_gig(1.0, 1.0, 0.5, s);
    check_mean(c, draws, oracle::gig_moment(1.0, 1.0, 0.5, 1.0), "GIG(1,1,0.5)");
  }

  // Inverse-Wishart entrywise mean: IW(10, I2) -> I2/7.
  {
    std::vector<double> d00(n_draws), d01(n_draws), d11(n_draws);
    const Eigen::MatrixXd scale = Eigen::MatrixXd::Identity(2, 2);
    for (int i = 0; i < n_draws; ++i) {
      const Eigen::MatrixXd w = sample_inverse_wishart(10.0, scale, s);
      d00[static_cast<std::size_t>(i)] = w(0, 0);
      d01[static_cast<std::size_t>(i)] = w(0, 1);
      d11[static_cast<std::size_t>(i)] = w(1, 1);
    }
    check_mean(c, d00, 1.0 / 7.0, "IW(10,I2)[0,0]");
    check_mean(c, d01, 0.0, "IW(10,I2)[0,1]");
    check_mean(c, d11, 1.0 / 7.0, "IW(10,I2)[1,1]");
  }

  // CRT table counts against the digamma-difference mean.
  for (const auto [y, r] : {std::pair{2.0, 1.0}, {20.0, 3.0}, {7.0, 0.5}}) {
    std::vector<double> draws(n_draws);
    for (auto& x : draws) {
      x = static_cast<double>(sample_crt(static_cast<std::int64_t>(y), r, s));
    }
    check_mean(c, draws, oracle::crt_mean(y, r), "CRT(" + fmt(y) + "," + fmt(r) + ")");
  }

  // fast_gaussian_posterior vs the dense oracle on every p <= 8, n = 5.
  const int fg_draws = 100000;
  for (int p = 1; p <= 8; ++p) {
    const int n = 5;
    Eigen::MatrixXd phi(n, p);
    Eigen::VectorXd alpha(n), dvar(p);
    for (int i = 0; i < n; ++i) {
      alpha(i) = s.normal();
      for (int j = 0; j < p; ++j) phi(i, j) = s.normal();
    }
    for (int j = 0; j < p; ++j) dvar(j) = 0.3 + 2.0 * s.uniform();
    const oracle::GaussianPosterior post =
        oracle::ridge_posterior(phi, Eigen::VectorXd::Ones(n), alpha, dvar);

    Eigen::MatrixXd draws(fg_draws, p);
    for (int t = 0; t < fg_draws; ++t) {
      draws.row(t) = fast_gaussian_posterior(phi, alpha, dvar, s).transpose();
    }
    const Eigen::RowVectorXd mean = draws.colwise().mean();
    const Eigen::MatrixXd centered = draws.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / (fg_draws - 1);
    for (int i = 0; i < p; ++i) {
      const double se_m = std::sqrt(post.cov(i, i) / fg_draws);
      c.expect(std::fabs(mean(i) - post.mean(i)) <= 4.0 * se_m,
               "fgp p=" + std::to_string(p) + " mean[" + std::to_string(i) + "]");
      for (int j = i; j < p; ++j) {
        const double se_c = std::sqrt(
            (post.cov(i, i) * post.cov(j, j) + post.cov(i, j) * post.cov(i, j)) / fg_draws);
        c.expect(std::fabs(cov(i, j) - post.cov(i, j)) <= 4.0 * se_c,
                 "fgp p=" + std::to_string(p) + " cov[" + std::to_string(i) + "," +
                     std::to_string(j) + "]");
      }
    }
  }

  if (!c.ok) std::cout << "  detail: " << c.detail.str() << "\n";
  return c.ok;
}

// ---------------------------------------------------------------- criterion 2

bool criterion_geweke() {
  Dataset d;
  const Eigen::Index n = 20, p = 3;
  RandomStream xs(202);
  d.x.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.x(i, j) = 0.5 * xs.normal();
  }
  d.y = Eigen::MatrixXd::Zero(n, 2);  // regenerated by both simulators
  d.schema.kinds = {ResponseKind::gaussian(), ResponseKind::bernoulli()};

  // Shape choices keep the prior moments of every tracked statistic finite.
  Hyperparameters h;
  h.u = 2.0;
  h.a = 4.0;
  h.tau = 2.0;
  h.d1 = 7.0;
  h.d2 = 2.0;

  const int m = 10000;
  const geweke::Stats mc = geweke::marginal_conditional(d, h, m, 303);
  const geweke::Stats sc = geweke::successive_conditional(d, h, m, 303);

  Check c;
  const std::pair<const char*, double> stats[] = {
      {"B11", geweke::zstat(mc.b11, sc.b11)},
      {"Sigma11", geweke::zstat(mc.sigma11, sc.sigma11)},
      {"nu1", geweke::zstat(mc.nu1, sc.nu1)},
      {"eta1", geweke::zstat(mc.eta1, sc.eta1)},
  };
  std::cout << "  z:";
  for (const auto& [name, z] : stats) {
    std::cout << " " << name << "=" << fmt(z);
    c.expect(std::fabs(z) <= 4.0, std::string(name) + " |z| = " + fmt(std::fabs(z)));
  }
  std::cout << "\n";
  if (!c.ok) std::cout << "  detail: " << c.detail.str() << "\n";
  return c.ok;
}

// ---------------------------------------------------------------- criterion 3

bool criterion_conjugate_oracle() {
  const Eigen::Index n = 40, p = 6;
  RandomStream gen(404);
  Dataset d;
  d.x.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.x(i, j) = gen.normal();
  }
  Eigen::VectorXd beta(p);
  beta << 1.5, -2.0, 0.0, 0.5, 0.0, 1.0;
  d.y.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) d.y(i, 0) = d.x.row(i).dot(beta) + gen.normal();
  d.schema.kinds = {ResponseKind::gaussian()};

  const Eigen::VectorXd nu = Eigen::VectorXd::Constant(p, 0.7);
  ChainPins pins;
  pins.nu = nu;
  pins.pin_u = true;

  Hyperparameters h;
  ChainConfig cfg;
  cfg.iterations = 12000;
  cfg.burn_in = 500;
  cfg.seed = 405;
  const PosteriorSamples ps = run_chain(d, h, cfg, pins);

  const oracle::GaussianPosterior post =
      oracle::ridge_posterior(d.x, Eigen::VectorXd::Ones(n), d.y.col(0), nu);

  Check c;
  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<double> chain(static_cast<std::size_t>(ps.draws_b.rows()));
    for (Eigen::Index t = 0; t < ps.draws_b.rows(); ++t) {
      chain[static_cast<std::size_t>(t)] = ps.draws_b(t, j);
    }
    const double m = oracle::mean(chain);
    const double se = oracle::batch_se(chain);
    c.expect(std::fabs(m - post.mean(j)) <= 3.0 * se,
             "B[" + std::to_string(j) + "]: " + fmt(m) + " vs " + fmt(post.mean(j)) +
                 " (se " + fmt(se) + ")");
  }
  if (!c.ok) std::cout << "  detail: " << c.detail.str() << "\n";
  return c.ok;
}

// ------------------------------------------------------- shared scenario glue

Dataset scenario_dataset(const ScenarioSpec& spec, CoefficientDraw& coef,
                         std::uint64_t rep_seed) {
  RandomStream rep(rep_seed, 0x4143u);
  RandomStream ds = rep.child(0);
  RandomStream cs = rep.child(1);
  RandomStream rs = rep.child(2);
  Dataset d;
  d.x = generate_design(spec, ds);
  coef = generate_coefficients(spec, cs);
  d.y = generate_responses(spec, d.x, coef.b0, rs);
  d.schema = spec.schema();
  return d;
}

bool contains_all(const std::vector<Eigen::Index>& super,
                  const std::vector<Eigen::Index>& sub) {
  for (const Eigen::Index j : sub) {
    if (std::find(super.begin(), super.end(), j) == super.end()) return false;
  }
  return true;
}

// ---------------------------------------------------------------- criterion 4

bool criterion_sure_screening() {
  ScenarioSpec spec;
  spec.scenario = 1;
  spec.n = 150;
  spec.p = 1000;
  spec.s0 = 10;

  int hits = 0;
  for (int rep = 0; rep < 10; ++rep) {
    CoefficientDraw coef;
    const Dataset d = scenario_dataset(spec, coef, 500 + static_cast<std::uint64_t>(rep));
    Hyperparameters h;
    ChainConfig cfg;
    cfg.seed = 600 + static_cast<std::uint64_t>(rep);
    const PosteriorSamples ps = run_chain(d, h, cfg);
    const CredibleSummary sum = make_summary(ps);
    const auto an = screen_candidates(sum, 0.02);
    const auto [jn, kn] = rank_topK(an, sum, d.n());
    const bool hit = contains_all(jn, coef.s0);
    hits += hit ? 1 : 0;
    std::cout << "  rep " << rep << ": |An|=" << an.size() << " Kn=" << kn
              << (hit ? " contains S0" : " MISSES S0") << "\n";
  }
  std::cout << "  S0 within Jn in " << hits << "/10 replicates\n";
  return hits >= 9;
}

// ---------------------------------------------------------------- criterion 5

bool criterion_table2_p500() {
  ScenarioSpec spec;
  spec.scenario = 1;
  spec.n = 150;
  spec.p = 500;
  spec.s0 = 10;
  spec.seed = 707;
  Hyperparameters h;
  ChainConfig cfg;
  const MetricTable t = run_replicates(spec, h, cfg, FitMethod::TwoStep, 10);
  const Metrics m = t.mean(FitMethod::TwoStep);
  std::cout << "  two-step means: rmse=" << fmt(m.rmse) << " sens=" << fmt(m.sens)
            << " spec=" << fmt(m.spec) << " mcc=" << fmt(m.mcc)
            << " (failures " << t.failures << ")\n";
  Check c;
  c.expect(t.failures == 0, "replicate failures");
  c.expect(m.sens >= 0.90, "sens " + fmt(m.sens) + " < 0.90");
  c.expect(m.spec >= 0.97, "spec " + fmt(m.spec) + " < 0.97");
  c.expect(m.mcc >= 0.90, "mcc " + fmt(m.mcc) + " < 0.90");
  c.expect(m.rmse >= 0.2 && m.rmse <= 0.7, "rmse " + fmt(m.rmse) + " outside [0.2, 0.7]");
  if (!c.ok) std::cout << "  detail: " << c.detail.str() << "\n";
  return c.ok;
}

// ---------------------------------------------------------------- criterion 6

bool criterion_ordering_p2000() {
  ScenarioSpec spec;
  spec.scenario = 1;
  spec.n = 150;
  spec.p = 2000;
  spec.s0 = 10;
  spec.seed = 808;
  Hyperparameters h;
  ChainConfig cfg;
  const MetricTable t = run_replicates(spec, h, cfg, FitMethod::Both, 10);
  const Metrics one = t.mean(FitMethod::OneStep);
  const Metrics two = t.mean(FitMethod::TwoStep);
  int sens_wins = 0;
  for (const ReplicateRow& row : t.rows) {
    if (row.ok && row.two_step.sens >= row.one_step.sens) ++sens_wins;
  }
  std::cout << "  mean rmse one-step=" << fmt(one.rmse) << " two-step=" << fmt(two.rmse)
            << "; two-step sens >= one-step in " << sens_wins << "/10 (failures "
            << t.failures << ")\n";
  Check c;
  c.expect(t.failures == 0, "replicate failures");
  c.expect(two.rmse < one.rmse, "two-step rmse not strictly lower");
  c.expect(sens_wins >= 7, "sens ordering holds only " + std::to_string(sens_wins) + "/10");
  if (!c.ok) std::cout << "  detail: " << c.detail.str() << "\n";
  return c.ok;
}

// ---------------------------------------------------------------- criterion 7

bool criterion_scaling() {
  const std::vector<Eigen::Index> ps = {500, 1000, 2000};
  std::vector<double> per_iter;
  for (const Eigen::Index p : ps) {
    ScenarioSpec spec;
    spec.scenario = 1;
    spec.n = 150;
    spec.p = p;
    spec.s0 = 10;
    CoefficientDraw coef;
    const Dataset d = scenario_dataset(spec, coef, 900 + static_cast<std::uint64_t>(p));
    Hyperparameters h;
    ChainConfig cfg;
    cfg.iterations = 60;
    cfg.burn_in = 10;
    cfg.seed = 901;
    // Warm-up run so allocation and code paths are hot before timing.
    {
      ChainConfig warm = cfg;
      warm.iterations = 55;
      warm.burn_in = 5;
      run_chain(d, h, warm);
    }
    const auto t0 = Clock::now();
    const PosteriorSamples samples = run_chain(d, h, cfg);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    per_iter.push_back(secs / cfg.iterations);
    std::cout << "  p=" << p << ": " << fmt(per_iter.back() * 1e3) << " ms/iter ("
              << samples.iterations_run << " iters)\n";
  }
  // O(p) growth: time per iteration per predictor should be flat across p.
  std::vector<double> rate(3);
  for (int i = 0; i < 3; ++i) rate[static_cast<std::size_t>(i)] = per_iter[static_cast<std::size_t>(i)] / static_cast<double>(ps[static_cast<std::size_t>(i)]);
  const double mid = oracle::mean(rate);
  Check c;
  for (int i = 0; i < 3; ++i) {
    const double rel = rate[static_cast<std::size_t>(i)] / mid;
    c.expect(rel >= 0.65 && rel <= 1.35,
             "p=" + std::to_string(ps[static_cast<std::size_t>(i)]) + " deviates " + fmt(rel) +
                 "x from linear");
  }
  if (!c.ok) std::cout << "  detail: " << c.detail.str() << "\n";
  return c.ok;
}

// ---------------------------------------------------------------- criterion 8

bool criterion_full_table_command() {
#ifndef MTMBSP_CLI_PATH
  std::cout << "  detail: CLI path not configured\n";
  return false;
#else
  const std::string cmd =
      std::string(MTMBSP_CLI_PATH) + " simulate --full-table --dry-run > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const bool ok = status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
  if (!ok) std::cout << "  detail: dry-run exited with status " << status << "\n";
  return ok;
#endif
}

struct Criterion {
  int id;
  const char* name;
  bool (*fn)();
};

const Criterion kCriteria[] = {
    {1, "sampler-moments", criterion_sampler_moments},
    {2, "geweke-joint-distribution", criterion_geweke},
    {3, "conjugate-oracle", criterion_conjugate_oracle},
    {4, "sure-screening-p1000", criterion_sure_screening},
    {5, "table2-scenario1-p500", criterion_table2_p500},
    {6, "one-vs-two-step-p2000", criterion_ordering_p2000},
    {7, "linear-scaling", criterion_scaling},
    {8, "full-table-command", criterion_full_table_command},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  if (argc <= 1 || std::string(argv[1]) == "all") {
    for (const Criterion& c : kCriteria) which.push_back(c.id);
  } else {
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  }

  int failures = 0;
  for (const int id : which) {
    const Criterion* found = nullptr;
    for (const Criterion& c : kCriteria) {
      if (c.id == id) found = &c;
    }
    if (found == nullptr) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    const auto t0 = Clock::now();
    bool ok = false;
    try {
      ok = found->fn();
    } catch (const std::exception& e) {
      std::cout << "  exception: " << e.what() << "\n";
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << found->id << " " << found->name
              << " (" << fmt(secs) << " s)\n";
    failures += ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
