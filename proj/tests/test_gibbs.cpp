#include "doctest.h"

#include <cmath>
#include <vector>

#include "mtmbsp/distributions.hpp"
#include "mtmbsp/errors.hpp"
#include "mtmbsp/gibbs.hpp"
#include "mtmbsp/model.hpp"
#include "geweke.hpp"
#include "oracles.hpp"

using namespace mtmbsp;

namespace {

Dataset gaussian_dataset(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  RandomStream s(seed);
  Dataset d;
  d.x.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.x(i, j) = s.normal();
  }
  d.y.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) d.y(i, 0) = d.x(i, 0) - 0.5 * d.x(i, 1) + s.normal();
  d.schema.kinds = {ResponseKind::gaussian()};
  return d;
}

}  // namespace

TEST_CASE("config and hyperparameter validation") {
  Hyperparameters h;
  CHECK_NOTHROW(h.validate(4));
  h.tau = 0.0;
  CHECK_THROWS_AS(h.validate(4), ValidationError);
  h = Hyperparameters{};
  h.d1 = 1.0;
  CHECK_THROWS_AS(h.validate(4), ValidationError);  // must exceed q - 1
  CHECK(Hyperparameters{}.resolved_d1(6) == 6.0);

  ChainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.burn_in = cfg.iterations;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = ChainConfig{};
  cfg.iterations = 60;
  cfg.burn_in = 20;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);  // < 50 retained
}

TEST_CASE("type-7 quantiles interpolate linearly") {
  std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(type7_quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(type7_quantile(v, 0.0) == doctest::Approx(1.0));
  CHECK(type7_quantile(v, 1.0) == doctest::Approx(4.0));
  CHECK(type7_quantile(v, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("latent working responses: gaussian passthrough and z*w = kappa") {
  Dataset d;
  d.x = Eigen::MatrixXd::Zero(2, 1);
  d.y.resize(2, 2);
  d.y << 1.4, 1.0, -0.2, 0.0;
  d.schema.kinds = {ResponseKind::gaussian(), ResponseKind::bernoulli()};
  Hyperparameters h;
  RandomStream s(1);
  ChainState state = initialize_state(d, h, s);
  state.w(0, 1) = 0.3;
  state.w(1, 1) = 2.0;
  const Eigen::MatrixXd z = compute_latent_z(state, d);
  CHECK(z(0, 0) == 1.4);
  CHECK(z(1, 0) == -0.2);
  CHECK(z(0, 1) * state.w(0, 1) == doctest::Approx(0.5));
  CHECK(z(1, 1) * state.w(1, 1) == doctest::Approx(-0.5));
}

TEST_CASE("zero-information cells carry w = 0 and z = 0") {
  // Row-varying binomial with zero remaining trials in row 1.
  Dataset d;
  d.x = Eigen::MatrixXd::Ones(2, 1);
  d.y.resize(2, 1);
  d.y << 1.0, 0.0;
  d.schema.kinds = {ResponseKind::binomial_rows({2.0, 0.0})};
  Hyperparameters h;
  RandomStream s(2);
  ChainState state = initialize_state(d, h, s);
  update_W(state, d, h, s);
  CHECK(state.w(1, 0) == 0.0);
  CHECK(state.w(0, 0) > 0.0);
  const Eigen::MatrixXd z = compute_latent_z(state, d);
  CHECK(z(1, 0) == 0.0);
}

TEST_CASE("update_B targets the ridge conditional (dense oracle, p <= n)") {
  Dataset d = gaussian_dataset(12, 3, 10);
  Hyperparameters h;
  RandomStream s(11);
  ChainState state = initialize_state(d, h, s);
  state.nu << 0.5, 2.0, 1.0;
  const auto oracle_post = oracle::ridge_posterior(
      d.x, Eigen::VectorXd::Ones(12), d.y.col(0), state.nu);
  const int m = 40000;
  Eigen::MatrixXd draws(m, 3);
  for (int i = 0; i < m; ++i) {
    RandomStream cs = s.child(static_cast<std::uint64_t>(i));
    update_B(state, d, h, cs);
    draws.row(i) = state.b.col(0).transpose();
  }
  const Eigen::RowVectorXd xbar = draws.colwise().mean();
  for (int j = 0; j < 3; ++j) {
    CHECK(std::fabs(xbar(j) - oracle_post.mean(j)) <
          4.0 * std::sqrt(oracle_post.cov(j, j) / m));
  }
}

TEST_CASE("update_B fast path (p > n) matches the same dense oracle") {
  RandomStream gen(20);
  const Eigen::Index n = 6, p = 10;
  Dataset d;
  d.x.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.x(i, j) = gen.normal();
  }
  d.y.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) d.y(i, 0) = gen.normal();
  d.schema.kinds = {ResponseKind::gaussian()};
  Hyperparameters h;
  RandomStream s(21);
  ChainState state = initialize_state(d, h, s);
  for (Eigen::Index j = 0; j < p; ++j) state.nu(j) = 0.4 + gen.uniform();
  const Eigen::VectorXd nu_fixed = state.nu;
  const auto oracle_post =
      oracle::ridge_posterior(d.x, Eigen::VectorXd::Ones(n), d.y.col(0), nu_fixed);
  const int m = 40000;
  Eigen::MatrixXd draws(m, p);
  for (int i = 0; i < m; ++i) {
    RandomStream cs = s.child(static_cast<std::uint64_t>(i));
    update_B(state, d, h, cs);
    draws.row(i) = state.b.col(0).transpose();
  }
  const Eigen::RowVectorXd xbar = draws.colwise().mean();
  for (Eigen::Index j = 0; j < p; ++j) {
    CHECK(std::fabs(xbar(j) - oracle_post.mean(j)) <
          4.5 * std::sqrt(oracle_post.cov(j, j) / m));
  }
  const Eigen::MatrixXd centered = draws.rowwise() - xbar;
  const Eigen::MatrixXd shat = centered.transpose() * centered / (m - 1);
  CHECK((shat - oracle_post.cov).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("update_U targets its gaussian conditional") {
  // Single observation, q = 2 gaussian responses; U row conditional is
  // N((W + Sigma^-1)^-1 W (z - B'x), (W + Sigma^-1)^-1).
  Dataset d;
  d.x = Eigen::MatrixXd::Zero(2, 1);
  d.y.resize(2, 2);
  d.y << 1.0, -1.0, 0.5, 0.2;
  d.schema.kinds = {ResponseKind::gaussian(), ResponseKind::gaussian()};
  Hyperparameters h;
  RandomStream s(30);
  ChainState state = initialize_state(d, h, s);
  state.sigma << 2.0, 0.6, 0.6, 1.0;

  Eigen::MatrixXd prec = state.sigma.inverse();
  prec.diagonal().array() += 1.0;  // W = 1 on gaussian cells
  const Eigen::MatrixXd cov = prec.inverse();
  const Eigen::VectorXd mu = cov * d.y.row(0).transpose();

  const int m = 40000;
  Eigen::MatrixXd draws(m, 2);
  for (int i = 0; i < m; ++i) {
    RandomStream cs = s.child(static_cast<std::uint64_t>(i));
    update_U(state, d, cs);
    draws.row(i) = state.u.row(0);
  }
  const Eigen::RowVectorXd xbar = draws.colwise().mean();
  CHECK(std::fabs(xbar(0) - mu(0)) < 4.0 * std::sqrt(cov(0, 0) / m));
  CHECK(std::fabs(xbar(1) - mu(1)) < 4.0 * std::sqrt(cov(1, 1) / m));
}

TEST_CASE("update_W matches PG conditional moments") {
  Dataset d;
  d.x = Eigen::MatrixXd::Ones(1, 1);
  d.y.resize(1, 1);
  d.y << 3.0;
  d.schema.kinds = {ResponseKind::binomial(8)};
  Hyperparameters h;
  RandomStream s(40);
  ChainState state = initialize_state(d, h, s);
  state.b(0, 0) = 1.3;  // theta = 1.3
  std::vector<double> draws;
  for (int i = 0; i < 60000; ++i) {
    RandomStream cs = s.child(static_cast<std::uint64_t>(i));
    update_W(state, d, h, cs);
    draws.push_back(state.w(0, 0));
  }
  CHECK(std::fabs(oracle::mean(draws) - pg_mean(8.0, 1.3)) <
        4.0 * oracle::mean_se(draws));
}

TEST_CASE("update_nu matches the GIG conditional (Bessel oracle)") {
  Hyperparameters h;  // u = 0.5, q = 2 -> lam = -0.5
  ChainState state;
  state.b.resize(1, 2);
  state.b << 0.8, -0.6;  // chi = 1.0
  state.eta.resize(1);
  state.eta << 1.5;  // psi = 3.0
  state.nu.resize(1);
  RandomStream s(50);
  std::vector<double> draws;
  for (int i = 0; i < 100000; ++i) {
    RandomStream cs = s.child(static_cast<std::uint64_t>(i));
    update_nu(state, h, cs);
    draws.push_back(state.nu(0));
  }
  const double expected = oracle::gig_moment(1.0, 3.0, -0.5, 1.0);
  CHECK(std::fabs(oracle::mean(draws) - expected) < 4.0 * oracle::mean_se(draws));
}

TEST_CASE("update_eta matches the gamma conditional") {
  Hyperparameters h;  // a = 0.5, tau = 0.001
  ChainState state;
  state.nu.resize(1);
  state.nu << 2.0;
  state.eta.resize(1);
  RandomStream s(60);
  std::vector<double> draws;
  for (int i = 0; i < 100000; ++i) {
    RandomStream cs = s.child(static_cast<std::uint64_t>(i));
    update_eta(state, h, cs);
    draws.push_back(state.eta(0));
  }
  // Shape a + u: the gamma likelihood of nu | eta contributes eta^u.
  CHECK(std::fabs(oracle::mean(draws) - (h.a + h.u) / (h.tau + 2.0)) <
        4.0 * oracle::mean_se(draws));
}

TEST_CASE("update_Sigma conditional mean is (U'U + d2 I)/(n + d1 - q - 1)") {
  Hyperparameters h;
  h.d1 = 6.0;  // keeps the IW entry variance finite for the mean check
  ChainState state;
  state.u.resize(3, 2);
  state.u << 1.0, 0.2, -0.5, 0.7, 0.3, -1.1;
  state.sigma.resize(2, 2);
  RandomStream s(70);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(2, 2);
  const int m = 100000;
  for (int i = 0; i < m; ++i) {
    RandomStream cs = s.child(static_cast<std::uint64_t>(i));
    update_Sigma(state, h, cs);
    acc += state.sigma;
  }
  Eigen::MatrixXd scale = state.u.transpose() * state.u;
  scale.diagonal().array() += h.d2;
  const double denom = 3.0 + h.resolved_d1(2) - 2.0 - 1.0;
  CHECK(((acc / m) - scale / denom).cwiseAbs().maxCoeff() < 0.15);
}

TEST_CASE("update_r keeps the NB dispersion positive and data-driven") {
  RandomStream gen(80);
  Dataset d;
  const Eigen::Index n = 40;
  d.x = Eigen::MatrixXd::Zero(n, 1);
  d.y.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) d.y(i, 0) = std::floor(gen.uniform() * 6.0);
  d.schema.kinds = {ResponseKind::neg_binomial(5.0, 10.0, 1.0)};
  Hyperparameters h;
  RandomStream s(81);
  ChainState state = initialize_state(d, h, s);
  CHECK(state.r(0) == 5.0);
  std::vector<double> draws;
  for (int i = 0; i < 2000; ++i) {
    RandomStream cs = s.child(static_cast<std::uint64_t>(i));
    update_r(state, d, cs);
    REQUIRE(state.r(0) > 0.0);
    REQUIRE(std::isfinite(state.r(0)));
    draws.push_back(state.r(0));
  }
  CHECK(oracle::variance(draws) > 0.0);
}

TEST_CASE("run_chain with pinned nu and U reproduces the closed-form ridge posterior") {
  Dataset d = gaussian_dataset(25, 4, 90);
  Hyperparameters h;
  ChainConfig cfg;
  cfg.iterations = 4200;
  cfg.burn_in = 200;
  cfg.seed = 91;
  ChainPins pins;
  pins.nu = Eigen::VectorXd::Constant(4, 0.7);
  pins.pin_u = true;
  const PosteriorSamples samples = run_chain(d, h, cfg, pins);
  const auto oracle_post =
      oracle::ridge_posterior(d.x, Eigen::VectorXd::Ones(25), d.y.col(0), *pins.nu);
  for (Eigen::Index j = 0; j < 4; ++j) {
    std::vector<double> cell;
    for (Eigen::Index t = 0; t < samples.draws_b.rows(); ++t) {
      cell.push_back(samples.draws_b(t, j));
    }
    const double se = std::sqrt(oracle_post.cov(j, j) / static_cast<double>(cell.size()));
    CHECK(std::fabs(oracle::mean(cell) - oracle_post.mean(j)) < 3.0 * se);
  }
}

TEST_CASE("run_chain is deterministic in the seed") {
  Dataset d = gaussian_dataset(10, 3, 100);
  d.y.conservativeResize(10, 2);
  for (Eigen::Index i = 0; i < 10; ++i) d.y(i, 1) = (i % 2 == 0) ? 1.0 : 0.0;
  d.schema.kinds = {ResponseKind::gaussian(), ResponseKind::bernoulli()};
  Hyperparameters h;
  ChainConfig cfg;
  cfg.iterations = 150;
  cfg.burn_in = 50;
  cfg.seed = 123;
  const PosteriorSamples a = run_chain(d, h, cfg);
  const PosteriorSamples b = run_chain(d, h, cfg);
  CHECK((a.draws_b - b.draws_b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.draws_sigma - b.draws_sigma).cwiseAbs().maxCoeff() == 0.0);
  cfg.seed = 124;
  const PosteriorSamples c = run_chain(d, h, cfg);
  CHECK((a.draws_b - c.draws_b).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("run_chain thinning and retention bookkeeping") {
  Dataset d = gaussian_dataset(8, 2, 110);
  Hyperparameters h;
  ChainConfig cfg;
  cfg.iterations = 260;
  cfg.burn_in = 60;
  cfg.thin = 4;
  cfg.seed = 7;
  const PosteriorSamples samples = run_chain(d, h, cfg);
  CHECK(samples.draws_b.rows() == 50);
  CHECK(samples.iterations_run == 260);
  CHECK(samples.p == 2);
  CHECK(samples.q == 1);
}

TEST_CASE("run_chain rejects invalid data") {
  Dataset d = gaussian_dataset(8, 2, 120);
  d.y(0, 0) = std::nan("");
  Hyperparameters h;
  ChainConfig cfg;
  cfg.iterations = 100;
  cfg.burn_in = 0;
  CHECK_THROWS_AS(run_chain(d, h, cfg), ValidationError);
}

TEST_CASE("geweke joint-distribution agreement (small)") {
  Dataset d;
  RandomStream gen(130);
  const Eigen::Index n = 5, p = 2;
  d.x.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.x(i, j) = 0.6 * gen.normal();
  }
  d.y = Eigen::MatrixXd::Zero(n, 2);
  d.schema.kinds = {ResponseKind::gaussian(), ResponseKind::bernoulli()};
  Hyperparameters h;
  h.u = 2.0;
  h.a = 4.0;
  h.tau = 2.0;
  h.d1 = 7.0;
  h.d2 = 2.0;
  const auto mc = geweke::marginal_conditional(d, h, 20000, 131);
  const auto sc = geweke::successive_conditional(d, h, 20000, 132);
  CHECK(std::fabs(geweke::zstat(mc.b11, sc.b11)) < 4.0);
  CHECK(std::fabs(geweke::zstat(mc.sigma11, sc.sigma11)) < 4.0);
  CHECK(std::fabs(geweke::zstat(mc.nu1, sc.nu1)) < 4.0);
  CHECK(std::fabs(geweke::zstat(mc.eta1, sc.eta1)) < 4.0);
}
