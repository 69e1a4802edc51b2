#pragma once

// Joint-distribution ("getting it right") testing: the marginal-conditional
// simulator draws (params, y) from prior x likelihood; the successive-
// conditional simulator alternates the Gibbs transition with regeneration of y
// from the likelihood. If every full conditional is correct, both simulators
// target the same joint and all test statistics agree.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mtmbsp/distributions.hpp"
#include "mtmbsp/gibbs.hpp"
#include "mtmbsp/model.hpp"
#include "mtmbsp/random.hpp"
#include "mtmbsp/simulate.hpp"
#include "oracles.hpp"

namespace geweke {

struct Stats {
  std::vector<double> b11, sigma11, nu1, eta1;
};

inline void record(Stats& st, const mtmbsp::ChainState& state) {
  st.b11.push_back(state.b(0, 0));
  st.sigma11.push_back(state.sigma(0, 0));
  st.nu1.push_back(state.nu(0));
  st.eta1.push_back(state.eta(0));
}

inline mtmbsp::ChainState prior_draw(const mtmbsp::Dataset& d, const mtmbsp::Hyperparameters& h,
                                     mtmbsp::RandomStream& s) {
  const Eigen::Index n = d.n(), p = d.p(), q = d.q();
  mtmbsp::ChainState state;
  state.eta.resize(p);
  state.nu.resize(p);
  state.b.resize(p, q);
  for (Eigen::Index j = 0; j < p; ++j) {
    state.eta(j) = mtmbsp::sample_gamma(h.a, h.tau, s);
    state.nu(j) = mtmbsp::sample_gamma(h.u, state.eta(j), s);
    for (Eigen::Index k = 0; k < q; ++k) state.b(j, k) = std::sqrt(state.nu(j)) * s.normal();
  }
  state.sigma = mtmbsp::sample_inverse_wishart(
      h.resolved_d1(q), h.d2 * Eigen::MatrixXd::Identity(q, q), s);
  const Eigen::MatrixXd sl = mtmbsp::chol_spd(state.sigma);
  state.u.resize(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd g(q);
    for (Eigen::Index k = 0; k < q; ++k) g(k) = s.normal();
    state.u.row(i) = (sl * g).transpose();
  }
  state.w = Eigen::MatrixXd::Ones(n, q);
  state.r = Eigen::VectorXd::Zero(q);
  for (Eigen::Index k = 0; k < q; ++k) {
    const auto& kind = d.schema.kinds[static_cast<std::size_t>(k)];
    if (kind.tag == mtmbsp::ResponseKind::Tag::NegBinomial) state.r(k) = kind.r_init;
  }
  return state;
}

inline void regenerate_y(mtmbsp::Dataset& d, const mtmbsp::ChainState& state,
                         mtmbsp::RandomStream& s) {
  const Eigen::MatrixXd theta = d.x * state.b + state.u;
  d.y = mtmbsp::emit_responses(theta, d.schema, state.r, s);
}

inline Stats marginal_conditional(mtmbsp::Dataset d, const mtmbsp::Hyperparameters& h, int m,
                                  std::uint64_t seed) {
  mtmbsp::RandomStream s(seed, 0x6d63u);
  Stats st;
  for (int i = 0; i < m; ++i) {
    const mtmbsp::ChainState state = prior_draw(d, h, s);
    regenerate_y(d, state, s);
    record(st, state);
  }
  return st;
}

inline Stats successive_conditional(mtmbsp::Dataset d, const mtmbsp::Hyperparameters& h, int m,
                                    std::uint64_t seed, int burn = 200) {
  mtmbsp::RandomStream root(seed, 0x7363u);
  mtmbsp::RandomStream ps = root.child(~std::uint64_t{0});
  mtmbsp::ChainState state = prior_draw(d, h, ps);
  regenerate_y(d, state, ps);
  Stats st;
  for (int i = 0; i < m + burn; ++i) {
    mtmbsp::RandomStream is = root.child(static_cast<std::uint64_t>(i));
    mtmbsp::gibbs_scan(state, d, h, is);
    mtmbsp::RandomStream ys = is.child(1000);
    regenerate_y(d, state, ys);
    if (i >= burn) record(st, state);
  }
  return st;
}

// Two-sample z statistic with batch-means SE on the (autocorrelated) chain side.
inline double zstat(const std::vector<double>& mc, const std::vector<double>& sc) {
  const double se1 = oracle::mean_se(mc);
  const double se2 = oracle::batch_se(sc);
  return (oracle::mean(mc) - oracle::mean(sc)) / std::sqrt(se1 * se1 + se2 * se2);
}

}  // namespace geweke
