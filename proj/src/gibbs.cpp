#include "mtmbsp/gibbs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "mtmbsp/distributions.hpp"
#include "mtmbsp/errors.hpp"

namespace mtmbsp {

namespace {

constexpr double kPsiClampLo = 1e-12;
constexpr double kGigChiFloor = 1e-30;
constexpr double kNuFloor = 1e-300;

// Stream-id slots for the per-iteration child streams, one per update step.
enum StepStream : std::uint64_t {
  kStreamB = 0,
  kStreamU,
  kStreamW,
  kStreamNu,
  kStreamEta,
  kStreamSigma,
  kStreamR,
};

}  // namespace

void Hyperparameters::validate(Eigen::Index q) const {
  if (!(tau > 0.0)) throw ValidationError("hyperparameters: tau must be positive");
  if (!(u > 0.0) || !(a > 0.0)) throw ValidationError("hyperparameters: u, a must be positive");
  if (!(resolved_d1(q) > static_cast<double>(q) - 1.0)) {
    throw ValidationError("hyperparameters: d1 must exceed q - 1");
  }
  if (!(d2 > 0.0)) throw ValidationError("hyperparameters: d2 must be positive");
  if (!(pg_threshold >= 1.0)) {
    throw ValidationError("hyperparameters: pgThreshold must be >= 1");
  }
}

void ChainConfig::validate() const {
  if (iterations < 1) throw ValidationError("chain config: iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) {
    throw ValidationError("chain config: burnIn must be in [0, iterations)");
  }
  if (thin < 1) throw ValidationError("chain config: thin must be positive");
  if (retained() < 50) {
    throw ValidationError("chain config: fewer than 50 retained draws");
  }
}

double type7_quantile(std::vector<double>& values, double level) {
  if (values.empty()) throw ParameterError("quantile of empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw ParameterError("quantile level outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - std::floor(h)) * (values[lo + 1] - values[lo]);
}

double PosteriorSamples::quantile(Eigen::Index j, Eigen::Index k, double level) const {
  std::vector<double> cell(static_cast<std::size_t>(draws_b.rows()));
  const Eigen::Index col = j * q + k;
  for (Eigen::Index t = 0; t < draws_b.rows(); ++t) {
    cell[static_cast<std::size_t>(t)] = draws_b(t, col);
  }
  return type7_quantile(cell, level);
}

double PosteriorSamples::median(Eigen::Index j, Eigen::Index k) const {
  return quantile(j, k, 0.5);
}

double PosteriorSamples::sigma_quantile(Eigen::Index i, Eigen::Index k, double level) const {
  if (draws_sigma.size() == 0) throw ParameterError("sigma draws were not retained");
  std::vector<double> cell(static_cast<std::size_t>(draws_sigma.rows()));
  const Eigen::Index col = i * q + k;
  for (Eigen::Index t = 0; t < draws_sigma.rows(); ++t) {
    cell[static_cast<std::size_t>(t)] = draws_sigma(t, col);
  }
  return type7_quantile(cell, level);
}

ChainState initialize_state(const Dataset& d, const Hyperparameters& h, RandomStream& s) {
  (void)h;
  (void)s;
  ChainState state;
  state.b = Eigen::MatrixXd::Zero(d.p(), d.q());
  state.u = Eigen::MatrixXd::Zero(d.n(), d.q());
  state.w = Eigen::MatrixXd::Ones(d.n(), d.q());
  state.nu = Eigen::VectorXd::Ones(d.p());
  state.eta = Eigen::VectorXd::Ones(d.p());
  state.sigma = Eigen::MatrixXd::Identity(d.q(), d.q());
  state.r = Eigen::VectorXd::Zero(d.q());
  for (Eigen::Index k = 0; k < d.q(); ++k) {
    const ResponseKind& kind = d.schema.kinds[static_cast<std::size_t>(k)];
    if (kind.tag == ResponseKind::Tag::NegBinomial) state.r(k) = kind.r_init;
  }
  return state;
}

Eigen::MatrixXd compute_latent_z(const ChainState& state, const Dataset& d) {
  Eigen::MatrixXd z(d.n(), d.q());
  for (Eigen::Index k = 0; k < d.q(); ++k) {
    const ResponseKind& kind = d.schema.kinds[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      if (!kind.discrete()) {
        z(i, k) = d.y(i, k);
        continue;
      }
      const auto [f1, f2] = f_values(kind, d.y(i, k), state.r(k), i);
      if (f2 == 0.0) {
        z(i, k) = 0.0;  // zero-information cell, weight w = 0
        continue;
      }
      z(i, k) = latent_z(kind, d.y(i, k), state.w(i, k), f1, f2);
    }
  }
  return z;
}

void update_B(ChainState& state, const Dataset& d, const Hyperparameters& h, RandomStream& s) {
  (void)h;
  const Eigen::Index n = d.n();
  const Eigen::Index p = d.p();
  const Eigen::Index q = d.q();
  const Eigen::MatrixXd z = compute_latent_z(state, d);
  if (p > n) {
    // Fast n^2 p route: the gram X diag(nu) X^T is shared across columns.
    const Eigen::MatrixXd xs = d.x * state.nu.cwiseSqrt().asDiagonal();
    Eigen::MatrixXd gram(n, n);
    gram.setZero();
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xs);
    gram = gram.selfadjointView<Eigen::Lower>();
    for (Eigen::Index k = 0; k < q; ++k) {
      RandomStream cs = s.child(static_cast<std::uint64_t>(k));
      const Eigen::VectorXd sqrt_w = state.w.col(k).cwiseSqrt();
      Eigen::VectorXd wvec(p);
      for (Eigen::Index j = 0; j < p; ++j) wvec(j) = std::sqrt(state.nu(j)) * cs.normal();
      Eigen::VectorXd delta(n);
      for (Eigen::Index i = 0; i < n; ++i) delta(i) = cs.normal();
      const Eigen::VectorXd v = sqrt_w.cwiseProduct(d.x * wvec) + delta;
      const Eigen::VectorXd alpha =
          sqrt_w.cwiseProduct(z.col(k) - state.u.col(k));
      Eigen::MatrixXd sys = (sqrt_w * sqrt_w.transpose()).cwiseProduct(gram);
      sys.diagonal().array() += 1.0;
      Eigen::LLT<Eigen::MatrixXd> llt(sys);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("update_B: woodbury system not SPD");
      }
      const Eigen::VectorXd m = llt.solve(alpha - v);
      state.b.col(k) =
          wvec + state.nu.cwiseProduct(d.x.transpose() * sqrt_w.cwiseProduct(m));
    }
    return;
  }
  for (Eigen::Index k = 0; k < q; ++k) {
    RandomStream cs = s.child(static_cast<std::uint64_t>(k));
    const Eigen::VectorXd& wk = state.w.col(k);
    Eigen::MatrixXd prec = d.x.transpose() * wk.asDiagonal() * d.x;
    prec.diagonal() += state.nu.cwiseInverse();
    const Eigen::VectorXd rhs =
        d.x.transpose() * wk.cwiseProduct(z.col(k) - state.u.col(k));
    state.b.col(k) = sample_mvn_precision(prec, rhs, cs);
  }
}

void update_U(ChainState& state, const Dataset& d, RandomStream& s) {
  const Eigen::Index n = d.n();
  const Eigen::Index q = d.q();
  const Eigen::MatrixXd z = compute_latent_z(state, d);
  const Eigen::MatrixXd theta_fixed = d.x * state.b;  // without random effects
  const Eigen::MatrixXd sigma_l = chol_spd(state.sigma);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(q, q);
  const Eigen::MatrixXd sigma_inv = sigma_l.transpose().triangularView<Eigen::Upper>().solve(
      sigma_l.triangularView<Eigen::Lower>().solve(eye));
  for (Eigen::Index i = 0; i < n; ++i) {
    RandomStream cs = s.child(static_cast<std::uint64_t>(i));
    Eigen::MatrixXd prec = sigma_inv;
    prec.diagonal() += state.w.row(i).transpose();
    const Eigen::VectorXd rhs =
        state.w.row(i).transpose().cwiseProduct(z.row(i).transpose() -
                                                theta_fixed.row(i).transpose());
    state.u.row(i) = sample_mvn_precision(prec, rhs, cs).transpose();
  }
}

void update_W(ChainState& state, const Dataset& d, const Hyperparameters& h, RandomStream& s) {
  const Eigen::MatrixXd theta = d.x * state.b + state.u;
  for (Eigen::Index k = 0; k < d.q(); ++k) {
    const ResponseKind& kind = d.schema.kinds[static_cast<std::size_t>(k)];
    if (!kind.discrete()) continue;  // Gaussian cells stay exactly 1
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      const auto [f1, f2] = f_values(kind, d.y(i, k), state.r(k), i);
      if (f2 == 0.0) {
        state.w(i, k) = 0.0;
        continue;
      }
      RandomStream cs = s.child(static_cast<std::uint64_t>(i * d.q() + k));
      state.w(i, k) = sample_polya_gamma(f2, theta(i, k), cs, h.pg_threshold);
    }
  }
}

void update_nu(ChainState& state, const Hyperparameters& h, RandomStream& s) {
  const Eigen::Index p = state.b.rows();
  const double lam = h.u - 0.5 * static_cast<double>(state.b.cols());
  for (Eigen::Index j = 0; j < p; ++j) {
    RandomStream cs = s.child(static_cast<std::uint64_t>(j));
    double chi = state.b.row(j).squaredNorm();
    if (chi == 0.0 && !(lam > 0.0)) chi = kGigChiFloor;
    const double draw = sample_gig(chi, 2.0 * state.eta(j), lam, cs);
    state.nu(j) = std::max(draw, kNuFloor);
  }
}

void update_eta(ChainState& state, const Hyperparameters& h, RandomStream& s) {
  const Eigen::Index p = state.nu.size();
  for (Eigen::Index j = 0; j < p; ++j) {
    RandomStream cs = s.child(static_cast<std::uint64_t>(j));
    // Full conditional under the nu | eta ~ G(u, eta), eta ~ G(a, tau)
    // hierarchy: the nu-likelihood contributes eta^u, so the shape is a + u.
    state.eta(j) = sample_gamma(h.a + h.u, h.tau + state.nu(j), cs);
  }
}

void update_Sigma(ChainState& state, const Hyperparameters& h, RandomStream& s) {
  const Eigen::Index n = state.u.rows();
  const Eigen::Index q = state.u.cols();
  const double df = static_cast<double>(n) + h.resolved_d1(q);
  Eigen::MatrixXd scale = state.u.transpose() * state.u;
  scale.diagonal().array() += h.d2;
  state.sigma = sample_inverse_wishart(df, scale, s);
}

void update_r(ChainState& state, const Dataset& d, RandomStream& s) {
  const Eigen::MatrixXd theta = d.x * state.b + state.u;
  for (Eigen::Index k = 0; k < d.q(); ++k) {
    const ResponseKind& kind = d.schema.kinds[static_cast<std::size_t>(k)];
    if (kind.tag != ResponseKind::Tag::NegBinomial) continue;
    RandomStream cs = s.child(static_cast<std::uint64_t>(k));
    double table_sum = 0.0;
    double log_term = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      const auto y = static_cast<std::int64_t>(d.y(i, k));
      table_sum += static_cast<double>(sample_crt(y, state.r(k), cs));
      double psi = 1.0 / (1.0 + std::exp(-theta(i, k)));
      psi = std::clamp(psi, kPsiClampLo, 1.0 - kPsiClampLo);
      log_term += std::log1p(-psi);
    }
    state.r(k) = sample_gamma(kind.c1 + table_sum, kind.c2 - log_term, cs);
  }
}

void gibbs_scan(ChainState& state, const Dataset& d, const Hyperparameters& h, RandomStream& s,
                const ChainPins& pins) {
  {
    RandomStream cs = s.child(kStreamB);
    update_B(state, d, h, cs);
  }
  if (!pins.pin_u) {
    RandomStream cs = s.child(kStreamU);
    update_U(state, d, cs);
  }
  {
    RandomStream cs = s.child(kStreamW);
    update_W(state, d, h, cs);
  }
  if (!pins.nu.has_value()) {
    RandomStream cs = s.child(kStreamNu);
    update_nu(state, h, cs);
  }
  {
    RandomStream cs = s.child(kStreamEta);
    update_eta(state, h, cs);
  }
  if (!pins.pin_u) {
    RandomStream cs = s.child(kStreamSigma);
    update_Sigma(state, h, cs);
  }
  {
    RandomStream cs = s.child(kStreamR);
    update_r(state, d, cs);
  }
}

void check_state_invariants(const ChainState& state, const Dataset& d) {
  for (Eigen::Index k = 0; k < d.q(); ++k) {
    const ResponseKind& kind = d.schema.kinds[static_cast<std::size_t>(k)];
    if (!kind.discrete()) {
      for (Eigen::Index i = 0; i < d.n(); ++i) {
        if (state.w(i, k) != 1.0) {
          throw NumericalError("invariant: Gaussian-column W cell changed");
        }
      }
    }
    if (kind.tag == ResponseKind::Tag::NegBinomial && !(state.r(k) > 0.0)) {
      throw NumericalError("invariant: NB dispersion not positive");
    }
  }
  if (!(state.nu.minCoeff() > 0.0)) throw NumericalError("invariant: nu not positive");
  if (!(state.eta.minCoeff() > 0.0)) throw NumericalError("invariant: eta not positive");
  Eigen::LLT<Eigen::MatrixXd> llt(state.sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("invariant: Sigma not SPD");
}

PosteriorSamples run_chain(const Dataset& d, const Hyperparameters& h, const ChainConfig& cfg,
                           const ChainPins& pins) {
  const ValidationReport report = validate_dataset(d);
  if (!report.ok()) {
    throw ValidationError("run_chain: invalid dataset\n" + report.to_string());
  }
  h.validate(d.q());
  cfg.validate();

  RandomStream root(cfg.seed);
  RandomStream init_stream = root.child(~std::uint64_t{0});
  ChainState state = initialize_state(d, h, init_stream);
  if (pins.nu.has_value()) {
    if (pins.nu->size() != d.p()) throw ParameterError("run_chain: pinned nu has wrong length");
    state.nu = *pins.nu;
  }

  PosteriorSamples out;
  out.p = d.p();
  out.q = d.q();
  const int retained = cfg.retained();
  out.draws_b.resize(retained, d.p() * d.q());
  if (cfg.keep_sigma) out.draws_sigma.resize(retained, d.q() * d.q());
  out.draws_r.resize(retained, d.q());

  const auto start = std::chrono::steady_clock::now();
  int stored = 0;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    RandomStream iter_stream = root.child(static_cast<std::uint64_t>(iter));
    try {
      gibbs_scan(state, d, h, iter_stream, pins);
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << e.what() << " (iteration " << iter << ")";
      throw NumericalError(msg.str(), e.min_eigenvalue());
    }
#ifndef NDEBUG
    check_state_invariants(state, d);
#endif
    if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0 && stored < retained) {
      for (Eigen::Index j = 0; j < d.p(); ++j) {
        for (Eigen::Index k = 0; k < d.q(); ++k) {
          out.draws_b(stored, j * d.q() + k) = state.b(j, k);
        }
      }
      if (cfg.keep_sigma) {
        for (Eigen::Index i = 0; i < d.q(); ++i) {
          for (Eigen::Index k = 0; k < d.q(); ++k) {
            out.draws_sigma(stored, i * d.q() + k) = state.sigma(i, k);
          }
        }
      }
      out.draws_r.row(stored) = state.r.transpose();
      ++stored;
    }
  }
  const auto end = std::chrono::steady_clock::now();
  out.seconds_total = std::chrono::duration<double>(end - start).count();
  out.iterations_run = cfg.iterations;
  return out;
}

}  // namespace mtmbsp
