#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "mtmbsp/model.hpp"
#include "mtmbsp/random.hpp"

namespace mtmbsp {

struct Hyperparameters {
  double tau = 0.001;        // global shrinkage
  double u = 0.5;            // TPBN shape pair; (0.5, 0.5) is the horseshoe
  double a = 0.5;
  double d1 = -1.0;          // IW degrees of freedom; negative means "use q"
  double d2 = 10.0;          // IW scale
  double pg_threshold = 30;  // PG shape at which the Gaussian approximation kicks in

  double resolved_d1(Eigen::Index q) const {
    return d1 < 0.0 ? static_cast<double>(q) : d1;
  }
  void validate(Eigen::Index q) const;
};

// All mutable Gibbs quantities. Z is never stored; it is recomputed from
// (W, Y, r) so z * omega = kappa holds identically.
struct ChainState {
  Eigen::MatrixXd b;      // p x q coefficients
  Eigen::MatrixXd u;      // n x q random effects
  Eigen::MatrixXd w;      // n x q PG latents; exactly 1 on Gaussian columns
  Eigen::VectorXd nu;     // p local variances
  Eigen::VectorXd eta;    // p TPBN rate latents
  Eigen::MatrixXd sigma;  // q x q random-effect covariance
  Eigen::VectorXd r;      // per-column NB dispersion (unused entries hold 0)
};

struct ChainConfig {
  int iterations = 3000;
  int burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 0;
  bool keep_sigma = true;

  int retained() const { return (iterations - burn_in) / thin; }
  void validate() const;
};

// Retained post-burn-in draws with a quantile/median query surface.
// drawsB rows are iterations; columns are cells in j*q + k order.
struct PosteriorSamples {
  Eigen::Index p = 0;
  Eigen::Index q = 0;
  Eigen::MatrixXd draws_b;      // retained x (p*q)
  Eigen::MatrixXd draws_sigma;  // retained x (q*q), empty if not kept
  Eigen::MatrixXd draws_r;      // retained x q
  double seconds_total = 0.0;
  int iterations_run = 0;

  // Linear-interpolation empirical quantile ("type 7").
  double quantile(Eigen::Index j, Eigen::Index k, double level) const;
  double median(Eigen::Index j, Eigen::Index k) const;
  double sigma_quantile(Eigen::Index i, Eigen::Index k, double level) const;
};

double type7_quantile(std::vector<double>& values, double level);

ChainState initialize_state(const Dataset& d, const Hyperparameters& h, RandomStream& s);

// Working responses recomputed from (W, Y, r); zero-information cells
// (discrete with f2 = 0) carry z = 0 and w = 0.
Eigen::MatrixXd compute_latent_z(const ChainState& state, const Dataset& d);

void update_B(ChainState& state, const Dataset& d, const Hyperparameters& h, RandomStream& s);
void update_U(ChainState& state, const Dataset& d, RandomStream& s);
void update_W(ChainState& state, const Dataset& d, const Hyperparameters& h, RandomStream& s);
void update_nu(ChainState& state, const Hyperparameters& h, RandomStream& s);
void update_eta(ChainState& state, const Hyperparameters& h, RandomStream& s);
void update_Sigma(ChainState& state, const Hyperparameters& h, RandomStream& s);
void update_r(ChainState& state, const Dataset& d, RandomStream& s);

// Optional block pinning for oracle comparisons: a pinned quantity keeps its
// value for the whole run and its update step is skipped.
struct ChainPins {
  std::optional<Eigen::VectorXd> nu;  // fixed local variances
  bool pin_u = false;                 // keep the random effects at zero
};

// One full sweep in the fixed order B, U, W, nu, eta, Sigma, r.
void gibbs_scan(ChainState& state, const Dataset& d, const Hyperparameters& h, RandomStream& s,
                const ChainPins& pins = {});

void check_state_invariants(const ChainState& state, const Dataset& d);

PosteriorSamples run_chain(const Dataset& d, const Hyperparameters& h, const ChainConfig& cfg,
                           const ChainPins& pins = {});

}  // namespace mtmbsp
