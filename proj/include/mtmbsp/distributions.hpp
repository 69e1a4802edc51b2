#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mtmbsp/random.hpp"

namespace mtmbsp {

// Gamma in shape-rate convention (mean = shape/rate) everywhere in this repo.
double sample_gamma(double shape, double rate, RandomStream& s);

double sample_poisson(double lambda, RandomStream& s);

// Polya-Gamma moments: E = (b/2c)(e^c-1)/(1+e^c), limit b/4 at c = 0.
double pg_mean(double b, double c);
double pg_var(double b, double c);

// Exact Devroye draw from PG(1, c).
double sample_pg1(double c, RandomStream& s);

// PG(b, c) draw. Exact (sum of unit draws) for integer b below
// `approx_threshold`; Gaussian moment-matched approximation for b at or above
// it. Non-integer b below the threshold: floor(b) exact unit draws plus an
// approximated fractional term.
double sample_polya_gamma(double b, double c, RandomStream& s,
                          double approx_threshold = 30.0);

// GIG(chi, psi, lam) with density f(x) ~ x^(lam-1) exp(-(chi/x + psi*x)/2).
// chi = 0 requires lam > 0 (reduces to Gamma(lam, psi/2));
// psi = 0 requires lam < 0 (reciprocal of Gamma(-lam, chi/2)).
double sample_gig(double chi, double psi, double lam, RandomStream& s);

// Cholesky factor (lower) of a nearly-SPD matrix. Symmetrizes, then on failure
// adds jitter 1e-10*(trace/q)*I escalating tenfold up to 1e-6*(trace/q);
// beyond that throws NumericalError carrying a minimum-eigenvalue estimate.
Eigen::MatrixXd chol_spd(const Eigen::MatrixXd& a);

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                           RandomStream& s);

// Draw from N(Prec^-1 b, Prec^-1) given the precision matrix.
Eigen::VectorXd sample_mvn_precision(const Eigen::MatrixXd& prec, const Eigen::VectorXd& b,
                                     RandomStream& s);

Eigen::MatrixXd sample_inverse_wishart(double df, const Eigen::MatrixXd& scale,
                                       RandomStream& s);

// Chinese restaurant table count: sum of Bernoulli(r/(r+j-1)), j = 1..y.
std::int64_t sample_crt(std::int64_t y, double r, RandomStream& s);

// Exact draw from N(A^-1 Phi^T alpha, A^-1) with A = Phi^T Phi + diag(d)^-1,
// in O(n^2 p) via the n x n woodbury system (intended for n < p; falls back to
// the direct p x p draw when p <= n).
Eigen::VectorXd fast_gaussian_posterior(const Eigen::MatrixXd& phi,
                                        const Eigen::VectorXd& alpha,
                                        const Eigen::VectorXd& d, RandomStream& s);

}  // namespace mtmbsp
