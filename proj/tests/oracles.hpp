#pragma once

// Independent reference computations used to check the samplers: closed-form
// moments via Bessel/digamma functions, dense-algebra posteriors, and Monte
// Carlo error estimates.

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <vector>

namespace oracle {

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double acc = 0.0;
  for (const double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

// Standard error of the sample mean for independent draws.
inline double mean_se(const std::vector<double>& v) {
  return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

// Batch-means standard error for autocorrelated (MCMC) draws.
inline double batch_se(const std::vector<double>& v, int batches = 30) {
  const auto n = static_cast<int>(v.size());
  const int len = n / batches;
  std::vector<double> bm;
  for (int b = 0; b < batches; ++b) {
    double acc = 0.0;
    for (int i = b * len; i < (b + 1) * len; ++i) acc += v[static_cast<std::size_t>(i)];
    bm.push_back(acc / len);
  }
  return std::sqrt(variance(bm) / batches);
}

// GIG(chi, psi, lam) moments, density x^(lam-1) exp(-(chi/x + psi x)/2).
// E[X^h] = (chi/psi)^(h/2) K_{lam+h}(s) / K_lam(s), s = sqrt(chi psi).
inline double gig_moment(double chi, double psi, double lam, double h) {
  const double s = std::sqrt(chi * psi);
  return std::pow(chi / psi, 0.5 * h) *
         std::cyl_bessel_k(std::fabs(lam + h), s) / std::cyl_bessel_k(std::fabs(lam), s);
}

inline double digamma(double x) {
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return acc + std::log(x) - 0.5 * inv -
         inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
}

// Mean of the CRT(y, r) table count.
inline double crt_mean(double y, double r) { return r * (digamma(r + y) - digamma(r)); }

// Dense ridge posterior N((X'WX + D^-1)^-1 X'W z, (X'WX + D^-1)^-1) pieces.
struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline GaussianPosterior ridge_posterior(const Eigen::MatrixXd& x, const Eigen::VectorXd& w,
                                         const Eigen::VectorXd& z, const Eigen::VectorXd& dvar) {
  Eigen::MatrixXd prec = x.transpose() * w.asDiagonal() * x;
  prec.diagonal() += dvar.cwiseInverse();
  const Eigen::MatrixXd cov = prec.inverse();
  return {cov * (x.transpose() * w.cwiseProduct(z)), cov};
}

}  // namespace oracle
