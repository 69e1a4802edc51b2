#include "mtmbsp/distributions.hpp"

#include <cmath>
#include <limits>

#include "mtmbsp/errors.hpp"

namespace mtmbsp {

namespace {

constexpr double kPi = 3.14159265358979323846;

double lgamma_safe(double x) { return std::lgamma(x); }

}  // namespace

double sample_gamma(double shape, double rate, RandomStream& s) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw ParameterError("sample_gamma: shape and rate must be positive");
  }
  if (shape < 1.0) {
    // Boost to shape+1 and scale back (Marsaglia-Tsang augmentation).
    const double u = s.uniform();
    return sample_gamma(shape + 1.0, rate, s) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = s.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = s.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double sample_poisson(double lambda, RandomStream& s) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("sample_poisson: lambda must be finite and nonnegative");
  }
  if (lambda == 0.0) return 0.0;
  if (lambda < 10.0) {
    const double limit = std::exp(-lambda);
    double prod = 1.0;
    double k = -1.0;
    do {
      k += 1.0;
      prod *= s.uniform();
    } while (prod > limit);
    return k;
  }
  // Hormann's PTRS transformed rejection.
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_lambda = std::log(lambda);
  for (;;) {
    const double u = s.uniform() - 0.5;
    const double v = s.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return k;
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_lambda - lambda - lgamma_safe(k + 1.0)) {
      return k;
    }
  }
}

double pg_mean(double b, double c) {
  if (!(b > 0.0)) throw ParameterError("pg_mean: b must be positive");
  const double ac = std::fabs(c);
  if (ac < 1e-6) return b * 0.25 * (1.0 - ac * ac / 12.0);
  return b / (2.0 * c) * std::tanh(0.5 * c);
}

double pg_var(double b, double c) {
  if (!(b > 0.0)) throw ParameterError("pg_var: b must be positive");
  const double ac = std::fabs(c);
  if (ac < 1e-3) return b / 24.0;
  const double ch = std::cosh(0.5 * ac);
  return b * (std::sinh(ac) - ac) / (4.0 * ac * ac * ac * ch * ch);
}

namespace {

constexpr double kPgTrunc = 0.64;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Piecewise coefficients a_n(x) of the alternating Jacobi series.
double pg_series_coef(int n, double x) {
  const double h = n + 0.5;
  if (x > kPgTrunc) {
    return kPi * h * std::exp(-h * h * kPi * kPi * x / 2.0);
  }
  return kPi * h * std::pow(2.0 / (kPi * x), 1.5) * std::exp(-2.0 * h * h / x);
}

// CDF at t of an inverse-Gaussian(mu = 1/z, lambda = 1); Levy limit at z = 0.
double pg_igauss_cdf(double t, double z) {
  if (z <= 0.0) {
    return std::erfc(1.0 / std::sqrt(2.0 * t));
  }
  const double rt = 1.0 / std::sqrt(t);
  const double term1 = normal_cdf(rt * (t * z - 1.0));
  const double w = rt * (t * z + 1.0);
  double term2;
  if (w < 30.0) {
    term2 = std::exp(2.0 * z) * normal_cdf(-w);
  } else {
    // Mills-ratio tail; avoids erfc underflow at large tilts.
    const double log_phi = -0.5 * w * w - 0.5 * std::log(2.0 * kPi) - std::log(w);
    term2 = std::exp(2.0 * z + log_phi);
  }
  return term1 + term2;
}

// Inverse-Gaussian(1/z, 1) truncated to (0, t).
double pg_truncated_igauss(double z, double t, RandomStream& s) {
  if (z <= 0.0 || 1.0 / z > t) {
    for (;;) {
      double e1;
      double e2;
      do {
        e1 = s.exponential();
        e2 = s.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      const double x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      if (z <= 0.0 || std::log(s.uniform()) <= -0.5 * z * z * x) return x;
    }
  }
  const double mu = 1.0 / z;
  for (;;) {
    const double g = s.normal();
    const double y = g * g;
    // Michael-Schucany-Haas; the small root is derived from the large one
    // (x_minus * x_plus = mu^2) to dodge cancellation at large y.
    const double x_plus = mu + 0.5 * mu * mu * y +
                          0.5 * mu * std::sqrt(4.0 * mu * y + mu * mu * y * y);
    double x = mu * mu / x_plus;
    if (s.uniform() > mu / (mu + x)) x = x_plus;
    if (x <= t) return x;
  }
}

}  // namespace

double sample_pg1(double c, RandomStream& s) {
  const double z = 0.5 * std::fabs(c);
  const double k = kPi * kPi / 8.0 + z * z / 2.0;
  const double p_right = kPi / (2.0 * k) * std::exp(-k * kPgTrunc);
  const double p_left = 2.0 * std::exp(-z) * pg_igauss_cdf(kPgTrunc, z);
  const double ratio = p_right / (p_right + p_left);
  for (;;) {
    double x;
    if (s.uniform() < ratio) {
      x = kPgTrunc + s.exponential() / k;
    } else {
      x = pg_truncated_igauss(z, kPgTrunc, s);
    }
    double partial = pg_series_coef(0, x);
    const double y = s.uniform() * partial;
    int n = 0;
    for (;;) {
      ++n;
      if (n % 2 == 1) {
        partial -= pg_series_coef(n, x);
        if (y <= partial) return 0.25 * x;
      } else {
        partial += pg_series_coef(n, x);
        if (y > partial) break;
      }
    }
  }
}

double sample_polya_gamma(double b, double c, RandomStream& s, double approx_threshold) {
  if (!(b > 0.0)) throw ParameterError("sample_polya_gamma: b must be positive");
  if (!std::isfinite(c)) throw ParameterError("sample_polya_gamma: c must be finite");
  if (b >= approx_threshold) {
    const double m = pg_mean(b, c);
    const double sd = std::sqrt(pg_var(b, c));
    for (;;) {
      const double draw = m + sd * s.normal();
      if (draw > 0.0) return draw;
    }
  }
  const double nfull = std::floor(b);
  const double frac = b - nfull;
  double total = 0.0;
  for (double i = 0.0; i < nfull; i += 1.0) total += sample_pg1(c, s);
  if (frac > 0.0) {
    // Moment-matched gamma keeps the fractional term positive without the
    // mean bias a truncated Gaussian would introduce.
    const double m = pg_mean(frac, c);
    const double v = pg_var(frac, c);
    total += sample_gamma(m * m / v, m / v, s);
  }
  if (total <= 0.0) total = std::numeric_limits<double>::min();
  return total;
}

namespace {

// Two-parameter GIG(lam, omega): f(x) ~ x^(lam-1) exp(-omega (x + 1/x)/2),
// lam >= 0, omega > 0. Log quasi-density.
inline double gig_lnq(double x, double lam, double omega) {
  return (lam - 1.0) * std::log(x) - 0.5 * omega * (x + 1.0 / x);
}

inline double gig_mode(double lam, double omega) {
  return ((lam - 1.0) + std::sqrt((lam - 1.0) * (lam - 1.0) + omega * omega)) / omega;
}

// Ratio-of-uniforms with mode shift (Dagpunar); for lam > 2 or omega > 3.
double gig_rou_shift(double lam, double omega, RandomStream& s) {
  const double xm = gig_mode(lam, omega);
  // Cubic for the stationary points of (x - xm)^2 q(x).
  const double a = -(2.0 * (lam + 1.0) / omega + xm);
  const double b = 2.0 * (lam - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q3 = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double fi = std::acos(-q3 / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * kPi) - a / 3.0;
  const double lnqm = gig_lnq(xm, lam, omega);
  const double uplus = (y1 - xm) * std::exp(0.5 * (gig_lnq(y1, lam, omega) - lnqm));
  const double uminus = (y2 - xm) * std::exp(0.5 * (gig_lnq(y2, lam, omega) - lnqm));
  for (;;) {
    const double u = uminus + s.uniform() * (uplus - uminus);
    const double v = s.uniform();
    const double x = u / v + xm;
    if (x <= 0.0) continue;
    if (2.0 * std::log(v) <= gig_lnq(x, lam, omega) - lnqm) return x;
  }
}

// Plain ratio-of-uniforms; for moderate parameters.
double gig_rou_noshift(double lam, double omega, RandomStream& s) {
  const double xm = gig_mode(lam, omega);
  // Max of x sqrt(q(x)).
  const double ym = ((lam + 1.0) + std::sqrt((lam + 1.0) * (lam + 1.0) + omega * omega)) / omega;
  const double lnqm = gig_lnq(xm, lam, omega);
  const double uplus = ym * std::exp(0.5 * (gig_lnq(ym, lam, omega) - lnqm));
  for (;;) {
    const double u = s.uniform() * uplus;
    const double v = s.uniform();
    const double x = u / v;
    if (2.0 * std::log(v) <= gig_lnq(x, lam, omega) - lnqm) return x;
  }
}

// Hormann-Leydold decomposition for 0 <= lam < 1 and small omega; works in
// log space so tiny omega cannot overflow the constant segment.
double gig_small_params(double lam, double omega, RandomStream& s) {
  const double xm = gig_mode(lam, omega);
  const double x0 = omega / (1.0 - lam);
  const double ln_k0 = gig_lnq(xm, lam, omega);
  const double area0 = std::exp(ln_k0 + std::log(x0));
  double area1 = 0.0;
  double k1 = 0.0;
  if (x0 < 2.0 / omega) {
    k1 = std::exp(-omega);
    area1 = (lam == 0.0)
                ? k1 * std::log(2.0 / (omega * omega))
                : k1 / lam * (std::pow(2.0 / omega, lam) - std::pow(x0, lam));
  }
  const double x0b = std::max(x0, 2.0 / omega);
  const double ln_k2 = (lam - 1.0) * std::log(x0b);
  const double area2 = std::exp(ln_k2 + std::log(2.0 / omega) - 0.5 * omega * x0b);
  const double total = area0 + area1 + area2;
  for (;;) {
    const double pick = s.uniform() * total;
    double x;
    double ln_hat;
    if (pick <= area0) {
      x = pick / area0 * x0;
      if (x <= 0.0) continue;
      ln_hat = ln_k0;
    } else if (pick <= area0 + area1) {
      const double u = pick - area0;
      x = (lam == 0.0)
              ? x0 * std::exp(u / k1)
              : std::pow(std::pow(x0, lam) + u * lam / k1, 1.0 / lam);
      ln_hat = std::log(k1) + (lam - 1.0) * std::log(x);
    } else {
      const double u = pick - area0 - area1;
      x = x0b - 2.0 / omega * std::log1p(-u * omega / 2.0 * std::exp(0.5 * omega * x0b - ln_k2));
      ln_hat = ln_k2 - 0.5 * omega * x;
    }
    if (std::log(s.uniform()) + ln_hat <= gig_lnq(x, lam, omega)) return x;
  }
}

double gig_two_param(double lam, double omega, RandomStream& s) {
  if (lam > 2.0 || omega > 3.0) return gig_rou_shift(lam, omega, s);
  if (lam >= 1.0 - 2.25 * omega * omega || omega > 0.2) return gig_rou_noshift(lam, omega, s);
  return gig_small_params(lam, omega, s);
}

}  // namespace

double sample_gig(double chi, double psi, double lam, RandomStream& s) {
  if (!(chi >= 0.0) || !(psi >= 0.0) || !std::isfinite(lam)) {
    throw ParameterError("sample_gig: chi and psi must be nonnegative, lam finite");
  }
  if (chi == 0.0 && psi == 0.0) {
    throw ParameterError("sample_gig: chi and psi cannot both be zero");
  }
  if (chi == 0.0) {
    if (!(lam > 0.0)) throw ParameterError("sample_gig: chi = 0 requires lam > 0");
    return sample_gamma(lam, 0.5 * psi, s);
  }
  if (psi == 0.0) {
    if (!(lam < 0.0)) throw ParameterError("sample_gig: psi = 0 requires lam < 0");
    return 1.0 / sample_gamma(-lam, 0.5 * chi, s);
  }
  const double alpha = std::sqrt(chi / psi);
  const double omega = std::sqrt(chi * psi);
  const double lam_abs = std::fabs(lam);
  double y = gig_two_param(lam_abs, omega, s);
  if (lam < 0.0) y = 1.0 / y;
  return alpha * y;
}

Eigen::MatrixXd chol_spd(const Eigen::MatrixXd& a) {
  const Eigen::Index q = a.rows();
  Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  double base = sym.trace() / static_cast<double>(q);
  if (!(base > 0.0)) base = 1.0;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(q, q);
  for (double eps = 0.0;;) {
    Eigen::LLT<Eigen::MatrixXd> llt(sym + eps * base * eye);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    eps = (eps == 0.0) ? 1e-10 : eps * 10.0;
    if (eps > 1e-6) break;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  throw NumericalError("chol_spd: Cholesky failed after max jitter", min_eig);
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                           RandomStream& s) {
  const Eigen::Index q = mean.size();
  if (cov.rows() != q || cov.cols() != q) {
    throw ParameterError("sample_mvn: dimension mismatch");
  }
  const Eigen::MatrixXd l = chol_spd(cov);
  Eigen::VectorXd z(q);
  for (Eigen::Index i = 0; i < q; ++i) z(i) = s.normal();
  return mean + l * z;
}

Eigen::VectorXd sample_mvn_precision(const Eigen::MatrixXd& prec, const Eigen::VectorXd& b,
                                     RandomStream& s) {
  const Eigen::Index q = b.size();
  const Eigen::MatrixXd l = chol_spd(prec);
  const Eigen::VectorXd y =
      l.triangularView<Eigen::Lower>().solve(b);
  Eigen::VectorXd z(q);
  for (Eigen::Index i = 0; i < q; ++i) z(i) = s.normal();
  return l.transpose().triangularView<Eigen::Upper>().solve(y + z);
}

Eigen::MatrixXd sample_inverse_wishart(double df, const Eigen::MatrixXd& scale,
                                       RandomStream& s) {
  const Eigen::Index q = scale.rows();
  if (!(df > static_cast<double>(q) - 1.0)) {
    throw ParameterError("sample_inverse_wishart: df must exceed q - 1");
  }
  // Bartlett draw of W ~ Wishart(df, scale^-1); the output is W^-1.
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(q, q);
  const Eigen::MatrixXd scale_l = chol_spd(scale);
  Eigen::MatrixXd scale_inv =
      scale_l.transpose().triangularView<Eigen::Upper>().solve(
          scale_l.triangularView<Eigen::Lower>().solve(eye));
  const Eigen::MatrixXd l = chol_spd(scale_inv);
  Eigen::MatrixXd bart = Eigen::MatrixXd::Zero(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    bart(i, i) = std::sqrt(sample_gamma(0.5 * (df - static_cast<double>(i)), 0.5, s));
    for (Eigen::Index j = 0; j < i; ++j) bart(i, j) = s.normal();
  }
  const Eigen::MatrixXd m = l * bart;  // chol factor of W
  const Eigen::MatrixXd m_inv = m.triangularView<Eigen::Lower>().solve(eye);
  Eigen::MatrixXd sigma = m_inv.transpose() * m_inv;
  return 0.5 * (sigma + sigma.transpose());
}

std::int64_t sample_crt(std::int64_t y, double r, RandomStream& s) {
  if (y < 0) throw ParameterError("sample_crt: y must be nonnegative");
  if (!(r > 0.0)) throw ParameterError("sample_crt: r must be positive");
  std::int64_t tables = 0;
  for (std::int64_t j = 1; j <= y; ++j) {
    if (s.uniform() < r / (r + static_cast<double>(j - 1))) ++tables;
  }
  return tables;
}

Eigen::VectorXd fast_gaussian_posterior(const Eigen::MatrixXd& phi,
                                        const Eigen::VectorXd& alpha,
                                        const Eigen::VectorXd& d, RandomStream& s) {
  const Eigen::Index n = phi.rows();
  const Eigen::Index p = phi.cols();
  if (alpha.size() != n || d.size() != p) {
    throw ParameterError("fast_gaussian_posterior: dimension mismatch");
  }
  if (d.minCoeff() <= 0.0) {
    throw ParameterError("fast_gaussian_posterior: prior variances must be positive");
  }
  if (p <= n) {
    const Eigen::MatrixXd a =
        phi.transpose() * phi + d.cwiseInverse().asDiagonal().toDenseMatrix();
    return sample_mvn_precision(a, phi.transpose() * alpha, s);
  }
  Eigen::VectorXd w(p);
  for (Eigen::Index j = 0; j < p; ++j) w(j) = std::sqrt(d(j)) * s.normal();
  Eigen::VectorXd delta(n);
  for (Eigen::Index i = 0; i < n; ++i) delta(i) = s.normal();
  const Eigen::VectorXd v = phi * w + delta;
  Eigen::MatrixXd m = phi * d.asDiagonal() * phi.transpose();
  m.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("fast_gaussian_posterior: woodbury system not SPD");
  }
  const Eigen::VectorXd sol = llt.solve(alpha - v);
  return w + d.asDiagonal() * (phi.transpose() * sol);
}

}  // namespace mtmbsp
