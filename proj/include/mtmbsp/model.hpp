#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mtmbsp {

// One response column: the family and the constants defining its
// exp(theta)^f1 / (1+exp(theta))^f2 density.
struct ResponseKind {
  enum class Tag { Gaussian, Bernoulli, Binomial, NegBinomial };

  Tag tag = Tag::Gaussian;
  int trials = 1;                    // Binomial M (scalar form)
  std::vector<double> row_trials;    // Binomial with per-row trials (multinomial expansion)
  double r_init = 1.0;               // NegBinomial dispersion start
  double c1 = 10.0;                  // NegBinomial r ~ Gamma(c1, c2) prior
  double c2 = 1.0;

  static ResponseKind gaussian();
  static ResponseKind bernoulli();
  static ResponseKind binomial(int m);
  static ResponseKind binomial_rows(std::vector<double> trials_per_row);
  static ResponseKind neg_binomial(double r_init, double c1 = 10.0, double c2 = 1.0);

  bool discrete() const { return tag != Tag::Gaussian; }
  // Trial count for a given row (Binomial only).
  double trials_at(Eigen::Index row) const;
};

struct ResponseSchema {
  std::vector<ResponseKind> kinds;

  Eigen::Index q() const { return static_cast<Eigen::Index>(kinds.size()); }
};

struct Dataset {
  Eigen::MatrixXd x;  // n x p design
  Eigen::MatrixXd y;  // n x q responses
  ResponseSchema schema;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
  Eigen::Index q() const { return y.cols(); }
};

// The (f1, f2) exponent pair of the discrete density. Gaussian kinds have no
// f-values and raise ParameterError. r_current is the chain's current
// dispersion (NegBinomial only).
std::pair<double, double> f_values(const ResponseKind& kind, double y, double r_current,
                                   Eigen::Index row = 0);

// Tilt coefficient of the conditionally Gaussian likelihood,
// exp(theta)^f1 / (1+exp(theta))^f2 = 2^{-f2} exp(kappa * theta) E[exp(-w theta^2 / 2)].
inline double kappa(double f1, double f2) { return f1 - 0.5 * f2; }

// Working-response entry: y itself for Gaussian, (f1 - f2)/(2 omega) otherwise.
double latent_z(const ResponseKind& kind, double y, double omega, double f1, double f2);

// Multinomial stick-breaking expansion: an n x L count matrix with M trials per
// row becomes L-1 binomial pseudo-columns with row-varying trial counts.
struct MultinomialExpansion {
  Eigen::MatrixXd columns;           // n x (L-1) counts
  std::vector<ResponseKind> kinds;   // matching row-varying binomial kinds
};
MultinomialExpansion expand_multinomial(const Eigen::MatrixXd& counts, int trials);

// Label form (values in {1..L}) with one trial per row.
MultinomialExpansion expand_multinomial_labels(const Eigen::VectorXd& labels, int num_classes);

struct ValidationIssue {
  std::string where;  // "X" or "Y"
  Eigen::Index row;
  Eigen::Index col;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

ValidationReport validate_dataset(const Dataset& d);

}  // namespace mtmbsp
