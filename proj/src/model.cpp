#include "mtmbsp/model.hpp"

#include <cmath>
#include <sstream>

#include "mtmbsp/errors.hpp"

namespace mtmbsp {

ResponseKind ResponseKind::gaussian() {
  ResponseKind k;
  k.tag = Tag::Gaussian;
  return k;
}

ResponseKind ResponseKind::bernoulli() {
  ResponseKind k;
  k.tag = Tag::Bernoulli;
  k.trials = 1;
  return k;
}

ResponseKind ResponseKind::binomial(int m) {
  if (m < 1) throw ParameterError("binomial kind: trials must be >= 1");
  ResponseKind k;
  k.tag = Tag::Binomial;
  k.trials = m;
  return k;
}

ResponseKind ResponseKind::binomial_rows(std::vector<double> trials_per_row) {
  ResponseKind k;
  k.tag = Tag::Binomial;
  k.row_trials = std::move(trials_per_row);
  return k;
}

ResponseKind ResponseKind::neg_binomial(double r_init, double c1, double c2) {
  if (!(r_init > 0.0) || !(c1 > 0.0) || !(c2 > 0.0)) {
    throw ParameterError("neg_binomial kind: rInit, c1, c2 must be positive");
  }
  ResponseKind k;
  k.tag = Tag::NegBinomial;
  k.r_init = r_init;
  k.c1 = c1;
  k.c2 = c2;
  return k;
}

double ResponseKind::trials_at(Eigen::Index row) const {
  if (!row_trials.empty()) return row_trials[static_cast<std::size_t>(row)];
  return static_cast<double>(trials);
}

std::pair<double, double> f_values(const ResponseKind& kind, double y, double r_current,
                                   Eigen::Index row) {
  switch (kind.tag) {
    case ResponseKind::Tag::Gaussian:
      throw ParameterError("f_values: continuous responses have no f-value pair");
    case ResponseKind::Tag::Bernoulli:
      return {y, 1.0};
    case ResponseKind::Tag::Binomial:
      return {y, kind.trials_at(row)};
    case ResponseKind::Tag::NegBinomial:
      return {y, y + r_current};
  }
  throw ParameterError("f_values: unknown kind");
}

double latent_z(const ResponseKind& kind, double y, double omega, double f1, double f2) {
  if (kind.tag == ResponseKind::Tag::Gaussian) return y;
  if (!(omega > 0.0)) throw NumericalError("latent_z: omega must be positive");
  return (2.0 * f1 - f2) / (2.0 * omega);
}

MultinomialExpansion expand_multinomial(const Eigen::MatrixXd& counts, int trials) {
  const Eigen::Index n = counts.rows();
  const Eigen::Index num_classes = counts.cols();
  if (num_classes < 3) {
    throw ParameterError("expand_multinomial: need at least 3 classes");
  }
  if (trials < 1) throw ParameterError("expand_multinomial: trials must be >= 1");
  MultinomialExpansion out;
  out.columns.resize(n, num_classes - 1);
  std::vector<std::vector<double>> per_col_trials(static_cast<std::size_t>(num_classes - 1));
  for (auto& v : per_col_trials) v.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double used = 0.0;
    for (Eigen::Index l = 0; l < num_classes; ++l) {
      const double c = counts(i, l);
      if (c < 0.0 || c != std::floor(c)) {
        throw ValidationError("expand_multinomial: counts must be nonnegative integers");
      }
      used += c;
    }
    if (used > static_cast<double>(trials)) {
      std::ostringstream msg;
      msg << "expand_multinomial: row " << i << " counts sum " << used
          << " exceeds trials " << trials;
      throw ValidationError(msg.str());
    }
    double remaining = static_cast<double>(trials);
    for (Eigen::Index l = 0; l + 1 < num_classes; ++l) {
      out.columns(i, l) = counts(i, l);
      per_col_trials[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] = remaining;
      remaining -= counts(i, l);
    }
  }
  for (auto& v : per_col_trials) {
    out.kinds.push_back(ResponseKind::binomial_rows(std::move(v)));
  }
  return out;
}

MultinomialExpansion expand_multinomial_labels(const Eigen::VectorXd& labels, int num_classes) {
  const Eigen::Index n = labels.size();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, num_classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lab = labels(i);
    if (lab < 1.0 || lab > static_cast<double>(num_classes) || lab != std::floor(lab)) {
      throw ValidationError("expand_multinomial_labels: labels must be in {1..L}");
    }
    counts(i, static_cast<Eigen::Index>(lab) - 1) = 1.0;
  }
  return expand_multinomial(counts, 1);
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& issue : issues) {
    os << issue.where << "(" << issue.row << "," << issue.col << "): " << issue.message
       << "\n";
  }
  return os.str();
}

ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport report;
  auto add = [&report](const char* where, Eigen::Index row, Eigen::Index col,
                       std::string message) {
    report.issues.push_back({where, row, col, std::move(message)});
  };
  if (d.n() < 2) add("X", 0, 0, "need at least 2 observations");
  if (d.y.rows() != d.x.rows()) add("Y", 0, 0, "row count differs from X");
  if (d.schema.q() != d.y.cols()) add("Y", 0, 0, "schema column count differs from Y");
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
      if (!std::isfinite(d.x(i, j))) add("X", i, j, "non-finite entry");
    }
  }
  const Eigen::Index q = std::min<Eigen::Index>(d.schema.q(), d.y.cols());
  for (Eigen::Index k = 0; k < q; ++k) {
    const ResponseKind& kind = d.schema.kinds[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < d.y.rows(); ++i) {
      const double y = d.y(i, k);
      if (!std::isfinite(y)) {
        add("Y", i, k, "non-finite entry");
        continue;
      }
      switch (kind.tag) {
        case ResponseKind::Tag::Gaussian:
          break;
        case ResponseKind::Tag::Bernoulli:
          if (y != 0.0 && y != 1.0) add("Y", i, k, "Bernoulli entry not in {0,1}");
          break;
        case ResponseKind::Tag::Binomial: {
          const double m = kind.trials_at(i);
          if (y != std::floor(y) || y < 0.0 || y > m) {
            add("Y", i, k, "Binomial entry not an integer in [0, M]");
          }
          break;
        }
        case ResponseKind::Tag::NegBinomial:
          if (y != std::floor(y) || y < 0.0) {
            add("Y", i, k, "NegBinomial entry not a nonnegative integer");
          }
          break;
      }
    }
  }
  return report;
}

}  // namespace mtmbsp
