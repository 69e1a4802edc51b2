#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mtmbsp/selection.hpp"

namespace mtmbsp {

// Desk-scale synthetic benchmark: AR(1) design, sparse coefficient matrix,
// compound-symmetric random effects, mixed-type emissions.
struct ScenarioSpec {
  int scenario = 1;  // response mix 1..6
  Eigen::Index n = 150;
  Eigen::Index p = 500;
  Eigen::Index s0 = 10;
  double ar_corr = 0.5;
  double sigma2 = 1.0;
  double rho = 0.5;
  double r_true = 50.0;
  double coef_cont_lo = 0.5;   // |value| range, continuous/binary columns
  double coef_cont_hi = 5.0;
  double coef_count_lo = 0.3;  // |value| range, count columns
  double coef_count_hi = 0.6;
  std::uint64_t seed = 0;

  ResponseSchema schema() const;
  Eigen::Index q() const;
  void validate() const;
};

struct Metrics {
  double rmse = 0.0;
  double cp = 0.0;
  double sens = 0.0;
  double spec = 0.0;
  double mcc = 0.0;
  Eigen::Index tp = 0, fp = 0, tn = 0, fn = 0;
};

Eigen::MatrixXd generate_design(const ScenarioSpec& spec, RandomStream& s);

struct CoefficientDraw {
  Eigen::MatrixXd b0;               // p x q, rows outside s0 exactly zero
  std::vector<Eigen::Index> s0;     // nonzero row indices, ascending
};
CoefficientDraw generate_coefficients(const ScenarioSpec& spec, RandomStream& s);

// Emission given the natural parameters; shared by scenario generation and
// the simulator-consistency tests.
Eigen::MatrixXd emit_responses(const Eigen::MatrixXd& theta, const ResponseSchema& schema,
                               const Eigen::VectorXd& r_per_col, RandomStream& s);

Eigen::MatrixXd generate_responses(const ScenarioSpec& spec, const Eigen::MatrixXd& x,
                                   const Eigen::MatrixXd& b0, RandomStream& s);

Metrics compute_metrics(const Eigen::MatrixXd& bhat, const CredibleSummary& intervals,
                        const std::vector<Eigen::Index>& selected, const Eigen::MatrixXd& b0,
                        const std::vector<Eigen::Index>& s0);

enum class FitMethod { OneStep, TwoStep, Both };

struct ReplicateRow {
  int replicate = 0;
  bool ok = false;
  std::string error;
  Metrics one_step;
  Metrics two_step;
  bool has_one_step = false;
  bool has_two_step = false;
  double seconds = 0.0;
};

struct MetricTable {
  std::vector<ReplicateRow> rows;
  int failures = 0;

  // Mean and empirical SD of (rmse, cp, sens, spec, mcc) over succeeded rows.
  Metrics mean(FitMethod which) const;
  Metrics sd(FitMethod which) const;
};

MetricTable run_replicates(const ScenarioSpec& spec, const Hyperparameters& h,
                           const ChainConfig& cfg, FitMethod method, int replicates,
                           double gamma = 0.02);

}  // namespace mtmbsp
