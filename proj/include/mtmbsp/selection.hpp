#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mtmbsp/gibbs.hpp"

namespace mtmbsp {

struct CredibleSummary {
  Eigen::MatrixXd q025;  // p x q lower endpoints
  Eigen::MatrixXd q50;   // p x q medians
  Eigen::MatrixXd q975;  // p x q upper endpoints

  Eigen::Index p() const { return q50.rows(); }
  Eigen::Index q() const { return q50.cols(); }
};

CredibleSummary make_summary(const PosteriorSamples& samples, double lo = 0.025,
                             double hi = 0.975);

// Screening-rule semantics for the candidate set. PerColumn (default) keeps
// row j when some single interval has slack on either side of the threshold;
// it never drops a row with at least one well-identified cell, which is what
// the sure-screening property needs. Literal takes the max over columns inside
// each clause, which can drop a row whose effects are all negative when one
// column's interval is wide.
enum class ScreenSemantics { Literal, PerColumn };

struct SelectionSets {
  std::vector<Eigen::Index> a0;  // credible-interval selection
  std::vector<Eigen::Index> an;  // threshold screen
  std::vector<Eigen::Index> jn;  // top-K candidates, jn subset of an
  Eigen::Index kn = 0;
};

// Rows whose 95% interval excludes zero in at least one column.
std::vector<Eigen::Index> select_active(const CredibleSummary& summary);

std::vector<Eigen::Index> screen_candidates(const CredibleSummary& summary, double gamma,
                                            ScreenSemantics semantics = ScreenSemantics::PerColumn);

// Top-K ranking by q_j = |max_k median|, K = min(n - 1, |An|); ties broken by
// smaller original index. Returns (Jn sorted ascending, Kn).
std::pair<std::vector<Eigen::Index>, Eigen::Index> rank_topK(
    const std::vector<Eigen::Index>& an, const CredibleSummary& summary, Eigen::Index n);

struct OneStepFit {
  PosteriorSamples samples;
  CredibleSummary summary;
  std::vector<Eigen::Index> selected;  // A0
  Eigen::MatrixXd bhat;                // cellwise posterior median
};

OneStepFit one_step_fit(const Dataset& d, const Hyperparameters& h, const ChainConfig& cfg);

struct TwoStepEstimate {
  Eigen::MatrixXd btilde;              // p x q, rows outside Jn exactly zero
  std::vector<Eigen::Index> selected;  // step-2 A0 mapped to original indices
  SelectionSets sets;
  CredibleSummary summary;             // step-2 intervals zero-padded to p rows
  bool null_model = false;             // empty candidate set
};

TwoStepEstimate two_step_fit(const Dataset& d, const Hyperparameters& h,
                             const ChainConfig& cfg, double gamma,
                             ScreenSemantics semantics = ScreenSemantics::PerColumn,
                             const Hyperparameters* step2_h = nullptr);

}  // namespace mtmbsp
