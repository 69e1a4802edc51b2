#include "mtmbsp/selection.hpp"

#include <algorithm>
#include <cmath>

#include "mtmbsp/errors.hpp"

namespace mtmbsp {

CredibleSummary make_summary(const PosteriorSamples& samples, double lo, double hi) {
  if (!(lo < 0.5 && 0.5 < hi)) {
    throw ParameterError("make_summary: need lo < 0.5 < hi");
  }
  CredibleSummary summary;
  summary.q025.resize(samples.p, samples.q);
  summary.q50.resize(samples.p, samples.q);
  summary.q975.resize(samples.p, samples.q);
  std::vector<double> cell(static_cast<std::size_t>(samples.draws_b.rows()));
  for (Eigen::Index j = 0; j < samples.p; ++j) {
    for (Eigen::Index k = 0; k < samples.q; ++k) {
      const Eigen::Index col = j * samples.q + k;
      for (Eigen::Index t = 0; t < samples.draws_b.rows(); ++t) {
        cell[static_cast<std::size_t>(t)] = samples.draws_b(t, col);
      }
      std::sort(cell.begin(), cell.end());
      auto at = [&cell](double level) {
        const double h = (static_cast<double>(cell.size()) - 1.0) * level;
        const auto idx = static_cast<std::size_t>(std::floor(h));
        if (idx + 1 >= cell.size()) return cell.back();
        return cell[idx] + (h - std::floor(h)) * (cell[idx + 1] - cell[idx]);
      };
      summary.q025(j, k) = at(lo);
      summary.q50(j, k) = at(0.5);
      summary.q975(j, k) = at(hi);
    }
  }
  return summary;
}

std::vector<Eigen::Index> select_active(const CredibleSummary& summary) {
  std::vector<Eigen::Index> selected;
  for (Eigen::Index j = 0; j < summary.p(); ++j) {
    for (Eigen::Index k = 0; k < summary.q(); ++k) {
      if (summary.q025(j, k) > 0.0 || summary.q975(j, k) < 0.0) {
        selected.push_back(j);
        break;
      }
    }
  }
  return selected;
}

std::vector<Eigen::Index> screen_candidates(const CredibleSummary& summary, double gamma,
                                            ScreenSemantics semantics) {
  if (!(gamma > 0.0)) throw ParameterError("screen_candidates: gamma must be positive");
  std::vector<Eigen::Index> an;
  for (Eigen::Index j = 0; j < summary.p(); ++j) {
    bool keep = false;
    if (semantics == ScreenSemantics::Literal) {
      keep = summary.q025.row(j).maxCoeff() > -gamma ||
             summary.q975.row(j).maxCoeff() < gamma;
    } else {
      for (Eigen::Index k = 0; k < summary.q(); ++k) {
        if (summary.q025(j, k) > -gamma || summary.q975(j, k) < gamma) {
          keep = true;
          break;
        }
      }
    }
    if (keep) an.push_back(j);
  }
  return an;
}

std::pair<std::vector<Eigen::Index>, Eigen::Index> rank_topK(
    const std::vector<Eigen::Index>& an, const CredibleSummary& summary, Eigen::Index n) {
  const auto kn = static_cast<Eigen::Index>(
      std::min<std::size_t>(static_cast<std::size_t>(n - 1), an.size()));
  if (kn <= 0 || an.empty()) return {{}, 0};
  std::vector<std::pair<double, Eigen::Index>> scored;
  scored.reserve(an.size());
  for (const Eigen::Index j : an) {
    scored.emplace_back(std::fabs(summary.q50.row(j).maxCoeff()), j);
  }
  // Largest score first; equal scores resolved toward the smaller index.
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<Eigen::Index> jn;
  jn.reserve(static_cast<std::size_t>(kn));
  for (Eigen::Index i = 0; i < kn; ++i) jn.push_back(scored[static_cast<std::size_t>(i)].second);
  std::sort(jn.begin(), jn.end());
  return {jn, kn};
}

OneStepFit one_step_fit(const Dataset& d, const Hyperparameters& h, const ChainConfig& cfg) {
  OneStepFit fit;
  fit.samples = run_chain(d, h, cfg);
  fit.summary = make_summary(fit.samples);
  fit.selected = select_active(fit.summary);
  fit.bhat = fit.summary.q50;
  return fit;
}

TwoStepEstimate two_step_fit(const Dataset& d, const Hyperparameters& h,
                             const ChainConfig& cfg, double gamma,
                             ScreenSemantics semantics, const Hyperparameters* step2_h) {
  const Eigen::Index p = d.p();
  const Eigen::Index q = d.q();

  ChainConfig cfg1 = cfg;
  ChainConfig cfg2 = cfg;
  // Independent derived seeds for the two chains.
  RandomStream seeder(cfg.seed, 0x7473u);
  cfg1.seed = seeder.next_u64();
  cfg2.seed = seeder.next_u64();

  const OneStepFit step1 = one_step_fit(d, h, cfg1);
  TwoStepEstimate out;
  out.sets.an = screen_candidates(step1.summary, gamma, semantics);
  std::tie(out.sets.jn, out.sets.kn) = rank_topK(out.sets.an, step1.summary, d.n());

  out.btilde = Eigen::MatrixXd::Zero(p, q);
  out.summary.q025 = Eigen::MatrixXd::Zero(p, q);
  out.summary.q50 = Eigen::MatrixXd::Zero(p, q);
  out.summary.q975 = Eigen::MatrixXd::Zero(p, q);

  if (out.sets.jn.empty()) {
    out.null_model = true;
    return out;
  }

  Dataset restricted;
  restricted.y = d.y;
  restricted.schema = d.schema;
  restricted.x.resize(d.n(), static_cast<Eigen::Index>(out.sets.jn.size()));
  for (std::size_t c = 0; c < out.sets.jn.size(); ++c) {
    restricted.x.col(static_cast<Eigen::Index>(c)) = d.x.col(out.sets.jn[c]);
  }

  const OneStepFit step2 =
      one_step_fit(restricted, step2_h != nullptr ? *step2_h : h, cfg2);
  for (std::size_t c = 0; c < out.sets.jn.size(); ++c) {
    const Eigen::Index j = out.sets.jn[c];
    const auto jc = static_cast<Eigen::Index>(c);
    out.btilde.row(j) = step2.bhat.row(jc);
    out.summary.q025.row(j) = step2.summary.q025.row(jc);
    out.summary.q50.row(j) = step2.summary.q50.row(jc);
    out.summary.q975.row(j) = step2.summary.q975.row(jc);
  }
  for (const Eigen::Index jc : step2.selected) {
    out.selected.push_back(out.sets.jn[static_cast<std::size_t>(jc)]);
  }
  out.sets.a0 = out.selected;
  return out;
}

}  // namespace mtmbsp
