// Command-line front end: fit, simulate, summarize.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "mtmbsp/errors.hpp"
#include "mtmbsp/gibbs.hpp"
#include "mtmbsp/io.hpp"
#include "mtmbsp/model.hpp"
#include "mtmbsp/selection.hpp"
#include "mtmbsp/simulate.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string hash_hex(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

void write_manifest(const fs::path& dir, const mtmbsp::RunConfig& cfg, double seconds,
                    const json& extra = json::object()) {
  json m;
  m["tool"] = "mtmbsp";
  m["version"] = mtmbsp::kVersion;
  m["seed"] = cfg.chain.seed;
  m["manifest-hash"] = hash_hex(mtmbsp::manifest_hash(cfg));
  m["config"] = json::parse(mtmbsp::serialize_config(cfg));
  m["timings"] = {{"seconds-total", seconds}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw mtmbsp::IoError("cannot write " + (dir / "manifest.json").string());
  out << m.dump(2) << "\n";
}

// Attach every RunConfig field as a kebab-case flag; values given on the
// command line override the config file.
void add_config_flags(CLI::App* cmd, mtmbsp::RunConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file; flags override its values");
  cmd->add_option("--tau", cfg.hyper.tau, "global shrinkage parameter");
  cmd->add_option("--u", cfg.hyper.u, "TPBN shape u");
  cmd->add_option("--a", cfg.hyper.a, "TPBN shape a");
  cmd->add_option("--d1", cfg.hyper.d1, "inverse-Wishart degrees of freedom (negative: use q)");
  cmd->add_option("--d2", cfg.hyper.d2, "inverse-Wishart scale");
  cmd->add_option("--pg-threshold", cfg.hyper.pg_threshold,
                  "PG shape above which the Gaussian approximation is used");
  cmd->add_option("--iterations", cfg.chain.iterations, "total Gibbs iterations");
  cmd->add_option("--burn-in", cfg.chain.burn_in, "discarded initial iterations");
  cmd->add_option("--thin", cfg.chain.thin, "thinning interval");
  cmd->add_option("--seed", cfg.chain.seed, "RNG seed");
  cmd->add_flag("--keep-sigma,!--no-keep-sigma", cfg.chain.keep_sigma,
                "retain Sigma draws in the output");
  cmd->add_option("--method", cfg.method, "one-step | two-step | both");
  cmd->add_option("--gamma", cfg.gamma, "screening threshold");
  cmd->add_option("--screen-semantics", cfg.screen_semantics, "per-column (default) | literal");
  cmd->add_flag("--intercept", cfg.intercept, "append a constant column to X");
  cmd->add_flag("--standardize", cfg.standardize, "z-score the predictor columns");
  cmd->add_option("--output-dir", cfg.output_dir, "directory for result files");
}

void add_scenario_flags(CLI::App* cmd, mtmbsp::RunConfig& cfg) {
  cmd->add_option("--scenario", cfg.scenario.scenario, "response mix 1..6");
  cmd->add_option("--n", cfg.scenario.n, "sample size");
  cmd->add_option("--p", cfg.scenario.p, "number of predictors");
  cmd->add_option("--s0", cfg.scenario.s0, "number of active predictor rows");
  cmd->add_option("--ar-corr", cfg.scenario.ar_corr, "AR(1) design correlation");
  cmd->add_option("--sigma2", cfg.scenario.sigma2, "random-effect variance");
  cmd->add_option("--rho", cfg.scenario.rho, "random-effect equicorrelation");
  cmd->add_option("--r-true", cfg.scenario.r_true, "negative-binomial dispersion");
  cmd->add_option("--replicates", cfg.replicates, "number of Monte Carlo replicates");
}

// Re-parse the config file first, then re-apply command-line values on top.
mtmbsp::RunConfig resolve_config(const CLI::App* cmd, const mtmbsp::RunConfig& parsed,
                                 const std::string& config_path) {
  if (config_path.empty()) return parsed;
  mtmbsp::RunConfig base = mtmbsp::load_config_file(config_path);
  mtmbsp::RunConfig merged = base;
  const mtmbsp::RunConfig defaults;
  // A flag counts as "given" when CLI11 saw it; detect via option count.
  auto given = [&](const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--tau")) merged.hyper.tau = parsed.hyper.tau;
  if (given("--u")) merged.hyper.u = parsed.hyper.u;
  if (given("--a")) merged.hyper.a = parsed.hyper.a;
  if (given("--d1")) merged.hyper.d1 = parsed.hyper.d1;
  if (given("--d2")) merged.hyper.d2 = parsed.hyper.d2;
  if (given("--pg-threshold")) merged.hyper.pg_threshold = parsed.hyper.pg_threshold;
  if (given("--iterations")) merged.chain.iterations = parsed.chain.iterations;
  if (given("--burn-in")) merged.chain.burn_in = parsed.chain.burn_in;
  if (given("--thin")) merged.chain.thin = parsed.chain.thin;
  if (given("--seed")) merged.chain.seed = parsed.chain.seed;
  if (given("--keep-sigma") || given("--no-keep-sigma")) {
    merged.chain.keep_sigma = parsed.chain.keep_sigma;
  }
  if (given("--method")) merged.method = parsed.method;
  if (given("--gamma")) merged.gamma = parsed.gamma;
  if (given("--screen-semantics")) merged.screen_semantics = parsed.screen_semantics;
  if (given("--intercept")) merged.intercept = parsed.intercept;
  if (given("--standardize")) merged.standardize = parsed.standardize;
  if (given("--output-dir")) merged.output_dir = parsed.output_dir;
  if (given("--scenario")) merged.scenario.scenario = parsed.scenario.scenario;
  if (given("--n")) merged.scenario.n = parsed.scenario.n;
  if (given("--p")) merged.scenario.p = parsed.scenario.p;
  if (given("--s0")) merged.scenario.s0 = parsed.scenario.s0;
  if (given("--ar-corr")) merged.scenario.ar_corr = parsed.scenario.ar_corr;
  if (given("--sigma2")) merged.scenario.sigma2 = parsed.scenario.sigma2;
  if (given("--rho")) merged.scenario.rho = parsed.scenario.rho;
  if (given("--r-true")) merged.scenario.r_true = parsed.scenario.r_true;
  if (given("--replicates")) merged.replicates = parsed.replicates;
  merged.scenario.seed = merged.chain.seed;
  return merged;
}

void apply_design_transforms(mtmbsp::Dataset& d, const mtmbsp::RunConfig& cfg) {
  if (cfg.standardize) {
    for (Eigen::Index j = 0; j < d.p(); ++j) {
      const double mean = d.x.col(j).mean();
      const double sd = std::sqrt((d.x.col(j).array() - mean).square().sum() /
                                  static_cast<double>(d.n() - 1));
      d.x.col(j).array() -= mean;
      if (sd > 0.0) d.x.col(j) /= sd;
    }
  }
  if (cfg.intercept) {
    d.x.conservativeResize(Eigen::NoChange, d.p() + 1);
    d.x.col(d.p() - 1).setOnes();
  }
}

std::vector<std::string> cell_header(Eigen::Index q, const std::string& stem) {
  std::vector<std::string> h;
  for (Eigen::Index k = 0; k < q; ++k) h.push_back(stem + std::to_string(k + 1));
  return h;
}

int run_fit(const mtmbsp::RunConfig& cfg, const std::string& x_path,
            const std::string& y_path, const std::string& schema_path) {
  mtmbsp::Dataset d;
  const mtmbsp::CsvMatrix xm = mtmbsp::read_csv_matrix(x_path);
  const mtmbsp::CsvMatrix ym = mtmbsp::read_csv_matrix(y_path);
  d.x = xm.values;
  d.y = ym.values;
  d.schema = mtmbsp::read_schema(schema_path);
  if (d.schema.q() != d.y.cols()) {
    throw mtmbsp::ValidationError("schema has " + std::to_string(d.schema.q()) +
                                  " columns but Y has " + std::to_string(d.y.cols()));
  }
  if (d.x.rows() != d.y.rows()) {
    throw mtmbsp::ValidationError("X has " + std::to_string(d.x.rows()) + " rows but Y has " +
                                  std::to_string(d.y.rows()));
  }
  apply_design_transforms(d, cfg);
  const mtmbsp::ValidationReport report = mtmbsp::validate_dataset(d);
  if (!report.ok()) throw mtmbsp::ValidationError(report.to_string());
  cfg.chain.validate();
  cfg.hyper.validate(d.q());

  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  const std::string tag = "manifest " + hash_hex(mtmbsp::manifest_hash(cfg));
  const mtmbsp::FitMethod method = cfg.fit_method();
  double seconds = 0.0;
  json extra;
  extra["command"] = "fit";
  extra["n"] = d.n();
  extra["p"] = d.p();
  extra["q"] = d.q();

  if (method == mtmbsp::FitMethod::OneStep || method == mtmbsp::FitMethod::Both) {
    const mtmbsp::OneStepFit fit = mtmbsp::one_step_fit(d, cfg.hyper, cfg.chain);
    seconds += fit.samples.seconds_total;
    mtmbsp::DrawsMeta meta{cfg.chain.seed, cfg.chain.iterations, cfg.chain.burn_in,
                           cfg.chain.thin};
    mtmbsp::write_draws((dir / "draws.bin").string(), fit.samples, meta);
    mtmbsp::write_summary_table((dir / "summary.csv").string(), fit.summary, tag);
    mtmbsp::write_csv_matrix((dir / "estimate.csv").string(), cell_header(d.q(), "b"),
                             fit.bhat, tag);
    Eigen::MatrixXd sel(static_cast<Eigen::Index>(fit.selected.size()), 1);
    for (std::size_t i = 0; i < fit.selected.size(); ++i) {
      sel(static_cast<Eigen::Index>(i), 0) = static_cast<double>(fit.selected[i]);
    }
    mtmbsp::write_csv_matrix((dir / "selected.csv").string(), {"j"}, sel, tag);
    extra["selected-count"] = fit.selected.size();
    std::cout << "fit: one-step selected " << fit.selected.size() << " of " << d.p()
              << " predictors\n";
  }
  if (method == mtmbsp::FitMethod::TwoStep || method == mtmbsp::FitMethod::Both) {
    const mtmbsp::TwoStepEstimate est =
        mtmbsp::two_step_fit(d, cfg.hyper, cfg.chain, cfg.gamma, cfg.semantics());
    mtmbsp::write_summary_table((dir / "summary_two_step.csv").string(), est.summary, tag);
    mtmbsp::write_csv_matrix((dir / "estimate_two_step.csv").string(),
                             cell_header(d.q(), "b"), est.btilde, tag);
    Eigen::MatrixXd sel(static_cast<Eigen::Index>(est.selected.size()), 1);
    for (std::size_t i = 0; i < est.selected.size(); ++i) {
      sel(static_cast<Eigen::Index>(i), 0) = static_cast<double>(est.selected[i]);
    }
    mtmbsp::write_csv_matrix((dir / "selected_two_step.csv").string(), {"j"}, sel, tag);
    extra["two-step-candidates"] = est.sets.jn.size();
    extra["two-step-selected"] = est.selected.size();
    std::cout << "fit: two-step kept " << est.sets.jn.size() << " candidates, selected "
              << est.selected.size() << "\n";
  }
  write_manifest(dir, cfg, seconds, extra);
  std::cout << "fit: results in " << dir.string() << "\n";
  return 0;
}

void append_metrics(Eigen::MatrixXd& table, Eigen::Index row, int scenario, Eigen::Index p,
                    int method_id, const mtmbsp::Metrics& m) {
  table(row, 0) = static_cast<double>(scenario);
  table(row, 1) = static_cast<double>(p);
  table(row, 2) = static_cast<double>(method_id);  // 0 = one-step, 1 = two-step
  table(row, 3) = m.rmse;
  table(row, 4) = m.cp;
  table(row, 5) = m.sens;
  table(row, 6) = m.spec;
  table(row, 7) = m.mcc;
}

int run_simulate(const mtmbsp::RunConfig& cfg, bool full_table, bool dry_run) {
  cfg.validate();
  const fs::path dir(cfg.output_dir);
  const std::string tag = "manifest " + hash_hex(mtmbsp::manifest_hash(cfg));

  struct Cell {
    int scenario;
    Eigen::Index p;
  };
  std::vector<Cell> cells;
  if (full_table) {
    for (int s = 1; s <= 6; ++s) {
      for (const Eigen::Index p : {Eigen::Index(500), Eigen::Index(1000), Eigen::Index(2000)}) {
        cells.push_back({s, p});
      }
    }
  } else {
    cells.push_back({cfg.scenario.scenario, cfg.scenario.p});
  }

  if (dry_run) {
    std::cout << "simulate plan: " << cells.size() << " cell(s), " << cfg.replicates
              << " replicate(s) each, method " << cfg.method << "\n";
    for (const Cell& c : cells) {
      std::cout << "  scenario " << c.scenario << " n " << cfg.scenario.n << " p " << c.p
                << " s0 " << cfg.scenario.s0 << " iterations " << cfg.chain.iterations
                << " burn-in " << cfg.chain.burn_in << "\n";
    }
    return 0;
  }

  fs::create_directories(dir);
  const mtmbsp::FitMethod method = cfg.fit_method();
  const bool one = method != mtmbsp::FitMethod::TwoStep;
  const bool two = method != mtmbsp::FitMethod::OneStep;
  const int methods_per_cell = (one ? 1 : 0) + (two ? 1 : 0);

  std::vector<Eigen::MatrixXd> blocks;
  Eigen::MatrixXd summary(static_cast<Eigen::Index>(cells.size()) * methods_per_cell, 13);
  Eigen::Index srow = 0;
  double seconds = 0.0;
  int total_failures = 0;

  for (const Cell& c : cells) {
    mtmbsp::ScenarioSpec spec = cfg.scenario;
    spec.scenario = c.scenario;
    spec.p = c.p;
    const mtmbsp::MetricTable table =
        mtmbsp::run_replicates(spec, cfg.hyper, cfg.chain, method, cfg.replicates, cfg.gamma);
    total_failures += table.failures;
    Eigen::MatrixXd block(static_cast<Eigen::Index>(table.rows.size()) * methods_per_cell, 9);
    Eigen::Index brow = 0;
    for (const mtmbsp::ReplicateRow& r : table.rows) {
      seconds += r.seconds;
      if (!r.ok) continue;
      if (r.has_one_step) {
        block(brow, 8) = r.replicate;
        append_metrics(block, brow, c.scenario, c.p, 0, r.one_step);
        ++brow;
      }
      if (r.has_two_step) {
        block(brow, 8) = r.replicate;
        append_metrics(block, brow, c.scenario, c.p, 1, r.two_step);
        ++brow;
      }
    }
    blocks.push_back(block.topRows(brow));
    for (const auto [which, id] :
         {std::pair{mtmbsp::FitMethod::OneStep, 0}, std::pair{mtmbsp::FitMethod::TwoStep, 1}}) {
      if ((id == 0 && !one) || (id == 1 && !two)) continue;
      const mtmbsp::Metrics mean = table.mean(which);
      const mtmbsp::Metrics sd = table.sd(which);
      summary(srow, 0) = c.scenario;
      summary(srow, 1) = static_cast<double>(c.p);
      summary(srow, 2) = id;
      summary(srow, 3) = mean.rmse;
      summary(srow, 4) = sd.rmse;
      summary(srow, 5) = mean.cp;
      summary(srow, 6) = sd.cp;
      summary(srow, 7) = mean.sens;
      summary(srow, 8) = sd.sens;
      summary(srow, 9) = mean.spec;
      summary(srow, 10) = sd.spec;
      summary(srow, 11) = mean.mcc;
      summary(srow, 12) = sd.mcc;
      ++srow;
      std::cout << "scenario " << c.scenario << " p " << c.p
                << (id == 0 ? " one-step" : " two-step") << std::fixed << std::setprecision(3)
                << "  rmse " << mean.rmse << "  cp " << mean.cp << "  sens " << mean.sens
                << "  spec " << mean.spec << "  mcc " << mean.mcc << "\n";
      std::cout.unsetf(std::ios::fixed);
    }
  }

  Eigen::Index total_rows = 0;
  for (const auto& b : blocks) total_rows += b.rows();
  Eigen::MatrixXd replicate_table(total_rows, 9);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    replicate_table.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  mtmbsp::write_csv_matrix(
      (dir / "metrics.csv").string(),
      {"scenario", "p", "method", "rmse", "cp", "sens", "spec", "mcc", "replicate"},
      replicate_table, tag);
  mtmbsp::write_csv_matrix((dir / "metrics_summary.csv").string(),
                           {"scenario", "p", "method", "rmse", "rmse_sd", "cp", "cp_sd",
                            "sens", "sens_sd", "spec", "spec_sd", "mcc", "mcc_sd"},
                           summary.topRows(srow), tag);
  json extra;
  extra["command"] = "simulate";
  extra["failures"] = total_failures;
  write_manifest(dir, cfg, seconds, extra);
  std::cout << "simulate: results in " << dir.string();
  if (total_failures > 0) std::cout << " (" << total_failures << " failed replicate(s))";
  std::cout << "\n";
  return 0;
}

int run_summarize(const std::string& draws_path, const std::string& out_path, double gamma) {
  const auto [samples, meta] = mtmbsp::read_draws(draws_path);
  const mtmbsp::CredibleSummary summary = mtmbsp::make_summary(samples);
  const std::vector<Eigen::Index> selected = mtmbsp::select_active(summary);
  const std::vector<Eigen::Index> an = mtmbsp::screen_candidates(summary, gamma);
  if (!out_path.empty()) {
    mtmbsp::write_summary_table(out_path, summary,
                                "draws " + draws_path + " seed " + std::to_string(meta.seed));
  }
  std::cout << "summarize: " << samples.draws_b.rows() << " draws, p " << samples.p << " q "
            << samples.q << "\n";
  std::cout << "selected (" << selected.size() << "):";
  for (const Eigen::Index j : selected) std::cout << ' ' << j;
  std::cout << "\ncandidates at gamma " << gamma << " (" << an.size() << ")\n";
  if (!out_path.empty()) std::cout << "summary written to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("MTMBSP_THREADS")) {
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));
  } else {
    Eigen::setNbThreads(1);
  }

  CLI::App app{"Multivariate mixed-response shrinkage regression"};
  app.require_subcommand(1);

  mtmbsp::RunConfig fit_cfg;
  std::string fit_config_path, x_path, y_path, schema_path;
  CLI::App* fit = app.add_subcommand("fit", "fit the model to data files");
  fit->add_option("--x", x_path, "design matrix CSV")->required();
  fit->add_option("--y", y_path, "response matrix CSV")->required();
  fit->add_option("--response-schema", schema_path, "response schema JSON")->required();
  add_config_flags(fit, fit_cfg, fit_config_path);

  mtmbsp::RunConfig sim_cfg;
  std::string sim_config_path;
  bool full_table = false;
  bool dry_run = false;
  CLI::App* sim = app.add_subcommand("simulate", "run the synthetic benchmark");
  add_config_flags(sim, sim_cfg, sim_config_path);
  add_scenario_flags(sim, sim_cfg);
  sim->add_flag("--full-table", full_table,
                "run every scenario 1..6 at p in {500, 1000, 2000}");
  sim->add_flag("--dry-run", dry_run, "print the run plan and exit");

  std::string draws_path, summary_out;
  double summarize_gamma = 0.02;
  CLI::App* summ = app.add_subcommand("summarize", "summarize a saved draws file");
  summ->add_option("--draws", draws_path, "draws container written by fit")->required();
  summ->add_option("--output", summary_out, "summary table CSV to write");
  summ->add_option("--gamma", summarize_gamma, "screening threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fit->parsed()) {
      return run_fit(resolve_config(fit, fit_cfg, fit_config_path), x_path, y_path,
                     schema_path);
    }
    if (sim->parsed()) {
      return run_simulate(resolve_config(sim, sim_cfg, sim_config_path), full_table, dry_run);
    }
    if (summ->parsed()) return run_summarize(draws_path, summary_out, summarize_gamma);
  } catch (const mtmbsp::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mtmbsp::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mtmbsp::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const mtmbsp::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
