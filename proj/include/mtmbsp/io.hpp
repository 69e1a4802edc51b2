#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mtmbsp/gibbs.hpp"
#include "mtmbsp/model.hpp"
#include "mtmbsp/selection.hpp"
#include "mtmbsp/simulate.hpp"

namespace mtmbsp {

inline constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a64(const void* data, std::size_t size);

struct CsvMatrix {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

CsvMatrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& values, const std::string& comment = "");

ResponseSchema read_schema(const std::string& path);
void write_schema(const std::string& path, const ResponseSchema& schema);

// Everything one run needs, parsed from a single JSON config file; flag
// overrides are applied by the CLI on top. Unknown keys are rejected.
struct RunConfig {
  Hyperparameters hyper;
  ChainConfig chain;
  ScenarioSpec scenario;
  std::string method = "one-step";  // one-step | two-step | both
  double gamma = 0.02;
  std::string screen_semantics = "per-column";  // per-column | literal
  int replicates = 10;
  bool intercept = false;
  bool standardize = false;
  std::string output_dir = "out";

  FitMethod fit_method() const;
  ScreenSemantics semantics() const;
  void validate() const;
};

RunConfig parse_config(const std::string& json_text);
std::string serialize_config(const RunConfig& config);
RunConfig load_config_file(const std::string& path);

// Hash identifying a run: config plus seed, stable across reruns.
std::uint64_t manifest_hash(const RunConfig& config);

// Columnar binary draws container with a text header and payload checksum;
// round-trips bit-exactly.
struct DrawsMeta {
  std::uint64_t seed = 0;
  int iterations = 0;
  int burn_in = 0;
  int thin = 0;
};
void write_draws(const std::string& path, const PosteriorSamples& samples,
                 const DrawsMeta& meta);
std::pair<PosteriorSamples, DrawsMeta> read_draws(const std::string& path);

void write_summary_table(const std::string& path, const CredibleSummary& summary,
                         const std::string& comment = "");

}  // namespace mtmbsp
