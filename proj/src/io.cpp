#include "mtmbsp/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "mtmbsp/errors.hpp"

namespace mtmbsp {

using nlohmann::json;

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("short write to " + path);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

CsvMatrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvMatrix out;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (out.header.empty()) {
      out.header = fields;
      continue;
    }
    if (fields.size() != out.header.size()) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(out.header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      try {
        std::size_t pos = 0;
        row[i] = std::stod(fields[i], &pos);
        while (pos < fields[i].size() && std::isspace(static_cast<unsigned char>(fields[i][pos]))) {
          ++pos;
        }
        if (pos != fields[i].size()) throw std::invalid_argument(fields[i]);
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(lineno) + ": bad numeric field '" +
                      fields[i] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (out.header.empty()) throw IoError(path + ": no header row");
  out.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(out.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

void write_csv_matrix(const std::string& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& values, const std::string& comment) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols()) {
    throw ParameterError("write_csv_matrix: header size does not match column count");
  }
  std::ostringstream ss;
  if (!comment.empty()) ss << "# " << comment << "\n";
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) ss << ',';
    ss << header[i];
  }
  ss << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j > 0) ss << ',';
      ss << format_double(values(i, j));
    }
    ss << '\n';
  }
  write_file(path, ss.str());
}

namespace {

ResponseKind kind_from_json(const json& jk, const std::string& path) {
  for (const auto& [key, value] : jk.items()) {
    (void)value;
    if (key != "kind" && key != "trials" && key != "r-init" && key != "c1" && key != "c2") {
      throw ValidationError(path + ": unknown schema key '" + key + "'");
    }
  }
  const std::string kind = jk.at("kind").get<std::string>();
  if (kind == "gaussian") return ResponseKind::gaussian();
  if (kind == "bernoulli") return ResponseKind::bernoulli();
  if (kind == "binomial") return ResponseKind::binomial(jk.at("trials").get<int>());
  if (kind == "neg-binomial") {
    return ResponseKind::neg_binomial(jk.value("r-init", 1.0), jk.value("c1", 10.0),
                                      jk.value("c2", 1.0));
  }
  throw ValidationError(path + ": unknown response kind '" + kind + "'");
}

json kind_to_json(const ResponseKind& k) {
  json jk;
  switch (k.tag) {
    case ResponseKind::Tag::Gaussian:
      jk["kind"] = "gaussian";
      break;
    case ResponseKind::Tag::Bernoulli:
      jk["kind"] = "bernoulli";
      break;
    case ResponseKind::Tag::Binomial:
      jk["kind"] = "binomial";
      jk["trials"] = k.trials;
      break;
    case ResponseKind::Tag::NegBinomial:
      jk["kind"] = "neg-binomial";
      jk["r-init"] = k.r_init;
      jk["c1"] = k.c1;
      jk["c2"] = k.c2;
      break;
  }
  return jk;
}

}  // namespace

ResponseSchema read_schema(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  ResponseSchema schema;
  try {
    for (const auto& [key, value] : j.items()) {
      (void)value;
      if (key != "columns") throw ValidationError(path + ": unknown key '" + key + "'");
    }
    for (const auto& jk : j.at("columns")) schema.kinds.push_back(kind_from_json(jk, path));
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  if (schema.kinds.empty()) throw ValidationError(path + ": schema has no columns");
  return schema;
}

void write_schema(const std::string& path, const ResponseSchema& schema) {
  json j;
  j["columns"] = json::array();
  for (const auto& k : schema.kinds) j["columns"].push_back(kind_to_json(k));
  write_file(path, j.dump(2) + "\n");
}

FitMethod RunConfig::fit_method() const {
  if (method == "one-step") return FitMethod::OneStep;
  if (method == "two-step") return FitMethod::TwoStep;
  if (method == "both") return FitMethod::Both;
  throw ValidationError("config: method must be one-step, two-step, or both (got '" + method +
                        "')");
}

ScreenSemantics RunConfig::semantics() const {
  if (screen_semantics == "literal") return ScreenSemantics::Literal;
  if (screen_semantics == "per-column") return ScreenSemantics::PerColumn;
  throw ValidationError("config: screen-semantics must be literal or per-column (got '" +
                        screen_semantics + "')");
}

void RunConfig::validate() const {
  fit_method();
  semantics();
  if (!(gamma > 0.0)) throw ValidationError("config: gamma must be positive");
  if (replicates < 1) throw ValidationError("config: replicates must be at least 1");
  chain.validate();
  scenario.validate();
  hyper.validate(scenario.q());
}

namespace {

struct ConfigKeys {
  // Every recognized key with a typed reader/writer over RunConfig.
  template <typename F>
  static void for_each(RunConfig& c, F&& f) {
    f("tau", c.hyper.tau);
    f("u", c.hyper.u);
    f("a", c.hyper.a);
    f("d1", c.hyper.d1);
    f("d2", c.hyper.d2);
    f("pg-threshold", c.hyper.pg_threshold);
    f("iterations", c.chain.iterations);
    f("burn-in", c.chain.burn_in);
    f("thin", c.chain.thin);
    f("seed", c.chain.seed);
    f("keep-sigma", c.chain.keep_sigma);
    f("scenario", c.scenario.scenario);
    f("n", c.scenario.n);
    f("p", c.scenario.p);
    f("s0", c.scenario.s0);
    f("ar-corr", c.scenario.ar_corr);
    f("sigma2", c.scenario.sigma2);
    f("rho", c.scenario.rho);
    f("r-true", c.scenario.r_true);
    f("method", c.method);
    f("gamma", c.gamma);
    f("screen-semantics", c.screen_semantics);
    f("replicates", c.replicates);
    f("intercept", c.intercept);
    f("standardize", c.standardize);
    f("output-dir", c.output_dir);
  }
};

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw IoError(std::string("config: ") + e.what());
  }
  RunConfig c;
  std::vector<std::string> known;
  ConfigKeys::for_each(c, [&](const char* key, auto& field) {
    known.emplace_back(key);
    if (!j.contains(key)) return;
    try {
      field = j.at(key).get<std::decay_t<decltype(field)>>();
    } catch (const json::exception& e) {
      throw ValidationError(std::string("config key '") + key + "': " + e.what());
    }
  });
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
  // scenario.seed mirrors the chain seed so one value drives the whole run.
  c.scenario.seed = c.chain.seed;
  return c;
}

std::string serialize_config(const RunConfig& config) {
  json j;
  RunConfig& c = const_cast<RunConfig&>(config);
  ConfigKeys::for_each(c, [&](const char* key, auto& field) { j[key] = field; });
  return j.dump(2) + "\n";
}

RunConfig load_config_file(const std::string& path) { return parse_config(read_file(path)); }

std::uint64_t manifest_hash(const RunConfig& config) {
  const std::string canonical = serialize_config(config);
  return fnv1a64(canonical.data(), canonical.size());
}

namespace {

constexpr const char* kDrawsMagic = "MTMBSP-DRAWS";

void append_doubles(std::string& buf, const Eigen::MatrixXd& m) {
  // Row-major payload so draws stream in iteration order.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      buf.append(bytes, sizeof(double));
    }
  }
}

void extract_doubles(const std::string& buf, std::size_t& offset, Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v = 0.0;
      std::memcpy(&v, buf.data() + offset, sizeof(double));
      offset += sizeof(double);
      m(i, j) = v;
    }
  }
}

}  // namespace

void write_draws(const std::string& path, const PosteriorSamples& samples,
                 const DrawsMeta& meta) {
  std::string payload;
  const Eigen::Index m = samples.draws_b.rows();
  payload.reserve(static_cast<std::size_t>(
      (samples.draws_b.size() + samples.draws_sigma.size() + samples.draws_r.size()) *
      static_cast<Eigen::Index>(sizeof(double))));
  append_doubles(payload, samples.draws_b);
  append_doubles(payload, samples.draws_sigma);
  append_doubles(payload, samples.draws_r);

  std::ostringstream head;
  head << kDrawsMagic << " v1\n";
  head << "p " << samples.p << " q " << samples.q << " draws " << m << " sigma "
       << (samples.draws_sigma.size() > 0 ? 1 : 0) << "\n";
  head << "seed " << meta.seed << " iterations " << meta.iterations << " burn-in "
       << meta.burn_in << " thin " << meta.thin << "\n";
  head << "checksum " << std::hex << std::setw(16) << std::setfill('0')
       << fnv1a64(payload.data(), payload.size()) << "\n";
  write_file(path, head.str() + payload);
}

std::pair<PosteriorSamples, DrawsMeta> read_draws(const std::string& path) {
  const std::string blob = read_file(path);
  std::size_t offset = 0;
  auto next_line = [&]() -> std::string {
    const std::size_t nl = blob.find('\n', offset);
    if (nl == std::string::npos) throw IoError(path + ": truncated header");
    std::string line = blob.substr(offset, nl - offset);
    offset = nl + 1;
    return line;
  };

  if (next_line() != std::string(kDrawsMagic) + " v1") {
    throw IoError(path + ": not a draws container");
  }
  PosteriorSamples samples;
  DrawsMeta meta;
  Eigen::Index m = 0;
  int has_sigma = 0;
  std::uint64_t checksum = 0;
  {
    std::istringstream ss(next_line());
    std::string kp, kq, km, ks;
    ss >> kp >> samples.p >> kq >> samples.q >> km >> m >> ks >> has_sigma;
    if (!ss || kp != "p" || kq != "q" || km != "draws" || ks != "sigma") {
      throw IoError(path + ": bad dimensions line");
    }
  }
  {
    std::istringstream ss(next_line());
    std::string k1, k2, k3, k4;
    ss >> k1 >> meta.seed >> k2 >> meta.iterations >> k3 >> meta.burn_in >> k4 >> meta.thin;
    if (!ss || k1 != "seed" || k2 != "iterations" || k3 != "burn-in" || k4 != "thin") {
      throw IoError(path + ": bad run line");
    }
  }
  {
    std::istringstream ss(next_line());
    std::string kc;
    ss >> kc >> std::hex >> checksum;
    if (!ss || kc != "checksum") throw IoError(path + ": bad checksum line");
  }
  if (samples.p < 1 || samples.q < 1 || m < 1) throw IoError(path + ": bad dimensions");

  const std::size_t expected =
      static_cast<std::size_t>(m) *
      (static_cast<std::size_t>(samples.p * samples.q) +
       (has_sigma != 0 ? static_cast<std::size_t>(samples.q * samples.q) : 0) +
       static_cast<std::size_t>(samples.q)) *
      sizeof(double);
  if (blob.size() - offset != expected) {
    throw IoError(path + ": payload size mismatch (file truncated or corrupt)");
  }
  if (fnv1a64(blob.data() + offset, expected) != checksum) {
    throw IoError(path + ": checksum mismatch");
  }

  samples.draws_b.resize(m, samples.p * samples.q);
  samples.draws_sigma.resize(has_sigma != 0 ? m : 0,
                             has_sigma != 0 ? samples.q * samples.q : 0);
  samples.draws_r.resize(m, samples.q);
  samples.iterations_run = meta.iterations;
  extract_doubles(blob, offset, samples.draws_b);
  extract_doubles(blob, offset, samples.draws_sigma);
  extract_doubles(blob, offset, samples.draws_r);
  return {std::move(samples), meta};
}

void write_summary_table(const std::string& path, const CredibleSummary& summary,
                         const std::string& comment) {
  Eigen::MatrixXd table(summary.p() * summary.q(), 5);
  Eigen::Index row = 0;
  for (Eigen::Index j = 0; j < summary.p(); ++j) {
    for (Eigen::Index k = 0; k < summary.q(); ++k, ++row) {
      table(row, 0) = static_cast<double>(j);
      table(row, 1) = static_cast<double>(k);
      table(row, 2) = summary.q025(j, k);
      table(row, 3) = summary.q50(j, k);
      table(row, 4) = summary.q975(j, k);
    }
  }
  write_csv_matrix(path, {"j", "k", "q025", "q50", "q975"}, table, comment);
}

}  // namespace mtmbsp
