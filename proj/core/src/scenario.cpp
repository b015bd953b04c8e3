#include "specflow/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "specflow/error.hpp"
#include "specflow/random.hpp"

namespace specflow::cli {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Experiment, std::string_view>, 6> kExperimentNames{{
    {Experiment::Callias, "callias"},
    {Experiment::Index, "index"},
    {Experiment::SsfGap, "ssf-gap"},
    {Experiment::Flow, "flow"},
    {Experiment::TraceFormula, "trace-formula"},
    {Experiment::Converge, "converge"},
}};

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigError, where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) config_error(where, std::string("missing field '") + key + "'");
  return obj.at(key);
}

double as_double(const json& v, const std::string& where) {
  if (!v.is_number()) config_error(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) config_error(where, "expected a finite number");
  return x;
}

Complex as_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {as_double(v, where), 0.0};
  if (v.is_array() && v.size() == 2) return {as_double(v[0], where), as_double(v[1], where)};
  config_error(where, "expected a number or a [re, im] pair");
}

std::vector<double> as_double_list(const json& v, const std::string& where) {
  if (!v.is_array()) config_error(where, "expected an array");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_double(v[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

herm::HermitianMatrix as_matrix(const json& v, int d, const std::string& where) {
  try {
    if (v.is_number()) return herm::HermitianMatrix::identity(d) * as_double(v, where);
    if (!v.is_object()) config_error(where, "expected a matrix spec object");
    if (v.contains("entries")) {
      const json& rows = v.at("entries");
      if (!rows.is_array() || static_cast<int>(rows.size()) != d) config_error(where, "entries must have d rows");
      CMatrix m(d, d);
      for (int i = 0; i < d; ++i) {
        if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != d) config_error(where, "entries must have d columns");
        for (int j = 0; j < d; ++j) m(i, j) = as_complex(rows[i][j], where + ".entries");
      }
      return herm::HermitianMatrix(m);
    }
    if (v.contains("diagonal")) {
      const std::vector<double> diag = as_double_list(v.at("diagonal"), where + ".diagonal");
      if (static_cast<int>(diag.size()) != d) config_error(where, "diagonal must have d entries");
      herm::HermitianMatrix m = herm::HermitianMatrix::diagonal(diag);
      if (v.contains("rotation_seed")) m = m.conjugated(herm::random_unitary(d, v.at("rotation_seed").get<std::uint64_t>()));
      return m;
    }
    if (v.contains("random")) {
      const json& r = v.at("random");
      const double scale = r.contains("scale") ? as_double(r.at("scale"), where + ".random.scale") : 1.0;
      return herm::random_hermitian(d, require(r, "seed", where + ".random").get<std::uint64_t>(), scale);
    }
  } catch (const json::exception& e) {
    config_error(where, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(where, e.what());
  }
  config_error(where, "matrix spec needs one of 'entries', 'diagonal', 'random'");
}

json matrix_json(const herm::HermitianMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.dim(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return json{{"entries", rows}};
}

bool safe_name(const std::string& name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  }) && name != "." && name != "..";
}

}  // namespace

std::string_view to_string(Experiment e) {
  for (const auto& [k, n] : kExperimentNames)
    if (k == e) return n;
  return "?";
}

Experiment experiment_from_string(std::string_view name) {
  for (const auto& [k, n] : kExperimentNames)
    if (n == name) return k;
  throw Error(ErrorCode::ConfigError, "unknown experiment '" + std::string(name) + "'");
}

std::vector<Experiment> all_experiments() {
  std::vector<Experiment> out;
  for (const auto& [k, n] : kExperimentNames) out.push_back(k);
  return out;
}

path::OperatorPath ScenarioConfig::base_path() const { return path::OperatorPath(a_minus, terms); }

path::OperatorPath ScenarioConfig::build_path() const {
  const path::OperatorPath p = base_path();
  return truncation ? p.truncate(*truncation) : p;
}

bool ScenarioConfig::wants(Experiment e) const {
  return std::find(experiments.begin(), experiments.end(), e) != experiments.end();
}

ScenarioConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error("config", std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) config_error("config", "top level must be an object");

  static const std::vector<std::string> known{"schema_version", "name",       "dimension",   "a_minus",
                                              "terms",          "truncation", "grid",        "jost_step",
                                              "z_list",         "lambda_list", "experiments", "seed",
                                              "output"};
  for (const auto& [key, value] : root.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) config_error(key, "unknown field");

  ScenarioConfig c;
  try {
    const json& version = require(root, "schema_version", "config");
    if (!version.is_number_integer() || version.get<int>() != kSchemaVersion)
      config_error("schema_version", "expected " + std::to_string(kSchemaVersion));

    const json& name = require(root, "name", "config");
    if (!name.is_string() || !safe_name(name.get<std::string>()))
      config_error("name", "expected a non-empty name of letters, digits, '-', '_' or '.'");
    c.name = name.get<std::string>();

    const json& dim = require(root, "dimension", "config");
    if (!dim.is_number_integer() || dim.get<int>() < 1) config_error("dimension", "expected an integer >= 1");
    c.dimension = dim.get<int>();

    c.a_minus = as_matrix(require(root, "a_minus", "config"), c.dimension, "a_minus");

    if (root.contains("terms")) {
      const json& terms = root.at("terms");
      if (!terms.is_array()) config_error("terms", "expected an array");
      for (std::size_t k = 0; k < terms.size(); ++k) {
        const std::string where = "terms[" + std::to_string(k) + "]";
        const json& t = terms[k];
        const json& kind = require(t, "profile", where);
        if (!kind.is_string()) config_error(where + ".profile", "expected a string");
        path::ProfileKind pk;
        try {
          pk = path::profile_kind_from_string(kind.get<std::string>());
        } catch (const Error& e) {
          config_error(where + ".profile", e.what());
        }
        const double center = t.contains("center") ? as_double(t.at("center"), where + ".center") : 0.0;
        const double width = t.contains("width") ? as_double(t.at("width"), where + ".width") : 1.0;
        if (!(width > 0.0)) config_error(where + ".width", "expected a positive width");
        c.terms.push_back({path::Profile(pk, center, width),
                           as_matrix(require(t, "coefficient", where), c.dimension, where + ".coefficient")});
      }
    }

    if (root.contains("truncation") && !root.at("truncation").is_null()) {
      const double n = as_double(root.at("truncation"), "truncation");
      if (!(n > 0.0)) config_error("truncation", "expected a positive radius");
      c.truncation = n;
    }

    if (root.contains("grid")) {
      const json& g = root.at("grid");
      if (g.contains("T")) c.grid_T = as_double(g.at("T"), "grid.T");
      if (g.contains("N")) {
        if (!g.at("N").is_number_integer()) config_error("grid.N", "expected an integer");
        c.grid_N = g.at("N").get<int>();
      }
    }
    if (!(c.grid_T > 0.0)) config_error("grid.T", "expected a positive half width");
    if (c.grid_N < 3 || c.grid_N % 2 == 0) config_error("grid.N", "expected an odd integer >= 3");

    if (root.contains("jost_step")) c.jost_step = as_double(root.at("jost_step"), "jost_step");
    if (!(c.jost_step > 0.0 && c.jost_step <= c.grid_T)) config_error("jost_step", "expected 0 < jost_step <= T");

    if (root.contains("z_list")) c.z_list = as_double_list(root.at("z_list"), "z_list");
    for (double z : c.z_list)
      if (!(z < 0.0)) config_error("z_list", "every z must be negative");
    if (c.z_list.empty()) config_error("z_list", "expected at least one z");

    if (root.contains("lambda_list")) c.lambda_list = as_double_list(root.at("lambda_list"), "lambda_list");
    for (double l : c.lambda_list)
      if (!(l > 0.0)) config_error("lambda_list", "every lambda must be positive");

    if (root.contains("experiments")) {
      const json& ex = root.at("experiments");
      if (!ex.is_array()) config_error("experiments", "expected an array of names");
      c.experiments.clear();
      for (const json& e : ex) {
        if (!e.is_string()) config_error("experiments", "expected experiment names");
        const Experiment x = experiment_from_string(e.get<std::string>());
        if (!c.wants(x)) c.experiments.push_back(x);
      }
    }

    if (root.contains("seed")) {
      if (!root.at("seed").is_number_unsigned()) config_error("seed", "expected a non-negative 64-bit integer");
      c.seed = root.at("seed").get<std::uint64_t>();
    }
    if (root.contains("output")) {
      if (!root.at("output").is_string()) config_error("output", "expected a string");
      c.output = root.at("output").get<std::string>();
    }
  } catch (const json::exception& e) {
    config_error("config", e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error("config", e.what());
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ScenarioConfig& c) {
  json terms = json::array();
  for (const auto& t : c.terms) {
    terms.push_back({{"profile", std::string(path::to_string(t.profile.kind()))},
                     {"center", t.profile.center()},
                     {"width", t.profile.width()},
                     {"coefficient", matrix_json(t.coefficient)}});
  }
  json experiments = json::array();
  for (Experiment e : c.experiments) experiments.push_back(std::string(to_string(e)));
  json root{{"schema_version", c.schema_version},
            {"name", c.name},
            {"dimension", c.dimension},
            {"a_minus", matrix_json(c.a_minus)},
            {"terms", terms},
            {"truncation", c.truncation ? json(*c.truncation) : json(nullptr)},
            {"grid", {{"T", c.grid_T}, {"N", c.grid_N}}},
            {"jost_step", c.jost_step},
            {"z_list", c.z_list},
            {"lambda_list", c.lambda_list},
            {"experiments", experiments},
            {"seed", c.seed}};
  if (!c.output.empty()) root["output"] = c.output;
  return root.dump(2) + "\n";
}

ScenarioConfig generate_random_scenario(std::uint64_t seed, int dimension, int flow_target) {
  if (dimension < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  if (std::abs(flow_target) > dimension) {
    std::ostringstream os;
    os << "flow target " << flow_target << " is not reachable in dimension " << dimension;
    throw Error(ErrorCode::InfeasibleTarget, os.str());
  }
  SplitMix64 rng(seed);
  const int d = dimension;
  // Negative-eigenvalue counts: n_minus - n_plus = flow_target.
  const int lo = std::max(0, flow_target);
  const int hi = std::min(d, d + flow_target);
  const int n_minus = lo + static_cast<int>(rng.next() % static_cast<std::uint64_t>(hi - lo + 1));
  const int n_plus = n_minus - flow_target;

  auto endpoint = [&](int negatives) {
    std::vector<double> mu(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) mu[static_cast<std::size_t>(k)] = (k < negatives ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
    return herm::HermitianMatrix::diagonal(mu).conjugated(herm::random_unitary(d, rng.next()));
  };
  const herm::HermitianMatrix a_minus = endpoint(n_minus);
  const herm::HermitianMatrix a_plus = endpoint(n_plus);
  const double width = rng.uniform(0.6, 1.2);
  const herm::HermitianMatrix bump = herm::random_hermitian(d, rng.next(), 0.3);

  ScenarioConfig c;
  std::ostringstream name;
  name << "gen-s" << seed << "-d" << d << "-f" << flow_target;
  c.name = name.str();
  c.dimension = d;
  c.a_minus = a_minus;
  c.terms = {
      {path::Profile(path::ProfileKind::TanhSigmoid, 0.0, width), a_plus - a_minus},
      {path::Profile(path::ProfileKind::TanhSigmoid, -0.5, width), bump},
      {path::Profile(path::ProfileKind::TanhSigmoid, 0.5, width), -bump},
  };
  c.truncation = 8.0;
  c.seed = seed;
  return c;
}

std::vector<ScenarioConfig> generate_battery(std::uint64_t seed, int count) {
  if (count < 0) throw Error(ErrorCode::InvalidArgument, "battery count must be non-negative");
  constexpr std::array<int, 5> targets{1, -1, 2, -2, 0};
  SplitMix64 rng(seed);
  std::vector<ScenarioConfig> out;
  for (int i = 0; i < count; ++i) {
    const int d = 1 + i % 3;
    const int t = std::clamp(targets[static_cast<std::size_t>((i / 3 + i % 3) % 5)], -d, d);
    ScenarioConfig c = generate_random_scenario(rng.next(), d, t);
    std::ostringstream name;
    name << "battery-" << (i < 10 ? "0" : "") << i << "-d" << d << "-f" << t;
    c.name = name.str();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace specflow::cli
