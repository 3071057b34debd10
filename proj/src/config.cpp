#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "alab/io.hpp"

namespace alab {

using nlohmann::json;

const char* to_string(Analysis a) noexcept {
  switch (a) {
    case Analysis::Simulate: return "simulate";
    case Analysis::Stable: return "stable";
    case Analysis::Dynamics: return "dynamics";
    case Analysis::GraphCheck: return "graph-check";
    case Analysis::CalibrateOracle: return "calibrate-oracle";
  }
  return "?";
}

Analysis parse_analysis(const std::string& text) {
  for (auto a : {Analysis::Simulate, Analysis::Stable, Analysis::Dynamics, Analysis::GraphCheck,
                 Analysis::CalibrateOracle})
    if (text == to_string(a)) return a;
  throw Error(ErrorCode::ConfigError, "analysis: unknown value '" + text + "'");
}

Space parse_space(const std::string& text) {
  if (text == "s-only") return Space::SOnly;
  if (text == "s-and-u") return Space::SAndU;
  throw Error(ErrorCode::ConfigError, "gate_space: expected s-only or s-and-u, got '" + text + "'");
}

Normalization parse_normalization(const std::string& text) {
  if (text == "at-assumption") return Normalization::AtAssumption;
  if (text == "per-context") return Normalization::PerContext;
  throw Error(ErrorCode::ConfigError, "normalization: expected at-assumption or per-context, got '" + text + "'");
}

namespace {

const char* normalization_name(Normalization n) {
  return n == Normalization::AtAssumption ? "at-assumption" : "per-context";
}

/// Object reader that remembers which keys were consumed.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, where("") + "expected an object");
  }
  bool has(const std::string& k) {
    if (!j_.contains(k)) return false;
    used_.insert(k);
    return true;
  }
  const json& at(const std::string& k) {
    used_.insert(k);
    return j_.at(k);
  }
  double number(const std::string& k) {
    const json& v = at(k);
    if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
    if (!v.is_number()) throw Error(ErrorCode::ConfigError, where(k) + "expected a number");
    return v.get<double>();
  }
  long long integer(const std::string& k) {
    const json& v = at(k);
    if (!v.is_number_integer()) throw Error(ErrorCode::ConfigError, where(k) + "expected an integer");
    return v.get<long long>();
  }
  std::uint64_t unsigned_integer(const std::string& k) {
    const json& v = at(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw Error(ErrorCode::ConfigError, where(k) + "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  int positive_int(const std::string& k) {
    const long long v = integer(k);
    if (v < 1 || v > 100000000) throw Error(ErrorCode::ConfigError, where(k) + "expected a positive integer");
    return static_cast<int>(v);
  }
  bool boolean(const std::string& k) {
    const json& v = at(k);
    if (!v.is_boolean()) throw Error(ErrorCode::ConfigError, where(k) + "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& k) {
    const json& v = at(k);
    if (!v.is_string()) throw Error(ErrorCode::ConfigError, where(k) + "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& k) {
    const json& v = at(k);
    if (!v.is_array()) throw Error(ErrorCode::ConfigError, where(k) + "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw Error(ErrorCode::ConfigError, where(k) + "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<std::string> strings(const std::string& k) {
    const json& v = at(k);
    if (!v.is_array()) throw Error(ErrorCode::ConfigError, where(k) + "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw Error(ErrorCode::ConfigError, where(k) + "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }
  Fields sub(const std::string& k) { return Fields(at(k), where_path(k)); }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw Error(ErrorCode::ConfigError, where(it.key()) + "unknown key");
  }
  std::string where(const std::string& k) const { return where_path(k) + ": "; }

 private:
  std::string where_path(const std::string& k) const {
    if (k.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? k : path_ + "." + k;
  }
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <int N>
Eigen::Matrix<double, N, 1> fixed_vector(Fields& f, const std::string& k) {
  const auto v = f.numbers(k);
  if (v.size() != static_cast<std::size_t>(N))
    throw Error(ErrorCode::ConfigError, f.where(k) + "expected " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

ContextDistribution parse_context(Fields f) {
  const std::string kind = f.string("kind");
  ContextDistribution d = ContextDistribution::uniform01();
  try {
    if (kind == "uniform") {
    } else if (kind == "beta") {
      const double a = f.number("a"), b = f.number("b");
      d = ContextDistribution::beta(a, b);
    } else if (kind == "discrete") {
      const auto p = f.numbers("points"), w = f.numbers("weights");
      d = ContextDistribution::discrete(p, w);
    } else {
      throw Error(ErrorCode::ConfigError, f.where("kind") + "expected uniform, beta or discrete");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, f.where("") + e.what());
  }
  f.finish();
  return d;
}

json context_json(const ContextDistribution& d) {
  switch (d.kind()) {
    case ContextDistribution::Kind::Uniform01: return {{"kind", "uniform"}};
    case ContextDistribution::Kind::Beta: return {{"kind", "beta"}, {"a", d.a()}, {"b", d.b()}};
    case ContextDistribution::Kind::Discrete:
      return {{"kind", "discrete"}, {"points", d.points()}, {"weights", d.weights()}};
  }
  return {};
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json number_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

// Scenario parameter blocks: parse into the typed config, rejecting unknown keys.
ContaminatedGaussianConfig parse_cg(const json& j) {
  ContaminatedGaussianConfig c;
  Fields f(j, "scenario_config");
  if (f.has("prior_mean")) c.prior_mean = fixed_vector<2>(f, "prior_mean");
  if (f.has("prior_variance")) c.prior_variance = fixed_vector<2>(f, "prior_variance");
  if (f.has("omega_bound")) c.omega_bound = f.number("omega_bound");
  f.finish();
  return c;
}

ContaminatedBinaryConfig parse_cb(const json& j) {
  ContaminatedBinaryConfig c;
  Fields f(j, "scenario_config");
  if (f.has("epsilon")) c.epsilon = f.number("epsilon");
  if (f.has("resolution")) c.resolution = f.positive_int("resolution");
  if (f.has("omega1_prior")) {
    Fields p = f.sub("omega1_prior");
    const std::string kind = p.string("kind");
    if (kind == "uniform") {
      c.omega1_prior.kind = Omega1Prior::Kind::Uniform;
    } else if (kind == "beta") {
      c.omega1_prior.kind = Omega1Prior::Kind::Beta;
      c.omega1_prior.a = p.number("a");
      c.omega1_prior.b = p.number("b");
    } else {
      throw Error(ErrorCode::ConfigError, p.where("kind") + "expected uniform or beta");
    }
    p.finish();
  }
  f.finish();
  return c;
}

ConfoundedCausalConfig parse_cc(const json& j) {
  ConfoundedCausalConfig c;
  Fields f(j, "scenario_config");
  if (f.has("omega3")) c.omega3 = f.number("omega3");
  if (f.has("bound")) c.bound = f.number("bound");
  if (f.has("resolution")) c.resolution = f.positive_int("resolution");
  if (f.has("normalization")) c.normalization = parse_normalization(f.string("normalization"));
  if (f.has("mc_draws")) c.mc_draws = f.positive_int("mc_draws");
  if (f.has("mc_seed")) c.mc_seed = f.unsigned_integer("mc_seed");
  f.finish();
  return c;
}

InstrumentalVariablesConfig parse_iv(const json& j) {
  InstrumentalVariablesConfig c;
  Fields f(j, "scenario_config");
  if (f.has("bound")) c.bound = f.number("bound");
  if (f.has("instrument_resolution")) c.instrument_resolution = f.positive_int("instrument_resolution");
  if (f.has("structural_resolution")) c.structural_resolution = f.positive_int("structural_resolution");
  if (f.has("normalization")) c.normalization = parse_normalization(f.string("normalization"));
  if (f.has("mc_draws")) c.mc_draws = f.positive_int("mc_draws");
  if (f.has("mc_seed")) c.mc_seed = f.unsigned_integer("mc_seed");
  f.finish();
  return c;
}

CalibrationConfig parse_cal(const json& j) {
  CalibrationConfig c;
  Fields f(j, "scenario_config");
  if (f.has("prior_mean")) c.prior_mean = fixed_vector<2>(f, "prior_mean");
  if (f.has("prior_variance")) c.prior_variance = f.number("prior_variance");
  if (f.has("omega_bound")) c.omega_bound = f.number("omega_bound");
  f.finish();
  return c;
}

HeckmanSelectionConfig parse_hk(const json& j) {
  HeckmanSelectionConfig c;
  Fields f(j, "scenario_config");
  if (f.has("prior_mean")) c.prior_mean = fixed_vector<3>(f, "prior_mean");
  if (f.has("prior_variance")) c.prior_variance = fixed_vector<3>(f, "prior_variance");
  if (f.has("outcome_noise_variance")) c.outcome_noise_variance = f.number("outcome_noise_variance");
  if (f.has("selection_noise")) c.selection_noise = f.boolean("selection_noise");
  if (f.has("omega_bound")) c.omega_bound = f.number("omega_bound");
  f.finish();
  return c;
}

std::unique_ptr<Scenario> make_configured(const std::string& name, const json& j) {
  // any failure while building from user input is a config error
  try {
    if (name == "contaminated-gaussian") return make_contaminated_gaussian(parse_cg(j));
    if (name == "contaminated-binary") return make_contaminated_binary(parse_cb(j));
    if (name == "confounded-causal") return make_confounded_causal(parse_cc(j));
    if (name == "instrumental-variables") return make_instrumental_variables(parse_iv(j));
    if (name == "calibration") return make_calibration(parse_cal(j));
    if (name == "heckman-selection") return make_heckman_selection(parse_hk(j));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, std::string("scenario_config: ") + e.what());
  }
  throw Error(ErrorCode::ConfigError, "scenario: unknown scenario '" + name + "'");
}

}  // namespace

const std::vector<std::string>& divergence_names() {
  static const std::vector<std::string> names{"kl", "reverse-kl", "squared-hellinger", "chi-squared"};
  return names;
}

FDivergenceSpec divergence_by_name(const std::string& name) {
  if (name == "kl") return FDivergenceSpec::kl();
  if (name == "reverse-kl") return FDivergenceSpec::generic([](double x) { return -std::log(x); }, name);
  if (name == "squared-hellinger")
    return FDivergenceSpec::generic([](double x) { return (std::sqrt(x) - 1.0) * (std::sqrt(x) - 1.0); }, name);
  if (name == "chi-squared") return FDivergenceSpec::generic([](double x) { return (x - 1.0) * (x - 1.0); }, name);
  throw Error(ErrorCode::ConfigError, "divergence: unknown divergence '" + name + "'");
}

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  Fields f(j, "");
  if (f.has("schema_version")) {
    if (f.integer("schema_version") != kSchemaVersion)
      throw Error(ErrorCode::ConfigError, "schema_version: expected " + std::to_string(kSchemaVersion));
  }
  if (f.has("scenario")) c.scenario = f.string("scenario");
  if (std::find(scenario_names().begin(), scenario_names().end(), c.scenario) == scenario_names().end())
    throw Error(ErrorCode::ConfigError, "scenario: unknown scenario '" + c.scenario + "'");
  if (f.has("analysis")) c.analysis = parse_analysis(f.string("analysis"));
  if (f.has("seed")) c.seed = f.unsigned_integer("seed");
  if (f.has("K")) c.K = f.number("K");
  if (f.has("horizon")) c.horizon = f.positive_int("horizon");
  if (f.has("replications")) c.replications = f.positive_int("replications");
  if (f.has("mode")) {
    try {
      c.mode = parse_mode(f.string("mode"));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, std::string("mode: ") + e.what());
    }
  }
  if (f.has("omega_star")) {
    const auto v = f.numbers("omega_star");
    c.omega_star = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  if (f.has("gate_space")) c.gate_space = parse_space(f.string("gate_space"));
  if (f.has("divergence")) {
    c.divergence = f.string("divergence");
    divergence_by_name(c.divergence);
  }
  if (f.has("context")) c.context = parse_context(f.sub("context"));
  if (f.has("scenario_config")) {
    c.scenario_config = f.at("scenario_config");
    if (!c.scenario_config.is_object()) throw Error(ErrorCode::ConfigError, "scenario_config: expected an object");
  }
  if (f.has("record_rows")) c.record_rows = f.boolean("record_rows");
  if (f.has("threads")) {
    const long long t = f.integer("threads");
    if (t < 0 || t > 4096) throw Error(ErrorCode::ConfigError, "threads: expected 0 (all cores) or a positive count");
    c.threads = static_cast<int>(t);
  }
  if (f.has("stable")) {
    Fields s = f.sub("stable");
    if (s.has("starts")) c.stable.starts = s.positive_int("starts");
    if (s.has("scan_points")) {
      const long long n = s.integer("scan_points");
      if (n < 0 || n == 1 || n > 100000)
        throw Error(ErrorCode::ConfigError, "stable.scan_points: expected 0 or at least 2");
      c.stable.scan_points = static_cast<int>(n);
    }
    if (s.has("replications")) {
      const long long r = s.integer("replications");
      if (r < 0) throw Error(ErrorCode::ConfigError, "stable.replications: expected a non-negative integer");
      c.stable.replications = static_cast<int>(r);
    }
    if (s.has("horizon")) c.stable.horizon = s.positive_int("horizon");
    if (s.has("dispersed_priors")) c.stable.dispersed_priors = s.boolean("dispersed_priors");
    if (s.has("radius")) c.stable.radius = s.number("radius");
    if (s.has("certitude_tolerance")) c.stable.certitude_tolerance = s.number("certitude_tolerance");
    s.finish();
  }
  if (f.has("oracle")) {
    Fields o = f.sub("oracle");
    if (o.has("probes")) c.oracle.probes = o.positive_int("probes");
    if (o.has("draws")) c.oracle.draws = o.positive_int("draws");
    o.finish();
  }
  if (f.has("graph")) {
    Fields g = f.sub("graph");
    if (g.has("file")) c.graph.file = g.string("file");
    if (g.has("q_star")) c.graph.q_star = g.strings("q_star");
    g.finish();
  }
  if (f.has("out")) c.out = f.string("out");
  f.finish();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  json j = {{"schema_version", kSchemaVersion},
            {"scenario", c.scenario},
            {"analysis", to_string(c.analysis)},
            {"seed", c.seed},
            {"horizon", c.horizon},
            {"replications", c.replications},
            {"mode", to_string(c.mode)},
            {"divergence", c.divergence},
            {"scenario_config", c.scenario_config},
            {"record_rows", c.record_rows},
            {"threads", c.threads},
            {"stable",
             {{"starts", c.stable.starts},
              {"scan_points", c.stable.scan_points},
              {"replications", c.stable.replications},
              {"horizon", c.stable.horizon},
              {"dispersed_priors", c.stable.dispersed_priors},
              {"radius", c.stable.radius},
              {"certitude_tolerance", c.stable.certitude_tolerance}}},
            {"oracle", {{"probes", c.oracle.probes}, {"draws", c.oracle.draws}}},
            {"graph", {{"file", c.graph.file}, {"q_star", c.graph.q_star}}},
            {"out", c.out}};
  // unset optionals are left out so the document parses back to the same config
  if (c.K) j["K"] = number_json(*c.K);
  if (c.omega_star) j["omega_star"] = vec_json(*c.omega_star);
  if (c.gate_space) j["gate_space"] = to_string(*c.gate_space);
  if (c.context) j["context"] = context_json(*c.context);
  return j;
}

std::unique_ptr<Scenario> build_scenario(const RunConfig& c) {
  auto sc = make_configured(c.scenario, c.scenario_config);
  if (c.gate_space) {
    try {
      sc->set_gate_space(*c.gate_space);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, std::string("gate_space: ") + e.what());
    }
  }
  if (c.context) {
    if (!sc->uses_context()) throw Error(ErrorCode::ConfigError, "context: " + c.scenario + " has no context parameter");
    sc->set_context(*c.context);
  }
  return sc;
}

TrueState default_true_state(const std::string& s) {
  if (s == "contaminated-gaussian") return {Eigen::Vector2d(0.2, 0.5)};
  if (s == "contaminated-binary") return {Eigen::Vector2d(0.7, 0.3)};
  if (s == "confounded-causal") return {Eigen::Vector2d(0.3, 0.4)};
  if (s == "instrumental-variables") return {Eigen::VectorXd::Constant(5, 0.3)};
  if (s == "calibration") return {Eigen::Vector2d(0.5, -0.5)};
  if (s == "heckman-selection") return {Eigen::Vector3d(1.0, 0.5, 0.5)};
  throw Error(ErrorCode::ConfigError, "scenario: unknown scenario '" + s + "'");
}

double default_K(const std::string& s) {
  if (s == "contaminated-gaussian") return 0.1;
  if (s == "contaminated-binary") return 1e-3;
  if (s == "confounded-causal" || s == "instrumental-variables") return 0.01;
  if (s == "calibration") return kInfiniteK;
  if (s == "heckman-selection") return 0.05;
  throw Error(ErrorCode::ConfigError, "scenario: unknown scenario '" + s + "'");
}

double effective_K(const RunConfig& c) { return c.K ? *c.K : default_K(c.scenario); }

TrueState effective_true_state(const RunConfig& c) {
  return c.omega_star ? TrueState{*c.omega_star} : default_true_state(c.scenario);
}

void validate_run_config(const RunConfig& c, const Scenario& sc) {
  const double K = effective_K(c);
  if (!(K > 0.0)) throw Error(ErrorCode::ConfigError, "K: must be positive");
  try {
    sc.validate_true_state(effective_true_state(c));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("omega_star: ") + e.what());
  }
  if (!(c.stable.radius > 0.0)) throw Error(ErrorCode::ConfigError, "stable.radius: must be positive");
  if (!(c.stable.certitude_tolerance > 0.0))
    throw Error(ErrorCode::ConfigError, "stable.certitude_tolerance: must be positive");
  // one cheap gate call surfaces divergences the scenario cannot evaluate
  if (c.divergence != "kl" && !sc.assumption_menu().empty()) {
    try {
      sc.gate_divergence(sc.prior(), 0.5, sc.assumption_menu().front(), divergence_by_name(c.divergence));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UnsupportedDivergence)
        throw Error(ErrorCode::ConfigError, std::string("divergence: ") + e.what());
    }
  }
  if (c.analysis == Analysis::Stable && !sc.uses_context())
    throw Error(ErrorCode::ConfigError, "analysis: stable needs a scenario with a context assumption");
  if (c.analysis == Analysis::Dynamics && c.mode != LearnerMode::AssumptionBased)
    throw Error(ErrorCode::ConfigError, "mode: dynamics needs assumption-based learning");
}

std::string defaults_reference() {
  const RunConfig c;
  std::ostringstream o;
  o << "# Configuration reference\n\n"
       "Generated by `assumption_lab defaults`. A run config is one JSON object; every key is optional and\n"
       "unknown keys are rejected. Command-line flags override the file.\n\n"
       "| key | default | meaning |\n|---|---|---|\n";
  o << "| `schema_version` | " << kSchemaVersion << " | must match the tool |\n";
  o << "| `scenario` | `" << c.scenario << "` | one of";
  for (const auto& n : scenario_names()) o << " `" << n << "`";
  o << " |\n";
  o << "| `analysis` | `simulate` | `simulate`, `stable`, `dynamics`, `graph-check`, `calibrate-oracle` |\n";
  o << "| `seed` | " << c.seed << " | master seed; replication r uses stream (seed, r) |\n";
  o << "| `K` | per scenario (below) | gate threshold; `\"inf\"` disables the gate |\n";
  o << "| `horizon` | " << c.horizon << " | periods per replication |\n";
  o << "| `replications` | " << c.replications << " | independent replications |\n";
  o << "| `mode` | `assumption-based` | also `misspecified-bayesian` (K = inf), `correct-bayesian` |\n";
  o << "| `omega_star` | per scenario (below) | true parameters |\n";
  o << "| `gate_space` | per scenario | `s-only` or `s-and-u` (needs a latent variable) |\n";
  o << "| `divergence` | `kl` | one of";
  for (const auto& n : divergence_names()) o << " `" << n << "`";
  o << " |\n";
  o << "| `context` | uniform on [0,1] | `{\"kind\":\"uniform\"}`, `{\"kind\":\"beta\",\"a\":..,\"b\":..}` (a, b >= 1), "
       "`{\"kind\":\"discrete\",\"points\":[..],\"weights\":[..]}` |\n";
  o << "| `scenario_config` | `{}` | scenario parameters (below) |\n";
  o << "| `record_rows` | true | write trace.csv rows |\n";
  o << "| `threads` | 0 (all cores) | worker cap; `ASSUMPTION_LAB_THREADS` caps further |\n";
  o << "| `stable.starts` | " << c.stable.starts << " | Latin-hypercube starts |\n";
  o << "| `stable.scan_points` | " << c.stable.scan_points
    << " | sign scan for repellers (one active parameter); 0 skips it |\n";
  o << "| `stable.replications` | " << c.stable.replications << " | convergence runs; 0 skips them |\n";
  o << "| `stable.horizon` | " << c.stable.horizon << " | periods per convergence run |\n";
  o << "| `stable.dispersed_priors` | true | spread prior centres across the active range |\n";
  o << "| `stable.radius` | " << c.stable.radius << " | classification radius |\n";
  o << "| `stable.certitude_tolerance` | " << c.stable.certitude_tolerance << " | bias flag threshold |\n";
  o << "| `oracle.probes` | " << c.oracle.probes << " | random beliefs per oracle check |\n";
  o << "| `oracle.draws` | " << c.oracle.draws << " | Monte Carlo draws per oracle value |\n";
  o << "| `graph.file` | empty | graph text file; the scenario DAG when empty |\n";
  o << "| `graph.q_star` | scenario active set | node names |\n";
  o << "| `out` | `" << c.out << "` | output directory |\n\n";

  o << "## Scenario defaults\n\n| scenario | K | omega_star | gate space |\n|---|---|---|---|\n";
  for (const auto& n : scenario_names()) {
    const auto sc = make_scenario(n);
    const TrueState st = default_true_state(n);
    const double k = default_K(n);
    o << "| `" << n << "` | ";
    if (std::isinf(k)) o << "inf";
    else o << k;
    o << " | (";
    for (Eigen::Index i = 0; i < st.omega.size(); ++i) o << (i ? ", " : "") << st.omega[i];
    o << ") | `" << to_string(sc->gate_space()) << "` |\n";
  }
  o << "\n## scenario_config keys\n\n";
  {
    const ContaminatedGaussianConfig d;
    o << "`contaminated-gaussian`: `prior_mean` [" << d.prior_mean[0] << ", " << d.prior_mean[1]
      << "], `prior_variance` [" << d.prior_variance[0] << ", " << d.prior_variance[1] << "], `omega_bound` "
      << d.omega_bound << ".\n\n";
  }
  {
    const ContaminatedBinaryConfig d;
    o << "`contaminated-binary`: `epsilon` " << d.epsilon << ", `resolution` " << d.resolution
      << " (cell-centred grid on [epsilon, 1 - epsilon]), `omega1_prior` `{\"kind\":\"uniform\"}` or "
         "`{\"kind\":\"beta\",\"a\":..,\"b\":..}`.\n\n";
  }
  {
    const ConfoundedCausalConfig d;
    o << "`confounded-causal`: `omega3` " << d.omega3 << ", `bound` " << d.bound << ", `resolution` " << d.resolution
      << ", `normalization` `" << normalization_name(d.normalization) << "` (or `per-context`), `mc_draws` "
      << d.mc_draws << ", `mc_seed` " << d.mc_seed << ".\n\n";
  }
  {
    const InstrumentalVariablesConfig d;
    o << "`instrumental-variables`: `bound` " << d.bound << ", `instrument_resolution` " << d.instrument_resolution
      << ", `structural_resolution` " << d.structural_resolution << " (per axis of the 4-D block), `normalization` `"
      << normalization_name(d.normalization) << "`, `mc_draws` " << d.mc_draws << ", `mc_seed` " << d.mc_seed
      << ".\n\n";
  }
  {
    const CalibrationConfig d;
    o << "`calibration`: `prior_mean` [" << d.prior_mean[0] << ", " << d.prior_mean[1] << "], `prior_variance` "
      << d.prior_variance << ", `omega_bound` " << d.omega_bound << ".\n\n";
  }
  {
    const HeckmanSelectionConfig d;
    o << "`heckman-selection`: `prior_mean` [0, 0, 0], `prior_variance` [1, 1, 1], `outcome_noise_variance` "
      << d.outcome_noise_variance << ", `selection_noise` " << (d.selection_noise ? "true" : "false")
      << ", `omega_bound` " << d.omega_bound << ".\n";
  }
  return o.str();
}

}  // namespace alab
