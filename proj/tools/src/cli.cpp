#include "truncchain_cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "truncchain/chaining.hpp"
#include "truncchain/error.hpp"
#include "truncchain/estimator.hpp"
#include "truncchain/function_class.hpp"
#include "truncchain/serialize.hpp"
#include "truncchain/verify.hpp"
#include "truncchain/version.hpp"

namespace truncchain::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Diagnostic {
  bool fatal = true;
  std::string key;  // config key the message is about, for locating it
  std::string message;
};

struct ConfigError {
  std::string key;
  std::string message;
};

struct ClassChoice {
  std::string generator;  // interval_indicators | heavy_tail | two_point | file
  std::size_t d = 8;
  HeavyTailSpec heavy;
  std::vector<double> probs{0.25, 0.75};
  std::vector<double> values{3.0, -1.0};
  std::string file;
};

struct RunConfig {
  std::string experiment;
  ClassChoice cls;
  Metric metric = Metric::L2;
  bool refine = true;
  EstimatorConfig estimator;
  bool has_estimator = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::vector<std::size_t> n_grid;
  std::vector<double> u_grid;
  std::vector<double> delta_grid;
  std::vector<double> b_exponents;
  std::size_t level = 1;
  double eta = 0.5;
  std::vector<std::size_t> subset;
  std::optional<std::size_t> oracle_function;
  std::size_t oracle_replicates = 100000;
};

const std::vector<std::string> kKnownKeys{
    "experiment", "class",  "sequence", "estimator", "seed",   "replicates", "n_grid",
    "u_grid",     "delta_grid", "b_exponents", "level", "eta", "subset",     "oracle"};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError{"", "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string brief(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Position of the first `"key"` in the text, or empty.
std::string locate(std::string_view text, const std::string& key) {
  if (key.empty()) return "";
  const auto at = text.find("\"" + key + "\"");
  if (at == std::string_view::npos) return "";
  return text_position(text, at);
}

template <class T>
T get_as(const json& node, const std::string& key) {
  try {
    return node.get<T>();
  } catch (const json::exception&) {
    throw ConfigError{key, "\"" + key + "\" has the wrong type"};
  }
}

std::size_t get_count(const json& node, const std::string& key) {
  if (!node.is_number_unsigned() && !(node.is_number_integer() && node.get<long long>() >= 0)) {
    throw ConfigError{key, "\"" + key + "\" must be a nonnegative integer"};
  }
  return node.get<std::size_t>();
}

std::vector<std::size_t> get_counts(const json& node, const std::string& key) {
  if (!node.is_array()) throw ConfigError{key, "\"" + key + "\" must be an array"};
  std::vector<std::size_t> out;
  for (const auto& v : node) out.push_back(get_count(v, key));
  return out;
}

std::vector<double> get_reals(const json& node, const std::string& key) {
  if (!node.is_array()) throw ConfigError{key, "\"" + key + "\" must be an array"};
  std::vector<double> out;
  for (const auto& v : node) {
    if (!v.is_number()) throw ConfigError{key, "\"" + key + "\" must hold numbers"};
    out.push_back(v.get<double>());
  }
  return out;
}

ClassChoice parse_class(const json& node, const fs::path& base) {
  ClassChoice c;
  if (!node.is_object()) throw ConfigError{"class", "\"class\" must be an object"};
  if (node.contains("file")) {
    c.generator = "file";
    const fs::path p = get_as<std::string>(node["file"], "file");
    c.file = (p.is_absolute() ? p : base / p).string();
    return c;
  }
  if (!node.contains("generator")) {
    throw ConfigError{"class", "\"class\" needs \"generator\" or \"file\""};
  }
  c.generator = get_as<std::string>(node["generator"], "generator");
  if (c.generator == "interval_indicators") {
    if (node.contains("d")) c.d = get_count(node["d"], "d");
  } else if (c.generator == "heavy_tail") {
    if (node.contains("b_exponent")) c.heavy.b_exponent = get_as<double>(node["b_exponent"], "b_exponent");
    if (node.contains("atoms")) c.heavy.atoms = get_count(node["atoms"], "atoms");
    if (node.contains("mass_scale")) c.heavy.mass_scale = get_as<double>(node["mass_scale"], "mass_scale");
    if (node.contains("a_power")) {
      c.heavy.a_decay.kind = CoefficientDecay::Kind::Power;
      c.heavy.a_decay.power = get_as<double>(node["a_power"], "a_power");
    }
  } else if (c.generator == "two_point") {
    if (node.contains("probs")) c.probs = get_reals(node["probs"], "probs");
    if (node.contains("values")) c.values = get_reals(node["values"], "values");
  } else {
    throw ConfigError{"generator", "unknown generator \"" + c.generator +
                                       "\" (interval_indicators, heavy_tail, two_point)"};
  }
  return c;
}

RunConfig parse_config(const std::string& text, const fs::path& base,
                       std::vector<Diagnostic>& diags) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError{"", text_position(text, e.byte == 0 ? 0 : e.byte - 1) + ": malformed JSON"};
  }
  if (!root.is_object()) throw ConfigError{"", "config must be a JSON object"};
  for (const auto& item : root.items()) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), item.key()) == kKnownKeys.end()) {
      diags.push_back({true, item.key(), "unknown key \"" + item.key() + "\""});
    }
  }

  RunConfig c;
  if (root.contains("experiment")) c.experiment = get_as<std::string>(root["experiment"], "experiment");
  if (!root.contains("class")) throw ConfigError{"", "missing \"class\""};
  c.cls = parse_class(root["class"], base);
  if (root.contains("sequence")) {
    const auto& s = root["sequence"];
    if (s.contains("metric")) {
      const auto m = get_as<std::string>(s["metric"], "metric");
      if (m == "L2") {
        c.metric = Metric::L2;
      } else if (m == "Linf") {
        c.metric = Metric::Linf;
      } else {
        throw ConfigError{"metric", "metric must be \"L2\" or \"Linf\""};
      }
    }
    if (s.contains("refine")) c.refine = get_as<bool>(s["refine"], "refine");
  }
  if (root.contains("estimator")) {
    try {
      c.estimator = config_from_json(root["estimator"].dump());
    } catch (const Error& e) {
      throw ConfigError{"estimator", e.what()};
    }
    c.has_estimator = true;
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned() && !root["seed"].is_number_integer()) {
      throw ConfigError{"seed", "\"seed\" must be an integer"};
    }
    c.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("replicates")) c.replicates = get_count(root["replicates"], "replicates");
  if (root.contains("n_grid")) c.n_grid = get_counts(root["n_grid"], "n_grid");
  if (root.contains("u_grid")) c.u_grid = get_reals(root["u_grid"], "u_grid");
  if (root.contains("delta_grid")) c.delta_grid = get_reals(root["delta_grid"], "delta_grid");
  if (root.contains("b_exponents")) c.b_exponents = get_reals(root["b_exponents"], "b_exponents");
  if (root.contains("level")) c.level = get_count(root["level"], "level");
  if (root.contains("eta")) c.eta = get_as<double>(root["eta"], "eta");
  if (root.contains("subset")) c.subset = get_counts(root["subset"], "subset");
  if (root.contains("oracle")) {
    const auto& o = root["oracle"];
    if (!o.is_object() || !o.contains("function")) {
      throw ConfigError{"oracle", "\"oracle\" must be {\"function\": f, \"replicates\": R}"};
    }
    c.oracle_function = get_count(o["function"], "function");
    if (o.contains("replicates")) c.oracle_replicates = get_count(o["replicates"], "replicates");
  }
  return c;
}

ClassPtr load_class(const ClassChoice& c) {
  if (c.generator == "interval_indicators") return interval_indicators(c.d);
  if (c.generator == "heavy_tail") return heavy_tail_pair(c.heavy).cls;
  if (c.generator == "two_point") return two_point_class(c.probs, c.values);
  return class_from_json(read_file(c.file));
}

json class_json(const ClassChoice& c) {
  json j;
  j["generator"] = c.generator;
  if (c.generator == "interval_indicators") {
    j["d"] = c.d;
  } else if (c.generator == "heavy_tail") {
    j["b_exponent"] = c.heavy.b_exponent;
    j["atoms"] = c.heavy.atoms;
    j["mass_scale"] = heavy_tail_mass_scale(c.heavy);
    if (c.heavy.a_decay.kind == CoefficientDecay::Kind::Power) {
      j["a_power"] = c.heavy.a_decay.power;
    } else {
      j["a_decay"] = "inverse_log_squared";
    }
  } else if (c.generator == "two_point") {
    j["probs"] = c.probs;
    j["values"] = c.values;
  } else {
    j["file"] = c.file;
  }
  return j;
}

bool needs_estimator(const std::string& e) {
  return e == "estimate" || e == "clt-test" || e == "lemma21";
}

std::size_t default_replicates(const std::string& e) {
  if (e == "clt-test") return 2000;
  if (e == "oscillation") return 1000;
  if (e == "lemma21") return 10000;
  return 1;
}

/// Static checks that need no class construction beyond sizes.
void check_experiment(const RunConfig& c, const FunctionClass* cls, std::vector<Diagnostic>& d) {
  const std::string& e = c.experiment;
  if (needs_estimator(e) && !c.has_estimator) {
    d.push_back({true, "", e + " needs an \"estimator\" block with \"n\""});
  }
  auto need = [&](bool present, const char* key) {
    if (!present) d.push_back({true, "", e + " needs \"" + key + "\""});
  };
  if (e == "bias-sweep") need(!c.n_grid.empty(), "n_grid");
  if (e == "clt-test") need(!c.subset.empty(), "subset");
  if (e == "oscillation") {
    need(!c.delta_grid.empty(), "delta_grid");
    need(!c.n_grid.empty(), "n_grid");
  }
  if (e == "necessity") {
    need(!c.b_exponents.empty(), "b_exponents");
    need(!c.n_grid.empty(), "n_grid");
    if (c.cls.generator != "heavy_tail") d.push_back({true, "generator", "necessity runs on the heavy_tail generator"});
  }
  if (e == "lemma21") need(!c.u_grid.empty(), "u_grid");

  for (double u : c.u_grid) {
    if (!(u > 0.5)) {
      d.push_back({true, "u_grid", "u_grid value " + brief(u) +
                                       " violates the precondition u > 1/2 of the level deviation bound"});
    }
  }
  for (double b : c.b_exponents) {
    if (!(b > 0.0 && b <= 0.5)) d.push_back({true, "b_exponents", "b_exponent " + brief(b) + " outside (0, 1/2]"});
  }
  if (c.replicates && *c.replicates == 0) d.push_back({true, "replicates", "replicates must be at least 1"});
  if (e == "clt-test" && c.replicates && *c.replicates < 100) {
    d.push_back({true, "replicates", "clt-test needs at least 100 replicates"});
  }
  if (c.oracle_function) {
    const double atoms = cls ? static_cast<double>(cls->atom_count()) : 0.0;
    const double n = static_cast<double>(c.estimator.n);
    if (cls && std::pow(atoms, n) > kEnumerationLimit) {
      d.push_back({true, "oracle", "enumeration infeasible: " + brief(atoms) + "^" + brief(n) +
                                       " samples exceed the limit " + brief(kEnumerationLimit)});
    }
    if (cls && *c.oracle_function >= cls->size()) {
      d.push_back({true, "function", "oracle function index out of range"});
    }
  }
  if (cls) {
    for (auto f : c.subset) {
      if (f >= cls->size()) d.push_back({true, "subset", "subset index " + std::to_string(f) + " out of range"});
    }
  }
}

void print_diagnostics(const std::vector<Diagnostic>& diags, const std::string& path,
                       std::string_view text, std::ostream& err) {
  for (const auto& d : diags) {
    std::string where = path;
    const auto pos = locate(text, d.key);
    if (!pos.empty()) where += ":" + pos;
    err << where << ": " << (d.fatal ? "error: " : "warning: ") << d.message << '\n';
  }
}

bool has_fatal(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.fatal; });
}

void print_config_error(const ConfigError& e, const std::string& path, std::string_view text,
                        std::ostream& err) {
  std::string where = path;
  const auto pos = locate(text, e.key);
  if (!pos.empty()) where += ":" + pos;
  err << where << ": error: " << e.message << '\n';
  // Quote the offending line when the message carries a position.
  std::string line_col = pos;
  if (line_col.empty() && e.message.find(": malformed JSON") != std::string::npos) {
    line_col = e.message.substr(0, e.message.find(':', e.message.find(':') + 1));
  }
  if (!line_col.empty()) {
    const std::size_t line = std::stoul(line_col.substr(0, line_col.find(':')));
    const std::size_t col = std::stoul(line_col.substr(line_col.find(':') + 1));
    std::istringstream in{std::string(text)};
    std::string l;
    for (std::size_t i = 0; i < line && std::getline(in, l); ++i) {
    }
    err << "  " << l << "\n  " << std::string(col > 0 ? col - 1 : 0, ' ') << "^\n";
  }
}

json resolved_config(const RunConfig& c, const ClassPtr& cls) {
  json j;
  j["experiment"] = c.experiment;
  j["class"] = class_json(c.cls);
  j["class"]["functions"] = cls->size();
  j["class"]["atoms"] = cls->atom_count();
  j["sequence"] = {{"metric", c.metric == Metric::L2 ? "L2" : "Linf"}, {"refine", c.refine}};
  if (c.has_estimator) j["estimator"] = json::parse(config_to_json(c.estimator));
  j["seed"] = *c.seed;
  j["replicates"] = c.replicates.value_or(default_replicates(c.experiment));
  if (!c.n_grid.empty()) j["n_grid"] = c.n_grid;
  if (!c.u_grid.empty()) j["u_grid"] = c.u_grid;
  if (!c.delta_grid.empty()) j["delta_grid"] = c.delta_grid;
  if (!c.b_exponents.empty()) j["b_exponents"] = c.b_exponents;
  if (c.experiment == "lemma21") j["level"] = c.level;
  if (c.experiment == "oscillation") j["eta"] = c.eta;
  if (!c.subset.empty()) j["subset"] = c.subset;
  if (c.oracle_function) {
    j["oracle"] = {{"function", *c.oracle_function}, {"replicates", c.oracle_replicates}};
  }
  return j;
}

AdmissibleSequence build_sequence(const RunConfig& c, const ClassPtr& cls) {
  BuildOptions opts;
  opts.refine = c.refine;
  return build_admissible(cls, c.metric, opts);
}

struct Outcome {
  std::string csv;
  json results;
  std::optional<bool> pass;
  std::vector<std::pair<std::string, std::string>> extra_files;
};

Outcome chain_info(const RunConfig& c, const ClassPtr& cls) {
  const auto seq = build_sequence(c, cls);
  const ChainDecomposition decomp(seq);
  Outcome o;
  o.csv = "level,size,max_distance,distinct_increments\n";
  json sizes = json::array();
  for (std::size_t s = 0; s <= seq.s_max(); ++s) {
    double worst = 0.0;
    for (std::size_t f = 0; f < cls->size(); ++f) worst = std::max(worst, seq.distance_to_level(s, f));
    const std::size_t distinct = s == 0 ? 0 : decomp.distinct_increments(s);
    o.csv += std::to_string(s) + "," + std::to_string(seq.level(s).size()) + "," + fmt(worst) + "," +
             std::to_string(distinct) + "\n";
    sizes.push_back(seq.level(s).size());
  }
  o.results["s_max"] = seq.s_max();
  o.results["gamma2"] = gamma_functional(seq, 2);
  o.results["linf_chain"] = linf_chain_functional(seq);
  o.results["level_sizes"] = sizes;
  const double c0 = c.has_estimator ? c.estimator.c0 : 1.0;
  std::size_t n0 = 0;
  bool finite = true;
  for (std::size_t f = 0; f < cls->size(); ++f) {
    finite = finite && std::isfinite(identity_threshold(decomp, f, c0));
    n0 = std::max(n0, identity_sample_size(decomp, f, c0));
  }
  if (finite) {
    o.results["identity_sample_size"] = n0;
  } else {
    o.results["identity_sample_size"] = nullptr;
  }
  return o;
}

Outcome estimate(const RunConfig& c, const ClassPtr& cls) {
  const auto seq = build_sequence(c, cls);
  const ChainDecomposition decomp(seq);
  const ModifiedProcess mp(decomp, c.estimator);
  const Sample sample = draw_sample(cls->space(), c.estimator.n, *c.seed);
  const auto counts = atom_counts(cls->space(), sample);
  Outcome o;
  o.csv = "function,mean,phi_mean,empirical_f,empirical_phi,identity\n";
  double sup_dev = 0.0;
  for (std::size_t f = 0; f < cls->size(); ++f) {
    CompensatedSum raw;
    for (std::size_t a = 0; a < counts.size(); ++a) raw.add(counts[a] * cls->value(f, a));
    const double pf = raw.value() / static_cast<double>(c.estimator.n);
    const double pphi = mp.empirical_mean(f, counts);
    sup_dev = std::max(sup_dev, std::abs(pphi - mp.mean(f)));
    o.csv += std::to_string(f) + "," + fmt(mp.mean(f)) + "," + fmt(mp.phi_mean(f)) + "," + fmt(pf) + "," +
             fmt(pphi) + "," + (phi(decomp, f, c.estimator).identity() ? "1" : "0") + "\n";
  }
  o.results["gamma2"] = gamma_functional(seq, 2);
  o.results["sup_deviation"] = sup_dev;
  o.results["global_bound_u1"] = global_deviation_bound(1.0, gamma_functional(seq, 2), c.estimator.n);
  o.results["identity_regime"] = identity_regime(decomp, c.estimator);
  if (c.oracle_function) {
    const auto agree = oracle_agreement(decomp, *c.oracle_function, c.estimator, c.oracle_replicates,
                                        *c.seed);
    std::string csv = "value,exact,empirical,tolerance\n";
    for (const auto& cell : agree.cells) {
      csv += fmt(cell.value) + "," + fmt(cell.exact) + "," + fmt(cell.empirical) + "," + fmt(cell.tolerance) + "\n";
    }
    o.extra_files.emplace_back("estimate_oracle.csv", csv);
    o.results["oracle"] = {{"function", *c.oracle_function},
                           {"cells", agree.cells.size()},
                           {"stray_mass", agree.stray_mass},
                           {"replicates", agree.replicates}};
    o.pass = agree.pass;
  }
  return o;
}

Outcome bias(const RunConfig& c, const ClassPtr& cls) {
  const ChainDecomposition decomp(build_sequence(c, cls));
  const auto report = bias_sweep(decomp, c.n_grid, c.estimator);
  Outcome o;
  o.csv = report.to_csv();
  o.results["scaled_sup_bias"] = report.metric("scaled_sup_bias");
  return o;
}

Outcome clt(const RunConfig& c, const ClassPtr& cls) {
  const ChainDecomposition decomp(build_sequence(c, cls));
  const auto report = clt_test(decomp, c.subset, c.estimator, c.replicates.value_or(2000), *c.seed);
  Outcome o;
  o.csv = report.to_csv();
  o.results["ks_statistics"] = report.ks_statistics;
  o.results["ks_critical"] = report.ks_critical;
  o.results["cov_error"] = report.cov_error;
  o.results["cov_tolerance"] = kCltCovTolerance;
  o.pass = report.pass;
  return o;
}

Outcome oscillation(const RunConfig& c, const ClassPtr& cls) {
  const ChainDecomposition decomp(build_sequence(c, cls));
  const auto report = oscillation_sweep(decomp, c.delta_grid, c.n_grid, c.eta, c.estimator,
                                        c.replicates.value_or(1000), *c.seed);
  Outcome o;
  o.csv = report.to_csv();
  const auto check = oscillation_ordering(report);
  o.results["monotone_in_delta"] = check.monotone;
  o.results["corner_small_delta"] = check.small_delta;
  o.results["corner_large_delta"] = check.large_delta;
  o.pass = check.pass;
  return o;
}

Outcome necessity(const RunConfig& c) {
  const auto report = necessity_sweep(c.cls.heavy, c.b_exponents, c.n_grid);
  Outcome o;
  o.csv = report.sweep.to_csv();
  json verdicts = json::object();
  for (std::size_t i = 0; i < report.b_exponents.size(); ++i) {
    verdicts[report.sweep.metrics[i].first] = to_string(report.verdicts[i]);
  }
  o.results["verdicts"] = verdicts;
  o.results["mass_scale"] = report.mass_scale;
  return o;
}

Outcome lemma21(const RunConfig& c, const ClassPtr& cls) {
  const ChainDecomposition decomp(build_sequence(c, cls));
  const auto report = lemma21_coverage(decomp, c.level, c.u_grid, c.estimator.n,
                                       c.replicates.value_or(10000), *c.seed,
                                       ChainConstants{c.estimator.c0, 12.0});
  Outcome o;
  o.csv = report.to_csv();
  const auto& rate = report.metric("violation_rate");
  const auto& bound = report.metric("bound");
  bool ok = true;
  for (std::size_t i = 0; i < rate.size(); ++i) ok = ok && rate[i] <= bound[i];
  o.results["violation_rate"] = rate;
  o.results["bound"] = bound;
  o.pass = ok;
  return o;
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  if (!out) throw ConfigError{"", "cannot write " + path.string()};
}

}  // namespace

int run(const Options& options, std::ostream& out, std::ostream& err) {
  const auto& names = experiments();
  if (std::find(names.begin(), names.end(), options.experiment) == names.end()) {
    err << "error: unknown experiment \"" << options.experiment << "\"\n";
    return kConfigError;
  }
  std::string text;
  RunConfig c;
  std::vector<Diagnostic> diags;
  ClassPtr cls;
  try {
    text = read_file(options.config_path);
    c = parse_config(text, fs::path(options.config_path).parent_path(), diags);
    if (!c.experiment.empty() && c.experiment != options.experiment) {
      diags.push_back({true, "experiment", "config is for \"" + c.experiment + "\", not \"" +
                                               options.experiment + "\""});
    }
    c.experiment = options.experiment;
    if (options.seed) c.seed = options.seed;
    if (!c.seed) diags.push_back({true, "", "no seed: pass --seed or set \"seed\""});
    cls = load_class(c.cls);
    check_experiment(c, cls.get(), diags);
  } catch (const ConfigError& e) {
    print_config_error(e, options.config_path, text, err);
    return kConfigError;
  } catch (const Error& e) {
    err << options.config_path << ": error: " << e.what() << '\n';
    return kConfigError;
  }
  print_diagnostics(diags, options.config_path, text, err);
  if (has_fatal(diags)) return kConfigError;

  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  const fs::path dir(options.out_dir);
  const fs::path probe = dir / ".truncchain_write_probe";
  {
    std::ofstream p(probe);
    if (!p) {
      err << "error: output directory " << options.out_dir << " is not writable\n";
      return kConfigError;
    }
  }
  fs::remove(probe, ec);

  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    const std::string& e = c.experiment;
    if (e == "chain-info") o = chain_info(c, cls);
    else if (e == "estimate") o = estimate(c, cls);
    else if (e == "bias-sweep") o = bias(c, cls);
    else if (e == "clt-test") o = clt(c, cls);
    else if (e == "oscillation") o = oscillation(c, cls);
    else if (e == "necessity") o = necessity(c);
    else o = lemma21(c, cls);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json summary;
  summary["experiment"] = c.experiment;
  summary["version"] = std::string(version());
  summary["config"] = resolved_config(c, cls);
  summary["csv"] = c.experiment + ".csv";
  summary["results"] = o.results;
  if (o.pass) summary["verdict"] = *o.pass ? "PASS" : "FAIL";
  summary["wall_seconds"] = wall;
  try {
    write_text(dir / (c.experiment + ".csv"), o.csv);
    for (const auto& [name, body] : o.extra_files) write_text(dir / name, body);
    write_text(dir / (c.experiment + ".json"), summary.dump(2) + "\n");
  } catch (const ConfigError& e) {
    err << "error: " << e.message << '\n';
    return kConfigError;
  }

  out << c.experiment << ": wrote " << (dir / (c.experiment + ".csv")).string() << '\n';
  if (o.results.contains("verdicts")) {
    for (const auto& [k, v] : o.results["verdicts"].items()) out << "  " << k << ": " << v.get<std::string>() << '\n';
  }
  if (o.pass) {
    out << (*o.pass ? "PASS" : "FAIL") << '\n';
    return *o.pass ? kOk : kVerdictFail;
  }
  return kOk;
}

int validate(const std::string& config_path, std::ostream& out, std::ostream& err) {
  std::string text;
  std::vector<Diagnostic> diags;
  RunConfig c;
  ClassPtr cls;
  try {
    text = read_file(config_path);
    c = parse_config(text, fs::path(config_path).parent_path(), diags);
    if (!c.experiment.empty()) {
      const auto& names = experiments();
      if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
        diags.push_back({true, "experiment", "unknown experiment \"" + c.experiment + "\""});
      }
    }
    cls = load_class(c.cls);
    check_experiment(c, cls.get(), diags);
  } catch (const ConfigError& e) {
    print_config_error(e, config_path, text, err);
    return kConfigError;
  } catch (const Error& e) {
    err << config_path << ": error: " << e.what() << '\n';
    return kConfigError;
  }
  // Infeasible enumeration is only a warning until someone runs it.
  for (auto& d : diags) {
    if (d.key == "oracle") d.fatal = false;
  }
  print_diagnostics(diags, config_path, text, err);
  if (has_fatal(diags)) return kConfigError;

  std::size_t s_max = 0;
  try {
    s_max = build_sequence(c, cls).s_max();
  } catch (const Error& e) {
    err << config_path << ": error: " << e.what() << '\n';
    return kConfigError;
  }
  out << "OK\n";
  out << "functions " << cls->size() << ", atoms " << cls->atom_count() << ", s_max " << s_max << '\n';
  if (!c.seed) out << "note: no seed in config; pass --seed when running\n";
  if (cls->size() <= 64 && cls->atom_count() <= 4096) {
    const ChainDecomposition decomp(build_sequence(c, cls));
    const double c0 = c.has_estimator ? c.estimator.c0 : 1.0;
    out << "n0:";
    for (std::size_t f = 0; f < cls->size(); ++f) {
      out << ' '
          << (std::isfinite(identity_threshold(decomp, f, c0))
                  ? std::to_string(identity_sample_size(decomp, f, c0))
                  : std::string("inf"));
    }
    out << '\n';
  }
  return kOk;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Truncated-chain empirical estimator experiments"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  Options options;
  std::uint64_t seed = 0;
  for (const auto& name : experiments()) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", options.config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--out", options.out_dir, "Output directory")->capture_default_str();
  }
  std::string validate_path;
  auto* val = app.add_subcommand("validate", "Check a config without running it");
  val->add_option("--config", validate_path, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kConfigError;
  }
  if (val->parsed()) return validate(validate_path, out, err);
  for (auto* sub : app.get_subcommands()) {
    options.experiment = sub->get_name();
    if (sub->count("--seed") > 0) options.seed = seed;
  }
  return run(options, out, err);
}

}  // namespace truncchain::cli
