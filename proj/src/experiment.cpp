#include "kpl/experiment.hpp"

#include "kpl/csv_io.hpp"
#include "kpl/dictionary_learning.hpp"
#include "kpl/errors.hpp"
#include "kpl/model_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace kpl::exp {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::ridge_plugin: return "ridge_plugin";
    case Method::ridge_persample: return "ridge_persample";
    case Method::iterative: return "iterative";
    case Method::ke: return "ke";
    case Method::one_be: return "1be";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  for (auto m : {Method::ridge_plugin, Method::ridge_persample, Method::iterative, Method::ke, Method::one_be}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown method '" + s + "' (expected ridge_plugin, ridge_persample, iterative, ke or 1be)");
}

double LambdaSpec::resolve(std::size_t i, Eigen::Index d, std::size_t n) const {
  if (i >= values.size()) throw InvalidArgument("lambda candidate index out of range");
  if (kind == Kind::values) return values[i];
  return values[i] * std::sqrt(static_cast<double>(d)) / std::sqrt(static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

const std::set<std::string> kMethodKeys{"method", "label", "dictionary", "kernel", "B", "loss",
                                        "lambda", "ke", "center_outputs", "quadrature_nodes"};
const std::set<std::string> kTopKeys{"seed",       "seeds",     "dataset",      "cv",     "robustness", "model_dir",
                                     "predict_grid", "threads", "method",       "label",  "dictionary", "kernel",
                                     "B",          "loss",      "lambda",       "ke",     "center_outputs",
                                     "quadrature_nodes"};

void check_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  check_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get(const json& j, const std::string& key, const T& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

template <class T>
T required(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing " + where + "." + key);
  return get<T>(j, key, T{}, where);
}

std::vector<double> number_or_list(const json& j, const std::string& where) {
  std::vector<double> out;
  try {
    if (j.is_number()) {
      out.push_back(j.get<double>());
    } else if (j.is_array()) {
      out = j.get<std::vector<double>>();
    } else {
      throw ConfigError(where + " must be a number or a list of numbers");
    }
  } catch (const json::exception&) {
    throw ConfigError(where + " must be a number or a list of numbers");
  }
  if (out.empty()) throw ConfigError(where + " must not be empty");
  return out;
}

void positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + " must be a positive finite number");
}

fs::path resolve_path(const std::string& p, const fs::path& base) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

DictionarySpec parse_dictionary(const json& j, const fs::path& base) {
  const std::string w = "dictionary";
  check_keys(j, {"family", "frequencies", "vanishing_moments", "levels", "lengthscale", "d", "seed", "tau",
                 "max_rounds", "path"},
             w);
  DictionarySpec s;
  try {
    s.family = dictionary_family_from_string(get<std::string>(j, "family", "fourier", w));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (s.family == DictionaryFamily::custom) throw ConfigError("dictionary.family 'custom' is only available from code");
  s.frequencies = get<int>(j, "frequencies", s.frequencies, w);
  s.vanishing_moments = get<int>(j, "vanishing_moments", s.vanishing_moments, w);
  s.levels = get<int>(j, "levels", s.levels, w);
  s.lengthscale = get<double>(j, "lengthscale", s.lengthscale, w);
  s.d = get<int>(j, "d", s.d, w);
  if (j.contains("seed")) s.seed = get<std::uint64_t>(j, "seed", 0, w);
  s.tau = get<double>(j, "tau", s.tau, w);
  s.max_rounds = get<int>(j, "max_rounds", s.max_rounds, w);
  if (j.contains("path")) s.path = resolve_path(get<std::string>(j, "path", "", w), base);

  switch (s.family) {
    case DictionaryFamily::fourier:
      if (s.frequencies < 1) throw ConfigError("dictionary.frequencies must be >= 1");
      break;
    case DictionaryFamily::wavelet:
      if (s.vanishing_moments < 1 || s.vanishing_moments > 5) throw ConfigError("dictionary.vanishing_moments must be in 1..5");
      if (s.levels < 0 || s.levels > 10) throw ConfigError("dictionary.levels must be in 0..10");
      break;
    case DictionaryFamily::rff:
      positive(s.lengthscale, "dictionary.lengthscale");
      if (s.d < 2 || s.d % 2 != 0) throw ConfigError("dictionary.d must be an even number >= 2 for rff");
      break;
    case DictionaryFamily::learned:
      if (s.path.empty()) {
        if (s.d < 1) throw ConfigError("dictionary.d must be >= 1");
        if (!(s.tau >= 0.0)) throw ConfigError("dictionary.tau must be >= 0");
        if (s.max_rounds < 1) throw ConfigError("dictionary.max_rounds must be >= 1");
      } else if (!fs::exists(s.path / "dictionary.json")) {
        throw ConfigError("dictionary.path has no dictionary.json: " + s.path.string());
      }
      break;
    case DictionaryFamily::custom: break;
  }
  return s;
}

MethodConfig parse_method(const json& j, const fs::path& base, const std::string& where) {
  MethodConfig c;
  c.method = method_from_string(get<std::string>(j, "method", "ridge_plugin", where));
  c.label = get<std::string>(j, "label", to_string(c.method), where);
  if (j.contains("dictionary")) c.dictionary = parse_dictionary(j.at("dictionary"), base);

  if (j.contains("kernel")) {
    const auto& k = j.at("kernel");
    check_keys(k, {"variant", "sigma"}, "kernel");
    const double sigma = get<double>(k, "sigma", 20.0, "kernel");
    positive(sigma, "kernel.sigma");
    try {
      c.kernel = {kernel_variant_from_string(get<std::string>(k, "variant", "gaussian", "kernel")), sigma};
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("B")) {
    const auto& b = j.at("B");
    check_keys(b, {"variant", "b"}, "B");
    try {
      c.b_spec = {output_structure_from_string(get<std::string>(b, "variant", "identity", "B")),
                  get<double>(b, "b", 1.0, "B")};
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    if (!(c.b_spec.b >= 1.0) || !std::isfinite(c.b_spec.b)) throw ConfigError("B.b must be >= 1");
  }
  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    check_keys(l, {"variant", "gamma", "tol", "max_iter", "history"}, "loss");
    const auto variant = get<std::string>(l, "variant", "square", "loss");
    if (variant == "square") {
      c.loss = GroundLoss::square();
    } else if (variant == "logcosh") {
      const double gamma = get<double>(l, "gamma", 25.0, "loss");
      positive(gamma, "loss.gamma");
      c.loss = GroundLoss::logcosh(gamma);
    } else {
      throw ConfigError("loss.variant must be 'square' or 'logcosh'");
    }
    c.iterative.tol = get<double>(l, "tol", c.iterative.tol, "loss");
    c.iterative.max_iter = get<int>(l, "max_iter", c.iterative.max_iter, "loss");
    c.iterative.history = get<int>(l, "history", c.iterative.history, "loss");
    positive(c.iterative.tol, "loss.tol");
    if (c.iterative.max_iter < 0 || c.iterative.history < 1) throw ConfigError("loss.max_iter / loss.history invalid");
  }
  if (j.contains("lambda")) {
    const auto& l = j.at("lambda");
    if (l.is_object()) {
      check_keys(l, {"schedule", "c"}, "lambda");
      if (get<std::string>(l, "schedule", "", "lambda") != "prop4") throw ConfigError("lambda.schedule must be 'prop4'");
      if (!l.contains("c")) throw ConfigError("missing lambda.c");
      c.lambda = {LambdaSpec::Kind::prop4, number_or_list(l.at("c"), "lambda.c")};
    } else {
      c.lambda = {LambdaSpec::Kind::values, number_or_list(l, "lambda")};
    }
    for (double v : c.lambda.values) positive(v, "lambda");
  }
  if (j.contains("ke")) {
    const auto& k = j.at("ke");
    check_keys(k, {"bandwidth"}, "ke");
    if (k.contains("bandwidth")) c.bandwidths = number_or_list(k.at("bandwidth"), "ke.bandwidth");
    for (double v : c.bandwidths) positive(v, "ke.bandwidth");
  }
  c.center_outputs = get<bool>(j, "center_outputs", c.center_outputs, where);
  c.quadrature_nodes = get<Eigen::Index>(j, "quadrature_nodes", c.quadrature_nodes, where);
  if (c.quadrature_nodes < 2) throw ConfigError("quadrature_nodes must be >= 2");

  if (c.method == Method::one_be) {
    if (c.dictionary.family != DictionaryFamily::fourier) throw ConfigError("method 1be needs a fourier dictionary");
    if (c.b_spec.variant != OutputStructure::Variant::identity) throw ConfigError("method 1be needs B = identity");
  }
  if (c.method != Method::ke && c.dictionary.family != DictionaryFamily::learned) {
    try {
      const DictionarySpec& d = c.dictionary;
      const Dictionary dict = d.family == DictionaryFamily::fourier ? make_fourier(d.frequencies)
                              : d.family == DictionaryFamily::wavelet
                                  ? make_wavelet(d.vanishing_moments, d.levels)
                                  : make_rff(d.lengthscale, d.d, d.seed.value_or(0));
      (void)build_B(c.b_spec, dict);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("inconsistent dictionary / B: ") + e.what());
    }
  }
  if (c.method != Method::ke && c.b_spec.variant == OutputStructure::Variant::diagonal_scale &&
      c.dictionary.family == DictionaryFamily::learned) {
    throw ConfigError("B.variant diagonal_scale needs a dictionary with atom scales (wavelet)");
  }
  return c;
}

json method_subset(const json& doc) {
  json out = json::object();
  for (const auto& [key, value] : doc.items()) {
    if (kMethodKeys.contains(key)) out[key] = value;
  }
  return out;
}

DatasetSpec parse_dataset(const json& j, const Seeds& seeds, const fs::path& base) {
  const std::string w = "dataset";
  check_object(j, w);
  DatasetSpec d;
  const auto kind = get<std::string>(j, "kind", "toy", w);
  if (kind == "toy") {
    check_keys(j, {"kind", "toy", "n_train", "n_test", "observed_m"}, w);
    d.kind = DatasetSpec::Kind::toy;
    d.toy.gp_seed = seeds.data;
    d.toy.sample_seed = seeds.data + 1;
    if (j.contains("toy")) {
      const auto& t = j.at("toy");
      check_keys(t, {"lengthscales", "sigma_x", "input_grid", "output_grid", "input_domain", "gp_seed", "sample_seed"},
                 "dataset.toy");
      d.toy.lengthscales = get<std::vector<double>>(t, "lengthscales", d.toy.lengthscales, "dataset.toy");
      d.toy.sigma_x = get<double>(t, "sigma_x", d.toy.sigma_x, "dataset.toy");
      d.toy.input_grid = get<Eigen::Index>(t, "input_grid", d.toy.input_grid, "dataset.toy");
      d.toy.output_grid = get<Eigen::Index>(t, "output_grid", d.toy.output_grid, "dataset.toy");
      if (t.contains("input_domain")) {
        const auto dom = get<std::vector<double>>(t, "input_domain", {}, "dataset.toy");
        if (dom.size() != 2) throw ConfigError("dataset.toy.input_domain must be [lo, hi]");
        d.toy.input_lo = dom[0];
        d.toy.input_hi = dom[1];
      }
      d.toy.gp_seed = get<std::uint64_t>(t, "gp_seed", d.toy.gp_seed, "dataset.toy");
      d.toy.sample_seed = get<std::uint64_t>(t, "sample_seed", d.toy.sample_seed, "dataset.toy");
    }
    try {
      d.toy.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    d.n_train = get<Eigen::Index>(j, "n_train", d.n_train, w);
    d.n_test = get<Eigen::Index>(j, "n_test", d.n_test, w);
    if (d.n_train < 1 || d.n_test < 1) throw ConfigError("dataset.n_train and dataset.n_test must be >= 1");
    if (j.contains("observed_m")) {
      d.observed_m = get<Eigen::Index>(j, "observed_m", 0, w);
      if (*d.observed_m < 1) throw ConfigError("dataset.observed_m must be >= 1");
    }
  } else if (kind == "csv") {
    check_keys(j, {"kind", "input_kind", "train_inputs", "train_outputs", "test_inputs", "test_outputs", "output_domain"},
               w);
    d.kind = DatasetSpec::Kind::csv;
    d.input_kind = get<std::string>(j, "input_kind", "vector", w);
    if (d.input_kind != "vector" && d.input_kind != "matrix") throw ConfigError("dataset.input_kind must be vector or matrix");
    d.train_inputs = resolve_path(required<std::string>(j, "train_inputs", w), base);
    d.train_outputs = resolve_path(required<std::string>(j, "train_outputs", w), base);
    if (j.contains("test_inputs")) d.test_inputs = resolve_path(get<std::string>(j, "test_inputs", "", w), base);
    if (j.contains("test_outputs")) d.test_outputs = resolve_path(get<std::string>(j, "test_outputs", "", w), base);
    for (const auto& p : {d.train_inputs, d.train_outputs, d.test_inputs, d.test_outputs}) {
      if (!p.empty() && !fs::exists(p)) throw ConfigError("dataset file not found: " + p.string());
    }
    if (d.test_inputs.empty() != d.test_outputs.empty()) {
      throw ConfigError("dataset.test_inputs and dataset.test_outputs go together");
    }
    if (j.contains("output_domain")) {
      const auto dom = get<std::vector<double>>(j, "output_domain", {}, w);
      if (dom.size() != 2 || !(dom[1] > dom[0])) throw ConfigError("dataset.output_domain must be [lo, hi] with lo < hi");
      d.output_domain = std::make_pair(dom[0], dom[1]);
    }
  } else {
    throw ConfigError("dataset.kind must be 'toy' or 'csv'");
  }
  return d;
}

ExperimentConfig parse_config_impl(const json& doc, std::optional<std::uint64_t> seed_override, const fs::path& base) {
  check_keys(doc, kTopKeys, "config");
  ExperimentConfig cfg;
  cfg.raw = doc;

  const auto seed = seed_override.value_or(get<std::uint64_t>(doc, "seed", 0, "config"));
  cfg.seeds = {seed, seed + 1, seed + 2, seed + 3, seed + 4};
  if (doc.contains("seeds")) {
    const auto& s = doc.at("seeds");
    check_keys(s, {"data", "observation", "cv", "corruption", "dictionary"}, "seeds");
    cfg.seeds.data = get<std::uint64_t>(s, "data", cfg.seeds.data, "seeds");
    cfg.seeds.observation = get<std::uint64_t>(s, "observation", cfg.seeds.observation, "seeds");
    cfg.seeds.cv = get<std::uint64_t>(s, "cv", cfg.seeds.cv, "seeds");
    cfg.seeds.corruption = get<std::uint64_t>(s, "corruption", cfg.seeds.corruption, "seeds");
    cfg.seeds.dictionary = get<std::uint64_t>(s, "dictionary", cfg.seeds.dictionary, "seeds");
  }

  const json method_doc = method_subset(doc);
  cfg.base = parse_method(method_doc, base, "config");
  cfg.dataset = parse_dataset(doc.contains("dataset") ? doc.at("dataset") : json::object(), cfg.seeds, base);

  if (doc.contains("cv")) {
    check_keys(doc.at("cv"), {"folds"}, "cv");
    cfg.cv_folds = get<int>(doc.at("cv"), "folds", cfg.cv_folds, "cv");
  }
  if (cfg.cv_folds < 2) throw ConfigError("cv.folds must be >= 2");

  if (doc.contains("robustness")) {
    const auto& r = doc.at("robustness");
    check_keys(r, {"corruption", "levels", "repeats", "methods"}, "robustness");
    RobustnessSpec rs;
    try {
      rs.corruption = corruption_from_string(get<std::string>(r, "corruption", "local_outliers", "robustness"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    rs.levels = get<std::vector<double>>(r, "levels", {}, "robustness");
    if (rs.levels.empty()) throw ConfigError("robustness.levels must not be empty");
    for (double level : rs.levels) {
      try {
        CorruptionSpec{rs.corruption, level, 0}.validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("robustness.levels: ") + e.what());
      }
    }
    rs.repeats = get<int>(r, "repeats", rs.repeats, "robustness");
    if (rs.repeats < 1) throw ConfigError("robustness.repeats must be >= 1");
    if (cfg.dataset.kind != DatasetSpec::Kind::toy) throw ConfigError("robustness sweeps need a toy dataset");
    if (r.contains("methods")) {
      if (!r.at("methods").is_array() || r.at("methods").empty()) {
        throw ConfigError("robustness.methods must be a non-empty list");
      }
      std::size_t k = 0;
      for (const auto& entry : r.at("methods")) {
        const std::string where = "robustness.methods[" + std::to_string(k++) + "]";
        check_keys(entry, kMethodKeys, where);
        json merged = method_doc;
        merged.merge_patch(entry);
        if (!entry.contains("label")) merged["label"] = merged.value("method", std::string("ridge_plugin"));
        rs.methods.push_back(parse_method(merged, base, where));
      }
    } else {
      rs.methods.push_back(cfg.base);
    }
    std::set<std::string> labels;
    for (const auto& m : rs.methods) {
      if (!labels.insert(m.label).second) throw ConfigError("duplicate robustness method label '" + m.label + "'");
      if (m.lambda.size() != 1 || (m.method == Method::ke && m.bandwidths.size() != 1)) {
        throw ConfigError("robustness method '" + m.label + "' needs a single lambda / bandwidth");
      }
    }
    cfg.robustness = std::move(rs);
  }

  if (doc.contains("model_dir")) cfg.model_dir = resolve_path(get<std::string>(doc, "model_dir", "", "config"), base);
  if (doc.contains("predict_grid")) {
    cfg.predict_grid = get<Eigen::Index>(doc, "predict_grid", 0, "config");
    if (*cfg.predict_grid < 2) throw ConfigError("predict_grid must be >= 2");
  }
  cfg.threads = get<int>(doc, "threads", 1, "config");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(const json& doc, std::optional<std::uint64_t> seed_override) {
  return parse_config_impl(doc, seed_override, {});
}

ExperimentConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return parse_config_impl(doc, seed_override, path.parent_path());
}

// ---------------------------------------------------------------------------
// Data

PartialSample observe_random(const PartialSample& sample, Eigen::Index m, std::uint64_t seed) {
  detail::require(m >= 1, "observe_random: m must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PartialSample out;
  out.inputs = sample.inputs;
  for (const auto& f : sample.outputs) {
    std::vector<double> t(static_cast<std::size_t>(m));
    for (auto& v : t) v = unif(rng);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    Eigen::VectorXd loc = Eigen::Map<Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
    Eigen::VectorXd val(loc.size());
    for (Eigen::Index p = 0; p < loc.size(); ++p) val[p] = f.evaluate_clamped(loc[p]);
    out.outputs.emplace_back(std::move(loc), std::move(val));
  }
  return out;
}

namespace {

std::vector<InputPoint> read_inputs(const fs::path& path, const std::string& kind) {
  return kind == "matrix" ? io::read_matrix_inputs_csv(path) : io::read_vector_inputs_csv(path);
}

PartialSample read_pairs(const fs::path& inputs, const fs::path& outputs, const std::string& kind,
                         std::optional<std::pair<double, double>>& domain) {
  auto x = read_inputs(inputs, kind);
  auto table = io::read_functions_csv(outputs, domain);
  if (table.functions.size() != x.size()) {
    throw InvalidArgument("dataset: " + std::to_string(x.size()) + " inputs in " + inputs.string() + " but " +
                          std::to_string(table.functions.size()) + " output functions in " + outputs.string());
  }
  if (!domain && (table.domain_lo != 0.0 || table.domain_hi != 1.0)) {
    domain = std::make_pair(table.domain_lo, table.domain_hi);
  }
  return {std::move(x), std::move(table.functions)};
}

}  // namespace

Split load_dataset(const DatasetSpec& spec, const Seeds& seeds, const ToyGenerator* generator) {
  Split s;
  if (spec.kind == DatasetSpec::Kind::toy) {
    std::optional<ToyGenerator> own;
    if (!generator) generator = &own.emplace(spec.toy);
    std::mt19937_64 rng(spec.toy.sample_seed);
    PartialSample all = generator->sample(spec.n_train + spec.n_test, rng);
    std::vector<std::size_t> tr(static_cast<std::size_t>(spec.n_train));
    std::vector<std::size_t> te(static_cast<std::size_t>(spec.n_test));
    for (std::size_t i = 0; i < tr.size(); ++i) tr[i] = i;
    for (std::size_t i = 0; i < te.size(); ++i) te[i] = tr.size() + i;
    s.train = all.subset(tr);
    s.test = all.subset(te);
    if (spec.observed_m) s.train = observe_random(s.train, *spec.observed_m, seeds.observation);
    return s;
  }
  s.output_domain = spec.output_domain;
  s.train = read_pairs(spec.train_inputs, spec.train_outputs, spec.input_kind, s.output_domain);
  if (!spec.test_inputs.empty()) s.test = read_pairs(spec.test_inputs, spec.test_outputs, spec.input_kind, s.output_domain);
  return s;
}

// ---------------------------------------------------------------------------
// Fitting

Dictionary build_dictionary(const DictionarySpec& spec, const PartialSample& train, const Quadrature& q,
                            std::uint64_t default_seed, bool center) {
  switch (spec.family) {
    case DictionaryFamily::fourier: return make_fourier(spec.frequencies);
    case DictionaryFamily::wavelet: return make_wavelet(spec.vanishing_moments, spec.levels);
    case DictionaryFamily::rff: return make_rff(spec.lengthscale, spec.d, spec.seed.value_or(default_seed));
    case DictionaryFamily::learned: {
      if (!spec.path.empty()) return io::load_dictionary(spec.path);
      const PartialSample data = center ? subtract_mean(train, training_mean(train)) : train;
      DlProblem p{outputs_on_nodes(data, q), q, spec.d, spec.tau, spec.max_rounds};
      return learn_dictionary(p, spec.seed.value_or(default_seed)).dictionary;
    }
    case DictionaryFamily::custom: break;
  }
  throw InvalidArgument("custom dictionaries cannot be built from a configuration");
}

std::size_t candidate_count(const MethodConfig& cfg) {
  return cfg.method == Method::ke ? cfg.bandwidths.size() : cfg.lambda.size();
}

namespace {

bool on_nodes(const PartialSample& s, const Quadrature& q) {
  return std::all_of(s.outputs.begin(), s.outputs.end(),
                     [&](const SampledFunction& f) { return f.locations() == q.nodes(); });
}

}  // namespace

FittedModel fit_method(const MethodConfig& cfg, const PartialSample& train, const Seeds& seeds, std::size_t index,
                       const Dictionary* dictionary) {
  using Clock = std::chrono::steady_clock;
  FittedModel out;
  out.method = cfg.method;
  out.label = cfg.label;
  if (index >= candidate_count(cfg)) throw InvalidArgument("fit_method: candidate index out of range");

  if (cfg.method == Method::ke) {
    const auto t0 = Clock::now();
    out.ke = fit_ke(train, cfg.bandwidths[index]);
    out.lambda = cfg.bandwidths[index];
    out.timings.fit_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
  }

  const auto t0 = Clock::now();
  const Quadrature q = Quadrature::uniform(cfg.quadrature_nodes);
  std::optional<SampledFunction> mean;
  PartialSample data = train;
  if (cfg.center_outputs) {
    mean = training_mean(train);
    data = subtract_mean(train, *mean);
  }
  const Dictionary dict =
      dictionary ? *dictionary : build_dictionary(cfg.dictionary, train, q, seeds.dictionary, cfg.center_outputs);
  const double pre = std::chrono::duration<double>(Clock::now() - t0).count();

  const double lambda = cfg.lambda.resolve(index, dict.size(), train.size());
  out.lambda = lambda;
  switch (cfg.method) {
    case Method::ridge_plugin:
    case Method::one_be:
      out.kpl = fit_ridge_plugin(data, dict, cfg.kernel, cfg.b_spec, q, lambda, &out.timings);
      break;
    case Method::ridge_persample:
      out.kpl = fit_ridge_persample_gram(data, dict, cfg.kernel, cfg.b_spec, lambda, &out.timings);
      break;
    case Method::iterative: {
      const auto full = on_nodes(data, q) ? std::optional<Quadrature>(q) : std::nullopt;
      auto res = fit_iterative(data, dict, cfg.kernel, cfg.b_spec, lambda, cfg.loss, cfg.iterative, full);
      out.status = res.status;
      out.iterations = res.iterations;
      out.timings = res.timings;
      out.kpl = std::move(res.model);
      break;
    }
    case Method::ke: break;
  }
  out.timings.preprocess_seconds += pre;
  out.kpl->output_offset = std::move(mean);
  return out;
}

SampledFunction FittedModel::predict(const InputPoint& x, const Eigen::VectorXd& targets) const {
  if (kpl) return kpl::predict(*kpl, x, targets);
  if (ke) return ke_predict(*ke, x, targets);
  throw InvalidArgument("FittedModel: no model");
}

double test_mse(const FittedModel& model, const PartialSample& test) {
  test.validate();
  std::vector<SampledFunction> pred;
  pred.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) pred.push_back(model.predict(test.inputs[i], test.outputs[i].locations()));
  return mse(pred, test.outputs);
}

void save_fitted(const fs::path& dir, const FittedModel& model) {
  fs::create_directories(dir);
  json j{{"method", to_string(model.method)}, {"label", model.label}, {"lambda", model.lambda}};
  if (model.kpl) {
    io::save_model(dir, *model.kpl);
    j["kind"] = "kpl";
  } else if (model.ke) {
    const auto& ke = *model.ke;
    const bool matrix = ke.training_inputs.front().is_matrix();
    if (matrix) {
      io::write_matrix_inputs_csv(dir / "ke_inputs.csv", ke.training_inputs, linspace(ke.training_inputs.front().rows()));
    } else {
      io::write_vector_inputs_csv(dir / "ke_inputs.csv", ke.training_inputs);
    }
    io::write_functions_csv(dir / "ke_outputs.csv", ke.training_outputs);
    j["kind"] = "ke";
    j["bandwidth"] = ke.bandwidth;
    j["input_kind"] = matrix ? "matrix" : "vector";
  } else {
    throw InvalidArgument("save_fitted: no model");
  }
  std::ofstream(dir / "fitted.json") << j.dump(2) << '\n';
}

FittedModel load_fitted(const fs::path& dir) {
  std::ifstream in(dir / "fitted.json");
  if (!in) throw ConfigError("no fitted model in " + dir.string());
  try {
    const json j = json::parse(in);
    FittedModel m;
    m.method = method_from_string(j.at("method").get<std::string>());
    m.label = j.at("label").get<std::string>();
    m.lambda = j.at("lambda").get<double>();
    if (j.at("kind").get<std::string>() == "kpl") {
      m.kpl = io::load_model(dir);
    } else {
      KeModel ke;
      ke.bandwidth = j.at("bandwidth").get<double>();
      ke.training_inputs = read_inputs(dir / "ke_inputs.csv", j.at("input_kind").get<std::string>());
      ke.training_outputs = io::read_functions_csv(dir / "ke_outputs.csv").functions;
      ke.validate();
      m.ke = std::move(ke);
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError("invalid fitted.json in " + dir.string() + ": " + e.what());
  }
}

}  // namespace kpl::exp
