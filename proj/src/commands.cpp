#include "kpl/commands.hpp"

#include "kpl/csv_io.hpp"
#include "kpl/dictionary_learning.hpp"
#include "kpl/errors.hpp"
#include "kpl/log.hpp"
#include "kpl/model_io.hpp"
#include "kpl/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>

namespace kpl::exp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.precision(17);
  return out;
}

std::string csv_safe(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return s;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

fs::path model_dir(const ExperimentConfig& cfg, const fs::path& out) {
  return cfg.model_dir.empty() ? out / "model" : cfg.model_dir;
}

Eigen::VectorXd prediction_grid(const ExperimentConfig& cfg) {
  return linspace(cfg.predict_grid.value_or(cfg.base.quadrature_nodes));
}

const PartialSample& require_test(const Split& s) {
  if (s.test.size() == 0) throw ConfigError("this command needs test data (dataset.test_inputs / test_outputs)");
  return s.test;
}

// Locations mapped back onto the original output domain.
SampledFunction to_domain(const SampledFunction& f, const std::optional<std::pair<double, double>>& domain) {
  if (!domain) return f;
  const auto [lo, hi] = *domain;
  return {(lo + (hi - lo) * f.locations().array()).matrix(), f.values()};
}

json timings_json(const FitTimings& t) { return {{"preprocess", t.preprocess_seconds}, {"fit", t.fit_seconds}}; }

json fit_summary(const FittedModel& m) {
  json j{{"method", to_string(m.method)}, {"label", m.label}};
  if (m.method == Method::ke) {
    j["bandwidth"] = m.lambda;
  } else {
    j["lambda"] = m.lambda;
    j["d"] = m.kpl->dictionary.size();
    j["dictionary"] = kpl::to_string(m.kpl->dictionary.family());
  }
  if (m.status) {
    j["status"] = to_string(*m.status);
    j["iterations"] = m.iterations;
  }
  return j;
}

Eigen::Index dictionary_size(const MethodConfig& mc) {
  const auto& d = mc.dictionary;
  switch (d.family) {
    case DictionaryFamily::fourier: return 2 * d.frequencies + 1;
    case DictionaryFamily::wavelet: return make_wavelet(d.vanishing_moments, d.levels).size();
    case DictionaryFamily::rff: return d.d;
    case DictionaryFamily::learned: return d.path.empty() ? d.d : io::load_dictionary(d.path).size();
    case DictionaryFamily::custom: break;
  }
  return 0;
}

}  // namespace

void run_generate_toy(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.dataset.kind != DatasetSpec::Kind::toy) throw ConfigError("generate-toy needs dataset.kind = toy");
  fs::create_directories(out);
  const Split s = load_dataset(cfg.dataset, cfg.seeds);
  io::write_vector_inputs_csv(out / "train_inputs.csv", s.train.inputs);
  io::write_functions_csv(out / "train_outputs.csv", s.train.outputs);
  io::write_vector_inputs_csv(out / "test_inputs.csv", s.test.inputs);
  io::write_functions_csv(out / "test_outputs.csv", s.test.outputs);
  const auto& t = cfg.dataset.toy;
  json j{{"toy",
          {{"lengthscales", t.lengthscales},
           {"sigma_x", t.sigma_x},
           {"input_grid", t.input_grid},
           {"output_grid", t.output_grid},
           {"input_domain", {t.input_lo, t.input_hi}},
           {"gp_seed", t.gp_seed},
           {"sample_seed", t.sample_seed}}},
         {"n_train", cfg.dataset.n_train},
         {"n_test", cfg.dataset.n_test},
         {"csv_dataset",
          {{"kind", "csv"},
           {"input_kind", "vector"},
           {"train_inputs", "train_inputs.csv"},
           {"train_outputs", "train_outputs.csv"},
           {"test_inputs", "test_inputs.csv"},
           {"test_outputs", "test_outputs.csv"}}}};
  if (cfg.dataset.observed_m) {
    j["observed_m"] = *cfg.dataset.observed_m;
    j["observation_seed"] = cfg.seeds.observation;
  }
  write_json(out / "dataset.json", j);
}

void run_fit(const ExperimentConfig& cfg, const fs::path& out) {
  if (candidate_count(cfg.base) != 1) throw ConfigError("fit needs a single lambda / bandwidth (use cv for grids)");
  fs::create_directories(out);
  const Split s = load_dataset(cfg.dataset, cfg.seeds);
  const FittedModel m = fit_method(cfg.base, s.train, cfg.seeds);
  const auto t0 = Clock::now();
  const double train_mse = test_mse(m, s.train);
  const double predict_seconds = seconds_since(t0);
  const fs::path dir = model_dir(cfg, out);
  save_fitted(dir, m);

  json report = fit_summary(m);
  report["n_train"] = s.train.size();
  report["train_mse"] = train_mse;
  report["timings"] = timings_json(m.timings);
  report["timings"]["predict"] = predict_seconds;
  report["model_dir"] = dir.string();
  write_json(out / "fit_report.json", report);
}

void run_predict(const ExperimentConfig& cfg, const fs::path& out) {
  const fs::path dir = model_dir(cfg, out);
  const FittedModel m = load_fitted(dir);
  const Split s = load_dataset(cfg.dataset, cfg.seeds);
  const PartialSample& test = require_test(s);
  fs::create_directories(out);
  const Eigen::VectorXd grid = prediction_grid(cfg);
  const auto t0 = Clock::now();
  std::vector<SampledFunction> pred;
  for (const auto& x : test.inputs) pred.push_back(to_domain(m.predict(x, grid), s.output_domain));
  const double predict_seconds = seconds_since(t0);
  io::write_functions_csv(out / "predictions.csv", pred);
  write_json(out / "predict_report.json",
             {{"model_dir", dir.string()}, {"n", test.size()}, {"grid", grid.size()}, {"predict_seconds", predict_seconds}});
}

void run_evaluate(const ExperimentConfig& cfg, const fs::path& out) {
  const fs::path dir = model_dir(cfg, out);
  const FittedModel m = load_fitted(dir);
  const Split s = load_dataset(cfg.dataset, cfg.seeds);
  const PartialSample& test = require_test(s);
  fs::create_directories(out);
  const auto t0 = Clock::now();
  const double err = test_mse(m, test);
  const double predict_seconds = seconds_since(t0);
  json j = fit_summary(m);
  j["model_dir"] = dir.string();
  j["n_test"] = test.size();
  j["test_mse"] = err;
  j["predict_seconds"] = predict_seconds;
  write_json(out / "evaluation.json", j);
}

void run_cv(const ExperimentConfig& cfg, const fs::path& out) {
  const MethodConfig& mc = cfg.base;
  const Split s = load_dataset(cfg.dataset, cfg.seeds);
  if (s.train.size() < static_cast<std::size_t>(cfg.cv_folds)) {
    throw ConfigError("cv: " + std::to_string(s.train.size()) + " training samples for " +
                      std::to_string(cfg.cv_folds) + " folds");
  }
  const std::size_t nc = candidate_count(mc);
  const bool is_ke = mc.method == Method::ke;
  const Eigen::Index d = is_ke ? 0 : dictionary_size(mc);

  std::vector<CvCandidate> cands;
  std::vector<double> values;  // value as written to the config (lambda, c or bandwidth)
  for (std::size_t c = 0; c < nc; ++c) {
    if (is_ke) {
      values.push_back(mc.bandwidths[c]);
      cands.push_back({"bandwidth=" + num(mc.bandwidths[c]), mc.bandwidths[c]});
    } else {
      values.push_back(mc.lambda.values[c]);
      const double lam = mc.lambda.resolve(c, d, s.train.size());
      const std::string tag = mc.lambda.kind == LambdaSpec::Kind::prop4 ? "c=" : "lambda=";
      cands.push_back({tag + num(mc.lambda.values[c]), lam});
    }
  }

  // Learned dictionaries are learned once per fold and shared by all candidates.
  const bool learn = !is_ke && mc.dictionary.family == DictionaryFamily::learned && mc.dictionary.path.empty();
  std::vector<std::optional<Dictionary>> fold_dicts(static_cast<std::size_t>(cfg.cv_folds));
  std::vector<std::once_flag> once(static_cast<std::size_t>(cfg.cv_folds));
  const Quadrature q = Quadrature::uniform(mc.quadrature_nodes);
  const auto evaluate = [&](const PartialSample& train, const PartialSample& test, std::size_t c, int fold) {
    const Dictionary* dict = nullptr;
    if (learn) {
      auto& slot = fold_dicts[static_cast<std::size_t>(fold)];
      std::call_once(once[static_cast<std::size_t>(fold)], [&] {
        slot = build_dictionary(mc.dictionary, train, q, cfg.seeds.dictionary, mc.center_outputs);
      });
      dict = &*slot;
    }
    return test_mse(fit_method(mc, train, cfg.seeds, c, dict), test);
  };
  const CvResult res = kfold_cv(s.train, cfg.cv_folds, cands, evaluate, cfg.seeds.cv, cfg.threads);

  fs::create_directories(out);
  {
    auto f = open_csv(out / "cv_scores.csv");
    f << "candidate,label,fold,mse\n";
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t k = 0; k < res.fold_scores[c].size(); ++k) {
        f << c << ',' << cands[c].label << ',' << k << ',' << num(res.fold_scores[c][k]) << '\n';
      }
    }
  }
  {
    auto f = open_csv(out / "cv_summary.csv");
    f << "candidate,label," << (is_ke ? "bandwidth" : "lambda") << ",mean_mse,std_mse,best\n";
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& sc = res.fold_scores[c];
      double var = 0.0;
      for (double v : sc) var += (v - res.mean_scores[c]) * (v - res.mean_scores[c]);
      var /= static_cast<double>(std::max<std::size_t>(1, sc.size() - 1));
      f << c << ',' << cands[c].label << ',' << num(cands[c].lambda) << ',' << num(res.mean_scores[c]) << ','
        << num(std::sqrt(var)) << ',' << (c == res.best ? 1 : 0) << '\n';
    }
  }
  if (nc > 1 && (res.best == 0 || res.best + 1 == nc)) {
    warn("cv: selected candidate '" + cands[res.best].label + "' lies at the edge of the grid");
  }

  json best = cfg.raw;
  best.erase("robustness");
  if (is_ke) {
    best["ke"]["bandwidth"] = values[res.best];
  } else if (mc.lambda.kind == LambdaSpec::Kind::prop4) {
    best["lambda"] = {{"schedule", "prop4"}, {"c", values[res.best]}};
  } else {
    best["lambda"] = values[res.best];
  }
  write_json(out / "best_config.json", best);
}

void run_robustness(const ExperimentConfig& cfg, const fs::path& out) {
  if (!cfg.robustness) throw ConfigError("robustness needs a 'robustness' section");
  const RobustnessSpec& rs = *cfg.robustness;
  const ToyGenerator gen(cfg.dataset.toy);

  const std::size_t nl = rs.levels.size();
  const std::size_t nm = rs.methods.size();
  const auto nr = static_cast<std::size_t>(rs.repeats);

  struct Cell {
    double snr = std::numeric_limits<double>::quiet_NaN();
    double mse = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";
    std::string note;
  };
  std::vector<Cell> cells(nr * nl * nm);

  // Each repeat regenerates the data (fixed GP paths, fresh samples) and
  // corrupts the training part only.
  std::vector<Split> splits(nr);
  for (std::size_t r = 0; r < nr; ++r) {
    DatasetSpec ds = cfg.dataset;
    ds.toy.sample_seed += r;
    Seeds seeds = cfg.seeds;
    seeds.observation += r;
    splits[r] = load_dataset(ds, seeds, &gen);
  }

  parallel_for(nr * nl, cfg.threads, [&](std::size_t job) {
    const std::size_t r = job / nl;
    const std::size_t l = job % nl;
    const CorruptionSpec spec{rs.corruption, rs.levels[l], cfg.seeds.corruption + r};
    PartialSample train;
    double snr_value = std::numeric_limits<double>::quiet_NaN();
    std::string setup_error;
    try {
      train = corrupt(splits[r].train, spec, &gen);
      if (rs.corruption == CorruptionSpec::Variant::local_noise && rs.levels[l] > 0.0) snr_value = snr(train, rs.levels[l]);
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
    for (std::size_t k = 0; k < nm; ++k) {
      Cell& cell = cells[(r * nl + l) * nm + k];
      cell.snr = snr_value;
      if (!setup_error.empty()) {
        cell.status = "error";
        cell.note = setup_error;
        continue;
      }
      try {
        const FittedModel m = fit_method(rs.methods[k], train, cfg.seeds);
        cell.mse = test_mse(m, splits[r].test);
        if (m.status && *m.status != LbfgsStatus::converged) cell.status = to_string(*m.status);
      } catch (const std::exception& e) {
        cell.status = "error";
        cell.note = e.what();
      }
    }
  });

  fs::create_directories(out);
  const std::string corruption = to_string(rs.corruption);
  {
    auto f = open_csv(out / "robustness_runs.csv");
    f << "corruption,level,repeat,method,snr,mse,status,note\n";
    for (std::size_t l = 0; l < nl; ++l) {
      for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t k = 0; k < nm; ++k) {
          const Cell& c = cells[(r * nl + l) * nm + k];
          f << corruption << ',' << num(rs.levels[l]) << ',' << r << ',' << csv_safe(rs.methods[k].label) << ','
            << num(c.snr) << ',' << num(c.mse) << ',' << c.status << ',' << csv_safe(c.note) << '\n';
        }
      }
    }
  }
  auto f = open_csv(out / "robustness.csv");
  f << "corruption,level,snr,method,mean_mse,std_mse,median_mse,repeats_ok,repeats_failed\n";
  for (std::size_t l = 0; l < nl; ++l) {
    for (std::size_t k = 0; k < nm; ++k) {
      std::vector<double> ok;
      double snr_sum = 0.0;
      std::size_t snr_count = 0;
      for (std::size_t r = 0; r < nr; ++r) {
        const Cell& c = cells[(r * nl + l) * nm + k];
        if (std::isfinite(c.mse)) ok.push_back(c.mse);
        if (std::isfinite(c.snr)) {
          snr_sum += c.snr;
          ++snr_count;
        }
      }
      const double nan = std::numeric_limits<double>::quiet_NaN();
      double mean = nan, sd = nan, median = nan;
      if (!ok.empty()) {
        mean = 0.0;
        for (double v : ok) mean += v;
        mean /= static_cast<double>(ok.size());
        double var = 0.0;
        for (double v : ok) var += (v - mean) * (v - mean);
        sd = ok.size() > 1 ? std::sqrt(var / static_cast<double>(ok.size() - 1)) : 0.0;
        std::vector<double> sorted = ok;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t h = sorted.size() / 2;
        median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
      }
      f << corruption << ',' << num(rs.levels[l]) << ',' << num(snr_count ? snr_sum / static_cast<double>(snr_count) : nan)
        << ',' << csv_safe(rs.methods[k].label) << ',' << num(mean) << ',' << num(sd) << ',' << num(median) << ','
        << ok.size() << ',' << nr - ok.size() << '\n';
    }
  }
}

void run_dictlearn(const ExperimentConfig& cfg, const fs::path& out) {
  const MethodConfig& mc = cfg.base;
  if (mc.dictionary.family != DictionaryFamily::learned || !mc.dictionary.path.empty()) {
    throw ConfigError("dictlearn needs dictionary.family = learned without dictionary.path");
  }
  const Split s = load_dataset(cfg.dataset, cfg.seeds);
  const auto t0 = Clock::now();
  const Quadrature q = Quadrature::uniform(mc.quadrature_nodes);
  const PartialSample data = mc.center_outputs ? subtract_mean(s.train, training_mean(s.train)) : s.train;
  const DlProblem p{outputs_on_nodes(data, q), q, mc.dictionary.d, mc.dictionary.tau, mc.dictionary.max_rounds};
  const DlResult res = learn_dictionary(p, mc.dictionary.seed.value_or(cfg.seeds.dictionary));
  const double seconds = seconds_since(t0);

  fs::create_directories(out);
  io::save_dictionary(out / "dictionary", res.dictionary);
  {
    auto f = open_csv(out / "dl_trace.csv");
    f << "round,objective\n";
    for (std::size_t k = 0; k < res.objective_trace.size(); ++k) f << k + 1 << ',' << num(res.objective_trace[k]) << '\n';
  }
  const RieszBounds rb = riesz_bounds(res.dictionary, q);
  write_json(out / "dictlearn_report.json", {{"d", p.d},
                                             {"tau", p.tau},
                                             {"n_train", s.train.size()},
                                             {"rounds", res.rounds},
                                             {"final_objective", res.objective_trace.back()},
                                             {"riesz_lower", rb.c_lower},
                                             {"riesz_upper", rb.c_upper},
                                             {"seconds", seconds},
                                             {"dictionary_dir", (out / "dictionary").string()}});
}

}  // namespace kpl::exp
