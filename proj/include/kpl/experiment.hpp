#pragma once

#include "kpl/baselines.hpp"
#include "kpl/datasets.hpp"
#include "kpl/dictionary.hpp"
#include "kpl/iterative.hpp"
#include "kpl/kernels.hpp"
#include "kpl/ridge.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpl::exp {

/// Invalid or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { ridge_plugin, ridge_persample, iterative, ke, one_be };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct DictionarySpec {
  DictionaryFamily family = DictionaryFamily::fourier;
  int frequencies = 15;
  int vanishing_moments = 4;
  int levels = 3;
  double lengthscale = 0.1;
  int d = 30;                  ///< rff and learned
  std::optional<std::uint64_t> seed;  ///< rff and learned; defaults to the dictionary seed
  double tau = 0.01;           ///< learned
  int max_rounds = 100;        ///< learned
  std::filesystem::path path;  ///< learned: load instead of learning when set
};

/// lambda as a single value, a grid, or the schedule c * sqrt(d) / sqrt(n)
/// (one entry per c).
struct LambdaSpec {
  enum class Kind { values, prop4 };
  Kind kind = Kind::values;
  std::vector<double> values{1e-3};  ///< lambdas, or the constants c for prop4

  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] double resolve(std::size_t i, Eigen::Index d, std::size_t n) const;
};

/// Everything needed to fit one method on a training sample.
struct MethodConfig {
  std::string label;
  Method method = Method::ridge_plugin;
  DictionarySpec dictionary;
  ScalarKernel kernel = ScalarKernel::gaussian(20.0);
  OutputStructure b_spec;
  GroundLoss loss;
  IterativeOptions iterative;
  LambdaSpec lambda;
  std::vector<double> bandwidths{1.0};  ///< KE
  bool center_outputs = true;
  Eigen::Index quadrature_nodes = 200;
};

struct Seeds {
  std::uint64_t data = 0;
  std::uint64_t observation = 1;
  std::uint64_t cv = 2;
  std::uint64_t corruption = 3;
  std::uint64_t dictionary = 4;
};

struct DatasetSpec {
  enum class Kind { toy, csv };
  Kind kind = Kind::toy;
  // toy
  ToyConfig toy;
  Eigen::Index n_train = 100;
  Eigen::Index n_test = 100;
  std::optional<Eigen::Index> observed_m;  ///< train outputs kept at m uniform-random locations
  // csv
  std::string input_kind = "vector";
  std::filesystem::path train_inputs, train_outputs, test_inputs, test_outputs;
  std::optional<std::pair<double, double>> output_domain;
};

struct RobustnessSpec {
  CorruptionSpec::Variant corruption = CorruptionSpec::Variant::local_outliers;
  std::vector<double> levels;
  int repeats = 10;
  std::vector<MethodConfig> methods;
};

struct ExperimentConfig {
  MethodConfig base;
  DatasetSpec dataset;
  Seeds seeds;
  int cv_folds = 5;
  std::optional<RobustnessSpec> robustness;
  std::filesystem::path model_dir;  ///< empty: <out>/model
  std::optional<Eigen::Index> predict_grid;  ///< prediction nodes; default quadrature_nodes
  int threads = 1;
  nlohmann::json raw;  ///< the validated input document
};

/// Parses and validates a configuration document; unknown keys are rejected.
/// `seed_override` replaces the top-level "seed" from which unnamed seeds derive.
ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

struct Split {
  PartialSample train;
  PartialSample test;
  std::optional<std::pair<double, double>> output_domain;  ///< original theta domain when rescaled
};

/// Toy: n_train + n_test draws, train outputs optionally thinned to random
/// locations. CSV: the declared files.
Split load_dataset(const DatasetSpec& spec, const Seeds& seeds, const ToyGenerator* generator = nullptr);

/// Keeps m uniform-random locations per output (values interpolated from the observed function).
PartialSample observe_random(const PartialSample& sample, Eigen::Index m, std::uint64_t seed);

struct FittedModel {
  Method method = Method::ridge_plugin;
  std::string label;
  std::optional<KplModel> kpl;
  std::optional<KeModel> ke;
  double lambda = 0.0;
  FitTimings timings;
  std::optional<LbfgsStatus> status;  ///< iterative fits
  int iterations = 0;

  [[nodiscard]] SampledFunction predict(const InputPoint& x, const Eigen::VectorXd& targets) const;
};

/// Builds the dictionary for a method (loading or learning it if needed).
Dictionary build_dictionary(const DictionarySpec& spec, const PartialSample& train, const Quadrature& q,
                            std::uint64_t default_seed, bool center);

/// Fits candidate `index` of the method's lambda / bandwidth grid.
FittedModel fit_method(const MethodConfig& cfg, const PartialSample& train, const Seeds& seeds,
                       std::size_t index = 0, const Dictionary* dictionary = nullptr);

/// Number of candidates spanned by the method's lambda (or bandwidth) grid.
std::size_t candidate_count(const MethodConfig& cfg);

/// Mean squared error of predictions at the observation locations of `test`.
double test_mse(const FittedModel& model, const PartialSample& test);

void save_fitted(const std::filesystem::path& dir, const FittedModel& model);
FittedModel load_fitted(const std::filesystem::path& dir);

}  // namespace kpl::exp
