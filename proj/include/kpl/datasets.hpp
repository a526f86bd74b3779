#pragma once

#include "kpl/functional.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kpl {

/// Cardinal cubic B-spline: support [0, 4], symmetric about 2, peak 2/3.
double bspline4(double x);

/// Synthetic function-to-function data: inputs are mixtures of unit-width
/// cubic splines centered at 1..r on [input_lo, input_hi] plus Gaussian noise;
/// outputs are the same-coefficient mixtures of r fixed Gaussian-process paths
/// on [0, 1].
struct ToyConfig {
  std::vector<double> lengthscales{0.1, 0.25, 0.1, 0.25};  ///< one GP path per entry (r = size)
  double sigma_x = 0.07;
  Eigen::Index input_grid = 200;
  Eigen::Index output_grid = 200;
  double input_lo = 0.0;
  double input_hi = 5.0;
  std::uint64_t gp_seed = 0;
  std::uint64_t sample_seed = 1;

  [[nodiscard]] int r() const { return static_cast<int>(lengthscales.size()); }
  void validate() const;
};

class ToyGenerator {
 public:
  /// Draws the r GP paths once (Cholesky with 1e-10 diagonal jitter).
  explicit ToyGenerator(ToyConfig config);

  [[nodiscard]] const ToyConfig& config() const { return config_; }
  [[nodiscard]] const Eigen::VectorXd& input_grid() const { return zeta_; }
  [[nodiscard]] const Eigen::VectorXd& output_grid() const { return theta_; }
  /// output_grid x r matrix of GP paths.
  [[nodiscard]] const Eigen::MatrixXd& paths() const { return paths_; }

  /// n samples with coefficients drawn from U[-1, 1].
  [[nodiscard]] PartialSample sample(Eigen::Index n, std::mt19937_64& rng) const;
  /// Samples with given r x n coefficients; `rng` drives the input noise only.
  [[nodiscard]] PartialSample sample_with_coefficients(const Eigen::MatrixXd& coeffs, std::mt19937_64& rng) const;
  /// Noiseless input curve and output function for coefficients a.
  [[nodiscard]] Eigen::VectorXd clean_input(const Eigen::VectorXd& a) const;
  [[nodiscard]] SampledFunction output(const Eigen::VectorXd& a) const;

 private:
  ToyConfig config_;
  Eigen::VectorXd zeta_;
  Eigen::VectorXd theta_;
  Eigen::MatrixXd paths_;
  Eigen::MatrixXd splines_;  // input_grid x r
};

/// generate from a fresh generator, sample rng seeded by config.sample_seed.
PartialSample generate_toy(const ToyConfig& config, Eigen::Index n);

struct CorruptionSpec {
  enum class Variant { local_outliers, label_noise, missing, local_noise };

  Variant variant = Variant::local_noise;
  double level = 0.0;  ///< fraction for the first three variants, noise sigma for local_noise
  std::uint64_t seed = 0;

  void validate() const;
};

std::string to_string(CorruptionSpec::Variant v);
CorruptionSpec::Variant corruption_from_string(const std::string& s);

/// Corrupts outputs only. label_noise needs `generator`: replaced functions
/// are fresh generator outputs evaluated at the original locations.
PartialSample corrupt(const PartialSample& sample, const CorruptionSpec& spec,
                      const ToyGenerator* generator = nullptr);

struct Centered {
  PartialSample sample;
  SampledFunction mean;
};

/// Mean of the training outputs on the union of their locations (each output
/// interpolated, end values held), subtracted from the outputs of `apply_to`.
Centered center_outputs(const PartialSample& train, const PartialSample& apply_to);
SampledFunction training_mean(const PartialSample& train);
PartialSample subtract_mean(const PartialSample& sample, const SampledFunction& mean);
/// f + mean at f's locations.
SampledFunction add_mean(const SampledFunction& f, const SampledFunction& mean);

struct ChannelStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
};

/// Per-channel mean and standard deviation (denominator N - 1) over all rows
/// of all training inputs; zero-variance channels get stddev 1.
ChannelStats channel_stats(std::span<const InputPoint> train);
std::vector<InputPoint> apply_standardization(std::span<const InputPoint> inputs, const ChannelStats& stats);
std::vector<InputPoint> standardize_channels(std::span<const InputPoint> train, std::span<const InputPoint> apply_to);

/// One entry of a cross-validation grid. `lambda` orders ties: on equal mean
/// score the candidate with the larger lambda wins.
struct CvCandidate {
  std::string label;
  double lambda = 0.0;
};

struct CvResult {
  std::size_t best = 0;
  std::vector<double> mean_scores;
  std::vector<std::vector<double>> fold_scores;  ///< [candidate][fold]
};

/// Held-out score (lower is better) of candidate `c` trained on fold `fold`'s training part.
using CvEvaluator =
    std::function<double(const PartialSample& train, const PartialSample& test, std::size_t c, int fold)>;

/// Seeded assignment of n samples to folds of near-equal size.
std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed);

/// Every (candidate, fold) pair is evaluated, on up to `threads` workers when
/// the evaluator is thread-safe; results do not depend on the thread count.
CvResult kfold_cv(const PartialSample& sample, int folds, std::span<const CvCandidate> candidates,
                  const CvEvaluator& evaluate, std::uint64_t seed, int threads = 1);

}  // namespace kpl
