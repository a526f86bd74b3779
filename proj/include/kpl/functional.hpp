#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace kpl {

/// A scalar function observed at explicit, strictly increasing locations in [0, 1].
class SampledFunction {
 public:
  SampledFunction(Eigen::VectorXd locations, Eigen::VectorXd values);

  [[nodiscard]] const Eigen::VectorXd& locations() const { return locations_; }
  [[nodiscard]] const Eigen::VectorXd& values() const { return values_; }
  [[nodiscard]] Eigen::Index size() const { return locations_.size(); }

  /// Piecewise-linear evaluation; outside the observed span the end value is held.
  [[nodiscard]] double evaluate_clamped(double theta) const;

 private:
  Eigen::VectorXd locations_;
  Eigen::VectorXd values_;
};

/// An input x_i: either a plain real vector, or a (locations x channels) matrix
/// holding a vector-valued input function on a shared grid.
class InputPoint {
 public:
  enum class Kind { vector, matrix };

  explicit InputPoint(Eigen::VectorXd v);
  explicit InputPoint(Eigen::MatrixXd m);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] bool is_matrix() const { return kind_ == Kind::matrix; }
  /// Vector form as a column; matrix form as stored.
  [[nodiscard]] const Eigen::MatrixXd& data() const { return data_; }
  [[nodiscard]] Eigen::Index rows() const { return data_.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return data_.cols(); }
  [[nodiscard]] bool same_shape(const InputPoint& other) const;

 private:
  Kind kind_;
  Eigen::MatrixXd data_;
};

/// Training set (x_i, (theta_i, y_i)) with per-sample observation counts m_i.
struct PartialSample {
  std::vector<InputPoint> inputs;
  std::vector<SampledFunction> outputs;

  PartialSample() = default;
  PartialSample(std::vector<InputPoint> in, std::vector<SampledFunction> out);

  [[nodiscard]] std::size_t size() const { return inputs.size(); }
  /// Throws unless n >= 1 and inputs/outputs have matching lengths.
  void validate() const;
  [[nodiscard]] PartialSample subset(std::span<const std::size_t> idx) const;
};

/// Nodes in [0, 1] with positive weights summing to one.
class Quadrature {
 public:
  Quadrature(Eigen::VectorXd nodes, Eigen::VectorXd weights);

  /// Trapezoidal weights on the given nodes, renormalized to sum to one.
  static Quadrature trapezoidal(Eigen::VectorXd nodes);
  /// Equal weights 1/m (Monte-Carlo mean weighting).
  static Quadrature mean_weights(Eigen::VectorXd nodes);
  /// Trapezoidal rule on m equispaced nodes covering [0, 1].
  static Quadrature uniform(Eigen::Index m);

  [[nodiscard]] const Eigen::VectorXd& nodes() const { return nodes_; }
  [[nodiscard]] const Eigen::VectorXd& weights() const { return weights_; }
  [[nodiscard]] Eigen::Index size() const { return nodes_.size(); }

 private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
};

Eigen::VectorXd linspace(Eigen::Index m, double lo = 0.0, double hi = 1.0);

/// Sum_p w_p f_p g_p for functions given by their values on q.nodes().
double inner_product(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const Quadrature& q);
double inner_product(const SampledFunction& f, const SampledFunction& g, const Quadrature& q);

/// Piecewise-linear interpolation at targets, which must lie in the observed span.
SampledFunction resample(const SampledFunction& f, const Eigen::VectorXd& targets);

/// (1/n) sum_i (1/m_i) sum_p (pred_i(theta_ip) - y_ip)^2. Predictions are
/// resampled onto the observation locations when grids differ.
double mse(std::span<const SampledFunction> predictions, std::span<const SampledFunction> observations);

/// (1/(sigma n)) sum_i (1/m_i) sum_p |y_ip|.
double snr(const PartialSample& sample, double sigma);

/// Affine map of locations from [lo, hi] onto [0, 1].
SampledFunction rescale_domain(const Eigen::VectorXd& locations, const Eigen::VectorXd& values, double lo,
                               double hi);

}  // namespace kpl
