#pragma once

#include "kpl/dictionary.hpp"
#include "kpl/functional.hpp"
#include "kpl/kernels.hpp"
#include "kpl/lbfgs.hpp"
#include "kpl/ridge.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace kpl {

/// Pointwise ground loss l(a, b) between an observed value a and a prediction b.
///   square:  (a - b)^2
///   logcosh: (1/gamma) log cosh(gamma (a - b))
struct GroundLoss {
  enum class Variant { square, logcosh };

  Variant variant = Variant::square;
  double gamma = 1.0;

  static GroundLoss square() { return {}; }
  static GroundLoss logcosh(double gamma);

  [[nodiscard]] double value(double a, double b) const;
  /// Derivative with respect to the prediction b.
  [[nodiscard]] double deriv_second(double a, double b) const;
};

std::string to_string(GroundLoss::Variant v);

/// Output observations as seen by the integral loss: either every function on
/// the same quadrature grid (full) or each function on its own locations with
/// Monte-Carlo weights 1/m_i (partial).
class ObservationView {
 public:
  static ObservationView full(const PartialSample& sample, const Dictionary& dict, const Quadrature& q);
  static ObservationView partial(const PartialSample& sample, const Dictionary& dict);

  [[nodiscard]] bool is_full() const { return shared_; }
  [[nodiscard]] Eigen::Index samples() const { return n_; }
  [[nodiscard]] Eigen::Index atoms_count() const { return d_; }

  /// Loss part (1/n) sum_i int l(y_i, pred_i); coefficients P is d x n with column
  /// i the dictionary coefficients of prediction i. Writes d x n matrix C with
  /// column i = int l'(y_i, pred_i) phi (before the 1/n factor) if requested.
  double loss(const GroundLoss& l, const Eigen::MatrixXd& coeffs, Eigen::MatrixXd* grad_columns) const;

 private:
  bool shared_ = false;
  Eigen::Index n_ = 0;
  Eigen::Index d_ = 0;
  // full view
  Eigen::MatrixXd atoms_;  // m x d
  Eigen::VectorXd weights_;
  Eigen::MatrixXd values_;  // m x n
  // partial view
  std::vector<Eigen::MatrixXd> sample_atoms_;
  std::vector<Eigen::VectorXd> sample_weights_;
  std::vector<Eigen::VectorXd> sample_values_;
};

/// Data and hyper-parameters of the representer-parameterized objective
///   (1/n) sum_i l_{y_i}(Phi B alpha k_x(x_i)) + lambda <K_X, alpha^T B alpha>.
struct ObjectiveState {
  ObservationView view;
  Eigen::MatrixXd K;
  Eigen::MatrixXd B;
  double lambda = 0.0;
  GroundLoss loss;
};

ObjectiveState make_objective(const PartialSample& sample, const Dictionary& dict, const ScalarKernel& kernel,
                              const OutputStructure& b_spec, double lambda, const GroundLoss& loss,
                              const std::optional<Quadrature>& full_quadrature);

double objective(const ObjectiveState& state, const Eigen::MatrixXd& alpha);
/// Exact gradient: B ((1/n) C + 2 lambda alpha) K.
Eigen::MatrixXd gradient(const ObjectiveState& state, const Eigen::MatrixXd& alpha);
double objective_and_gradient(const ObjectiveState& state, const Eigen::MatrixXd& alpha, Eigen::MatrixXd& grad);

/// Named entry points that check the data view.
double objective_full(const ObjectiveState& state, const Eigen::MatrixXd& alpha);
double objective_partial(const ObjectiveState& state, const Eigen::MatrixXd& alpha);
Eigen::MatrixXd gradient_full(const ObjectiveState& state, const Eigen::MatrixXd& alpha);
Eigen::MatrixXd gradient_partial(const ObjectiveState& state, const Eigen::MatrixXd& alpha);

struct IterativeOptions {
  double tol = 1e-7;
  int max_iter = 2000;
  int history = 10;
};

struct IterativeResult {
  KplModel model;
  LbfgsStatus status;
  int iterations = 0;
  double objective = 0.0;
  double grad_inf = 0.0;
  std::vector<double> trace;
  FitTimings timings;

  [[nodiscard]] bool converged() const { return status == LbfgsStatus::converged; }
};

/// L-BFGS from alpha = 0. With `full_quadrature` the outputs must lie on its
/// nodes (full observation); otherwise the partial view is used.
IterativeResult fit_iterative(const PartialSample& sample, const Dictionary& dict, const ScalarKernel& kernel,
                              const OutputStructure& b_spec, double lambda, const GroundLoss& loss,
                              const IterativeOptions& opts = {},
                              const std::optional<Quadrature>& full_quadrature = std::nullopt);

}  // namespace kpl
