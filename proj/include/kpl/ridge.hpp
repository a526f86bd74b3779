#pragma once

#include "kpl/dictionary.hpp"
#include "kpl/functional.hpp"
#include "kpl/kernels.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace kpl {

/// Fitted separable-kernel model h = sum_j k(., x_j) B alpha_j; the predicted
/// function at x is Phi B alpha k_x(x), plus an optional additive offset
/// (the training mean when outputs were centered).
struct KplModel {
  Eigen::MatrixXd alpha;  ///< d x n representer coefficients
  std::vector<InputPoint> training_inputs;
  Dictionary dictionary;
  ScalarKernel kernel;
  OutputStructure b_spec;
  Eigen::MatrixXd B;
  double lambda = 0.0;
  std::optional<SampledFunction> output_offset;

  /// Throws if alpha does not match (d, n) or holds non-finite entries.
  void validate() const;
};

/// The linear system (K_X (x) M + n lambda I) vec(alpha) = vec(rhs) with M = G B,
/// equivalently M alpha K_X + n lambda alpha = rhs.
struct StructuredSystem {
  Eigen::MatrixXd K;    ///< n x n kernel matrix
  Eigen::MatrixXd G;    ///< d x d Gram matrix of the dictionary
  Eigen::MatrixXd B;    ///< d x d symmetric positive-definite output structure
  Eigen::MatrixXd rhs;  ///< d x n
  double n_lambda = 0.0;

  [[nodiscard]] Eigen::MatrixXd M() const { return G * B; }
};

/// Joint eigenbasis of K_X and M = G B, built once and reused for any
/// right-hand side and regularization. M is diagonalized through the
/// symmetric similarity B^1/2 G B^1/2.
class StructuredEigensystem {
 public:
  StructuredEigensystem(const Eigen::MatrixXd& K, const Eigen::MatrixXd& G, const Eigen::MatrixXd& B);

  /// rhs expressed in the eigenbasis: U^T B^1/2 rhs W.
  [[nodiscard]] Eigen::MatrixXd transform(const Eigen::MatrixXd& rhs) const;
  /// alpha from a transformed rhs: B^-1/2 U (rhs_bar ./ (lambda_M lambda_K^T + n_lambda)) W^T.
  [[nodiscard]] Eigen::MatrixXd solve_transformed(const Eigen::MatrixXd& rhs_bar, double n_lambda) const;
  [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs, double n_lambda) const;

  [[nodiscard]] const Eigen::VectorXd& kernel_eigenvalues() const { return sigma_; }
  [[nodiscard]] const Eigen::VectorXd& output_eigenvalues() const { return mu_; }

 private:
  Eigen::MatrixXd w_;  // eigenvectors of K
  Eigen::VectorXd sigma_;
  Eigen::MatrixXd left_;      // B^-1/2 U
  Eigen::MatrixXd left_inv_;  // U^T B^1/2
  Eigen::VectorXd mu_;
};

/// Solves M alpha K + n_lambda alpha = rhs in the joint eigenbasis.
Eigen::MatrixXd solve_stein(const StructuredSystem& sys);

/// One decomposition, one solve per lambda (n_lambda = n * lambda, n = K.rows()).
std::vector<Eigen::MatrixXd> solve_multi_lambda(const Eigen::MatrixXd& K, const Eigen::MatrixXd& G,
                                                const Eigen::MatrixXd& B, const Eigen::MatrixXd& rhs,
                                                std::span<const double> lambdas);

/// Wall-clock split of a fit: pre-processing (kernel matrix, Gram, projections)
/// versus the linear solve itself.
struct FitTimings {
  double preprocess_seconds = 0.0;
  double fit_seconds = 0.0;
};

/// Fully observed outputs, all given on q.nodes(): rhs = adjoint_phi, G = gram(dict, q).
KplModel fit_ridge_full(const PartialSample& sample, const Dictionary& dict, const ScalarKernel& kernel,
                        const OutputStructure& b_spec, const Quadrature& q, double lambda,
                        FitTimings* timings = nullptr);

/// Plug-in estimator: rhs = estimate_nu, G = gram(dict, gram_quadrature).
KplModel fit_ridge_plugin(const PartialSample& sample, const Dictionary& dict, const ScalarKernel& kernel,
                          const OutputStructure& b_spec, const Quadrature& gram_quadrature, double lambda,
                          FitTimings* timings = nullptr);

/// Plug-in estimator along a lambda path, sharing one decomposition.
std::vector<KplModel> fit_ridge_plugin_path(const PartialSample& sample, const Dictionary& dict,
                                            const ScalarKernel& kernel, const OutputStructure& b_spec,
                                            const Quadrature& gram_quadrature, std::span<const double> lambdas);

/// Largest d n handled by the dense per-sample-Gram solver.
inline constexpr Eigen::Index kDensePerSampleLimit = 5000;

/// Dense solve of (blockdiag(G_i) (K_X (x) B) + n lambda I) vec(alpha) = vec(nu)
/// with per-sample estimated Gram blocks G_i.
KplModel fit_ridge_persample_gram(const PartialSample& sample, const Dictionary& dict, const ScalarKernel& kernel,
                                  const OutputStructure& b_spec, double lambda, FitTimings* timings = nullptr);

/// Coefficients B alpha k_x(x) of the prediction in the dictionary.
Eigen::VectorXd predict_coefficients(const KplModel& model, const InputPoint& x);

/// Phi B alpha k_x(x) evaluated at the targets.
SampledFunction predict(const KplModel& model, const InputPoint& x, const Eigen::VectorXd& targets);

}  // namespace kpl
