#include "kpl/ridge.hpp"

#include "kpl/errors.hpp"

#include <chrono>
#include <cmath>

namespace kpl {

using detail::require;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Relative threshold under which kernel-matrix eigenvalues are treated as round-off.
constexpr double kEigenClamp = 1e-12;

Eigen::MatrixXd outputs_on_nodes(const PartialSample& sample, const Quadrature& q) {
  Eigen::MatrixXd y(q.size(), static_cast<Eigen::Index>(sample.size()));
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto& f = sample.outputs[i];
    require(f.size() == q.size() && f.locations() == q.nodes(),
            "fit_ridge_full: output " + std::to_string(i) + " is not observed on the quadrature nodes");
    y.col(static_cast<Eigen::Index>(i)) = f.values();
  }
  return y;
}

KplModel make_model(Eigen::MatrixXd alpha, const PartialSample& sample, const Dictionary& dict,
                    const ScalarKernel& kernel, const OutputStructure& b_spec, Eigen::MatrixXd B, double lambda) {
  KplModel m{std::move(alpha), sample.inputs, dict, kernel, b_spec, std::move(B), lambda, std::nullopt};
  m.validate();
  return m;
}

}  // namespace

void KplModel::validate() const {
  require(alpha.rows() == dictionary.size(), "KplModel: alpha rows != d");
  require(alpha.cols() == static_cast<Eigen::Index>(training_inputs.size()), "KplModel: alpha cols != n");
  require(B.rows() == dictionary.size() && B.cols() == dictionary.size(), "KplModel: B is not d x d");
  if (!alpha.allFinite()) throw NumericError("KplModel: non-finite representer coefficients");
}

StructuredEigensystem::StructuredEigensystem(const Eigen::MatrixXd& K, const Eigen::MatrixXd& G,
                                             const Eigen::MatrixXd& B) {
  require(K.rows() == K.cols() && K.rows() >= 1, "StructuredEigensystem: K must be square");
  require(G.rows() == G.cols() && B.rows() == B.cols() && G.rows() == B.rows(), "StructuredEigensystem: G/B shape");
  require(K.allFinite() && G.allFinite() && B.allFinite(), "StructuredEigensystem: non-finite input");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ks(0.5 * (K + K.transpose()));
  if (ks.info() != Eigen::Success) throw NumericError("eigendecomposition of K_X failed");
  sigma_ = ks.eigenvalues();
  w_ = ks.eigenvectors();
  const double smax = std::max(sigma_.cwiseAbs().maxCoeff(), 0.0);
  for (Eigen::Index j = 0; j < sigma_.size(); ++j)
    if (sigma_[j] < kEigenClamp * smax) sigma_[j] = 0.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> bs(0.5 * (B + B.transpose()));
  if (bs.info() != Eigen::Success) throw NumericError("eigendecomposition of B failed");
  require(bs.eigenvalues().minCoeff() > 0.0, "StructuredEigensystem: B must be positive definite");
  const Eigen::VectorXd bsqrt = bs.eigenvalues().cwiseSqrt();
  const Eigen::MatrixXd half = bs.eigenvectors() * bsqrt.asDiagonal() * bs.eigenvectors().transpose();
  const Eigen::MatrixXd half_inv = bs.eigenvectors() * bsqrt.cwiseInverse().asDiagonal() * bs.eigenvectors().transpose();

  Eigen::MatrixXd c = half * G * half;
  c = 0.5 * (c + c.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> cs(c);
  if (cs.info() != Eigen::Success) throw NumericError("eigendecomposition of B^1/2 G B^1/2 failed");
  mu_ = cs.eigenvalues().cwiseMax(0.0);
  left_ = half_inv * cs.eigenvectors();
  left_inv_ = cs.eigenvectors().transpose() * half;
}

Eigen::MatrixXd StructuredEigensystem::transform(const Eigen::MatrixXd& rhs) const {
  require(rhs.rows() == left_.rows() && rhs.cols() == w_.rows(), "StructuredEigensystem: rhs must be d x n");
  return left_inv_ * rhs * w_;
}

Eigen::MatrixXd StructuredEigensystem::solve_transformed(const Eigen::MatrixXd& rhs_bar, double n_lambda) const {
  require(n_lambda > 0.0 && std::isfinite(n_lambda), "solve: lambda must be > 0");
  const Eigen::ArrayXXd denom = (mu_ * sigma_.transpose()).array() + n_lambda;
  const Eigen::MatrixXd alpha_bar = (rhs_bar.array() / denom).matrix();
  return left_ * alpha_bar * w_.transpose();
}

Eigen::MatrixXd StructuredEigensystem::solve(const Eigen::MatrixXd& rhs, double n_lambda) const {
  return solve_transformed(transform(rhs), n_lambda);
}

Eigen::MatrixXd solve_stein(const StructuredSystem& sys) {
  require(sys.n_lambda > 0.0 && std::isfinite(sys.n_lambda), "solve_stein: lambda must be > 0");
  require(sys.rhs.allFinite(), "solve_stein: non-finite right-hand side");
  return StructuredEigensystem(sys.K, sys.G, sys.B).solve(sys.rhs, sys.n_lambda);
}

std::vector<Eigen::MatrixXd> solve_multi_lambda(const Eigen::MatrixXd& K, const Eigen::MatrixXd& G,
                                                const Eigen::MatrixXd& B, const Eigen::MatrixXd& rhs,
                                                std::span<const double> lambdas) {
  require(!lambdas.empty(), "solve_multi_lambda: empty lambda list");
  for (double l : lambdas) require(l > 0.0 && std::isfinite(l), "solve_multi_lambda: lambdas must be > 0");
  require(rhs.allFinite(), "solve_multi_lambda: non-finite right-hand side");
  const StructuredEigensystem es(K, G, B);
  const Eigen::MatrixXd rhs_bar = es.transform(rhs);
  const auto n = static_cast<double>(K.rows());
  std::vector<Eigen::MatrixXd> out;
  out.reserve(lambdas.size());
  for (double l : lambdas) out.push_back(es.solve_transformed(rhs_bar, n * l));
  return out;
}

KplModel fit_ridge_full(const PartialSample& sample, const Dictionary& dict, const ScalarKernel& kernel,
                        const OutputStructure& b_spec, const Quadrature& q, double lambda, FitTimings* timings) {
  require(lambda > 0.0, "fit_ridge_full: lambda must be > 0");
  sample.validate();
  const auto t0 = Clock::now();
  const Eigen::MatrixXd y = outputs_on_nodes(sample, q);
  const Eigen::MatrixXd atoms = dict.evaluate(q.nodes());
  Eigen::MatrixXd nu(dict.size(), y.cols());
  for (Eigen::Index i = 0; i < y.cols(); ++i) nu.col(i) = detail::weighted_projection(atoms, q.weights(), y.col(i));
  const Eigen::MatrixXd G = gram(dict, q).matrix;
  Eigen::MatrixXd B = build_B(b_spec, dict);
  const Eigen::MatrixXd K = kernel_matrix(kernel, sample.inputs);
  const auto t1 = Clock::now();
  const auto n = static_cast<double>(sample.size());
  Eigen::MatrixXd alpha = solve_stein({K, G, B, nu, n * lambda});
  if (timings) {
    timings->preprocess_seconds = std::chrono::duration<double>(t1 - t0).count();
    timings->fit_seconds = seconds_since(t1);
  }
  return make_model(std::move(alpha), sample, dict, kernel, b_spec, std::move(B), lambda);
}

KplModel fit_ridge_plugin(const PartialSample& sample, const Dictionary& dict, const ScalarKernel& kernel,
                          const OutputStructure& b_spec, const Quadrature& gram_quadrature, double lambda,
                          FitTimings* timings) {
  require(lambda > 0.0, "fit_ridge_plugin: lambda must be > 0");
  sample.validate();
  const auto t0 = Clock::now();
  const Eigen::MatrixXd nu = estimate_nu(dict, sample);
  const Eigen::MatrixXd G = gram(dict, gram_quadrature).matrix;
  Eigen::MatrixXd B = build_B(b_spec, dict);
  const Eigen::MatrixXd K = kernel_matrix(kernel, sample.inputs);
  const auto t1 = Clock::now();
  const auto n = static_cast<double>(sample.size());
  Eigen::MatrixXd alpha = solve_stein({K, G, B, nu, n * lambda});
  if (timings) {
    timings->preprocess_seconds = std::chrono::duration<double>(t1 - t0).count();
    timings->fit_seconds = seconds_since(t1);
  }
  return make_model(std::move(alpha), sample, dict, kernel, b_spec, std::move(B), lambda);
}

std::vector<KplModel> fit_ridge_plugin_path(const PartialSample& sample, const Dictionary& dict,
                                            const ScalarKernel& kernel, const OutputStructure& b_spec,
                                            const Quadrature& gram_quadrature, std::span<const double> lambdas) {
  sample.validate();
  const Eigen::MatrixXd nu = estimate_nu(dict, sample);
  const Eigen::MatrixXd G = gram(dict, gram_quadrature).matrix;
  const Eigen::MatrixXd B = build_B(b_spec, dict);
  const Eigen::MatrixXd K = kernel_matrix(kernel, sample.inputs);
  auto alphas = solve_multi_lambda(K, G, B, nu, lambdas);
  std::vector<KplModel> models;
  models.reserve(alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i)
    models.push_back(make_model(std::move(alphas[i]), sample, dict, kernel, b_spec, B, lambdas[i]));
  return models;
}

KplModel fit_ridge_persample_gram(const PartialSample& sample, const Dictionary& dict, const ScalarKernel& kernel,
                                  const OutputStructure& b_spec, double lambda, FitTimings* timings) {
  require(lambda > 0.0, "fit_ridge_persample_gram: lambda must be > 0");
  sample.validate();
  const auto d = dict.size();
  const auto n = static_cast<Eigen::Index>(sample.size());
  if (d * n > kDensePerSampleLimit)
    throw CapacityError("fit_ridge_persample_gram: d*n = " + std::to_string(d * n) + " exceeds the dense limit " +
                        std::to_string(kDensePerSampleLimit));
  const auto t0 = Clock::now();
  const Eigen::MatrixXd nu = estimate_nu(dict, sample);
  const auto blocks = estimate_gram_per_sample(dict, sample);
  Eigen::MatrixXd B = build_B(b_spec, dict);
  const Eigen::MatrixXd K = kernel_matrix(kernel, sample.inputs);
  const auto t1 = Clock::now();

  // Row block i, column block j: K_ij G_i B; column-major vec(alpha).
  Eigen::MatrixXd a(d * n, d * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd gb = blocks[static_cast<std::size_t>(i)] * B;
    for (Eigen::Index j = 0; j < n; ++j) a.block(i * d, j * d, d, d) = K(i, j) * gb;
  }
  a.diagonal().array() += static_cast<double>(n) * lambda;
  const Eigen::VectorXd rhs = nu.reshaped();
  const Eigen::VectorXd sol = a.partialPivLu().solve(rhs);
  Eigen::MatrixXd alpha = sol.reshaped(d, n);
  if (timings) {
    timings->preprocess_seconds = std::chrono::duration<double>(t1 - t0).count();
    timings->fit_seconds = seconds_since(t1);
  }
  return make_model(std::move(alpha), sample, dict, kernel, b_spec, std::move(B), lambda);
}

Eigen::VectorXd predict_coefficients(const KplModel& model, const InputPoint& x) {
  require(!model.training_inputs.empty(), "predict: model has no training inputs");
  require(x.same_shape(model.training_inputs.front()), "predict: input shape mismatch with training inputs");
  const Eigen::VectorXd kx = kernel_vector(model.kernel, model.training_inputs, x);
  return model.B * (model.alpha * kx);
}

SampledFunction predict(const KplModel& model, const InputPoint& x, const Eigen::VectorXd& targets) {
  auto f = apply_phi(model.dictionary, predict_coefficients(model, x), targets);
  if (!model.output_offset) return f;
  Eigen::VectorXd v = f.values();
  for (Eigen::Index p = 0; p < targets.size(); ++p) v[p] += model.output_offset->evaluate_clamped(targets[p]);
  return {targets, std::move(v)};
}

}  // namespace kpl
