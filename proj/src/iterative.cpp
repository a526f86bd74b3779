#include "kpl/iterative.hpp"

#include "kpl/errors.hpp"
#include "kpl/log.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

namespace kpl {

using detail::require;

GroundLoss GroundLoss::logcosh(double gamma) {
  require(gamma > 0.0 && std::isfinite(gamma), "logcosh loss: gamma must be > 0");
  return {Variant::logcosh, gamma};
}

double GroundLoss::value(double a, double b) const {
  const double r = a - b;
  if (variant == Variant::square) return r * r;
  const double z = std::abs(gamma * r);
  return (z + std::log1p(std::exp(-2.0 * z)) - std::numbers::ln2) / gamma;
}

double GroundLoss::deriv_second(double a, double b) const {
  if (variant == Variant::square) return 2.0 * (b - a);
  return std::tanh(gamma * (b - a));
}

std::string to_string(GroundLoss::Variant v) { return v == GroundLoss::Variant::square ? "square" : "logcosh"; }

ObservationView ObservationView::full(const PartialSample& sample, const Dictionary& dict, const Quadrature& q) {
  sample.validate();
  ObservationView v;
  v.shared_ = true;
  v.n_ = static_cast<Eigen::Index>(sample.size());
  v.d_ = dict.size();
  v.atoms_ = dict.evaluate(q.nodes());
  v.weights_ = q.weights();
  v.values_.resize(q.size(), v.n_);
  for (Eigen::Index i = 0; i < v.n_; ++i) {
    const auto& f = sample.outputs[static_cast<std::size_t>(i)];
    require(f.size() == q.size() && f.locations() == q.nodes(),
            "ObservationView::full: output " + std::to_string(i) + " is not on the quadrature nodes");
    v.values_.col(i) = f.values();
  }
  return v;
}

ObservationView ObservationView::partial(const PartialSample& sample, const Dictionary& dict) {
  sample.validate();
  ObservationView v;
  v.n_ = static_cast<Eigen::Index>(sample.size());
  v.d_ = dict.size();
  for (const auto& f : sample.outputs) {
    require(f.size() >= 1, "ObservationView::partial: empty output function");
    v.sample_atoms_.push_back(dict.evaluate(f.locations()));
    v.sample_weights_.push_back(Eigen::VectorXd::Constant(f.size(), 1.0 / static_cast<double>(f.size())));
    v.sample_values_.push_back(f.values());
  }
  return v;
}

double ObservationView::loss(const GroundLoss& l, const Eigen::MatrixXd& coeffs, Eigen::MatrixXd* grad_columns) const {
  require(coeffs.rows() == d_ && coeffs.cols() == n_, "ObservationView::loss: coefficient shape");
  double total = 0.0;
  if (grad_columns) grad_columns->resize(d_, n_);
  if (shared_) {
    const Eigen::MatrixXd pred = atoms_ * coeffs;  // m x n
    Eigen::MatrixXd deriv(pred.rows(), pred.cols());
    for (Eigen::Index i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (Eigen::Index p = 0; p < pred.rows(); ++p) {
        const double a = values_(p, i);
        const double b = pred(p, i);
        acc += weights_[p] * l.value(a, b);
        deriv(p, i) = weights_[p] * l.deriv_second(a, b);
      }
      total += acc;
    }
    if (grad_columns) grad_columns->noalias() = atoms_.transpose() * deriv;
  } else {
    for (Eigen::Index i = 0; i < n_; ++i) {
      const auto& a_mat = sample_atoms_[static_cast<std::size_t>(i)];
      const auto& w = sample_weights_[static_cast<std::size_t>(i)];
      const auto& y = sample_values_[static_cast<std::size_t>(i)];
      const Eigen::VectorXd pred = a_mat * coeffs.col(i);
      Eigen::VectorXd deriv(pred.size());
      double acc = 0.0;
      for (Eigen::Index p = 0; p < pred.size(); ++p) {
        acc += w[p] * l.value(y[p], pred[p]);
        deriv[p] = w[p] * l.deriv_second(y[p], pred[p]);
      }
      total += acc;
      if (grad_columns) grad_columns->col(i).noalias() = a_mat.transpose() * deriv;
    }
  }
  return total / static_cast<double>(n_);
}

ObjectiveState make_objective(const PartialSample& sample, const Dictionary& dict, const ScalarKernel& kernel,
                              const OutputStructure& b_spec, double lambda, const GroundLoss& loss,
                              const std::optional<Quadrature>& full_quadrature) {
  require(lambda > 0.0, "objective: lambda must be > 0");
  auto view = full_quadrature ? ObservationView::full(sample, dict, *full_quadrature)
                              : ObservationView::partial(sample, dict);
  return {std::move(view), kernel_matrix(kernel, sample.inputs), build_B(b_spec, dict), lambda, loss};
}

double objective_and_gradient(const ObjectiveState& state, const Eigen::MatrixXd& alpha, Eigen::MatrixXd& grad) {
  if (!alpha.allFinite()) throw InvalidArgument("objective: non-finite alpha");
  const Eigen::MatrixXd b_alpha = state.B * alpha;
  const Eigen::MatrixXd coeffs = b_alpha * state.K;  // column i: B alpha k_x(x_i)
  Eigen::MatrixXd cols;
  const double data_term = state.view.loss(state.loss, coeffs, &cols);
  const double penalty = state.lambda * alpha.cwiseProduct(coeffs).sum();
  const auto n = static_cast<double>(state.view.samples());
  grad.noalias() = state.B * ((cols / n + 2.0 * state.lambda * alpha) * state.K);
  const double value = data_term + penalty;
  if (!std::isfinite(value) || !grad.allFinite()) {
    std::ostringstream os;
    os << "objective: non-finite value (data term " << data_term << ", penalty " << penalty
       << ", max |alpha| " << alpha.cwiseAbs().maxCoeff() << ")";
    throw NumericError(os.str());
  }
  return value;
}

double objective(const ObjectiveState& state, const Eigen::MatrixXd& alpha) {
  if (!alpha.allFinite()) throw InvalidArgument("objective: non-finite alpha");
  const Eigen::MatrixXd coeffs = state.B * alpha * state.K;
  return state.view.loss(state.loss, coeffs, nullptr) + state.lambda * alpha.cwiseProduct(coeffs).sum();
}

Eigen::MatrixXd gradient(const ObjectiveState& state, const Eigen::MatrixXd& alpha) {
  Eigen::MatrixXd g;
  objective_and_gradient(state, alpha, g);
  return g;
}

double objective_full(const ObjectiveState& state, const Eigen::MatrixXd& alpha) {
  require(state.view.is_full(), "objective_full: state holds a partial-observation view");
  return objective(state, alpha);
}

double objective_partial(const ObjectiveState& state, const Eigen::MatrixXd& alpha) {
  require(!state.view.is_full(), "objective_partial: state holds a full-observation view");
  return objective(state, alpha);
}

Eigen::MatrixXd gradient_full(const ObjectiveState& state, const Eigen::MatrixXd& alpha) {
  require(state.view.is_full(), "gradient_full: state holds a partial-observation view");
  return gradient(state, alpha);
}

Eigen::MatrixXd gradient_partial(const ObjectiveState& state, const Eigen::MatrixXd& alpha) {
  require(!state.view.is_full(), "gradient_partial: state holds a full-observation view");
  return gradient(state, alpha);
}

IterativeResult fit_iterative(const PartialSample& sample, const Dictionary& dict, const ScalarKernel& kernel,
                              const OutputStructure& b_spec, double lambda, const GroundLoss& loss,
                              const IterativeOptions& opts, const std::optional<Quadrature>& full_quadrature) {
  require(lambda > 0.0, "fit_iterative: lambda must be > 0");
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const ObjectiveState state = make_objective(sample, dict, kernel, b_spec, lambda, loss, full_quadrature);
  const auto t1 = Clock::now();
  const auto d = dict.size();
  const auto n = static_cast<Eigen::Index>(sample.size());

  Eigen::MatrixXd grad_mat(d, n);
  ValueAndGradient fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const Eigen::Map<const Eigen::MatrixXd> alpha(x.data(), d, n);
    const double v = objective_and_gradient(state, alpha, grad_mat);
    g = grad_mat.reshaped();
    return v;
  };
  LbfgsOptions lo;
  lo.grad_tol = opts.tol;
  lo.max_iter = opts.max_iter;
  lo.history = opts.history;
  auto res = minimize_lbfgs(fg, Eigen::VectorXd::Zero(d * n), lo);

  if (res.status != LbfgsStatus::converged) {
    std::ostringstream os;
    os << "fit_iterative: " << to_string(res.status) << " after " << res.iterations
       << " iterations (||grad||_inf = " << res.grad_inf << ")";
    warn(os.str());
  }
  Eigen::MatrixXd alpha = res.x.reshaped(d, n);
  KplModel model{std::move(alpha), sample.inputs, dict, kernel, b_spec, state.B, lambda, std::nullopt};
  model.validate();
  IterativeResult out{std::move(model), res.status, res.iterations, res.value, res.grad_inf, std::move(res.trace), {}};
  out.timings.preprocess_seconds = std::chrono::duration<double>(t1 - t0).count();
  out.timings.fit_seconds = std::chrono::duration<double>(Clock::now() - t1).count();
  return out;
}

}  // namespace kpl
