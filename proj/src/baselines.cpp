#include "kpl/baselines.hpp"

#include "kpl/errors.hpp"

#include <cmath>

namespace kpl {

using detail::require;

void KeModel::validate() const {
  require(bandwidth > 0.0 && !std::isnan(bandwidth), "KE: bandwidth must be > 0");
  require(!training_inputs.empty(), "KE: model has no training pairs");
  require(training_inputs.size() == training_outputs.size(), "KE: inputs/outputs length mismatch");
}

KeModel fit_ke(const PartialSample& sample, double bandwidth) {
  sample.validate();
  KeModel m{bandwidth, sample.inputs, sample.outputs};
  m.validate();
  return m;
}

double ke_semi_metric(const InputPoint& a, const InputPoint& b) {
  require(a.same_shape(b), "KE: input shapes differ");
  const double sq = (a.data() - b.data()).squaredNorm();
  if (a.is_matrix()) return std::sqrt(sq / static_cast<double>(a.rows()));
  return std::sqrt(sq);
}

SampledFunction ke_predict(const KeModel& model, const InputPoint& x, const Eigen::VectorXd& targets) {
  model.validate();
  const std::size_t n = model.training_inputs.size();
  Eigen::VectorXd dist(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) dist[static_cast<Eigen::Index>(i)] = ke_semi_metric(x, model.training_inputs[i]);

  Eigen::VectorXd w = dist.unaryExpr([&](double d) {
    const double u = d / model.bandwidth;
    return std::exp(-u * u);
  });
  double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    Eigen::Index nearest = 0;
    dist.minCoeff(&nearest);
    w.setZero();
    w[nearest] = 1.0;
    total = 1.0;
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(targets.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w[static_cast<Eigen::Index>(i)];
    if (wi == 0.0) continue;
    const auto& f = model.training_outputs[i];
    for (Eigen::Index p = 0; p < targets.size(); ++p) out[p] += wi * f.evaluate_clamped(targets[p]);
  }
  return {targets, out / total};
}

}  // namespace kpl
