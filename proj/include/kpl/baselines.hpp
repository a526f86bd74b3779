#pragma once

#include "kpl/functional.hpp"

#include <Eigen/Dense>

#include <vector>

namespace kpl {

/// Functional Nadaraya-Watson estimator with Gaussian window exp(-u^2) on
/// S(x, x_i) / bandwidth. S is the Euclidean distance for vector inputs and the
/// L2 distance sqrt((1/m) sum_p ||x_p - x'_p||^2) over the rows of matrix inputs.
struct KeModel {
  double bandwidth = 1.0;
  std::vector<InputPoint> training_inputs;
  std::vector<SampledFunction> training_outputs;

  void validate() const;
};

KeModel fit_ke(const PartialSample& sample, double bandwidth);

double ke_semi_metric(const InputPoint& a, const InputPoint& b);

/// Weighted average of the training outputs (interpolated onto `targets`, end
/// values held). If every weight underflows, the output of the nearest
/// training input (lowest index on ties) is returned.
SampledFunction ke_predict(const KeModel& model, const InputPoint& x, const Eigen::VectorXd& targets);

}  // namespace kpl
