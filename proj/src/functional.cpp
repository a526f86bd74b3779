#include "kpl/functional.hpp"

#include "kpl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kpl {

using detail::require;

SampledFunction::SampledFunction(Eigen::VectorXd locations, Eigen::VectorXd values)
    : locations_(std::move(locations)), values_(std::move(values)) {
  require(locations_.size() >= 1, "SampledFunction: needs at least one location");
  require(locations_.size() == values_.size(), "SampledFunction: locations/values length mismatch");
  for (Eigen::Index p = 0; p < locations_.size(); ++p) {
    const double t = locations_[p];
    require(std::isfinite(t) && t >= 0.0 && t <= 1.0, "SampledFunction: location outside [0, 1]");
    if (p > 0) require(t > locations_[p - 1], "SampledFunction: locations must be strictly increasing");
  }
}

double SampledFunction::evaluate_clamped(double theta) const {
  const auto n = locations_.size();
  if (theta <= locations_[0]) return values_[0];
  if (theta >= locations_[n - 1]) return values_[n - 1];
  const double* begin = locations_.data();
  const auto hi = std::upper_bound(begin, begin + n, theta) - begin;
  const auto lo = hi - 1;
  const double t = (theta - locations_[lo]) / (locations_[hi] - locations_[lo]);
  return (1.0 - t) * values_[lo] + t * values_[hi];
}

InputPoint::InputPoint(Eigen::VectorXd v) : kind_(Kind::vector), data_(std::move(v)) {
  require(data_.size() >= 1, "InputPoint: empty vector");
  require(data_.allFinite(), "InputPoint: non-finite entry");
}

InputPoint::InputPoint(Eigen::MatrixXd m) : kind_(Kind::matrix), data_(std::move(m)) {
  require(data_.rows() >= 1 && data_.cols() >= 1, "InputPoint: matrix needs >= 1 row and column");
  require(data_.allFinite(), "InputPoint: non-finite entry");
}

bool InputPoint::same_shape(const InputPoint& other) const {
  return kind_ == other.kind_ && data_.rows() == other.data_.rows() && data_.cols() == other.data_.cols();
}

PartialSample::PartialSample(std::vector<InputPoint> in, std::vector<SampledFunction> out)
    : inputs(std::move(in)), outputs(std::move(out)) {
  validate();
}

void PartialSample::validate() const {
  require(!inputs.empty(), "PartialSample: n must be >= 1");
  require(inputs.size() == outputs.size(), "PartialSample: inputs/outputs length mismatch");
}

PartialSample PartialSample::subset(std::span<const std::size_t> idx) const {
  PartialSample s;
  s.inputs.reserve(idx.size());
  s.outputs.reserve(idx.size());
  for (auto i : idx) {
    s.inputs.push_back(inputs.at(i));
    s.outputs.push_back(outputs.at(i));
  }
  return s;
}

Quadrature::Quadrature(Eigen::VectorXd nodes, Eigen::VectorXd weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  require(nodes_.size() >= 1, "Quadrature: no nodes");
  require(nodes_.size() == weights_.size(), "Quadrature: nodes/weights length mismatch");
  for (Eigen::Index p = 0; p < nodes_.size(); ++p) {
    require(nodes_[p] >= 0.0 && nodes_[p] <= 1.0, "Quadrature: node outside [0, 1]");
    if (p > 0) require(nodes_[p] > nodes_[p - 1], "Quadrature: nodes must be strictly increasing");
    require(weights_[p] > 0.0, "Quadrature: weights must be positive");
  }
  require(std::abs(weights_.sum() - 1.0) <= 1e-12, "Quadrature: weights must sum to 1");
}

Quadrature Quadrature::trapezoidal(Eigen::VectorXd nodes) {
  const auto m = nodes.size();
  require(m >= 1, "Quadrature: no nodes");
  Eigen::VectorXd w(m);
  if (m == 1) {
    w[0] = 1.0;
  } else {
    for (Eigen::Index p = 0; p < m; ++p) {
      const double left = p > 0 ? nodes[p] - nodes[p - 1] : 0.0;
      const double right = p + 1 < m ? nodes[p + 1] - nodes[p] : 0.0;
      w[p] = 0.5 * (left + right);
    }
    w /= w.sum();
  }
  return {std::move(nodes), std::move(w)};
}

Quadrature Quadrature::mean_weights(Eigen::VectorXd nodes) {
  const auto m = nodes.size();
  require(m >= 1, "Quadrature: no nodes");
  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  return {std::move(nodes), std::move(w)};
}

Quadrature Quadrature::uniform(Eigen::Index m) { return trapezoidal(linspace(m)); }

Eigen::VectorXd linspace(Eigen::Index m, double lo, double hi) {
  require(m >= 1, "linspace: m must be >= 1");
  Eigen::VectorXd v(m);
  if (m == 1) {
    v[0] = lo;
    return v;
  }
  for (Eigen::Index p = 0; p < m; ++p) v[p] = lo + (hi - lo) * static_cast<double>(p) / static_cast<double>(m - 1);
  v[m - 1] = hi;
  return v;
}

double inner_product(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const Quadrature& q) {
  require(f.size() == q.size() && g.size() == q.size(), "inner_product: length mismatch with quadrature");
  return (q.weights().array() * f.array() * g.array()).sum();
}

double inner_product(const SampledFunction& f, const SampledFunction& g, const Quadrature& q) {
  require(f.size() == q.size() && g.size() == q.size(), "inner_product: length mismatch with quadrature");
  return inner_product(f.values(), g.values(), q);
}

SampledFunction resample(const SampledFunction& f, const Eigen::VectorXd& targets) {
  const double lo = f.locations()[0];
  const double hi = f.locations()[f.size() - 1];
  Eigen::VectorXd values(targets.size());
  for (Eigen::Index p = 0; p < targets.size(); ++p) {
    const double t = targets[p];
    if (!(t >= lo && t <= hi)) {
      std::ostringstream os;
      os << "resample: target " << t << " outside observed span [" << lo << ", " << hi << "]";
      throw OutOfRange(os.str());
    }
    values[p] = f.evaluate_clamped(t);
  }
  return {targets, std::move(values)};
}

double mse(std::span<const SampledFunction> predictions, std::span<const SampledFunction> observations) {
  require(!observations.empty(), "mse: empty lists");
  require(predictions.size() == observations.size(), "mse: list lengths differ");
  double total = 0.0;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& obs = observations[i];
    const auto& pred = predictions[i];
    double acc = 0.0;
    const bool same_grid = pred.size() == obs.size() && pred.locations() == obs.locations();
    for (Eigen::Index p = 0; p < obs.size(); ++p) {
      const double yhat = same_grid ? pred.values()[p] : pred.evaluate_clamped(obs.locations()[p]);
      const double r = yhat - obs.values()[p];
      acc += r * r;
    }
    total += acc / static_cast<double>(obs.size());
  }
  return total / static_cast<double>(observations.size());
}

double snr(const PartialSample& sample, double sigma) {
  require(sigma > 0.0, "snr: sigma must be > 0");
  sample.validate();
  double total = 0.0;
  for (const auto& y : sample.outputs) total += y.values().cwiseAbs().sum() / static_cast<double>(y.size());
  return total / (sigma * static_cast<double>(sample.size()));
}

SampledFunction rescale_domain(const Eigen::VectorXd& locations, const Eigen::VectorXd& values, double lo,
                               double hi) {
  require(hi > lo, "rescale_domain: empty interval");
  Eigen::VectorXd t = (locations.array() - lo) / (hi - lo);
  // Clip round-off at the interval ends.
  t = t.cwiseMax(0.0).cwiseMin(1.0);
  return {std::move(t), values};
}

}  // namespace kpl
