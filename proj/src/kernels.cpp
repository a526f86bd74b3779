#include "kpl/kernels.hpp"

#include "kpl/errors.hpp"

#include <cmath>

namespace kpl {

using detail::require;

ScalarKernel ScalarKernel::gaussian(double sigma) {
  require(sigma > 0.0, "gaussian kernel: sigma must be > 0");
  return {Variant::gaussian, sigma};
}

ScalarKernel ScalarKernel::laplace(double sigma) {
  require(sigma > 0.0, "laplace kernel: sigma must be > 0");
  return {Variant::laplace, sigma};
}

ScalarKernel ScalarKernel::integral_gaussian(double sigma) {
  require(sigma > 0.0, "integral_gaussian kernel: sigma must be > 0");
  return {Variant::integral_gaussian, sigma};
}

std::string to_string(ScalarKernel::Variant v) {
  switch (v) {
    case ScalarKernel::Variant::gaussian: return "gaussian";
    case ScalarKernel::Variant::laplace: return "laplace";
    case ScalarKernel::Variant::integral_gaussian: return "integral_gaussian";
  }
  return "unknown";
}

ScalarKernel::Variant kernel_variant_from_string(const std::string& s) {
  if (s == "gaussian") return ScalarKernel::Variant::gaussian;
  if (s == "laplace") return ScalarKernel::Variant::laplace;
  if (s == "integral_gaussian") return ScalarKernel::Variant::integral_gaussian;
  throw InvalidArgument("unknown kernel variant '" + s + "'");
}

double eval_kernel(const ScalarKernel& k, const InputPoint& x0, const InputPoint& x1) {
  require(k.sigma > 0.0, "eval_kernel: sigma must be > 0");
  require(x0.same_shape(x1), "eval_kernel: input shape mismatch");
  const double s2 = k.sigma * k.sigma;
  switch (k.variant) {
    case ScalarKernel::Variant::gaussian:
      return std::exp(-(x0.data() - x1.data()).squaredNorm() / s2);
    case ScalarKernel::Variant::laplace:
      return std::exp(-(x0.data() - x1.data()).norm() / k.sigma);
    case ScalarKernel::Variant::integral_gaussian: {
      require(x0.is_matrix(), "integral_gaussian kernel requires matrix inputs");
      const Eigen::VectorXd sq = (x0.data() - x1.data()).rowwise().squaredNorm();
      return (-sq.array() / s2).exp().mean();
    }
  }
  throw InvalidArgument("eval_kernel: unknown variant");
}

Eigen::MatrixXd kernel_matrix(const ScalarKernel& k, std::span<const InputPoint> inputs) {
  require(!inputs.empty(), "kernel_matrix: empty input list");
  const auto n = static_cast<Eigen::Index>(inputs.size());
  for (const auto& x : inputs) require(x.same_shape(inputs.front()), "kernel_matrix: heterogeneous input shapes");
  Eigen::MatrixXd km(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    km(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      km(i, j) = eval_kernel(k, inputs[static_cast<std::size_t>(i)], inputs[static_cast<std::size_t>(j)]);
      km(j, i) = km(i, j);
    }
  }
  return km;
}

Eigen::VectorXd kernel_vector(const ScalarKernel& k, std::span<const InputPoint> inputs, const InputPoint& x) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) v[static_cast<Eigen::Index>(i)] = eval_kernel(k, x, inputs[i]);
  return v;
}

std::string to_string(OutputStructure::Variant v) {
  return v == OutputStructure::Variant::identity ? "identity" : "diagonal_scale";
}

OutputStructure::Variant output_structure_from_string(const std::string& s) {
  if (s == "identity") return OutputStructure::Variant::identity;
  if (s == "diagonal_scale") return OutputStructure::Variant::diagonal_scale;
  throw InvalidArgument("unknown B variant '" + s + "'");
}

Eigen::MatrixXd build_B(const OutputStructure& spec, const Dictionary& dict) {
  const auto d = dict.size();
  if (spec.variant == OutputStructure::Variant::identity) return Eigen::MatrixXd::Identity(d, d);
  require(spec.b >= 1.0 && std::isfinite(spec.b), "build_B: diagonal_scale needs b >= 1");
  require(dict.scale_index().has_value(), "build_B: diagonal_scale needs a dictionary with scale_index");
  const auto& scales = *dict.scale_index();
  Eigen::VectorXd diag(d);
  for (Eigen::Index l = 0; l < d; ++l) diag[l] = std::pow(spec.b, -static_cast<double>(scales[static_cast<std::size_t>(l)]));
  return diag.asDiagonal();
}

}  // namespace kpl
