#pragma once

#include "kpl/dictionary.hpp"
#include "kpl/functional.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>

namespace kpl {

/// Scalar input kernel with k(x, x) = 1.
///   gaussian:          exp(-||x0 - x1||^2 / sigma^2)   (Frobenius norm for matrix inputs)
///   laplace:           exp(-||x0 - x1|| / sigma)
///   integral_gaussian: (1/m) sum_p exp(-||x0_p - x1_p||^2 / sigma^2) over the rows of matrix inputs
struct ScalarKernel {
  enum class Variant { gaussian, laplace, integral_gaussian };

  Variant variant = Variant::gaussian;
  double sigma = 1.0;

  static ScalarKernel gaussian(double sigma);
  static ScalarKernel laplace(double sigma);
  static ScalarKernel integral_gaussian(double sigma);
};

std::string to_string(ScalarKernel::Variant v);
ScalarKernel::Variant kernel_variant_from_string(const std::string& s);

double eval_kernel(const ScalarKernel& k, const InputPoint& x0, const InputPoint& x1);

/// K_X = (k(x_i, x_j)), exactly symmetric with unit diagonal.
Eigen::MatrixXd kernel_matrix(const ScalarKernel& k, std::span<const InputPoint> inputs);

/// (k(x, x_i))_i.
Eigen::VectorXd kernel_vector(const ScalarKernel& k, std::span<const InputPoint> inputs, const InputPoint& x);

/// Output structure matrix B of the separable kernel k B.
struct OutputStructure {
  enum class Variant { identity, diagonal_scale };

  Variant variant = Variant::identity;
  double b = 1.0;  ///< geometric rate for diagonal_scale

  static OutputStructure identity() { return {}; }
  static OutputStructure diagonal_scale(double b) { return {Variant::diagonal_scale, b}; }
};

std::string to_string(OutputStructure::Variant v);
OutputStructure::Variant output_structure_from_string(const std::string& s);

/// identity -> I_d; diagonal_scale -> diag(b^-j_l) over the dictionary's atom scales.
Eigen::MatrixXd build_B(const OutputStructure& spec, const Dictionary& dict);

}  // namespace kpl
