#pragma once

#include "kpl/functional.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kpl {

enum class DictionaryFamily { fourier, wavelet, rff, learned, custom };

std::string to_string(DictionaryFamily f);
DictionaryFamily dictionary_family_from_string(const std::string& s);

/// Evaluates all d atoms at one location.
class AtomEvaluator {
 public:
  virtual ~AtomEvaluator() = default;
  [[nodiscard]] virtual Eigen::Index size() const = 0;
  virtual void evaluate(double theta, double* out) const = 0;
};

/// A finite family of functions phi_1..phi_d on [0, 1]. Immutable; copies share
/// the underlying evaluator.
class Dictionary {
 public:
  Dictionary(DictionaryFamily family, std::shared_ptr<const AtomEvaluator> evaluator,
             std::map<std::string, double> parameters = {}, std::optional<std::vector<int>> scale_index = {});

  [[nodiscard]] Eigen::Index size() const { return evaluator_->size(); }
  [[nodiscard]] DictionaryFamily family() const { return family_; }
  [[nodiscard]] const std::map<std::string, double>& parameters() const { return parameters_; }
  [[nodiscard]] const std::optional<std::vector<int>>& scale_index() const { return scale_index_; }

  /// phi(theta) in R^d.
  [[nodiscard]] Eigen::VectorXd evaluate(double theta) const;
  /// Atom matrix A with A(p, l) = phi_l(thetas[p]).
  [[nodiscard]] Eigen::MatrixXd evaluate(const Eigen::VectorXd& thetas) const;

  /// For learned dictionaries: the grid and atom values they interpolate.
  [[nodiscard]] const Eigen::VectorXd* grid() const;
  [[nodiscard]] const Eigen::MatrixXd* grid_atoms() const;

 private:
  DictionaryFamily family_;
  std::shared_ptr<const AtomEvaluator> evaluator_;
  std::map<std::string, double> parameters_;
  std::optional<std::vector<int>> scale_index_;
};

/// {1, sqrt2 cos(2 pi l t), sqrt2 sin(2 pi l t)}_{l=1..F}, ordered 1, cos1, sin1, cos2, ...
Dictionary make_fourier(int frequencies);

/// Daubechies scaling functions at dilation 0 and wavelets at dilations
/// 0..levels, folded onto [0, 1] by symmetric extension and L2-normalized.
/// Scaling atoms have scale index 0, wavelets at dilation j have j + 1.
Dictionary make_wavelet(int vanishing_moments, int levels);

/// d/2 Gaussian random frequencies w ~ N(0, 1/lengthscale^2); atoms
/// sqrt2 cos(w t) for all frequencies followed by sqrt2 sin(w t).
Dictionary make_rff(double lengthscale, int d, std::uint64_t seed);

/// Atoms given by their values on a grid, evaluated by linear interpolation
/// (end values held outside the grid).
Dictionary make_learned(Eigen::VectorXd grid, Eigen::MatrixXd atoms);

/// Atoms from arbitrary callables, optionally tagged with per-atom scales.
Dictionary make_custom(std::vector<std::function<double(double)>> atoms,
                       std::optional<std::vector<int>> scale_index = {});

struct GramMatrix {
  Eigen::MatrixXd matrix;
  Quadrature quadrature;
};

/// (<phi_l, phi_s>_q), symmetrized.
GramMatrix gram(const Dictionary& dict, const Quadrature& q);

/// Pointwise sum_l u_l phi_l at the targets.
SampledFunction apply_phi(const Dictionary& dict, const Eigen::VectorXd& u, const Eigen::VectorXd& targets);

/// (<phi_l, g>_q)_l for g given on q.nodes().
Eigen::VectorXd adjoint_phi(const Dictionary& dict, const SampledFunction& g, const Quadrature& q);
Eigen::VectorXd adjoint_phi(const Dictionary& dict, const Eigen::VectorXd& g_on_nodes, const Quadrature& q);

/// Monte-Carlo estimates nu_il = (1/m_i) sum_p y_ip phi_l(theta_ip), as a d x n matrix.
Eigen::MatrixXd estimate_nu(const Dictionary& dict, const PartialSample& sample);

/// Per-sample estimated Gram matrices (1/m_i) sum_p phi(theta_ip) phi(theta_ip)^T.
std::vector<Eigen::MatrixXd> estimate_gram_per_sample(const Dictionary& dict, const PartialSample& sample);

struct RieszBounds {
  double c_lower;
  double c_upper;
  Eigen::VectorXd u_lower;  ///< unit vector achieving ||Phi u|| = c_lower
  Eigen::VectorXd u_upper;  ///< unit vector achieving ||Phi u|| = c_upper
};

/// Tight empirical Riesz constants (sqrt lambda_min(G), sqrt lambda_max(G)).
RieszBounds riesz_bounds(const Dictionary& dict, const Quadrature& q);

namespace detail {
/// A^T (w .* y).
Eigen::VectorXd weighted_projection(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights,
                                    const Eigen::VectorXd& values);
}  // namespace detail

}  // namespace kpl
