#pragma once

#include "kpl/dictionary.hpp"
#include "kpl/functional.hpp"
#include "kpl/log.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace kpl::test {

inline double rel_fro(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double den = b.norm();
  return den > 0.0 ? (a - b).norm() / den : a.norm();
}

inline Eigen::VectorXd uniform_vector(Eigen::Index n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

/// Sorted distinct uniform locations in (0, 1).
inline Eigen::VectorXd random_locations(Eigen::Index m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> t(static_cast<std::size_t>(m));
  for (auto& x : t) x = u(rng);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return Eigen::Map<Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
}

inline std::vector<InputPoint> random_vector_inputs(std::size_t n, Eigen::Index dim, std::mt19937_64& rng) {
  std::vector<InputPoint> x;
  for (std::size_t i = 0; i < n; ++i) x.emplace_back(uniform_vector(dim, rng));
  return x;
}

/// Outputs sampled from a smooth random function at `m` random locations each.
inline PartialSample random_partial_sample(std::size_t n, Eigen::Index dim, Eigen::Index m, std::mt19937_64& rng) {
  std::vector<InputPoint> x = random_vector_inputs(n, dim, rng);
  std::vector<SampledFunction> y;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd t = random_locations(m, rng);
    const Eigen::VectorXd c = uniform_vector(3, rng);
    Eigen::VectorXd v(t.size());
    for (Eigen::Index p = 0; p < t.size(); ++p)
      v[p] = c[0] + c[1] * std::sin(2 * M_PI * t[p]) + c[2] * std::cos(4 * M_PI * t[p]) + 0.1 * x[i].data()(0);
    y.emplace_back(t, v);
  }
  return {std::move(x), std::move(y)};
}

/// Same construction with every output on the given grid.
inline PartialSample random_grid_sample(std::size_t n, Eigen::Index dim, const Eigen::VectorXd& grid,
                                        std::mt19937_64& rng) {
  std::vector<InputPoint> x = random_vector_inputs(n, dim, rng);
  std::vector<SampledFunction> y;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd c = uniform_vector(3, rng);
    Eigen::VectorXd v(grid.size());
    for (Eigen::Index p = 0; p < grid.size(); ++p)
      v[p] = c[0] + c[1] * std::sin(2 * M_PI * grid[p]) + c[2] * std::cos(6 * M_PI * grid[p]);
    y.emplace_back(grid, v);
  }
  return {std::move(x), std::move(y)};
}

/// Dense oracle: (K (x) M + c I) vec(alpha) = vec(rhs), column-major vec.
inline Eigen::MatrixXd dense_kronecker_solve(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M,
                                             const Eigen::MatrixXd& rhs, double c) {
  const Eigen::Index n = K.rows(), d = M.rows();
  Eigen::MatrixXd A(d * n, d * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) A.block(i * d, j * d, d, d) = K(i, j) * M;
  A.diagonal().array() += c;
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), d * n);
  const Eigen::VectorXd x = A.fullPivLu().solve(b);
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), d, n);
}

/// Silences warnings for the lifetime of the guard and counts them.
class WarningCapture {
 public:
  WarningCapture() {
    set_warning_handler([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarningCapture() { set_warning_handler(nullptr); }
  std::vector<std::string> messages;
};

}  // namespace kpl::test

namespace kpl::test {

/// d random smooth atoms on a 401-point grid, each of unit trapezoidal norm.
inline Dictionary random_normalized_dictionary(Eigen::Index d, std::mt19937_64& rng) {
  const Quadrature q = Quadrature::uniform(401);
  Eigen::MatrixXd atoms(q.size(), d);
  for (Eigen::Index l = 0; l < d; ++l) {
    const Eigen::VectorXd c = uniform_vector(6, rng);
    for (Eigen::Index p = 0; p < q.size(); ++p) {
      const double t = q.nodes()[p];
      double v = 0.0;
      for (int k = 0; k < 6; ++k) v += c[k] * std::cos(M_PI * k * t + 0.3 * l);
      atoms(p, l) = v;
    }
    atoms.col(l) /= std::sqrt(q.weights().dot(atoms.col(l).cwiseAbs2()));
  }
  return make_learned(q.nodes(), atoms);
}

/// Symmetric positive definite diagonal with geometric entries b^-j.
inline Eigen::MatrixXd geometric_diagonal(Eigen::Index d, double b) {
  Eigen::VectorXd v(d);
  for (Eigen::Index l = 0; l < d; ++l) v[l] = std::pow(b, -static_cast<double>(l / 2));
  return v.asDiagonal();
}

}  // namespace kpl::test

namespace kpl::test {

/// Central finite differences of f at x, entrywise.
template <class F>
Eigen::MatrixXd central_differences(const F& f, const Eigen::MatrixXd& x, double h = 1e-6) {
  Eigen::MatrixXd g(x.rows(), x.cols());
  Eigen::MatrixXd y = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double v = x.data()[k];
    y.data()[k] = v + h;
    const double fp = f(y);
    y.data()[k] = v - h;
    const double fm = f(y);
    y.data()[k] = v;
    g.data()[k] = (fp - fm) / (2 * h);
  }
  return g;
}

/// Largest entrywise deviation relative to the reference's sup norm.
inline double max_rel_error(const Eigen::MatrixXd& g, const Eigen::MatrixXd& ref) {
  return (g - ref).cwiseAbs().maxCoeff() / std::max(ref.cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace kpl::test
