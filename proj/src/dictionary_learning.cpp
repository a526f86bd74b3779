#include "kpl/dictionary_learning.hpp"

#include "kpl/errors.hpp"
#include "kpl/log.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace kpl {

using detail::require;

void DlProblem::validate() const {
  require(Y.cols() >= 1, "dictionary learning: need at least one training output");
  require(Y.rows() == quadrature.size(), "dictionary learning: Y rows must match the quadrature nodes");
  require(Y.allFinite(), "dictionary learning: non-finite training values");
  require(d >= 1, "dictionary learning: d must be >= 1");
  require(tau >= 0.0 && std::isfinite(tau), "dictionary learning: tau must be >= 0");
  require(max_rounds >= 1 && rel_tol >= 0.0, "dictionary learning: invalid stopping rule");
  require(coding_max_iter >= 1 && coding_tol > 0.0, "dictionary learning: invalid coding options");
}

namespace {

Eigen::VectorXd sqrt_weights(const Quadrature& q) { return q.weights().cwiseSqrt(); }

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  return v.unaryExpr([t](double x) { return std::copysign(std::max(std::abs(x) - t, 0.0), x); });
}

// Per-column objective ||y - A b||^2 + tau ||b||_1 written with G = A^T A, c = A^T y, yy = ||y||^2.
double column_objective(const Eigen::MatrixXd& G, const Eigen::VectorXd& c, double yy, const Eigen::VectorXd& b,
                        double tau) {
  return yy - 2.0 * c.dot(b) + b.dot(G * b) + tau * b.lpNorm<1>();
}

}  // namespace

Eigen::MatrixXd sparse_code(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& atoms, double tau, const Quadrature& q,
                            const SparseCodingOptions& opts, const Eigen::MatrixXd& warm_start) {
  require(Y.rows() == q.size() && atoms.rows() == q.size(), "sparse_code: rows must match the quadrature nodes");
  require(tau >= 0.0, "sparse_code: tau must be >= 0");
  const Eigen::Index d = atoms.cols();
  const Eigen::Index n = Y.cols();
  require(warm_start.size() == 0 || (warm_start.rows() == d && warm_start.cols() == n), "sparse_code: warm start shape");

  const Eigen::VectorXd sw = sqrt_weights(q);
  const Eigen::MatrixXd A = sw.asDiagonal() * atoms;
  const Eigen::MatrixXd G = A.transpose() * A;
  const Eigen::MatrixXd C = A.transpose() * (sw.asDiagonal() * Y);
  const Eigen::VectorXd yy = (sw.asDiagonal() * Y).colwise().squaredNorm().transpose();

  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  Eigen::MatrixXd beta = warm_start.size() ? warm_start : Eigen::MatrixXd::Zero(d, n);
  if (lmax <= 0.0) return Eigen::MatrixXd::Zero(d, n);
  const double L = 2.0 * lmax;

  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd c = C.col(i);
    Eigen::VectorXd x = beta.col(i);
    double fx = column_objective(G, c, yy[i], x, tau);
    Eigen::VectorXd yk = x;
    double t = 1.0;
    for (int it = 0; it < opts.max_iter; ++it) {
      const Eigen::VectorXd grad = 2.0 * (G * yk - c);
      const Eigen::VectorXd z = soft_threshold(yk - grad / L, tau / L);
      const double fz = column_objective(G, c, yy[i], z, tau);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      // Prox-gradient mapping residual at yk: zero exactly at a minimizer.
      const double residual = (z - yk).lpNorm<Eigen::Infinity>();
      const Eigen::VectorXd x_prev = x;
      if (fz <= fx) {
        x = z;
        fx = fz;
      }
      if (residual <= opts.tol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) break;
      yk = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
      t = t_next;
    }
    beta.col(i) = x;
  }
  return beta;
}

Eigen::MatrixXd update_dictionary(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& beta, const Eigen::MatrixXd& atoms,
                                  const Quadrature& q) {
  require(Y.rows() == q.size() && atoms.rows() == q.size(), "update_dictionary: rows must match the quadrature nodes");
  require(beta.rows() == atoms.cols() && beta.cols() == Y.cols(), "update_dictionary: beta shape");
  const Eigen::VectorXd sw = sqrt_weights(q);
  Eigen::MatrixXd D = sw.asDiagonal() * atoms;
  const Eigen::MatrixXd BB = beta * beta.transpose();
  const Eigen::MatrixXd YB = (sw.asDiagonal() * Y) * beta.transpose();

  constexpr int kPasses = 20;
  for (int pass = 0; pass < kPasses; ++pass) {
    double change = 0.0;
    for (Eigen::Index l = 0; l < D.cols(); ++l) {
      const double all = BB(l, l);
      if (all <= 0.0) continue;
      Eigen::VectorXd u = D.col(l) + (YB.col(l) - D * BB.col(l)) / all;
      const double norm = u.norm();
      if (norm > 1.0) u /= norm;
      change = std::max(change, (u - D.col(l)).lpNorm<Eigen::Infinity>());
      D.col(l) = u;
    }
    if (change <= 1e-12) break;
  }
  Eigen::MatrixXd out = sw.cwiseInverse().asDiagonal() * D;
  for (Eigen::Index l = 0; l < out.cols(); ++l)
    if (BB(l, l) <= 0.0) out.col(l) = atoms.col(l);
  return out;
}

double dl_objective(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& atoms, const Eigen::MatrixXd& beta, double tau,
                    const Quadrature& q) {
  const Eigen::MatrixXd R = Y - atoms * beta;
  const double fit = (q.weights().asDiagonal() * R.cwiseAbs2()).sum();
  return (fit + tau * beta.cwiseAbs().sum()) / static_cast<double>(Y.cols());
}

DlResult learn_dictionary(const DlProblem& p, std::uint64_t seed) {
  p.validate();
  const Eigen::Index m = p.Y.rows();
  const Eigen::Index n = p.Y.cols();
  const Eigen::Index d = p.d;
  if (d > n) warn("learn_dictionary: d = " + std::to_string(d) + " exceeds the number of outputs n = " + std::to_string(n));

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  const Eigen::VectorXd& w = p.quadrature.weights();
  auto q_norm = [&](const Eigen::VectorXd& f) { return std::sqrt(w.dot(f.cwiseAbs2())); };
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd atoms(m, d);
  for (Eigen::Index l = 0; l < d; ++l) {
    Eigen::VectorXd col;
    if (l < n) col = p.Y.col(order[static_cast<std::size_t>(l)]);
    if (l >= n || q_norm(col) <= 1e-300) {
      col.resize(m);
      for (Eigen::Index k = 0; k < m; ++k) col[k] = gauss(rng);
    }
    atoms.col(l) = col / q_norm(col);
  }

  const SparseCodingOptions sc{p.coding_max_iter, p.coding_tol};
  DlResult res{make_learned(p.quadrature.nodes(), atoms), atoms, Eigen::MatrixXd::Zero(d, n), {}, 0};
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(d, n);
  for (int round = 0; round < p.max_rounds; ++round) {
    beta = sparse_code(p.Y, atoms, p.tau, p.quadrature, sc, beta);
    atoms = update_dictionary(p.Y, beta, atoms, p.quadrature);
    const double obj = dl_objective(p.Y, atoms, beta, p.tau, p.quadrature);
    if (!std::isfinite(obj)) throw NumericError("learn_dictionary: non-finite objective");
    const bool stop = !res.objective_trace.empty() &&
                      res.objective_trace.back() - obj < p.rel_tol * std::abs(res.objective_trace.back());
    res.objective_trace.push_back(obj);
    res.rounds = round + 1;
    if (stop) break;
  }
  res.atoms = atoms;
  res.beta = beta;
  res.dictionary = make_learned(p.quadrature.nodes(), atoms);
  return res;
}

Eigen::MatrixXd outputs_on_nodes(const PartialSample& sample, const Quadrature& q) {
  sample.validate();
  Eigen::MatrixXd Y(q.size(), static_cast<Eigen::Index>(sample.size()));
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto& f = sample.outputs[i];
    for (Eigen::Index p = 0; p < q.size(); ++p) Y(p, static_cast<Eigen::Index>(i)) = f.evaluate_clamped(q.nodes()[p]);
  }
  return Y;
}

}  // namespace kpl
