#pragma once

#include "kpl/dictionary.hpp"
#include "kpl/functional.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace kpl {

/// Learning problem
///   min_{||phi_l||_q <= 1, beta} (1/n) sum_i ||y_i - Phi beta_i||_q^2 + tau ||beta_i||_1
/// with outputs given as the columns of Y on the nodes of q.
struct DlProblem {
  Eigen::MatrixXd Y;  ///< m x n
  Quadrature quadrature;
  int d = 30;
  double tau = 0.01;
  int max_rounds = 100;
  double rel_tol = 1e-6;  ///< stop when the round decrease falls below rel_tol * objective
  int coding_max_iter = 5000;
  double coding_tol = 1e-8;

  void validate() const;
};

struct DlResult {
  Dictionary dictionary;  ///< learned family, interpolating `atoms` on the grid
  Eigen::MatrixXd atoms;  ///< m x d atom values on the quadrature nodes
  Eigen::MatrixXd beta;   ///< d x n
  std::vector<double> objective_trace;  ///< objective after each round
  int rounds = 0;
};

struct SparseCodingOptions {
  int max_iter = 5000;
  double tol = 1e-8;
};

/// Columnwise l1-regularized least squares (monotone FISTA). `warm_start`, if
/// non-empty, is the d x n starting point.
Eigen::MatrixXd sparse_code(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& atoms, double tau, const Quadrature& q,
                            const SparseCodingOptions& opts = {}, const Eigen::MatrixXd& warm_start = {});

/// Block coordinate pass over the atoms: exact least-squares update of each
/// atom followed by projection onto the unit ball. Atoms whose coefficient
/// row is zero are left unchanged.
Eigen::MatrixXd update_dictionary(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& beta, const Eigen::MatrixXd& atoms,
                                  const Quadrature& q);

/// (1/n) sum_i ||y_i - A beta_i||_q^2 + tau ||beta_i||_1.
double dl_objective(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& atoms, const Eigen::MatrixXd& beta, double tau,
                    const Quadrature& q);

DlResult learn_dictionary(const DlProblem& problem, std::uint64_t seed);

/// Output values placed on q's nodes (piecewise-linear, end values held), one column per sample.
Eigen::MatrixXd outputs_on_nodes(const PartialSample& sample, const Quadrature& q);

}  // namespace kpl
