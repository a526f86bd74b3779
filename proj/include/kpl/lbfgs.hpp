#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace kpl {

struct LbfgsOptions {
  int history = 10;
  double grad_tol = 1e-7;  ///< stop when ||g||_inf < grad_tol
  int max_iter = 2000;
  double c1 = 1e-4;  ///< sufficient decrease
  double c2 = 0.9;   ///< curvature (strong Wolfe)
  int max_line_search = 50;
};

enum class LbfgsStatus { converged, max_iterations, line_search_failed };

std::string to_string(LbfgsStatus s);

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_inf = 0.0;
  int iterations = 0;
  int evaluations = 0;
  LbfgsStatus status = LbfgsStatus::max_iterations;
  std::vector<double> trace;  ///< objective after each accepted iteration, starting with f(x0)
};

/// Returns f(x) and writes the gradient into grad.
using ValueAndGradient = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Limited-memory BFGS with a strong-Wolfe line search (bracketing + cubic zoom).
LbfgsResult minimize_lbfgs(const ValueAndGradient& fg, Eigen::VectorXd x0, const LbfgsOptions& opts = {});

}  // namespace kpl
