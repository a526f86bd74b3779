#include "kpl/lbfgs.hpp"

#include "kpl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace kpl {

std::string to_string(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::converged: return "converged";
    case LbfgsStatus::max_iterations: return "max_iterations";
    case LbfgsStatus::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

namespace {

struct Probe {
  double step = 0.0;
  double value = 0.0;
  double slope = 0.0;  // directional derivative
};

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), safeguarded
// to stay inside the bracket.
double cubic_step(const Probe& a, const Probe& b) {
  const double lo = std::min(a.step, b.step);
  const double hi = std::max(a.step, b.step);
  const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.step - b.step);
  const double disc = d1 * d1 - a.slope * b.slope;
  double t = 0.5 * (lo + hi);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
    const double denom = b.slope - a.slope + 2.0 * d2;
    if (denom != 0.0) t = b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
  }
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(t) || t < lo + margin || t > hi - margin) t = 0.5 * (lo + hi);
  return t;
}

}  // namespace

LbfgsResult minimize_lbfgs(const ValueAndGradient& fg, Eigen::VectorXd x0, const LbfgsOptions& opts) {
  detail::require(opts.history >= 1 && opts.max_iter >= 0, "minimize_lbfgs: invalid options");
  LbfgsResult res;
  const auto dim = x0.size();
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g(dim);
  double f = fg(x, g);
  ++res.evaluations;
  if (!std::isfinite(f) || !g.allFinite()) throw NumericError("minimize_lbfgs: non-finite objective at start");
  res.trace.push_back(f);

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd x_new(dim);
  Eigen::VectorXd g_new(dim);

  auto finish = [&](LbfgsStatus st) {
    res.x = x;
    res.value = f;
    res.grad_inf = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    res.status = st;
    return res;
  };

  for (int it = 0;; ++it) {
    const double ginf = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    if (ginf < opts.grad_tol) return finish(LbfgsStatus::converged);
    if (it >= opts.max_iter) return finish(LbfgsStatus::max_iterations);

    // Two-loop recursion.
    Eigen::VectorXd q = g;
    const auto k = s_hist.size();
    std::vector<double> a(k);
    for (std::size_t j = k; j-- > 0;) {
      a[j] = rho_hist[j] * s_hist[j].dot(q);
      q -= a[j] * y_hist[j];
    }
    if (k > 0) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      q /= std::max(1.0, g.norm());
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double b = rho_hist[j] * y_hist[j].dot(q);
      q += (a[j] - b) * s_hist[j];
    }
    Eigen::VectorXd p = -q;
    double slope0 = g.dot(p);
    if (!(slope0 < 0.0)) {
      // Not a descent direction: restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      p = -g / std::max(1.0, g.norm());
      slope0 = g.dot(p);
    }

    const Probe start{0.0, f, slope0};
    double f_last = f;
    auto eval = [&](double step) {
      x_new = x + step * p;
      const double v = fg(x_new, g_new);
      f_last = v;
      ++res.evaluations;
      return Probe{step, std::isfinite(v) ? v : std::numeric_limits<double>::infinity(),
                   g_new.allFinite() ? g_new.dot(p) : std::numeric_limits<double>::infinity()};
    };
    auto armijo = [&](const Probe& pr) { return pr.value <= f + opts.c1 * pr.step * slope0; };
    auto curvature = [&](const Probe& pr) { return std::abs(pr.slope) <= -opts.c2 * slope0; };
    // Near the optimum value differences drown in round-off; a point meeting the
    // curvature condition whose value is within a few ulps of f is accepted.
    const double f_noise = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(f);
    auto approx_wolfe = [&](const Probe& pr) { return curvature(pr) && pr.value <= f + f_noise; };

    bool accepted = false;
    Probe prev = start;
    double step = 1.0;
    Probe lo{};
    Probe hi{};
    bool zoom = false;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      const Probe cur = eval(step);
      if (!armijo(cur) && approx_wolfe(cur)) {
        accepted = true;
        break;
      }
      if (!armijo(cur) || (ls > 0 && cur.value >= prev.value)) {
        lo = prev;
        hi = cur;
        zoom = true;
        break;
      }
      if (curvature(cur)) {
        accepted = true;
        break;
      }
      if (cur.slope >= 0.0) {
        lo = cur;
        hi = prev;
        zoom = true;
        break;
      }
      prev = cur;
      step *= 2.0;
    }
    if (zoom) {
      for (int ls = 0; ls < opts.max_line_search; ++ls) {
        const double t = cubic_step(lo, hi);
        const Probe cur = eval(t);
        if (!armijo(cur) && approx_wolfe(cur)) {
          accepted = true;
          break;
        }
        if (!armijo(cur) || cur.value >= lo.value) {
          hi = cur;
        } else {
          if (curvature(cur)) {
            accepted = true;
            break;
          }
          if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
          lo = cur;
        }
        if (std::abs(hi.step - lo.step) <= 1e-16 * std::max(1.0, std::abs(lo.step))) break;
      }
      if (!accepted && lo.step > 0.0 && lo.value < f) {
        // Best sufficient-decrease point found in the bracket.
        eval(lo.step);
        accepted = true;
      }
    }
    if (!accepted) return finish(LbfgsStatus::line_search_failed);

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    x.swap(x_new);
    g.swap(g_new);
    f = f_last;
    res.iterations = it + 1;
    res.trace.push_back(f);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (static_cast<int>(s_hist.size()) == opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
    }
  }
}

}  // namespace kpl
