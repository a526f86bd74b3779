#include "kpl/errors.hpp"
#include "kpl/iterative.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace kpl;

namespace {

struct Instance {
  PartialSample sample;
  Dictionary dict;
  ScalarKernel kernel = ScalarKernel::gaussian(1.0);
  OutputStructure b_spec;
};

Instance grid_instance(std::size_t n, const Quadrature& q, std::mt19937_64& rng) {
  return {test::random_grid_sample(n, 3, q.nodes(), rng), make_wavelet(2, 0), ScalarKernel::gaussian(1.0),
          OutputStructure::diagonal_scale(1.5)};
}

Instance partial_instance(std::size_t n, Eigen::Index d, std::mt19937_64& rng) {
  return {test::random_partial_sample(n, 3, 12, rng), test::random_normalized_dictionary(d, rng),
          ScalarKernel::gaussian(1.0), OutputStructure::identity()};
}

}  // namespace

TEST_CASE("ground loss invariants") {
  std::mt19937_64 rng(1);
  for (const GroundLoss& l : {GroundLoss::square(), GroundLoss::logcosh(1.0), GroundLoss::logcosh(25.0)}) {
    for (int t = 0; t < 50; ++t) {
      const Eigen::VectorXd ab = test::uniform_vector(2, rng, -3, 3);
      const double a = ab[0], b = ab[1];
      CHECK(l.value(a, a) == 0.0);
      CHECK(l.deriv_second(a, a) == 0.0);
      CHECK(l.value(a, b) >= 0.0);
      const double h = 1e-6;
      const double fd = (l.value(a, b + h) - l.value(a, b - h)) / (2 * h);
      CHECK(l.deriv_second(a, b) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
      if (l.variant == GroundLoss::Variant::square) {
        CHECK(l.value(a, b) == doctest::Approx((a - b) * (a - b)));
        CHECK(l.deriv_second(a, b) == doctest::Approx(2 * (b - a)));
      } else {
        CHECK(l.value(a, b) == doctest::Approx(std::log(std::cosh(l.gamma * (a - b))) / l.gamma).epsilon(1e-12));
        CHECK(l.deriv_second(a, b) == doctest::Approx(std::tanh(l.gamma * (b - a))));
        CHECK(std::abs(l.deriv_second(a, b)) <= 1.0);
      }
    }
  }
  const GroundLoss lc = GroundLoss::logcosh(25.0);
  CHECK(std::isfinite(lc.value(0.0, 1e6)));
  CHECK(lc.value(0.0, 1e3) == doctest::Approx(1e3 - std::log(2.0) / 25.0));
  CHECK_THROWS_AS(GroundLoss::logcosh(0.0), InvalidArgument);
}

TEST_CASE("objective_full examples") {
  std::mt19937_64 rng(2);
  const Quadrature q = Quadrature::uniform(80);
  Instance in = grid_instance(5, q, rng);
  const Eigen::Index d = in.dict.size();

  std::vector<SampledFunction> zeros(5, SampledFunction(q.nodes(), Eigen::VectorXd::Zero(q.size())));
  const auto z = make_objective({in.sample.inputs, zeros}, in.dict, in.kernel, in.b_spec, 0.1, GroundLoss::square(), q);
  CHECK(objective_full(z, Eigen::MatrixXd::Zero(d, 5)) == 0.0);

  const GroundLoss lc = GroundLoss::logcosh(10.0);
  const auto st = make_objective(in.sample, in.dict, in.kernel, in.b_spec, 0.1, lc, q);
  double expect = 0.0;
  for (const auto& y : in.sample.outputs) {
    Eigen::VectorXd l(q.size());
    for (Eigen::Index p = 0; p < q.size(); ++p) l[p] = lc.value(y.values()[p], 0.0);
    expect += q.weights().dot(l) / 5.0;
  }
  CHECK(objective_full(st, Eigen::MatrixXd::Zero(d, 5)) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("square-loss objective matches the ridge formulation") {
  std::mt19937_64 rng(3);
  const Quadrature q = Quadrature::uniform(90);
  const Instance in = grid_instance(6, q, rng);
  const double lambda = 0.03;
  const auto st = make_objective(in.sample, in.dict, in.kernel, in.b_spec, lambda, GroundLoss::square(), q);
  const Eigen::MatrixXd K = kernel_matrix(in.kernel, in.sample.inputs);
  const Eigen::MatrixXd B = build_B(in.b_spec, in.dict);
  const Eigen::MatrixXd A = in.dict.evaluate(q.nodes());
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd alpha = test::gaussian_matrix(A.cols(), 6, rng);
    const Eigen::MatrixXd U = B * alpha * K;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < 6; ++i) {
      const Eigen::VectorXd r = in.sample.outputs[static_cast<std::size_t>(i)].values() - A * U.col(i);
      loss += q.weights().dot(r.cwiseAbs2()) / 6.0;
    }
    const double ref = loss + lambda * (K * alpha.transpose() * B * alpha).trace();
    CHECK(objective_full(st, alpha) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("gradient vanishes at the ridge optimum") {
  std::mt19937_64 rng(4);
  const Quadrature q = Quadrature::uniform(100);
  const Instance in = grid_instance(7, q, rng);
  const double lambda = 0.02;
  const KplModel m = fit_ridge_full(in.sample, in.dict, in.kernel, in.b_spec, q, lambda);
  const auto st = make_objective(in.sample, in.dict, in.kernel, in.b_spec, lambda, GroundLoss::square(), q);
  CHECK(gradient_full(st, m.alpha).norm() / m.alpha.norm() < 1e-6);
}

TEST_CASE("loss gradient vanishes when outputs equal predictions") {
  std::mt19937_64 rng(5);
  const Quadrature q = Quadrature::uniform(60);
  const Dictionary d = make_fourier(2);
  const auto kernel = ScalarKernel::gaussian(1.0);
  auto x = test::random_vector_inputs(4, 2, rng);
  const Eigen::MatrixXd alpha = test::gaussian_matrix(5, 4, rng);
  KplModel m{alpha, x, d, kernel, OutputStructure::identity(), Eigen::MatrixXd::Identity(5, 5), 0.1, std::nullopt};
  std::vector<SampledFunction> ys;
  for (const auto& xi : x) ys.push_back(predict(m, xi, q.nodes()));
  const double lambda = 0.1;
  for (const GroundLoss& l : {GroundLoss::square(), GroundLoss::logcosh(5.0)}) {
    const auto st = make_objective({x, ys}, d, kernel, OutputStructure::identity(), lambda, l, q);
    const Eigen::MatrixXd K = kernel_matrix(kernel, x);
    CHECK((gradient_full(st, alpha) - 2 * lambda * alpha * K).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(6);
  const Quadrature q = Quadrature::uniform(40);
  for (const GroundLoss& l : {GroundLoss::square(), GroundLoss::logcosh(1.0), GroundLoss::logcosh(25.0)}) {
    const Instance full = grid_instance(5, q, rng);
    const auto sf = make_objective(full.sample, full.dict, full.kernel, full.b_spec, 0.05, l, q);
    const Eigen::MatrixXd a = 0.3 * test::gaussian_matrix(full.dict.size(), 5, rng);
    const auto ff = [&](const Eigen::MatrixXd& x) { return objective_full(sf, x); };
    CHECK(test::max_rel_error(gradient_full(sf, a), test::central_differences(ff, a)) < 1e-5);

    const Instance part = partial_instance(5, 4, rng);
    const auto sp = make_objective(part.sample, part.dict, part.kernel, part.b_spec, 0.05, l, std::nullopt);
    const Eigen::MatrixXd b = 0.3 * test::gaussian_matrix(4, 5, rng);
    const auto fp = [&](const Eigen::MatrixXd& x) { return objective_partial(sp, x); };
    CHECK(test::max_rel_error(gradient_partial(sp, b), test::central_differences(fp, b)) < 1e-5);
  }
}

TEST_CASE("partial view on quadrature nodes with mean weights equals the full view") {
  std::mt19937_64 rng(7);
  const Quadrature q = Quadrature::mean_weights(linspace(50));
  const Instance in = grid_instance(4, q, rng);
  const Eigen::MatrixXd a = test::gaussian_matrix(in.dict.size(), 4, rng);
  for (const GroundLoss& l : {GroundLoss::square(), GroundLoss::logcosh(3.0)}) {
    const auto sf = make_objective(in.sample, in.dict, in.kernel, in.b_spec, 0.1, l, q);
    const auto sp = make_objective(in.sample, in.dict, in.kernel, in.b_spec, 0.1, l, std::nullopt);
    CHECK(objective_partial(sp, a) == doctest::Approx(objective_full(sf, a)).epsilon(1e-13));
    CHECK((gradient_partial(sp, a) - gradient_full(sf, a)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(gradient_full(sp, a), InvalidArgument);
    CHECK_THROWS_AS(objective_partial(sf, a), InvalidArgument);
  }
}

TEST_CASE("a zero derivative at the only observation gives a zero loss column") {
  const Dictionary d = make_fourier(1);
  const InputPoint x(Eigen::VectorXd(Eigen::VectorXd::Zero(1)));
  // prediction is 0 with alpha = 0, observation 0: derivative 0
  const PartialSample s({x}, {SampledFunction(Eigen::VectorXd::Constant(1, 0.3), Eigen::VectorXd::Zero(1))});
  const auto st = make_objective(s, d, ScalarKernel::gaussian(1.0), OutputStructure::identity(), 0.5,
                                 GroundLoss::logcosh(2.0), std::nullopt);
  CHECK(gradient_partial(st, Eigen::MatrixXd::Zero(3, 1)).isZero());
  CHECK_THROWS_AS(objective_partial(st, Eigen::MatrixXd::Constant(3, 1, std::nan(""))), InvalidArgument);
}

TEST_CASE("square-loss iterative fits reach the closed forms") {
  std::mt19937_64 rng(8);
  const auto kernel = ScalarKernel::gaussian(1.0);
  const double lambda = 0.01;
  const Quadrature q = Quadrature::uniform(60);
  const PartialSample full = test::random_grid_sample(10, 3, q.nodes(), rng);
  const Dictionary d = test::random_normalized_dictionary(5, rng);
  const KplModel ridge = fit_ridge_full(full, d, kernel, OutputStructure::identity(), q, lambda);
  const IterativeResult it =
      fit_iterative(full, d, kernel, OutputStructure::identity(), lambda, GroundLoss::square(), {}, q);
  CHECK(it.converged());
  CHECK(test::rel_fro(it.model.alpha, ridge.alpha) < 1e-4);

  const PartialSample part = test::random_partial_sample(10, 3, 15, rng);
  const KplModel per = fit_ridge_persample_gram(part, d, kernel, OutputStructure::identity(), lambda);
  const IterativeResult ip = fit_iterative(part, d, kernel, OutputStructure::identity(), lambda, GroundLoss::square());
  CHECK(ip.converged());
  CHECK(test::rel_fro(ip.model.alpha, per.alpha) < 1e-4);

  for (std::size_t k = 1; k < ip.trace.size(); ++k) CHECK(ip.trace[k] <= ip.trace[k - 1] + 1e-14 * std::abs(ip.trace[k - 1]));
}

TEST_CASE("huge lambda drives alpha to zero") {
  std::mt19937_64 rng(9);
  const PartialSample s = test::random_partial_sample(6, 2, 10, rng);
  test::WarningCapture warnings;
  const IterativeResult r = fit_iterative(s, make_fourier(2), ScalarKernel::gaussian(1.0), OutputStructure::identity(),
                                          1e8, GroundLoss::logcosh(5.0));
  CHECK(r.model.alpha.norm() < 1e-6);
  CHECK(warnings.messages.size() == (r.converged() ? 0u : 1u));
  CHECK_THROWS_AS(fit_iterative(s, make_fourier(2), ScalarKernel::gaussian(1.0), OutputStructure::identity(), 0.0,
                                GroundLoss::square()),
                  InvalidArgument);
}

TEST_CASE("an iteration cap is reported, never silent") {
  std::mt19937_64 rng(12);
  const PartialSample s = test::random_partial_sample(6, 2, 10, rng);
  test::WarningCapture warnings;
  IterativeOptions opts;
  opts.max_iter = 2;
  const IterativeResult r = fit_iterative(s, make_fourier(2), ScalarKernel::gaussian(1.0), OutputStructure::identity(),
                                          1e-3, GroundLoss::square(), opts);
  CHECK(r.status == LbfgsStatus::max_iterations);
  REQUIRE(warnings.messages.size() == 1);
  CHECK(warnings.messages[0].find("max_iterations") != std::string::npos);
}

TEST_CASE("convex objective value does not depend on the starting point") {
  std::mt19937_64 rng(10);
  const PartialSample s = test::random_partial_sample(6, 2, 10, rng);
  const Dictionary d = make_fourier(1);
  const auto st = make_objective(s, d, ScalarKernel::gaussian(1.0), OutputStructure::identity(), 0.01,
                                 GroundLoss::logcosh(10.0), std::nullopt);
  const ValueAndGradient fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    Eigen::MatrixXd gm;
    const double v = objective_and_gradient(st, x.reshaped(3, 6), gm);
    g = gm.reshaped();
    return v;
  };
  LbfgsOptions opts;
  opts.grad_tol = 1e-10;
  opts.max_iter = 5000;
  const double ref = minimize_lbfgs(fg, Eigen::VectorXd::Zero(18), opts).value;
  for (int t = 0; t < 3; ++t) {
    const auto r = minimize_lbfgs(fg, test::gaussian_matrix(18, 1, rng).col(0), opts);
    CHECK(std::abs(r.value - ref) < 1e-8);
  }
}

TEST_CASE("logcosh loss gradient stays bounded under outliers") {
  std::mt19937_64 rng(11);
  const Quadrature q = Quadrature::uniform(50);
  PartialSample s = test::random_grid_sample(5, 2, q.nodes(), rng);
  const Dictionary d = make_fourier(2);
  const auto kernel = ScalarKernel::gaussian(1.0);
  const Eigen::MatrixXd K = kernel_matrix(kernel, s.inputs);
  const double phi_max = d.evaluate(q.nodes()).cwiseAbs().maxCoeff();
  const double lambda = 0.1;
  const Eigen::MatrixXd alpha = test::gaussian_matrix(5, 5, rng);
  for (double mag : {1e2, 1e6, 1e12}) {
    std::vector<SampledFunction> ys;
    for (const auto& y : s.outputs) {
      Eigen::VectorXd v = y.values();
      v[7] += mag;
      v[31] -= mag;
      ys.emplace_back(y.locations(), v);
    }
    const auto st = make_objective({s.inputs, ys}, d, kernel, OutputStructure::identity(), lambda,
                                   GroundLoss::logcosh(25.0), q);
    const Eigen::MatrixXd loss_part = gradient_full(st, alpha) - 2 * lambda * alpha * K;
    for (Eigen::Index j = 0; j < 5; ++j) {
      const double bound = std::sqrt(5.0) * phi_max * K.col(j).norm();
      CHECK(loss_part.col(j).norm() <= bound);
    }
  }
}

TEST_CASE("lbfgs minimizes standard test functions") {
  const ValueAndGradient rosen = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.resize(2);
    g[0] = -400 * x[0] * (x[1] - x[0] * x[0]) - 2 * (1 - x[0]);
    g[1] = 200 * (x[1] - x[0] * x[0]);
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  const LbfgsResult r = minimize_lbfgs(rosen, Eigen::Vector2d(-1.2, 1.0));
  CHECK(r.status == LbfgsStatus::converged);
  CHECK((r.x - Eigen::Vector2d(1, 1)).norm() < 1e-6);
  for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] <= r.trace[k - 1] + 1e-14 * std::abs(r.trace[k - 1]));

  std::mt19937_64 rng(13);
  const Eigen::MatrixXd a = test::gaussian_matrix(20, 20, rng);
  const Eigen::MatrixXd H = a * a.transpose() + Eigen::MatrixXd::Identity(20, 20);
  const Eigen::VectorXd b = test::gaussian_matrix(20, 1, rng).col(0);
  const ValueAndGradient quad = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = H * x - b;
    return 0.5 * x.dot(H * x) - b.dot(x);
  };
  LbfgsOptions opts;
  opts.grad_tol = 1e-10;
  const LbfgsResult rq = minimize_lbfgs(quad, Eigen::VectorXd::Zero(20), opts);
  CHECK(rq.status == LbfgsStatus::converged);
  CHECK((rq.x - H.ldlt().solve(b)).norm() < 1e-8);
}
