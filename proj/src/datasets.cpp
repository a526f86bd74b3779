#include "kpl/datasets.hpp"

#include "kpl/errors.hpp"
#include "kpl/log.hpp"
#include "kpl/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace kpl {

using detail::require;

double bspline4(double x) {
  if (x <= 0.0 || x >= 4.0) return 0.0;
  if (x < 1.0) return x * x * x / 6.0;
  if (x < 2.0) return (-3.0 * x * x * x + 12.0 * x * x - 12.0 * x + 4.0) / 6.0;
  if (x < 3.0) return (3.0 * x * x * x - 24.0 * x * x + 60.0 * x - 44.0) / 6.0;
  const double u = 4.0 - x;
  return u * u * u / 6.0;
}

void ToyConfig::validate() const {
  require(!lengthscales.empty(), "toy config: need at least one lengthscale");
  for (double b : lengthscales) require(b > 0.0 && std::isfinite(b), "toy config: lengthscales must be > 0");
  require(sigma_x >= 0.0 && std::isfinite(sigma_x), "toy config: sigma_x must be >= 0");
  require(input_grid >= 2 && output_grid >= 2, "toy config: grids need at least 2 points");
  require(input_hi > input_lo, "toy config: empty input domain");
}

ToyGenerator::ToyGenerator(ToyConfig config) : config_(std::move(config)) {
  config_.validate();
  zeta_ = linspace(config_.input_grid, config_.input_lo, config_.input_hi);
  theta_ = linspace(config_.output_grid, 0.0, 1.0);
  const int r = config_.r();
  const Eigen::Index m = theta_.size();

  std::mt19937_64 rng(config_.gp_seed);
  std::normal_distribution<double> gauss;
  paths_.resize(m, r);
  for (int t = 0; t < r; ++t) {
    const double b2 = config_.lengthscales[static_cast<std::size_t>(t)] * config_.lengthscales[static_cast<std::size_t>(t)];
    Eigen::MatrixXd cov(m, m);
    for (Eigen::Index p = 0; p < m; ++p) {
      for (Eigen::Index s = 0; s < m; ++s) {
        const double diff = theta_[p] - theta_[s];
        cov(p, s) = std::exp(-diff * diff / b2);
      }
    }
    cov.diagonal().array() += 1e-10;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericError("toy generator: covariance Cholesky failed for lengthscale " +
                         std::to_string(config_.lengthscales[static_cast<std::size_t>(t)]));
    }
    Eigen::VectorXd z(m);
    for (Eigen::Index p = 0; p < m; ++p) z[p] = gauss(rng);
    paths_.col(t) = llt.matrixL() * z;
  }

  splines_.resize(zeta_.size(), r);
  for (int t = 0; t < r; ++t) {
    for (Eigen::Index p = 0; p < zeta_.size(); ++p) splines_(p, t) = bspline4(4.0 * (zeta_[p] - (t + 1)) + 2.0);
  }
}

Eigen::VectorXd ToyGenerator::clean_input(const Eigen::VectorXd& a) const {
  require(a.size() == config_.r(), "toy generator: coefficient length must equal r");
  return splines_ * a;
}

SampledFunction ToyGenerator::output(const Eigen::VectorXd& a) const {
  require(a.size() == config_.r(), "toy generator: coefficient length must equal r");
  return {theta_, paths_ * a};
}

PartialSample ToyGenerator::sample_with_coefficients(const Eigen::MatrixXd& coeffs, std::mt19937_64& rng) const {
  require(coeffs.rows() == config_.r() && coeffs.cols() >= 1, "toy generator: coefficients must be r x n, n >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  PartialSample out;
  for (Eigen::Index i = 0; i < coeffs.cols(); ++i) {
    Eigen::VectorXd x = clean_input(coeffs.col(i));
    if (config_.sigma_x > 0.0) {
      for (Eigen::Index p = 0; p < x.size(); ++p) x[p] += config_.sigma_x * gauss(rng);
    }
    out.inputs.emplace_back(std::move(x));
    out.outputs.push_back(output(coeffs.col(i)));
  }
  return out;
}

PartialSample ToyGenerator::sample(Eigen::Index n, std::mt19937_64& rng) const {
  require(n >= 1, "toy generator: n must be >= 1");
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd coeffs(config_.r(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index t = 0; t < coeffs.rows(); ++t) coeffs(t, i) = unif(rng);
  }
  return sample_with_coefficients(coeffs, rng);
}

PartialSample generate_toy(const ToyConfig& config, Eigen::Index n) {
  const ToyGenerator gen(config);
  std::mt19937_64 rng(config.sample_seed);
  return gen.sample(n, rng);
}

// ---------------------------------------------------------------------------

void CorruptionSpec::validate() const {
  require(std::isfinite(level) && level >= 0.0, "corruption: level must be >= 0");
  if (variant != Variant::local_noise) require(level <= 1.0, "corruption: fraction must lie in [0, 1]");
}

std::string to_string(CorruptionSpec::Variant v) {
  switch (v) {
    case CorruptionSpec::Variant::local_outliers: return "local_outliers";
    case CorruptionSpec::Variant::label_noise: return "label_noise";
    case CorruptionSpec::Variant::missing: return "missing";
    case CorruptionSpec::Variant::local_noise: return "local_noise";
  }
  return "unknown";
}

CorruptionSpec::Variant corruption_from_string(const std::string& s) {
  for (auto v : {CorruptionSpec::Variant::local_outliers, CorruptionSpec::Variant::label_noise,
                 CorruptionSpec::Variant::missing, CorruptionSpec::Variant::local_noise}) {
    if (to_string(v) == s) return v;
  }
  throw InvalidArgument("unknown corruption '" + s + "'");
}

namespace {

std::size_t count_for(double fraction, std::size_t total) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
}

// `k` distinct indices out of [0, total), chosen uniformly.
std::vector<std::size_t> choose(std::size_t total, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(k, total));
  return idx;
}

}  // namespace

PartialSample corrupt(const PartialSample& sample, const CorruptionSpec& spec, const ToyGenerator* generator) {
  sample.validate();
  spec.validate();
  if (spec.level == 0.0) return sample;
  std::mt19937_64 rng(spec.seed);
  PartialSample out = sample;

  switch (spec.variant) {
    case CorruptionSpec::Variant::local_outliers: {
      for (auto& f : out.outputs) {
        Eigen::VectorXd v = f.values();
        const double lo = v.minCoeff();
        const double hi = v.maxCoeff();
        std::uniform_real_distribution<double> unif(lo, hi);
        for (std::size_t p : choose(static_cast<std::size_t>(v.size()), count_for(spec.level, v.size()), rng)) {
          v[static_cast<Eigen::Index>(p)] = hi > lo ? unif(rng) : lo;
        }
        f = SampledFunction(f.locations(), std::move(v));
      }
      break;
    }
    case CorruptionSpec::Variant::label_noise: {
      require(generator != nullptr, "corrupt: label_noise needs a toy generator");
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      for (std::size_t i : choose(out.size(), count_for(spec.level, out.size()), rng)) {
        Eigen::VectorXd a(generator->config().r());
        for (Eigen::Index t = 0; t < a.size(); ++t) a[t] = unif(rng);
        const SampledFunction fresh = generator->output(a);
        const auto& loc = out.outputs[i].locations();
        Eigen::VectorXd v(loc.size());
        for (Eigen::Index p = 0; p < loc.size(); ++p) v[p] = fresh.evaluate_clamped(loc[p]);
        out.outputs[i] = SampledFunction(loc, std::move(v));
      }
      break;
    }
    case CorruptionSpec::Variant::missing: {
      for (std::size_t i = 0; i < out.size(); ++i) {
        auto& f = out.outputs[i];
        const auto m = static_cast<std::size_t>(f.size());
        std::size_t drop = count_for(spec.level, m);
        if (drop >= m) {
          warn("corrupt: missing fraction would empty output " + std::to_string(i) + "; keeping one observation");
          drop = m - 1;
        }
        std::vector<std::size_t> keep = choose(m, m - drop, rng);
        std::sort(keep.begin(), keep.end());
        Eigen::VectorXd loc(static_cast<Eigen::Index>(keep.size()));
        Eigen::VectorXd val(loc.size());
        for (std::size_t k = 0; k < keep.size(); ++k) {
          loc[static_cast<Eigen::Index>(k)] = f.locations()[static_cast<Eigen::Index>(keep[k])];
          val[static_cast<Eigen::Index>(k)] = f.values()[static_cast<Eigen::Index>(keep[k])];
        }
        f = SampledFunction(std::move(loc), std::move(val));
      }
      break;
    }
    case CorruptionSpec::Variant::local_noise: {
      std::normal_distribution<double> gauss(0.0, spec.level);
      for (auto& f : out.outputs) {
        Eigen::VectorXd v = f.values();
        for (Eigen::Index p = 0; p < v.size(); ++p) v[p] += gauss(rng);
        f = SampledFunction(f.locations(), std::move(v));
      }
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

SampledFunction training_mean(const PartialSample& train) {
  train.validate();
  std::vector<double> grid;
  for (const auto& f : train.outputs) grid.insert(grid.end(), f.locations().begin(), f.locations().end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  Eigen::VectorXd loc = Eigen::Map<Eigen::VectorXd>(grid.data(), static_cast<Eigen::Index>(grid.size()));
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(loc.size());
  for (const auto& f : train.outputs) {
    for (Eigen::Index p = 0; p < loc.size(); ++p) mean[p] += f.evaluate_clamped(loc[p]);
  }
  mean /= static_cast<double>(train.size());
  return {std::move(loc), std::move(mean)};
}

PartialSample subtract_mean(const PartialSample& sample, const SampledFunction& mean) {
  PartialSample out = sample;
  for (auto& f : out.outputs) {
    Eigen::VectorXd v = f.values();
    for (Eigen::Index p = 0; p < v.size(); ++p) v[p] -= mean.evaluate_clamped(f.locations()[p]);
    f = SampledFunction(f.locations(), std::move(v));
  }
  return out;
}

SampledFunction add_mean(const SampledFunction& f, const SampledFunction& mean) {
  Eigen::VectorXd v = f.values();
  for (Eigen::Index p = 0; p < v.size(); ++p) v[p] += mean.evaluate_clamped(f.locations()[p]);
  return {f.locations(), std::move(v)};
}

Centered center_outputs(const PartialSample& train, const PartialSample& apply_to) {
  SampledFunction mean = training_mean(train);
  return {subtract_mean(apply_to, mean), std::move(mean)};
}

ChannelStats channel_stats(std::span<const InputPoint> train) {
  require(!train.empty(), "standardize_channels: empty training inputs");
  const Eigen::Index c = train.front().cols();
  Eigen::Index rows = 0;
  for (const auto& x : train) {
    require(x.is_matrix() && x.cols() == c, "standardize_channels: inputs must be matrices with equal channel counts");
    rows += x.rows();
  }
  require(rows >= 2, "standardize_channels: need at least two entries per channel");
  ChannelStats st{Eigen::VectorXd::Zero(c), Eigen::VectorXd::Zero(c)};
  for (const auto& x : train) st.mean += x.data().colwise().sum().transpose();
  st.mean /= static_cast<double>(rows);
  for (const auto& x : train) st.stddev += (x.data().rowwise() - st.mean.transpose()).cwiseAbs2().colwise().sum().transpose();
  st.stddev = (st.stddev / static_cast<double>(rows - 1)).cwiseSqrt();
  for (Eigen::Index k = 0; k < c; ++k) {
    if (!(st.stddev[k] > 1e-12 * std::max(1.0, std::abs(st.mean[k])))) {
      warn("standardize_channels: channel " + std::to_string(k) + " has zero variance; std clamped to 1");
      st.stddev[k] = 1.0;
    }
  }
  return st;
}

std::vector<InputPoint> apply_standardization(std::span<const InputPoint> inputs, const ChannelStats& stats) {
  std::vector<InputPoint> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) {
    require(x.is_matrix() && x.cols() == stats.mean.size(), "standardize_channels: channel count mismatch");
    Eigen::MatrixXd z = (x.data().rowwise() - stats.mean.transpose()).array().rowwise() / stats.stddev.transpose().array();
    out.emplace_back(std::move(z));
  }
  return out;
}

std::vector<InputPoint> standardize_channels(std::span<const InputPoint> train, std::span<const InputPoint> apply_to) {
  return apply_standardization(apply_to, channel_stats(train));
}

// ---------------------------------------------------------------------------

std::vector<int> fold_assignment(std::size_t n, int folds, std::uint64_t seed) {
  require(folds >= 2, "cross-validation: folds must be >= 2");
  require(n >= static_cast<std::size_t>(folds), "cross-validation: need at least as many samples as folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> fold(n);
  for (std::size_t p = 0; p < n; ++p) fold[perm[p]] = static_cast<int>(p % static_cast<std::size_t>(folds));
  return fold;
}

CvResult kfold_cv(const PartialSample& sample, int folds, std::span<const CvCandidate> candidates,
                  const CvEvaluator& evaluate, std::uint64_t seed, int threads) {
  sample.validate();
  require(!candidates.empty(), "cross-validation: empty configuration grid");
  const auto fold = fold_assignment(sample.size(), folds, seed);
  std::vector<PartialSample> trains;
  std::vector<PartialSample> tests;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> tr;
    std::vector<std::size_t> te;
    for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? te : tr).push_back(i);
    trains.push_back(sample.subset(tr));
    tests.push_back(sample.subset(te));
  }

  CvResult res;
  const std::size_t nf = static_cast<std::size_t>(folds);
  res.mean_scores.resize(candidates.size());
  res.fold_scores.assign(candidates.size(), std::vector<double>(nf));
  parallel_for(candidates.size() * nf, threads, [&](std::size_t job) {
    const std::size_t c = job / nf;
    const std::size_t f = job % nf;
    res.fold_scores[c][f] = evaluate(trains[f], tests[f], c, static_cast<int>(f));
  });
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double sum = 0.0;
    for (double s : res.fold_scores[c]) sum += s;
    res.mean_scores[c] = sum / folds;
  }

  auto key = [&](std::size_t c) {
    const double s = res.mean_scores[c];
    return std::isnan(s) ? std::numeric_limits<double>::infinity() : s;
  };
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const double a = key(c);
    const double b = key(res.best);
    if (a < b || (a == b && candidates[c].lambda > candidates[res.best].lambda)) res.best = c;
  }
  return res;
}

}  // namespace kpl
