#include "kpl/dictionary.hpp"

#include "kpl/errors.hpp"
#include "kpl/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace kpl {

using detail::require;

std::string to_string(DictionaryFamily f) {
  switch (f) {
    case DictionaryFamily::fourier: return "fourier";
    case DictionaryFamily::wavelet: return "wavelet";
    case DictionaryFamily::rff: return "rff";
    case DictionaryFamily::learned: return "learned";
    case DictionaryFamily::custom: return "custom";
  }
  return "unknown";
}

DictionaryFamily dictionary_family_from_string(const std::string& s) {
  if (s == "fourier") return DictionaryFamily::fourier;
  if (s == "wavelet") return DictionaryFamily::wavelet;
  if (s == "rff") return DictionaryFamily::rff;
  if (s == "learned") return DictionaryFamily::learned;
  if (s == "custom") return DictionaryFamily::custom;
  throw InvalidArgument("unknown dictionary family '" + s + "'");
}

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

class FourierAtoms final : public AtomEvaluator {
 public:
  explicit FourierAtoms(int f) : f_(f) {}
  [[nodiscard]] Eigen::Index size() const override { return 2 * f_ + 1; }
  void evaluate(double theta, double* out) const override {
    out[0] = 1.0;
    for (int l = 1; l <= f_; ++l) {
      const double a = kTwoPi * l * theta;
      out[2 * l - 1] = kSqrt2 * std::cos(a);
      out[2 * l] = kSqrt2 * std::sin(a);
    }
  }

 private:
  int f_;
};

class RffAtoms final : public AtomEvaluator {
 public:
  explicit RffAtoms(std::vector<double> omega) : omega_(std::move(omega)) {}
  [[nodiscard]] Eigen::Index size() const override { return 2 * static_cast<Eigen::Index>(omega_.size()); }
  void evaluate(double theta, double* out) const override {
    const auto h = omega_.size();
    for (std::size_t j = 0; j < h; ++j) {
      out[j] = kSqrt2 * std::cos(omega_[j] * theta);
      out[h + j] = kSqrt2 * std::sin(omega_[j] * theta);
    }
  }

 private:
  std::vector<double> omega_;
};

class GridAtoms final : public AtomEvaluator {
 public:
  GridAtoms(Eigen::VectorXd grid, Eigen::MatrixXd atoms) : grid_(std::move(grid)), atoms_(std::move(atoms)) {}
  [[nodiscard]] Eigen::Index size() const override { return atoms_.cols(); }
  void evaluate(double theta, double* out) const override {
    const auto m = grid_.size();
    Eigen::Index lo = 0;
    double t = 0.0;
    if (m == 1 || theta <= grid_[0]) {
      lo = 0;
    } else if (theta >= grid_[m - 1]) {
      lo = m - 1;
    } else {
      const double* b = grid_.data();
      lo = (std::upper_bound(b, b + m, theta) - b) - 1;
      t = (theta - grid_[lo]) / (grid_[lo + 1] - grid_[lo]);
    }
    for (Eigen::Index l = 0; l < atoms_.cols(); ++l) {
      out[l] = t == 0.0 ? atoms_(lo, l) : (1.0 - t) * atoms_(lo, l) + t * atoms_(lo + 1, l);
    }
  }
  [[nodiscard]] const Eigen::VectorXd& grid() const { return grid_; }
  [[nodiscard]] const Eigen::MatrixXd& atoms() const { return atoms_; }

 private:
  Eigen::VectorXd grid_;
  Eigen::MatrixXd atoms_;
};

class CallableAtoms final : public AtomEvaluator {
 public:
  explicit CallableAtoms(std::vector<std::function<double(double)>> f) : f_(std::move(f)) {}
  [[nodiscard]] Eigen::Index size() const override { return static_cast<Eigen::Index>(f_.size()); }
  void evaluate(double theta, double* out) const override {
    for (std::size_t l = 0; l < f_.size(); ++l) out[l] = f_[l](theta);
  }

 private:
  std::vector<std::function<double(double)>> f_;
};

class WaveletAtoms final : public AtomEvaluator {
 public:
  struct Atom {
    bool scaling;
    int dilation;
    int shift;
    double scale = 1.0;  // L2 normalization
  };

  WaveletAtoms(int vanishing_moments, int levels) : w_(vanishing_moments) {
    const int L = w_.filter_length();
    for (int k = -(L - 2); k <= 0; ++k) atoms_.push_back({true, 0, k});
    for (int j = 0; j <= levels; ++j) {
      for (int k = -(L - 2); k <= (1 << j) - 1; ++k) atoms_.push_back({false, j, k});
    }
    // Normalize on a fine trapezoidal grid, finer than the cascade table at every dilation.
    const auto q = Quadrature::uniform((Eigen::Index{1} << std::min(levels + 13, 18)) + 1);
    Eigen::VectorXd buf(size());
    Eigen::VectorXd norms = Eigen::VectorXd::Zero(size());
    for (Eigen::Index p = 0; p < q.size(); ++p) {
      evaluate(q.nodes()[p], buf.data());
      norms += q.weights()[p] * buf.cwiseAbs2();
    }
    for (std::size_t a = 0; a < atoms_.size(); ++a) {
      const double nrm = std::sqrt(norms[static_cast<Eigen::Index>(a)]);
      if (!(nrm > 0.0)) throw NumericError("make_wavelet: atom with zero norm on [0, 1]");
      atoms_[a].scale = 1.0 / nrm;
    }
  }

  [[nodiscard]] Eigen::Index size() const override { return static_cast<Eigen::Index>(atoms_.size()); }

  void evaluate(double theta, double* out) const override {
    // Endpoint values are taken as limits from inside the interval.
    constexpr double eps = 1e-12;
    const double t = std::clamp(theta, eps, 1.0 - eps);
    for (std::size_t a = 0; a < atoms_.size(); ++a) out[a] = atoms_[a].scale * folded(atoms_[a], t);
  }

  [[nodiscard]] std::vector<int> scale_index() const {
    std::vector<int> s;
    for (const auto& a : atoms_) s.push_back(a.scaling ? 0 : a.dilation + 1);
    return s;
  }

 private:
  [[nodiscard]] double raw(const Atom& a, double x) const {
    const double f = std::ldexp(1.0, a.dilation);
    const double y = f * x - a.shift;
    return std::sqrt(f) * (a.scaling ? w_.phi(y) : w_.psi(y));
  }

  // Sum over the preimages theta + 2p and 2p - theta of the symmetric,
  // 2-periodic extension of [0, 1]: the atom as seen by an extended signal.
  [[nodiscard]] double folded(const Atom& a, double theta) const {
    const double f = std::ldexp(1.0, a.dilation);
    const double lo = a.shift / f;
    const double hi = (a.shift + w_.support_end()) / f;
    double acc = 0.0;
    for (long p = static_cast<long>(std::ceil((lo - theta) / 2)); p <= static_cast<long>(std::floor((hi - theta) / 2)); ++p)
      acc += raw(a, theta + 2.0 * p);
    for (long p = static_cast<long>(std::ceil((lo + theta) / 2)); p <= static_cast<long>(std::floor((hi + theta) / 2)); ++p)
      acc += raw(a, 2.0 * p - theta);
    return acc;
  }

  DaubechiesWavelet w_;
  std::vector<Atom> atoms_;
};

}  // namespace

Dictionary::Dictionary(DictionaryFamily family, std::shared_ptr<const AtomEvaluator> evaluator,
                       std::map<std::string, double> parameters, std::optional<std::vector<int>> scale_index)
    : family_(family),
      evaluator_(std::move(evaluator)),
      parameters_(std::move(parameters)),
      scale_index_(std::move(scale_index)) {
  require(evaluator_ != nullptr && evaluator_->size() >= 1, "Dictionary: needs at least one atom");
  if (scale_index_) require(static_cast<Eigen::Index>(scale_index_->size()) == size(), "Dictionary: scale_index size");
}

Eigen::VectorXd Dictionary::evaluate(double theta) const {
  Eigen::VectorXd out(size());
  evaluator_->evaluate(theta, out.data());
  return out;
}

Eigen::MatrixXd Dictionary::evaluate(const Eigen::VectorXd& thetas) const {
  // Row-major scratch so each location writes a contiguous row.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a(thetas.size(), size());
  for (Eigen::Index p = 0; p < thetas.size(); ++p) evaluator_->evaluate(thetas[p], a.row(p).data());
  return a;
}

const Eigen::VectorXd* Dictionary::grid() const {
  const auto* g = dynamic_cast<const GridAtoms*>(evaluator_.get());
  return g ? &g->grid() : nullptr;
}

const Eigen::MatrixXd* Dictionary::grid_atoms() const {
  const auto* g = dynamic_cast<const GridAtoms*>(evaluator_.get());
  return g ? &g->atoms() : nullptr;
}

Dictionary make_fourier(int frequencies) {
  require(frequencies >= 1, "make_fourier: need at least one frequency");
  return {DictionaryFamily::fourier, std::make_shared<FourierAtoms>(frequencies),
          {{"frequencies", static_cast<double>(frequencies)}}};
}

Dictionary make_wavelet(int vanishing_moments, int levels) {
  require(vanishing_moments >= 1 && vanishing_moments <= 5, "make_wavelet: vanishing_moments must be in 1..5");
  require(levels >= 0 && levels <= 10, "make_wavelet: levels must be in 0..10");
  auto atoms = std::make_shared<WaveletAtoms>(vanishing_moments, levels);
  auto scales = atoms->scale_index();
  return {DictionaryFamily::wavelet,
          std::move(atoms),
          {{"vanishing_moments", static_cast<double>(vanishing_moments)}, {"levels", static_cast<double>(levels)}},
          std::move(scales)};
}

Dictionary make_rff(double lengthscale, int d, std::uint64_t seed) {
  require(lengthscale > 0.0 && std::isfinite(lengthscale), "make_rff: lengthscale must be > 0");
  require(d >= 2 && d % 2 == 0, "make_rff: d must be a positive even integer");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / lengthscale);
  std::vector<double> omega(static_cast<std::size_t>(d / 2));
  for (auto& w : omega) w = normal(rng);
  return {DictionaryFamily::rff,
          std::make_shared<RffAtoms>(std::move(omega)),
          {{"lengthscale", lengthscale}, {"d", static_cast<double>(d)}, {"seed", static_cast<double>(seed)}}};
}

Dictionary make_learned(Eigen::VectorXd grid, Eigen::MatrixXd atoms) {
  require(grid.size() >= 1 && grid.size() == atoms.rows(), "make_learned: grid/atom row mismatch");
  require(atoms.cols() >= 1, "make_learned: needs at least one atom");
  require(atoms.allFinite(), "make_learned: non-finite atom values");
  for (Eigen::Index p = 1; p < grid.size(); ++p) require(grid[p] > grid[p - 1], "make_learned: grid not increasing");
  return {DictionaryFamily::learned, std::make_shared<GridAtoms>(std::move(grid), std::move(atoms))};
}

Dictionary make_custom(std::vector<std::function<double(double)>> atoms, std::optional<std::vector<int>> scale_index) {
  require(!atoms.empty(), "make_custom: needs at least one atom");
  return {DictionaryFamily::custom, std::make_shared<CallableAtoms>(std::move(atoms)), {}, std::move(scale_index)};
}

namespace detail {
Eigen::VectorXd weighted_projection(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& weights,
                                    const Eigen::VectorXd& values) {
  return atoms.transpose() * weights.cwiseProduct(values);
}
}  // namespace detail

GramMatrix gram(const Dictionary& dict, const Quadrature& q) {
  const Eigen::MatrixXd a = dict.evaluate(q.nodes());
  Eigen::MatrixXd g = a.transpose() * q.weights().asDiagonal() * a;
  g = 0.5 * (g + g.transpose()).eval();
  return {std::move(g), q};
}

SampledFunction apply_phi(const Dictionary& dict, const Eigen::VectorXd& u, const Eigen::VectorXd& targets) {
  require(u.size() == dict.size(), "apply_phi: coefficient length != d");
  return {targets, dict.evaluate(targets) * u};
}

Eigen::VectorXd adjoint_phi(const Dictionary& dict, const Eigen::VectorXd& g_on_nodes, const Quadrature& q) {
  require(g_on_nodes.size() == q.size(), "adjoint_phi: function not given on the quadrature nodes");
  return detail::weighted_projection(dict.evaluate(q.nodes()), q.weights(), g_on_nodes);
}

Eigen::VectorXd adjoint_phi(const Dictionary& dict, const SampledFunction& g, const Quadrature& q) {
  require(g.size() == q.size() && g.locations() == q.nodes(), "adjoint_phi: grid mismatch with quadrature");
  return adjoint_phi(dict, g.values(), q);
}

Eigen::MatrixXd estimate_nu(const Dictionary& dict, const PartialSample& sample) {
  sample.validate();
  Eigen::MatrixXd nu(dict.size(), static_cast<Eigen::Index>(sample.size()));
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto& y = sample.outputs[i];
    require(y.size() >= 1, "estimate_nu: empty output function");
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(y.size(), 1.0 / static_cast<double>(y.size()));
    nu.col(static_cast<Eigen::Index>(i)) = detail::weighted_projection(dict.evaluate(y.locations()), w, y.values());
  }
  return nu;
}

std::vector<Eigen::MatrixXd> estimate_gram_per_sample(const Dictionary& dict, const PartialSample& sample) {
  sample.validate();
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(sample.size());
  for (const auto& y : sample.outputs) {
    require(y.size() >= 1, "estimate_gram_per_sample: empty output function");
    const Eigen::MatrixXd a = dict.evaluate(y.locations());
    Eigen::MatrixXd g = (a.transpose() * a) / static_cast<double>(y.size());
    blocks.push_back(0.5 * (g + g.transpose()));
  }
  return blocks;
}

RieszBounds riesz_bounds(const Dictionary& dict, const Quadrature& q) {
  const auto g = gram(dict, q);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.matrix);
  if (es.info() != Eigen::Success) throw NumericError("riesz_bounds: eigendecomposition failed");
  const auto& ev = es.eigenvalues();
  const auto d = ev.size();
  return {std::sqrt(std::max(ev[0], 0.0)), std::sqrt(std::max(ev[d - 1], 0.0)), es.eigenvectors().col(0),
          es.eigenvectors().col(d - 1)};
}

}  // namespace kpl
