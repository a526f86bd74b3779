#include "kpl/wavelet.hpp"

#include "kpl/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace kpl {

std::vector<double> DaubechiesWavelet::lowpass(int vanishing_moments) {
  // Minimum-phase Daubechies filters from the spectral factorization of the
  // Daubechies polynomial, computed at 50-digit precision.
  switch (vanishing_moments) {
    case 1:
      return {0.70710678118654752440, 0.70710678118654752440};
    case 2:
      return {0.48296291314453414337, 0.83651630373780790558, 0.22414386804201338103, -0.12940952255126038117};
    case 3:
      return {0.33267055295008261600,  0.80689150931109257649,  0.45987750211849157010,
              -0.13501102001025458870, -0.08544127388202666169, 0.03522629188570953660};
    case 4:
      return {0.23037781330889650086,  0.71484657055291564709,  0.63088076792985890788,
              -0.02798376941685985421, -0.18703481171909308408, 0.03084138183556076363,
              0.03288301166688519974,  -0.01059740178506903211};
    case 5:
      return {0.16010239797419291448,  0.60382926979718967054,  0.72430852843777292773,
              0.13842814590132073151,  -0.24229488706638203186, -0.03224486958463837465,
              0.07757149384004571352,  -0.00624149021279827427, -0.01258075199908199947,
              0.00333572528547377128};
    default:
      throw InvalidArgument("Daubechies wavelets are supported for 1..5 vanishing moments");
  }
}

DaubechiesWavelet::DaubechiesWavelet(int vanishing_moments, int depth)
    : n_(vanishing_moments), depth_(depth), h_(lowpass(vanishing_moments)) {
  detail::require(depth >= 1 && depth <= 20, "DaubechiesWavelet: depth must be in [1, 20]");
  const int L = filter_length();
  const long scale = 1L << depth_;
  const long count = static_cast<long>(L - 1) * scale + 1;
  const double s2 = std::sqrt(2.0);
  phi_.assign(static_cast<std::size_t>(count), 0.0);

  // Values at the integers: phi(k) = sqrt2 sum_j h_{2k-j} phi(j), phi vanishing
  // at 0 and L-1 (except Haar, which is 1 on [0, 1)), normalized to sum to one.
  if (n_ == 1) {
    phi_[0] = 1.0;
  } else {
    const int inner = L - 2;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(inner + 1, inner);
    for (int k = 1; k <= inner; ++k) {
      for (int j = 1; j <= inner; ++j) {
        const int idx = 2 * k - j;
        if (idx >= 0 && idx < L) a(k - 1, j - 1) = s2 * h_[static_cast<std::size_t>(idx)];
      }
      a(k - 1, k - 1) -= 1.0;
    }
    a.row(inner).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(inner + 1);
    rhs[inner] = 1.0;
    const Eigen::VectorXd v = a.colPivHouseholderQr().solve(rhs);
    for (int k = 1; k <= inner; ++k) phi_[static_cast<std::size_t>(k * scale)] = v[k - 1];
  }

  auto phi_at = [&](long idx) -> double {
    return (idx < 0 || idx >= count) ? 0.0 : phi_[static_cast<std::size_t>(idx)];
  };
  // Cascade refinement: fill odd multiples of 2^-s from values at 2^-(s-1).
  for (int s = 1; s <= depth_; ++s) {
    const long step = 1L << (depth_ - s);
    for (long idx = step; idx < count; idx += 2 * step) {
      // x = idx / scale; phi(x) = sqrt2 sum_k h_k phi(2x - k)
      double acc = 0.0;
      for (int k = 0; k < L; ++k) acc += h_[static_cast<std::size_t>(k)] * phi_at(2 * idx - k * scale);
      phi_[static_cast<std::size_t>(idx)] = s2 * acc;
    }
  }

  // psi(x) = sqrt2 sum_k g_k phi(2x - k), g_k = (-1)^k h_{L-1-k}.
  psi_.assign(static_cast<std::size_t>(count), 0.0);
  for (long idx = 0; idx < count; ++idx) {
    double acc = 0.0;
    for (int k = 0; k < L; ++k) {
      const double g = ((k % 2) ? -1.0 : 1.0) * h_[static_cast<std::size_t>(L - 1 - k)];
      acc += g * phi_at(2 * idx - k * scale);
    }
    psi_[static_cast<std::size_t>(idx)] = s2 * acc;
  }
}

double DaubechiesWavelet::interpolate(const std::vector<double>& table, double x) const {
  if (!(x >= 0.0) || x > support_end()) return 0.0;
  const double pos = std::ldexp(x, depth_);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= table.size()) return table.back();
  const double t = pos - static_cast<double>(lo);
  return (1.0 - t) * table[lo] + t * table[lo + 1];
}

}  // namespace kpl
