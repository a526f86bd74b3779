#pragma once

#include <vector>

namespace kpl {

/// Daubechies scaling function and mother wavelet with `vanishing_moments`
/// vanishing moments (1 = Haar), tabulated on a dyadic grid by the cascade
/// algorithm and evaluated by linear interpolation. Both are supported on
/// [0, 2N - 1] and are right-continuous at jumps.
class DaubechiesWavelet {
 public:
  explicit DaubechiesWavelet(int vanishing_moments, int depth = 12);

  /// Reconstruction low-pass filter h, normalized so that sum h = sqrt(2).
  static std::vector<double> lowpass(int vanishing_moments);

  [[nodiscard]] int vanishing_moments() const { return n_; }
  [[nodiscard]] int depth() const { return depth_; }
  /// Filter length L = 2N; both functions vanish outside [0, L - 1].
  [[nodiscard]] int filter_length() const { return 2 * n_; }
  [[nodiscard]] double support_end() const { return filter_length() - 1; }
  [[nodiscard]] const std::vector<double>& filter() const { return h_; }

  [[nodiscard]] double phi(double x) const { return interpolate(phi_, x); }
  [[nodiscard]] double psi(double x) const { return interpolate(psi_, x); }

 private:
  [[nodiscard]] double interpolate(const std::vector<double>& table, double x) const;

  int n_;
  int depth_;
  std::vector<double> h_;
  std::vector<double> phi_;  // phi(k / 2^depth), k = 0 .. (L-1) 2^depth
  std::vector<double> psi_;
};

}  // namespace kpl
