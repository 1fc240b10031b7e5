#pragma once

#include <vector>

#include "eclosure/core.hpp"

namespace eclosure {

// Lower real branch of the Lambert W function on [-1/e, 0).
double lambert_w_minus1(double x);

// l_alpha = -W_{-1}(-alpha/e); the Su calibrator inflates p-values by this factor.
struct SuConstants {
  double alpha;
  double ell;

  explicit SuConstants(double alpha);
};

// (l_alpha p v alpha)^{-1}
double su_calibrate(double p, double alpha);
double su_calibrate(double p, const SuConstants& su);

// h[k] = 1 + 1/2 + ... + 1/k, with h[0] = 0.
class HarmonicTable {
 public:
  explicit HarmonicTable(int m);
  double operator[](int k) const { return h_[k]; }
  int size() const { return static_cast<int>(h_.size()) - 1; }

 private:
  std::vector<double> h_;
};

double harmonic(int k);

// Ceiling that returns n for arguments within relative 1e-12 of an integer n.
double snapped_ceil(double x);

// k 1{h_k p <= alpha} / (alpha (ceil(k h_k p / alpha) v 1))
double by_calibrate(double p, int k, double alpha);
double by_calibrate(double p, int k, double alpha, double h_k);

// min_i |S| p_(i:S) / i, capped at 1.
double simes_p(const ValueVector& p_values, Subset s);
double simes_p(const std::vector<double>& p_values, Subset s);

}  // namespace eclosure
