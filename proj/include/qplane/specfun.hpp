#pragma once

#include <complex>

namespace qp {

using cplx = std::complex<double>;

struct SpecialFunctionConfig {
  int series_terms_max = 400;
  // Lower bound of the ascending-series / asymptotic crossover; the actual
  // crossover for a given order is max(asymptotic_switch_x, 0.5*order^2).
  double asymptotic_switch_x = 20.0;
  double near_integer_order_tol = 1e-3;

  void validate() const;
};

// Gamma function of a complex argument (Lanczos, reflection for Re z < 1/2).
cplx gamma(cplx z);

struct BesselValues {
  double j, y;   // J_order(x), Y_order(x)
  double dj, dy; // derivatives with respect to x
};

// J and Y of real order at x > 0, with first derivatives.
BesselValues bessel_jy(double order, double x, const SpecialFunctionConfig& cfg = {});

double bessel_j(double order, double x, const SpecialFunctionConfig& cfg = {});
double bessel_y(double order, double x, const SpecialFunctionConfig& cfg = {});

// Hankel function of the first kind H1_order(x) = J + iY, order >= 0, x > 0.
cplx hankel1(double order, double x, const SpecialFunctionConfig& cfg = {});

// H1 and its x-derivative.
void hankel1_with_derivative(double order, double x, cplx& h, cplx& dh,
                             const SpecialFunctionConfig& cfg = {});

// Both regimes evaluated explicitly; exposed so the crossover can be tested.
BesselValues bessel_jy_series(double order, double x, const SpecialFunctionConfig& cfg = {});
BesselValues bessel_jy_asymptotic(double order, double x, const SpecialFunctionConfig& cfg = {});

double asymptotic_crossover(double order, const SpecialFunctionConfig& cfg = {});

} // namespace qp
