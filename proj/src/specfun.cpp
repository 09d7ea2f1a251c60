#include "qplane/specfun.hpp"

#include "qplane/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace qp {

namespace {

constexpr double pi = 3.14159265358979323846;

// Extended precision for the ascending series, whose terms grow like e^x
// before cancelling down to O(1).
using wide = __float128;

double sinpi(double v) {
  double n = std::round(v);
  double r = v - n;
  double s = std::sin(pi * r);
  return (std::fmod(std::fabs(n), 2.0) == 1.0) ? -s : s;
}

double cospi(double v) {
  double n = std::round(v);
  double r = v - n;
  double c = std::cos(pi * r);
  return (std::fmod(std::fabs(n), 2.0) == 1.0) ? -c : c;
}

struct JSeries {
  double j, dj;
};

// J_v(x) and J'_v(x) for real v (not a negative integer) by the ascending series.
JSeries j_series(double v, double x, int max_terms) {
  const double prefactor = std::pow(0.5 * x, v) / std::tgamma(v + 1.0);
  const wide q = wide(0.25) * wide(x) * wide(x);
  wide term = 1;
  wide sum = 1;
  wide dsum = wide(v);
  int m = 0;
  for (;; ++m) {
    if (m >= max_terms)
      throw Error(ErrorKind::convergence,
                  "bessel series did not converge for order " + std::to_string(v) +
                      " at x = " + std::to_string(x));
    term = -term * q / (wide(m + 1) * (wide(m + 1) + wide(v)));
    sum += term;
    dsum += term * (wide(2 * (m + 1)) + wide(v));
    wide at = term < 0 ? -term : term;
    wide as = sum < 0 ? -sum : sum;
    if (m + 1 > 0.5 * x && at < wide(1e-32) * (as + wide(1e-300)))
      break;
  }
  return {prefactor * double(sum), prefactor * double(dsum) / x};
}

BesselValues jy_direct(double v, double x, int max_terms) {
  JSeries jp = j_series(v, x, max_terms);
  JSeries jm = j_series(-v, x, max_terms);
  double s = sinpi(v), c = cospi(v);
  BesselValues out;
  out.j = jp.j;
  out.dj = jp.dj;
  out.y = (jp.j * c - jm.j) / s;
  out.dy = (jp.dj * c - jm.dj) / s;
  return out;
}

} // namespace

void SpecialFunctionConfig::validate() const {
  if (series_terms_max < 20)
    throw Error(ErrorKind::config, "series_terms_max must be >= 20");
  if (!(asymptotic_switch_x > 0))
    throw Error(ErrorKind::config, "asymptotic_switch_x must be positive");
  if (!(near_integer_order_tol > 0 && near_integer_order_tol <= 1e-3))
    throw Error(ErrorKind::config, "near_integer_order_tol must lie in (0, 1e-3]");
}

cplx gamma(cplx z) {
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()))
    throw Error(ErrorKind::domain, "gamma pole at nonpositive integer");
  if (z.real() < 0.5) {
    // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
    return pi / (std::sin(pi * z) * gamma(1.0 - z));
  }
  static const std::array<double, 9> c = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const double g = 7.0;
  cplx zz = z - 1.0;
  cplx a = c[0];
  for (int i = 1; i < 9; ++i)
    a += c[i] / (zz + double(i));
  cplx t = zz + g + 0.5;
  return std::sqrt(2.0 * pi) * std::pow(t, zz + 0.5) * std::exp(-t) * a;
}

double asymptotic_crossover(double order, const SpecialFunctionConfig& cfg) {
  return std::max(cfg.asymptotic_switch_x, 0.5 * order * order);
}

BesselValues bessel_jy_series(double order, double x, const SpecialFunctionConfig& cfg) {
  if (!(x > 0))
    throw Error(ErrorKind::domain, "bessel argument must be positive");
  const double tol = cfg.near_integer_order_tol;
  if (std::fabs(sinpi(order)) >= tol)
    return jy_direct(order, x, cfg.series_terms_max);

  // Near an integer the connection formula for Y is 0/0. Interpolate Y in the
  // order from four nodes placed symmetrically about the integer, outside the
  // guard band; J itself has no difficulty there.
  const double n = std::round(order);
  // Smallest spacing whose nodes all sit outside the band |sin(pi v)| < tol.
  const double h = 1.01 * std::asin(tol) / pi;
  const std::array<double, 4> nodes = {n - 2 * h, n - h, n + h, n + 2 * h};
  std::array<BesselValues, 4> vals;
  for (int i = 0; i < 4; ++i)
    vals[i] = jy_direct(nodes[i], x, cfg.series_terms_max);
  BesselValues out{};
  for (int i = 0; i < 4; ++i) {
    double w = 1.0;
    for (int k = 0; k < 4; ++k)
      if (k != i)
        w *= (order - nodes[k]) / (nodes[i] - nodes[k]);
    out.y += w * vals[i].y;
    out.dy += w * vals[i].dy;
  }
  JSeries jp = j_series(order, x, cfg.series_terms_max);
  out.j = jp.j;
  out.dj = jp.dj;
  return out;
}

BesselValues bessel_jy_asymptotic(double order, double x, const SpecialFunctionConfig& cfg) {
  if (!(x > 0))
    throw Error(ErrorKind::domain, "bessel argument must be positive");
  const double mu = 4.0 * order * order;
  cplx sum = 1.0, dsum = 0.0;
  cplx ik = 1.0;
  double a = 1.0;
  double prev = 1e300;
  double last = 0.0;
  for (int k = 1; k <= cfg.series_terms_max; ++k) {
    double odd = 2.0 * k - 1.0;
    a *= (mu - odd * odd) / (8.0 * k);
    ik *= cplx(0.0, 1.0);
    double xk = std::pow(x, -k);
    double mag = std::fabs(a) * xk;
    if (mag == 0.0) { // half-integer order: the expansion terminates
      last = 0.0;
      break;
    }
    if (mag > prev)
      break;
    sum += ik * a * xk;
    dsum += -double(k) * ik * a * xk / x;
    prev = mag;
    last = mag;
    if (mag < 1e-17 * std::abs(sum))
      break;
  }
  if (last > 1e-11)
    throw Error(ErrorKind::convergence,
                "asymptotic expansion cannot reach tolerance for order " +
                    std::to_string(order) + " at x = " + std::to_string(x));
  const double omega = x - 0.5 * pi * order - 0.25 * pi;
  const cplx phase = std::polar(std::sqrt(2.0 / (pi * x)), omega);
  cplx h = phase * sum;
  cplx dh = phase * ((cplx(0.0, 1.0) - 0.5 / x) * sum + dsum);
  return {h.real(), h.imag(), dh.real(), dh.imag()};
}

BesselValues bessel_jy(double order, double x, const SpecialFunctionConfig& cfg) {
  if (!(x > 0))
    throw Error(ErrorKind::domain, "bessel argument must be positive");
  if (!std::isfinite(order))
    throw Error(ErrorKind::domain, "bessel order must be finite");
  if (x >= asymptotic_crossover(order, cfg))
    return bessel_jy_asymptotic(order, x, cfg);
  return bessel_jy_series(order, x, cfg);
}

double bessel_j(double order, double x, const SpecialFunctionConfig& cfg) {
  return bessel_jy(order, x, cfg).j;
}

double bessel_y(double order, double x, const SpecialFunctionConfig& cfg) {
  return bessel_jy(order, x, cfg).y;
}

cplx hankel1(double order, double x, const SpecialFunctionConfig& cfg) {
  if (order < 0)
    throw Error(ErrorKind::domain, "hankel1 order must be nonnegative");
  BesselValues b = bessel_jy(order, x, cfg);
  return {b.j, b.y};
}

void hankel1_with_derivative(double order, double x, cplx& h, cplx& dh,
                             const SpecialFunctionConfig& cfg) {
  if (order < 0)
    throw Error(ErrorKind::domain, "hankel1 order must be nonnegative");
  BesselValues b = bessel_jy(order, x, cfg);
  h = {b.j, b.y};
  dh = {b.dj, b.dy};
}

} // namespace qp
