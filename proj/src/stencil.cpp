#include "qplane/stencil.hpp"

#include "qplane/error.hpp"

#include <algorithm>
#include <cmath>

namespace qp {

namespace {

const cplx I(0.0, 1.0);

// Fractional part of k * phi: a low-discrepancy sequence in [0, 1).
double golden(int k, double phi = 0.6180339887498949) {
  double x = k * phi;
  return x - std::floor(x);
}

double rel(cplx x, double scale) { return std::abs(x) / std::max(scale, 1e-300); }

} // namespace

// --------------------------------------------------------------------------

UpperAsymptoticBasis::UpperAsymptoticBasis(const MinimalOdeParams& p, int max_terms)
    : p_(p), max_terms_(max_terms) {
  p_.validate();
  double sq = std::sqrt(p_.b + 1.0 / 16.0);
  kappa_ = {I * (0.25 + sq), I * (0.25 - sq)};
  for (int j = 0; j < 2; ++j)
    coef_[j] = {1.0};
}

void UpperAsymptoticBasis::extend(int j, int n) const {
  auto& c = coef_[j];
  const cplx k = kappa_[j];
  while (int(c.size()) <= n) {
    int m = int(c.size());
    cplx denom = double(m) * (2.0 * I * k - double(m) + 0.5);
    if (std::abs(denom) < 1e-12)
      throw Error(ErrorKind::degenerate,
                  "asymptotic basis: resonant exponents (2 sqrt(b + 1/16) is an integer)");
    cplx rhs = -2.0 * p_.a * c[m - 1];
    if (m >= 2) {
      cplx s = k + I * double(m - 2);
      rhs -= c[m - 2] * (s * s + 0.5 * I * s + p_.b);
    }
    c.push_back(rhs / denom);
  }
}

SolutionState UpperAsymptoticBasis::state(int j, cplx beta) const {
  if (j < 0 || j > 1)
    throw Error(ErrorKind::domain, "asymptotic basis index must be 0 or 1");
  if (!(beta.imag() > 0.0))
    throw Error(ErrorKind::domain, "asymptotic basis needs Im beta > 0");
  const cplx w = std::exp(I * beta);
  const cplx k = kappa_[j];
  cplx sum = 0.0, dsum = 0.0, wl = 1.0;
  int quiet = 0;
  for (int l = 0;; ++l) {
    if (l >= max_terms_)
      throw Error(ErrorKind::convergence, "asymptotic basis series did not converge");
    extend(j, l);
    cplx t = coef_[j][l] * wl;
    sum += t;
    dsum += t * (k + I * double(l));
    quiet = std::abs(t) * (1.0 + l) <= 1e-17 * std::abs(sum) ? quiet + 1 : 0;
    if (quiet >= 4)
      break;
    wl *= w;
  }
  cplx e = std::exp(k * beta);
  return {beta, e * sum, e * dsum};
}

// --------------------------------------------------------------------------

namespace {

// Vertical descent from `top` to `z`; refinement > 1 bulges the polyline
// sideways without changing its homotopy class.
void append_descent(BetaPath& path, cplx top, cplx z, int refinement) {
  if (std::abs(z - top) < 1e-12)
    return;
  for (int k = 1; k <= refinement; ++k) {
    double t = double(k) / refinement;
    cplx w = top + t * (z - top);
    if (k < refinement) {
      w += 0.2 * std::sin(pi * t);
      if (std::fabs(w.imag()) < 0.05) // keep vertices off the real axis
        w += cplx(0.0, 0.1);
    }
    path.append(w);
  }
}

SolutionState vertical_member(const CutStripFunction& T, cplx z, int refinement) {
  if (z.imag() >= 0.0)
    return T.state(z);
  cplx top(z.real(), 1.0);
  BetaPath path;
  path.append(top);
  append_descent(path, top, z, refinement);
  return T.eval_along(path);
}

} // namespace

std::array<SolutionState, 3> stencil_triplet(const CutStripFunction& T, cplx beta, int refinement) {
  if (refinement < 1)
    throw Error(ErrorKind::config, "path refinement must be at least 1");
  if (std::fabs(beta.real() + pi) > 1e-9)
    throw Error(ErrorKind::domain, "stencil triplet needs Re beta = -pi");
  std::array<SolutionState, 3> out;
  out[0] = vertical_member(T, beta, refinement);
  out[1] = vertical_member(T, beta + 2.0 * pi, refinement);
  // Third member: bypass 5pi/2 the other way (one closed loop around it),
  // then descend to the target and change the sign of the term.
  cplx z = beta + 4.0 * pi;
  cplx top(3.0 * pi, 1.0);
  BetaPath path;
  path.append(top);
  path.append({3.0 * pi, -1.0});
  path.append({2.0 * pi, -1.0});
  path.append({2.0 * pi, 1.0});
  path.append(top);
  append_descent(path, top, z, refinement);
  SolutionState s = T.eval_along(path);
  out[2] = {s.beta, -s.value, -s.derivative};
  return out;
}

double stencil_1d_residual(const CutStripFunction& T, cplx lambda, cplx beta, int refinement) {
  auto s = stencil_triplet(T, beta, refinement);
  cplx lhs = s[2].value - s[0].value + lambda * s[1].value;
  double scale = std::max({std::abs(s[0].value), std::abs(s[1].value), std::abs(s[2].value)});
  return rel(lhs, scale);
}

std::vector<cplx> default_stencil_samples(int n) {
  if (n < 2)
    throw Error(ErrorKind::config, "need at least two stencil samples");
  std::vector<cplx> out;
  int up = (n + 1) / 2, down = n - up;
  for (int k = 0; k < up; ++k)
    out.push_back({-pi, 0.3 + 2.7 * k / std::max(1, up - 1)});
  for (int k = 0; k < down; ++k)
    out.push_back({-pi, -(0.3 + 2.7 * k / std::max(1, down - 1))});
  return out;
}

CheckReport verify_stencil_residual(const MinimalOdeParams& p, const std::vector<cplx>& samples,
                                    int refinement, double tol) {
  CutStripFunction T(p);
  cplx lambda = derive_constants(p.b).lambda;
  CheckReport rep{"stencil_1d", 0.0, tol, false, {}};
  for (cplx s : samples) {
    double r = stencil_1d_residual(T, lambda, s, refinement);
    rep.samples.push_back({s, r});
    rep.residual = std::max(rep.residual, r);
  }
  rep.pass = rep.residual < tol;
  return rep;
}

// --------------------------------------------------------------------------

cplx build_W_hat(const CutStripFunction& T, cplx alpha1, cplx alpha2) {
  return T(alpha1 + alpha2) * T(alpha1 - alpha2 + pi);
}

std::vector<std::array<cplx, 2>> default_m_minus_samples(int n) {
  std::vector<std::array<cplx, 2>> out;
  for (int k = 0; k < n; ++k) {
    double y1 = 0.4 + 1.6 * golden(k + 1);
    double d = 0.3 + 0.9 * golden(k + 1, 0.41421356237309515);
    double y2 = (k % 2 == 0) ? y1 + d : std::max(0.1, y1 - d);
    if (k % 2 == 1 && y1 - y2 < 0.3)
      y1 = y2 + 0.3;
    out.push_back({cplx(-pi, y1), cplx(0.0, -y2)});
  }
  return out;
}

CheckReport verify_stencil_2d(const MinimalOdeParams& p,
                              const std::vector<std::array<cplx, 2>>& samples, double tol) {
  CutStripFunction T(p);
  CheckReport rep{"stencil_2d", 0.0, tol, false, {}};
  for (const auto& s : samples) {
    cplx a1 = s[0], a2 = s[1];
    cplx b1 = a1 + a2, b2 = a1 - a2 + pi;
    auto t1 = stencil_triplet(T, b1);            // T(b1), T(b1 + 2pi), T(b1 + 4pi)
    // T(b2 - 2pi), T(b2), T(b2 + 2pi): no square-root point lies between
    // these members, so the plain connection applies.
    std::array<SolutionState, 3> t2;
    for (int m = 0; m < 3; ++m)
      t2[m] = vertical_member(T, b2 + 2.0 * pi * (m - 1), 1);
    cplx w00 = t1[0].value * t2[1].value;        // W(a1, a2)
    cplx w11 = t1[2].value * t2[1].value;        // W(a1 + 2pi, a2 + 2pi)
    cplx w10 = t1[1].value * t2[2].value;        // W(a1 + 2pi, a2)
    cplx w01 = t1[1].value * t2[0].value;        // W(a1, a2 + 2pi)
    cplx lhs = w11 - w00 - w10 + w01;
    double scale = std::max({std::abs(w00), std::abs(w11), std::abs(w10), std::abs(w01)});
    double r = rel(lhs, scale);
    rep.samples.push_back({a1 + a2, r});
    rep.residual = std::max(rep.residual, r);
  }
  rep.pass = rep.residual < tol;
  return rep;
}

// --------------------------------------------------------------------------

std::vector<cplx> default_symmetry_samples(int n) {
  std::vector<cplx> out;
  for (int k = 0; k < n; ++k) {
    double x = -0.5 * pi + 0.4 + (3.0 * pi - 0.8) * golden(k + 1);
    double y = 0.35 + 2.65 * golden(k + 1, 0.41421356237309515);
    out.push_back({x, k % 2 == 0 ? y : -y});
  }
  return out;
}

SymmetryReport symmetry_check(const CutStripFunction& T, const std::vector<cplx>& samples) {
  SymmetryReport rep;
  rep.q = T.regular_value_at(1.5 * pi);
  for (cplx b : samples) {
    cplx t = T(b), s = T(2.0 * pi - b);
    double scale = std::max(1.0, std::abs(t));
    rep.max_residual = std::max(rep.max_residual, std::abs(s - rep.q * t) / scale);
    rep.max_residual_q_one = std::max(rep.max_residual_q_one, std::abs(s - t) / scale);
  }
  rep.samples = int(samples.size());
  return rep;
}

WSymmetryReport w_symmetry_check(const CutStripFunction& T, cplx q, int n) {
  WSymmetryReport rep;
  for (int k = 0; k < n; ++k) {
    double y1 = 0.3 + 2.2 * golden(k + 1), y2 = 0.3 + 2.2 * golden(k + 1, 0.41421356237309515);
    cplx a1 = (k % 2 == 0) ? cplx(0.0, y1) : cplx(pi, -y1);
    cplx a2 = ((k / 2) % 2 == 0) ? cplx(0.0, y2) : cplx(pi, -y2);
    cplx w = build_W_hat(T, a1, a2);
    double scale = std::max(std::abs(w), 1e-300);
    rep.reflection_residual =
        std::max(rep.reflection_residual, std::abs(build_W_hat(T, pi - a1, a2) - w) / scale);
    rep.swap_residual = std::max(rep.swap_residual, std::abs(build_W_hat(T, a2, a1) - q * w) / scale);
  }
  rep.samples = n;
  return rep;
}

// --------------------------------------------------------------------------

LoopReport loop_sign_check(const CutStripFunction& T, double center, double radius, int vertices) {
  if (vertices < 8 || !(radius > 0.0) || radius > 0.6 * pi)
    throw Error(ErrorKind::config, "loop needs at least 8 vertices and a radius in (0, 0.6 pi]");
  BetaPath path;
  for (int k = 0; k <= vertices; ++k)
    path.append(center + radius * std::exp(I * (0.5 * pi + 2.0 * pi * k / vertices)));
  SolutionState start = T.state(path.waypoints.front());
  SolutionState end = T.eval_along(path);
  const cplx cut = -I; // start point lies straight above the centre
  LoopReport rep;
  rep.before = T.local_coefficients(start, center, cut);
  rep.after = T.local_coefficients(end, center, cut);
  double scale = std::max(std::abs(rep.before(0)), std::abs(rep.before(1)));
  rep.residual = std::max(std::abs(rep.after(0) - rep.before(0)),
                          std::abs(rep.after(1) + rep.before(1))) /
                 std::max(scale, 1e-300);
  return rep;
}

// --------------------------------------------------------------------------

std::vector<cplx> default_wronskian_samples(int n) {
  std::vector<cplx> out;
  for (int k = 0; k < n; ++k)
    out.push_back({-pi + 0.2 + (2.0 * pi - 0.4) * golden(k + 1),
                   0.5 + 2.5 * golden(k + 1, 0.41421356237309515)});
  return out;
}

WronskianReport wronskian_check(const CutStripFunction& T, const std::vector<cplx>& samples) {
  for (cplx s : samples)
    if (!(s.imag() > 0.0))
      throw Error(ErrorKind::domain, "Wronskian samples must lie in the upper half-plane");
  return wronskian_diagnostics(T.params(), [&](cplx b) { return T.state(b); }, samples);
}

// --------------------------------------------------------------------------

cplx edge_j(const CutStripFunction& T, cplx alpha1, cplx alpha2, double eps) {
  cplx a1 = alpha1 + eps;
  return T(a1 + alpha2) * T(pi - a1 + alpha2) -
         T(a1 + alpha2 + 2.0 * pi - 2.0 * eps) * T(-pi - a1 + alpha2 + 2.0 * eps);
}

EdgeDecayReport edge_decay_check(const CutStripFunction& T, const EdgeDecayConfig& cfg) {
  if (cfg.points < 3 || !(cfg.y_max > cfg.y_min) || !(cfg.eps > 0.0) || cfg.eps > 0.1)
    throw Error(ErrorKind::config, "edge decay: need >= 3 points, y_max > y_min, eps in (0, 0.1]");
  EdgeDecayReport rep;
  for (int k = 0; k < cfg.points; ++k) {
    double y = cfg.y_min + (cfg.y_max - cfg.y_min) * k / (cfg.points - 1);
    cplx a2(-0.5 * pi, y);
    cplx j1 = edge_j(T, cfg.alpha1, a2, cfg.eps);
    cplx j2 = edge_j(T, cfg.alpha1, a2, 0.5 * cfg.eps);
    double aj = std::abs(2.0 * j2 - j1);
    if (aj < 1e-300)
      throw Error(ErrorKind::convergence, "edge decay: |J| underflow");
    rep.y.push_back(y);
    rep.abs_j.push_back(aj);
  }
  const int n = cfg.points;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < n; ++k) {
    double x = rep.y[k], v = std::log(rep.abs_j[k]);
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
  }
  rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  rep.intercept = (sy - rep.slope * sx) / n;
  rep.monotone = true;
  for (int k = 0; k < n; ++k) {
    rep.max_fit_deviation = std::max(
        rep.max_fit_deviation, std::fabs(std::log(rep.abs_j[k]) - rep.intercept - rep.slope * rep.y[k]));
    if (k > 0 && !(rep.abs_j[k] < rep.abs_j[k - 1]))
      rep.monotone = false;
  }
  return rep;
}

double single_mode_cancellation(const UpperAsymptoticBasis& F, int j, cplx alpha1, cplx alpha2) {
  cplx t1 = F(j, alpha1 + alpha2) * F(j, pi - alpha1 + alpha2);
  cplx t2 = F(j, alpha1 + alpha2 + 2.0 * pi) * F(j, -pi - alpha1 + alpha2);
  return rel(t1 - t2, std::max(std::abs(t1), std::abs(t2)));
}

double growth_exponent(const CutStripFunction& T, double re, double y_lo, double y_hi, int points) {
  if (points < 2 || !(y_hi > y_lo))
    throw Error(ErrorKind::config, "growth fit needs at least two points on a non-empty range");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < points; ++k) {
    double y = y_lo + (y_hi - y_lo) * k / (points - 1);
    double v = std::log(std::abs(T(cplx(re, y))));
    sx += y;
    sy += v;
    sxx += y * y;
    sxy += y * v;
  }
  return (points * sxy - sx * sy) / (points * sxx - sx * sx);
}

} // namespace qp
