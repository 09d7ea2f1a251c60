#include "qplane/fuchsian.hpp"

#include "qplane/error.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace qp {

namespace {

using ode_state = std::array<cplx, 2>;

bool near_zero_cos(cplx c) { return std::abs(c) < 1e-14; }

// Power series of A/B for B[0] = 1, truncated to n+1 terms.
std::vector<double> series_divide(const std::vector<double>& A, const std::vector<double>& B,
                                  int n) {
  std::vector<double> C(n + 1, 0.0);
  for (int k = 0; k <= n; ++k) {
    double acc = k < int(A.size()) ? A[k] : 0.0;
    for (int j = 1; j <= k && j < int(B.size()); ++j)
      acc -= B[j] * C[k - j];
    C[k] = acc;
  }
  return C;
}

bool is_singular_center(double c) {
  double n = (c - 0.5 * pi) / pi;
  return std::fabs(n - std::round(n)) < 1e-12;
}

// Real-axis crossing of segment p->q, if the segment crosses strictly.
bool real_axis_crossing(cplx p, cplx q, double& x) {
  if (!(p.imag() * q.imag() < 0.0))
    return false;
  double t = p.imag() / (p.imag() - q.imag());
  x = p.real() + t * (q.real() - p.real());
  return true;
}

bool on_cut(double x) { return x <= -0.5 * pi || x >= 2.5 * pi; }

double segment_distance(cplx p, cplx q, cplx c) {
  cplx d = q - p;
  double L2 = std::norm(d);
  if (L2 == 0.0)
    return std::abs(c - p);
  double t = std::clamp(((c - p) * std::conj(d)).real() / L2, 0.0, 1.0);
  return std::abs(p + t * d - c);
}

double segment_clearance(cplx p, cplx q) {
  double lo = std::min(p.real(), q.real()) - pi;
  double hi = std::max(p.real(), q.real()) + pi;
  double best = 1e300;
  for (double n = std::floor((lo - 0.5 * pi) / pi); 0.5 * pi + n * pi <= hi; n += 1.0)
    best = std::min(best, segment_distance(p, q, cplx(0.5 * pi + n * pi, 0.0)));
  return best;
}

} // namespace

void MinimalOdeParams::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw Error(ErrorKind::domain, "ODE parameters must be finite");
  if (!(b > -1.0 / 16.0))
    throw Error(ErrorKind::domain, "b must exceed -1/16 (principal branch of the exponents)");
}

std::pair<cplx, cplx> ode_coefficients(cplx beta, const MinimalOdeParams& p) {
  cplx c = std::cos(beta);
  if (near_zero_cos(c))
    throw Error(ErrorKind::singular_point, "ODE coefficients evaluated at a singular point");
  cplx s = std::sin(beta);
  return {-0.5 * s / c, p.a / c + p.b};
}

double nearest_singular(cplx beta) {
  return 0.5 * pi + pi * std::round((beta.real() - 0.5 * pi) / pi);
}

double distance_to_singular(cplx beta) { return std::abs(beta - nearest_singular(beta)); }

FrobeniusExpansion frobenius_at(double center, double exponent, const MinimalOdeParams& p,
                                int order) {
  if (!is_singular_center(center))
    throw Error(ErrorKind::domain, "Frobenius centre must be a singular point pi/2 + n*pi");
  if (exponent != 0.0 && exponent != 0.5)
    throw Error(ErrorKind::domain, "Frobenius exponent must be 0 or 1/2");
  if (order < 10)
    throw Error(ErrorKind::domain, "Frobenius order must be at least 10");
  p.validate();

  // With z = beta - c:  z f = (z cot z)/2,  z^2 g = -(a / sin c) z (z / sin z) + b z^2.
  const int n = order;
  std::vector<double> cosz(n + 1, 0.0), sinc(n + 1, 0.0);
  double fact = 1.0;
  for (int k = 0; k <= n + 1; ++k) {
    if (k > 0)
      fact *= k;
    double sgn = (k / 2) % 2 == 0 ? 1.0 : -1.0;
    if (k % 2 == 0 && k <= n)
      cosz[k] = sgn / fact;
    if (k % 2 == 1 && k - 1 <= n)
      sinc[k - 1] = sgn / fact; // sin z / z
  }
  std::vector<double> zcot = series_divide(cosz, sinc, n);
  std::vector<double> zcsc = series_divide({1.0}, sinc, n);
  const double sin_c = std::sin(center) > 0 ? 1.0 : -1.0;
  std::vector<double> P(n + 1), Q(n + 1, 0.0);
  for (int k = 0; k <= n; ++k) {
    P[k] = 0.5 * zcot[k];
    if (k >= 1)
      Q[k] = -(p.a / sin_c) * zcsc[k - 1];
    if (k == 2)
      Q[k] += p.b;
  }

  const double s = exponent;
  auto indicial = [&](double r) { return r * (r - 1.0) + P[0] * r + Q[0]; };
  FrobeniusExpansion e;
  e.center = center;
  e.exponent = exponent;
  e.validity_radius = pi;
  e.coefficients.assign(n + 1, 0.0);
  e.coefficients[0] = 1.0;
  for (int m = 1; m <= n; ++m) {
    double F = indicial(m + s);
    if (std::fabs(F) < 1e-14)
      throw Error(ErrorKind::convergence, "Frobenius recurrence breakdown");
    cplx acc = 0.0;
    for (int k = 1; k <= m; ++k)
      acc += e.coefficients[m - k] * ((m - k + s) * P[k] + Q[k]);
    e.coefficients[m] = -acc / F;
  }
  return e;
}

cplx sqrt_with_cut(cplx z, cplx cut_dir) {
  cplx r = -cut_dir / std::abs(cut_dir);
  return std::sqrt(r) * std::sqrt(z / r);
}

SolutionState evaluate_local(const FrobeniusExpansion& e, cplx beta, cplx cut_dir) {
  cplx z = beta - e.center;
  if (!(std::abs(z) < 0.6 * e.validity_radius))
    throw Error(ErrorKind::domain, "evaluate_local: point outside the Frobenius disc");
  cplx S = 0.0, dS = 0.0;
  const auto& c = e.coefficients;
  for (int k = int(c.size()) - 1; k >= 0; --k) {
    dS = dS * z + S;
    S = S * z + c[k];
  }
  SolutionState out{beta, S, dS};
  if (e.exponent == 0.5) {
    if (z == cplx(0.0, 0.0)) {
      out.value = 0.0;
      out.derivative = 0.0;
      out.derivative_singular = true;
      return out;
    }
    cplx w = sqrt_with_cut(z, cut_dir);
    out.value = w * S;
    out.derivative = w * dS + S / (2.0 * w);
  }
  return out;
}

BetaPath BetaPath::straight(cplx from, cplx to, Bypass side, double detour_radius) {
  BetaPath path;
  path.waypoints.push_back(from);
  cplx d = to - from;
  double L = std::abs(d);
  if (L == 0.0)
    throw Error(ErrorKind::domain, "BetaPath: zero-length segment");
  cplx u = d / L;
  cplx nrm = cplx(0.0, 1.0) * u;
  bool up = side == Bypass::above;
  if (std::fabs(nrm.imag()) > 1e-12 ? ((nrm.imag() > 0) != up) : !up)
    nrm = -nrm;

  struct Hit {
    double t;
    cplx c;
  };
  std::vector<Hit> hits;
  double lo = std::min(from.real(), to.real()) - 1.0;
  double hi = std::max(from.real(), to.real()) + 1.0;
  for (double n = std::floor((lo - 0.5 * pi) / pi); 0.5 * pi + n * pi <= hi; n += 1.0) {
    cplx c(0.5 * pi + n * pi, 0.0);
    double t = ((c - from) * std::conj(u)).real();
    if (t - detour_radius <= 0.0 || t + detour_radius >= L)
      continue;
    if (segment_distance(from, to, c) < detour_radius)
      hits.push_back({t, c});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.t < y.t; });
  const int arc_pieces = 12;
  for (const Hit& h : hits) {
    for (int j = 0; j <= arc_pieces; ++j) {
      double th = pi * j / arc_pieces;
      path.append(h.c + detour_radius * (-u * std::cos(th) + nrm * std::sin(th)));
    }
  }
  path.append(to);
  return path;
}

void BetaPath::append(cplx w) {
  if (waypoints.empty()) {
    waypoints.push_back(w);
    return;
  }
  cplx p = waypoints.back();
  if (p == w)
    return;
  double x;
  if (real_axis_crossing(p, w, x) && on_cut(x))
    cut_bypass.push_back(p.imag() > 0 ? Bypass::above : Bypass::below);
  waypoints.push_back(w);
}

void BetaPath::validate() const {
  if (waypoints.empty())
    throw Error(ErrorKind::domain, "BetaPath: no waypoints");
  std::size_t crossings = 0;
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    cplx w = waypoints[i];
    if (w.imag() == 0.0 && on_cut(w.real()))
      throw Error(ErrorKind::domain, "BetaPath: waypoint lies on a cut");
    if (distance_to_singular(w) == 0.0)
      throw Error(ErrorKind::singular_point, "BetaPath: waypoint at a singular point");
    if (i == 0)
      continue;
    cplx p = waypoints[i - 1];
    if (p == w)
      throw Error(ErrorKind::domain, "BetaPath: repeated waypoint");
    double x;
    if (real_axis_crossing(p, w, x) && on_cut(x)) {
      if (crossings >= cut_bypass.size())
        throw Error(ErrorKind::domain, "BetaPath: cut crossing without a bypass flag");
      Bypass expected = p.imag() > 0 ? Bypass::above : Bypass::below;
      if (cut_bypass[crossings] != expected)
        throw Error(ErrorKind::domain, "BetaPath: bypass flag inconsistent with geometry");
      ++crossings;
    }
  }
  if (crossings != cut_bypass.size())
    throw Error(ErrorKind::domain, "BetaPath: more bypass flags than cut crossings");
}

BetaPath BetaPath::reversed() const {
  BetaPath r;
  for (auto it = waypoints.rbegin(); it != waypoints.rend(); ++it)
    r.append(*it);
  return r;
}

SolutionState integrate_segment(const SolutionState& start, cplx to, const MinimalOdeParams& p,
                                const IntegratorConfig& cfg) {
  namespace odeint = boost::numeric::odeint;
  cplx d = to - start.beta;
  double L = std::abs(d);
  if (L == 0.0)
    return start;
  if (start.derivative_singular)
    throw Error(ErrorKind::singular_point, "cannot integrate from a singular state");
  if (segment_clearance(start.beta, to) < cfg.min_clearance * (1 - 1e-9))
    throw Error(ErrorKind::singular_point, "integration segment passes too close to a singular point");
  const cplx u = d / L;
  const cplx beta0 = start.beta;
  const double a = p.a, b = p.b;
  auto rhs = [&](const ode_state& y, ode_state& dy, double s) {
    cplx beta = beta0 + s * u;
    cplx c = std::cos(beta);
    cplx f = -0.5 * std::sin(beta) / c;
    cplx g = a / c + b;
    dy[0] = u * y[1];
    dy[1] = u * (-f * y[1] - g * y[0]);
  };
  auto stepper = odeint::make_controlled(cfg.abs_tol, cfg.rel_tol,
                                         odeint::runge_kutta_fehlberg78<ode_state>());
  ode_state y{start.value, start.derivative};
  double s = 0.0;
  double ds = std::min(L, 0.25);
  long steps = 0;
  while (s < L) {
    if (++steps > cfg.max_steps)
      throw Error(ErrorKind::convergence, "integrator exceeded the step budget");
    bool last = s + ds >= L;
    double step = last ? L - s : ds;
    double trial = step;
    auto res = stepper.try_step(rhs, y, s, trial);
    if (res == odeint::success) {
      if (last)
        s = L; // avoid round-off leaving a sliver
      ds = trial;
    } else {
      ds = trial;
      if (ds < 1e-13 * std::max(1.0, L))
        throw Error(ErrorKind::step_underflow, "integrator step underflow");
    }
  }
  return {to, y[0], y[1]};
}

SolutionState integrate_along(const BetaPath& path, const SolutionState& start,
                              const MinimalOdeParams& p, const IntegratorConfig& cfg) {
  path.validate();
  if (std::abs(start.beta - path.waypoints.front()) > 1e-14 * (1.0 + std::abs(start.beta)))
    throw Error(ErrorKind::domain, "integrate_along: start state not at the first waypoint");
  SolutionState st = start;
  st.beta = path.waypoints.front();
  for (std::size_t i = 1; i < path.waypoints.size(); ++i)
    st = integrate_segment(st, path.waypoints[i], p, cfg);
  return st;
}

Eigen::Matrix2cd basis_at(double center, const MinimalOdeParams& p, double target,
                          const ConnectionConfig& cfg) {
  Eigen::Matrix2cd out;
  const double h = cfg.handoff_radius;
  for (int row = 0; row < 2; ++row) {
    FrobeniusExpansion e = frobenius_at(center, row == 0 ? 0.0 : 0.5, p, cfg.frobenius_order);
    SolutionState st;
    if (std::fabs(target - center) <= h) {
      st = evaluate_local(e, cplx(target, 0.0));
      if (st.derivative_singular)
        throw Error(ErrorKind::singular_point, "basis requested at its own singular point");
    } else {
      double start = center + (target > center ? h : -h);
      st = evaluate_local(e, cplx(start, 0.0));
      st = integrate_segment(st, cplx(target, 0.0), p, cfg.integrator);
    }
    out(row, 0) = st.value;
    out(row, 1) = st.derivative;
  }
  return out;
}

Eigen::Matrix2cd connection_between(double from, double to, double midpoint,
                                    const MinimalOdeParams& p, const ConnectionConfig& cfg) {
  Eigen::Matrix2cd U = basis_at(from, p, midpoint, cfg);
  Eigen::Matrix2cd V = basis_at(to, p, midpoint, cfg);
  double scale = V.row(0).norm() * V.row(1).norm();
  if (!(std::abs(V.determinant()) >= 1e-12 * scale))
    throw Error(ErrorKind::ill_conditioned, "connection solve: basis states nearly dependent");
  return U * V.inverse();
}

ConnectionMatrices connection_matrices(const MinimalOdeParams& p, const ConnectionConfig& cfg) {
  p.validate();
  ConnectionMatrices cm;
  cm.midpoint_used_M = 0.0;
  cm.midpoint_used_N = pi;
  cm.M = connection_between(0.5 * pi, -0.5 * pi, cm.midpoint_used_M, p, cfg);
  cm.N = connection_between(0.5 * pi, 1.5 * pi, cm.midpoint_used_N, p, cfg);
  return cm;
}

WronskianReport wronskian_diagnostics(const MinimalOdeParams& p,
                                      const std::function<SolutionState(cplx)>& t_state,
                                      const std::vector<cplx>& sample_betas) {
  struct D {
    cplx d01, d02, d12;
  };
  auto wronskians = [&](cplx beta, const SolutionState& T, const SolutionState& R) {
    auto [f, g] = ode_coefficients(beta, p);
    cplx T2 = -f * T.derivative - g * T.value;
    cplx R2 = -f * R.derivative - g * R.value;
    return D{T.value * R.derivative - T.derivative * R.value, T.value * R2 - T2 * R.value,
             T.derivative * R2 - T2 * R.derivative};
  };
  WronskianReport rep;
  rep.min_abs_d01 = 1e300;
  for (cplx beta : sample_betas) {
    SolutionState T0 = t_state(beta);
    SolutionState T1 = t_state(beta + 2.0 * pi);
    SolutionState T2 = t_state(beta + 4.0 * pi);
    D d = wronskians(beta, T0, T1);
    D dn = wronskians(beta + 2.0 * pi, T1, T2);
    double ad = std::abs(d.d01);
    rep.min_abs_d01 = std::min(rep.min_abs_d01, ad);
    if (ad < 1e-12)
      throw Error(ErrorKind::degenerate, "generalised Wronskian D01 vanishes");
    auto [f, g] = ode_coefficients(beta, p);
    rep.max_f_error = std::max(rep.max_f_error, std::abs(-d.d02 / d.d01 - f));
    rep.max_g_error = std::max(rep.max_g_error, std::abs(d.d12 / d.d01 - g));
    for (auto [x, y] : {std::pair{d.d01, dn.d01}, {d.d02, dn.d02}, {d.d12, dn.d12}}) {
      double r = std::abs(x + y);
      rep.max_antiperiodicity = std::max(rep.max_antiperiodicity, r);
      if (std::abs(x) > 0)
        rep.max_antiperiodicity_rel = std::max(rep.max_antiperiodicity_rel, r / std::abs(x));
    }
    ++rep.samples;
  }
  return rep;
}

} // namespace qp
