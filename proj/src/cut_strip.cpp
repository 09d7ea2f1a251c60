#include "qplane/cut_strip.hpp"

#include "qplane/error.hpp"

#include <algorithm>
#include <cmath>

namespace qp {

namespace {

double segment_min_distance(cplx p, cplx q, cplx c) {
  cplx d = q - p;
  double L2 = std::norm(d);
  double t = L2 == 0.0 ? 0.0 : std::clamp(((c - p) * std::conj(d)).real() / L2, 0.0, 1.0);
  return std::abs(p + t * d - c);
}

} // namespace

CutStripFunction::CutStripFunction(const MinimalOdeParams& p, const ConnectionConfig& cfg)
    : p_(p), cfg_(cfg) {
  p_.validate();
  regular_ = frobenius_at(0.5 * pi, 0.0, p_, cfg_.frobenius_order);
  SolutionState s = evaluate_local(regular_, 0.5 * pi + cfg_.handoff_radius);
  at_pi_ = integrate_segment(s, pi, p_, cfg_.integrator);
  above_pi_ = integrate_segment(at_pi_, cplx(pi, 1.0), p_, cfg_.integrator);
  below_pi_ = integrate_segment(at_pi_, cplx(pi, -1.0), p_, cfg_.integrator);
}

SolutionState CutStripFunction::route(cplx beta) const {
  const double im = beta.imag();
  const bool up = im >= 0.0;
  const double h = up ? std::max(im, 1.0) : std::min(im, -1.0);
  SolutionState s = up ? above_pi_ : below_pi_;
  const auto& ic = cfg_.integrator;
  s = integrate_segment(s, cplx(pi, h), p_, ic);
  s = integrate_segment(s, cplx(beta.real(), h), p_, ic);
  s = integrate_segment(s, beta, p_, ic);
  s.beta = beta;
  return s;
}

Eigen::Vector2cd CutStripFunction::local_coefficients(const SolutionState& s, double center,
                                                      cplx cut_dir) const {
  auto e0 = frobenius_at(center, 0.0, p_, cfg_.frobenius_order);
  auto e1 = frobenius_at(center, 0.5, p_, cfg_.frobenius_order);
  auto b0 = evaluate_local(e0, s.beta, cut_dir);
  auto b1 = evaluate_local(e1, s.beta, cut_dir);
  if (b1.derivative_singular)
    throw Error(ErrorKind::singular_point, "local coefficients requested at a singular point");
  Eigen::Matrix2cd B;
  B << b0.value, b1.value, b0.derivative, b1.derivative;
  Eigen::Vector2cd rhs(s.value, s.derivative);
  return B.partialPivLu().solve(rhs);
}

SolutionState CutStripFunction::near_singular(cplx beta, double c) const {
  if (std::fabs(c - 0.5 * pi) < 1e-12)
    return evaluate_local(regular_, beta);
  cplx d = beta - c;
  if (std::abs(d) == 0.0)
    throw Error(ErrorKind::singular_point, "T requested at a singular point");
  cplx u = d / std::abs(d);
  cplx anchor = c + cfg_.handoff_radius * u;
  SolutionState s = route(anchor);
  Eigen::Vector2cd coef = local_coefficients(s, c, -u);
  auto e0 = frobenius_at(c, 0.0, p_, cfg_.frobenius_order);
  auto e1 = frobenius_at(c, 0.5, p_, cfg_.frobenius_order);
  auto b0 = evaluate_local(e0, beta, -u);
  auto b1 = evaluate_local(e1, beta, -u);
  return {beta, coef(0) * b0.value + coef(1) * b1.value,
          coef(0) * b0.derivative + coef(1) * b1.derivative};
}

SolutionState CutStripFunction::state(cplx beta) const {
  if (!std::isfinite(beta.real()) || !std::isfinite(beta.imag()))
    throw Error(ErrorKind::domain, "T requested at a non-finite point");
  if (beta.imag() == 0.0 && (beta.real() <= -0.5 * pi || beta.real() >= 2.5 * pi))
    throw Error(ErrorKind::domain, "T requested on a branch cut");
  double c = nearest_singular(beta);
  if (std::abs(beta - c) < cfg_.handoff_radius)
    return near_singular(beta, c);
  return route(beta);
}

SolutionState CutStripFunction::eval_along(const BetaPath& path) const {
  path.validate();
  SolutionState s = integrate_along(path, state(path.waypoints.front()), p_, cfg_.integrator);
  s.beta = path.waypoints.back();
  return s;
}

cplx CutStripFunction::regular_value_at(double c) const {
  if (std::fabs(c - nearest_singular(cplx(c, 0.0))) > 1e-12)
    throw Error(ErrorKind::domain, "regular_value_at expects a singular point");
  if (std::fabs(c - 0.5 * pi) < 1e-12)
    return 1.0;
  const cplx u(0.0, 1.0);
  SolutionState s = route(c + cfg_.handoff_radius * u);
  return local_coefficients(s, c, -u)(0);
}

bool CutStripFunction::can_continue(cplx from, cplx to) const {
  const double h = cfg_.handoff_radius;
  if (distance_to_singular(from) < h || distance_to_singular(to) < h)
    return false;
  double lo = std::min(from.real(), to.real()) - pi;
  double hi = std::max(from.real(), to.real()) + pi;
  for (double n = std::floor((lo - 0.5 * pi) / pi); 0.5 * pi + n * pi <= hi; n += 1.0)
    if (segment_min_distance(from, to, cplx(0.5 * pi + n * pi, 0.0)) < 0.8 * h)
      return false;
  // The segment may meet the real axis only where T is single-valued across it.
  auto outside = [](double x) { return x <= -0.5 * pi || x >= 1.5 * pi; };
  if (from.imag() == 0.0 || to.imag() == 0.0) {
    cplx r = from.imag() == 0.0 ? from : to;
    cplx o = from.imag() == 0.0 ? to : from;
    if (outside(r.real()) && o.imag() < 0.0)
      return false;
    return true;
  }
  if (from.imag() * to.imag() < 0.0) {
    double t = from.imag() / (from.imag() - to.imag());
    double x = from.real() + t * (to.real() - from.real());
    if (outside(x))
      return false;
  }
  return true;
}

std::vector<SolutionState> CutStripFunction::states_along(const std::vector<cplx>& betas) const {
  std::vector<SolutionState> out;
  out.reserve(betas.size());
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (i > 0 && can_continue(betas[i - 1], betas[i])) {
      SolutionState s = integrate_segment(out.back(), betas[i], p_, cfg_.integrator);
      s.beta = betas[i];
      out.push_back(s);
    } else {
      out.push_back(state(betas[i]));
    }
  }
  return out;
}

} // namespace qp
