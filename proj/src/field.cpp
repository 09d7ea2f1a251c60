#include "qplane/field.hpp"

#include "qplane/error.hpp"
#include "qplane/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace qp {

namespace {

const cplx I(0.0, 1.0);
const double sqrt2 = std::sqrt(2.0);

double golden(int k, double phi = 0.6180339887498949) {
  double x = k * phi;
  return x - std::floor(x);
}

// beta(angle) and its first two angle derivatives for the two angular maps.
struct AngleMap {
  double beta, d1, d2;
};

AngleMap angle_map(LameSide side, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  double q = 1.0 - 0.5 * c * c;
  double sq = std::sqrt(q);
  if (side == LameSide::L)
    return {2.0 * std::acos(c / sqrt2), sqrt2 * s / sq, c / (sqrt2 * q * sq)};
  return {2.0 * std::asin(c / sqrt2), -sqrt2 * s / sq, -c / (sqrt2 * q * sq)};
}

std::array<double, 3> unit_image(double chi, double tau) {
  return sphero_to_cartesian({1.0, chi, tau});
}

} // namespace

// --------------------------------------------------------------------------

void SpheroConalPoint::validate() const {
  if (!(r > 0.0) || !std::isfinite(r))
    throw Error(ErrorKind::domain, "sphero-conal point needs r > 0");
  if (!(chi >= 0.0 && chi <= pi) || !(tau >= 0.0 && tau <= pi))
    throw Error(ErrorKind::domain, "sphero-conal angles must lie in [0, pi]");
}

std::array<double, 3> sphero_to_cartesian(const SpheroConalPoint& p) {
  p.validate();
  double cc = std::cos(p.chi), ct = std::cos(p.tau);
  double u = cc / sqrt2 * std::sqrt(1.0 - 0.5 * ct * ct);
  double v = ct / sqrt2 * std::sqrt(1.0 - 0.5 * cc * cc);
  return {p.r * (u - v), -p.r * (u + v), p.r * std::sin(p.chi) * std::sin(p.tau)};
}

SpheroConalPoint cartesian_to_sphero(double x1, double x2, double x3) {
  if (!std::isfinite(x1) || !std::isfinite(x2) || !std::isfinite(x3))
    throw Error(ErrorKind::domain, "cartesian_to_sphero: non-finite input");
  if (x3 < 0.0)
    throw Error(ErrorKind::domain, "cartesian_to_sphero needs x3 >= 0");
  double r = std::sqrt(x1 * x1 + x2 * x2 + x3 * x3);
  if (!(r > 0.0))
    throw Error(ErrorKind::domain, "cartesian_to_sphero: origin has no angles");
  // With A = (x1 - x2)/2r, B = -(x1 + x2)/2r and s3 = x3/r:
  //   sin^2 chi sin^2 tau = s3^2,  sin^2 tau - sin^2 chi = 2 (A^2 - B^2),
  // and the signs of cos chi, cos tau are those of A, B.
  double A = 0.5 * (x1 - x2) / r, B = -0.5 * (x1 + x2) / r, s3 = x3 / r;
  double D = A * A - B * B;
  double root = std::hypot(D, s3);
  if (root < 1e-12)
    throw Error(ErrorKind::singular_point,
                "cartesian_to_sphero: seam direction where chi and tau are both 0 or pi");
  double u, v; // sin^2 chi, sin^2 tau
  if (D >= 0.0) {
    u = s3 * s3 / (D + root);
    v = D + root;
  } else {
    u = -D + root;
    v = s3 * s3 / (-D + root);
  }
  u = std::clamp(u, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  double chi = std::atan2(std::sqrt(u), std::copysign(std::sqrt(1.0 - u), A));
  double tau = std::atan2(std::sqrt(v), std::copysign(std::sqrt(1.0 - v), B));

  // Newton polish on the unit-sphere image when the map is well conditioned.
  const std::array<double, 3> target = {x1 / r, x2 / r, x3 / r};
  auto misfit = [&](double c, double t) {
    auto x = unit_image(c, t);
    return std::array<double, 3>{x[0] - target[0], x[1] - target[1], x[2] - target[2]};
  };
  auto norm = [](const std::array<double, 3>& e) { return std::hypot(e[0], e[1], e[2]); };
  for (int it = 0; it < 2; ++it) {
    const double h = 1e-7;
    if (chi < 10 * h || chi > pi - 10 * h || tau < 10 * h || tau > pi - 10 * h)
      break;
    auto e = misfit(chi, tau);
    auto ec = misfit(chi + h, tau), em = misfit(chi - h, tau);
    auto et = misfit(chi, tau + h), en = misfit(chi, tau - h);
    double J[3][2];
    for (int i = 0; i < 3; ++i) {
      J[i][0] = (ec[i] - em[i]) / (2 * h);
      J[i][1] = (et[i] - en[i]) / (2 * h);
    }
    double a11 = 0, a12 = 0, a22 = 0, g1 = 0, g2 = 0;
    for (int i = 0; i < 3; ++i) {
      a11 += J[i][0] * J[i][0];
      a12 += J[i][0] * J[i][1];
      a22 += J[i][1] * J[i][1];
      g1 += J[i][0] * e[i];
      g2 += J[i][1] * e[i];
    }
    double det = a11 * a22 - a12 * a12;
    if (det < 1e-8)
      break;
    double dc = (a22 * g1 - a12 * g2) / det, dt = (a11 * g2 - a12 * g1) / det;
    double nc = chi - dc, nt = tau - dt;
    if (!(nc > 0 && nc < pi && nt > 0 && nt < pi) || norm(misfit(nc, nt)) >= norm(e))
      break;
    chi = nc;
    tau = nt;
  }
  return {r, chi, tau};
}

// --------------------------------------------------------------------------

AngularValue lame_from_T(const CutStripFunction& T, LameSide side, double angle) {
  if (!(angle >= 0.0 && angle <= pi))
    throw Error(ErrorKind::domain, "angular factor needs an angle in [0, pi]");
  AngleMap m = angle_map(side, angle);
  SolutionState s;
  double c = nearest_singular(cplx(m.beta, 0.0));
  if (m.beta == c && std::fabs(c - 0.5 * pi) > 1e-12) {
    // Exactly on a singular point: only the regular part survives.
    s = {m.beta, T.regular_value_at(c), cplx(NAN, NAN), true};
  } else {
    s = T.state(m.beta);
  }
  cplx d = s.derivative * m.d1;
  bool at_branch = std::fabs(c - 0.5 * pi) > 1e-12 && std::fabs(m.beta - c) < 1e-6;
  if (at_branch || s.derivative_singular || !std::isfinite(std::abs(d))) {
    // Square-root point at an end of the interval: the composition is smooth
    // in the angle. Extrapolate the chain-rule derivative from two nearby
    // interior angles, d(0) = 2 d(h) - d(2h) + O(h^2).
    const double h = 1e-4;
    double dir = angle > 0.5 * pi ? -1.0 : 1.0;
    auto chain = [&](double t) {
      AngleMap n = angle_map(side, t);
      return T.state(n.beta).derivative * n.d1;
    };
    d = 2.0 * chain(angle + dir * h) - chain(angle + 2.0 * dir * h);
  }
  return {s.value, d};
}

cplx amplitude_constant(double k, double nu, AmplitudeConvention conv) {
  cplx e = std::exp(I * (0.5 * pi * nu));
  double den = conv == AmplitudeConvention::far_field_consistent ? 2.0 * std::sqrt(2.0 * pi)
                                                                 : pi * std::sqrt(2.0 * pi);
  return -I * k * e / den;
}

GreenFunctionModel::GreenFunctionModel(const EigenRecord& record, double k,
                                       AmplitudeConvention conv)
    : rec_(record), k_(k), c_(amplitude_constant(k, record.nu, conv)),
      T_(MinimalOdeParams{record.a, record.b}) {
  if (!(k > 0.0) || !std::isfinite(k))
    throw Error(ErrorKind::domain, "wavenumber must be positive and finite");
  if (!(record.nu >= 0.0))
    throw Error(ErrorKind::domain, "record needs nu >= 0");
}

cplx GreenFunctionModel::radial(double r) const {
  double x = k_ * r;
  return hankel1(rec_.nu + 0.5, x) / std::sqrt(x);
}

cplx GreenFunctionModel::directivity(double chi, double tau) const {
  return k_ * lame_R(tau).value * lame_L(chi).value / (4.0 * pi * pi * I);
}

cplx GreenFunctionModel::operator()(const SpheroConalPoint& p) const {
  p.validate();
  return c_ * radial(p.r) * lame_R(p.tau).value * lame_L(p.chi).value;
}

cplx GreenFunctionModel::at(double x1, double x2, double x3) const {
  return (*this)(cartesian_to_sphero(x1, x2, std::fabs(x3)));
}

cplx eval_green_function(const GreenFunctionModel& model, const SpheroConalPoint& p) {
  return model(p);
}

// --------------------------------------------------------------------------

bool FieldReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const FieldCheck& c) { return c.pass; });
}

const FieldCheck& FieldReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name)
      return c;
  throw Error(ErrorKind::domain, "no field check named " + name);
}

void FieldVerifyConfig::validate() const {
  if (radial_kr.empty() || interior_points < 1 || boundary_points < 1 || near_points < 3)
    throw Error(ErrorKind::config, "field verification needs samples");
  if (!(helmholtz_step > 1e-7 && helmholtz_step < 1e-1))
    throw Error(ErrorKind::step_underflow, "Helmholtz step must lie in (1e-7, 1e-1) relative to r");
  if (!(near_r_min > 0.0 && near_r_max > near_r_min) || !(far_kr > 0.0) ||
      !(dirichlet_offset > 0.0 && dirichlet_offset < 0.1))
    throw Error(ErrorKind::config, "invalid near/far field or Dirichlet settings");
}

double far_field_mismatch(const GreenFunctionModel& model, double kr, double chi, double tau,
                          bool with_first_correction) {
  double r = kr / model.k();
  cplx u = model({r, chi, tau});
  cplx lhs = u * kr * std::exp(-I * kr);
  cplx target = -2.0 * I * pi * model.directivity(chi, tau);
  if (with_first_correction) {
    double mu = model.nu() + 0.5;
    target *= 1.0 + I * (4.0 * mu * mu - 1.0) / (8.0 * kr);
  }
  return std::abs(lhs - target) / std::abs(target);
}

double near_field_slope(const GreenFunctionModel& model, double chi, double tau, double r_min,
                        double r_max, int points) {
  if (points < 3 || !(r_min > 0.0 && r_max > r_min))
    throw Error(ErrorKind::config, "near-field fit needs >= 3 points and 0 < r_min < r_max");
  // The angular factor is common to all radii.
  cplx ang = model.lame_R(tau).value * model.lame_L(chi).value * model.amplitude();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < points; ++k) {
    double lr = std::log(r_min) + (std::log(r_max) - std::log(r_min)) * k / (points - 1);
    double ly = std::log(std::abs(ang * model.radial(std::exp(lr))));
    sx += lr;
    sy += ly;
    sxx += lr * lr;
    sxy += lr * ly;
  }
  return (points * sxy - sx * sy) / (points * sxx - sx * sx);
}

FieldReport verify_field(const GreenFunctionModel& model, const FieldVerifyConfig& cfg) {
  cfg.validate();
  const double k = model.k(), nu = model.nu();
  const EigenRecord& rec = model.record();
  FieldReport rep;
  auto add = [&](const std::string& name, double value, double tol) {
    rep.checks.push_back({name, value, tol, value < tol});
  };
  auto interior = [&](int j) {
    double chi = 0.25 + (pi - 0.5) * golden(j + 1);
    double tau = 0.25 + (pi - 0.5) * golden(j + 1, 0.41421356237309515);
    return std::pair<double, double>{chi, tau};
  };

  // (i) radial equation by 5-point differences in r.
  {
    double worst = 0.0;
    const double chi = 1.1, tau = 1.9;
    for (double kr : cfg.radial_kr) {
      double r = kr / k, h = 0.01 * std::min(r, 1.0 / k);
      cplx u[5];
      for (int j = 0; j < 5; ++j)
        u[j] = model({r + (j - 2) * h, chi, tau});
      cplx d1 = (-u[4] + 8.0 * u[3] - 8.0 * u[1] + u[0]) / (12.0 * h);
      cplx d2 = (-u[4] + 16.0 * u[3] - 30.0 * u[2] + 16.0 * u[1] - u[0]) / (12.0 * h * h);
      cplx res = r * r * d2 + 2.0 * r * d1 + (k * k * r * r - nu * (nu + 1.0)) * u[2];
      worst = std::max(worst, std::abs(res) / std::abs(u[2]));
    }
    add("radial", worst, cfg.tol_radial);
  }

  // (ii) angular equations, with T'' taken from the minimal ODE.
  for (LameSide side : {LameSide::L, LameSide::R}) {
    double worst = 0.0;
    for (int j = 0; j < cfg.interior_points; ++j) {
      auto [chi, tau] = interior(j);
      double angle = side == LameSide::L ? chi : tau;
      AngleMap m = angle_map(side, angle);
      SolutionState s = model.T().state(m.beta);
      auto [f, g] = ode_coefficients(m.beta, MinimalOdeParams{rec.a, rec.b});
      cplx t2 = -f * s.derivative - g * s.value;
      cplx U = s.value, dU = s.derivative * m.d1;
      cplx ddU = t2 * m.d1 * m.d1 + s.derivative * m.d2;
      double cU = lame_second_derivative(side, rec.a, nu, angle, 1.0, 0.0);
      double cdU = lame_second_derivative(side, rec.a, nu, angle, 0.0, 1.0);
      cplx res = ddU - (cU * U + cdU * dU);
      worst = std::max(worst, std::abs(res) / (std::abs(ddU) + std::abs(dU) + std::abs(U)));
    }
    add(side == LameSide::L ? "angular_L" : "angular_R", worst, cfg.tol_angular);
  }

  // (iii) Neumann traces on chi = 0, chi = pi and tau = 0 (x3 = 0).
  {
    double worst = 0.0;
    const double r = 2.0 / k, h = 1e-4 * r;
    for (int locus = 0; locus < 3; ++locus)
      for (int j = 0; j < cfg.boundary_points; ++j) {
        double t = 0.25 + (pi - 0.5) * (j + 0.5) / cfg.boundary_points;
        SpheroConalPoint p = locus == 0 ? SpheroConalPoint{r, 0.0, t}
                             : locus == 1 ? SpheroConalPoint{r, pi, t}
                                          : SpheroConalPoint{r, t, 0.0};
        auto x = sphero_to_cartesian(p);
        cplx u0 = model.at(x[0], x[1], 0.0), u1 = model.at(x[0], x[1], h),
             u2 = model.at(x[0], x[1], 2.0 * h);
        cplx du = (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * h);
        worst = std::max(worst, std::abs(du) / (k * std::abs(u0)));
      }
    add("neumann", worst, cfg.tol_neumann);
  }

  // (iv) Cartesian Helmholtz residual by central differences.
  {
    double worst = 0.0;
    for (int j = 0; j < cfg.interior_points; ++j) {
      auto [chi, tau] = interior(j);
      double r = (1.5 + 2.5 * golden(j + 1, 0.7548776662466927)) / k;
      auto x = sphero_to_cartesian({r, chi, tau});
      double h = cfg.helmholtz_step * r;
      cplx u0 = model.at(x[0], x[1], x[2]);
      cplx lap = -6.0 * u0;
      for (int d = 0; d < 3; ++d)
        for (double sg : {-1.0, 1.0}) {
          auto y = x;
          y[d] += sg * h;
          lap += model.at(y[0], y[1], y[2]);
        }
      lap /= h * h;
      worst = std::max(worst, std::abs(lap + k * k * u0) / (k * k * std::abs(u0)));
    }
    add("helmholtz", worst, cfg.tol_helmholtz);
  }

  // Dirichlet trace just off the quarter-plane.
  {
    double worst = 0.0;
    const double r = 2.0 / k;
    for (int j = 0; j < cfg.boundary_points; ++j) {
      double chi = 0.25 + (pi - 0.5) * (j + 0.5) / cfg.boundary_points;
      double scale = 0.0;
      for (int i = 1; i < 32; ++i)
        scale = std::max(scale, std::abs(model({r, chi, pi * i / 32.0})));
      cplx u = model({r, chi, pi - cfg.dirichlet_offset});
      worst = std::max(worst, std::abs(u) / scale);
    }
    add("dirichlet", worst, cfg.tol_dirichlet);
    // The trace itself, on tau = pi.
    double trace = 0.0;
    for (int j = 0; j < cfg.boundary_points; ++j) {
      double chi = 0.25 + (pi - 0.5) * (j + 0.5) / cfg.boundary_points;
      double scale = 0.0;
      for (int i = 1; i < 32; ++i)
        scale = std::max(scale, std::abs(model({r, chi, pi * i / 32.0})));
      trace = std::max(trace, std::abs(model({r, chi, pi})) / scale);
    }
    add("dirichlet_trace", trace, cfg.tol_trace);
  }

  // Near- and far-field behaviour.
  rep.near_field_slope = near_field_slope(model, 1.1, 1.9, cfg.near_r_min, cfg.near_r_max,
                                          cfg.near_points);
  add("near_field_slope", std::fabs(rep.near_field_slope + nu + 1.0), cfg.tol_near_slope);
  {
    double worst = 0.0;
    for (int j = 0; j < cfg.boundary_points; ++j) {
      auto [chi, tau] = interior(j);
      worst = std::max(worst, far_field_mismatch(model, cfg.far_kr, chi, tau));
    }
    add("far_field", worst, cfg.tol_far);
    double corrected = 0.0;
    for (int j = 0; j < cfg.boundary_points; ++j) {
      auto [chi, tau] = interior(j);
      corrected = std::max(corrected, far_field_mismatch(model, cfg.far_kr, chi, tau, true));
    }
    add("far_field_corrected", corrected, cfg.tol_far);
  }
  return rep;
}

void write_field_csv(std::ostream& os, const GreenFunctionModel& model,
                     const std::vector<SpheroConalPoint>& points) {
  auto old = os.precision(17);
  os << "r,chi,tau,x1,x2,x3,re_u,im_u\n";
  for (const auto& p : points) {
    auto x = sphero_to_cartesian(p);
    cplx u = model(p);
    os << p.r << ',' << p.chi << ',' << p.tau << ',' << x[0] << ',' << x[1] << ',' << x[2] << ','
       << u.real() << ',' << u.imag() << '\n';
  }
  os.precision(old);
}

} // namespace qp
