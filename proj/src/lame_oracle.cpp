#include "qplane/lame_oracle.hpp"

#include "qplane/error.hpp"
#include "qplane/parallel.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace qp {

namespace {

const double sqrt2 = std::sqrt(2.0);

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

using real_state = std::array<double, 2>;

} // namespace

double map_chi(double beta) {
  if (!(beta >= 0.5 * pi - 1e-15 && beta <= 1.5 * pi + 1e-15))
    throw Error(ErrorKind::domain, "map_chi: beta must lie in [pi/2, 3pi/2]");
  return std::acos(clamp_unit(sqrt2 * std::cos(0.5 * beta)));
}

double map_tau(double beta) {
  if (!(beta >= -0.5 * pi - 1e-15 && beta <= 0.5 * pi + 1e-15))
    throw Error(ErrorKind::domain, "map_tau: beta must lie in [-pi/2, pi/2]");
  return std::acos(clamp_unit(sqrt2 * std::sin(0.5 * beta)));
}

double beta_from_chi(double chi) {
  if (!(chi >= 0.0 && chi <= pi))
    throw Error(ErrorKind::domain, "beta_from_chi: chi must lie in [0, pi]");
  return 2.0 * std::acos(std::cos(chi) / sqrt2);
}

double beta_from_tau(double tau) {
  if (!(tau >= 0.0 && tau <= pi))
    throw Error(ErrorKind::domain, "beta_from_tau: tau must lie in [0, pi]");
  return 2.0 * std::asin(std::cos(tau) / sqrt2);
}

void LameShootConfig::validate() const {
  if (!(a_min < a_max) || !(nu_min < nu_max) || nu_min < 0.0)
    throw Error(ErrorKind::config, "shooting window must be non-empty with nu >= 0");
  if (grid_n_a < 8 || grid_n_nu < 8)
    throw Error(ErrorKind::config, "shooting grid must have at least 8 nodes per axis");
  if (!(rel_tol > 0) || !(abs_tol > 0) || !(tol > 0) || !(fd_step > 0) || !(dedup_tol > 0))
    throw Error(ErrorKind::config, "shooting tolerances must be positive");
}

double lame_second_derivative(LameSide side, double a, double nu, double angle, double T,
                              double dT) {
  double c = std::cos(angle), s = std::sin(angle);
  double d = 2.0 - c * c; // in [1, 2]
  double pot = nu * (nu + 1.0) * s * s + (side == LameSide::L ? -4.0 * a : 4.0 * a);
  return -(c * s / d) * dT - (pot / d) * T;
}

std::vector<LameState> lame_solution(LameSide side, double a, double nu,
                                     const std::vector<double>& angles,
                                     const LameShootConfig& cfg) {
  namespace odeint = boost::numeric::odeint;
  std::vector<std::size_t> order(angles.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return angles[i] < angles[j]; });
  for (double x : angles)
    if (!(x >= 0.0 && x <= pi))
      throw Error(ErrorKind::domain, "Lame solution angles must lie in [0, pi]");

  auto rhs = [&](const real_state& y, real_state& dy, double t) {
    dy[0] = y[1];
    dy[1] = lame_second_derivative(side, a, nu, t, y[0], y[1]);
  };
  auto ctrl = odeint::make_controlled(cfg.abs_tol, cfg.rel_tol,
                                      odeint::runge_kutta_fehlberg78<real_state>());
  real_state y{1.0, 0.0};
  double t = 0.0;
  double dt = 0.05;
  std::vector<LameState> out(angles.size());
  for (std::size_t k : order) {
    double target = angles[k];
    long steps = 0;
    while (t < target) {
      if (++steps > 1000000)
        throw Error(ErrorKind::convergence, "Lame integration exceeded the step budget");
      bool last = t + dt >= target;
      double trial = last ? target - t : dt;
      double tt = t;
      auto r = ctrl.try_step(rhs, y, tt, trial);
      if (r == odeint::success) {
        t = last ? target : tt;
        if (!last)
          dt = trial;
      } else {
        dt = trial;
        if (dt < 1e-14)
          throw Error(ErrorKind::step_underflow, "Lame integration step underflow");
      }
    }
    out[k] = {target, y[0], y[1]};
  }
  return out;
}

ShootResiduals shoot_boundary_residuals(double a, double nu, const LameShootConfig& cfg) {
  if (!std::isfinite(a) || !std::isfinite(nu) || nu < 0.0)
    throw Error(ErrorKind::domain, "shooting needs finite a and nu >= 0");
  auto R = lame_solution(LameSide::R, a, nu, {pi}, cfg);
  auto L = lame_solution(LameSide::L, a, nu, {pi}, cfg);
  return {R[0].value, L[0].derivative};
}

EigenRecord refine_shooting(double a0, double nu0, const LameShootConfig& cfg) {
  double a = a0, nu = nu0;
  ShootResiduals F = shoot_boundary_residuals(a, nu, cfg);
  auto record = [&] {
    EigenRecord rec = make_record(a, 0.25 * nu * (nu + 1.0), SolveMethod::shooting);
    rec.nu = nu; // exact 4b = nu(nu+1)
    rec.residual_m11 = std::fabs(F.rR);
    rec.residual_n12 = std::fabs(F.rL);
    return rec;
  };
  auto within = [&](double bound) { return std::fabs(F.rR) < bound && std::fabs(F.rL) < bound; };
  for (int it = 0; it < cfg.max_newton; ++it) {
    if (within(1e-2 * cfg.tol))
      return record();
    const double h = cfg.fd_step;
    ShootResiduals Fa = shoot_boundary_residuals(a + h, nu, cfg);
    ShootResiduals Fn = shoot_boundary_residuals(a, nu + h, cfg);
    Eigen::Matrix2d J;
    J << (Fa.rR - F.rR) / h, (Fn.rR - F.rR) / h, (Fa.rL - F.rL) / h, (Fn.rL - F.rL) / h;
    if (!(std::fabs(J.determinant()) > 0.0))
      throw Error(ErrorKind::no_root, "shooting Newton: singular Jacobian");
    Eigen::Vector2d delta = J.fullPivLu().solve(Eigen::Vector2d(-F.rR, -F.rL));
    double norm0 = std::hypot(F.rR, F.rL);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k <= cfg.max_halvings; ++k, t *= 0.5) {
      double an = a + t * delta(0), nn = nu + t * delta(1);
      if (nn < 0.0)
        continue;
      ShootResiduals Fnew = shoot_boundary_residuals(an, nn, cfg);
      if (std::hypot(Fnew.rR, Fnew.rL) < norm0) {
        a = an;
        nu = nn;
        F = Fnew;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (within(cfg.tol))
        return record();
      throw Error(ErrorKind::no_root, "shooting Newton: no decrease after step halving");
    }
    if (std::fabs(a) > 1e3 || nu > 1e3)
      throw Error(ErrorKind::no_root, "shooting Newton: iterate ran away");
  }
  if (within(cfg.tol))
    return record();
  throw Error(ErrorKind::no_root, "shooting Newton: iteration limit reached");
}

ShootingResult solve_shooting(const LameShootConfig& cfg) {
  cfg.validate();
  const int na = cfg.grid_n_a, nn = cfg.grid_n_nu;
  std::vector<double> as(na), nus(nn);
  for (int i = 0; i < na; ++i)
    as[i] = cfg.a_min + (cfg.a_max - cfg.a_min) * i / (na - 1);
  for (int j = 0; j < nn; ++j)
    nus[j] = cfg.nu_min + (cfg.nu_max - cfg.nu_min) * j / (nn - 1);
  std::vector<ShootResiduals> grid(std::size_t(na) * nn);
  parallel_for(grid.size(), [&](std::size_t k) {
    grid[k] = shoot_boundary_residuals(as[k / nn], nus[k % nn], cfg);
  });
  auto at = [&](int i, int j) { return grid[std::size_t(i) * nn + j]; };
  auto changes = [](double w, double x, double y, double z) {
    return std::min({w, x, y, z}) <= 0.0 && std::max({w, x, y, z}) >= 0.0;
  };
  std::vector<std::pair<double, double>> seeds;
  for (int i = 0; i + 1 < na; ++i)
    for (int j = 0; j + 1 < nn; ++j) {
      auto p = at(i, j), q = at(i + 1, j), r = at(i, j + 1), s = at(i + 1, j + 1);
      if (changes(p.rR, q.rR, r.rR, s.rR) && changes(p.rL, q.rL, r.rL, s.rL))
        seeds.push_back({0.5 * (as[i] + as[i + 1]), 0.5 * (nus[j] + nus[j + 1])});
    }
  std::vector<EigenRecord> found(seeds.size());
  std::vector<char> ok(seeds.size(), 0);
  parallel_for(seeds.size(), [&](std::size_t k) {
    try {
      found[k] = refine_shooting(seeds[k].first, seeds[k].second, cfg);
      const auto& r = found[k];
      ok[k] = r.a >= cfg.a_min && r.a <= cfg.a_max && r.nu >= cfg.nu_min && r.nu <= cfg.nu_max;
    } catch (const Error&) {
      ok[k] = 0;
    }
  });
  ShootingResult res;
  std::vector<EigenRecord> good;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (ok[k])
      good.push_back(found[k]);
    else
      ++res.failed_seeds;
  }
  res.seeds = int(seeds.size());
  res.records = order_and_dedup(good, cfg.dedup_tol);
  return res;
}

} // namespace qp
