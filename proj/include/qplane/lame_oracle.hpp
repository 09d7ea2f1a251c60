#pragma once

#include "qplane/monodromy.hpp"

#include <vector>

namespace qp {

// chi = arccos(sqrt(2) cos(beta/2)) on [pi/2, 3pi/2];
// tau = arccos(sqrt(2) sin(beta/2)) on [-pi/2, pi/2]. Both onto [0, pi].
double map_chi(double beta);
double map_tau(double beta);
// Inverses: beta = 2 arccos(cos(chi)/sqrt(2)), beta = 2 arcsin(cos(tau)/sqrt(2)).
double beta_from_chi(double chi);
double beta_from_tau(double tau);

enum class LameSide { L, R };

struct LameShootConfig {
  double a_min = -12.0, a_max = 12.0;
  double nu_min = 0.0, nu_max = 6.0;
  int grid_n_a = 48, grid_n_nu = 48;
  double rel_tol = 1e-12, abs_tol = 1e-14;
  double tol = 1e-9;       // bound on |rR|, |rL|
  double fd_step = 1e-7;
  int max_newton = 40;
  int max_halvings = 8;
  double dedup_tol = 1e-8;

  void validate() const;
};

// T^L: T'' + cs/(2-c^2) T' + (nu(nu+1) s^2 - 4a)/(2-c^2) T = 0  (c = cos chi, s = sin chi)
// T^R: the same with +4a, in the angle tau.
// Returns (T'', given T, T') at the angle.
double lame_second_derivative(LameSide side, double a, double nu, double angle, double T,
                              double dT);

struct LameState {
  double angle, value, derivative;
};

// Solution with (T, T') = (1, 0) at angle 0, sampled at the requested
// angles (any order, each in [0, pi]).
std::vector<LameState> lame_solution(LameSide side, double a, double nu,
                                     const std::vector<double>& angles,
                                     const LameShootConfig& cfg = {});

struct ShootResiduals {
  double rR; // T^R(pi)
  double rL; // dT^L/dchi(pi)
};

ShootResiduals shoot_boundary_residuals(double a, double nu, const LameShootConfig& cfg = {});

struct ShootingResult {
  std::vector<EigenRecord> records;
  int seeds = 0;
  int failed_seeds = 0;
};

ShootingResult solve_shooting(const LameShootConfig& cfg = {});

// Newton on (rR, rL) from one seed.
EigenRecord refine_shooting(double a0, double nu0, const LameShootConfig& cfg);

} // namespace qp
