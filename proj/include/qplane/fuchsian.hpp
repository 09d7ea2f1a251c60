#pragma once

#include "qplane/specfun.hpp"

#include <Eigen/Dense>

#include <functional>
#include <utility>
#include <vector>

namespace qp {

inline constexpr double pi = 3.14159265358979323846;

// T'' - (tan(beta)/2) T' + (a/cos(beta) + b) T = 0
struct MinimalOdeParams {
  double a = 0.0;
  double b = 0.0;

  void validate() const; // finite, b > -1/16
};

// (f, g) with T'' + f T' + g T = 0.
std::pair<cplx, cplx> ode_coefficients(cplx beta, const MinimalOdeParams& p);

// Distance from beta to the nearest point pi/2 + n*pi.
double distance_to_singular(cplx beta);
// The singular point pi/2 + n*pi nearest to beta.
double nearest_singular(cplx beta);

// (beta - center)^exponent * sum_n c_n (beta - center)^n, exponent in {0, 1/2}.
struct FrobeniusExpansion {
  double center = 0.0;
  double exponent = 0.0;
  std::vector<cplx> coefficients;
  double validity_radius = pi;
};

struct SolutionState {
  cplx beta;
  cplx value;
  cplx derivative;
  // Set when the derivative is infinite (exponent 1/2 evaluated at its centre).
  bool derivative_singular = false;
};

FrobeniusExpansion frobenius_at(double center, double exponent, const MinimalOdeParams& p,
                                int order = 40);

// z^{1/2} with the branch cut along the ray {t * cut_dir, t > 0}; |cut_dir| = 1.
cplx sqrt_with_cut(cplx z, cplx cut_dir);

// Default cut direction for the square-root factor: straight down (-i), so
// points to the left of a centre on the real axis get (beta - c)^{1/2} = i|beta - c|^{1/2}.
inline const cplx default_cut_dir{0.0, -1.0};

SolutionState evaluate_local(const FrobeniusExpansion& e, cplx beta,
                             cplx cut_dir = default_cut_dir);

enum class Bypass { above, below };

// Polyline in the beta-plane. cut_bypass holds one flag per crossing of the
// cuts (-inf, -pi/2] and [5pi/2, inf), in path order; the flag records the
// side of the real axis the crossing segment starts from.
struct BetaPath {
  std::vector<cplx> waypoints;
  std::vector<Bypass> cut_bypass;

  // Straight segments from `from` to `to`, with polygonal semicircular
  // detours of the given radius around singular points closer than it.
  // `side` picks the detour side (above = Im > 0 relative to travel on the
  // real axis; for general segments, to the left of travel when above).
  static BetaPath straight(cplx from, cplx to, Bypass side = Bypass::above,
                           double detour_radius = 0.2);

  void append(cplx w); // recomputes crossing flags for the new segment
  void validate() const;
  BetaPath reversed() const;
};

// Continue (T, T') along the path with an adaptive Runge-Kutta-Fehlberg 7(8) pair.
struct IntegratorConfig {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double min_clearance = 0.05; // required distance from singular points
  long max_steps = 200000;
};

SolutionState integrate_along(const BetaPath& path, const SolutionState& start,
                              const MinimalOdeParams& p, const IntegratorConfig& cfg = {});

// Single straight segment, no clearance check against the endpoints' own
// neighbourhoods beyond cfg.min_clearance.
SolutionState integrate_segment(const SolutionState& start, cplx to, const MinimalOdeParams& p,
                                const IntegratorConfig& cfg = {});

struct ConnectionMatrices {
  Eigen::Matrix2cd M; // B_{pi/2} = M B_{-pi/2}
  Eigen::Matrix2cd N; // B_{pi/2} = N B_{3pi/2}
  double midpoint_used_M = 0.0;
  double midpoint_used_N = pi;
};

struct ConnectionConfig {
  int frobenius_order = 40;
  double handoff_radius = 0.3;
  IntegratorConfig integrator;
};

// Both basis solutions at `center` (rows: regular, square-root), continued
// to the real point `target` along the real axis; returned as
// [value, derivative] rows.
Eigen::Matrix2cd basis_at(double center, const MinimalOdeParams& p, double target,
                          const ConnectionConfig& cfg = {});

// C with B_{from} = C B_{to}, matched on (value, derivative) at `midpoint`.
Eigen::Matrix2cd connection_between(double from, double to, double midpoint,
                                    const MinimalOdeParams& p, const ConnectionConfig& cfg = {});

ConnectionMatrices connection_matrices(const MinimalOdeParams& p, const ConnectionConfig& cfg = {});

struct WronskianReport {
  double max_f_error = 0.0;            // max |-D02/D01 - f|
  double max_g_error = 0.0;            // max |D12/D01 - g|
  double max_antiperiodicity = 0.0;     // max |D(beta+2pi) + D(beta)| over D01, D02, D12
  double max_antiperiodicity_rel = 0.0; // the same divided by |D(beta)|
  double min_abs_d01 = 0.0;
  int samples = 0;
};

// Generalised Wronskians of (T, R), R(beta) = T(beta + 2pi), with second
// derivatives from the ODE. `t_state` must return (T, T') at any sample
// point and its 2pi and 4pi translates.
WronskianReport wronskian_diagnostics(const MinimalOdeParams& p,
                                      const std::function<SolutionState(cplx)>& t_state,
                                      const std::vector<cplx>& sample_betas);

} // namespace qp
