#pragma once

#include "qplane/fuchsian.hpp"

#include <string>
#include <vector>

namespace qp {

enum class SolveMethod { monodromy, shooting };

std::string to_string(SolveMethod m);

struct EigenRecord {
  double a = 0.0;
  double b = 0.0;
  double nu = 0.0;
  cplx lambda;
  cplx kappa1, kappa2;
  // Monodromy records: |m11| and |n12|. Shooting records: |T^R(pi)| and
  // |dT^L/dchi(pi)| for the (1, 0)-normalised shooting solutions.
  double residual_m11 = 0.0;
  double residual_n12 = 0.0;
  SolveMethod method = SolveMethod::monodromy;
  int index = 0; // 1-based, by nu ascending then a ascending
  // Phases used to project m11 and n12 onto real Newton residuals
  // (monodromy only): residual = Re(entry * exp(-i phase)).
  double phase_m11 = 0.0;
  double phase_n12 = 0.0;

  MinimalOdeParams params() const { return {a, b}; }
};

struct SpectralConstants {
  double nu;
  cplx lambda;
  cplx kappa1, kappa2;
};

// nu(nu+1) = 4b, lambda = -2i cos(2 pi sqrt(b + 1/16)), kappa = i/4 +- i sqrt(b + 1/16).
SpectralConstants derive_constants(double b);

EigenRecord make_record(double a, double b, SolveMethod method);

struct ObjectiveValue {
  cplx m11;
  cplx n12;
};

ObjectiveValue objective(double a, double b, const ConnectionConfig& cfg = {});

struct MonodromyScanConfig {
  double a_min = -12.0, a_max = 12.0;
  double b_min = 0.0, b_max = 12.0; // window (b_min, b_max]
  int grid_n = 48;                  // nodes per axis; b nodes uniform in nu
  double tol = 1e-9;                // residual bound on |m11|, |n12|
  double fd_step = 1e-6;
  int max_newton = 40;
  int max_halvings = 8;
  double dedup_tol = 1e-8;
  ConnectionConfig connection;

  void validate() const;
};

struct SeedOutcome {
  double a0, b0;
  bool converged;
  std::string note;
};

struct MonodromyScanResult {
  std::vector<EigenRecord> records;
  std::vector<SeedOutcome> seeds;
  double phase_m11 = 0.0, phase_n12 = 0.0;
  // Largest |Im(entry e^{-i phase})| / |entry| seen on the grid: how far the
  // entries stray from the fixed phase lines.
  double phase_spread_m11 = 0.0, phase_spread_n12 = 0.0;
};

MonodromyScanResult scan_and_refine(const MonodromyScanConfig& cfg);

// Newton refinement from a single seed; throws no_root-style Error on failure.
EigenRecord refine_monodromy(double a0, double b0, const MonodromyScanConfig& cfg,
                             double phase_m11, double phase_n12);

// Sort by (nu, a), drop duplicates within tol, assign 1-based indices.
std::vector<EigenRecord> order_and_dedup(std::vector<EigenRecord> recs, double tol);

struct TransferReport {
  Eigen::Matrix2cd transfer; // [T; R](beta + 2pi) = transfer [T; R](beta)
  double s_error = 0.0;      // |s - 1|
  double lambda_error = 0.0; // |lambda_hat - lambda(b)|
  double det_error = 0.0;    // |det + 1|
  cplx s, lambda_hat;
};

// Transfer matrix over beta -> beta + 2pi in the basis {T, R}, R = T(. + 2pi),
// measured at beta0 in the upper half-plane.
TransferReport transfer_matrix_check(const EigenRecord& rec, cplx beta0 = cplx(-pi, 1.0));

} // namespace qp
