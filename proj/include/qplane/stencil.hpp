#pragma once

#include "qplane/cut_strip.hpp"
#include "qplane/monodromy.hpp"

#include <array>
#include <string>
#include <vector>

namespace qp {

// ---------------------------------------------------------------------------
// Solutions near beta -> +i inf:
//   F_j(beta) = e^{kappa_j beta} (1 + sum_{l>=1} p_l e^{i l beta}),
//   kappa_{1,2} = i/4 +- i sqrt(b + 1/16).
// The coefficients follow from the ODE written in w = e^{i beta}:
//   p_n n (2 i kappa - n + 1/2) = -2a p_{n-1} - p_{n-2} (s^2 + i s/2 + b),  s = kappa + i(n-2).
// The series converges for Im beta > 0.
class UpperAsymptoticBasis {
public:
  explicit UpperAsymptoticBasis(const MinimalOdeParams& p, int max_terms = 4000);

  cplx kappa(int j) const { return kappa_[j]; }
  // Value and beta-derivative of F_j (j = 0, 1).
  SolutionState state(int j, cplx beta) const;
  cplx operator()(int j, cplx beta) const { return state(j, beta).value; }

private:
  void extend(int j, int n) const;

  MinimalOdeParams p_;
  int max_terms_;
  std::array<cplx, 2> kappa_;
  mutable std::array<std::vector<cplx>, 2> coef_;
};

// ---------------------------------------------------------------------------
// The stencil triplet (T(beta), T(beta + 2pi), T(beta + 4pi)) for Re beta = -pi,
// on the connection used for  T(beta + 4pi) = T(beta) - lambda T(beta + 2pi).
// The first two members take principal values in the upper half-plane and
// are reached from Re(point) + i along the vertical line through the point in
// the lower half-plane. The third member is continued from 3pi + i once
// around the branch point 5pi/2 and then vertically to the target, and its
// sign is changed. With square-root behaviour at 5pi/2 the loop alone flips
// the sign, so the two changes cancel; with a regular part at 5pi/2 they do
// not, and the relation fails. `refinement` > 1 splits each descent into a
// bulged polyline with the given number of pieces (same homotopy class).
std::array<SolutionState, 3> stencil_triplet(const CutStripFunction& T, cplx beta,
                                             int refinement = 1);

// |T(b+4pi) - T(b) + lambda T(b+2pi)| / max(|T(b)|, |T(b+2pi)|, |T(b+4pi)|)
double stencil_1d_residual(const CutStripFunction& T, cplx lambda, cplx beta,
                           int refinement = 1);

struct SampleResidual {
  cplx point;
  double residual;
};

struct CheckReport {
  std::string check;
  double residual = 0.0; // max over samples
  double tol = 0.0;
  bool pass = false;
  std::vector<SampleResidual> samples;
};

// Default sample lines: n points on Re beta = -pi, split evenly between the
// upper and lower half-plane, |Im beta| in [0.3, 3].
std::vector<cplx> default_stencil_samples(int n = 20);

CheckReport verify_stencil_residual(const MinimalOdeParams& p,
                                    const std::vector<cplx>& samples = default_stencil_samples(),
                                    int refinement = 1, double tol = 1e-8);

// ---------------------------------------------------------------------------
// W(alpha1, alpha2) = T(alpha1 + alpha2) T(alpha1 - alpha2 + pi), principal values.
cplx build_W_hat(const CutStripFunction& T, cplx alpha1, cplx alpha2);

// Samples of m^- x m^- of the form (-pi + i y1, -i y2); half of them with
// y1 < y2 so that alpha1 + alpha2 lies in the lower half-plane.
std::vector<std::array<cplx, 2>> default_m_minus_samples(int n = 10);

// Four-term stencil on m^- x m^-:
//   W(a1 + 2pi, a2 + 2pi) - W(a1, a2) - W(a1 + 2pi, a2) + W(a1, a2 + 2pi) = 0,
// with the factors in alpha1 + alpha2 (on Re = -pi) on the triplet connection
// above and the factors in alpha1 - alpha2 + pi on the plain vertical
// connection, normalised by the largest term.
CheckReport verify_stencil_2d(const MinimalOdeParams& p,
                              const std::vector<std::array<cplx, 2>>& samples =
                                  default_m_minus_samples(),
                              double tol = 1e-8);

// ---------------------------------------------------------------------------
// Symmetry about pi: T(2pi - beta) = Q T(beta) with Q = T(3pi/2) (= +-1 at a
// solved record). Residuals |T(beta) - Q T(2pi - beta)| / max(1, |T(beta)|).
struct SymmetryReport {
  cplx q;
  double max_residual = 0.0;       // with the measured Q
  double max_residual_q_one = 0.0; // with Q = 1, i.e. |T(beta) - T(2pi - beta)|
  int samples = 0;
};

std::vector<cplx> default_symmetry_samples(int n = 50);

SymmetryReport symmetry_check(const CutStripFunction& T,
                              const std::vector<cplx>& samples = default_symmetry_samples());

// W(alpha1, alpha2) vs W(pi - alpha1, alpha2) on samples of m^+ x m^+, and
// the swap W(alpha2, alpha1) = Q W(alpha1, alpha2).
struct WSymmetryReport {
  double reflection_residual = 0.0;
  double swap_residual = 0.0; // |W(a2, a1) - Q W(a1, a2)| / |W|
  int samples = 0;
};

WSymmetryReport w_symmetry_check(const CutStripFunction& T, cplx q, int n = 16);

// ---------------------------------------------------------------------------
// Continue T once around a singular point on a polygonal circle and compare
// local coefficients before and after: the regular coefficient must be
// unchanged and the square-root coefficient must change sign.
struct LoopReport {
  Eigen::Vector2cd before, after;
  double residual = 0.0; // max(|c0' - c0|, |c1' + c1|) / max(|c0|, |c1|)
};

LoopReport loop_sign_check(const CutStripFunction& T, double center = -0.5 * pi,
                           double radius = 0.35, int vertices = 48);

// ---------------------------------------------------------------------------
// Generalised Wronskians of (T, T(. + 2pi)) on the principal sheet.
std::vector<cplx> default_wronskian_samples(int n = 50);

WronskianReport wronskian_check(const CutStripFunction& T,
                                const std::vector<cplx>& samples = default_wronskian_samples());

// ---------------------------------------------------------------------------
// Edge behaviour:
//   J(a1, a2; eps) = W(a1, a2) - W(-pi + 2 eps - a1, a2),
// a1 = alpha1 + eps on m^- + eps, a2 = -pi/2 + i y on the upper tail of the
// integration contour. J is extrapolated to eps -> 0 with one Richardson
// step, and log|J| is fitted against y.
struct EdgeDecayConfig {
  double alpha1 = -0.25 * pi;
  double eps = 1e-3;
  double y_min = 2.0, y_max = 6.0;
  int points = 17;
};

struct EdgeDecayReport {
  double slope = 0.0;
  double intercept = 0.0;
  double max_fit_deviation = 0.0; // max |log|J| - fit|
  bool monotone = false;          // |J| strictly decreasing in y
  std::vector<double> y, abs_j;
};

cplx edge_j(const CutStripFunction& T, cplx alpha1, cplx alpha2, double eps);

EdgeDecayReport edge_decay_check(const CutStripFunction& T, const EdgeDecayConfig& cfg = {});

// The four-term combination built from a single F_j,
//   F(a1 + a2) F(pi - a1 + a2) - F(a1 + a2 + 2pi) F(-pi - a1 + a2),
// relative to the size of its terms.
double single_mode_cancellation(const UpperAsymptoticBasis& F, int j, cplx alpha1, cplx alpha2);

// Least-squares slope of log|T| along Re beta = re, Im beta in [y_lo, y_hi].
double growth_exponent(const CutStripFunction& T, double re, double y_lo, double y_hi,
                       int points = 11);

} // namespace qp
