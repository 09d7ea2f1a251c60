#pragma once

#include "qplane/fuchsian.hpp"

#include <vector>

namespace qp {

// Principal-sheet evaluator for T = psi_{1,2}, the exponent-0 solution at
// pi/2 normalised by T(pi/2) = 1.
//
// The principal sheet is reached from beta = pi along the route
//   pi -> pi + i h -> Re(beta) + i h -> beta,   h = sign(Im beta) max(|Im beta|, 1),
// with h = +1 for real targets. This never crosses the real axis, so T is
// single-valued on the plane cut along (-inf, -pi/2] and [5pi/2, inf) (plus
// [3pi/2, 5pi/2] when T is branched at 3pi/2, i.e. away from eigenpairs; real
// points there take their value from above). Targets within the handoff
// radius of a singular point other than pi/2 are reached through a local
// Frobenius fit anchored on the segment from the singular point towards the
// target.
class CutStripFunction {
public:
  explicit CutStripFunction(const MinimalOdeParams& p, const ConnectionConfig& cfg = {});

  const MinimalOdeParams& params() const { return p_; }

  SolutionState state(cplx beta) const;
  cplx operator()(cplx beta) const { return state(beta).value; }

  // States at a sequence of points, continuing from one point to the next
  // when the connecting segment cannot leave the principal sheet; falls back
  // to the principal route otherwise. Values agree with state() point by point.
  std::vector<SolutionState> states_along(const std::vector<cplx>& betas) const;

  // T continued from its principal value at path.front() along the path.
  // The path may cross the cuts; the result is then off the principal sheet.
  SolutionState eval_along(const BetaPath& path) const;

  // Value of the regular part of T at a singular point c (the coefficient of
  // the exponent-0 local solution, normalised to 1 at c).
  cplx regular_value_at(double c) const;

  // Coefficients (c_regular, c_sqrt) of a state in the local basis at a
  // singular point, with the square-root cut along cut_dir.
  Eigen::Vector2cd local_coefficients(const SolutionState& s, double center,
                                      cplx cut_dir) const;

private:
  SolutionState route(cplx beta) const;
  SolutionState near_singular(cplx beta, double c) const;
  bool can_continue(cplx from, cplx to) const;

  MinimalOdeParams p_;
  ConnectionConfig cfg_;
  FrobeniusExpansion regular_;
  SolutionState at_pi_, above_pi_, below_pi_;
};

} // namespace qp
