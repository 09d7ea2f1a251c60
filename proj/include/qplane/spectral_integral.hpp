#pragma once

#include "qplane/field.hpp"

#include <array>
#include <string>
#include <vector>

namespace qp {

// ---------------------------------------------------------------------------
// Angular contour: the image of the real xi-axis under alpha = arcsin(xi/k),
// traversed from -pi/2 + i*tail down to -pi/2, along [-pi/2, pi/2] and down
// to pi/2 - i*tail. The real segment is indented as
//   alpha(t) = t - i eps sin t,
// which is the limit of a small positive imaginary part of k and passes the
// diagonal singular lines on a definite side. The tails start at the
// indented end points -pi/2 + i eps and pi/2 - i eps; with tail_bend > 0
// they lean as alpha = -+pi/2 +- i s - tail_bend (s - eps), pushing
// xi = k sin(alpha) into the lower half-plane (the x3 = 0 regularisation).
enum class ContourPieceKind { left_tail, real_segment, right_tail };

struct ContourPiece {
  ContourPieceKind kind;
  double u0, u1; // parameter interval in traversal order
};

struct QuadNode {
  cplx alpha;
  cplx weight; // Gauss-Legendre weight times d alpha / du
  double u;    // parameter value
};

struct AngularContour {
  double k = 1.0;
  double tail = 4.0;     // maximal |Im alpha| on the tails
  double eps = 0.05;     // indentation of the real segment
  double tail_bend = 0.0;
  std::vector<ContourPiece> pieces;

  cplx point(ContourPieceKind kind, double u) const;
  cplx tangent(ContourPieceKind kind, double u) const;
  // Composite Gauss-Legendre nodes, order nodes per piece, in traversal order.
  std::vector<QuadNode> nodes(int order) const;
  void validate() const;
};

// Real segment split into real_pieces equal parts; tails broken at
// eps, 0.5, 1.5, 3 and then every 2 up to tail.
AngularContour build_gamma_alpha(double k, double tail, double eps, int real_pieces = 8,
                                 double tail_bend = 0.0);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// ---------------------------------------------------------------------------
// Singular lines sigma_n^{+-} = {alpha1 +- alpha2 = pi/2 + n pi} with the
// side on which the integration surface passes them: above when
// Im(alpha1 +- alpha2) > 0 on the surface next to the line's real trace.
struct SingularLine {
  int sign = 1; // +1: alpha1 + alpha2, -1: alpha1 - alpha2
  int n = 0;
  Bypass bypass = Bypass::above;

  double offset() const { return 0.5 * pi + n * pi; }
  std::string name() const;
};

// The four lines bounding the diamond |alpha1| + |alpha2| < pi/2 inside the
// real square, with the flags of the positively indented contour:
// sigma_0^+ and sigma_0^- below, sigma_{-1}^+ and sigma_{-1}^- above.
std::vector<SingularLine> real_square_configuration();

// Flags realised by the surface Gamma x Gamma: the sign of Im(alpha1 +- alpha2)
// at the midpoint of each line's real trace inside the square. Throws
// ErrorKind::domain for a line whose real trace misses the open square.
std::vector<SingularLine> bypass_flags_of(const AngularContour& c,
                                          const std::vector<SingularLine>& lines);

// Matching rule: every bounded cell of the real-trace arrangement that meets
// the open square (-pi/2, pi/2)^2 must be passed on the same side by all its
// edges, measured along the outward normal. Throws
// ErrorKind::unmatched_bypass naming the offending line. Since all lines have
// slope +-1, the cells are rectangles in (alpha1 + alpha2, alpha1 - alpha2).
void validate_bypass(const std::vector<SingularLine>& lines);

// Smallest distance |alpha1 +- alpha2 - (pi/2 + n pi)| / sqrt2 between the
// quadrature surface and the lines |n| <= n_max other than the real-square
// ones, i.e. the lines whose side the configuration does not fix.
double unflagged_line_distance(const AngularContour& c, int order, int n_max = 6);

// ---------------------------------------------------------------------------
struct IntegralConfig {
  double eps = 0.05;
  double tail = 0.0; // 0: default_tail
  int order = 64;    // Gauss-Legendre nodes per piece
  int real_pieces = 8;
  double tail_bend = 0.0; // in [0, 0.1]; larger bends let Q cross the branch cut
  double min_line_distance = 0.05;
  double tail_tolerance = 1e-8; // integrand at the tail end / integrand scale

  void validate() const;
};

struct IntegralResult {
  cplx value;
  double tail = 0.0;
  double eps = 0.0;
  int order = 0;
  std::size_t nodes_per_dim = 0;
  double tail_ratio = 0.0;         // max |integrand| on the last tail node / max overall
  double line_distance = 0.0;      // unflagged_line_distance of the surface
};

// Tail depth max(4, min(8 / (k x3), s* + 1)), where s* is the depth at which
// the exponential factor of the integrand has decayed to e^-60 (including
// the extra decay from bent tails when x1, x2 > 0). The cap keeps T, which
// grows like exp(nu |Im beta| / 2), finite for small x3.
double default_tail(double k, const std::array<double, 3>& x, double eps = 0.05,
                    double tail_bend = 0.0);

// Integrand of
//   u(x) = int int -(ik / 4pi^2) W(a1, a2) cos a1 cos a2 / sqrt(Q)
//                   exp{ik(-x1 sin a1 - x2 sin a2 + x3 sqrt(Q))} da1 da2,
//   Q = 1 - sin^2 a1 - sin^2 a2,
// for given W = T(a1 + a2) T(a1 - a2 + pi). The root is the one with
// Im sqrt(Q) >= 0, which equals the principal root where Im Q >= 0 and makes
// sqrt(Q) = 1 at a1 = a2 = 0 (so the kernel 1/(k sqrt Q) is 1/k there).
// Throws ErrorKind::domain when Q is too close to the positive real axis from
// below for the root to be continuous.
cplx spectral_integrand(double k, const std::array<double, 3>& x, cplx a1, cplx a2, cplx W);

// Tensor-product quadrature of u(x), x3 > 0. The result is directly
// comparable with GreenFunctionModel::at (far_field_consistent). Throws
// ErrorKind::domain for x3 <= 0 or a surface within min_line_distance of an
// unflagged line, ErrorKind::unmatched_bypass if the realised flags fail
// validation, and ErrorKind::convergence if the truncated tails still carry
// more than tail_tolerance of the integrand scale.
IntegralResult eval_double_integral(const GreenFunctionModel& model,
                                    const std::array<double, 3>& x,
                                    const IntegralConfig& cfg = {});

// max over the alpha2 nodes of |integrand(pi/2 - i s, alpha2)|; used to
// check the exponential decay of the tails.
double tail_integrand_magnitude(const GreenFunctionModel& model, const std::array<double, 3>& x,
                                double s, const IntegralConfig& cfg = {});

} // namespace qp
