#pragma once

#include "qplane/cut_strip.hpp"
#include "qplane/lame_oracle.hpp"
#include "qplane/monodromy.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace qp {

// ---------------------------------------------------------------------------
// Sphero-conal coordinates (r, chi, tau), 0 < chi, tau < pi:
//   x1 =  r [cos chi/sqrt2 sqrt(1 - cos^2 tau/2) - cos tau/sqrt2 sqrt(1 - cos^2 chi/2)]
//   x2 = -r [cos chi/sqrt2 sqrt(1 - cos^2 tau/2) + cos tau/sqrt2 sqrt(1 - cos^2 chi/2)]
//   x3 =  r sin chi sin tau
// tau = pi is the quarter-plane {x1 > 0, x2 > 0, x3 = 0}; chi = 0, chi = pi
// and tau = 0 are the other three quadrants of x3 = 0.
struct SpheroConalPoint {
  double r = 1.0;
  double chi = 0.5 * pi;
  double tau = 0.5 * pi;

  void validate() const; // r > 0, chi and tau in [0, pi]
};

std::array<double, 3> sphero_to_cartesian(const SpheroConalPoint& p);

// Inverse for x3 >= 0. Throws ErrorKind::domain for x3 < 0 or the origin,
// and ErrorKind::singular_point on the four seam directions (+-r, 0, 0),
// (0, +-r, 0), where chi and tau are both 0 or pi and the map degenerates.
SpheroConalPoint cartesian_to_sphero(double x1, double x2, double x3);

// ---------------------------------------------------------------------------
// Angular factors T^L(chi) = T(2 arccos(cos chi/sqrt2)) and
// T^R(tau) = T(2 arcsin(cos tau/sqrt2)), with derivatives in the angle.
struct AngularValue {
  cplx value;
  cplx derivative;
};

AngularValue lame_from_T(const CutStripFunction& T, LameSide side, double angle);

// Prefactor C in u = C (kr)^{-1/2} H^(1)_{nu+1/2}(kr) T^R(tau) T^L(chi).
//   far_field_consistent: C = -i k e^{i nu pi/2} / (2 sqrt(2 pi)), the value
//     for which u ~ -2 i pi w e^{ikr}/(kr) with w = k T^R T^L / (4 pi^2 i);
//   scaled_two_over_pi: C = -i k e^{i nu pi/2} / (pi sqrt(2 pi)), which is 2/pi
//     times the above.
enum class AmplitudeConvention { far_field_consistent, scaled_two_over_pi };

cplx amplitude_constant(double k, double nu, AmplitudeConvention conv);

class GreenFunctionModel {
public:
  GreenFunctionModel(const EigenRecord& record, double k,
                     AmplitudeConvention conv = AmplitudeConvention::far_field_consistent);

  const EigenRecord& record() const { return rec_; }
  double k() const { return k_; }
  double nu() const { return rec_.nu; }
  cplx amplitude() const { return c_; }
  const CutStripFunction& T() const { return T_; }

  AngularValue lame_L(double chi) const { return lame_from_T(T_, LameSide::L, chi); }
  AngularValue lame_R(double tau) const { return lame_from_T(T_, LameSide::R, tau); }

  // (kr)^{-1/2} H^(1)_{nu+1/2}(kr)
  cplx radial(double r) const;
  // Directivity w = k T^R(tau) T^L(chi) / (4 pi^2 i).
  cplx directivity(double chi, double tau) const;

  cplx operator()(const SpheroConalPoint& p) const;
  // Cartesian evaluation; x3 < 0 by even reflection in x3.
  cplx at(double x1, double x2, double x3) const;

private:
  EigenRecord rec_;
  double k_;
  cplx c_;
  CutStripFunction T_;
};

cplx eval_green_function(const GreenFunctionModel& model, const SpheroConalPoint& p);

// ---------------------------------------------------------------------------
// Numerical verification of the assembled field.
struct FieldCheck {
  std::string name;
  double value = 0.0; // normalised residual (or |fit - target| for the slope)
  double tol = 0.0;
  bool pass = false;
};

struct FieldReport {
  std::vector<FieldCheck> checks;
  double near_field_slope = 0.0;
  bool all_pass() const;
  const FieldCheck& get(const std::string& name) const;
};

struct FieldVerifyConfig {
  std::vector<double> radial_kr = {1.0, 5.0, 20.0};
  int interior_points = 10;  // angular and Helmholtz samples
  int boundary_points = 6;   // per boundary locus
  double helmholtz_step = 1e-4; // relative to r
  double dirichlet_offset = 1e-6;
  double near_r_min = 1e-4, near_r_max = 1e-2;
  int near_points = 9;
  double far_kr = 200.0;
  // Tolerances.
  double tol_radial = 1e-6;      // x |u|
  double tol_angular = 1e-8;     // x (|U''| + |U'| + |U|)
  double tol_neumann = 1e-5;     // x k |u|
  double tol_helmholtz = 1e-4;   // x k^2 |u|
  double tol_dirichlet = 1e-6;   // x max over tau of |u| at the same (r, chi)
  double tol_trace = 1e-7;       // the same, on tau = pi (set by the eigenpair residual)
  double tol_near_slope = 1e-3;  // |slope + nu + 1|
  double tol_far = 1e-3;         // relative

  void validate() const;
};

// Checks: radial, angular_L, angular_R, neumann, helmholtz, dirichlet (at
// tau = pi - dirichlet_offset), dirichlet_trace (at tau = pi),
// near_field_slope, far_field (leading order) and far_field_corrected (with
// the first Hankel correction). Near tau = pi the field vanishes linearly, so
// the dirichlet value is about dirichlet_offset |dT^R/dtau(pi)| / max |T^R|;
// the leading-order far-field mismatch is about nu(nu + 1) / (2 far_kr).
FieldReport verify_field(const GreenFunctionModel& model, const FieldVerifyConfig& cfg = {});

// Relative mismatch |u kr e^{-ikr} - target| / |target| at (kr, chi, tau),
// target = -2 i pi w (leading order) or the same times the first Hankel
// correction 1 + i(4 mu^2 - 1)/(8 kr), mu = nu + 1/2.
double far_field_mismatch(const GreenFunctionModel& model, double kr, double chi, double tau,
                          bool with_first_correction = false);

// Least-squares slope of log|u| against log r on [r_min, r_max].
double near_field_slope(const GreenFunctionModel& model, double chi, double tau, double r_min,
                        double r_max, int points);

// CSV columns r,chi,tau,x1,x2,x3,re_u,im_u with 17 significant digits.
void write_field_csv(std::ostream& os, const GreenFunctionModel& model,
                     const std::vector<SpheroConalPoint>& points);

} // namespace qp
