#include "qplane/error.hpp"
#include "qplane/lame_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace qp;

namespace {

// Same frozen DOP853 reference as the monodromy tests, plus T^L(pi) for
// each pair (which must come out as +-1).
struct Reference {
  double a, nu, tl_pi;
};
const Reference lowest[] = {
    {0.04472795971, 0.29658438744, 1.0},  {-0.22639383549, 1.13124841614, -1.0},
    {0.45882360096, 1.42651257563, 1.0},  {-0.85120687491, 2.03957483340, 1.0},
    {0.10806241713, 2.28757068353, -1.0},
};

} // namespace

TEST_CASE("angle maps are bijections onto [0, pi]") {
  CHECK(map_chi(0.5 * pi) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(map_chi(pi) == doctest::Approx(0.5 * pi));
  CHECK(map_chi(1.5 * pi) == doctest::Approx(pi));
  CHECK(map_tau(0.5 * pi) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(map_tau(0.0) == doctest::Approx(0.5 * pi));
  CHECK(map_tau(-0.5 * pi) == doctest::Approx(pi));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    double b1 = 0.5 * pi + pi * u(rng), b2 = -0.5 * pi + pi * u(rng);
    CHECK(std::fabs(beta_from_chi(map_chi(b1)) - b1) < 1e-7);
    CHECK(std::fabs(beta_from_tau(map_tau(b2)) - b2) < 1e-7);
  }
  CHECK_THROWS_AS(map_chi(0.0), Error);
  CHECK_THROWS_AS(map_tau(pi), Error);
  CHECK_THROWS_AS(beta_from_chi(-0.1), Error);
}

TEST_CASE("Lame equations are the minimal ODE after the change of variable") {
  // Write T(beta) = U(chi(beta)); then U'' chi'^2 + U' chi'' + f U' chi' + g U = 0.
  // Check that the coefficient form used for shooting reproduces this.
  const double a = 0.37, nu = 1.7, b = 0.25 * nu * (nu + 1.0);
  for (double beta : {1.7, 2.3, 3.0, 3.9, 4.5}) {
    const double h = 1e-4;
    auto chi = [](double x) { return map_chi(x); };
    double c0 = chi(beta), c1 = (chi(beta + h) - chi(beta - h)) / (2 * h);
    double c2 = (chi(beta + h) - 2 * c0 + chi(beta - h)) / (h * h);
    double f = -0.5 * std::tan(beta), g = a / std::cos(beta) + b;
    // choose U = 1, U' = 0.3 at c0; ODE for T gives U''
    double U = 1.0, dU = 0.3;
    double ddU = -(dU * c2 + f * dU * c1 + g * U) / (c1 * c1);
    CHECK(lame_second_derivative(LameSide::L, a, nu, c0, U, dU) ==
          doctest::Approx(ddU).epsilon(1e-5));
  }
  for (double beta : {-1.2, -0.4, 0.3, 1.1}) {
    const double h = 1e-4;
    auto tau = [](double x) { return map_tau(x); };
    double t0 = tau(beta), t1 = (tau(beta + h) - tau(beta - h)) / (2 * h);
    double t2 = (tau(beta + h) - 2 * t0 + tau(beta - h)) / (h * h);
    double f = -0.5 * std::tan(beta), g = a / std::cos(beta) + b;
    double U = 1.0, dU = -0.4;
    double ddU = -(dU * t2 + f * dU * t1 + g * U) / (t1 * t1);
    CHECK(lame_second_derivative(LameSide::R, a, nu, t0, U, dU) ==
          doctest::Approx(ddU).epsilon(1e-5));
  }
}

TEST_CASE("lowest shooting eigenpairs match the frozen reference") {
  auto r = solve_shooting();
  REQUIRE(r.records.size() >= 5);
  for (std::size_t k = 0; k < 5; ++k) {
    const EigenRecord& e = r.records[k];
    CAPTURE(k);
    CHECK(e.method == SolveMethod::shooting);
    CHECK(e.index == int(k) + 1);
    CHECK(std::fabs(e.a - lowest[k].a) < 1e-8);
    CHECK(std::fabs(e.nu - lowest[k].nu) < 1e-8);
    CHECK(4.0 * e.b == e.nu * (e.nu + 1.0));
    CHECK(e.residual_m11 < 1e-9);
    CHECK(e.residual_n12 < 1e-9);
  }
}

TEST_CASE("eigenfunctions have the symmetry forced by the boundary conditions") {
  // Both equations are invariant under chi -> pi - chi. T^L has zero slope at
  // both ends, so it is even or odd about pi/2 and T^L(pi) = +-1 for the
  // (1, 0) start. T^R (zero slope at 0, zero value at pi) has no such parity.
  for (const auto& ref : lowest) {
    auto R = lame_solution(LameSide::R, ref.a, ref.nu, {0.3, pi - 0.3, pi});
    auto L = lame_solution(LameSide::L, ref.a, ref.nu, {0.3, pi - 0.3, pi});
    CHECK(std::fabs(R[2].value) < 1e-9);
    CHECK(std::fabs(L[2].derivative) < 1e-9);
    CHECK(std::fabs(L[2].value - ref.tl_pi) < 1e-8);
    CHECK(std::fabs(L[0].value - ref.tl_pi * L[1].value) < 1e-8);
  }
}

TEST_CASE("sampling order does not change the solution") {
  auto x = lame_solution(LameSide::L, 0.4, 2.0, {2.0, 0.5, 1.0});
  auto y = lame_solution(LameSide::L, 0.4, 2.0, {0.5, 1.0, 2.0});
  CHECK(x[0].value == doctest::Approx(y[2].value).epsilon(1e-11));
  CHECK(x[1].value == doctest::Approx(y[0].value).epsilon(1e-11));
  CHECK_THROWS_AS(lame_solution(LameSide::L, 0.4, 2.0, {4.0}), Error);
  CHECK_THROWS_AS(shoot_boundary_residuals(0.0, -1.0), Error);
}

TEST_CASE("consecutive rR roots in nu are separated by a sign change of dT^R at pi") {
  // Sturm interlacing sanity check at fixed a.
  const double a = 0.5;
  std::vector<double> nus, rr, dr;
  for (double nu = 0.0; nu <= 6.0; nu += 0.01) {
    auto s = lame_solution(LameSide::R, a, nu, {pi});
    nus.push_back(nu);
    rr.push_back(s[0].value);
    dr.push_back(s[0].derivative);
  }
  std::vector<std::size_t> roots;
  for (std::size_t k = 0; k + 1 < rr.size(); ++k)
    if (rr[k] * rr[k + 1] < 0)
      roots.push_back(k);
  REQUIRE(roots.size() >= 2);
  for (std::size_t j = 0; j + 1 < roots.size(); ++j) {
    bool flip = false;
    for (std::size_t k = roots[j]; k <= roots[j + 1]; ++k)
      if (dr[k] * dr[k + 1] < 0)
        flip = true;
    CHECK(flip);
  }
}

TEST_CASE("shooting and monodromy give the same lowest eigenpairs") {
  auto s = solve_shooting();
  MonodromyScanConfig cfg;
  auto m = scan_and_refine(cfg);
  REQUIRE(s.records.size() >= 5);
  REQUIRE(m.records.size() >= 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(std::fabs(s.records[k].a - m.records[k].a) < 1e-6);
    CHECK(std::fabs(s.records[k].b - m.records[k].b) < 1e-6);
  }
}

TEST_CASE("invalid shooting configuration is rejected") {
  LameShootConfig cfg;
  cfg.nu_min = -1.0;
  CHECK_THROWS_AS(solve_shooting(cfg), Error);
  cfg = {};
  cfg.grid_n_a = 2;
  CHECK_THROWS_AS(solve_shooting(cfg), Error);
}
