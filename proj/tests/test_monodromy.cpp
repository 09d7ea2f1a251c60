#include "qplane/error.hpp"
#include "qplane/monodromy.hpp"

#include <doctest.h>

#include <cmath>

using namespace qp;

namespace {

// Independent reference: Newton on the real shooting problem for the two
// trigonometric Lame equations, integrated with scipy's DOP853 at
// rtol 1e-12 (values frozen). Columns: a, nu.
struct Reference {
  double a, nu;
};
const Reference lowest[] = {
    {0.04472795971, 0.29658438744},  {-0.22639383549, 1.13124841614},
    {0.45882360096, 1.42651257563},  {-0.85120687491, 2.03957483340},
    {0.10806241713, 2.28757068353},  {1.33382428142, 2.48088029804},
};

const MonodromyScanResult& default_scan() {
  static const MonodromyScanResult r = scan_and_refine(MonodromyScanConfig{});
  return r;
}

} // namespace

TEST_CASE("spectral constants follow from b") {
  SUBCASE("b = 0") {
    auto c = derive_constants(0.0);
    CHECK(c.nu == doctest::Approx(0.0));
    // sqrt(1/16) = 1/4: lambda = -2i cos(pi/2) = 0
    CHECK(std::abs(c.lambda) < 1e-15);
    CHECK(std::abs(c.kappa1 - cplx(0, 0.5)) < 1e-15);
    CHECK(std::abs(c.kappa2) < 1e-15);
  }
  SUBCASE("b = 3/16") {
    auto c = derive_constants(3.0 / 16.0);
    CHECK(c.nu == doctest::Approx(0.5).epsilon(1e-14));
    // sqrt(1/4) = 1/2: lambda = -2i cos(pi) = 2i
    CHECK(std::abs(c.lambda - cplx(0, 2)) < 1e-14);
  }
  SUBCASE("b = 15/16") {
    auto c = derive_constants(15.0 / 16.0);
    CHECK(c.nu == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(std::abs(c.lambda - cplx(0, -2)) < 1e-14);
    CHECK(std::abs(c.kappa1 - cplx(0, 1.25)) < 1e-14);
    CHECK(std::abs(c.kappa2 - cplx(0, -0.75)) < 1e-14);
  }
  SUBCASE("invariant 4b = nu(nu+1) on a sweep") {
    for (double b = -0.06; b < 12.0; b += 0.173) {
      auto c = derive_constants(b);
      CHECK(std::fabs(c.nu * (c.nu + 1.0) - 4.0 * b) < 1e-12 * (1.0 + b));
    }
  }
  CHECK_THROWS_AS(derive_constants(-1.0 / 16.0), Error);
  CHECK_THROWS_AS(derive_constants(NAN), Error);
}

TEST_CASE("objective is continuous in (a, b)") {
  const double a = 0.7, b = 1.3;
  ObjectiveValue v = objective(a, b);
  double prev = 1e300;
  for (double h : {1e-3, 1e-4, 1e-5}) {
    ObjectiveValue w = objective(a + h, b + h);
    double d = std::abs(w.m11 - v.m11) + std::abs(w.n12 - v.n12);
    CHECK(d < 1e3 * h);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("objective entries sit on fixed phase lines") {
  // m11 real and n12 imaginary under the downward square-root cut.
  for (double a : {-3.0, 0.2, 5.0})
    for (double b : {0.1, 2.0, 7.5}) {
      ObjectiveValue v = objective(a, b);
      CHECK(std::fabs(v.m11.imag()) < 1e-9 * (1.0 + std::abs(v.m11)));
      CHECK(std::fabs(v.n12.real()) < 1e-9 * (1.0 + std::abs(v.n12)));
    }
}

TEST_CASE("scan reports the observed phases") {
  const auto& r = default_scan();
  double p1 = std::fmod(r.phase_m11 + 1e-6, pi) - 1e-6;
  double p2 = r.phase_n12;
  CHECK(std::fabs(p1) < 1e-6);
  CHECK(std::fabs(p2 - 0.5 * pi) < 1e-6);
  CHECK(r.phase_spread_m11 < 1e-8);
  CHECK(r.phase_spread_n12 < 1e-8);
}

TEST_CASE("five lowest eigenpairs agree with the independent shooting reference") {
  const auto& r = default_scan();
  REQUIRE(r.records.size() >= 6);
  for (std::size_t k = 0; k < 6; ++k) {
    const EigenRecord& e = r.records[k];
    CAPTURE(k);
    CHECK(e.index == int(k) + 1);
    CHECK(std::fabs(e.a - lowest[k].a) < 1e-8);
    CHECK(std::fabs(e.nu - lowest[k].nu) < 1e-8);
    CHECK(e.residual_m11 < 1e-9);
    CHECK(e.residual_n12 < 1e-9);
    CHECK(e.method == SolveMethod::monodromy);
    CHECK(std::fabs(e.nu * (e.nu + 1.0) - 4.0 * e.b) < 1e-12);
  }
}

TEST_CASE("records are ordered, unique and inside the window") {
  const auto& r = default_scan();
  for (std::size_t k = 0; k < r.records.size(); ++k) {
    const EigenRecord& e = r.records[k];
    CHECK(e.a >= -12.0);
    CHECK(e.a <= 12.0);
    CHECK(e.b > 0.0);
    CHECK(e.b <= 12.0);
    if (k > 0) {
      const EigenRecord& p = r.records[k - 1];
      CHECK((p.nu < e.nu || (std::fabs(p.nu - e.nu) <= 1e-8 && p.a < e.a)));
      CHECK(std::hypot(p.a - e.a, p.b - e.b) > 1e-8);
    }
  }
}

TEST_CASE("doubling the grid finds the same roots") {
  const auto& r = default_scan();
  MonodromyScanConfig fine;
  fine.grid_n = 2 * fine.grid_n;
  auto r2 = scan_and_refine(fine);
  // Compare the part of the spectrum well away from the window edges.
  auto inner = [](const EigenRecord& e) { return e.b < 11.0 && std::fabs(e.a) < 11.0; };
  std::vector<EigenRecord> x, y;
  for (const auto& e : r.records)
    if (inner(e))
      x.push_back(e);
  for (const auto& e : r2.records)
    if (inner(e))
      y.push_back(e);
  REQUIRE(x.size() == y.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    CHECK(std::fabs(x[k].a - y[k].a) < 1e-8);
    CHECK(std::fabs(x[k].b - y[k].b) < 1e-8);
  }
}

TEST_CASE("a window without eigenpairs yields an empty list") {
  MonodromyScanConfig cfg;
  cfg.a_min = 9.0;
  cfg.a_max = 11.0;
  cfg.b_min = 0.01;
  cfg.b_max = 0.5;
  cfg.grid_n = 12;
  auto r = scan_and_refine(cfg);
  CHECK(r.records.empty());
}

TEST_CASE("invalid scan configurations are rejected") {
  MonodromyScanConfig cfg;
  cfg.a_min = 1.0;
  cfg.a_max = 0.0;
  CHECK_THROWS_AS(scan_and_refine(cfg), Error);
  cfg = {};
  cfg.grid_n = 3;
  CHECK_THROWS_AS(scan_and_refine(cfg), Error);
  cfg = {};
  cfg.b_min = -1.0;
  CHECK_THROWS_AS(scan_and_refine(cfg), Error);
}

TEST_CASE("order_and_dedup merges near-identical roots and numbers from one") {
  std::vector<EigenRecord> v;
  v.push_back(make_record(0.5, 2.0, SolveMethod::monodromy));
  v.push_back(make_record(0.1, 1.0, SolveMethod::monodromy));
  v.push_back(make_record(0.1 + 1e-10, 1.0, SolveMethod::monodromy));
  v.push_back(make_record(-0.3, 1.0, SolveMethod::monodromy));
  auto out = order_and_dedup(v, 1e-8);
  REQUIRE(out.size() == 3);
  CHECK(out[0].a == doctest::Approx(-0.3));
  CHECK(out[1].a == doctest::Approx(0.1));
  CHECK(out[2].b == doctest::Approx(2.0));
  CHECK(out[0].index == 1);
  CHECK(out[2].index == 3);
}

TEST_CASE("translation by 2pi acts as the expected transfer matrix") {
  const auto& r = default_scan();
  for (std::size_t k = 0; k < 5; ++k) {
    TransferReport t = transfer_matrix_check(r.records[k]);
    CAPTURE(k);
    CHECK(t.s_error < 1e-7);
    CHECK(t.lambda_error < 1e-7);
    CHECK(t.det_error < 1e-8);
  }
  CHECK_THROWS_AS(transfer_matrix_check(r.records[0], cplx(0.0, -1.0)), Error);
}
