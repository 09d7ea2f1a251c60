#include "qplane/error.hpp"
#include "qplane/spectral_integral.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

using namespace qp;

namespace {

const MonodromyScanResult& default_scan() {
  static const MonodromyScanResult r = scan_and_refine(MonodromyScanConfig{});
  return r;
}

// (0.3, 0.5, 0.8) / |.| scaled to |x| = kr / k.
std::array<double, 3> probe(double kr, double k = 1.0) {
  const double n = std::sqrt(0.3 * 0.3 + 0.5 * 0.5 + 0.8 * 0.8);
  const double r = kr / k;
  return {0.3 / n * r, 0.5 / n * r, 0.8 / n * r};
}

IntegralConfig with_order(int order, double eps = 0.05) {
  IntegralConfig c;
  c.order = order;
  c.eps = eps;
  return c;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::config;
}

} // namespace

TEST_CASE("Gauss-Legendre rule integrates polynomials of degree 2n - 1 exactly") {
  for (int n : {1, 5, 16, 64}) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    for (int p = 0; p <= 2 * n - 1; p += (n > 8 ? 7 : 1)) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        s += w[i] * std::pow(x[i], p);
      double exact = (p % 2 == 0) ? 2.0 / (p + 1) : 0.0;
      CHECK(std::fabs(s - exact) < 1e-13);
    }
    for (int i = 0; i < n; ++i)
      CHECK(x[i] == -x[n - 1 - i]);
  }
  std::vector<double> x, w;
  CHECK_THROWS_AS(gauss_legendre(0, x, w), Error);
}

TEST_CASE("angular contour: xi images, continuity and parameters") {
  const double k = 1.7;
  AngularContour c = build_gamma_alpha(k, 5.0, 0.05);
  // Unindented real trace covers [-k, k]; the indentation moves it by O(eps).
  for (int i = 0; i <= 20; ++i) {
    double t = -0.5 * pi + pi * i / 20.0;
    double xi = k * std::sin(t);
    CHECK(std::fabs(xi) <= k * (1.0 + 1e-12));
    cplx xi_eps = k * std::sin(c.point(ContourPieceKind::real_segment, t));
    CHECK(std::abs(xi_eps - xi) < 1.2 * k * c.eps);
  }
  for (double s : {0.3, 1.0, 2.5, 5.0}) {
    cplx xi = k * std::sin(c.point(ContourPieceKind::right_tail, s));
    CHECK(std::abs(xi - k * std::cosh(s)) < 1e-12 * k * std::cosh(s));
    CHECK(xi.real() > k);
    cplx xl = k * std::sin(c.point(ContourPieceKind::left_tail, -s));
    CHECK(std::abs(xl + k * std::cosh(s)) < 1e-12 * k * std::cosh(s));
  }
  // Consecutive pieces join; the tails reach the requested depth.
  for (std::size_t i = 0; i + 1 < c.pieces.size(); ++i) {
    cplx end = c.point(c.pieces[i].kind, c.pieces[i].u1);
    cplx start = c.point(c.pieces[i + 1].kind, c.pieces[i + 1].u0);
    CHECK(std::abs(end - start) < 1e-15);
  }
  CHECK(c.point(c.pieces.front().kind, c.pieces.front().u0).imag() == doctest::Approx(5.0));
  CHECK(c.point(c.pieces.back().kind, c.pieces.back().u1).imag() == doctest::Approx(-5.0));
  // Node weights sum to the contour displacement.
  cplx sum = 0.0;
  for (const auto& n : c.nodes(8))
    sum += n.weight;
  cplx disp = c.point(c.pieces.back().kind, c.pieces.back().u1) -
              c.point(c.pieces.front().kind, c.pieces.front().u0);
  CHECK(std::abs(sum - disp) < 1e-12);
  CHECK_THROWS_AS(build_gamma_alpha(0.0, 5.0, 0.05), Error);
  CHECK_THROWS_AS(build_gamma_alpha(1.0, 5.0, 0.2), Error);
  CHECK_THROWS_AS(build_gamma_alpha(1.0, 0.01, 0.05), Error);
  CHECK_THROWS_AS(build_gamma_alpha(1.0, 5.0, 0.05, 8, 0.3), Error);
}

TEST_CASE("the indented contour realises the real-square bypass configuration") {
  AngularContour c = build_gamma_alpha(1.0, 4.0, 0.05);
  auto expected = real_square_configuration();
  auto flags = bypass_flags_of(c, expected);
  REQUIRE(flags.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CAPTURE(flags[i].name());
    CHECK(flags[i].bypass == expected[i].bypass);
  }
  CHECK_NOTHROW(validate_bypass(flags));
  CHECK_NOTHROW(validate_bypass({}));
  // Lines whose real traces miss the square have no realised side.
  CHECK_THROWS_AS(bypass_flags_of(c, {{+1, 1, Bypass::above}}), Error);
  CHECK(unflagged_line_distance(c, 16) > 0.05);
}

TEST_CASE("flipping one flag around the diamond is an unmatched bypass") {
  auto base = real_square_configuration();
  for (std::size_t i = 0; i < base.size(); ++i) {
    auto lines = base;
    lines[i].bypass = lines[i].bypass == Bypass::above ? Bypass::below : Bypass::above;
    CAPTURE(lines[i].name());
    try {
      validate_bypass(lines);
      FAIL("accepted an unmatched configuration");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::unmatched_bypass);
      CHECK(std::string(e.what()).find(lines[i].name()) != std::string::npos);
    }
  }
  // Flipping all four keeps them matched (the mirror-image surface).
  auto all = base;
  for (auto& l : all)
    l.bypass = l.bypass == Bypass::above ? Bypass::below : Bypass::above;
  CHECK_NOTHROW(validate_bypass(all));
  // Three lines of slopes +-1 bound no cell, so there is nothing to match.
  CHECK_NOTHROW(validate_bypass({base[0], base[1], base[2]}));
  // Contradictory flags on one line.
  CHECK(kind_of([&] { validate_bypass({base[0], {+1, 0, Bypass::above}}); }) ==
        ErrorKind::unmatched_bypass);
}

TEST_CASE("square-root branch gives the kernel 1/k at the origin") {
  const double k = 2.3;
  cplx f = spectral_integrand(k, {0.0, 0.0, 1.0}, 0.0, 0.0, 1.0);
  // -(ik / 4pi^2) e^{ik x3} at alpha = 0.
  cplx expected = -(cplx(0.0, k) / (4.0 * pi * pi)) * std::exp(cplx(0.0, k));
  CHECK(std::abs(f - expected) < 1e-15);
  // On a tail the root is the decaying one.
  cplx g = spectral_integrand(k, {0.0, 0.0, 1.0}, cplx(0.5 * pi, -2.0), 0.0, 1.0);
  CHECK(std::abs(g) < std::exp(-k * std::sinh(2.0) * 0.99) * k * std::cosh(2.0));
}

TEST_CASE("spectral integral matches the closed-form field") {
  const auto& r = default_scan();
  GreenFunctionModel m(r.records[0], 1.0);
  for (double kr : {1.0, 2.0, 4.0}) {
    CAPTURE(kr);
    auto x = probe(kr);
    auto res = eval_double_integral(m, x, with_order(24));
    CHECK(rel(res.value, m.at(x[0], x[1], x[2])) < 1e-3);
    CHECK(res.tail_ratio < 1e-8);
    CHECK(res.line_distance > 0.05);
  }
  // A higher record and another wavenumber.
  GreenFunctionModel m4(r.records[4], 1.5);
  auto x = probe(2.0, 1.5);
  CHECK(rel(eval_double_integral(m4, x, with_order(24)).value, m4.at(x[0], x[1], x[2])) < 1e-3);
}

TEST_CASE("spectral integral is stable under contour deformation and refinement") {
  const auto& r = default_scan();
  GreenFunctionModel m(r.records[2], 1.0);
  auto x = probe(2.0);
  cplx a = eval_double_integral(m, x, with_order(32, 0.05)).value;
  cplx b = eval_double_integral(m, x, with_order(32, 0.1)).value;
  CHECK(rel(b, a) < 1e-6);
  auto y = probe(4.0);
  cplx lo = eval_double_integral(m, y, with_order(16)).value;
  cplx hi = eval_double_integral(m, y, with_order(32)).value;
  CHECK(rel(lo, hi) < 1e-4);
}

TEST_CASE("tail integrand decays like exp(-k x3 sinh s)") {
  const auto& r = default_scan();
  GreenFunctionModel m(r.records[0], 1.0);
  auto x = probe(2.0);
  IntegralConfig c = with_order(16);
  double m1 = tail_integrand_magnitude(m, x, 1.0, c);
  double m2 = tail_integrand_magnitude(m, x, 2.0, c);
  // Exponent k x3 (cosh s - O(1)) with sqrt(cosh^2 s - 1) = sinh s.
  double predicted = -m.k() * x[2] * (std::sinh(2.0) - std::sinh(1.0));
  double measured = std::log(m2 / m1);
  CHECK(std::fabs(measured - predicted) < 0.1 * std::fabs(predicted));
  CHECK_THROWS_AS(tail_integrand_magnitude(m, x, 100.0, c), Error);
}

TEST_CASE("swapping x1 and x2 maps the integral to Q times itself") {
  // W(a2, a1) = Q W(a1, a2) with Q = T(3pi/2) = +1 (record 0) or -1 (record 1).
  const auto& r = default_scan();
  for (std::size_t k : {0u, 1u}) {
    GreenFunctionModel m(r.records[k], 1.0);
    const double q = k == 0 ? 1.0 : -1.0;
    std::array<double, 3> x = {0.4, 1.1, 0.9}, y = {1.1, 0.4, 0.9};
    cplx a = eval_double_integral(m, x, with_order(16)).value;
    cplx b = eval_double_integral(m, y, with_order(16)).value;
    CHECK(std::abs(b - q * a) < 1e-8 * std::abs(a));
  }
}

TEST_CASE("bent tails reach points just above the quarter-plane") {
  const auto& r = default_scan();
  GreenFunctionModel m(r.records[0], 1.0);
  std::array<double, 3> x = {0.6, 0.9, 1e-3};
  IntegralConfig c = with_order(24);
  c.tail_bend = 0.1;
  auto res = eval_double_integral(m, x, c);
  CHECK(rel(res.value, m.at(x[0], x[1], x[2])) < 1e-3);
  CHECK(default_tail(1.0, x, 0.05, 0.1) < default_tail(1.0, x, 0.05, 0.0));
}

TEST_CASE("spectral integral rejects invalid requests") {
  const auto& r = default_scan();
  GreenFunctionModel m(r.records[0], 1.0);
  CHECK(kind_of([&] { eval_double_integral(m, {0.3, 0.2, 0.0}); }) == ErrorKind::domain);
  CHECK(kind_of([&] { eval_double_integral(m, {0.3, 0.2, -1.0}); }) == ErrorKind::domain);
  IntegralConfig bad;
  bad.eps = 0.5;
  CHECK(kind_of([&] { eval_double_integral(m, {0.3, 0.2, 1.0}, bad); }) == ErrorKind::config);
  bad = {};
  bad.order = 1;
  CHECK(kind_of([&] { eval_double_integral(m, {0.3, 0.2, 1.0}, bad); }) == ErrorKind::config);
  // Tails cut far too short: the truncation is detected, with diagnostics.
  IntegralConfig shallow = with_order(8);
  shallow.tail = 0.6;
  try {
    eval_double_integral(m, {0.3, 0.2, 1.0}, shallow);
    FAIL("short tails accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::convergence);
    CHECK(std::string(e.what()).find("tail") != std::string::npos);
  }
}
