#include "qplane/spectral_integral.hpp"

#include "qplane/error.hpp"
#include "qplane/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qp {

namespace {

const cplx I(0.0, 1.0);

// Pairwise summation: the result depends only on the order of the input.
cplx pairwise_sum(const cplx* v, std::size_t n) {
  if (n <= 8) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += v[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

// sigma_0^+-, sigma_{-1}^+- bound the diamond |alpha1| + |alpha2| < pi/2.
bool is_real_square_line(int n) { return n == 0 || n == -1; }

} // namespace

// ---------------------------------------------------------------------------
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1)
    throw Error(ErrorKind::config, "Gauss-Legendre order must be positive");
  // Golub-Welsch: eigen-decomposition of the Jacobi matrix.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k)
    sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()(i);
    double v = es.eigenvectors()(0, i);
    w[i] = 2.0 * v * v;
  }
  // Symmetrise against rounding so that mirrored pieces give mirrored nodes.
  for (int i = 0; i < n / 2; ++i) {
    double a = 0.5 * (x[n - 1 - i] - x[i]);
    double b = 0.5 * (w[i] + w[n - 1 - i]);
    x[i] = -a;
    x[n - 1 - i] = a;
    w[i] = w[n - 1 - i] = b;
  }
  if (n % 2 == 1)
    x[n / 2] = 0.0;
}

// ---------------------------------------------------------------------------
cplx AngularContour::point(ContourPieceKind kind, double u) const {
  switch (kind) {
  case ContourPieceKind::left_tail: { // u = -s
    double s = -u;
    return cplx(-0.5 * pi - tail_bend * (s - eps), s);
  }
  case ContourPieceKind::real_segment:
    return cplx(u, -eps * std::sin(u));
  case ContourPieceKind::right_tail:
    return cplx(0.5 * pi - tail_bend * (u - eps), -u);
  }
  return 0.0;
}

cplx AngularContour::tangent(ContourPieceKind kind, double u) const {
  switch (kind) {
  case ContourPieceKind::left_tail:
    return cplx(tail_bend, -1.0);
  case ContourPieceKind::real_segment:
    return cplx(1.0, -eps * std::cos(u));
  case ContourPieceKind::right_tail:
    return cplx(-tail_bend, -1.0);
  }
  return 0.0;
}

std::vector<QuadNode> AngularContour::nodes(int order) const {
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  std::vector<QuadNode> out;
  out.reserve(pieces.size() * order);
  for (const auto& p : pieces) {
    double mid = 0.5 * (p.u0 + p.u1), half = 0.5 * (p.u1 - p.u0);
    for (int i = 0; i < order; ++i) {
      double u = mid + half * x[i];
      out.push_back({point(p.kind, u), half * w[i] * tangent(p.kind, u), u});
    }
  }
  return out;
}

void AngularContour::validate() const {
  if (!(k > 0.0) || !std::isfinite(k))
    throw Error(ErrorKind::config, "contour wavenumber must be positive");
  if (!(eps > 0.0) || eps > 0.1)
    throw Error(ErrorKind::config, "indentation must lie in (0, 0.1]");
  if (!(tail > eps) || !std::isfinite(tail))
    throw Error(ErrorKind::config, "tail truncation must exceed the indentation");
  if (!(tail_bend >= 0.0) || tail_bend > 0.1)
    throw Error(ErrorKind::config, "tail bend must lie in [0, 0.1]");
  if (pieces.empty())
    throw Error(ErrorKind::config, "contour has no pieces");
}

AngularContour build_gamma_alpha(double k, double tail, double eps, int real_pieces,
                                 double tail_bend) {
  AngularContour c;
  c.k = k;
  c.tail = tail;
  c.eps = eps;
  c.tail_bend = tail_bend;
  if (real_pieces < 1)
    throw Error(ErrorKind::config, "real segment needs at least one piece");
  c.pieces.clear();
  std::vector<double> br = {eps};
  for (double b : {0.5, 1.5, 3.0})
    if (b > br.back() && b < tail)
      br.push_back(b);
  while (br.back() + 2.0 < tail)
    br.push_back(br.back() + 2.0);
  if (tail > br.back())
    br.push_back(tail);
  for (std::size_t i = br.size() - 1; i > 0; --i)
    c.pieces.push_back({ContourPieceKind::left_tail, -br[i], -br[i - 1]});
  for (int i = 0; i < real_pieces; ++i)
    c.pieces.push_back({ContourPieceKind::real_segment, -0.5 * pi + pi * i / real_pieces,
                        -0.5 * pi + pi * (i + 1) / real_pieces});
  for (std::size_t i = 1; i < br.size(); ++i)
    c.pieces.push_back({ContourPieceKind::right_tail, br[i - 1], br[i]});
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
std::string SingularLine::name() const {
  std::ostringstream os;
  os << "sigma_" << n << "^" << (sign > 0 ? "+" : "-");
  return os.str();
}

std::vector<SingularLine> real_square_configuration() {
  return {{+1, 0, Bypass::below},
          {-1, 0, Bypass::below},
          {+1, -1, Bypass::above},
          {-1, -1, Bypass::above}};
}

std::vector<SingularLine> bypass_flags_of(const AngularContour& c,
                                          const std::vector<SingularLine>& lines) {
  c.validate();
  std::vector<SingularLine> out;
  for (const auto& l : lines) {
    if (l.sign != 1 && l.sign != -1)
      throw Error(ErrorKind::domain, "singular line sign must be +-1");
    // Real trace t1 + sign t2 = offset inside the square: parameterise by t1.
    double off = l.offset();
    double lo = std::max(-0.5 * pi, off - 0.5 * pi);
    double hi = std::min(0.5 * pi, off + 0.5 * pi);
    // t2 = sign (off - t1) must lie in [-pi/2, pi/2]: t1 in [off - pi/2, off + pi/2].
    if (!(hi - lo > 1e-12))
      throw Error(ErrorKind::domain, l.name() + " does not cross the real square");
    double t1 = 0.5 * (lo + hi);
    double t2 = l.sign * (off - t1);
    cplx a1 = c.point(ContourPieceKind::real_segment, t1);
    cplx a2 = c.point(ContourPieceKind::real_segment, t2);
    double im = (a1 + double(l.sign) * a2).imag();
    if (im == 0.0)
      throw Error(ErrorKind::domain, "surface meets " + l.name() + " on its real trace");
    SingularLine f = l;
    f.bypass = im > 0.0 ? Bypass::above : Bypass::below;
    out.push_back(f);
  }
  return out;
}

void validate_bypass(const std::vector<SingularLine>& lines) {
  // Coordinates u = alpha1 + alpha2 (plus lines), v = alpha1 - alpha2 (minus lines).
  std::vector<const SingularLine*> plus, minus;
  for (const auto& l : lines) {
    if (l.sign != 1 && l.sign != -1)
      throw Error(ErrorKind::domain, "singular line sign must be +-1");
    for (const auto& m : lines)
      if (&m != &l && m.sign == l.sign && m.n == l.n && m.bypass != l.bypass)
        throw Error(ErrorKind::unmatched_bypass, l.name() + " carries two different flags");
    auto& dst = l.sign > 0 ? plus : minus;
    if (std::none_of(dst.begin(), dst.end(), [&](const SingularLine* p) { return p->n == l.n; }))
      dst.push_back(&l);
  }
  auto by_n = [](const SingularLine* a, const SingularLine* b) { return a->n < b->n; };
  std::sort(plus.begin(), plus.end(), by_n);
  std::sort(minus.begin(), minus.end(), by_n);
  auto side = [](const SingularLine* l, double outward) {
    return (l->bypass == Bypass::above ? 1.0 : -1.0) * outward;
  };
  for (std::size_t i = 0; i + 1 < plus.size(); ++i)
    for (std::size_t j = 0; j + 1 < minus.size(); ++j) {
      double u0 = plus[i]->offset(), u1 = plus[i + 1]->offset();
      double v0 = minus[j]->offset(), v1 = minus[j + 1]->offset();
      // Does the cell meet the open real square?
      bool meets = false;
      for (int a = 1; a < 16 && !meets; ++a)
        for (int b = 1; b < 16 && !meets; ++b) {
          double u = u0 + (u1 - u0) * a / 16.0, v = v0 + (v1 - v0) * b / 16.0;
          double t1 = 0.5 * (u + v), t2 = 0.5 * (u - v);
          meets = std::fabs(t1) < 0.5 * pi && std::fabs(t2) < 0.5 * pi;
        }
      if (!meets)
        continue;
      const SingularLine* edge[4] = {plus[i], plus[i + 1], minus[j], minus[j + 1]};
      const double outward[4] = {-1.0, 1.0, -1.0, 1.0};
      double s[4];
      for (int e = 0; e < 4; ++e)
        s[e] = side(edge[e], outward[e]);
      // The odd one out (if any) is the offending line.
      for (int e = 0; e < 4; ++e) {
        int agree = 0;
        for (int f = 0; f < 4; ++f)
          agree += (s[f] == s[e]) ? 1 : 0;
        if (agree <= 2) {
          std::ostringstream os;
          os << "unmatched bypass: " << edge[e]->name()
             << " is passed on the other side of the cell bounded by " << edge[0]->name() << ", "
             << edge[1]->name() << ", " << edge[2]->name() << ", " << edge[3]->name();
          throw Error(ErrorKind::unmatched_bypass, os.str());
        }
      }
    }
}

double unflagged_line_distance(const AngularContour& c, int order, int n_max) {
  auto nodes = c.nodes(order);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : nodes)
    for (const auto& q : nodes)
      for (int sign : {1, -1}) {
        cplx s = p.alpha + double(sign) * q.alpha;
        double nr = std::floor((s.real() - 0.5 * pi) / pi);
        for (int n = int(nr) - 1; n <= int(nr) + 2; ++n) {
          if (n < -n_max || n > n_max || is_real_square_line(n))
            continue;
          best = std::min(best, std::abs(s - (0.5 * pi + n * pi)) / std::sqrt(2.0));
        }
      }
  return best;
}

// ---------------------------------------------------------------------------
void IntegralConfig::validate() const {
  if (!(eps > 0.0) || eps > 0.1)
    throw Error(ErrorKind::config, "indentation must lie in (0, 0.1]");
  if (!(tail >= 0.0) || !std::isfinite(tail))
    throw Error(ErrorKind::config, "tail must be non-negative (0 selects the default)");
  if (order < 2 || order > 512)
    throw Error(ErrorKind::config, "quadrature order must lie in [2, 512]");
  if (real_pieces < 1 || real_pieces > 256)
    throw Error(ErrorKind::config, "real_pieces must lie in [1, 256]");
  if (!(min_line_distance >= 0.0) || !(tail_tolerance > 0.0))
    throw Error(ErrorKind::config, "invalid integral tolerances");
}

double default_tail(double k, const std::array<double, 3>& x, double eps, double tail_bend) {
  if (!(k > 0.0) || !(x[2] > 0.0))
    throw Error(ErrorKind::domain, "default tail needs k > 0 and x3 > 0");
  // The exponential factor on a tail is about exp(-k d(s) sinh s) with
  // d = x3 (+ min(x1, x2) sin(bend (s - eps)) when the bend helps, x1, x2 > 0).
  const double m = std::min(x[0], x[1]);
  auto decay = [&](double s) {
    double d = x[2] + (m > 0.0 ? m * std::sin(std::min(tail_bend * (s - eps), 0.5 * pi)) : 0.0);
    return k * d * std::sinh(s);
  };
  double s = 0.0;
  while (decay(s) < 60.0 && s < 40.0)
    s += 0.05;
  return std::max(4.0, std::min(8.0 / (k * x[2]), s + 1.0));
}

cplx spectral_integrand(double k, const std::array<double, 3>& x, cplx a1, cplx a2, cplx W) {
  cplx s1 = std::sin(a1), s2 = std::sin(a2);
  cplx Q = 1.0 - s1 * s1 - s2 * s2;
  if (Q.imag() < -1e-13 * std::abs(Q) && Q.real() > 0.0)
    throw Error(ErrorKind::domain, "square-root argument below the positive real axis");
  cplx root = std::sqrt(Q);
  if (root.imag() < 0.0)
    root = -root;
  cplx phase = I * k * (-x[0] * s1 - x[1] * s2 + x[2] * root);
  return -(I * k / (4.0 * pi * pi)) * W * std::cos(a1) * std::cos(a2) / root * std::exp(phase);
}

namespace {

AngularContour contour_for(double k, const std::array<double, 3>& x, const IntegralConfig& cfg) {
  cfg.validate();
  if (!(x[2] > 0.0) || !std::isfinite(x[2]))
    throw Error(ErrorKind::domain, "the spectral integral needs x3 > 0");
  double tail = cfg.tail > 0.0 ? cfg.tail : default_tail(k, x, cfg.eps, cfg.tail_bend);
  return build_gamma_alpha(k, tail, cfg.eps, cfg.real_pieces, cfg.tail_bend);
}

// States along a contour image, continued outwards from its middle node. On
// the tails T is dominated by its growing exponential, so continuing towards
// the real axis would amplify errors; continuing away from it does not.
std::vector<SolutionState> states_outward(const CutStripFunction& T,
                                          const std::vector<cplx>& betas) {
  const std::size_t m = betas.size() / 2;
  std::vector<cplx> fwd(betas.begin() + m, betas.end());
  std::vector<cplx> bwd(betas.rbegin() + (betas.size() - m - 1), betas.rend());
  auto f = T.states_along(fwd);
  auto b = T.states_along(bwd);
  std::vector<SolutionState> out(b.rbegin(), b.rend());
  out.insert(out.end(), f.begin() + 1, f.end());
  return out;
}

// Integrand along alpha2 in nodes for fixed alpha1, with T continued along the
// translated contours alpha1 + Gamma and alpha1 - Gamma + pi.
void integrand_row(const CutStripFunction& T, double k, const std::array<double, 3>& x, cplx a1,
                   const std::vector<QuadNode>& nodes, std::vector<cplx>& out) {
  std::vector<cplx> b1(nodes.size()), b2(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    b1[j] = a1 + nodes[j].alpha;
    b2[j] = a1 - nodes[j].alpha + pi;
  }
  auto t1 = states_outward(T, b1);
  auto t2 = states_outward(T, b2);
  out.resize(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j)
    out[j] = spectral_integrand(k, x, a1, nodes[j].alpha, t1[j].value * t2[j].value);
}

} // namespace

IntegralResult eval_double_integral(const GreenFunctionModel& model,
                                    const std::array<double, 3>& x, const IntegralConfig& cfg) {
  for (double v : x)
    if (!std::isfinite(v))
      throw Error(ErrorKind::domain, "non-finite observation point");
  const double k = model.k();
  AngularContour c = contour_for(k, x, cfg);
  validate_bypass(bypass_flags_of(c, real_square_configuration()));
  double dist = unflagged_line_distance(c, cfg.order);
  if (dist < cfg.min_line_distance) {
    std::ostringstream os;
    os << "integration surface passes within " << dist
       << " of a singular line whose bypass is not fixed";
    throw Error(ErrorKind::domain, os.str());
  }
  auto nodes = c.nodes(cfg.order);
  const std::size_t N = nodes.size();
  std::vector<cplx> rows(N);
  std::vector<double> row_max(N), row_end(N);
  parallel_for(N, [&](std::size_t i) {
    std::vector<cplx> f;
    integrand_row(model.T(), k, x, nodes[i].alpha, nodes, f);
    double m = 0.0;
    for (const auto& v : f)
      m = std::max(m, std::abs(v));
    row_max[i] = m;
    row_end[i] = std::max(std::abs(f.front()), std::abs(f.back()));
    for (std::size_t j = 0; j < N; ++j)
      f[j] *= nodes[j].weight;
    rows[i] = nodes[i].weight * pairwise_sum(f.data(), N);
  });
  IntegralResult r;
  r.value = pairwise_sum(rows.data(), N);
  r.tail = c.tail;
  r.eps = c.eps;
  r.order = cfg.order;
  r.nodes_per_dim = N;
  r.line_distance = dist;
  double scale = *std::max_element(row_max.begin(), row_max.end());
  double end = std::max({row_max.front(), row_max.back(),
                         *std::max_element(row_end.begin(), row_end.end())});
  r.tail_ratio = scale > 0.0 ? end / scale : 0.0;
  if (!std::isfinite(r.value.real()) || !std::isfinite(r.value.imag()) ||
      r.tail_ratio > cfg.tail_tolerance) {
    std::ostringstream os;
    os << "spectral integral did not converge: tail " << c.tail << ", order " << cfg.order
       << ", nodes per dimension " << N << ", tail/scale ratio " << r.tail_ratio;
    throw Error(ErrorKind::convergence, os.str());
  }
  return r;
}

double tail_integrand_magnitude(const GreenFunctionModel& model, const std::array<double, 3>& x,
                                double s, const IntegralConfig& cfg) {
  AngularContour c = contour_for(model.k(), x, cfg);
  if (!(s >= c.eps) || s > c.tail)
    throw Error(ErrorKind::domain, "tail depth outside the contour");
  auto nodes = c.nodes(cfg.order);
  std::vector<cplx> f;
  integrand_row(model.T(), model.k(), x, c.point(ContourPieceKind::right_tail, s), nodes, f);
  double m = 0.0;
  for (const auto& v : f)
    m = std::max(m, std::abs(v));
  return m;
}

} // namespace qp
