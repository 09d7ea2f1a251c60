#include "qplane/monodromy.hpp"

#include "qplane/cut_strip.hpp"
#include "qplane/error.hpp"
#include "qplane/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace qp {

namespace {

const cplx I(0.0, 1.0);

double nu_of_b(double b) { return 0.5 * (-1.0 + std::sqrt(1.0 + 16.0 * b)); }
double b_of_nu(double nu) { return 0.25 * nu * (nu + 1.0); }

// Phase of the line through the origin best fitting a cloud of complex values.
double principal_phase(const std::vector<cplx>& z) {
  cplx acc = 0.0;
  for (cplx v : z)
    acc += v * v;
  double ph = 0.5 * std::arg(acc);
  if (ph < 0)
    ph += pi; // phase of a line: defined modulo pi, reported in [0, pi)
  return ph;
}

struct Residual {
  double f1, f2;
  ObjectiveValue raw;
};

} // namespace

std::string to_string(SolveMethod m) { return m == SolveMethod::monodromy ? "monodromy" : "shooting"; }

SpectralConstants derive_constants(double b) {
  if (!(b > -1.0 / 16.0) || !std::isfinite(b))
    throw Error(ErrorKind::domain, "spectral constants need b > -1/16");
  double sq = std::sqrt(b + 1.0 / 16.0);
  SpectralConstants c;
  c.nu = nu_of_b(b);
  c.lambda = -2.0 * I * std::cos(2.0 * pi * sq);
  c.kappa1 = I * (0.25 + sq);
  c.kappa2 = I * (0.25 - sq);
  return c;
}

EigenRecord make_record(double a, double b, SolveMethod method) {
  SpectralConstants c = derive_constants(b);
  EigenRecord r;
  r.a = a;
  r.b = b;
  r.nu = c.nu;
  r.lambda = c.lambda;
  r.kappa1 = c.kappa1;
  r.kappa2 = c.kappa2;
  r.method = method;
  return r;
}

ObjectiveValue objective(double a, double b, const ConnectionConfig& cfg) {
  ConnectionMatrices cm = connection_matrices({a, b}, cfg);
  return {cm.M(0, 0), cm.N(0, 1)};
}

void MonodromyScanConfig::validate() const {
  if (!(a_min < a_max) || !std::isfinite(a_min) || !std::isfinite(a_max))
    throw Error(ErrorKind::config, "a window must be a finite, non-empty interval");
  if (!(b_min < b_max) || !std::isfinite(b_max) || b_min < -1.0 / 16.0)
    throw Error(ErrorKind::config, "b window must be a non-empty interval above -1/16");
  if (grid_n < 8)
    throw Error(ErrorKind::config, "grid_n must be at least 8");
  if (!(tol > 0) || !(fd_step > 0) || !(dedup_tol > 0))
    throw Error(ErrorKind::config, "tolerances must be positive");
}

std::vector<EigenRecord> order_and_dedup(std::vector<EigenRecord> recs, double tol) {
  std::sort(recs.begin(), recs.end(), [](const EigenRecord& x, const EigenRecord& y) {
    if (x.nu != y.nu)
      return x.nu < y.nu;
    return x.a < y.a;
  });
  std::vector<EigenRecord> out;
  for (const EigenRecord& r : recs) {
    bool dup = false;
    for (const EigenRecord& q : out)
      if (std::fabs(q.a - r.a) < tol && std::fabs(q.b - r.b) < tol)
        dup = true;
    if (!dup)
      out.push_back(r);
  }
  // near-ties in nu are ordered by a, so re-sort with a tolerance on nu
  std::stable_sort(out.begin(), out.end(), [tol](const EigenRecord& x, const EigenRecord& y) {
    if (std::fabs(x.nu - y.nu) > tol)
      return x.nu < y.nu;
    return x.a < y.a;
  });
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].index = int(i) + 1;
  return out;
}

EigenRecord refine_monodromy(double a0, double b0, const MonodromyScanConfig& cfg,
                             double phase_m11, double phase_n12) {
  const cplx r1 = std::polar(1.0, -phase_m11), r2 = std::polar(1.0, -phase_n12);
  auto eval = [&](double a, double b) {
    ObjectiveValue v = objective(a, b, cfg.connection);
    return Residual{(v.m11 * r1).real(), (v.n12 * r2).real(), v};
  };
  const double b_floor = -1.0 / 16.0 + 1e-9;
  double a = a0, b = b0;
  Residual F = eval(a, b);
  auto record = [&] {
    EigenRecord rec = make_record(a, b, SolveMethod::monodromy);
    rec.residual_m11 = std::abs(F.raw.m11);
    rec.residual_n12 = std::abs(F.raw.n12);
    rec.phase_m11 = phase_m11;
    rec.phase_n12 = phase_n12;
    return rec;
  };
  auto within = [&](double bound) {
    return std::abs(F.raw.m11) < bound && std::abs(F.raw.n12) < bound;
  };
  // Iterate well below the tolerance; once round-off stalls progress, accept
  // anything inside it.
  for (int it = 0; it < cfg.max_newton; ++it) {
    if (within(1e-2 * cfg.tol))
      return record();
    const double h = cfg.fd_step;
    Residual Fa = eval(a + h, b), Fb = eval(a, b + h);
    Eigen::Matrix2d J;
    J << (Fa.f1 - F.f1) / h, (Fb.f1 - F.f1) / h, (Fa.f2 - F.f2) / h, (Fb.f2 - F.f2) / h;
    if (!(std::fabs(J.determinant()) > 0.0))
      throw Error(ErrorKind::no_root, "Newton: singular Jacobian");
    Eigen::Vector2d delta = J.fullPivLu().solve(Eigen::Vector2d(-F.f1, -F.f2));
    const double norm0 = std::hypot(F.f1, F.f2);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k <= cfg.max_halvings; ++k, t *= 0.5) {
      double an = a + t * delta(0), bn = b + t * delta(1);
      if (bn <= b_floor)
        continue;
      Residual Fn = eval(an, bn);
      if (std::hypot(Fn.f1, Fn.f2) < norm0) {
        a = an;
        b = bn;
        F = Fn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (within(cfg.tol))
        return record();
      throw Error(ErrorKind::no_root, "Newton: no decrease after step halving");
    }
    if (std::fabs(a) > 1e3 || std::fabs(b) > 1e3)
      throw Error(ErrorKind::no_root, "Newton: iterate ran away");
  }
  if (within(cfg.tol))
    return record();
  throw Error(ErrorKind::no_root, "Newton: iteration limit reached");
}

MonodromyScanResult scan_and_refine(const MonodromyScanConfig& cfg) {
  cfg.validate();
  const int n = cfg.grid_n;
  const double nu_lo = nu_of_b(std::max(cfg.b_min, -1.0 / 16.0 + 1e-12));
  const double nu_hi = nu_of_b(cfg.b_max);
  std::vector<double> as(n), bs(n);
  for (int i = 0; i < n; ++i) {
    as[i] = cfg.a_min + (cfg.a_max - cfg.a_min) * i / (n - 1);
    bs[i] = b_of_nu(nu_lo + (nu_hi - nu_lo) * i / (n - 1));
  }
  if (bs[0] <= -1.0 / 16.0)
    bs[0] = -1.0 / 16.0 + 1e-12;

  std::vector<ObjectiveValue> grid(std::size_t(n) * n);
  parallel_for(grid.size(), [&](std::size_t k) {
    grid[k] = objective(as[k / n], bs[k % n], cfg.connection);
  });

  MonodromyScanResult res;
  std::vector<cplx> m11s, n12s;
  for (const auto& v : grid) {
    m11s.push_back(v.m11);
    n12s.push_back(v.n12);
  }
  res.phase_m11 = principal_phase(m11s);
  res.phase_n12 = principal_phase(n12s);
  const cplx r1 = std::polar(1.0, -res.phase_m11), r2 = std::polar(1.0, -res.phase_n12);
  for (const auto& v : grid) {
    if (std::abs(v.m11) > 0)
      res.phase_spread_m11 =
          std::max(res.phase_spread_m11, std::fabs((v.m11 * r1).imag()) / std::abs(v.m11));
    if (std::abs(v.n12) > 0)
      res.phase_spread_n12 =
          std::max(res.phase_spread_n12, std::fabs((v.n12 * r2).imag()) / std::abs(v.n12));
  }

  auto F1 = [&](int i, int j) { return (grid[std::size_t(i) * n + j].m11 * r1).real(); };
  auto F2 = [&](int i, int j) { return (grid[std::size_t(i) * n + j].n12 * r2).real(); };
  auto changes = [](double w, double x, double y, double z) {
    double lo = std::min({w, x, y, z}), hi = std::max({w, x, y, z});
    return lo <= 0.0 && hi >= 0.0;
  };
  struct Seed {
    double a, b;
  };
  std::vector<Seed> seeds;
  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j + 1 < n; ++j)
      if (changes(F1(i, j), F1(i + 1, j), F1(i, j + 1), F1(i + 1, j + 1)) &&
          changes(F2(i, j), F2(i + 1, j), F2(i, j + 1), F2(i + 1, j + 1)))
        seeds.push_back({0.5 * (as[i] + as[i + 1]), 0.5 * (bs[j] + bs[j + 1])});

  std::vector<EigenRecord> found(seeds.size());
  std::vector<SeedOutcome> outcomes(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t k) {
    outcomes[k] = {seeds[k].a, seeds[k].b, false, ""};
    try {
      found[k] = refine_monodromy(seeds[k].a, seeds[k].b, cfg, res.phase_m11, res.phase_n12);
      const EigenRecord& r = found[k];
      if (r.a < cfg.a_min || r.a > cfg.a_max || r.b <= cfg.b_min || r.b > cfg.b_max)
        outcomes[k].note = "converged outside the window";
      else
        outcomes[k].converged = true;
    } catch (const Error& e) {
      outcomes[k].note = e.what();
    }
  });
  std::vector<EigenRecord> ok;
  for (std::size_t k = 0; k < seeds.size(); ++k)
    if (outcomes[k].converged)
      ok.push_back(found[k]);
  res.records = order_and_dedup(ok, cfg.dedup_tol);
  res.seeds = outcomes;
  return res;
}

TransferReport transfer_matrix_check(const EigenRecord& rec, cplx beta0) {
  if (!(beta0.imag() > 0))
    throw Error(ErrorKind::domain, "transfer check is defined in the upper half-plane");
  CutStripFunction T(rec.params());
  auto s0 = T.state(beta0);
  auto s1 = T.state(beta0 + 2.0 * pi);
  auto s2 = T.state(beta0 + 4.0 * pi);
  Eigen::Matrix2cd Y0, Y1;
  Y0 << s0.value, s0.derivative, s1.value, s1.derivative;
  Y1 << s1.value, s1.derivative, s2.value, s2.derivative;
  TransferReport rep;
  rep.transfer = Y1 * Y0.inverse();
  rep.s = rep.transfer(1, 0);
  rep.lambda_hat = -rep.transfer(1, 1);
  SpectralConstants c = derive_constants(rec.b);
  rep.s_error = std::abs(rep.s - 1.0);
  rep.lambda_error = std::abs(rep.lambda_hat - c.lambda);
  rep.det_error = std::abs(rep.transfer.determinant() + 1.0);
  return rep;
}

} // namespace qp
