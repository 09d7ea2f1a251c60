// Command-line front end: eigenpair solving, verification suites, field
// sampling and spectral-integral cross-checks.
//
//   qplane_cli eigen    [--method monodromy|shooting|both] [--count N] [--tol X]
//   qplane_cli verify   [--records CSV] [--count N] [--perturb-b DB]
//   qplane_cli field    [--record N] [--k K] [--r ...] [--chi ...] [--tau ...] [--report JSON]
//   qplane_cli integral [--record N] [--k K] [--quad-order N] [--eps E] [--rel-tol X]
//                       [--self-convergence]
//
// Common: --config JSON (flags override file values), --out PATH (default
// stdout). QW_THREADS caps worker threads. Exit codes: 0 ok, 2 usage or
// configuration error, 3 empty result, 4 verification failure.

#include "qplane/error.hpp"
#include "qplane/field.hpp"
#include "qplane/lame_oracle.hpp"
#include "qplane/monodromy.hpp"
#include "qplane/spectral_integral.hpp"
#include "qplane/stencil.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using json = nlohmann::ordered_json;
using namespace qp;

namespace {

constexpr int exit_ok = 0, exit_usage = 2, exit_empty = 3, exit_failed = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  if (!std::isfinite(v))
    return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v); // no "-0"
  return buf;
}

// JSON writer with 17 significant digits for every float.
void write_json(std::ostream& os, const json& j, int indent = 0) {
  const std::string pad(indent, ' ');
  switch (j.type()) {
  case json::value_t::object: {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first)
        os << ",\n";
      first = false;
      os << pad << "  " << json(it.key()).dump() << ": ";
      write_json(os, it.value(), indent + 2);
    }
    os << "\n" << pad << "}";
    return;
  }
  case json::value_t::array: {
    if (j.empty()) {
      os << "[]";
      return;
    }
    bool scalar = std::none_of(j.begin(), j.end(),
                               [](const json& e) { return e.is_structured(); });
    if (scalar) {
      os << "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i)
          os << ", ";
        write_json(os, j[i], indent);
      }
      os << "]";
      return;
    }
    os << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i)
        os << ",\n";
      os << pad << "  ";
      write_json(os, j[i], indent + 2);
    }
    os << "\n" << pad << "]";
    return;
  }
  case json::value_t::number_float:
    os << fmt17(j.get<double>());
    return;
  default:
    os << j.dump();
  }
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

// Options shared by all commands, after merging the JSON file and flags.
struct RunConfig {
  std::string method = "monodromy";
  int count = 5;
  double tol = 1e-9;
  double k = 1.0;
  std::string out;
  std::string report;
  std::string records;
  int record = 1;
  double perturb_b = 0.0;
  int quad_order = 64;
  double eps = 0.05;
  double rel_tol = 1e-3;
  bool self_convergence = false;
  double a_min = -12.0, a_max = 12.0, b_min = 0.0, b_max = 12.0;
  std::vector<double> grid_r = {0.5, 1.0, 2.0}, grid_chi = {0.5, 1.5, 2.5},
                      grid_tau = {0.5, 1.5, 2.5, pi - 1e-6};
  std::vector<std::array<double, 3>> points;

  void validate() const {
    if (method != "monodromy" && method != "shooting" && method != "both")
      throw UsageError("method must be monodromy, shooting or both");
    if (count < 1)
      throw UsageError("count must be positive");
    if (!(tol > 0.0) || !(k > 0.0) || !(eps > 0.0) || !(rel_tol > 0.0))
      throw UsageError("tolerances, k and eps must be positive");
    if (record < 1)
      throw UsageError("record index is 1-based");
    if (quad_order < 2)
      throw UsageError("quad-order must be at least 2");
    if (!(a_min < a_max) || !(b_min < b_max))
      throw UsageError("empty eigenvalue window");
  }
};

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key))
    dst = j.at(key).get<T>();
}

void load_config_file(const std::string& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed JSON config: ") + e.what());
  }
  if (!j.is_object())
    throw UsageError("config file must hold a JSON object");
  try {
    take(j, "method", c.method);
    take(j, "count", c.count);
    take(j, "tol", c.tol);
    take(j, "k", c.k);
    take(j, "out", c.out);
    take(j, "report", c.report);
    take(j, "records", c.records);
    take(j, "record", c.record);
    take(j, "perturb_b", c.perturb_b);
    take(j, "quad_order", c.quad_order);
    take(j, "eps", c.eps);
    take(j, "rel_tol", c.rel_tol);
    take(j, "self_convergence", c.self_convergence);
    if (j.contains("window")) {
      const json& w = j.at("window");
      take(w, "a_min", c.a_min);
      take(w, "a_max", c.a_max);
      take(w, "b_min", c.b_min);
      take(w, "b_max", c.b_max);
    }
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      take(g, "r", c.grid_r);
      take(g, "chi", c.grid_chi);
      take(g, "tau", c.grid_tau);
    }
    if (j.contains("points"))
      for (const auto& p : j.at("points"))
        c.points.push_back(p.get<std::array<double, 3>>());
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid config value: ") + e.what());
  }
}

// Output stream: a file when --out is given, else stdout.
class Output {
public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_)
        throw UsageError("cannot open output file " + path);
    }
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

double nu_of_b(double b) { return 0.5 * (-1.0 + std::sqrt(1.0 + 16.0 * b)); }

MonodromyScanConfig scan_config(const RunConfig& c) {
  MonodromyScanConfig s;
  s.a_min = c.a_min;
  s.a_max = c.a_max;
  s.b_min = c.b_min;
  s.b_max = c.b_max;
  s.tol = c.tol;
  return s;
}

LameShootConfig shoot_config(const RunConfig& c) {
  LameShootConfig s;
  s.a_min = c.a_min;
  s.a_max = c.a_max;
  s.nu_min = nu_of_b(std::max(c.b_min, 0.0));
  s.nu_max = nu_of_b(c.b_max);
  s.tol = c.tol;
  return s;
}

std::vector<EigenRecord> solve(const RunConfig& c, SolveMethod m) {
  std::vector<EigenRecord> recs = m == SolveMethod::monodromy
                                      ? scan_and_refine(scan_config(c)).records
                                      : solve_shooting(shoot_config(c)).records;
  if (recs.size() > std::size_t(c.count))
    recs.resize(c.count);
  return recs;
}

void write_eigen_csv(std::ostream& os, const std::vector<EigenRecord>& recs) {
  os << "index,method,a,b,nu,lambda_re,lambda_im,res_m11,res_n12\n";
  for (const auto& e : recs)
    os << e.index << ',' << to_string(e.method) << ',' << fmt17(e.a) << ',' << fmt17(e.b) << ','
       << fmt17(e.nu) << ',' << fmt17(e.lambda.real()) << ',' << fmt17(e.lambda.imag()) << ','
       << fmt17(e.residual_m11) << ',' << fmt17(e.residual_n12) << '\n';
}

std::vector<EigenRecord> read_eigen_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot open record file " + path);
  std::string line;
  std::vector<EigenRecord> out;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    if (header) {
      header = false;
      if (line.rfind("index,", 0) == 0)
        continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
      f.push_back(cell);
    if (f.size() < 4)
      throw UsageError("malformed record line: " + line);
    try {
      SolveMethod m = f[1] == "shooting" ? SolveMethod::shooting : SolveMethod::monodromy;
      EigenRecord e = make_record(std::stod(f[2]), std::stod(f[3]), m);
      e.index = std::stoi(f[0]);
      out.push_back(e);
    } catch (const std::exception&) {
      throw UsageError("malformed record line: " + line);
    }
  }
  if (out.empty())
    throw UsageError("record file " + path + " holds no records");
  return out;
}

std::vector<EigenRecord> records_for(const RunConfig& c) {
  if (!c.records.empty())
    return read_eigen_csv(c.records);
  auto recs = solve(c, SolveMethod::monodromy);
  if (recs.empty())
    throw UsageError("no eigenpairs in the window");
  return recs;
}

EigenRecord selected_record(const RunConfig& c) {
  RunConfig cc = c;
  cc.count = std::max(c.count, c.record);
  auto recs = records_for(cc);
  if (std::size_t(c.record) > recs.size())
    throw UsageError("record " + std::to_string(c.record) + " not available");
  return recs[c.record - 1];
}

// ---------------------------------------------------------------------------
int cmd_eigen(const RunConfig& c) {
  std::vector<EigenRecord> all;
  if (c.method != "shooting") {
    auto r = solve(c, SolveMethod::monodromy);
    all.insert(all.end(), r.begin(), r.end());
  }
  if (c.method != "monodromy") {
    auto r = solve(c, SolveMethod::shooting);
    all.insert(all.end(), r.begin(), r.end());
  }
  Output out(c.out);
  write_eigen_csv(out.os(), all);
  if (c.method == "both") {
    std::size_t n = 0;
    for (const auto& e : all)
      n += e.method == SolveMethod::monodromy ? 1 : 0;
    for (std::size_t i = 0; i < n && n + i < all.size(); ++i) {
      double d = std::max(std::fabs(all[i].a - all[n + i].a), std::fabs(all[i].b - all[n + i].b));
      if (d > 1e-6)
        std::cerr << "warning: record " << i + 1 << " differs between methods by " << d << "\n";
    }
  }
  return all.empty() ? exit_empty : exit_ok;
}

json check_json(int record, const std::string& name, double residual, double tol) {
  json j;
  j["record"] = record;
  j["check"] = name;
  j["residual"] = residual;
  j["tol"] = tol;
  j["pass"] = residual < tol;
  return j;
}

int cmd_verify(const RunConfig& c) {
  auto recs = records_for(c);
  json arr = json::array();
  bool ok = true;
  for (const auto& r0 : recs) {
    EigenRecord r = c.perturb_b != 0.0 ? make_record(r0.a, r0.b + c.perturb_b, r0.method) : r0;
    r.index = r0.index;
    MinimalOdeParams p = r.params();
    CutStripFunction T(p);
    std::vector<json> checks;
    checks.push_back(check_json(r.index, "stencil_1d", verify_stencil_residual(p).residual, 1e-8));
    checks.push_back(check_json(r.index, "stencil_2d", verify_stencil_2d(p).residual, 1e-8));
    checks.push_back(check_json(r.index, "symmetry", symmetry_check(T).max_residual, 1e-9));
    auto w = wronskian_check(T);
    checks.push_back(check_json(r.index, "wronskian_f", w.max_f_error, 1e-8));
    checks.push_back(check_json(r.index, "wronskian_g", w.max_g_error, 1e-8));
    checks.push_back(check_json(r.index, "antiperiodicity", w.max_antiperiodicity_rel, 1e-8));
    auto t = transfer_matrix_check(r);
    checks.push_back(check_json(r.index, "transfer_s", t.s_error, 1e-7));
    checks.push_back(check_json(r.index, "transfer_lambda", t.lambda_error, 1e-7));
    checks.push_back(check_json(r.index, "transfer_det", t.det_error, 1e-8));
    auto e = edge_decay_check(T);
    checks.push_back(check_json(r.index, "edge_decay", std::fabs(e.slope + 0.5), 0.025));
    for (auto& j : checks) {
      ok = ok && j["pass"].get<bool>();
      arr.push_back(std::move(j));
    }
  }
  Output out(c.out);
  write_json(out.os(), arr);
  out.os() << "\n";
  return ok ? exit_ok : exit_failed;
}

int cmd_field(const RunConfig& c) {
  std::vector<SpheroConalPoint> pts;
  for (double r : c.grid_r)
    for (double chi : c.grid_chi)
      for (double tau : c.grid_tau) {
        SpheroConalPoint p{r, chi, tau};
        try {
          p.validate();
        } catch (const Error& e) {
          throw UsageError(std::string("invalid grid point: ") + e.what());
        }
        pts.push_back(p);
      }
  if (pts.empty())
    throw UsageError("empty field grid");
  EigenRecord rec = selected_record(c);
  GreenFunctionModel m(rec, c.k);
  {
    Output out(c.out);
    write_field_csv(out.os(), m, pts);
  }
  FieldReport rep = verify_field(m);
  json j;
  j["record"] = rec.index;
  j["nu"] = rec.nu;
  j["k"] = c.k;
  j["near_field_slope"] = rep.near_field_slope;
  j["near_field_slope_target"] = -rec.nu - 1.0;
  json checks = json::array();
  for (const auto& ch : rep.checks)
    checks.push_back({{"check", ch.name}, {"residual", ch.value}, {"tol", ch.tol}, {"pass", ch.pass}});
  j["checks"] = checks;
  j["all_pass"] = rep.all_pass();
  if (c.report.empty()) {
    write_json(std::cerr, j);
    std::cerr << "\n";
  } else {
    Output rout(c.report);
    write_json(rout.os(), j);
    rout.os() << "\n";
  }
  return exit_ok;
}

std::vector<std::array<double, 3>> default_points(double k) {
  const double n = std::sqrt(0.3 * 0.3 + 0.5 * 0.5 + 0.8 * 0.8);
  std::vector<std::array<double, 3>> out;
  for (double kr : {1.0, 2.0, 4.0}) {
    double r = kr / k;
    out.push_back({0.3 / n * r, 0.5 / n * r, 0.8 / n * r});
  }
  return out;
}

int cmd_integral(const RunConfig& c) {
  auto pts = c.points.empty() ? default_points(c.k) : c.points;
  for (const auto& x : pts)
    if (!(x[2] > 0.0))
      throw UsageError("the spectral integral needs x3 > 0; points on x3 = 0 are out of reach of "
                       "the truncated contour (use x3 >= 1e-3/k, where bent tails converge)");
  EigenRecord rec = selected_record(c);
  GreenFunctionModel m(rec, c.k);
  IntegralConfig ic;
  ic.order = c.quad_order;
  ic.eps = c.eps;
  json arr = json::array();
  bool ok = true;
  for (const auto& x : pts) {
    IntegralResult res;
    try {
      res = eval_double_integral(m, x, ic);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::config || e.kind() == ErrorKind::domain)
        throw UsageError(e.what());
      throw;
    }
    cplx g = m.at(x[0], x[1], x[2]);
    double err = std::abs(res.value - g) / std::abs(g);
    json j;
    j["x"] = json::array({x[0], x[1], x[2]});
    j["kr"] = c.k * std::hypot(x[0], x[1], x[2]);
    j["closed_form"] = complex_json(g);
    j["integral"] = complex_json(res.value);
    j["rel_error"] = err;
    j["nodes_per_dim"] = res.nodes_per_dim;
    j["order"] = res.order;
    j["tail"] = res.tail;
    j["eps"] = res.eps;
    j["tail_ratio"] = res.tail_ratio;
    if (c.self_convergence) {
      IntegralConfig dbl = ic;
      dbl.order = 2 * ic.order;
      cplx v2 = eval_double_integral(m, x, dbl).value;
      j["self_convergence_delta"] = std::abs(v2 - res.value) / std::abs(v2);
    }
    j["pass"] = err < c.rel_tol;
    ok = ok && err < c.rel_tol;
    arr.push_back(j);
  }
  json doc;
  doc["record"] = rec.index;
  doc["k"] = c.k;
  doc["rel_tol"] = c.rel_tol;
  doc["points"] = arr;
  doc["all_pass"] = ok;
  Output out(c.out);
  write_json(out.os(), doc);
  out.os() << "\n";
  return ok ? exit_ok : exit_failed;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quarter-plane vertex Green's function: eigenpairs, checks, field and "
               "spectral integral.\nExit codes: 0 ok, 2 usage/config, 3 empty result, "
               "4 verification failure. QW_THREADS caps worker threads."};
  app.require_subcommand(1);
  app.fallthrough(); // --config may follow the subcommand
  std::string config_path;
  RunConfig flags;
  app.add_option("--config", config_path, "JSON config file (flags override its values)");

  auto* eigen = app.add_subcommand("eigen", "solve for the lowest eigenpairs; CSV output");
  auto* verify = app.add_subcommand("verify", "stencil, Wronskian, transfer and edge checks; JSON");
  auto* field = app.add_subcommand("field", "sample the Green's function on an (r, chi, tau) grid");
  auto* integral =
      app.add_subcommand("integral", "compare the spectral double integral with the closed form");

  std::vector<CLI::Option*> opts;
  auto common = [&](CLI::App* s) {
    opts.push_back(s->add_option("--out", flags.out, "output path (default stdout)"));
    opts.push_back(s->add_option("--k", flags.k, "wavenumber (default 1)"));
    opts.push_back(s->add_option("--tol", flags.tol, "eigenpair residual bound (default 1e-9)"));
    opts.push_back(s->add_option("--count", flags.count, "number of eigenpairs (default 5)"));
  };
  for (auto* s : {eigen, verify, field, integral})
    common(s);
  opts.push_back(eigen->add_option("--method", flags.method,
                                   "monodromy, shooting or both (default monodromy)"));
  opts.push_back(verify->add_option("--records", flags.records, "eigen CSV (default: solve)"));
  opts.push_back(verify->add_option("--perturb-b", flags.perturb_b, "shift b of every record"));
  for (auto* s : {field, integral}) {
    opts.push_back(s->add_option("--record", flags.record, "1-based record index (default 1)"));
    opts.push_back(s->add_option("--records", flags.records, "eigen CSV (default: solve)"));
  }
  opts.push_back(field->add_option("--r", flags.grid_r, "radii"));
  opts.push_back(field->add_option("--chi", flags.grid_chi, "chi values in [0, pi]"));
  opts.push_back(field->add_option("--tau", flags.grid_tau, "tau values in [0, pi]"));
  opts.push_back(field->add_option("--report", flags.report, "field check report (default stderr)"));
  opts.push_back(integral->add_option("--quad-order", flags.quad_order,
                                      "Gauss-Legendre nodes per piece (default 64)"));
  opts.push_back(integral->add_option("--eps", flags.eps, "contour indentation (default 0.05)"));
  opts.push_back(integral->add_option("--rel-tol", flags.rel_tol, "pass bound (default 1e-3)"));
  opts.push_back(integral->add_flag("--self-convergence", flags.self_convergence,
                                    "also evaluate with doubled order"));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    RunConfig c;
    if (!config_path.empty())
      load_config_file(config_path, c);
    // Flags given on the command line override the file.
    for (auto* o : opts) {
      if (o->count() == 0)
        continue;
      const std::string n = o->get_name();
      if (n == "--out") c.out = flags.out;
      else if (n == "--k") c.k = flags.k;
      else if (n == "--tol") c.tol = flags.tol;
      else if (n == "--count") c.count = flags.count;
      else if (n == "--method") c.method = flags.method;
      else if (n == "--records") c.records = flags.records;
      else if (n == "--perturb-b") c.perturb_b = flags.perturb_b;
      else if (n == "--record") c.record = flags.record;
      else if (n == "--r") c.grid_r = flags.grid_r;
      else if (n == "--chi") c.grid_chi = flags.grid_chi;
      else if (n == "--tau") c.grid_tau = flags.grid_tau;
      else if (n == "--report") c.report = flags.report;
      else if (n == "--quad-order") c.quad_order = flags.quad_order;
      else if (n == "--eps") c.eps = flags.eps;
      else if (n == "--rel-tol") c.rel_tol = flags.rel_tol;
      else if (n == "--self-convergence") c.self_convergence = flags.self_convergence;
    }
    c.validate();
    if (eigen->parsed())
      return cmd_eigen(c);
    if (verify->parsed())
      return cmd_verify(c);
    if (field->parsed())
      return cmd_field(c);
    return cmd_integral(c);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::config ? exit_usage : exit_failed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failed;
  }
}
