// vortexlab: command-line front end. Every subcommand reads the JSON run configuration; flags
// override individual fields.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vortexlab/pipeline.hpp"

using namespace vortexlab;

namespace {

struct Overrides {
  std::string config;
  double rho = NAN;
  std::string rhos;
  double gamma = NAN;
  std::string gammas;
  double tau = NAN;
  int n = 0;
  int starts = 0;
  long long rng_seed = -1;
  std::string projection;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->required();
  cmd->add_option("--n", o.n, "base grid size (grid.n)");
  cmd->add_option("--rng-seed", o.rng_seed, "multistart seed (seed)");
}

RunConfig load(const Overrides& o) {
  RunConfig cfg = load_config(o.config);
  if (!std::isnan(o.rho)) cfg.rhos = {o.rho};
  if (!o.rhos.empty()) cfg.rhos = parse_list(o.rhos, "--rhos");
  if (!std::isnan(o.gamma)) cfg.gammas = {o.gamma};
  if (!o.gammas.empty()) cfg.gammas = parse_list(o.gammas, "--gammas");
  if (!std::isnan(o.tau)) cfg.tau = o.tau;
  if (o.n > 0) cfg.n = o.n;
  if (o.starts > 0) cfg.search.starts = o.starts;
  if (o.rng_seed >= 0) cfg.seed = cfg.search.seed = static_cast<std::uint64_t>(o.rng_seed);
  if (o.projection == "exact") cfg.projection = ProjectionMode::Exact;
  if (o.projection == "expansion") cfg.projection = ProjectionMode::Expansion;
  validate(cfg);
  return cfg;
}

void finish_report(Json& rep, const Verdicts& v, int code, std::chrono::steady_clock::time_point t0) {
  rep["verdicts"] = v.json();
  rep["pass"] = code == kExitPass;
  rep["timing"] = {{"wall_clock_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
}

void emit_report(const Json& rep, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << rep.dump(2) << "\n";
  else
    write_file_atomic(path, rep.dump(2) + "\n");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::vector<double>> read_samples(const std::string& path, std::size_t columns) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(read_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && !std::isdigit(static_cast<unsigned char>(line[0])) && line[0] != '-' && line[0] != '.' &&
        line[0] != '+')
      continue;  // header row
    std::vector<double> row = parse_list(line, path + ":" + std::to_string(lineno));
    if (row.size() != columns)
      throw Error(ErrorKind::FormatError,
                  path + ":" + std::to_string(lineno) + " needs " + std::to_string(columns) + " columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------------------------

int cmd_green(const Overrides& o, const std::string& samples, const std::string& out, bool robin) {
  const RunConfig cfg = load(o);
  GreenPtr e = build_green(cfg);
  std::string csv;
  if (robin) {
    csv = "x,y,h,dhx,dhy\n";
    for (const auto& r : read_samples(samples, 2)) {
      const Vec2 x{r[0], r[1]};
      const Vec2 g = e->grad_robin(x);
      csv += fmt(x.x) + "," + fmt(x.y) + "," + fmt(e->robin(x)) + "," + fmt(g.x) + "," + fmt(g.y) + "\n";
    }
  } else {
    csv = "x1,x2,y1,y2,G,H\n";
    for (const auto& r : read_samples(samples, 4)) {
      const Vec2 x{r[0], r[1]}, y{r[2], r[3]};
      csv += fmt(x.x) + "," + fmt(x.y) + "," + fmt(y.x) + "," + fmt(y.y) + "," + fmt(e->green(x, y)) + "," +
             fmt(e->regular_part(x, y)) + "\n";
    }
  }
  if (out.empty() || out == "-")
    std::cout << csv;
  else
    write_file_atomic(out, csv);
  return kExitPass;
}

int cmd_critical(const Overrides& o, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = load(o);
  GreenPtr e = build_green(cfg);
  Json rep = report_header(cfg, "critical");
  Verdicts v;
  const double gamma = cfg.gammas.front();
  const auto cps = find_critical_points(*e, gamma, cfg.tau, cfg.search);
  Json list = Json::array();
  for (std::size_t k = 0; k < cps.size(); ++k) {
    const CriticalPoint& cp = cps[k];
    list.push_back(critical_point_json(cp, *e));
    const LocationResiduals loc = location_conditions(*e, cp.cfg);
    const double tol = cfg.search.tol_rel * (1.0 + std::abs(cp.value));
    const std::string tag = "[" + std::to_string(k) + "]";
    v.add("grad_norm" + tag, cp.grad_norm, tol, cp.grad_norm <= tol);
    v.add("location_residual" + tag, std::max(loc.r1, loc.r2), 1e-6, std::max(loc.r1, loc.r2) <= 1e-6);
  }
  rep["stages"]["green"] = {{"method", e->method()}};
  rep["stages"]["critical"] = {{"gamma", gamma}, {"tau", cfg.tau}, {"starts", cfg.search.starts}, {"found", list}};
  int code = cps.empty() ? kExitNumerical : v.all_pass() ? kExitPass : kExitCheckFailed;
  if (cps.empty()) rep["error"] = {{"stage", "critical"}, {"kind", "NoneFound"}, {"message", "no critical point found"}};
  finish_report(rep, v, code, t0);
  emit_report(rep, out);
  return code;
}

// Configuration used by `ansatz`: config.xi1/xi2 as given (no refinement), else the selected
// critical point.
VortexConfig ansatz_config(const GreenEvaluator& e, const RunConfig& cfg, Json& rep) {
  const double gamma = cfg.gammas.front();
  if (cfg.xi) {
    VortexConfig c = *cfg.xi;
    c.gamma = gamma;
    c.tau = cfg.tau;
    validate_config(e.shape(), c);
    rep["stages"]["critical"] = {{"source", "config"}, {"cfg", config_json(c)},
                                 {"grad_norm", grad_hamiltonian(e, c).norm()}};
    return c;
  }
  const CriticalPoint cp = select_critical_point(e, cfg, gamma);
  rep["stages"]["critical"] = {{"source", "search"}, {"selected", critical_point_json(cp, e)}};
  return cp.cfg;
}

int cmd_ansatz(const Overrides& o, const std::string& out, const std::string& report) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = load(o);
  GreenPtr e = build_green(cfg);
  Json rep = report_header(cfg, "ansatz");
  Verdicts v;
  const VortexConfig c = ansatz_config(*e, cfg, rep);
  const double rho = cfg.rhos.front();
  const NonlinearityParams p{rho, cfg.tau, c.gamma};
  const Deltas d = compute_deltas(*e, c, rho);
  const OperatorPtr op = assemble(continuation_grid(cfg.shape, c, d, continuation_options(cfg)));
  const AnsatzField w = build_ansatz(*e, *op, c, p, cfg.projection);
  const GridField r = residual_field(w);
  rep["stages"]["ansatz"] = {{"rho", rho},
                             {"delta1", d.delta1()},
                             {"delta2", d.delta2()},
                             {"projection", to_string(cfg.projection)},
                             {"grid", {{"nx", op->grid().nx}, {"ny", op->grid().ny}, {"unknowns", op->unknowns()}}},
                             {"residual_l1_5", lp_norm(r, *op, 1.5)},
                             {"residual_sup", r.sup_norm()},
                             {"energy", energy(w.field, *op, p)},
                             {"expansion_rhs", expansion_rhs(*e, c, p)}};
  const NodalReport nodal = nodal_domains(w.field);
  v.add("ansatz.nodal_count", nodal.count, 2, nodal.count == 2);
  write_field(w.field, out, "config_hash " + cfg.hash() + "\nrho " + Json(rho).dump() + "\nfield W");
  rep["outputs"] = {out};
  const int code = v.all_pass() ? kExitPass : kExitCheckFailed;
  finish_report(rep, v, code, t0);
  if (!report.empty()) emit_report(rep, report);
  return code;
}

int cmd_solve(const Overrides& o, const std::string& seed, const std::string& out, const std::string& report) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = load(o);
  Json rep = report_header(cfg, "solve");
  Verdicts v;
  int code = kExitPass;
  std::string stage = "green";
  try {
    if (seed == "zero") {
      stage = "solve";
      const double rho = cfg.rhos.front();
      const NonlinearityParams p{rho, cfg.tau, cfg.gammas.front()};
      const OperatorPtr op = assemble(make_grid(cfg.shape, cfg.n));
      const SolveResult s = newton_solve(*op, p, GridField(op->grid_ptr()), cfg.newton, "zero");
      const BlowupMasses m = blowup_masses(s.u, *op, p);
      Json hist = Json::array();
      for (const auto& h : s.history) hist.push_back({{"iteration", h.iteration}, {"residual", h.residual}, {"step", h.step}});
      rep["stages"]["solve"] = {{"rho", rho},
                                {"status", to_string(s.status)},
                                {"message", s.message},
                                {"iterations", static_cast<int>(s.history.size()) - 1},
                                {"residual", s.residual},
                                {"tolerance", s.tolerance},
                                {"history", hist},
                                {"saturated", s.saturated},
                                {"sup_u", s.u.sup_norm()},
                                {"masses", masses_json(m)},
                                {"nodal_count", nodal_domains(s.u).count}};
      v.add("solve.residual", s.residual, s.tolerance, s.converged());
      write_field(s.u, out, "config_hash " + cfg.hash() + "\nrho " + Json(rho).dump() + "\nfield u (zero seed)");
      code = s.converged() ? kExitPass : kExitNumerical;
    } else {
      GreenPtr e = build_green(cfg);
      stage = "critical";
      const CriticalPoint cp = select_critical_point(*e, cfg, cfg.gammas.front());
      rep["stages"]["critical"] = {{"selected", critical_point_json(cp, *e)}};
      stage = "solve";
      const ContinuationResult cont = continuation(*e, cp.cfg, cfg.rhos, continuation_options(cfg));
      Json steps = Json::array();
      for (const ContinuationStep& s : cont.steps) {
        v.add("solve.residual[rho=" + Json(s.rho).dump() + "]", s.solve.residual, s.solve.tolerance, s.solve.converged());
        if (!s.solve.converged()) continue;
        const StepDiagnostics d = diagnose_step(s, cfg.newton);
        steps.push_back(step_json(s, d));
        v.add("nodal.count[rho=" + Json(s.rho).dump() + "]", d.nodal.count, 2, d.nodal.count == 2);
        v.add("masses.m_plus[rho=" + Json(s.rho).dump() + "]", d.raw.err_plus(), 0.05, d.raw.err_plus() <= 0.05);
        v.add("masses.m_minus[rho=" + Json(s.rho).dump() + "]", d.raw.err_minus(), 0.05, d.raw.err_minus() <= 0.05);
      }
      rep["stages"]["solve"] = {{"branch_lost", cont.branch_lost}, {"message", cont.message}, {"steps", steps}};
      if (!cont.steps.empty()) {
        const ContinuationStep& last = cont.steps.back();
        write_field(last.solve.u, out,
                    "config_hash " + cfg.hash() + "\nrho " + Json(last.rho).dump() + "\nfield u (" +
                        last.solve.provenance + ")");
        rep["outputs"] = {out};
      }
      code = cont.branch_lost ? kExitNumerical : v.all_pass() ? kExitPass : kExitCheckFailed;
    }
  } catch (const Error& err) {
    rep["error"] = {{"stage", stage}, {"kind", to_string(err.kind())}, {"message", err.what()}};
    code = exit_code_for(err.kind());
  }
  finish_report(rep, v, code, t0);
  if (!report.empty()) emit_report(rep, report);
  if (code == kExitNumerical) std::cerr << "vortexlab: numerical failure at stage " << stage << "\n";
  return code;
}

Json sweep_json(const BranchReport& b, const AsymptoticsReport& a) {
  Json recs = Json::array();
  for (const SweepRecord& r : b.records)
    recs.push_back({{"gamma", r.gamma},
                    {"cfg", config_json(r.cfg)},
                    {"value", r.value},
                    {"grad_norm", r.grad_norm},
                    {"classification", to_string(r.classification)},
                    {"dist_boundary", r.dist_boundary},
                    {"dist_argmax", r.dist_argmax},
                    {"theta", r.theta},
                    {"nu_gap", r.nu_gap},
                    {"nu_value", r.nu_value},
                    {"nu_min", r.nu_min}});
  return {{"records", recs},
          {"branch_lost", b.branch_lost},
          {"lost_at", b.lost_at},
          {"message", b.message},
          {"argmax_h", {b.argmax_h.x, b.argmax_h.y}},
          {"boundary_minimizers", b.boundary_scan.minimizers},
          {"degenerate_minimizer", a.degenerate_minimizer},
          {"asymptotics",
           {{"boundary_decreasing", a.boundary_decreasing},
            {"argmax_decreasing", a.argmax_decreasing},
            {"gap_decreasing", a.gap_decreasing},
            {"final_distance", a.final_distance},
            {"final_argmax_distance", a.final_argmax_distance},
            {"final_gap", a.final_gap},
            {"pass", a.pass()}}}};
}

int cmd_sweep(const Overrides& o, const std::string& out, const std::string& report, bool mirror, int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = load(o);
  if (cfg.gammas.size() < 2) throw Error(ErrorKind::RangeError, "`params.gamma_schedule` needs at least two values");
  GreenPtr e = build_green(cfg);
  Json rep = report_header(cfg, "sweep");
  Verdicts v;
  const CriticalPoint seed = select_critical_point(*e, cfg, cfg.gammas.front());
  rep["stages"]["critical"] = {{"seed", critical_point_json(seed, *e)}};

  std::vector<std::vector<double>> schedules{cfg.gammas};
  if (mirror) {
    std::vector<double> m;
    for (double g : cfg.gammas) m.push_back(cfg.gammas.front() * cfg.gammas.front() / g);
    schedules.push_back(m);
  }
  // Independent branches run concurrently, at most `jobs` at a time.
  std::vector<BranchReport> branches(schedules.size());
  for (std::size_t start = 0; start < schedules.size(); start += static_cast<std::size_t>(jobs)) {
    std::vector<std::future<BranchReport>> running;
    for (std::size_t k = start; k < std::min(schedules.size(), start + static_cast<std::size_t>(jobs)); ++k)
      running.push_back(std::async(std::launch::async, [&, k] {
        return sweep_gamma(*e, schedules[k], cfg.tau, seed.cfg, cfg.search);
      }));
    for (std::size_t k = 0; k < running.size(); ++k) branches[start + k] = running[k].get();
  }

  const char* names[2] = {"forward", "mirrored"};
  int code = kExitPass;
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const AsymptoticsReport a = asymptotics_report(branches[k], *e);
    rep["stages"][names[k]] = sweep_json(branches[k], a);
    const std::string tag = std::string(names[k]) + ".";
    v.add(tag + "boundary_distance_decreasing", a.final_distance, 0.0, a.boundary_decreasing);
    v.add(tag + "argmax_distance", a.final_argmax_distance, 0.02 * a.diameter, a.argmax_close);
    v.add(tag + "boundary_gap", a.final_gap, 0.05, a.gap_close,
          a.degenerate_minimizer ? "DegenerateMinimizer: dG/dnu is flat on the boundary" : "");
    if (branches[k].branch_lost) code = kExitNumerical;
    std::string path = out;
    if (k == 1) {
      const std::filesystem::path p(out);
      path = (p.parent_path() / (p.stem().string() + "_mirror" + p.extension().string())).string();
    }
    write_file_atomic(path, sweep_csv(branches[k]));
    rep["outputs"].push_back(path);
  }
  if (code == kExitPass && !v.all_pass()) code = kExitCheckFailed;
  finish_report(rep, v, code, t0);
  if (!report.empty()) emit_report(rep, report);
  return code;
}

int cmd_verify(const Overrides& o, const std::string& in, const std::string& report) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = load(o);
  Json rep = report_header(cfg, "verify");
  Verdicts v;
  const GridField u = read_field(in, &cfg.shape);
  const NonlinearityParams p{cfg.rhos.front(), cfg.tau, cfg.gammas.front()};
  const DiscreteOperator op(u.grid);
  bool finite = true;
  for (double x : u.values) finite = finite && std::isfinite(x);
  v.add("field.finite", finite ? 1.0 : 0.0, 1.0, finite);
  const double res = pde_residual(op, u, p);
  double fsup = 0.0;
  for (int k = 0; k < op.unknowns(); ++k) fsup = std::max(fsup, std::abs(nonlinearity(u.values[op.node(k)], p).f));
  const double tol = cfg.newton.tol_rel * (1.0 + fsup);
  v.add("pde.residual", res, tol, res <= tol);
  const BlowupMasses m = blowup_masses(u, op, p);
  const bool positive = m.m_plus > 0 && m.m_minus > 0 && std::isfinite(m.lambda);
  v.add("masses.finite_positive", positive ? 1.0 : 0.0, 1.0, positive);
  v.add("masses.m_plus", m.err_plus(), 0.05, m.err_plus() <= 0.05);
  v.add("masses.m_minus", m.err_minus(), 0.05, m.err_minus() <= 0.05);
  v.add("masses.lambda", m.err_lambda(), 0.05, m.err_lambda() <= 0.05);
  const NodalReport nodal = nodal_domains(u);
  v.add("nodal.count", nodal.count, 2, nodal.count == 2 && nodal.positive() == 1);
  rep["stages"]["verify"] = {{"input", in},
                             {"grid", {{"nx", u.grid->nx}, {"ny", u.grid->ny}, {"unknowns", op.unknowns()}}},
                             {"residual", res},
                             {"masses", masses_json(m)},
                             {"nodal_count", nodal.count},
                             {"nodal_areas", nodal.areas}};
  const int code = v.all_pass() ? kExitPass : kExitCheckFailed;
  finish_report(rep, v, code, t0);
  emit_report(rep, report);
  return code;
}

int cmd_report(const Overrides& o, const std::string& out_dir) {
  RunConfig cfg = load(o);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const PipelineResult r = run_pipeline(cfg, true);
  std::cout << (std::filesystem::path(cfg.output_dir) / "report.json").string() << ": "
            << (r.exit_code == kExitPass ? "pass" : "FAIL") << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vortexlab: sign-changing bubbling solutions of -Laplace u = rho^2 (e^u - tau e^{-gamma u})"};
  app.require_subcommand(1);

  Overrides o;
  std::string out, report, samples, seed = "ansatz", in, out_dir, gammas_flag;
  bool robin = false, mirror = false;
  int jobs = 1;

  auto* green = app.add_subcommand("green", "evaluate G and H (or h with --robin) at sample points");
  add_common(green, o);
  green->add_option("--samples", samples, "CSV rows x1,x2,y1,y2 (x,y with --robin)")->required();
  green->add_option("--out", out, "output CSV (stdout when omitted)");
  green->add_flag("--robin", robin, "evaluate the Robin function and its gradient");

  auto* critical = app.add_subcommand("critical", "multistart search for critical points of the Hamiltonian");
  add_common(critical, o);
  critical->add_option("--gamma", o.gamma);
  critical->add_option("--tau", o.tau);
  critical->add_option("--starts", o.starts);
  critical->add_option("--out", out, "JSON report (stdout when omitted)");

  auto* ansatz = app.add_subcommand("ansatz", "build the projected two-bubble ansatz W");
  add_common(ansatz, o);
  ansatz->add_option("--rho", o.rho);
  ansatz->add_option("--gamma", o.gamma);
  ansatz->add_option("--tau", o.tau);
  ansatz->add_option("--projection", o.projection)->check(CLI::IsMember({"exact", "expansion"}));
  ansatz->add_option("--out", out, "field file")->required();
  ansatz->add_option("--report", report, "JSON report");

  auto* solve = app.add_subcommand("solve", "Newton continuation solve");
  add_common(solve, o);
  solve->add_option("--rho", o.rho);
  solve->add_option("--rhos", o.rhos, "decreasing schedule, e.g. 0.04,0.02,0.01");
  solve->add_option("--gamma", o.gamma);
  solve->add_option("--tau", o.tau);
  solve->add_option("--seed", seed, "initial guess")->check(CLI::IsMember({"ansatz", "zero"}));
  solve->add_option("--out", out, "solution field (last rho)")->required();
  solve->add_option("--report", report, "JSON report");

  auto* sweep = app.add_subcommand("sweep", "continuation of a critical point in gamma");
  add_common(sweep, o);
  sweep->add_option("--gammas", o.gammas, "monotone schedule, e.g. 1,2,4,8");
  sweep->add_option("--tau", o.tau);
  sweep->add_option("--out", out, "CSV output")->required();
  sweep->add_option("--report", report, "JSON report");
  sweep->add_flag("--mirror", mirror, "also sweep the reciprocal schedule (gamma below 1, roles swapped)");
  sweep->add_option("--jobs", jobs, "branches run concurrently")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "diagnostic battery on a solution field");
  add_common(verify, o);
  verify->add_option("--in", in, "field file")->required();
  verify->add_option("--rho", o.rho);
  verify->add_option("--gamma", o.gamma);
  verify->add_option("--tau", o.tau);
  verify->add_option("--report", report, "JSON report (stdout when omitted)");

  auto* rep = app.add_subcommand("report", "full pipeline with verdicts");
  add_common(rep, o);
  rep->add_option("--out-dir", out_dir, "output directory (output.dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*green) return cmd_green(o, samples, out, robin);
    if (*critical) return cmd_critical(o, out);
    if (*ansatz) return cmd_ansatz(o, out, report);
    if (*solve) return cmd_solve(o, seed, out, report);
    if (*sweep) return cmd_sweep(o, out, report, mirror, jobs);
    if (*verify) return cmd_verify(o, in, report);
    if (*rep) return cmd_report(o, out_dir);
  } catch (const Error& e) {
    std::cerr << "vortexlab: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "vortexlab: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
