#include "vortexlab/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

namespace vortexlab {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SchemaError:
    case ErrorKind::RangeError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::FormatError:
    case ErrorKind::IOError:
      return kExitUsage;
    default:
      return kExitNumerical;
  }
}

void Verdicts::add(const std::string& name, double value, double tolerance, bool pass, const std::string& note) {
  Json v = {{"name", name}, {"value", value}, {"tolerance", tolerance}, {"pass", pass}};
  if (!note.empty()) v["note"] = note;
  list_.push_back(std::move(v));
  all_pass_ = all_pass_ && pass;
}

Json report_header(const RunConfig& cfg, const std::string& command) {
  return {{"command", command},
          {"version", kVersion},
          {"config_hash", cfg.hash()},
          {"config", Json::parse(cfg.canonical())},
          {"stages", Json::object()}};
}

GreenPtr build_green(const RunConfig& cfg) { return make_green(cfg.shape, cfg.green); }

Json config_json(const VortexConfig& c) {
  return {{"xi1", {c.xi1.x, c.xi1.y}}, {"xi2", {c.xi2.x, c.xi2.y}}, {"gamma", c.gamma}, {"tau", c.tau}};
}

Json critical_point_json(const CriticalPoint& cp, const GreenEvaluator& e) {
  Json j = config_json(cp.cfg);
  j["value"] = cp.value;
  j["grad_norm"] = cp.grad_norm;
  j["classification"] = to_string(cp.classification);
  j["full_classification"] = to_string(cp.full_classification);
  j["eigenvalues"] = std::vector<double>(cp.eigenvalues.data(), cp.eigenvalues.data() + 4);
  j["gauge_fixed"] = cp.gauge_fixed;
  if (cp.gauge_fixed)
    j["restricted_eigenvalues"] = std::vector<double>(cp.restricted_eigenvalues.data(),
                                                      cp.restricted_eigenvalues.data() + cp.restricted_eigenvalues.size());
  j["margin"] = cp.margin;
  j["seed"] = cp.seed;
  const LocationResiduals loc = location_conditions(e, cp.cfg);
  j["location_residuals"] = {loc.r1, loc.r2};
  return j;
}

CriticalPoint select_critical_point(const GreenEvaluator& e, const RunConfig& cfg, double gamma, Json* found) {
  if (cfg.xi) {
    VortexConfig start = *cfg.xi;
    start.gamma = gamma;
    start.tau = cfg.tau;
    CriticalPoint cp = refine_critical_point(e, start, cfg.search);
    if (found) *found = Json::array({critical_point_json(cp, e)});
    return cp;
  }
  const std::vector<CriticalPoint> all = find_critical_points(e, gamma, cfg.tau, cfg.search);
  if (found) {
    *found = Json::array();
    for (const auto& cp : all) found->push_back(critical_point_json(cp, e));
  }
  for (const auto& cp : all) {
    if (cfg.select == "any") return cp;
    if (cfg.select == "maximum" && cp.classification == Classification::Maximum) return cp;
    if (cfg.select == "saddle" && cp.classification == Classification::Saddle) return cp;
  }
  throw Error(ErrorKind::NoneFound, "no critical point of kind '" + cfg.select + "' among " +
                                        std::to_string(all.size()) + " found; raise search.starts or set config.xi1/xi2");
}

ContinuationOptions continuation_options(const RunConfig& cfg) {
  ContinuationOptions o;
  o.n = cfg.n;
  o.resolution = cfg.bubble_resolution;
  o.growth = cfg.growth;
  o.graded = cfg.auto_refine;
  o.mode = cfg.projection;
  o.newton = cfg.newton;
  return o;
}

StepDiagnostics diagnose_step(const ContinuationStep& step, const NewtonOptions& newton) {
  StepDiagnostics d;
  const NonlinearityParams& p = step.ansatz.params;
  d.raw = blowup_masses(step.solve.u, *step.op, p);
  d.nodal = nodal_domains(step.solve.u);
  for (std::size_t k = 0; k < step.solve.u.values.size(); ++k)
    d.phi_sup = std::max(d.phi_sup, std::abs(step.solve.u.values[k] - step.ansatz.field.values[k]));

  const OperatorPtr coarse = assemble(coarsen_grid(step.op->grid()));
  const GridField seed = sample_field(coarse->grid_ptr(), [&](Vec2 x) { return step.solve.u.sample(x); });
  const SolveResult cs = newton_solve(*coarse, p, seed, newton, "restricted fine solution");
  d.coarse_converged = cs.converged();
  d.coarse = blowup_masses(cs.u, *coarse, p);
  d.nodal_coarse = nodal_domains(cs.u);
  d.extrapolated = richardson(d.raw, d.coarse);
  return d;
}

Json masses_json(const BlowupMasses& m) {
  return {{"m_plus", m.m_plus},     {"m_minus", m.m_minus},     {"lambda", m.lambda},
          {"n1", m.n1()},           {"n2", m.n2()},             {"lambda_target", m.lambda_target()},
          {"err_plus", m.err_plus()}, {"err_minus", m.err_minus()}, {"err_lambda", m.err_lambda()},
          {"saturated", m.saturated}};
}

Json step_json(const ContinuationStep& step, const StepDiagnostics& d) {
  const Grid& g = step.op->grid();
  Json hist = Json::array();
  for (const auto& h : step.solve.history)
    hist.push_back({{"iteration", h.iteration}, {"residual", h.residual}, {"step", h.step}, {"linear", h.linear}});
  return {{"rho", step.rho},
          {"delta1", step.ansatz.b1.delta},
          {"delta2", step.ansatz.b2.delta},
          {"grid", {{"nx", g.nx}, {"ny", g.ny}, {"unknowns", step.op->unknowns()}, {"uniform", g.uniform}}},
          {"status", to_string(step.solve.status)},
          {"provenance", step.solve.provenance},
          {"iterations", static_cast<int>(step.solve.history.size()) - 1},
          {"residual", step.solve.residual},
          {"tolerance", step.solve.tolerance},
          {"history", hist},
          {"phi_sup", d.phi_sup},
          {"masses", masses_json(d.raw)},
          {"masses_coarse", masses_json(d.coarse)},
          {"masses_extrapolated", masses_json(d.extrapolated)},
          {"coarse_converged", d.coarse_converged},
          {"nodal_count", d.nodal.count},
          {"nodal_positive", d.nodal.positive()},
          {"nodal_count_coarse", d.nodal_coarse.count}};
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return std::nan("");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = std::log(x[k]), b = std::log(y[k]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg, bool write_outputs) {
  const auto t0 = std::chrono::steady_clock::now();
  PipelineResult out;
  Json& rep = out.report;
  rep = report_header(cfg, "report");
  Verdicts verdicts;
  std::string stage = "green";
  const double gamma = cfg.gammas.front();
  const std::filesystem::path dir(cfg.output_dir);

  try {
    GreenPtr green = build_green(cfg);
    rep["stages"]["green"] = {{"method", green->method()}};

    stage = "critical";
    Json found;
    const CriticalPoint cp = select_critical_point(*green, cfg, gamma, &found);
    rep["stages"]["critical"] = {{"found", found}, {"selected", critical_point_json(cp, *green)}};
    const double tol = cfg.search.tol_rel * (1.0 + std::abs(cp.value));
    verdicts.add("critical.grad_norm", cp.grad_norm, tol, cp.grad_norm <= tol);
    const LocationResiduals loc = location_conditions(*green, cp.cfg);
    verdicts.add("critical.location_residual", std::max(loc.r1, loc.r2), 1e-6, std::max(loc.r1, loc.r2) <= 1e-6);

    stage = "deltas";
    Json deltas = Json::array();
    for (double rho : cfg.rhos) {
      const Deltas d = compute_deltas(*green, cp.cfg, rho);
      deltas.push_back({{"rho", rho}, {"delta1", d.delta1()}, {"delta2", d.delta2()}});
    }
    rep["stages"]["deltas"] = deltas;

    stage = "solve";
    const ContinuationResult cont = continuation(*green, cp.cfg, cfg.rhos, continuation_options(cfg));
    rep["stages"]["solve"] = {{"branch_lost", cont.branch_lost}, {"message", cont.message}, {"steps", Json::array()}};

    stage = "diagnostics";
    std::vector<StepDiagnostics> diags;
    std::vector<double> rhos_ok, phis;
    double largest_converged = 0.0;
    for (const ContinuationStep& s : cont.steps) {
      verdicts.add("solve.residual[rho=" + Json(s.rho).dump() + "]", s.solve.residual, s.solve.tolerance,
                   s.solve.converged());
      if (!s.solve.converged()) continue;
      largest_converged = std::max(largest_converged, s.rho);
      diags.push_back(diagnose_step(s, cfg.newton));
      const StepDiagnostics& d = diags.back();
      rep["stages"]["solve"]["steps"].push_back(step_json(s, d));
      rhos_ok.push_back(s.rho);
      phis.push_back(d.phi_sup);
      verdicts.add("nodal.count[rho=" + Json(s.rho).dump() + "]", d.nodal.count, 2,
                   d.nodal.count == 2 && d.nodal.positive() == 1);
      verdicts.add("nodal.count_coarse[rho=" + Json(s.rho).dump() + "]", d.nodal_coarse.count, 2,
                   d.coarse_converged && d.nodal_coarse.count == d.nodal.count);
    }
    rep["stages"]["diagnostics"] = {{"largest_converged_rho", largest_converged},
                                    {"phi_sup_loglog_slope", loglog_slope(rhos_ok, phis)}};
    if (cont.branch_lost) throw Error(ErrorKind::BranchLost, cont.message);

    const StepDiagnostics& last = diags.back();
    verdicts.add("masses.m_plus", last.raw.err_plus(), 0.05, last.raw.err_plus() <= 0.05);
    verdicts.add("masses.m_minus", last.raw.err_minus(), 0.05, last.raw.err_minus() <= 0.05);
    verdicts.add("masses.lambda", last.raw.err_lambda(), 0.05, last.raw.err_lambda() <= 0.05);
    if (diags.size() >= 2) {
      const BlowupMasses& a = diags.front().extrapolated;
      const BlowupMasses& b = last.extrapolated;
      const std::string note = "extrapolated error at the last rho vs the first rho";
      verdicts.add("masses.m_plus_decreasing", b.err_plus(), a.err_plus(), b.err_plus() < a.err_plus(), note);
      verdicts.add("masses.m_minus_decreasing", b.err_minus(), a.err_minus(), b.err_minus() < a.err_minus(), note);
      verdicts.add("masses.lambda_decreasing", b.err_lambda(), a.err_lambda(), b.err_lambda() < a.err_lambda(), note);
    }

    if (write_outputs) {
      const ContinuationStep& s = cont.steps.back();
      const std::string tag = "config_hash " + cfg.hash() + "\nrho " + Json(s.rho).dump();
      write_field(s.ansatz.field, (dir / "W.fld").string(), tag + "\nfield W");
      write_field(s.solve.u, (dir / "u.fld").string(), tag + "\nfield u");
      rep["outputs"] = {(dir / "W.fld").string(), (dir / "u.fld").string()};
    }
    out.exit_code = verdicts.all_pass() ? kExitPass : kExitCheckFailed;
  } catch (const Error& e) {
    rep["error"] = {{"stage", stage}, {"kind", to_string(e.kind())}, {"message", e.what()}};
    out.exit_code = exit_code_for(e.kind());
  }
  rep["verdicts"] = verdicts.json();
  rep["pass"] = out.exit_code == kExitPass;
  rep["timing"] = {{"wall_clock_seconds", seconds_since(t0)}};
  if (write_outputs) write_file_atomic((dir / "report.json").string(), rep.dump(2) + "\n");
  return out;
}

}  // namespace vortexlab
