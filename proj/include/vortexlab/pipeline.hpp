#pragma once

#include <string>

#include "json.hpp"
#include "vortexlab/diagnostics.hpp"
#include "vortexlab/io.hpp"

namespace vortexlab {

using Json = nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitUsage = 2, kExitNumerical = 3 };

/// Configuration and I/O problems map to 2, everything numerical to 3.
int exit_code_for(ErrorKind kind);

/// Verdict list: every check carries its value, tolerance and outcome.
class Verdicts {
 public:
  void add(const std::string& name, double value, double tolerance, bool pass, const std::string& note = "");
  bool all_pass() const { return all_pass_; }
  const Json& json() const { return list_; }

 private:
  Json list_ = Json::array();
  bool all_pass_ = true;
};

/// Skeleton shared by all reports: command, version, config echo and hash.
Json report_header(const RunConfig& cfg, const std::string& command);

GreenPtr build_green(const RunConfig& cfg);

Json config_json(const VortexConfig& cfg);
Json critical_point_json(const CriticalPoint& cp, const GreenEvaluator& e);

/// The configuration the run works with at this gamma: config.xi1/xi2 refined to a critical
/// point when given, otherwise the multistart result picked by search.select. Throws NoneFound.
CriticalPoint select_critical_point(const GreenEvaluator& e, const RunConfig& cfg, double gamma,
                                    Json* found = nullptr);

ContinuationOptions continuation_options(const RunConfig& cfg);

/// Solution checks at one rho, including the re-solve on the every-other-line coarsening.
struct StepDiagnostics {
  BlowupMasses raw;
  BlowupMasses coarse;
  BlowupMasses extrapolated;  // Richardson from the (h, 2h) pair
  NodalReport nodal;
  NodalReport nodal_coarse;
  bool coarse_converged = false;
  double phi_sup = 0.0;  // sup |u - W|
};
StepDiagnostics diagnose_step(const ContinuationStep& step, const NewtonOptions& newton);
Json masses_json(const BlowupMasses& m);
Json step_json(const ContinuationStep& step, const StepDiagnostics& d);

struct PipelineResult {
  Json report;
  int exit_code = kExitPass;
};

/// green -> critical point -> deltas -> ansatz -> solve -> diagnostics -> verdicts, at the first
/// gamma of the schedule. Writes report.json, W.fld and u.fld (last rho) into output_dir when
/// `write_outputs`; the report is written even when a stage fails.
PipelineResult run_pipeline(const RunConfig& cfg, bool write_outputs = true);

}  // namespace vortexlab
