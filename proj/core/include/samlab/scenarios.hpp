#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "samlab/losses.hpp"
#include "samlab/optimizers.hpp"

namespace samlab {

/// One reproduction scenario per theorem-level claim, plus the property
/// verifier.
enum class Scenario {
  SaErmFlatVsSharp,
  SaGdRate,
  SaGdLowerBound,
  SamRate,
  SamSharpMinimum,
  SamLowerBound,
  StabilityAudit,
  LossVerify,
};

enum class SweepAxis { T, R, Eta, N };

const char* to_string(Scenario scenario);
const char* to_string(SweepAxis axis);
Scenario scenario_from_string(const std::string& name);
LossKind kind_from_string(const std::string& name);
Algo algo_from_string(const std::string& name);
TieMode tie_mode_from_string(const std::string& name);
SweepAxis axis_from_string(const std::string& name);

struct ScenarioConfig {
  Scenario scenario = Scenario::LossVerify;
  LossKind kind = LossKind::FlatSphereA;
  int n_exp = 8;
  int t_blocks = 1;
  double rho = 0.0;
  Algo algo = Algo::SAGD;  // StabilityAudit honors this
  double eta = 0.25;
  double radius_r = -1.0;  // <= 0 selects the scenario's radius rule
  int steps_T = 16;
  TieMode tie_policy = TieMode::LastCoordinate;
  long mc_samples = 100000;
  std::vector<int> suffix_taus;  // empty selects the scenario default
  std::vector<std::uint64_t> seeds = {1};
  int n_samples = 8;
  double zero_grad_eps = 1e-15;
  std::string init = "zero";  // "zero" | "last" (unit mass on the last coordinate)
  std::string output_path;
};

/// The perturbation radius the scenario actually runs with.
double effective_radius(const ScenarioConfig& cfg);

/// Desk-scale defaults per scenario (the acceptance settings).
ScenarioConfig default_config(Scenario scenario);

/// Flat key-value config text: one `key value` (or `key = value`) pair per
/// line, '#' comments, keys exactly the ScenarioConfig field names. Unknown
/// keys are errors.
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

/// Re-validates scenario preconditions (throws ConfigError).
void validate_config(const ScenarioConfig& cfg);

/// One result per seed x evaluation point. For lower-bound scenarios
/// event_held records whether the good-column event occurred; rows without
/// the event are vacuous (bound_satisfied stays true). Column use per
/// scenario is documented in the README; axis/axis_value tag sweep cells.
struct ResultRow {
  std::string scenario;
  std::uint64_t seed = 0;
  bool event_held = false;
  int tau = 0;
  double empirical_risk = 0.0;
  double saer = 0.0;
  double population_value = 0.0;
  double population_stderr = 0.0;
  double theorem_bound = 0.0;
  bool bound_satisfied = true;
  double runtime_ms = 0.0;
  std::string axis;
  double axis_value = 0.0;
};

std::vector<ResultRow> run_scenario(const ScenarioConfig& cfg);

/// Runs the scenario once per axis value, substituting the axis field and
/// tagging rows; seeds are reused unchanged so a single-value sweep matches
/// run_scenario row for row.
std::vector<ResultRow> sweep(const ScenarioConfig& cfg, SweepAxis axis,
                             const std::vector<double>& values);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares fit of log y against log x over the rows' named fields.
RateFit fit_rate(const std::vector<ResultRow>& rows, const std::string& x_field,
                 const std::string& y_field);

/// Numeric field accessor used by fit_rate and the CLI.
double row_field(const ResultRow& row, const std::string& name);

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_csv(const std::string& text);
std::string rows_to_json(const std::vector<ResultRow>& rows);
void write_rows(const std::vector<ResultRow>& rows, const std::string& path,
                const std::string& format);

}  // namespace samlab
