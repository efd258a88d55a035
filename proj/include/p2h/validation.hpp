#pragma once

#include <limits>
#include <string>
#include <vector>

#include "p2h/physics.hpp"
#include "p2h/schedule.hpp"
#include "p2h/scheduling.hpp"
#include "p2h/solver.hpp"
#include "p2h/surface.hpp"

namespace p2h {

struct FleetTrace {
    std::vector<SimulationTrace> units;
    /// Operating plan actually applied (differs from the schedule only under protective control).
    Schedule applied;
};

struct SimulateOptions {
    int substeps = 1;
    /// Local unit controller for plans made without thermal knowledge: electrolytic
    /// power is clamped to the voltage-safe level at the current temperature and coolers
    /// hold max_temp.
    bool protective_control = false;
    /// With protective control, a clamped unit also heats towards the temperature that
    /// admits its planned power, using fleet power left over.
    bool protective_heating = false;
};

/// Forward simulation of every unit with the nonlinear model.
FleetTrace simulate_schedule(const Schedule& sch, const PlantScenario& s, const ElectrolyzerParams& p,
                             const SimulateOptions& opts = {});

struct AuditTolerances {
    double temperature = 1.0;   // K above max_temp
    double voltage = 0.01;      // V above max_cell_voltage
    double hto_ratio = 0.002;   // above hto_limit
    double power = 1e-6;        // MW above the available power
    double ramp = 1e-6;         // Nm^3/h beyond the ramp limits
    /// Largest accepted model-versus-simulation drift (only for schedules with model trajectories).
    double model_temperature = 1.0;
    double model_hto_ratio = 0.002;
};

struct AuditFinding {
    std::string tag;  // constraint family, e.g. "voltage_cap"
    int unit = -1;
    int step = -1;
    double modeled = 0.0;
    double simulated = 0.0;
    double violation = 0.0;

    friend bool operator==(const AuditFinding&, const AuditFinding&) = default;
};

struct AuditReport {
    std::vector<AuditFinding> findings;
    bool pass = true;
    double realized_profit = 0.0;           // $
    double production_nm3 = 0.0;            // simulated
    double max_temperature_drift = 0.0;     // K, model vs simulation
    double max_hto_ratio_drift = 0.0;       // fraction
    double max_temperature = 0.0;
    double max_voltage = 0.0;
    double max_hto_ratio = 0.0;

    friend bool operator==(const AuditReport&, const AuditReport&) = default;
};

AuditReport audit(const Schedule& sch, const FleetTrace& trace, const PlantScenario& s, const ElectrolyzerParams& p,
                  const AuditTolerances& tol = {});

/// One JSON object per finding, one per line.
std::string findings_to_jsonl(const AuditReport& r);

/// Profit from simulated production and power; startups counted from the simulated states.
double realized_profit(const FleetTrace& trace, const PlantScenario& s);
double realized_production_nm3(const FleetTrace& trace);

// --- comparison harness ----------------------------------------------------

struct CompareOptions {
    LinearizationOptions linearization;
    double nominal_temp = 0.0;  // 0 = max_temp
    int jobs = 1;
    int substeps = 1;
    AuditTolerances tolerances;
    /// Seed the proposed model with the best of the baseline plan and, if enabled, the
    /// rounded relaxation, each completed under the model dynamics.
    bool warm_start = true;
    bool relaxation_start = true;
    ModelOptions model;
};

struct MethodOutcome {
    std::string method;
    SolveStatus status = SolveStatus::SolverError;
    double gap = 0.0;
    double model_objective = 0.0;
    double solve_seconds = 0.0;
    double start_objective = std::numeric_limits<double>::quiet_NaN();  // model objective of the warm start
    std::string start_source;  // "baseline", "relaxation" or empty
    double relaxation_objective = std::numeric_limits<double>::quiet_NaN();
    double relaxation_seconds = 0.0;
    std::string message;
    bool solved = false;
    Schedule schedule;
    FleetTrace trace;
    AuditReport audit;
};

struct ScenarioComparison {
    std::string scenario;
    MethodOutcome proposed;
    MethodOutcome baseline;
    double delta_production_pct = 0.0;
    double delta_profit_pct = 0.0;
    bool valid = false;  // both methods solved
};

struct ComparisonSummary {
    std::vector<ScenarioComparison> scenarios;
    double mean_delta_production_pct = 0.0;
    double mean_delta_profit_pct = 0.0;
    int excluded = 0;
    std::vector<std::string> warnings;
};

/// Solves one method ("proposed" or "baseline") for one scenario, then simulates and
/// audits the result. The baseline runs under the clamp-only protective controller.
/// For the proposed method with warm_start set, `start_plan` (or, when null, a freshly
/// solved baseline plan) is completed into a starting assignment; with relaxation_start
/// the LP relaxation is also rounded at several thresholds, and the best completed
/// candidate is passed to the solver.
MethodOutcome run_method(const std::string& method, const PlantScenario& s, const ElectrolyzerParams& p,
                         const HalfspaceSet& hs, const SolverConfig& cfg, const CompareOptions& opts = {},
                         const Schedule* start_plan = nullptr);

ComparisonSummary compare(const std::vector<PlantScenario>& scenarios, const ElectrolyzerParams& p,
                          const HalfspaceSet& hs, const SolverConfig& cfg, const CompareOptions& opts = {});

/// CSV with the header scenario,method,production_Nm3,profit_usd,delta_production_pct,delta_profit_pct,solver_status,gap
std::string comparison_csv(const ComparisonSummary& c);

// --- impurity curves -------------------------------------------------------------

struct HtoCurve {
    std::vector<double> loads;                // fraction of rated power
    std::vector<double> time_h;               // sample times, starting at 0
    std::vector<std::vector<double>> ratio;   // [load][sample]
};

/// Impurity ratio under constant electrolytic load from a warm, clean start
/// (temperature held at max_temp, no impurity), sampled every step.
HtoCurve hto_curve(const std::vector<double>& loads, double hours, const ElectrolyzerParams& p, double step_s = 900.0);
std::string hto_curve_csv(const HtoCurve& c);

// --- exhaustive oracle -------------------------------------------------------

struct OracleLimits {
    int max_units = 2;
    int max_steps = 8;
    int max_grid = 5;
};

struct OracleResult {
    Schedule schedule;
    double objective = 0.0;  // realized profit of the best schedule
    long long nodes = 0;
};

/// Exact search over state strings and gridded electrolytic power, with heating and
/// cooling off, scoring each complete plan by simulated profit. Branches that break
/// a hard limit (temperature, voltage, impurity, fleet power, ramp, idle gap) are cut,
/// and an optimistic per-step bound prunes the rest; the result equals full enumeration.
/// Ties go to the lexicographically smallest plan in (Idle, Standby, grid levels) order.
OracleResult oracle_best(const PlantScenario& s, const ElectrolyzerParams& p, const std::vector<double>& power_grid,
                         const OracleLimits& limits = {});

}  // namespace p2h
