#pragma once

#include <string>
#include <vector>

#include "p2h/milp.hpp"
#include "p2h/physics.hpp"
#include "p2h/surface.hpp"

namespace p2h {

/// One planning problem for a fleet of identical electrolyzers.
struct PlantScenario {
    std::string name = "scenario";
    int horizon = 0;
    double step_s = 900.0;
    int fleet = 0;
    std::vector<double> available_power;  // MW per step
    double h2_price = 0.0;                // $/Nm^3
    std::vector<double> power_price;      // $/MWh per step
    double startup_cost = 0.0;            // $
    std::vector<ElectrolyzerState> initial_states;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Discretization of the bilinear terms. Zero steps and big-M values are derived from
/// the parameters: the current step so that 2^bits * step = 1.05 x current at rated
/// power and maximum temperature, likewise for the oxygen rate; M_T = max_temp and
/// M_n = 2 x hto_limit x o2_holdup.
struct LinearizationOptions {
    int current_bits = 7;
    double current_step = 0.0;  // A
    int o2_bits = 6;
    double o2_step = 0.0;  // mol/s
    double big_m_temperature = 0.0;
    double big_m_hto = 0.0;
};

/// Fully resolved discretization used by the model builder.
struct Linearization {
    int current_bits = 0;
    double current_step = 0.0;
    double current_max = 0.0;  // 2^bits * step
    int o2_bits = 0;
    double o2_step = 0.0;
    double o2_max = 0.0;
    double big_m_temperature = 0.0;
    double big_m_hto = 0.0;
    double temperature_ref = 0.0;  // stands in for T in remainder * T
    double current_ref = 0.0;      // stands in for I in remainder * I
    double hto_ref = 0.0;          // stands in for n in remainder * n

    /// Largest error of the reaction heat [MW] caused by the remainder approximations.
    double reaction_heat_error(const ElectrolyzerParams& p) const;
    /// Largest per-step error of the impurity balance [mol].
    double hto_step_error(const ElectrolyzerParams& p, double h) const;
};

/// Throws std::invalid_argument naming the option when a bit width cannot cover the range.
Linearization resolve_linearization(const ElectrolyzerParams& p, const LinearizationOptions& opts = {});

/// Current [A] at rated power and maximum temperature.
double rated_current(const ElectrolyzerParams& p);

struct ModelOptions {
    bool allow_standby = true;
    /// When nonempty, electrolytic power in Production is pinned to one of these levels [MW]
    /// and heating and cooling are disabled.
    std::vector<double> power_grid;
    /// Orders neighbouring units with identical initial states by total production.
    bool symmetry_breaking = true;
    /// Caps the linearized reaction heat at (V_max - U_th) * I plus the remainder error.
    /// Redundant for integral bits, but it stops the relaxation from inventing heat.
    bool reaction_heat_cut = true;
    /// Holds the linearized stack power N * I * V(I, T) to the electrolytic power, within the
    /// remainder error (plus the envelope error on the upper side). Without it a pinned power
    /// level can pair with a smaller current and slip past the voltage row.
    bool stack_power_cut = true;
};

/// Variable ids of one unit at one step.
struct StepVars {
    int on = -1, standby = -1, idle = -1, startup = -1, shutdown = -1;
    int p_ele = -1, p_heat = -1, p_cool = -1, p_total = -1, rate = -1;
    int current = -1, current_rem = -1;
    std::vector<int> current_bits, bit_temp, bit_current;
    int on_temp = -1, idle_temp = -1;
    std::vector<int> o2_bits, o2_hto;
    int o2_rem = -1;
    std::vector<int> grid_pick;
};

/// The scheduling MILP together with the index maps needed to read a solution back.
struct SchedulingModel {
    MilpModel milp;
    bool baseline = false;
    int fleet = 0;
    int horizon = 0;
    double step_s = 0.0;
    Linearization lin;
    ModelOptions options;
    double envelope_gap = 0.0;  // largest envelope overestimate of the production rate [mol/s]
    std::vector<std::vector<StepVars>> steps;    // [unit][step]
    std::vector<std::vector<int>> temperature;   // [unit][0..horizon]; empty for the baseline
    std::vector<std::vector<int>> hto;           // [unit][0..horizon]; empty for the baseline

    const StepVars& at(int unit, int step) const { return steps.at(unit).at(step); }
};

/// Declares every variable in deterministic order: unit-major, step-minor.
SchedulingModel declare_variables(const PlantScenario& s, const ElectrolyzerParams& p, const Linearization& lin,
                                  const ModelOptions& opts = {});

/// One-hot state, startup/shutdown detection and the minimum idle run.
void add_state_constraints(SchedulingModel& m, const PlantScenario& s, const ElectrolyzerParams& p);

/// Facet cuts on production, gating and ramp limits.
void add_production_constraints(SchedulingModel& m, const HalfspaceSet& hs, const ElectrolyzerParams& p);

/// Per-unit power balance, electrolytic power limit and fleet cap.
void add_power_constraints(SchedulingModel& m, const PlantScenario& s, const ElectrolyzerParams& p);

/// Current expansion, product linearizations, thermal balance, heater/cooler limits,
/// voltage cap and the Faraday link between production and current.
void add_thermal_constraints(SchedulingModel& m, const PlantScenario& s, const ElectrolyzerParams& p);

/// Impurity balance with the linearized oxygen-rate product and the impurity cap.
void add_hto_constraints(SchedulingModel& m, const PlantScenario& s, const ElectrolyzerParams& p);

/// Rows sum_k rate[i][k] >= sum_k rate[i+1][k] for neighbours with identical initial states.
void add_symmetry_constraints(SchedulingModel& m, const PlantScenario& s);

/// Profit: hydrogen revenue minus energy cost minus startup cost.
void set_objective(SchedulingModel& m, const PlantScenario& s);

SchedulingModel build_model(const PlantScenario& s, const ElectrolyzerParams& p, const HalfspaceSet& hs,
                            const LinearizationOptions& lin = {}, const ModelOptions& opts = {});

/// Constant-range model: no thermal or impurity dynamics, facets evaluated at
/// `nominal_temp`, and a minimum load of min_steady_load() x rated power.
SchedulingModel build_baseline_model(const PlantScenario& s, const ElectrolyzerParams& p, const HalfspaceSet& hs,
                                     double nominal_temp, const ModelOptions& opts = {});

/// How far the model objective of a fixed plan can sit above its simulated profit [$]:
/// per unit-step, the envelope overestimate of the rate plus the facet temperature slope
/// times the reaction-heat drift accumulated over the horizon, valued at the hydrogen price.
double objective_linearization_bound(const PlantScenario& s, const ElectrolyzerParams& p, const HalfspaceSet& hs,
                                     const Linearization& lin);

/// Startup/shutdown/one-hot/idle-gap legality of a state string given the previous state.
bool legal_state_sequence(OpState initial, const std::vector<OpState>& states, int min_idle_steps);

/// Profit [$] of one step of one unit.
double step_profit(double production_mol_s, double total_power_mw, bool startup, double h2_price,
                   double power_price, double startup_cost, double step_s);

}  // namespace p2h
