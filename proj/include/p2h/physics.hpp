#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace p2h {

/// Operational state of one electrolyzer.
enum class OpState { Production, Standby, Idle };

const char* to_string(OpState s);
OpState op_state_from_string(const std::string& s);

inline bool is_active(OpState s) { return s != OpState::Idle; }

namespace units {
/// Normal molar volume used for Nm^3 conversions [Nm^3/mol].
inline constexpr double kNm3PerMol = 22.414e-3;
inline constexpr double kSecondsPerHour = 3600.0;

inline double mol_s_to_nm3_h(double mol_s) { return mol_s * kNm3PerMol * kSecondsPerHour; }
inline double nm3_h_to_mol_s(double nm3_h) { return nm3_h / (kNm3PerMol * kSecondsPerHour); }
}  // namespace units

/// Physical and economic constants of a single alkaline electrolyzer.
///
/// Powers are in MW, temperatures in K, heat capacity in MJ/K, amounts in mol.
/// Ramp limits are production-rate changes per scheduling step in Nm^3/h.
struct ElectrolyzerParams {
    double rated_power = 5.0;
    int n_cells = 360;
    double a0 = 3.042;       // V
    double a1 = -0.004;      // V/K
    double a2 = 8.3e-5;      // V/A
    double thermal_neutral_voltage = 1.48;
    double faraday_efficiency = 0.98;
    double faraday_constant = 96485.3;
    double heat_capacity = 447.2;
    double dissipation_conductance = 0.033;
    double ambient_temp = 298.0;
    double coolant_temp = 278.0;
    double max_temp = 373.0;
    double cooling_conductance = 0.04;
    double max_heating_power = 1.5;
    double heating_eff = 0.95;
    double cooling_eff = 0.9;
    double aux_power = 0.05;
    double max_cell_voltage = 2.1;
    double hto_inflow = 0.003182;
    double hto_discharge_const = 3.2e4;
    double o2_holdup = 2089.07;
    double hto_limit = 0.02;
    double ramp_up = 1600.0;
    double ramp_down = -4800.0;
    int min_idle_steps = 2;

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;
};

struct ElectrolyzerState {
    double temperature = 298.0;  // K
    double hto_moles = 0.0;      // mol
    OpState op_state = OpState::Idle;
};

struct StepInputs {
    double electrolytic_power = 0.0;  // MW
    double heating_power = 0.0;       // MW
    double cooling_power = 0.0;       // MW
};

/// One entry of a power reference profile.
struct ProfileStep {
    OpState op_state = OpState::Idle;
    StepInputs inputs;
};

// --- voltage / current / production relations ---------------------------

double cell_voltage(double current_a, double temperature_k, const ElectrolyzerParams& p);

/// Stack current [A] required for a hydrogen production rate [mol/s].
double current_from_production(double rate_mol_s, const ElectrolyzerParams& p);
double production_from_current(double current_a, const ElectrolyzerParams& p);

/// Current solving n_cells * I * cell_voltage(I, T) = P for the positive root.
double current_from_power(double power_mw, double temperature_k, const ElectrolyzerParams& p);

/// Derived concave production function f(P, T) in mol/s.
double production_rate(double power_mw, double temperature_k, const ElectrolyzerParams& p);

/// Largest electrolytic power [MW] that keeps the cell voltage at or below the cap.
double max_power_at_voltage_cap(double temperature_k, const ElectrolyzerParams& p);
/// Lowest temperature [K] at which `power_mw` stays within the voltage cap (inverse of the above).
double min_temperature_for_power(double power_mw, const ElectrolyzerParams& p);

/// Electrolytic heat release [MW]; negative below the thermal-neutral voltage.
double reaction_heat(double current_a, double temperature_k, const ElectrolyzerParams& p);

// --- dynamics --------------------------------------------------------------

/// Explicit Euler step of the lumped thermal balance over h seconds.
double temperature_step(const ElectrolyzerState& state, const StepInputs& inputs,
                        const ElectrolyzerParams& p, double h);

/// Same balance with the reaction heat supplied directly [MW].
double thermal_step(double temperature_k, double reaction_heat_mw, const StepInputs& inputs,
                    const ElectrolyzerParams& p, double h);

/// Upper bound on active cooling power [MW] at the given temperature.
double max_cooling(double temperature_k, const ElectrolyzerParams& p, OpState state);

/// Explicit Euler step of the hydrogen-in-oxygen impurity holdup [mol].
double hto_step(const ElectrolyzerState& state, double o2_rate_mol_s, bool on,
                const ElectrolyzerParams& p, double h);

double hto_ratio(double hto_moles, const ElectrolyzerParams& p);

/// Steady-state impurity holdup for a constant oxygen rate [mol].
double hto_steady_state_moles(double o2_rate_mol_s, const ElectrolyzerParams& p);

/// Steady-state HTO ratio when producing continuously at `load` x rated power
/// and the reference (maximum) temperature.
double steady_hto_ratio(double load, const ElectrolyzerParams& p);

/// Load fraction of rated power at which the steady-state HTO ratio equals the limit.
/// Throws std::domain_error if no root exists in (0, 1].
double min_steady_load(const ElectrolyzerParams& p);

/// Value of o2_holdup that puts the steady-state limit crossing at `load`.
double calibrate_o2_holdup(const ElectrolyzerParams& p, double load);

// --- trajectories ----------------------------------------------------------

struct TraceStep {
    OpState op_state = OpState::Idle;
    double temperature = 0.0;  // at the start of the step
    double hto_moles = 0.0;
    double hto_ratio = 0.0;
    double current = 0.0;
    double voltage = 0.0;
    double production = 0.0;  // mol/s
    double electrolytic_power = 0.0;
    double heating_power = 0.0;
    double cooling_power = 0.0;
    double total_power = 0.0;  // MW, electrolytic + balance of plant
};

struct SimulationTrace {
    double step_s = 0.0;
    std::vector<TraceStep> steps;
    ElectrolyzerState final_state;
};

struct SimulationOptions {
    /// Explicit Euler sub-steps per scheduling step (1 = scheduling resolution).
    int substeps = 1;
};

/// Thrown when a profile entry breaks the StepInputs invariants.
class ProfileError : public std::invalid_argument {
public:
    ProfileError(std::size_t step, const std::string& what);
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

/// Advance one step: returns the trace row for the step and updates `state`.
TraceStep advance(ElectrolyzerState& state, const ProfileStep& step, const ElectrolyzerParams& p,
                  double h, const SimulationOptions& opts = {});

SimulationTrace simulate_trajectory(const std::vector<ProfileStep>& profile,
                                    const ElectrolyzerState& initial, const ElectrolyzerParams& p,
                                    double h, const SimulationOptions& opts = {});

/// Total power draw of one unit for one step (electrolytic + gated balance of plant).
double total_power(OpState s, const StepInputs& in, const ElectrolyzerParams& p);

}  // namespace p2h
