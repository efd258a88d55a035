#include "p2h/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace p2h {

const char* to_string(OpState s) {
    switch (s) {
        case OpState::Production: return "production";
        case OpState::Standby: return "standby";
        case OpState::Idle: return "idle";
    }
    return "?";
}

OpState op_state_from_string(const std::string& s) {
    if (s == "production" || s == "P" || s == "on") return OpState::Production;
    if (s == "standby" || s == "S") return OpState::Standby;
    if (s == "idle" || s == "I") return OpState::Idle;
    throw std::invalid_argument("unknown operational state '" + s + "'");
}

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("electrolyzer parameters: ") + what);
}

}  // namespace

void ElectrolyzerParams::validate() const {
    require(rated_power > 0, "rated_power must be > 0");
    require(n_cells > 0, "n_cells must be > 0");
    require(a2 > 0, "a2 must be > 0");
    require(thermal_neutral_voltage > 0, "thermal_neutral_voltage must be > 0");
    require(faraday_efficiency > 0 && faraday_efficiency <= 1, "faraday_efficiency must lie in (0,1]");
    require(faraday_constant > 0, "faraday_constant must be > 0");
    require(heat_capacity > 0, "heat_capacity must be > 0");
    require(dissipation_conductance > 0, "dissipation_conductance must be > 0");
    require(ambient_temp > 0 && coolant_temp > 0 && max_temp > 0, "temperatures must be > 0");
    require(ambient_temp <= max_temp, "ambient_temp must not exceed max_temp");
    require(coolant_temp <= ambient_temp, "coolant_temp must not exceed ambient_temp");
    require(cooling_conductance > 0, "cooling_conductance must be > 0");
    require(max_heating_power > 0, "max_heating_power must be > 0");
    require(heating_eff > 0 && cooling_eff > 0, "heating/cooling efficiencies must be > 0");
    require(aux_power > 0, "aux_power must be > 0");
    require(max_cell_voltage > 0, "max_cell_voltage must be > 0");
    require(hto_inflow >= 0, "hto_inflow must be >= 0");
    require(hto_discharge_const > 0, "hto_discharge_const must be > 0");
    require(o2_holdup > 0, "o2_holdup must be > 0");
    require(hto_limit > 0 && hto_limit < 1, "hto_limit must lie in (0,1)");
    require(ramp_up > 0 && ramp_down < 0, "ramp_up must be > 0 and ramp_down < 0");
    require(min_idle_steps >= 1, "min_idle_steps must be >= 1");
}

double cell_voltage(double current_a, double temperature_k, const ElectrolyzerParams& p) {
    return p.a0 + p.a1 * temperature_k + p.a2 * current_a;
}

double current_from_production(double rate_mol_s, const ElectrolyzerParams& p) {
    return 2.0 * p.faraday_constant * rate_mol_s / (p.n_cells * p.faraday_efficiency);
}

double production_from_current(double current_a, const ElectrolyzerParams& p) {
    return p.n_cells * p.faraday_efficiency * current_a / (2.0 * p.faraday_constant);
}

double current_from_power(double power_mw, double temperature_k, const ElectrolyzerParams& p) {
    if (power_mw <= 0) return 0.0;
    const double per_cell_w = power_mw * 1e6 / p.n_cells;
    const double c0 = p.a0 + p.a1 * temperature_k;
    const double disc = std::sqrt(c0 * c0 + 4.0 * p.a2 * per_cell_w);
    // a2 I^2 + c0 I - per_cell_w = 0; rationalized root is stable for c0 > 0
    if (c0 > 0) return 2.0 * per_cell_w / (c0 + disc);
    return (disc - c0) / (2.0 * p.a2);
}

double production_rate(double power_mw, double temperature_k, const ElectrolyzerParams& p) {
    return production_from_current(current_from_power(power_mw, temperature_k, p), p);
}

double max_power_at_voltage_cap(double temperature_k, const ElectrolyzerParams& p) {
    const double i_cap = (p.max_cell_voltage - p.a0 - p.a1 * temperature_k) / p.a2;
    if (i_cap <= 0) return 0.0;
    return p.n_cells * i_cap * p.max_cell_voltage * 1e-6;
}

double min_temperature_for_power(double power_mw, const ElectrolyzerParams& p) {
    const double i_cap = power_mw * 1e6 / (p.n_cells * p.max_cell_voltage);
    return (p.max_cell_voltage - p.a0 - p.a2 * i_cap) / p.a1;
}

double reaction_heat(double current_a, double temperature_k, const ElectrolyzerParams& p) {
    const double u = cell_voltage(current_a, temperature_k, p);
    return p.n_cells * current_a * (u - p.thermal_neutral_voltage) * 1e-6;
}

namespace {

double thermal_rhs(double temperature, double react_mw, double heat_mw, double cool_mw,
                   const ElectrolyzerParams& p) {
    return (react_mw - p.dissipation_conductance * (temperature - p.ambient_temp) - cool_mw + heat_mw) /
           p.heat_capacity;
}

}  // namespace

double temperature_step(const ElectrolyzerState& state, const StepInputs& inputs,
                        const ElectrolyzerParams& p, double h) {
    double react = 0.0;
    if (state.op_state == OpState::Production) {
        const double i = current_from_power(inputs.electrolytic_power, state.temperature, p);
        react = reaction_heat(i, state.temperature, p);
    }
    return thermal_step(state.temperature, react, inputs, p, h);
}

double thermal_step(double temperature_k, double reaction_heat_mw, const StepInputs& inputs,
                    const ElectrolyzerParams& p, double h) {
    // MW * s = MJ, divided by MJ/K
    return temperature_k +
           h * thermal_rhs(temperature_k, reaction_heat_mw, inputs.heating_power, inputs.cooling_power, p);
}

double max_cooling(double temperature_k, const ElectrolyzerParams& p, OpState state) {
    if (!is_active(state)) return 0.0;
    return std::max(0.0, p.cooling_conductance * (temperature_k - p.coolant_temp));
}

double hto_step(const ElectrolyzerState& state, double o2_rate_mol_s, bool on,
                const ElectrolyzerParams& p, double h) {
    const double inflow = on ? p.hto_inflow : 0.0;
    const double next =
        state.hto_moles + h * (inflow - o2_rate_mol_s * state.hto_moles / p.hto_discharge_const);
    return std::max(0.0, next);
}

double hto_ratio(double hto_moles, const ElectrolyzerParams& p) { return hto_moles / p.o2_holdup; }

double hto_steady_state_moles(double o2_rate_mol_s, const ElectrolyzerParams& p) {
    if (o2_rate_mol_s <= 0) return std::numeric_limits<double>::infinity();
    return p.hto_inflow * p.hto_discharge_const / o2_rate_mol_s;
}

double steady_hto_ratio(double load, const ElectrolyzerParams& p) {
    const double o2 = 0.5 * production_rate(load * p.rated_power, p.max_temp, p);
    if (p.hto_inflow == 0.0) return 0.0;
    return hto_ratio(hto_steady_state_moles(o2, p), p);
}

double min_steady_load(const ElectrolyzerParams& p) {
    if (p.hto_inflow == 0.0) return 0.0;
    if (steady_hto_ratio(1.0, p) > p.hto_limit)
        throw std::domain_error("min_steady_load: steady HTO ratio exceeds the limit even at rated load");
    double lo = 0.0, hi = 1.0;
    // ratio is strictly decreasing in load, so bisect on the sign change
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (steady_hto_ratio(mid, p) > p.hto_limit)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

double calibrate_o2_holdup(const ElectrolyzerParams& p, double load) {
    const double o2 = 0.5 * production_rate(load * p.rated_power, p.max_temp, p);
    return hto_steady_state_moles(o2, p) / p.hto_limit;
}

double total_power(OpState s, const StepInputs& in, const ElectrolyzerParams& p) {
    if (!is_active(s)) return 0.0;
    return in.electrolytic_power + in.heating_power / p.heating_eff + in.cooling_power / p.cooling_eff +
           p.aux_power;
}

ProfileError::ProfileError(std::size_t step, const std::string& what)
    : std::invalid_argument("profile step " + std::to_string(step) + ": " + what), step_(step) {}

namespace {

const char* step_violation(const ProfileStep& s, const ElectrolyzerParams& p) {
    const auto& in = s.inputs;
    if (!(in.electrolytic_power >= 0 && in.heating_power >= 0 && in.cooling_power >= 0))
        return "powers must be non-negative";
    if (s.op_state != OpState::Production && in.electrolytic_power > 0)
        return "electrolytic power outside the production state";
    if (!is_active(s.op_state) && (in.heating_power > 0 || in.cooling_power > 0))
        return "heating or cooling while idle";
    if (in.heating_power > p.max_heating_power * (1 + 1e-9)) return "heating power above its limit";
    return nullptr;
}

}  // namespace

TraceStep advance(ElectrolyzerState& state, const ProfileStep& step, const ElectrolyzerParams& p,
                  double h, const SimulationOptions& opts) {
    if (const char* err = step_violation(step, p)) throw std::invalid_argument(err);
    const int n_sub = std::max(1, opts.substeps);
    const double hs = h / n_sub;
    const bool on = step.op_state == OpState::Production;

    TraceStep row;
    row.op_state = step.op_state;
    row.temperature = state.temperature;
    row.hto_moles = state.hto_moles;
    row.hto_ratio = hto_ratio(state.hto_moles, p);
    row.electrolytic_power = step.inputs.electrolytic_power;
    row.heating_power = step.inputs.heating_power;

    double temp = state.temperature;
    double hto = state.hto_moles;
    double cool_applied = 0.0;
    for (int s = 0; s < n_sub; ++s) {
        const double current = on ? current_from_power(step.inputs.electrolytic_power, temp, p) : 0.0;
        const double rate = production_from_current(current, p);
        const double voltage = on ? cell_voltage(current, temp, p) : 0.0;
        const double cool = std::min(step.inputs.cooling_power, max_cooling(temp, p, step.op_state));
        const double react = on ? reaction_heat(current, temp, p) : 0.0;

        row.current += current / n_sub;
        row.production += rate / n_sub;
        row.voltage = std::max(row.voltage, voltage);
        cool_applied += cool / n_sub;

        ElectrolyzerState sub{temp, hto, step.op_state};
        hto = hto_step(sub, 0.5 * rate, on, p, hs);
        temp = temp + hs * thermal_rhs(temp, react, step.inputs.heating_power, cool, p);
    }
    row.cooling_power = cool_applied;
    row.total_power = total_power(step.op_state,
                                  {step.inputs.electrolytic_power, step.inputs.heating_power, cool_applied}, p);

    state.temperature = temp;
    state.hto_moles = hto;
    state.op_state = step.op_state;
    return row;
}

SimulationTrace simulate_trajectory(const std::vector<ProfileStep>& profile,
                                    const ElectrolyzerState& initial, const ElectrolyzerParams& p,
                                    double h, const SimulationOptions& opts) {
    if (profile.empty()) throw std::invalid_argument("simulate_trajectory: empty profile");
    if (!(h > 0)) throw std::invalid_argument("simulate_trajectory: step length must be > 0");
    SimulationTrace trace;
    trace.step_s = h;
    trace.steps.reserve(profile.size());
    ElectrolyzerState state = initial;
    for (std::size_t k = 0; k < profile.size(); ++k) {
        if (const char* err = step_violation(profile[k], p)) throw ProfileError(k, err);
        trace.steps.push_back(advance(state, profile[k], p, h, opts));
    }
    trace.final_state = state;
    return trace;
}

}  // namespace p2h
