#include "p2h/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace p2h {

void PlantScenario::validate() const {
    auto bad = [](const std::string& what) { throw std::invalid_argument("scenario: " + what); };
    if (horizon < 1) bad("horizon must be >= 1");
    if (!(step_s > 0)) bad("step_s must be > 0");
    if (fleet < 1) bad("fleet must be >= 1");
    if (static_cast<int>(available_power.size()) != horizon)
        bad("available_power has " + std::to_string(available_power.size()) + " entries, horizon is " +
            std::to_string(horizon));
    if (static_cast<int>(power_price.size()) != horizon)
        bad("power_price has " + std::to_string(power_price.size()) + " entries, horizon is " +
            std::to_string(horizon));
    if (static_cast<int>(initial_states.size()) != fleet)
        bad("initial_states has " + std::to_string(initial_states.size()) + " entries, fleet is " +
            std::to_string(fleet));
    for (int k = 0; k < horizon; ++k) {
        if (!(available_power[k] >= 0)) bad("available_power[" + std::to_string(k) + "] must be >= 0");
        if (!(power_price[k] >= 0)) bad("power_price[" + std::to_string(k) + "] must be >= 0");
    }
    if (!(h2_price >= 0)) bad("h2_price must be >= 0");
    if (!(startup_cost >= 0)) bad("startup_cost must be >= 0");
    for (int i = 0; i < fleet; ++i) {
        if (!(initial_states[i].temperature > 0)) bad("initial_states[" + std::to_string(i) + "].temperature must be > 0");
        if (!(initial_states[i].hto_moles >= 0)) bad("initial_states[" + std::to_string(i) + "].hto_moles must be >= 0");
    }
}

double rated_current(const ElectrolyzerParams& p) { return current_from_power(p.rated_power, p.max_temp, p); }

Linearization resolve_linearization(const ElectrolyzerParams& p, const LinearizationOptions& o) {
    if (o.current_bits < 1 || o.current_bits > 20) throw std::invalid_argument("current_bits must lie in [1,20]");
    if (o.o2_bits < 1 || o.o2_bits > 20) throw std::invalid_argument("o2_bits must lie in [1,20]");
    Linearization lin;
    const double i_need = rated_current(p);
    const double o2_need = 0.5 * production_from_current(i_need, p);

    lin.current_bits = o.current_bits;
    lin.current_step = o.current_step > 0 ? o.current_step : 1.05 * i_need / std::ldexp(1.0, o.current_bits);
    lin.current_max = std::ldexp(lin.current_step, o.current_bits);
    if (lin.current_max < i_need)
        throw std::invalid_argument("current_bits = " + std::to_string(o.current_bits) +
                                    " with current_step = " + std::to_string(lin.current_step) +
                                    " A cannot represent the rated current " + std::to_string(i_need) + " A");

    // oxygen range must cover the production reachable with current_max
    const double o2_reach = 0.5 * production_from_current(lin.current_max, p);
    lin.o2_bits = o.o2_bits;
    lin.o2_step = o.o2_step > 0 ? o.o2_step : std::max(1.05 * o2_need, o2_reach) / std::ldexp(1.0, o.o2_bits);
    lin.o2_max = std::ldexp(lin.o2_step, o.o2_bits);
    if (lin.o2_max < o2_reach * (1 - 1e-12))
        throw std::invalid_argument("o2_bits = " + std::to_string(o.o2_bits) + " with o2_step = " +
                                    std::to_string(lin.o2_step) + " mol/s cannot represent the oxygen rate " +
                                    std::to_string(o2_reach) + " mol/s");

    lin.big_m_temperature = o.big_m_temperature > 0 ? o.big_m_temperature : p.max_temp;
    if (lin.big_m_temperature < p.max_temp)
        throw std::invalid_argument("big_m_temperature must be >= max_temp");
    const double cap = p.hto_limit * p.o2_holdup;
    lin.big_m_hto = o.big_m_hto > 0 ? o.big_m_hto : 2.0 * cap;
    if (lin.big_m_hto < cap) throw std::invalid_argument("big_m_hto must be >= hto_limit * o2_holdup");

    lin.temperature_ref = 0.5 * (p.coolant_temp + lin.big_m_temperature);
    lin.current_ref = 0.5 * lin.current_max;
    lin.hto_ref = 0.5 * cap;
    return lin;
}

double Linearization::reaction_heat_error(const ElectrolyzerParams& p) const {
    const double dt = std::max(big_m_temperature - temperature_ref, temperature_ref - p.coolant_temp);
    const double di = 0.5 * current_max;
    return p.n_cells * 1e-6 * current_step * (std::abs(p.a1) * dt + p.a2 * di);
}

double Linearization::hto_step_error(const ElectrolyzerParams& p, double h) const {
    const double dn = std::max(big_m_hto - hto_ref, hto_ref);
    return h * o2_step * dn / p.hto_discharge_const;
}

namespace {

std::string nm(const char* base, int i, int k) {
    return std::string(base) + "_" + std::to_string(i) + "_" + std::to_string(k);
}
std::string nm(const char* base, int i, int k, int j) { return nm(base, i, k) + "_" + std::to_string(j); }

double pcool_max(const ElectrolyzerParams& p) { return p.cooling_conductance * (p.max_temp - p.coolant_temp); }

double ptot_max(const ElectrolyzerParams& p) {
    return p.rated_power + p.max_heating_power / p.heating_eff + pcool_max(p) / p.cooling_eff + p.aux_power;
}

/// Sandwich rows pinning z = b * x for binary b and x in [lo, hi].
void add_product_rows(MilpModel& m, const std::string& name, int z, int b, int x, double lo, double hi, const Tag& tag) {
    m.add_constraint(name + "_u1", {{z, 1.0}, {b, -hi}}, RowSense::LessEqual, 0.0, tag);
    m.add_constraint(name + "_l1", {{z, 1.0}, {b, -lo}}, RowSense::GreaterEqual, 0.0, tag);
    m.add_constraint(name + "_u2", {{z, 1.0}, {x, -1.0}, {b, -lo}}, RowSense::LessEqual, -lo, tag);
    m.add_constraint(name + "_l2", {{z, 1.0}, {x, -1.0}, {b, -hi}}, RowSense::GreaterEqual, -hi, tag);
}

int declare_product(MilpModel& m, const std::string& name, double lo, double hi, const Tag& tag) {
    return m.add_variable(name, VarKind::Continuous, std::min(0.0, lo), std::max(0.0, hi), tag);
}

}  // namespace

SchedulingModel declare_variables(const PlantScenario& s, const ElectrolyzerParams& p, const Linearization& lin,
                                  const ModelOptions& opts) {
    s.validate();
    p.validate();
    SchedulingModel sm;
    sm.fleet = s.fleet;
    sm.horizon = s.horizon;
    sm.step_s = s.step_s;
    sm.lin = lin;
    sm.options = opts;
    sm.milp.name = "p2h_" + s.name;
    auto& m = sm.milp;
    const bool grid = !opts.power_grid.empty();
    for (double g : opts.power_grid)
        if (!(g >= 0 && g <= p.rated_power)) throw std::invalid_argument("power_grid levels must lie in [0, rated_power]");

    const double rate_max = production_from_current(lin.current_max, p);
    sm.steps.assign(s.fleet, std::vector<StepVars>(s.horizon));
    sm.temperature.assign(s.fleet, {});
    sm.hto.assign(s.fleet, {});
    for (int i = 0; i < s.fleet; ++i) {
        const auto& init = s.initial_states[i];
        if (init.temperature < p.coolant_temp || init.temperature > p.max_temp)
            throw std::invalid_argument("initial_states[" + std::to_string(i) + "].temperature outside [coolant_temp, max_temp]");
        if (init.hto_moles > lin.big_m_hto)
            throw std::invalid_argument("initial_states[" + std::to_string(i) + "].hto_moles exceeds big_m_hto");
        sm.temperature[i].push_back(
            m.add_variable(nm("T", i, 0), VarKind::Continuous, init.temperature, init.temperature, {i, 0, "temperature"}));
        sm.hto[i].push_back(
            m.add_variable(nm("n", i, 0), VarKind::Continuous, init.hto_moles, init.hto_moles, {i, 0, "hto"}));

        for (int k = 0; k < s.horizon; ++k) {
            auto& v = sm.steps[i][k];
            const Tag tag{i, k, "state"};
            v.on = m.add_binary(nm("on", i, k), tag);
            v.standby = m.add_variable(nm("sb", i, k), VarKind::Binary, 0.0, opts.allow_standby ? 1.0 : 0.0, tag);
            v.idle = m.add_binary(nm("idle", i, k), tag);
            v.startup = m.add_binary(nm("su", i, k), tag);
            v.shutdown = m.add_binary(nm("sd", i, k), tag);
            const Tag ptag{i, k, "power"};
            v.p_ele = m.add_variable(nm("pele", i, k), VarKind::Continuous, 0.0, p.rated_power, ptag);
            v.p_heat = m.add_variable(nm("pheat", i, k), VarKind::Continuous, 0.0, grid ? 0.0 : p.max_heating_power, ptag);
            v.p_cool = m.add_variable(nm("pcool", i, k), VarKind::Continuous, 0.0, grid ? 0.0 : pcool_max(p), ptag);
            v.p_total = m.add_variable(nm("ptot", i, k), VarKind::Continuous, 0.0, ptot_max(p), ptag);
            v.rate = m.add_variable(nm("rate", i, k), VarKind::Continuous, 0.0, rate_max, {i, k, "production"});
            if (grid)
                for (std::size_t g = 0; g < opts.power_grid.size(); ++g)
                    v.grid_pick.push_back(m.add_binary(nm("g", i, k, static_cast<int>(g)), {i, k, "grid"}));

            const Tag ctag{i, k, "current"};
            v.current = m.add_variable(nm("I", i, k), VarKind::Continuous, 0.0, lin.current_max, ctag);
            for (int j = 0; j < lin.current_bits; ++j) v.current_bits.push_back(m.add_binary(nm("bI", i, k, j), ctag));
            v.current_rem = m.add_variable(nm("rI", i, k), VarKind::Continuous, 0.0, lin.current_step, ctag);

            const Tag xtag{i, k, "product"};
            const double t_lo = p.coolant_temp, t_hi = lin.big_m_temperature;
            v.on_temp = declare_product(m, nm("onT", i, k), t_lo, t_hi, xtag);
            v.idle_temp = declare_product(m, nm("idleT", i, k), t_lo, t_hi, xtag);
            for (int j = 0; j < lin.current_bits; ++j) {
                v.bit_temp.push_back(declare_product(m, nm("dIT", i, k, j), t_lo, t_hi, xtag));
                v.bit_current.push_back(declare_product(m, nm("dII", i, k, j), 0.0, lin.current_max, xtag));
            }

            const Tag otag{i, k, "o2"};
            for (int j = 0; j < lin.o2_bits; ++j) v.o2_bits.push_back(m.add_binary(nm("bO", i, k, j), otag));
            v.o2_rem = m.add_variable(nm("rO", i, k), VarKind::Continuous, 0.0, lin.o2_step, otag);
            for (int j = 0; j < lin.o2_bits; ++j)
                v.o2_hto.push_back(declare_product(m, nm("dOn", i, k, j), 0.0, lin.big_m_hto, xtag));

            sm.temperature[i].push_back(m.add_variable(nm("T", i, k + 1), VarKind::Continuous, p.coolant_temp,
                                                       p.max_temp, {i, k + 1, "temperature"}));
            sm.hto[i].push_back(
                m.add_variable(nm("n", i, k + 1), VarKind::Continuous, 0.0, lin.big_m_hto, {i, k + 1, "hto"}));
        }
    }
    return sm;
}

void add_state_constraints(SchedulingModel& sm, const PlantScenario& s, const ElectrolyzerParams& p) {
    auto& m = sm.milp;
    const int nmin = p.min_idle_steps;
    for (int i = 0; i < sm.fleet; ++i) {
        const double idle0 = s.initial_states[i].op_state == OpState::Idle ? 1.0 : 0.0;
        for (int k = 0; k < sm.horizon; ++k) {
            const auto& v = sm.steps[i][k];
            const Tag tag{i, k, "state"};
            m.add_constraint(nm("onehot", i, k), {{v.on, 1}, {v.standby, 1}, {v.idle, 1}}, RowSense::Equal, 1.0, tag);

            // previous idle indicator: constant at the first step
            std::vector<Term> prev_idle;
            double prev_idle_const = idle0;
            if (k > 0) {
                prev_idle = {{sm.steps[i][k - 1].idle, 1.0}};
                prev_idle_const = 0.0;
            }
            auto with = [](std::vector<Term> base, const std::vector<Term>& extra, double scale) {
                for (auto t : extra) base.push_back({t.var, t.coef * scale});
                return base;
            };
            const Tag su{i, k, "startup"}, sd{i, k, "shutdown"};
            // active now and idle before => startup
            m.add_constraint(nm("su_lo", i, k), with({{v.on, 1}, {v.standby, 1}, {v.startup, -1}}, prev_idle, 1.0),
                             RowSense::LessEqual, 1.0 - prev_idle_const, su);
            m.add_constraint(nm("su_up1", i, k), with({{v.startup, 1}}, prev_idle, -1.0), RowSense::LessEqual,
                             prev_idle_const, su);
            m.add_constraint(nm("su_up2", i, k), {{v.startup, 1}, {v.idle, 1}}, RowSense::LessEqual, 1.0, su);
            // idle now and active before => shutdown
            m.add_constraint(nm("sd_lo", i, k), with({{v.idle, 1}, {v.shutdown, -1}}, prev_idle, -1.0),
                             RowSense::LessEqual, prev_idle_const, sd);
            m.add_constraint(nm("sd_up1", i, k), with({{v.shutdown, 1}}, prev_idle, 1.0), RowSense::LessEqual,
                             1.0 - prev_idle_const, sd);
            m.add_constraint(nm("sd_up2", i, k), {{v.shutdown, 1}, {v.idle, -1}}, RowSense::LessEqual, 0.0, sd);

            // idle runs shorter than nmin between active states are forbidden:
            // sum_{l=1}^{j-1} idle[k-j+l] - idle[k-j] - idle[k] <= j - 2
            for (int j = 2; j <= nmin; ++j) {
                if (k - j < -1) continue;
                std::vector<Term> row;
                double rhs = j - 2;
                for (int l = 1; l < j; ++l) row.push_back({sm.steps[i][k - j + l].idle, 1.0});
                if (k - j >= 0)
                    row.push_back({sm.steps[i][k - j].idle, -1.0});
                else
                    rhs += idle0;
                row.push_back({v.idle, -1.0});
                m.add_constraint(nm("gap", i, k, j), row, RowSense::LessEqual, rhs, {i, k, "idle_gap"});
            }
        }
    }
}

void add_production_constraints(SchedulingModel& sm, const HalfspaceSet& hs, const ElectrolyzerParams& p) {
    if (hs.facets.empty()) throw std::invalid_argument("add_production_constraints: empty half-space set");
    if (sm.baseline) throw std::invalid_argument("add_production_constraints: baseline model uses fixed temperature");
    auto& m = sm.milp;
    const double to_nm3h = units::mol_s_to_nm3_h(1.0);
    const double rate_max = m.variable(sm.steps[0][0].rate).upper;
    sm.envelope_gap = hs.max_gap;
    for (int i = 0; i < sm.fleet; ++i) {
        for (int k = 0; k < sm.horizon; ++k) {
            auto& v = sm.steps[i][k];
            const Tag tag{i, k, "facet"};
            add_product_rows(m, nm("onT", i, k), v.on_temp, v.on, sm.temperature[i][k], p.coolant_temp,
                             sm.lin.big_m_temperature, {i, k, "product"});
            for (std::size_t j = 0; j < hs.facets.size(); ++j) {
                const auto& f = hs.facets[j];
                m.add_constraint(nm("facet", i, k, static_cast<int>(j)),
                                 {{v.rate, 1.0}, {v.p_ele, -f.a}, {v.on_temp, -f.b}, {v.on, -f.c}},
                                 RowSense::LessEqual, 0.0, tag);
            }
            m.add_constraint(nm("gate", i, k), {{v.rate, 1.0}, {v.on, -rate_max}}, RowSense::LessEqual, 0.0,
                             {i, k, "production"});
            if (k + 1 < sm.horizon) {
                const int nxt = sm.steps[i][k + 1].rate;
                const Tag rt{i, k, "ramp"};
                m.add_constraint(nm("rampup", i, k), {{nxt, to_nm3h}, {v.rate, -to_nm3h}}, RowSense::LessEqual,
                                 p.ramp_up, rt);
                m.add_constraint(nm("rampdn", i, k), {{nxt, to_nm3h}, {v.rate, -to_nm3h}}, RowSense::GreaterEqual,
                                 p.ramp_down, rt);
            }
        }
    }
}

void add_power_constraints(SchedulingModel& sm, const PlantScenario& s, const ElectrolyzerParams& p) {
    auto& m = sm.milp;
    for (int i = 0; i < sm.fleet; ++i) {
        for (int k = 0; k < sm.horizon; ++k) {
            const auto& v = sm.steps[i][k];
            const Tag tag{i, k, "power_balance"};
            std::vector<Term> row{{v.p_total, 1.0}, {v.p_ele, -1.0}, {v.on, -p.aux_power}, {v.standby, -p.aux_power}};
            if (v.p_heat >= 0) row.push_back({v.p_heat, -1.0 / p.heating_eff});
            if (v.p_cool >= 0) row.push_back({v.p_cool, -1.0 / p.cooling_eff});
            m.add_constraint(nm("pbal", i, k), row, RowSense::Equal, 0.0, tag);
            m.add_constraint(nm("pele_cap", i, k), {{v.p_ele, 1.0}, {v.on, -p.rated_power}}, RowSense::LessEqual, 0.0,
                             {i, k, "ele_cap"});
            if (!v.grid_pick.empty()) {
                std::vector<Term> pick{{v.on, -1.0}}, level{{v.p_ele, 1.0}};
                for (std::size_t g = 0; g < v.grid_pick.size(); ++g) {
                    pick.push_back({v.grid_pick[g], 1.0});
                    level.push_back({v.grid_pick[g], -sm.options.power_grid[g]});
                }
                m.add_constraint(nm("grid_pick", i, k), pick, RowSense::Equal, 0.0, {i, k, "grid"});
                m.add_constraint(nm("grid_level", i, k), level, RowSense::Equal, 0.0, {i, k, "grid"});
            }
        }
    }
    for (int k = 0; k < sm.horizon; ++k) {
        std::vector<Term> row;
        for (int i = 0; i < sm.fleet; ++i) row.push_back({sm.steps[i][k].p_total, 1.0});
        m.add_constraint("fleet_" + std::to_string(k), row, RowSense::LessEqual, s.available_power[k],
                         {-1, k, "fleet_cap"});
    }
}

void add_thermal_constraints(SchedulingModel& sm, const PlantScenario& s, const ElectrolyzerParams& p) {
    auto& m = sm.milp;
    const auto& lin = sm.lin;
    const double kq = s.step_s / p.heat_capacity;
    const double n6 = p.n_cells * 1e-6;
    const double t_hi = lin.big_m_temperature, t_lo = p.coolant_temp;
    for (int i = 0; i < sm.fleet; ++i) {
        for (int k = 0; k < sm.horizon; ++k) {
            const auto& v = sm.steps[i][k];
            const int tk = sm.temperature[i][k], tn = sm.temperature[i][k + 1];
            const Tag ptag{i, k, "product"};

            std::vector<Term> expand{{v.current, 1.0}, {v.current_rem, -1.0}};
            for (int j = 0; j < lin.current_bits; ++j)
                expand.push_back({v.current_bits[j], -std::ldexp(lin.current_step, j)});
            m.add_constraint(nm("Iexp", i, k), expand, RowSense::Equal, 0.0, {i, k, "current"});

            for (int j = 0; j < lin.current_bits; ++j) {
                add_product_rows(m, nm("dIT", i, k, j), v.bit_temp[j], v.current_bits[j], tk, t_lo, t_hi, ptag);
                add_product_rows(m, nm("dII", i, k, j), v.bit_current[j], v.current_bits[j], v.current, 0.0,
                                 lin.current_max, ptag);
            }
            add_product_rows(m, nm("idleT", i, k), v.idle_temp, v.idle, tk, t_lo, t_hi, ptag);

            // T' = T + kq (P_react - c_diss (T - T_am) - P_cool + P_heat)
            std::vector<Term> th{{tn, 1.0}, {tk, -1.0 + kq * p.dissipation_conductance}};
            th.push_back({v.current, -kq * n6 * (p.a0 - p.thermal_neutral_voltage)});
            th.push_back({v.current_rem, -kq * n6 * (p.a1 * lin.temperature_ref + p.a2 * lin.current_ref)});
            for (int j = 0; j < lin.current_bits; ++j) {
                const double w = std::ldexp(lin.current_step, j);
                th.push_back({v.bit_temp[j], -kq * n6 * p.a1 * w});
                th.push_back({v.bit_current[j], -kq * n6 * p.a2 * w});
            }
            if (sm.options.reaction_heat_cut) {
                std::vector<Term> cut{{v.current, p.a0 - p.max_cell_voltage},
                                      {v.current_rem, p.a1 * lin.temperature_ref + p.a2 * lin.current_ref}};
                for (int j = 0; j < lin.current_bits; ++j) {
                    const double w = std::ldexp(lin.current_step, j);
                    cut.push_back({v.bit_temp[j], p.a1 * w});
                    cut.push_back({v.bit_current[j], p.a2 * w});
                }
                cut.push_back({v.on, -lin.reaction_heat_error(p) / n6});
                m.add_constraint(nm("react_cut", i, k), cut, RowSense::LessEqual, 0.0, {i, k, "thermal"});
            }
            if (sm.options.stack_power_cut) {
                // An envelope overshoot of the rate lets I exceed what P_ele can drive.
                const double d_i = sm.envelope_gap / production_from_current(1.0, p);
                const double slack =
                    lin.reaction_heat_error(p) + n6 * d_i * (p.max_cell_voltage + p.a2 * lin.current_max);
                std::vector<Term> cut{{v.current, n6 * p.a0},
                                      {v.current_rem, n6 * (p.a1 * lin.temperature_ref + p.a2 * lin.current_ref)}};
                for (int j = 0; j < lin.current_bits; ++j) {
                    const double w = std::ldexp(lin.current_step, j);
                    cut.push_back({v.bit_temp[j], n6 * p.a1 * w});
                    cut.push_back({v.bit_current[j], n6 * p.a2 * w});
                }
                cut.push_back({v.p_ele, -1.0});
                std::vector<Term> floor = cut;
                cut.push_back({v.on, -slack});
                m.add_constraint(nm("stack_cut", i, k), cut, RowSense::LessEqual, 0.0, {i, k, "thermal"});
                // and the other side: power the current cannot absorb would run the real stack
                // at a higher current, past the voltage row
                floor.push_back({v.on, lin.reaction_heat_error(p)});
                m.add_constraint(nm("stack_floor", i, k), floor, RowSense::GreaterEqual, 0.0, {i, k, "thermal"});
            }
            th.push_back({v.p_cool, kq});
            th.push_back({v.p_heat, -kq});
            m.add_constraint(nm("thermal", i, k), th, RowSense::Equal, kq * p.dissipation_conductance * p.ambient_temp,
                             {i, k, "thermal"});

            m.add_constraint(nm("heat_cap", i, k), {{v.p_heat, 1.0}, {v.idle, p.max_heating_power}},
                             RowSense::LessEqual, p.max_heating_power, {i, k, "heater"});
            // P_cool <= c_cool (1 - idle)(T - T_cool)
            const double cc = p.cooling_conductance;
            m.add_constraint(nm("cool_cap", i, k),
                             {{v.p_cool, 1.0}, {tk, -cc}, {v.idle_temp, cc}, {v.idle, -cc * p.coolant_temp}},
                             RowSense::LessEqual, -cc * p.coolant_temp, {i, k, "cooler"});
            m.add_constraint(nm("cool_gate", i, k), {{v.p_cool, 1.0}, {v.idle, pcool_max(p)}}, RowSense::LessEqual,
                             pcool_max(p), {i, k, "cooler"});

            m.add_constraint(nm("volt", i, k),
                             {{v.on, p.a0 - p.max_cell_voltage}, {v.on_temp, p.a1}, {v.current, p.a2}},
                             RowSense::LessEqual, 0.0, {i, k, "voltage"});
            m.add_constraint(nm("faraday", i, k),
                             {{v.rate, 1.0}, {v.current, -production_from_current(1.0, p)}}, RowSense::Equal, 0.0,
                             {i, k, "faraday"});
        }
    }
}

void add_hto_constraints(SchedulingModel& sm, const PlantScenario& s, const ElectrolyzerParams& p) {
    auto& m = sm.milp;
    const auto& lin = sm.lin;
    const double h = s.step_s;
    const double cap = p.hto_limit * p.o2_holdup;
    for (int i = 0; i < sm.fleet; ++i) {
        for (int k = 0; k < sm.horizon; ++k) {
            const auto& v = sm.steps[i][k];
            const int nk = sm.hto[i][k], nn = sm.hto[i][k + 1];
            std::vector<Term> expand{{v.rate, 0.5}, {v.o2_rem, -1.0}};
            for (int j = 0; j < lin.o2_bits; ++j) expand.push_back({v.o2_bits[j], -std::ldexp(lin.o2_step, j)});
            m.add_constraint(nm("O2exp", i, k), expand, RowSense::Equal, 0.0, {i, k, "o2"});

            for (int j = 0; j < lin.o2_bits; ++j)
                add_product_rows(m, nm("dOn", i, k, j), v.o2_hto[j], v.o2_bits[j], nk, 0.0, lin.big_m_hto,
                                 {i, k, "product"});

            // n' = n + h (on * inflow - O2 * n / c_out)
            const double kd = h / p.hto_discharge_const;
            std::vector<Term> row{{nn, 1.0}, {nk, -1.0}, {v.on, -h * p.hto_inflow}, {v.o2_rem, kd * lin.hto_ref}};
            for (int j = 0; j < lin.o2_bits; ++j) row.push_back({v.o2_hto[j], kd * std::ldexp(lin.o2_step, j)});
            m.add_constraint(nm("hto", i, k), row, RowSense::Equal, 0.0, {i, k, "hto"});
            m.add_constraint(nm("hto_cap", i, k + 1), {{nn, 1.0}}, RowSense::LessEqual, cap, {i, k + 1, "hto_cap"});
        }
    }
}

void add_symmetry_constraints(SchedulingModel& sm, const PlantScenario& s) {
    for (int i = 0; i + 1 < sm.fleet; ++i) {
        const auto& a = s.initial_states[i];
        const auto& b = s.initial_states[i + 1];
        if (a.op_state != b.op_state || a.temperature != b.temperature || a.hto_moles != b.hto_moles) continue;
        std::vector<Term> row;
        for (int k = 0; k < sm.horizon; ++k) {
            row.push_back({sm.steps[i][k].rate, 1.0});
            row.push_back({sm.steps[i + 1][k].rate, -1.0});
        }
        sm.milp.add_constraint("sym_" + std::to_string(i), row, RowSense::GreaterEqual, 0.0, {i, -1, "symmetry"});
    }
}

void set_objective(SchedulingModel& sm, const PlantScenario& s) {
    std::vector<Term> obj;
    const double nm3_per_step = units::kNm3PerMol * s.step_s;
    for (int i = 0; i < sm.fleet; ++i)
        for (int k = 0; k < sm.horizon; ++k) {
            const auto& v = sm.steps[i][k];
            obj.push_back({v.rate, s.h2_price * nm3_per_step});
            obj.push_back({v.p_total, -s.power_price[k] * s.step_s / 3600.0});
            obj.push_back({v.startup, -s.startup_cost});
        }
    sm.milp.set_objective(std::move(obj), ObjSense::Maximize);
}

double objective_linearization_bound(const PlantScenario& s, const ElectrolyzerParams& p, const HalfspaceSet& hs,
                                     const Linearization& lin) {
    double slope = 0.0;
    for (const auto& f : hs.facets) slope = std::max(slope, std::abs(f.b));
    const double drift = s.horizon * s.step_s / p.heat_capacity * lin.reaction_heat_error(p);
    const double value = s.h2_price * units::kNm3PerMol * s.step_s;
    return s.fleet * s.horizon * value * (hs.max_gap + slope * drift);
}

SchedulingModel build_model(const PlantScenario& s, const ElectrolyzerParams& p, const HalfspaceSet& hs,
                            const LinearizationOptions& lin_opts, const ModelOptions& opts) {
    const Linearization lin = resolve_linearization(p, lin_opts);
    SchedulingModel sm = declare_variables(s, p, lin, opts);
    add_state_constraints(sm, s, p);
    add_production_constraints(sm, hs, p);
    add_power_constraints(sm, s, p);
    add_thermal_constraints(sm, s, p);
    add_hto_constraints(sm, s, p);
    if (opts.symmetry_breaking) add_symmetry_constraints(sm, s);
    set_objective(sm, s);
    return sm;
}

SchedulingModel build_baseline_model(const PlantScenario& s, const ElectrolyzerParams& p, const HalfspaceSet& hs,
                                     double nominal_temp, const ModelOptions& opts) {
    s.validate();
    p.validate();
    if (nominal_temp < p.ambient_temp || nominal_temp > p.max_temp)
        throw std::invalid_argument("nominal_temp must lie in [ambient_temp, max_temp]");
    if (hs.facets.empty()) throw std::invalid_argument("build_baseline_model: empty half-space set");
    SchedulingModel sm;
    sm.baseline = true;
    sm.fleet = s.fleet;
    sm.horizon = s.horizon;
    sm.step_s = s.step_s;
    sm.options = opts;
    sm.milp.name = "p2h_baseline_" + s.name;
    auto& m = sm.milp;
    const double min_load = min_steady_load(p);
    const double rate_max = production_rate(p.rated_power, nominal_temp, p) * 1.05 + 1e-9;
    const bool grid = !opts.power_grid.empty();

    sm.steps.assign(s.fleet, std::vector<StepVars>(s.horizon));
    for (int i = 0; i < s.fleet; ++i)
        for (int k = 0; k < s.horizon; ++k) {
            auto& v = sm.steps[i][k];
            const Tag tag{i, k, "state"};
            v.on = m.add_binary(nm("on", i, k), tag);
            v.standby = m.add_variable(nm("sb", i, k), VarKind::Binary, 0.0, opts.allow_standby ? 1.0 : 0.0, tag);
            v.idle = m.add_binary(nm("idle", i, k), tag);
            v.startup = m.add_binary(nm("su", i, k), tag);
            v.shutdown = m.add_binary(nm("sd", i, k), tag);
            const Tag ptag{i, k, "power"};
            v.p_ele = m.add_variable(nm("pele", i, k), VarKind::Continuous, 0.0, p.rated_power, ptag);
            v.p_total = m.add_variable(nm("ptot", i, k), VarKind::Continuous, 0.0, p.rated_power + p.aux_power, ptag);
            v.rate = m.add_variable(nm("rate", i, k), VarKind::Continuous, 0.0, rate_max, {i, k, "production"});
            if (grid)
                for (std::size_t g = 0; g < opts.power_grid.size(); ++g)
                    v.grid_pick.push_back(m.add_binary(nm("g", i, k, static_cast<int>(g)), {i, k, "grid"}));
        }

    add_state_constraints(sm, s, p);
    const double to_nm3h = units::mol_s_to_nm3_h(1.0);
    for (int i = 0; i < s.fleet; ++i)
        for (int k = 0; k < s.horizon; ++k) {
            const auto& v = sm.steps[i][k];
            for (std::size_t j = 0; j < hs.facets.size(); ++j) {
                const auto& f = hs.facets[j];
                m.add_constraint(nm("facet", i, k, static_cast<int>(j)),
                                 {{v.rate, 1.0}, {v.p_ele, -f.a}, {v.on, -(f.b * nominal_temp + f.c)}},
                                 RowSense::LessEqual, 0.0, {i, k, "facet"});
            }
            m.add_constraint(nm("gate", i, k), {{v.rate, 1.0}, {v.on, -rate_max}}, RowSense::LessEqual, 0.0,
                             {i, k, "production"});
            m.add_constraint(nm("min_load", i, k), {{v.p_ele, 1.0}, {v.on, -min_load * p.rated_power}},
                             RowSense::GreaterEqual, 0.0, {i, k, "min_load"});
            if (k + 1 < s.horizon) {
                const int nxt = sm.steps[i][k + 1].rate;
                m.add_constraint(nm("rampup", i, k), {{nxt, to_nm3h}, {v.rate, -to_nm3h}}, RowSense::LessEqual,
                                 p.ramp_up, {i, k, "ramp"});
                m.add_constraint(nm("rampdn", i, k), {{nxt, to_nm3h}, {v.rate, -to_nm3h}}, RowSense::GreaterEqual,
                                 p.ramp_down, {i, k, "ramp"});
            }
        }
    add_power_constraints(sm, s, p);
    if (opts.symmetry_breaking) add_symmetry_constraints(sm, s);
    set_objective(sm, s);
    return sm;
}

bool legal_state_sequence(OpState initial, const std::vector<OpState>& states, int min_idle_steps) {
    // every idle run enclosed by active states must last at least min_idle_steps
    bool prev_active = is_active(initial);
    bool run_bounded = false;  // current idle run began right after an active state
    int run = 0;
    for (OpState s : states) {
        if (s == OpState::Idle) {
            if (run == 0) run_bounded = prev_active;
            ++run;
            prev_active = false;
        } else {
            if (run > 0 && run_bounded && run < min_idle_steps) return false;
            run = 0;
            prev_active = true;
        }
    }
    return true;
}

double step_profit(double production_mol_s, double total_power_mw, bool startup, double h2_price,
                   double power_price, double startup_cost, double step_s) {
    return h2_price * production_mol_s * units::kNm3PerMol * step_s - power_price * total_power_mw * step_s / 3600.0 -
           (startup ? startup_cost : 0.0);
}

}  // namespace p2h
