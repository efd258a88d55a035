#include <algorithm>
#include <cmath>
#include <numeric>

#include "p2h/schedule.hpp"

namespace p2h {

namespace {

struct StepEval {
    OpState state = OpState::Idle;
    double planned_heat = 0;
    double pele = 0, heat = 0, cool = 0, ptot = 0, rate = 0, current = 0;
    double t_next = 0, n_next = 0;
    int current_q = 0, o2_q = 0;
    double current_rem = 0, o2_rem = 0;
};

double envelope(const HalfspaceSet& hs, double pele, double temp) {
    double e = hs.facets.front().eval(pele, temp);
    for (const auto& f : hs.facets) e = std::min(e, f.eval(pele, temp));
    return e;
}

/// Splits x into q * step + r with r in [0, step] and q < 2^bits.
void expand(double x, double step, int bits, int& q, double& r) {
    const int q_max = (1 << bits) - 1;
    q = std::min(q_max, static_cast<int>(std::floor(x / step)));
    q = std::max(q, 0);
    r = std::clamp(x - q * step, 0.0, step);
}

class StepModel {
public:
    StepModel(const SchedulingModel& sm, const PlantScenario& s, const ElectrolyzerParams& p, const HalfspaceSet& hs)
        : lin_(sm.lin), p_(p), hs_(hs), h_(s.step_s), kq_(s.step_s / p.heat_capacity), n6_(p.n_cells * 1e-6) {}

    /// Model step without heater or cooler.
    StepEval eval(OpState st, double pele, double temp, double hto) const {
        StepEval e;
        e.state = st;
        if (st == OpState::Production) {
            e.pele = std::min(pele, max_power_at_voltage_cap(temp, p_) * (1 - 1e-9));
            e.pele = std::max(e.pele, 0.0);
            const double faraday = production_from_current(1.0, p_);
            // the model credits the envelope, limited by the current the voltage row admits
            const double i_cap = (p_.max_cell_voltage - p_.a0 - p_.a1 * temp) / p_.a2;
            e.rate = std::min(envelope(hs_, e.pele, temp), faraday * i_cap) * (1 - 1e-9);
            e.rate = std::clamp(e.rate, 0.0, faraday * lin_.current_max);
            e.current = e.rate / faraday;
        }
        expand(e.current, lin_.current_step, lin_.current_bits, e.current_q, e.current_rem);
        expand(0.5 * e.rate, lin_.o2_step, lin_.o2_bits, e.o2_q, e.o2_rem);
        double react = (p_.a0 - p_.thermal_neutral_voltage) * e.current +
                       (p_.a1 * lin_.temperature_ref + p_.a2 * lin_.current_ref) * e.current_rem;
        for (int j = 0; j < lin_.current_bits; ++j)
            if (e.current_q >> j & 1) react += std::ldexp(lin_.current_step, j) * (p_.a1 * temp + p_.a2 * e.current);
        e.t_next = temp + kq_ * (n6_ * react - p_.dissipation_conductance * (temp - p_.ambient_temp));
        double out = lin_.hto_ref * e.o2_rem;
        for (int j = 0; j < lin_.o2_bits; ++j)
            if (e.o2_q >> j & 1) out += std::ldexp(lin_.o2_step, j) * hto;
        e.n_next = hto + h_ * ((st == OpState::Production ? p_.hto_inflow : 0.0) - out / p_.hto_discharge_const);
        e.ptot = e.pele + (is_active(st) ? p_.aux_power : 0.0);
        return e;
    }

    /// Adds the planned heater power and any cooling needed, within `headroom`; false if
    /// the temperature cap cannot be held.
    bool condition(StepEval& e, double temp, double headroom) const {
        if (!is_active(e.state)) return e.t_next <= p_.max_temp;
        double heat = std::clamp(std::min(e.planned_heat, headroom * p_.heating_eff), 0.0, p_.max_heating_power);
        e.heat = heat;
        e.t_next += kq_ * heat;
        e.ptot += heat / p_.heating_eff;
        headroom = std::max(0.0, headroom - heat / p_.heating_eff);
        if (e.t_next > p_.max_temp - 1e-6) {
            const double need = (e.t_next - (p_.max_temp - 1e-6)) / kq_;
            const double cap = std::min(p_.cooling_conductance * (temp - p_.coolant_temp), headroom * p_.cooling_eff);
            if (need > cap) return false;
            e.cool = need;
            e.t_next -= kq_ * need;
            e.ptot += need / p_.cooling_eff;
        }
        return true;
    }

    double hto_cap() const { return p_.hto_limit * p_.o2_holdup; }

private:
    const Linearization& lin_;
    const ElectrolyzerParams& p_;
    const HalfspaceSet& hs_;
    double h_, kq_, n6_;
};

bool same_start(const ElectrolyzerState& a, const ElectrolyzerState& b) {
    return a.op_state == b.op_state && a.temperature == b.temperature && a.hto_moles == b.hto_moles;
}

}  // namespace

ModelStart complete_assignment(const Schedule& plan, const SchedulingModel& sm, const PlantScenario& s,
                               const ElectrolyzerParams& p, const HalfspaceSet& hs) {
    if (sm.baseline || sm.temperature.empty()) throw std::invalid_argument("complete_assignment: needs the thermal model");
    if (!sm.options.power_grid.empty()) throw std::invalid_argument("complete_assignment: gridded models are not supported");
    if (hs.facets.empty()) throw std::invalid_argument("complete_assignment: empty half-space set");
    plan.validate();
    if (plan.fleet != sm.fleet || plan.horizon != sm.horizon) throw std::invalid_argument("complete_assignment: plan does not match model");

    const int n = sm.fleet, H = sm.horizon;
    const StepModel model(sm, s, p, hs);
    ModelStart out;
    out.schedule = plan;
    out.schedule.method = "start";
    std::vector<std::vector<StepEval>> ev(n, std::vector<StepEval>(H));
    std::vector<double> temp(n), hto(n);
    for (int i = 0; i < n; ++i) {
        temp[i] = s.initial_states[i].temperature;
        hto[i] = s.initial_states[i].hto_moles;
    }
    std::vector<std::vector<double>> t_traj(n), n_traj(n);
    for (int i = 0; i < n; ++i) {
        t_traj[i].push_back(temp[i]);
        n_traj[i].push_back(hto[i]);
    }

    for (int k = 0; k < H; ++k) {
        std::vector<StepEval> step(n);
        double used = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto& e = plan.entries[i][k];
            step[i] = model.eval(e.state, e.electrolytic_power, temp[i], hto[i]);
            step[i].planned_heat = e.heating_power;
            used += step[i].ptot;
        }
        // power the voltage cap takes from one unit goes to producing units with room left
        double spare = 0.0;
        for (int i = 0; i < n; ++i)
            if (step[i].state == OpState::Production)
                spare += std::max(0.0, plan.entries[i][k].electrolytic_power - step[i].pele);
        for (int round = 0; round < n && spare > 1e-9; ++round) {
            std::vector<int> open;
            for (int i = 0; i < n; ++i)
                if (step[i].state == OpState::Production &&
                    step[i].pele < std::min(p.rated_power, max_power_at_voltage_cap(temp[i], p)) * (1 - 1e-6))
                    open.push_back(i);
            if (open.empty()) break;
            const double share = spare / static_cast<double>(open.size());
            for (int i : open) {
                const double before = step[i].pele;
                const double heat = step[i].planned_heat;
                used -= step[i].ptot;
                step[i] = model.eval(OpState::Production, std::min(before + share, p.rated_power), temp[i], hto[i]);
                step[i].planned_heat = heat;
                used += step[i].ptot;
                spare -= step[i].pele - before;
            }
        }
        // thin out electrolytic power when the plan alone breaks the fleet cap
        if (used > s.available_power[k]) {
            double ele = 0.0;
            for (const auto& e : step) ele += e.pele;
            const double scale = ele > 0 ? std::max(0.0, 1.0 - (used - s.available_power[k]) / ele) * (1 - 1e-9) : 0.0;
            used = 0.0;
            for (int i = 0; i < n; ++i) {
                if (step[i].state == OpState::Production) {
                    const double heat = step[i].planned_heat;
                    step[i] = model.eval(OpState::Production, step[i].pele * scale, temp[i], hto[i]);
                    step[i].planned_heat = heat;
                    ++out.repairs;
                }
                used += step[i].ptot;
            }
        }
        for (int i = 0; i < n; ++i) {
            double others = 0.0;
            for (int u = 0; u < i; ++u) others += ev[u][k].ptot;
            for (int u = i + 1; u < n; ++u) others += step[u].ptot;
            const double avail = s.available_power[k] - others;
            auto fits = [&](StepEval& c) {
                if (!model.condition(c, temp[i], std::max(0.0, avail - c.ptot))) return false;
                return c.n_next <= model.hto_cap() && c.ptot <= avail + 1e-9;
            };
            StepEval e = step[i];
            double pele = e.pele;
            int tries = 0;
            while (!fits(e) && e.state == OpState::Production && tries < 60) {
                pele *= 0.95;
                e = model.eval(OpState::Production, pele, temp[i], hto[i]);
                e.planned_heat = step[i].planned_heat;
                ++tries;
            }
            if (tries > 0) ++out.repairs;
            if (!(e.n_next <= model.hto_cap()) || e.t_next > p.max_temp || e.ptot > avail + 1e-9) {
                e = model.eval(OpState::Standby, 0.0, temp[i], hto[i]);
                e.planned_heat = step[i].planned_heat;
                model.condition(e, temp[i], std::max(0.0, avail - e.ptot));
                ++out.repairs;
            }
            ev[i][k] = e;
            temp[i] = e.t_next;
            hto[i] = e.n_next;
            t_traj[i].push_back(temp[i]);
            n_traj[i].push_back(hto[i]);
        }
    }

    // identical neighbours: order by total production, as the symmetry rows require
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> total(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < H; ++k) total[i] += ev[i][k].rate;
    for (int a = 0; a < n;) {
        int b = a + 1;
        while (b < n && same_start(s.initial_states[b], s.initial_states[a])) ++b;
        std::stable_sort(order.begin() + a, order.begin() + b, [&](int x, int y) { return total[x] > total[y]; });
        a = b;
    }

    auto& x = out.values;
    x.assign(sm.milp.variables().size(), 0.0);
    for (int slot = 0; slot < n; ++slot) {
        const int i = order[slot];
        OpState prev = s.initial_states[slot].op_state;
        for (int k = 0; k <= H; ++k) {
            x[sm.temperature[slot][k]] = t_traj[i][k];
            x[sm.hto[slot][k]] = n_traj[i][k];
        }
        for (int k = 0; k < H; ++k) {
            const auto& e = ev[i][k];
            const auto& v = sm.steps[slot][k];
            const double T = t_traj[i][k], nk = n_traj[i][k];
            const double on = e.state == OpState::Production, sb = e.state == OpState::Standby, idle = e.state == OpState::Idle;
            x[v.on] = on;
            x[v.standby] = sb;
            x[v.idle] = idle;
            x[v.startup] = !is_active(prev) && is_active(e.state);
            x[v.shutdown] = is_active(prev) && !is_active(e.state);
            prev = e.state;
            x[v.p_ele] = e.pele;
            x[v.p_heat] = e.heat;
            x[v.p_cool] = e.cool;
            x[v.p_total] = e.ptot;
            x[v.rate] = e.rate;
            x[v.current] = e.current;
            x[v.current_rem] = e.current_rem;
            x[v.on_temp] = on * T;
            x[v.idle_temp] = idle * T;
            for (int j = 0; j < sm.lin.current_bits; ++j) {
                const double b = e.current_q >> j & 1;
                x[v.current_bits[j]] = b;
                x[v.bit_temp[j]] = b * T;
                x[v.bit_current[j]] = b * e.current;
            }
            for (int j = 0; j < sm.lin.o2_bits; ++j) {
                const double b = e.o2_q >> j & 1;
                x[v.o2_bits[j]] = b;
                x[v.o2_hto[j]] = b * nk;
            }
            x[v.o2_rem] = e.o2_rem;

            auto& se = out.schedule.entries[slot][k];
            se.state = e.state;
            se.startup = x[v.startup] > 0.5;
            se.shutdown = x[v.shutdown] > 0.5;
            se.electrolytic_power = e.pele;
            se.heating_power = e.heat;
            se.cooling_power = e.cool;
            se.production = e.rate;
        }
    }
    out.schedule.model_temperature.assign(n, {});
    out.schedule.model_hto.assign(n, {});
    for (int slot = 0; slot < n; ++slot) {
        out.schedule.model_temperature[slot] = t_traj[order[slot]];
        out.schedule.model_hto[slot] = n_traj[order[slot]];
    }
    return out;
}

Schedule round_relaxation(const SchedulingModel& sm, const std::vector<double>& x, const PlantScenario& s,
                          const ElectrolyzerParams& p, double threshold) {
    if (!(threshold > 0 && threshold < 1)) throw std::invalid_argument("round_relaxation: threshold must lie in (0, 1)");
    if (x.size() != sm.milp.variables().size()) throw std::invalid_argument("round_relaxation: assignment size mismatch");
    const int n = sm.fleet, H = sm.horizon;
    Schedule out = idle_schedule(s);
    out.method = "relaxation";
    std::vector<OpState> prev(n);
    for (int i = 0; i < n; ++i) prev[i] = s.initial_states[i].op_state;
    for (int k = 0; k < H; ++k) {
        double on_sum = 0.0, pele = 0.0, heat = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto& v = sm.steps[i][k];
            on_sum += x[v.on];
            pele += x[v.p_ele];
            heat += x[v.p_heat];
        }
        // the fleet-wide count is what the relaxation pins down; which units is arbitrary
        // among identical ones, so units already producing keep going first
        const int n_on = std::clamp(static_cast<int>(std::ceil(on_sum - threshold)), 0, n);
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            const bool pa = prev[a] == OpState::Production, pb = prev[b] == OpState::Production;
            if (pa != pb) return pa;
            return x[sm.steps[a][k].on] > x[sm.steps[b][k].on];
        });
        int active = 0;
        for (int r = 0; r < n; ++r) {
            const int i = order[r];
            const auto& v = sm.steps[i][k];
            auto& e = out.entries[i][k];
            if (r < n_on)
                e.state = OpState::Production;
            else if (x[v.on] + x[v.standby] >= 0.5 || (prev[i] != OpState::Idle && x[v.idle] < 0.5))
                e.state = OpState::Standby;
            else
                e.state = OpState::Idle;
            if (e.state == OpState::Production) e.electrolytic_power = std::min(p.rated_power, pele / n_on);
            active += is_active(e.state);
        }
        for (int i = 0; i < n; ++i) {
            auto& e = out.entries[i][k];
            if (is_active(e.state)) e.heating_power = std::min(p.max_heating_power, heat / active);
            prev[i] = e.state;
        }
    }
    for (int i = 0; i < n; ++i) {
        // an idle run shorter than the minimum gap after a shutdown is bridged with Standby
        OpState before = s.initial_states[i].op_state;
        for (int k = 0; k < H;) {
            if (out.entries[i][k].state != OpState::Idle) {
                before = out.entries[i][k++].state;
                continue;
            }
            int end = k;
            while (end < H && out.entries[i][end].state == OpState::Idle) ++end;
            if (is_active(before) && end < H && end - k < p.min_idle_steps)
                for (int j = k; j < end; ++j) out.entries[i][j].state = OpState::Standby;
            before = out.entries[i][end - 1].state;
            k = end;
        }
        before = s.initial_states[i].op_state;
        for (int k = 0; k < H; ++k) {
            auto& e = out.entries[i][k];
            e.startup = !is_active(before) && is_active(e.state);
            e.shutdown = is_active(before) && !is_active(e.state);
            before = e.state;
        }
    }
    return out;
}

}  // namespace p2h
