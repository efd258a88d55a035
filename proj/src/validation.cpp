#include "p2h/validation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace p2h {

// --- simulation --------------------------------------------------------------

namespace {

/// Heater power that brings the unit to `target` by the end of the step, in [0, max_heating_power].
double thermostat_heat(double temp, double react, double target, const ElectrolyzerParams& p, double h) {
    const double need = (target - temp) * p.heat_capacity / h - (react - p.dissipation_conductance * (temp - p.ambient_temp));
    return std::clamp(need, 0.0, p.max_heating_power);
}

}  // namespace

FleetTrace simulate_schedule(const Schedule& sch, const PlantScenario& s, const ElectrolyzerParams& p,
                             const SimulateOptions& opts) {
    sch.validate();
    if (sch.fleet != s.fleet || sch.horizon != s.horizon) throw std::invalid_argument("simulate_schedule: schedule does not match scenario");
    FleetTrace ft;
    ft.applied = sch;
    ft.units.resize(s.fleet);
    std::vector<ElectrolyzerState> state = s.initial_states;
    SimulationOptions so;
    so.substeps = opts.substeps;
    const double h = s.step_s;
    for (int i = 0; i < s.fleet; ++i) {
        ft.units[i].step_s = h;
        ft.units[i].steps.reserve(s.horizon);
    }

    for (int k = 0; k < s.horizon; ++k) {
        std::vector<ProfileStep> steps(s.fleet);
        for (int i = 0; i < s.fleet; ++i) {
            const auto& e = sch.entries[i][k];
            steps[i] = {e.state, {e.electrolytic_power, e.heating_power, e.cooling_power}};
        }
        if (opts.protective_control) {
            std::vector<double> planned(s.fleet, 0.0);
            double used = 0.0;
            for (int i = 0; i < s.fleet; ++i) {
                auto& st = steps[i];
                st.inputs.heating_power = st.inputs.cooling_power = 0.0;
                planned[i] = st.inputs.electrolytic_power;
                if (st.op_state == OpState::Production)
                    st.inputs.electrolytic_power =
                        std::min(st.inputs.electrolytic_power, max_power_at_voltage_cap(state[i].temperature, p) * (1 - 1e-9));
                used += total_power(st.op_state, st.inputs, p);
            }
            double headroom = std::max(0.0, s.available_power[k] - used);
            for (int i = 0; i < s.fleet; ++i) {
                auto& st = steps[i];
                if (!is_active(st.op_state)) continue;
                const double temp = state[i].temperature;
                const double cur = st.op_state == OpState::Production ? current_from_power(st.inputs.electrolytic_power, temp, p) : 0.0;
                const double react = st.op_state == OpState::Production ? reaction_heat(cur, temp, p) : 0.0;
                if (opts.protective_heating && planned[i] > st.inputs.electrolytic_power) {
                    // clamped: warm towards the temperature that admits the planned power
                    const double target = std::min(min_temperature_for_power(planned[i], p), p.max_temp - 0.01);
                    double heat = thermostat_heat(temp, react, target, p, h);
                    heat = std::max(0.0, std::min(heat, headroom * p.heating_eff));
                    headroom = std::max(0.0, headroom - heat / p.heating_eff);
                    st.inputs.heating_power = heat;
                }
                const double next = thermal_step(temp, react, {0.0, st.inputs.heating_power, 0.0}, p, h);
                const double limit = p.max_temp - 0.01;
                if (next > limit) {
                    double cool = std::min((next - limit) * p.heat_capacity / h, max_cooling(temp, p, st.op_state));
                    cool = std::max(0.0, std::min(cool, headroom * p.cooling_eff));
                    headroom = std::max(0.0, headroom - cool / p.cooling_eff);
                    st.inputs.cooling_power = cool;
                }
            }
        }
        for (int i = 0; i < s.fleet; ++i) {
            const TraceStep row = advance(state[i], steps[i], p, h, so);
            ft.units[i].steps.push_back(row);
            auto& e = ft.applied.entries[i][k];
            e.electrolytic_power = steps[i].inputs.electrolytic_power;
            e.heating_power = steps[i].inputs.heating_power;
            e.cooling_power = row.cooling_power;
            e.production = row.production;
        }
    }
    for (int i = 0; i < s.fleet; ++i) ft.units[i].final_state = state[i];
    if (opts.protective_control) ft.applied.method = sch.method + "+protective";
    return ft;
}

double realized_production_nm3(const FleetTrace& trace) {
    double nm3 = 0.0;
    for (const auto& u : trace.units)
        for (const auto& r : u.steps) nm3 += r.production * units::kNm3PerMol * u.step_s;
    return nm3;
}

double realized_profit(const FleetTrace& trace, const PlantScenario& s) {
    double profit = 0.0;
    for (std::size_t i = 0; i < trace.units.size(); ++i) {
        OpState prev = s.initial_states.at(i).op_state;
        const auto& u = trace.units[i];
        for (std::size_t k = 0; k < u.steps.size(); ++k) {
            const auto& r = u.steps[k];
            const bool startup = !is_active(prev) && is_active(r.op_state);
            profit += step_profit(r.production, r.total_power, startup, s.h2_price, s.power_price.at(k), s.startup_cost,
                                  u.step_s);
            prev = r.op_state;
        }
    }
    return profit;
}

// --- audit ---------------------------------------------------------------------

AuditReport audit(const Schedule& sch, const FleetTrace& trace, const PlantScenario& s, const ElectrolyzerParams& p,
                  const AuditTolerances& tol) {
    AuditReport rep;
    const int n = s.fleet, H = s.horizon;
    if (static_cast<int>(trace.units.size()) != n) throw std::invalid_argument("audit: trace does not match scenario");
    auto add = [&](const std::string& tag, int i, int k, double modeled, double simulated, double viol) {
        rep.findings.push_back({tag, i, k, modeled, simulated, viol});
    };
    const double cap_ratio = p.hto_limit;
    const double to_nm3h = units::mol_s_to_nm3_h(1.0);
    const Schedule& plan = trace.applied.fleet == n ? trace.applied : sch;
    const bool modeled = !sch.model_temperature.empty() && trace.applied.method == sch.method;

    for (int i = 0; i < n; ++i) {
        const auto& u = trace.units[i];
        if (static_cast<int>(u.steps.size()) != H) throw std::invalid_argument("audit: trace length does not match horizon");
        std::vector<OpState> states;
        OpState prev = s.initial_states[i].op_state;
        for (int k = 0; k <= H; ++k) {
            const double temp = k < H ? u.steps[k].temperature : u.final_state.temperature;
            const double hto = k < H ? u.steps[k].hto_moles : u.final_state.hto_moles;
            const double ratio = hto_ratio(hto, p);
            rep.max_temperature = std::max(rep.max_temperature, temp);
            rep.max_hto_ratio = std::max(rep.max_hto_ratio, ratio);
            const double model_t = modeled ? sch.model_temperature[i][k] : temp;
            const double model_r = modeled ? hto_ratio(sch.model_hto[i][k], p) : ratio;
            if (temp > p.max_temp + tol.temperature) add("temperature_cap", i, k, model_t, temp, temp - p.max_temp);
            if (ratio > cap_ratio + tol.hto_ratio) add("hto_cap", i, k, model_r, ratio, ratio - cap_ratio);
            if (modeled) {
                const double dt = std::abs(model_t - temp), dr = std::abs(model_r - ratio);
                rep.max_temperature_drift = std::max(rep.max_temperature_drift, dt);
                rep.max_hto_ratio_drift = std::max(rep.max_hto_ratio_drift, dr);
                if (dt > tol.model_temperature) add("model_drift_temperature", i, k, model_t, temp, dt);
                if (dr > tol.model_hto_ratio) add("model_drift_hto", i, k, model_r, ratio, dr);
            }
            if (k == H) break;

            const auto& r = u.steps[k];
            const auto& e = plan.entries[i][k];
            states.push_back(e.state);
            rep.max_voltage = std::max(rep.max_voltage, r.voltage);
            if (r.voltage > p.max_cell_voltage + tol.voltage)
                add("voltage_cap", i, k, p.max_cell_voltage, r.voltage, r.voltage - p.max_cell_voltage);
            if (e.electrolytic_power < 0 || e.heating_power < 0 || e.cooling_power < 0 || r.production < 0)
                add("non_negativity", i, k, 0.0, std::min({e.electrolytic_power, e.heating_power, e.cooling_power, r.production}),
                    -std::min({e.electrolytic_power, e.heating_power, e.cooling_power, r.production}));
            if (e.state != OpState::Production && (e.electrolytic_power > 0 || r.production > 0))
                add("state_gating", i, k, 0.0, std::max(e.electrolytic_power, r.production),
                    std::max(e.electrolytic_power, r.production));
            if (e.state == OpState::Idle && (e.heating_power > 0 || e.cooling_power > 0))
                add("state_gating", i, k, 0.0, e.heating_power + e.cooling_power, e.heating_power + e.cooling_power);
            if (e.heating_power > p.max_heating_power * (1 + 1e-9))
                add("heater_cap", i, k, p.max_heating_power, e.heating_power, e.heating_power - p.max_heating_power);
            const double cool_cap = max_cooling(r.temperature, p, e.state);
            if (e.cooling_power > cool_cap + 1e-9) add("cooler_cap", i, k, cool_cap, e.cooling_power, e.cooling_power - cool_cap);
            const bool su = !is_active(prev) && is_active(e.state), sd = is_active(prev) && !is_active(e.state);
            if (su != e.startup || sd != e.shutdown) add("state_machine", i, k, e.startup + 2.0 * e.shutdown, su + 2.0 * sd, 1.0);
            prev = e.state;
            if (k + 1 < H) {
                const double d = (u.steps[k + 1].production - r.production) * to_nm3h;
                if (d > p.ramp_up + tol.ramp) add("ramp", i, k, p.ramp_up, d, d - p.ramp_up);
                if (d < p.ramp_down - tol.ramp) add("ramp", i, k, p.ramp_down, d, p.ramp_down - d);
            }
        }
        // idle-gap legality, reported at the step that closes the short run
        for (int k = 0; k < H; ++k) {
            std::vector<OpState> prefix(states.begin(), states.begin() + k + 1);
            if (!legal_state_sequence(s.initial_states[i].op_state, prefix, p.min_idle_steps)) {
                add("idle_gap", i, k, p.min_idle_steps, 0.0, 1.0);
                break;
            }
        }
    }
    for (int k = 0; k < H; ++k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += trace.units[i].steps[k].total_power;
        if (total > s.available_power[k] + tol.power)
            add("fleet_cap", -1, k, s.available_power[k], total, total - s.available_power[k]);
    }
    rep.pass = rep.findings.empty();
    rep.realized_profit = realized_profit(trace, s);
    rep.production_nm3 = realized_production_nm3(trace);
    return rep;
}

std::string findings_to_jsonl(const AuditReport& r) {
    std::string out;
    for (const auto& f : r.findings) {
        nlohmann::ordered_json j;
        j["tag"] = f.tag;
        j["unit"] = f.unit;
        j["step"] = f.step;
        j["modeled"] = f.modeled;
        j["simulated"] = f.simulated;
        j["violation"] = f.violation;
        out += j.dump() + "\n";
    }
    return out;
}

// --- comparison ------------------------------------------------------------------

MethodOutcome run_method(const std::string& method, const PlantScenario& s, const ElectrolyzerParams& p,
                         const HalfspaceSet& hs, const SolverConfig& cfg, const CompareOptions& opts,
                         const Schedule* start_plan) {
    MethodOutcome out;
    out.method = method;
    const bool base = method == "baseline";
    if (!base && method != "proposed") throw std::invalid_argument("unknown method '" + method + "'");
    const double t_nom = opts.nominal_temp > 0 ? opts.nominal_temp : p.max_temp;
    const SchedulingModel sm = base ? build_baseline_model(s, p, hs, t_nom, opts.model)
                                    : build_model(s, p, hs, opts.linearization, opts.model);
    std::vector<double> start;
    if (!base && opts.warm_start && opts.model.power_grid.empty()) {
        MethodOutcome seed;
        if (!start_plan) {
            CompareOptions seed_opts = opts;
            seed_opts.warm_start = false;
            seed = run_method("baseline", s, p, hs, cfg, seed_opts);
            if (seed.solved) start_plan = &seed.schedule;
        }
        auto consider = [&](const Schedule& plan, const char* source) {
            const ModelStart ms = complete_assignment(plan, sm, s, p, hs);
            if (!check_feasibility(sm.milp, ms.values).empty()) return;
            const double obj = objective_value(sm.milp, ms.values);
            if (start.empty() || obj > out.start_objective) {
                start = ms.values;
                out.start_objective = obj;
                out.start_source = source;
            }
        };
        if (start_plan) consider(*start_plan, "baseline");
        if (opts.relaxation_start) {
            const SolveResult lp = solve(relaxation(sm.milp), cfg);
            out.relaxation_seconds = lp.wall_time;
            if (has_solution(lp.status)) {
                out.relaxation_objective = lp.objective;
                for (double threshold : {0.5, 0.3, 0.1, 0.05})
                    consider(round_relaxation(sm, lp.values, s, p, threshold), "relaxation");
            }
        }
    }
    const SolveResult res = solve(sm.milp, cfg, start);
    out.status = res.status;
    out.gap = res.gap;
    out.model_objective = res.objective;
    out.solve_seconds = res.wall_time;
    out.message = res.message;
    if (!has_solution(res.status)) return out;
    out.schedule = extract_schedule(res, sm, s);
    SimulateOptions so;
    so.substeps = opts.substeps;
    so.protective_control = base;
    out.trace = simulate_schedule(out.schedule, s, p, so);
    out.audit = audit(out.schedule, out.trace, s, p, opts.tolerances);
    out.solved = true;
    return out;
}

namespace {

double pct(double a, double b) {
    if (b == 0.0) return a == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    return 100.0 * (a - b) / std::abs(b);
}

}  // namespace

ComparisonSummary compare(const std::vector<PlantScenario>& scenarios, const ElectrolyzerParams& p,
                          const HalfspaceSet& hs, const SolverConfig& cfg, const CompareOptions& opts) {
    if (scenarios.empty()) throw std::invalid_argument("compare: no scenarios");
    ComparisonSummary sum;
    sum.scenarios.resize(scenarios.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::string first_error;
    auto worker = [&]() {
        for (std::size_t idx; (idx = next++) < scenarios.size();) {
            try {
                auto& row = sum.scenarios[idx];
                row.scenario = scenarios[idx].name;
                row.baseline = run_method("baseline", scenarios[idx], p, hs, cfg, opts);
                row.proposed = run_method("proposed", scenarios[idx], p, hs, cfg, opts,
                                          row.baseline.solved ? &row.baseline.schedule : nullptr);
                row.valid = row.proposed.solved && row.baseline.solved;
                if (row.valid) {
                    row.delta_production_pct = pct(row.proposed.audit.production_nm3, row.baseline.audit.production_nm3);
                    row.delta_profit_pct = pct(row.proposed.audit.realized_profit, row.baseline.audit.realized_profit);
                    row.valid = std::isfinite(row.delta_production_pct) && std::isfinite(row.delta_profit_pct);
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (first_error.empty()) first_error = scenarios[idx].name + ": " + e.what();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(scenarios.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (!first_error.empty()) throw std::runtime_error("compare: " + first_error);

    int used = 0;
    for (const auto& r : sum.scenarios) {
        if (!r.valid) {
            ++sum.excluded;
            sum.warnings.push_back("scenario '" + r.scenario + "' excluded from means: proposed " +
                                   to_string(r.proposed.status) + ", baseline " + to_string(r.baseline.status));
            continue;
        }
        sum.mean_delta_production_pct += r.delta_production_pct;
        sum.mean_delta_profit_pct += r.delta_profit_pct;
        ++used;
    }
    if (used > 0) {
        sum.mean_delta_production_pct /= used;
        sum.mean_delta_profit_pct /= used;
    }
    return sum;
}

namespace {

std::string csv_num(double v, int prec = 6) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

}  // namespace

std::string comparison_csv(const ComparisonSummary& c) {
    std::ostringstream os;
    os << "scenario,method,production_Nm3,profit_usd,delta_production_pct,delta_profit_pct,solver_status,gap\n";
    double prod[2] = {0, 0}, profit[2] = {0, 0}, gap = 0.0;
    int used = 0;
    for (const auto& r : c.scenarios) {
        const MethodOutcome* m[2] = {&r.proposed, &r.baseline};
        for (int j = 0; j < 2; ++j) {
            os << r.scenario << "," << m[j]->method << ",";
            if (m[j]->solved)
                os << csv_num(m[j]->audit.production_nm3, 3) << "," << csv_num(m[j]->audit.realized_profit, 3);
            else
                os << ",";
            os << ",";
            if (j == 0 && r.valid) os << csv_num(r.delta_production_pct, 4) << "," << csv_num(r.delta_profit_pct, 4);
            else os << ",";
            os << "," << to_string(m[j]->status) << "," << csv_num(m[j]->gap, 6) << "\n";
        }
        if (r.valid) {
            ++used;
            prod[0] += r.proposed.audit.production_nm3;
            prod[1] += r.baseline.audit.production_nm3;
            profit[0] += r.proposed.audit.realized_profit;
            profit[1] += r.baseline.audit.realized_profit;
            gap = std::max({gap, std::isnan(r.proposed.gap) ? 0.0 : r.proposed.gap, std::isnan(r.baseline.gap) ? 0.0 : r.baseline.gap});
        }
    }
    if (c.scenarios.size() > 1 && used > 0) {
        os << "mean,proposed," << csv_num(prod[0] / used, 3) << "," << csv_num(profit[0] / used, 3) << ","
           << csv_num(c.mean_delta_production_pct, 4) << "," << csv_num(c.mean_delta_profit_pct, 4) << ",-,"
           << csv_num(gap, 6) << "\n";
        os << "mean,baseline," << csv_num(prod[1] / used, 3) << "," << csv_num(profit[1] / used, 3) << ",,,-,"
           << csv_num(gap, 6) << "\n";
    }
    return os.str();
}

// --- impurity curves ---------------------------------------------------------------

HtoCurve hto_curve(const std::vector<double>& loads, double hours, const ElectrolyzerParams& p, double step_s) {
    if (loads.empty()) throw std::invalid_argument("hto_curve: no loads");
    if (!(hours > 0) || !(step_s > 0)) throw std::invalid_argument("hto_curve: hours and step_s must be > 0");
    p.validate();
    HtoCurve c;
    c.loads = loads;
    const int n = static_cast<int>(std::ceil(hours * 3600.0 / step_s - 1e-9));
    for (int k = 0; k <= n; ++k) c.time_h.push_back(k * step_s / 3600.0);
    for (double load : loads) {
        if (!(load > 0 && load <= 1)) throw std::invalid_argument("hto_curve: loads must lie in (0, 1]");
        const double o2 = 0.5 * production_rate(load * p.rated_power, p.max_temp, p);
        ElectrolyzerState st{p.max_temp, 0.0, OpState::Production};
        std::vector<double> r{hto_ratio(st.hto_moles, p)};
        for (int k = 0; k < n; ++k) {
            st.hto_moles = hto_step(st, o2, true, p, step_s);
            r.push_back(hto_ratio(st.hto_moles, p));
        }
        c.ratio.push_back(std::move(r));
    }
    return c;
}

std::string hto_curve_csv(const HtoCurve& c) {
    std::string out = "time_h";
    char buf[64];
    for (double l : c.loads) {
        std::snprintf(buf, sizeof buf, ",load_%.4g", l);
        out += buf;
    }
    out += "\n";
    for (std::size_t k = 0; k < c.time_h.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.6g", c.time_h[k]);
        out += buf;
        for (const auto& r : c.ratio) {
            std::snprintf(buf, sizeof buf, ",%.10g", r[k]);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

// --- oracle ------------------------------------------------------------------------

namespace {

struct UnitCursor {
    ElectrolyzerState state;
    double last_rate = -1.0;  // < 0 before the first step
    int idle_run = 0;
    bool run_bounded = false;
};

}  // namespace

OracleResult oracle_best(const PlantScenario& s, const ElectrolyzerParams& p, const std::vector<double>& power_grid,
                         const OracleLimits& limits) {
    s.validate();
    p.validate();
    if (s.fleet > limits.max_units || s.horizon > limits.max_steps || static_cast<int>(power_grid.size()) > limits.max_grid ||
        power_grid.empty())
        throw std::invalid_argument("oracle_best: instance exceeds the enumeration bound (units <= " +
                                    std::to_string(limits.max_units) + ", steps <= " + std::to_string(limits.max_steps) +
                                    ", 1..." + std::to_string(limits.max_grid) + " grid levels)");
    for (double g : power_grid)
        if (!(g >= 0 && g <= p.rated_power)) throw std::invalid_argument("oracle_best: grid level outside [0, rated_power]");

    const int n = s.fleet, H = s.horizon, G = static_cast<int>(power_grid.size());
    const int n_opt = 2 + G;  // 0 idle, 1 standby, 2.. grid levels
    const double h = s.step_s;
    const double to_nm3h = units::mol_s_to_nm3_h(1.0);

    // optimistic value of one unit-step: hottest production curve, no fleet limit
    std::vector<double> step_bound(H, 0.0), suffix(H + 1, 0.0);
    for (int k = 0; k < H; ++k) {
        double best = 0.0;
        for (double g : power_grid)
            best = std::max(best, step_profit(production_rate(g, p.max_temp, p), g + p.aux_power, false, s.h2_price,
                                              s.power_price[k], 0.0, h));
        step_bound[k] = best;
    }
    for (int k = H - 1; k >= 0; --k) suffix[k] = suffix[k + 1] + n * step_bound[k];

    std::vector<UnitCursor> cur(n);
    for (int i = 0; i < n; ++i) cur[i].state = s.initial_states[i];
    std::vector<int> choice(static_cast<std::size_t>(n * H), 0);  // [unit * H + step]
    std::vector<int> best_choice;
    double best_val = -std::numeric_limits<double>::infinity();
    long long nodes = 0;
    const double eps = 1e-9;

    auto lex_less = [&](const std::vector<int>& a, const std::vector<int>& b) { return a < b; };

    // depth = k * n + i
    std::function<void(int, int, double, double)> dfs = [&](int k, int i, double value, double fleet_power) {
        if (k == H) {
            const double tie = eps * (1 + std::abs(best_val));
            const bool better = best_choice.empty() || value > best_val + tie;
            const bool tied = !better && value >= best_val - tie && lex_less(choice, best_choice);
            if (better || tied) {
                best_val = value;
                best_choice = choice;
            }
            return;
        }
        const double bound = value + suffix[k + 1] + (n - i) * step_bound[k];
        if (bound < best_val - eps * (1 + std::abs(best_val))) return;
        ++nodes;

        const UnitCursor saved = cur[i];
        // try production levels from high to low first; ties resolved at the leaves
        for (int o = n_opt - 1; o >= 0; --o) {
            const OpState st = o == 0 ? OpState::Idle : (o == 1 ? OpState::Standby : OpState::Production);
            const double pele = o >= 2 ? power_grid[o - 2] : 0.0;
            UnitCursor c = saved;
            const bool prev_active = is_active(c.state.op_state);
            if (is_active(st) && c.idle_run > 0 && c.run_bounded && c.idle_run < p.min_idle_steps) continue;
            double rate = 0.0;
            if (st == OpState::Production) {
                const double I = current_from_power(pele, c.state.temperature, p);
                if (cell_voltage(I, c.state.temperature, p) > p.max_cell_voltage) continue;
                rate = production_from_current(I, p);
            }
            if (c.last_rate >= 0) {
                const double d = (rate - c.last_rate) * to_nm3h;
                if (d > p.ramp_up || d < p.ramp_down) continue;
            }
            const StepInputs in{pele, 0.0, 0.0};
            const double ptot = total_power(st, in, p);
            if (fleet_power + ptot > s.available_power[k] + 1e-12) continue;
            ElectrolyzerState next = c.state;
            advance(next, {st, in}, p, h);
            if (next.temperature > p.max_temp) continue;
            if (hto_ratio(next.hto_moles, p) > p.hto_limit) continue;

            const bool startup = !prev_active && is_active(st);
            const double v = step_profit(rate, ptot, startup, s.h2_price, s.power_price[k], s.startup_cost, h);
            if (st == OpState::Idle) {
                if (c.idle_run == 0) c.run_bounded = prev_active;
                ++c.idle_run;
            } else {
                c.idle_run = 0;
                c.run_bounded = false;
            }
            c.state = next;
            c.last_rate = rate;
            cur[i] = c;
            choice[static_cast<std::size_t>(i * H + k)] = o;
            if (i + 1 < n)
                dfs(k, i + 1, value + v, fleet_power + ptot);
            else
                dfs(k + 1, 0, value + v, 0.0);
        }
        cur[i] = saved;
    };
    dfs(0, 0, 0.0, 0.0);
    if (best_choice.empty()) throw std::runtime_error("oracle_best: no feasible plan (initial state breaks a limit)");

    OracleResult res;
    res.objective = best_val;
    res.nodes = nodes;
    Schedule& sch = res.schedule;
    sch.method = "oracle";
    sch.fleet = n;
    sch.horizon = H;
    sch.step_s = h;
    sch.entries.assign(n, std::vector<ScheduleEntry>(H));
    for (int i = 0; i < n; ++i) {
        ElectrolyzerState st = s.initial_states[i];
        for (int k = 0; k < H; ++k) {
            const int o = best_choice[static_cast<std::size_t>(i * H + k)];
            auto& e = sch.entries[i][k];
            e.state = o == 0 ? OpState::Idle : (o == 1 ? OpState::Standby : OpState::Production);
            e.electrolytic_power = o >= 2 ? power_grid[o - 2] : 0.0;
            e.startup = !is_active(st.op_state) && is_active(e.state);
            e.shutdown = is_active(st.op_state) && !is_active(e.state);
            e.production = e.state == OpState::Production ? production_rate(e.electrolytic_power, st.temperature, p) : 0.0;
            advance(st, {e.state, {e.electrolytic_power, 0.0, 0.0}}, p, h);
        }
    }
    return res;
}

}  // namespace p2h
