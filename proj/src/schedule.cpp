#include "p2h/schedule.hpp"

#include <cmath>
#include <string>

#include <json.hpp>

namespace p2h {

namespace {

std::string where(int i, int k) { return "unit " + std::to_string(i) + ", step " + std::to_string(k); }

}  // namespace

void Schedule::validate() const {
    if (fleet < 1 || horizon < 1) throw std::invalid_argument("schedule: empty fleet or horizon");
    if (static_cast<int>(entries.size()) != fleet) throw std::invalid_argument("schedule: entries do not match fleet");
    for (int i = 0; i < fleet; ++i) {
        if (static_cast<int>(entries[i].size()) != horizon)
            throw std::invalid_argument("schedule: unit " + std::to_string(i) + " does not cover the horizon");
        for (int k = 0; k < horizon; ++k) {
            const auto& e = entries[i][k];
            if (e.electrolytic_power < 0 || e.heating_power < 0 || e.cooling_power < 0 || e.production < 0)
                throw std::invalid_argument("schedule: negative power or production at " + where(i, k));
            if (e.state != OpState::Production && (e.electrolytic_power > 0 || e.production > 0))
                throw std::invalid_argument("schedule: production outside the Production state at " + where(i, k));
            if (e.state == OpState::Idle && (e.heating_power > 0 || e.cooling_power > 0))
                throw std::invalid_argument("schedule: heating or cooling while idle at " + where(i, k));
        }
    }
    auto check_traj = [&](const std::vector<std::vector<double>>& t, const char* what) {
        if (t.empty()) return;
        if (static_cast<int>(t.size()) != fleet) throw std::invalid_argument(std::string("schedule: ") + what + " size");
        for (const auto& u : t)
            if (static_cast<int>(u.size()) != horizon + 1)
                throw std::invalid_argument(std::string("schedule: ") + what + " must have horizon + 1 points");
    };
    check_traj(model_temperature, "model_temperature");
    check_traj(model_hto, "model_hto");
}

Schedule idle_schedule(const PlantScenario& s) {
    Schedule sch;
    sch.method = "idle";
    sch.fleet = s.fleet;
    sch.horizon = s.horizon;
    sch.step_s = s.step_s;
    sch.entries.assign(s.fleet, std::vector<ScheduleEntry>(s.horizon));
    for (int i = 0; i < s.fleet; ++i)
        if (is_active(s.initial_states[i].op_state)) sch.entries[i][0].shutdown = true;
    return sch;
}

ExtractionError::ExtractionError(int unit, int step, const std::string& what)
    : std::runtime_error("extract_schedule: " + what + " at " + where(unit, step)), unit_(unit), step_(step) {}

Schedule extract_schedule(const SolveResult& result, const SchedulingModel& model, const PlantScenario& s) {
    if (!has_solution(result.status))
        throw std::invalid_argument(std::string("extract_schedule: solve status is ") + to_string(result.status));
    return extract_schedule(result.values, model, s);
}

Schedule extract_schedule(const std::vector<double>& x, const SchedulingModel& sm, const PlantScenario& s) {
    if (x.size() != sm.milp.variables().size())
        throw std::invalid_argument("extract_schedule: assignment does not match the model");
    Schedule sch;
    sch.method = sm.baseline ? "baseline" : "proposed";
    sch.fleet = sm.fleet;
    sch.horizon = sm.horizon;
    sch.step_s = sm.step_s;
    sch.entries.assign(sm.fleet, std::vector<ScheduleEntry>(sm.horizon));
    auto val = [&](int id) { return id >= 0 ? x[static_cast<std::size_t>(id)] : 0.0; };
    auto nonneg = [](double v) { return v < 0 ? 0.0 : v; };
    constexpr double kOneHotTol = 1e-4;
    constexpr double kZeroPower = 1e-6;

    for (int i = 0; i < sm.fleet; ++i) {
        OpState prev = s.initial_states[i].op_state;
        for (int k = 0; k < sm.horizon; ++k) {
            const auto& v = sm.at(i, k);
            const double on = val(v.on), sb = val(v.standby), idle = val(v.idle);
            if (std::abs(on + sb + idle - 1.0) > kOneHotTol) throw ExtractionError(i, k, "state indicators do not sum to one");
            const int r_on = on >= 0.5, r_sb = sb >= 0.5, r_idle = idle >= 0.5;
            if (r_on + r_sb + r_idle != 1) throw ExtractionError(i, k, "state indicators do not round to a single state");

            auto& e = sch.entries[i][k];
            e.state = r_on ? OpState::Production : (r_sb ? OpState::Standby : OpState::Idle);
            e.electrolytic_power = nonneg(val(v.p_ele));
            e.heating_power = nonneg(val(v.p_heat));
            e.cooling_power = nonneg(val(v.p_cool));
            e.production = nonneg(val(v.rate));
            if (e.state == OpState::Production && e.electrolytic_power <= kZeroPower && e.production <= 1e-9)
                e.state = OpState::Standby;
            if (e.state != OpState::Production) e.electrolytic_power = e.production = 0.0;
            if (e.state == OpState::Idle) e.heating_power = e.cooling_power = 0.0;
            e.startup = !is_active(prev) && is_active(e.state);
            e.shutdown = is_active(prev) && !is_active(e.state);
            prev = e.state;
        }
    }
    if (!sm.temperature.empty()) {
        sch.model_temperature.assign(sm.fleet, {});
        sch.model_hto.assign(sm.fleet, {});
        for (int i = 0; i < sm.fleet; ++i)
            for (int k = 0; k <= sm.horizon; ++k) {
                sch.model_temperature[i].push_back(val(sm.temperature[i][k]));
                sch.model_hto[i].push_back(nonneg(val(sm.hto[i][k])));
            }
    }
    sch.validate();
    return sch;
}

std::string schedule_to_json(const Schedule& sch) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["format"] = "p2h-schedule";
    j["version"] = kScheduleFormatVersion;
    j["method"] = sch.method;
    j["fleet"] = sch.fleet;
    j["horizon"] = sch.horizon;
    j["step_s"] = sch.step_s;
    auto units = ordered_json::array();
    for (int i = 0; i < sch.fleet; ++i) {
        ordered_json u;
        u["unit"] = i;
        auto steps = ordered_json::array();
        for (int k = 0; k < sch.horizon; ++k) {
            const auto& e = sch.entries[i][k];
            ordered_json r;
            r["step"] = k;
            r["state"] = to_string(e.state);
            r["startup"] = e.startup;
            r["shutdown"] = e.shutdown;
            r["p_ele_MW"] = e.electrolytic_power;
            r["p_heat_MW"] = e.heating_power;
            r["p_cool_MW"] = e.cooling_power;
            r["prod_mol_s"] = e.production;
            if (!sch.model_temperature.empty()) {
                r["model_temp_K"] = sch.model_temperature[i][k];
                r["model_hto_mol"] = sch.model_hto[i][k];
            }
            steps.push_back(std::move(r));
        }
        u["steps"] = std::move(steps);
        if (!sch.model_temperature.empty()) {
            u["final_model_temp_K"] = sch.model_temperature[i][sch.horizon];
            u["final_model_hto_mol"] = sch.model_hto[i][sch.horizon];
        }
        units.push_back(std::move(u));
    }
    j["units"] = std::move(units);
    return j.dump(1) + "\n";
}

Schedule schedule_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "p2h-schedule") throw std::invalid_argument("schedule file: not a p2h-schedule document");
    const int version = j.value("version", 0);
    if (version != kScheduleFormatVersion)
        throw std::invalid_argument("schedule file: unsupported version " + std::to_string(version));
    Schedule sch;
    sch.method = j.value("method", "unknown");
    sch.fleet = j.at("fleet").get<int>();
    sch.horizon = j.at("horizon").get<int>();
    sch.step_s = j.at("step_s").get<double>();
    const auto& units = j.at("units");
    if (static_cast<int>(units.size()) != sch.fleet) throw std::invalid_argument("schedule file: units do not match fleet");
    sch.entries.assign(sch.fleet, std::vector<ScheduleEntry>(sch.horizon));
    bool modeled = !units.empty() && units[0].contains("final_model_temp_K");
    if (modeled) {
        sch.model_temperature.assign(sch.fleet, std::vector<double>(sch.horizon + 1));
        sch.model_hto.assign(sch.fleet, std::vector<double>(sch.horizon + 1));
    }
    for (int i = 0; i < sch.fleet; ++i) {
        const auto& steps = units[i].at("steps");
        if (static_cast<int>(steps.size()) != sch.horizon)
            throw std::invalid_argument("schedule file: unit " + std::to_string(i) + " does not cover the horizon");
        for (int k = 0; k < sch.horizon; ++k) {
            const auto& r = steps[k];
            auto& e = sch.entries[i][k];
            e.state = op_state_from_string(r.at("state").get<std::string>());
            e.startup = r.at("startup").get<bool>();
            e.shutdown = r.at("shutdown").get<bool>();
            e.electrolytic_power = r.at("p_ele_MW").get<double>();
            e.heating_power = r.at("p_heat_MW").get<double>();
            e.cooling_power = r.at("p_cool_MW").get<double>();
            e.production = r.at("prod_mol_s").get<double>();
            if (modeled) {
                sch.model_temperature[i][k] = r.at("model_temp_K").get<double>();
                sch.model_hto[i][k] = r.at("model_hto_mol").get<double>();
            }
        }
        if (modeled) {
            sch.model_temperature[i][sch.horizon] = units[i].at("final_model_temp_K").get<double>();
            sch.model_hto[i][sch.horizon] = units[i].at("final_model_hto_mol").get<double>();
        }
    }
    sch.validate();
    return sch;
}

}  // namespace p2h
