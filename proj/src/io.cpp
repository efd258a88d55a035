#include "p2h/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace p2h {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

InputError::InputError(const std::string& source, const std::string& where, const std::string& what)
    : std::runtime_error(source + ": " + where + ": " + what), where_(where) {}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path, "file", "cannot open");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << text;
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace {

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(source, "byte " + std::to_string(e.byte), "malformed JSON");
    }
}

double number_at(const json& j, const std::string& ptr, const std::string& source) {
    if (!j.is_number()) throw InputError(source, ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw InputError(source, ptr, "expected a finite number");
    return v;
}

const json& member(const json& obj, const std::string& parent, const char* key, const std::string& source) {
    if (!obj.is_object()) throw InputError(source, parent.empty() ? "/" : parent, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw InputError(source, parent + "/" + key, "required field missing");
    return *it;
}

// --- parameter table --------------------------------------------------------

struct ParamField {
    const char* name;
    const char* unit;
    bool implementer_default;
    double ElectrolyzerParams::*real;
    int ElectrolyzerParams::*integer;
};

const std::vector<ParamField>& param_fields() {
    using P = ElectrolyzerParams;
    static const std::vector<ParamField> fields = {
        {"rated_power", "MW", false, &P::rated_power, nullptr},
        {"n_cells", "1", true, nullptr, &P::n_cells},
        {"a0", "V", true, &P::a0, nullptr},
        {"a1", "V/K", true, &P::a1, nullptr},
        {"a2", "V/A", true, &P::a2, nullptr},
        {"thermal_neutral_voltage", "V", false, &P::thermal_neutral_voltage, nullptr},
        {"faraday_efficiency", "1", true, &P::faraday_efficiency, nullptr},
        {"faraday_constant", "C/mol", false, &P::faraday_constant, nullptr},
        {"heat_capacity", "MJ/K", false, &P::heat_capacity, nullptr},
        {"dissipation_conductance", "MW/K", false, &P::dissipation_conductance, nullptr},
        {"ambient_temp", "K", false, &P::ambient_temp, nullptr},
        {"coolant_temp", "K", false, &P::coolant_temp, nullptr},
        {"max_temp", "K", false, &P::max_temp, nullptr},
        {"cooling_conductance", "MW/K", true, &P::cooling_conductance, nullptr},
        {"max_heating_power", "MW", true, &P::max_heating_power, nullptr},
        {"heating_eff", "1", true, &P::heating_eff, nullptr},
        {"cooling_eff", "1", true, &P::cooling_eff, nullptr},
        {"aux_power", "MW", true, &P::aux_power, nullptr},
        {"max_cell_voltage", "V", false, &P::max_cell_voltage, nullptr},
        {"hto_inflow", "mol/s", false, &P::hto_inflow, nullptr},
        {"hto_discharge_const", "mol", true, &P::hto_discharge_const, nullptr},
        {"o2_holdup", "mol", true, &P::o2_holdup, nullptr},
        {"hto_limit", "1", false, &P::hto_limit, nullptr},
        {"ramp_up", "Nm3/h", false, &P::ramp_up, nullptr},
        {"ramp_down", "Nm3/h", false, &P::ramp_down, nullptr},
        {"min_idle_steps", "steps", true, nullptr, &P::min_idle_steps},
    };
    return fields;
}

}  // namespace

bool is_implementer_default(const std::string& field) {
    for (const auto& f : param_fields())
        if (field == f.name) return f.implementer_default;
    throw std::invalid_argument("unknown parameter '" + field + "'");
}

ElectrolyzerParams params_from_json(const std::string& text, const std::string& source) {
    const json j = parse_json(text, source);
    if (!j.is_object()) throw InputError(source, "/", "expected an object");
    ElectrolyzerParams p;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string ptr = "/" + it.key();
        const ParamField* field = nullptr;
        for (const auto& f : param_fields())
            if (it.key() == f.name) field = &f;
        if (!field) throw InputError(source, ptr, "unknown parameter");
        const json& entry = it.value();
        const json& value = entry.is_object() ? member(entry, ptr, "value", source) : entry;
        const std::string vptr = entry.is_object() ? ptr + "/value" : ptr;
        const double v = number_at(value, vptr, source);
        if (field->real) {
            p.*(field->real) = v;
        } else {
            if (v != std::floor(v)) throw InputError(source, vptr, "expected an integer");
            p.*(field->integer) = static_cast<int>(v);
        }
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(source, "/", e.what());
    }
    return p;
}

ElectrolyzerParams load_params(const std::string& path) { return params_from_json(read_text_file(path), path); }

std::string params_to_json(const ElectrolyzerParams& p) {
    ordered_json j;
    for (const auto& f : param_fields()) {
        ordered_json e;
        if (f.real)
            e["value"] = p.*(f.real);
        else
            e["value"] = p.*(f.integer);
        e["unit"] = f.unit;
        e["implementer_default"] = f.implementer_default;
        j[f.name] = std::move(e);
    }
    return j.dump(2) + "\n";
}

// --- PV profiles ---------------------------------------------------------------

std::vector<double> parse_pv_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<double> out;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto where = "line " + std::to_string(lineno);
        if (!header) {
            if (line != "step,power_MW" && line != "time,power_MW")
                throw InputError(source, where, "expected header 'step,power_MW' or 'time,power_MW'");
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw InputError(source, where, "expected two columns");
        std::size_t used = 0;
        double v = 0.0;
        const std::string cell = line.substr(comma + 1);
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
            throw InputError(source, where, "power_MW is not a number");
        if (v < 0) throw InputError(source, where, "negative power " + cell);
        out.push_back(v);
    }
    if (!header) throw InputError(source, "line 1", "missing header");
    return out;
}

std::vector<double> load_pv_csv(const std::string& path) { return parse_pv_csv(read_text_file(path), path); }

// --- scenarios -------------------------------------------------------------------

namespace {

std::vector<double> number_array(const json& j, const std::string& ptr, const std::string& source) {
    if (!j.is_array()) throw InputError(source, ptr, "expected an array");
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number_at(j[k], ptr + "/" + std::to_string(k), source));
    return out;
}

ElectrolyzerState state_from_json(const json& j, const std::string& ptr, const std::string& source) {
    ElectrolyzerState st;
    if (!j.is_object()) throw InputError(source, ptr, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string k = it.key();
        if (k == "state") {
            if (!it->is_string()) throw InputError(source, ptr + "/state", "expected a string");
            try {
                st.op_state = op_state_from_string(it->get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw InputError(source, ptr + "/state", e.what());
            }
        } else if (k == "temperature_K") {
            st.temperature = number_at(*it, ptr + "/" + k, source);
        } else if (k == "hto_mol") {
            st.hto_moles = number_at(*it, ptr + "/" + k, source);
        } else {
            throw InputError(source, ptr + "/" + k, "unknown field");
        }
    }
    return st;
}

int int_at(const json& j, const std::string& ptr, const std::string& source) {
    const double v = number_at(j, ptr, source);
    if (v != std::floor(v) || v < 0 || v > std::numeric_limits<int>::max()) throw InputError(source, ptr, "expected a non-negative integer");
    return static_cast<int>(v);
}

}  // namespace

PlantScenario scenario_from_json(const std::string& text, const std::string& base_dir, const std::string& source) {
    const json j = parse_json(text, source);
    if (!j.is_object()) throw InputError(source, "/", "expected an object");
    static const char* known[] = {"name", "horizon", "step_s", "fleet", "prices", "pv_profile", "initial_states", "description"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw InputError(source, "/" + it.key(), "unknown field");
    }
    PlantScenario s;
    if (j.contains("name")) {
        if (!j["name"].is_string()) throw InputError(source, "/name", "expected a string");
        s.name = j["name"].get<std::string>();
    } else {
        s.name = fs::path(source).stem().string();
    }
    s.horizon = int_at(member(j, "", "horizon", source), "/horizon", source);
    if (s.horizon < 1) throw InputError(source, "/horizon", "must be >= 1");
    s.step_s = number_at(member(j, "", "step_s", source), "/step_s", source);
    if (!(s.step_s > 0)) throw InputError(source, "/step_s", "must be > 0");
    s.fleet = int_at(member(j, "", "fleet", source), "/fleet", source);
    if (s.fleet < 1) throw InputError(source, "/fleet", "must be >= 1");

    const json& prices = member(j, "", "prices", source);
    s.h2_price = number_at(member(prices, "/prices", "h2_usd_per_nm3", source), "/prices/h2_usd_per_nm3", source);
    s.startup_cost = number_at(member(prices, "/prices", "startup_usd", source), "/prices/startup_usd", source);
    const json& pp = member(prices, "/prices", "power_usd_per_mwh", source);
    if (pp.is_array()) {
        s.power_price = number_array(pp, "/prices/power_usd_per_mwh", source);
        if (static_cast<int>(s.power_price.size()) != s.horizon)
            throw InputError(source, "/prices/power_usd_per_mwh, /horizon",
                             "length mismatch: " + std::to_string(s.power_price.size()) + " prices for horizon " +
                                 std::to_string(s.horizon));
    } else {
        s.power_price.assign(s.horizon, number_at(pp, "/prices/power_usd_per_mwh", source));
    }

    const json& pv = member(j, "", "pv_profile", source);
    if (pv.is_string()) {
        fs::path csv = pv.get<std::string>();
        if (csv.is_relative()) csv = fs::path(base_dir) / csv;
        s.available_power = load_pv_csv(csv.string());
    } else {
        s.available_power = number_array(pv, "/pv_profile", source);
    }
    if (static_cast<int>(s.available_power.size()) != s.horizon)
        throw InputError(source, "/pv_profile, /horizon",
                         "length mismatch: " + std::to_string(s.available_power.size()) + " profile entries for horizon " +
                             std::to_string(s.horizon));
    for (std::size_t k = 0; k < s.available_power.size(); ++k)
        if (s.available_power[k] < 0) throw InputError(source, "/pv_profile/" + std::to_string(k), "negative power");

    if (j.contains("initial_states")) {
        const json& is = j["initial_states"];
        if (is.is_array()) {
            if (static_cast<int>(is.size()) != s.fleet)
                throw InputError(source, "/initial_states, /fleet",
                                 "length mismatch: " + std::to_string(is.size()) + " states for fleet " + std::to_string(s.fleet));
            for (std::size_t i = 0; i < is.size(); ++i)
                s.initial_states.push_back(state_from_json(is[i], "/initial_states/" + std::to_string(i), source));
        } else {
            s.initial_states.assign(s.fleet, state_from_json(is, "/initial_states", source));
        }
    } else {
        s.initial_states.assign(s.fleet, ElectrolyzerState{});
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(source, "/", e.what());
    }
    return s;
}

PlantScenario load_scenario(const std::string& path) {
    return scenario_from_json(read_text_file(path), fs::path(path).parent_path().string(), path);
}

std::string scenario_to_json(const PlantScenario& s) {
    ordered_json j;
    j["name"] = s.name;
    j["horizon"] = s.horizon;
    j["step_s"] = s.step_s;
    j["fleet"] = s.fleet;
    ordered_json prices;
    prices["h2_usd_per_nm3"] = s.h2_price;
    prices["power_usd_per_mwh"] = s.power_price;
    prices["startup_usd"] = s.startup_cost;
    j["prices"] = std::move(prices);
    j["pv_profile"] = s.available_power;
    auto states = ordered_json::array();
    for (const auto& st : s.initial_states)
        states.push_back({{"state", to_string(st.op_state)}, {"temperature_K", st.temperature}, {"hto_mol", st.hto_moles}});
    j["initial_states"] = std::move(states);
    return j.dump(2) + "\n";
}

// --- trace CSV -------------------------------------------------------------------------

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double cell_number(const std::string& cell, const std::string& source, int lineno, const char* column,
                   bool blank_is_nan = false) {
    if (cell.empty() && blank_is_nan) return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != cell.size())
        throw InputError(source, "line " + std::to_string(lineno), std::string(column) + " is not a number");
    return v;
}

}  // namespace

std::string trace_csv(const SimulationTrace& t, const ElectrolyzerParams& p) {
    std::string out = std::string(kTraceCsvHeader) + "\n";
    const double to_nm3h = units::mol_s_to_nm3_h(1.0);
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
        const auto& r = t.steps[k];
        out += std::to_string(k) + "," + num(k * t.step_s) + "," + to_string(r.op_state) + "," + num(r.temperature) + "," +
               num(r.hto_moles) + "," + num(r.hto_ratio) + "," + num(r.current) + "," + num(r.voltage) + "," +
               num(r.production * to_nm3h) + "," + num(r.total_power) + "\n";
    }
    const auto& f = t.final_state;
    out += std::to_string(t.steps.size()) + "," + num(t.steps.size() * t.step_s) + "," + to_string(f.op_state) + "," +
           num(f.temperature) + "," + num(f.hto_moles) + "," + num(hto_ratio(f.hto_moles, p)) + ",0,0,0,0\n";
    return out;
}

std::vector<TraceRow> parse_trace_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<TraceRow> rows;
    if (!std::getline(in, line) || (++lineno, line != kTraceCsvHeader))
        throw InputError(source, "line 1", std::string("expected header '") + kTraceCsvHeader + "'");
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto c = split_csv(line);
        if (c.size() != 10) throw InputError(source, "line " + std::to_string(lineno), "expected 10 columns");
        TraceRow r;
        r.step = static_cast<int>(cell_number(c[0], source, lineno, "step"));
        r.time_s = cell_number(c[1], source, lineno, "time_s");
        try {
            r.state = op_state_from_string(c[2]);
        } catch (const std::invalid_argument& e) {
            throw InputError(source, "line " + std::to_string(lineno), e.what());
        }
        r.temperature = cell_number(c[3], source, lineno, "temp_K");
        r.hto_moles = cell_number(c[4], source, lineno, "hto_mol");
        r.hto_ratio = cell_number(c[5], source, lineno, "hto_ratio");
        r.current = cell_number(c[6], source, lineno, "current_A");
        r.voltage = cell_number(c[7], source, lineno, "voltage_V");
        r.production_nm3h = cell_number(c[8], source, lineno, "prod_Nm3ph");
        r.power = cell_number(c[9], source, lineno, "power_MW");
        rows.push_back(r);
    }
    return rows;
}

// --- audit JSON ---------------------------------------------------------------------------

namespace {

ordered_json finding_json(const AuditFinding& f) {
    ordered_json j;
    j["tag"] = f.tag;
    j["unit"] = f.unit;
    j["step"] = f.step;
    j["modeled"] = f.modeled;
    j["simulated"] = f.simulated;
    j["violation"] = f.violation;
    return j;
}

AuditFinding finding_from(const json& j, const std::string& ptr, const std::string& source) {
    AuditFinding f;
    const json& tag = member(j, ptr, "tag", source);
    if (!tag.is_string()) throw InputError(source, ptr + "/tag", "expected a string");
    f.tag = tag.get<std::string>();
    f.unit = static_cast<int>(number_at(member(j, ptr, "unit", source), ptr + "/unit", source));
    f.step = static_cast<int>(number_at(member(j, ptr, "step", source), ptr + "/step", source));
    f.modeled = number_at(member(j, ptr, "modeled", source), ptr + "/modeled", source);
    f.simulated = number_at(member(j, ptr, "simulated", source), ptr + "/simulated", source);
    f.violation = number_at(member(j, ptr, "violation", source), ptr + "/violation", source);
    return f;
}

}  // namespace

std::string audit_to_json(const AuditReport& r) {
    ordered_json j;
    j["pass"] = r.pass;
    j["realized_profit_usd"] = r.realized_profit;
    j["production_Nm3"] = r.production_nm3;
    j["max_temperature_K"] = r.max_temperature;
    j["max_voltage_V"] = r.max_voltage;
    j["max_hto_ratio"] = r.max_hto_ratio;
    j["max_temperature_drift_K"] = r.max_temperature_drift;
    j["max_hto_ratio_drift"] = r.max_hto_ratio_drift;
    auto fs_ = ordered_json::array();
    for (const auto& f : r.findings) fs_.push_back(finding_json(f));
    j["findings"] = std::move(fs_);
    return j.dump(2) + "\n";
}

AuditReport audit_from_json(const std::string& text, const std::string& source) {
    const json j = parse_json(text, source);
    AuditReport r;
    const json& pass = member(j, "", "pass", source);
    if (!pass.is_boolean()) throw InputError(source, "/pass", "expected a boolean");
    r.pass = pass.get<bool>();
    auto num_field = [&](const char* key) { return number_at(member(j, "", key, source), std::string("/") + key, source); };
    r.realized_profit = num_field("realized_profit_usd");
    r.production_nm3 = num_field("production_Nm3");
    r.max_temperature = num_field("max_temperature_K");
    r.max_voltage = num_field("max_voltage_V");
    r.max_hto_ratio = num_field("max_hto_ratio");
    r.max_temperature_drift = num_field("max_temperature_drift_K");
    r.max_hto_ratio_drift = num_field("max_hto_ratio_drift");
    const json& fs_ = member(j, "", "findings", source);
    if (!fs_.is_array()) throw InputError(source, "/findings", "expected an array");
    for (std::size_t i = 0; i < fs_.size(); ++i) r.findings.push_back(finding_from(fs_[i], "/findings/" + std::to_string(i), source));
    return r;
}

std::vector<AuditFinding> parse_findings_jsonl(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<AuditFinding> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            throw InputError(source, where, "malformed JSON");
        }
        try {
            out.push_back(finding_from(j, "", source));
        } catch (const InputError& e) {
            throw InputError(source, where, e.what());
        }
    }
    return out;
}

// --- comparison CSV -------------------------------------------------------------------------

std::vector<ComparisonRow> parse_comparison_csv(const std::string& text, const std::string& source) {
    static const std::string header =
        "scenario,method,production_Nm3,profit_usd,delta_production_pct,delta_profit_pct,solver_status,gap";
    std::istringstream in(text);
    std::string line;
    int lineno = 1;
    if (!std::getline(in, line) || line != header) throw InputError(source, "line 1", "expected header '" + header + "'");
    std::vector<ComparisonRow> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto c = split_csv(line);
        if (c.size() != 8) throw InputError(source, "line " + std::to_string(lineno), "expected 8 columns");
        ComparisonRow r;
        r.scenario = c[0];
        r.method = c[1];
        r.production_nm3 = cell_number(c[2], source, lineno, "production_Nm3", true);
        r.profit_usd = cell_number(c[3], source, lineno, "profit_usd", true);
        r.delta_production_pct = cell_number(c[4], source, lineno, "delta_production_pct", true);
        r.delta_profit_pct = cell_number(c[5], source, lineno, "delta_profit_pct", true);
        r.solver_status = c[6];
        r.gap = cell_number(c[7], source, lineno, "gap", true);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace p2h
