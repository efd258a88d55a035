#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "p2h/physics.hpp"
#include "p2h/scheduling.hpp"
#include "p2h/validation.hpp"

namespace p2h {

/// Bad input file. `where` is a JSON pointer, a CSV line ("line 7") or a field list.
class InputError : public std::runtime_error {
public:
    InputError(const std::string& source, const std::string& where, const std::string& what);
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

// --- parameters ------------------------------------------------------------

/// Parameter file: {"field": {"value": v, "unit": "...", "implementer_default": bool}, ...}.
/// Fields left out keep their defaults; unknown fields are rejected.
ElectrolyzerParams params_from_json(const std::string& text, const std::string& source = "<params>");
ElectrolyzerParams load_params(const std::string& path);
std::string params_to_json(const ElectrolyzerParams& p);
/// True for values chosen for this implementation rather than taken from published data.
bool is_implementer_default(const std::string& field);

// --- scenarios ---------------------------------------------------------------

/// Scenario file: name, horizon, step_s, fleet, prices {h2_usd_per_nm3,
/// power_usd_per_mwh (number or per-step array), startup_usd}, pv_profile (array in
/// MW or a CSV path relative to `base_dir`), initial_states (one object per unit, or a
/// single object for all units).
PlantScenario scenario_from_json(const std::string& text, const std::string& base_dir,
                                 const std::string& source = "<scenario>");
PlantScenario load_scenario(const std::string& path);
/// Writes the profile inline, so the document is self-contained.
std::string scenario_to_json(const PlantScenario& s);

/// Header `step,power_MW` or `time,power_MW`; values in MW, non-negative.
std::vector<double> parse_pv_csv(const std::string& text, const std::string& source = "<pv>");
std::vector<double> load_pv_csv(const std::string& path);

// --- traces, audits, comparisons ---------------------------------------------

inline constexpr const char* kTraceCsvHeader =
    "step,time_s,state,temp_K,hto_mol,hto_ratio,current_A,voltage_V,prod_Nm3ph,power_MW";

struct TraceRow {
    int step = 0;
    double time_s = 0.0;
    OpState state = OpState::Idle;
    double temperature = 0.0;
    double hto_moles = 0.0;
    double hto_ratio = 0.0;
    double current = 0.0;
    double voltage = 0.0;
    double production_nm3h = 0.0;
    double power = 0.0;
};

/// One unit's trace, one row per step with the state at the start of the step. A last
/// row at step = horizon carries the end state with zero flows.
std::string trace_csv(const SimulationTrace& t, const ElectrolyzerParams& p);
std::vector<TraceRow> parse_trace_csv(const std::string& text, const std::string& source = "<trace>");

std::string audit_to_json(const AuditReport& r);
AuditReport audit_from_json(const std::string& text, const std::string& source = "<audit>");
std::vector<AuditFinding> parse_findings_jsonl(const std::string& text, const std::string& source = "<findings>");

struct ComparisonRow {
    std::string scenario, method;
    double production_nm3 = 0.0, profit_usd = 0.0;
    double delta_production_pct = 0.0, delta_profit_pct = 0.0;  // NaN when blank
    std::string solver_status;
    double gap = 0.0;  // NaN when blank
};
std::vector<ComparisonRow> parse_comparison_csv(const std::string& text, const std::string& source = "<comparison>");

// --- file helpers ----------------------------------------------------------------

std::string read_text_file(const std::string& path);
/// Writes through a temporary file and renames it into place.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace p2h
