#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "p2h/physics.hpp"
#include "p2h/scheduling.hpp"
#include "p2h/solver.hpp"

namespace p2h {

struct ScheduleEntry {
    OpState state = OpState::Idle;
    bool startup = false;
    bool shutdown = false;
    double electrolytic_power = 0.0;  // MW
    double heating_power = 0.0;       // MW
    double cooling_power = 0.0;       // MW
    double production = 0.0;          // mol/s as modeled
};

/// Per-unit, per-step operating plan plus the modeled state trajectories.
struct Schedule {
    std::string method = "proposed";
    int fleet = 0;
    int horizon = 0;
    double step_s = 900.0;
    std::vector<std::vector<ScheduleEntry>> entries;       // [unit][step]
    std::vector<std::vector<double>> model_temperature;    // [unit][0..horizon]; empty when not modeled
    std::vector<std::vector<double>> model_hto;            // [unit][0..horizon]; empty when not modeled

    const ScheduleEntry& at(int unit, int step) const { return entries.at(unit).at(step); }

    /// Throws std::invalid_argument naming the first (unit, step) that breaks an invariant.
    void validate() const;
};

/// Schedule with every unit idle.
Schedule idle_schedule(const PlantScenario& s);

class ExtractionError : public std::runtime_error {
public:
    ExtractionError(int unit, int step, const std::string& what);
    int unit() const { return unit_; }
    int step() const { return step_; }

private:
    int unit_, step_;
};

/// Reads a solved assignment back into a Schedule. Binaries are rounded at 0.5; a
/// state triple whose raw sum is off one by more than 1e-4, or that does not round to
/// exactly one state, raises ExtractionError. Production with no electrolytic power
/// and no output is reported as Standby, which has identical cost and dynamics.
Schedule extract_schedule(const SolveResult& result, const SchedulingModel& model, const PlantScenario& s);
Schedule extract_schedule(const std::vector<double>& values, const SchedulingModel& model, const PlantScenario& s);

/// Full assignment of a thermal model that follows a plan's states and electrolytic
/// power, evaluated with the model's own linearized dynamics. Electrolytic power is
/// clamped to the voltage cap, heaters run at the planned level within the power left
/// over, and coolers take any overshoot. A step whose impurity would break the cap, or
/// whose power cannot be fitted under the fleet cap, becomes Standby. Units with
/// identical initial states are reordered to satisfy the symmetry rows.
struct ModelStart {
    std::vector<double> values;  // by model column
    Schedule schedule;           // the decisions actually encoded
    int repairs = 0;             // steps changed to Standby or throttled
};
ModelStart complete_assignment(const Schedule& plan, const SchedulingModel& model, const PlantScenario& s,
                               const ElectrolyzerParams& p, const HalfspaceSet& hs);

/// Plan rounded from a relaxed solution of `model`. Per step, ceil(sum of on - threshold)
/// units produce, those already producing first, and share the relaxed electrolytic
/// and heater power equally. The rest are Standby where on + standby >= 0.5 or they
/// were active and idle < 0.5, else Idle. Idle runs shorter than the minimum gap
/// become Standby.
Schedule round_relaxation(const SchedulingModel& model, const std::vector<double>& x, const PlantScenario& s,
                          const ElectrolyzerParams& p, double threshold = 0.5);

/// Version-stamped JSON with one record per (unit, step).
std::string schedule_to_json(const Schedule& sch);
Schedule schedule_from_json(const std::string& text);
inline constexpr int kScheduleFormatVersion = 1;

}  // namespace p2h
