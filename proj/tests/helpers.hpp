#pragma once

#include <string>
#include <vector>

#include "p2h/scheduling.hpp"

namespace p2h::testing {

inline PlantScenario tiny_scenario(int fleet, int horizon, double power_mw, double temp = 298.0,
                                   OpState state = OpState::Idle, double hto = 0.0) {
    PlantScenario s;
    s.name = "tiny";
    s.horizon = horizon;
    s.fleet = fleet;
    s.available_power.assign(horizon, power_mw);
    s.power_price.assign(horizon, 34.7);
    s.h2_price = 0.38;
    s.startup_cost = 280.0;
    s.initial_states.assign(fleet, ElectrolyzerState{temp, hto, state});
    return s;
}

inline std::string source_path(const std::string& rel) { return std::string(P2H_SOURCE_DIR) + "/" + rel; }

}  // namespace p2h::testing
