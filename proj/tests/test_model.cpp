#include <cmath>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "p2h/mps.hpp"
#include "p2h/schedule.hpp"
#include "p2h/scheduling.hpp"

using namespace p2h;
using p2h::testing::tiny_scenario;
using p2h::units::nm3_h_to_mol_s;

namespace {

double row_residual(const MilpModel& m, const std::string& row, const std::vector<double>& x) {
    const auto id = m.find_constraint(row);
    if (!id) throw std::runtime_error("no row " + row);
    return row_violation(m.constraints()[*id], x);
}

bool family_rows_hold(const MilpModel& m, const std::vector<double>& x, std::initializer_list<const char*> families) {
    for (const auto& row : m.constraints())
        for (const char* f : families)
            if (row.tag.family == f && row_violation(row, x) > 1e-9) return false;
    return true;
}

// Legal iff no idle run that follows an active state is shorter than min_idle before
// the unit becomes active again.
bool oracle_legal(OpState initial, const std::vector<OpState>& seq, int min_idle) {
    std::vector<bool> active{initial != OpState::Idle};
    for (auto s : seq) active.push_back(s != OpState::Idle);
    for (std::size_t a = 0; a < active.size(); ++a) {
        if (!active[a]) continue;
        std::size_t b = a + 1;
        while (b < active.size() && !active[b]) ++b;
        if (b < active.size() && b - a - 1 > 0 && static_cast<int>(b - a - 1) < min_idle) return false;
    }
    return true;
}

SchedulingModel state_model(OpState initial, int horizon, int min_idle) {
    ElectrolyzerParams p;
    p.min_idle_steps = min_idle;
    const auto s = tiny_scenario(1, horizon, 10.0, 340.0, initial);
    SchedulingModel sm = declare_variables(s, p, resolve_linearization(p));
    add_state_constraints(sm, s, p);
    return sm;
}

}  // namespace

// All 3^4 state strings of one unit over four steps: the rows admit a string (with
// some startup/shutdown assignment) exactly when the oracle calls it legal, and then
// the indicators are unique.
TEST(StateRows, ExhaustiveFourStepStrings) {
    for (int min_idle : {2, 3}) {
        for (OpState initial : {OpState::Production, OpState::Standby, OpState::Idle}) {
            const auto sm = state_model(initial, 4, min_idle);
            int legal_count = 0;
            for (int code = 0; code < 81; ++code) {
                std::vector<OpState> seq;
                for (int k = 0, c = code; k < 4; ++k, c /= 3) seq.push_back(static_cast<OpState>(c % 3));
                int feasible_indicators = 0;
                for (int bits = 0; bits < 256; ++bits) {
                    std::vector<double> x(sm.milp.variables().size(), 0.0);
                    for (int k = 0; k < 4; ++k) {
                        const auto& v = sm.steps[0][k];
                        x[v.on] = seq[k] == OpState::Production;
                        x[v.standby] = seq[k] == OpState::Standby;
                        x[v.idle] = seq[k] == OpState::Idle;
                        x[v.startup] = (bits >> k) & 1;
                        x[v.shutdown] = (bits >> (4 + k)) & 1;
                    }
                    if (family_rows_hold(sm.milp, x, {"state", "startup", "shutdown", "idle_gap"})) {
                        ++feasible_indicators;
                        for (int k = 0; k < 4; ++k) {
                            const bool prev_idle = k == 0 ? initial == OpState::Idle : seq[k - 1] == OpState::Idle;
                            const bool now_idle = seq[k] == OpState::Idle;
                            EXPECT_EQ(x[sm.steps[0][k].startup], prev_idle && !now_idle);
                            EXPECT_EQ(x[sm.steps[0][k].shutdown], !prev_idle && now_idle);
                        }
                    }
                }
                const bool legal = oracle_legal(initial, seq, min_idle);
                EXPECT_EQ(feasible_indicators, legal ? 1 : 0) << "code " << code << " min_idle " << min_idle;
                EXPECT_EQ(legal_state_sequence(initial, seq, min_idle), legal);
                legal_count += legal;
            }
            EXPECT_GT(legal_count, 0);
            EXPECT_LT(legal_count, 81);
        }
    }
}

TEST(StateRows, ShutdownThenImmediateStartupViolatesGap) {
    const auto sm = state_model(OpState::Production, 2, 2);
    std::vector<double> x(sm.milp.variables().size(), 0.0);
    const auto& v0 = sm.steps[0][0];
    const auto& v1 = sm.steps[0][1];
    x[v0.idle] = 1;
    x[v0.shutdown] = 1;
    x[v1.on] = 1;
    x[v1.startup] = 1;
    EXPECT_TRUE(family_rows_hold(sm.milp, x, {"state", "startup", "shutdown"}));
    EXPECT_GT(row_residual(sm.milp, "gap_0_1_2", x), 0.5);
}

TEST(StateRows, AllIdleNeedsNoIndicators) {
    const auto sm = state_model(OpState::Idle, 6, 2);
    std::vector<double> x(sm.milp.variables().size(), 0.0);
    for (const auto& v : sm.steps[0]) x[v.idle] = 1;
    EXPECT_TRUE(family_rows_hold(sm.milp, x, {"state", "startup", "shutdown", "idle_gap"}));
}

TEST(StateRows, ProductionToStandbyIsNoTransition) {
    const auto sm = state_model(OpState::Idle, 3, 2);
    std::vector<double> x(sm.milp.variables().size(), 0.0);
    x[sm.steps[0][0].on] = 1;
    x[sm.steps[0][0].startup] = 1;
    x[sm.steps[0][1].standby] = 1;
    x[sm.steps[0][2].on] = 1;
    EXPECT_TRUE(family_rows_hold(sm.milp, x, {"state", "startup", "shutdown", "idle_gap"}));
}

// --- production rows ---------------------------------------------------------------

struct Built {
    ElectrolyzerParams p;
    PlantScenario s;
    SchedulingModel sm;
    std::vector<double> x;
};

Built build_tiny(int fleet, int horizon, const HalfspaceSet& hs, double power = 40.0, const LinearizationOptions& lo = {}) {
    Built b;
    b.s = tiny_scenario(fleet, horizon, power, 353.0, OpState::Production);
    b.sm = build_model(b.s, b.p, hs, lo);
    b.x.assign(b.sm.milp.variables().size(), 0.0);
    return b;
}

TEST(ProductionRows, OffMeansNoProduction) {
    auto b = build_tiny(1, 2, default_halfspaces(ElectrolyzerParams{}));
    const auto& v = b.sm.steps[0][0];
    b.x[v.rate] = 1e-3;
    EXPECT_GT(row_residual(b.sm.milp, "gate_0_0", b.x), 0.0);
    b.x[v.rate] = 0.0;
    EXPECT_EQ(row_residual(b.sm.milp, "gate_0_0", b.x), 0.0);
}

TEST(ProductionRows, SingleFacetBoundsExactly) {
    HalfspaceSet hs;
    hs.facets.push_back({1.1, 0.002, -0.3});
    auto b = build_tiny(1, 2, hs);
    const auto& v = b.sm.steps[0][0];
    const double T = 353.0, P = 3.0, bound = 1.1 * P + 0.002 * T - 0.3;
    b.x[v.on] = 1;
    b.x[v.on_temp] = T;
    b.x[b.sm.temperature[0][0]] = T;
    b.x[v.p_ele] = P;
    b.x[v.rate] = bound;
    EXPECT_NEAR(row_residual(b.sm.milp, "facet_0_0_0", b.x), 0.0, 1e-12);
    b.x[v.rate] = bound + 1e-6;
    EXPECT_NEAR(row_residual(b.sm.milp, "facet_0_0_0", b.x), 1e-6, 1e-12);
}

TEST(ProductionRows, RampJumpOf1700Flagged) {
    auto b = build_tiny(1, 3, default_halfspaces(ElectrolyzerParams{}));
    b.x[b.sm.steps[0][0].rate] = nm3_h_to_mol_s(1000.0);
    b.x[b.sm.steps[0][1].rate] = nm3_h_to_mol_s(2700.0);
    EXPECT_NEAR(row_residual(b.sm.milp, "rampup_0_0", b.x), 100.0, 1e-9);
    EXPECT_EQ(row_residual(b.sm.milp, "rampdn_0_0", b.x), 0.0);
    b.x[b.sm.steps[0][1].rate] = nm3_h_to_mol_s(2600.0);
    EXPECT_NEAR(row_residual(b.sm.milp, "rampup_0_0", b.x), 0.0, 1e-9);
}

// --- power rows ------------------------------------------------------------------

TEST(PowerRows, StandbyHeaterDraw) {
    auto b = build_tiny(1, 1, default_halfspaces(ElectrolyzerParams{}));
    const auto& v = b.sm.steps[0][0];
    b.x[v.standby] = 1;
    b.x[v.p_heat] = 0.1;
    b.x[v.p_total] = 0.1 / 0.95 + 0.05;
    EXPECT_NEAR(row_residual(b.sm.milp, "pbal_0_0", b.x), 0.0, 1e-12);
    EXPECT_NEAR(b.x[v.p_total], 0.1553, 1e-4);
}

TEST(PowerRows, IdleDrawsNothing) {
    auto b = build_tiny(1, 1, default_halfspaces(ElectrolyzerParams{}));
    const auto& v = b.sm.steps[0][0];
    b.x[v.idle] = 1;
    b.x[v.p_ele] = 0.5;
    EXPECT_GT(row_residual(b.sm.milp, "pele_cap_0_0", b.x), 0.0);
    b.x[v.p_heat] = 0.2;
    b.x[v.p_ele] = 0.0;
    EXPECT_GT(row_residual(b.sm.milp, "heat_cap_0_0", b.x), 0.0);
}

TEST(PowerRows, FleetCapBinds) {
    auto b = build_tiny(6, 1, default_halfspaces(ElectrolyzerParams{}), 20.0);
    for (int i = 0; i < 6; ++i) b.x[b.sm.steps[i][0].p_total] = 5.05;
    EXPECT_NEAR(row_residual(b.sm.milp, "fleet_0", b.x), 6 * 5.05 - 20.0, 1e-9);
}

// --- thermal rows ------------------------------------------------------------------

TEST(ThermalRows, ZeroBitsZeroCurrent) {
    auto b = build_tiny(1, 1, default_halfspaces(ElectrolyzerParams{}));
    const auto& v = b.sm.steps[0][0];
    b.x[b.sm.temperature[0][0]] = 353.0;
    b.x[v.current] = 0.0;
    EXPECT_EQ(row_residual(b.sm.milp, "Iexp_0_0", b.x), 0.0);
    b.x[v.bit_temp[0]] = 1.0;  // a product with its bit off must be zero
    EXPECT_GT(row_residual(b.sm.milp, "dIT_0_0_0_u1", b.x), 0.0);
}

TEST(ThermalRows, ProductSandwich) {
    auto b = build_tiny(1, 1, default_halfspaces(ElectrolyzerParams{}));
    const auto& v = b.sm.steps[0][0];
    const auto& m = b.sm.milp;
    auto sandwich = [&](double delta) {
        b.x[v.bit_temp[3]] = delta;
        double worst = 0.0;
        for (const char* s : {"_u1", "_l1", "_u2", "_l2"})
            worst = std::max(worst, row_residual(m, std::string("dIT_0_0_3") + s, b.x));
        return worst;
    };
    b.x[b.sm.temperature[0][0]] = 353.0;
    b.x[v.current_bits[3]] = 1.0;
    EXPECT_LT(sandwich(353.0), 1e-9);
    EXPECT_GT(sandwich(353.0 + 1e-6), 5e-7);
    EXPECT_GT(sandwich(353.0 - 1e-6), 5e-7);
    b.x[v.current_bits[3]] = 0.0;
    EXPECT_LT(sandwich(0.0), 1e-9);
    EXPECT_GT(sandwich(1e-6), 5e-7);
}

// The thermal row with exact products reproduces the physics step.
TEST(ThermalRows, MatchesTemperatureStep) {
    ElectrolyzerParams p;
    LinearizationOptions lo;
    lo.current_step = 62.5;  // 2000 A = 32 steps, so no remainder
    auto b = build_tiny(1, 1, default_halfspaces(p), 40.0, lo);
    const auto& v = b.sm.steps[0][0];
    const double T = 353.0, I = 2000.0;
    b.x[b.sm.temperature[0][0]] = T;
    b.x[v.on] = 1;
    b.x[v.current] = I;
    b.x[v.current_bits[5]] = 1;
    b.x[v.bit_temp[5]] = T;
    b.x[v.bit_current[5]] = I;
    b.x[v.p_cool] = 0.2;
    b.x[v.p_heat] = 0.1;
    ASSERT_EQ(row_residual(b.sm.milp, "Iexp_0_0", b.x), 0.0);
    const auto& row = b.sm.milp.constraints()[*b.sm.milp.find_constraint("thermal_0_0")];
    const double t_next = row.rhs - row_activity(row, b.x);  // coefficient of T' is 1 and x[T'] = 0

    const double pele = p.n_cells * I * cell_voltage(I, T, p) * 1e-6;
    const double expected = temperature_step({T, 0.0, OpState::Production}, {pele, 0.1, 0.2}, p, 900.0);
    EXPECT_LT(std::abs(t_next - expected) / expected, 1e-9);
}

TEST(ThermalRows, ReactionHeatCutHoldsForIntegralBits) {
    ElectrolyzerParams p;
    auto b = build_tiny(1, 1, default_halfspaces(p));
    const auto& v = b.sm.steps[0][0];
    const auto& lin = b.sm.lin;
    // the voltage-cap current at 373 K, represented by bits plus remainder
    const double T = 373.0;
    const double I = std::min((p.max_cell_voltage - p.a0 - p.a1 * T) / p.a2, lin.current_max);
    b.x[b.sm.temperature[0][0]] = T;
    b.x[v.on] = 1;
    b.x[v.on_temp] = T;
    b.x[v.current] = I;
    const auto q = static_cast<long long>(std::floor(I / lin.current_step));
    b.x[v.current_rem] = I - q * lin.current_step;
    for (int j = 0; j < lin.current_bits; ++j)
        if ((q >> j) & 1) {
            b.x[v.current_bits[j]] = 1;
            b.x[v.bit_temp[j]] = T;
            b.x[v.bit_current[j]] = I;
        }
    EXPECT_LT(row_residual(b.sm.milp, "Iexp_0_0", b.x), 1e-9);
    EXPECT_LT(row_residual(b.sm.milp, "volt_0_0", b.x), 1e-9);
    EXPECT_EQ(row_residual(b.sm.milp, "react_cut_0_0", b.x), 0.0);
}

// --- impurity rows ---------------------------------------------------------------

TEST(HtoRows, StationaryWhenOff) {
    auto b = build_tiny(1, 1, default_halfspaces(ElectrolyzerParams{}));
    b.x[b.sm.hto[0][0]] = 30.0;
    b.x[b.sm.hto[0][1]] = 30.0;
    b.x[b.sm.steps[0][0].standby] = 1;
    EXPECT_NEAR(row_residual(b.sm.milp, "hto_0_0", b.x), 0.0, 1e-12);
}

TEST(HtoRows, MatchesHtoStepWithinDiscretization) {
    ElectrolyzerParams p;
    p.hto_discharge_const = 5.68e5;
    p.o2_holdup = 20000.0;  // keeps 100 mol inside the impurity range
    const auto s = tiny_scenario(1, 1, 40.0, 353.0, OpState::Production, 100.0);
    auto sm = build_model(s, p, default_halfspaces(p));
    std::vector<double> x(sm.milp.variables().size(), 0.0);
    const auto& v = sm.steps[0][0];
    const auto& lin = sm.lin;
    const double n = 100.0, o2 = 0.1;
    x[sm.hto[0][0]] = n;
    x[v.on] = 1;
    x[v.rate] = 2 * o2;
    const auto q = static_cast<long long>(std::floor(o2 / lin.o2_step));
    x[v.o2_rem] = o2 - q * lin.o2_step;
    for (int j = 0; j < lin.o2_bits; ++j)
        if ((q >> j) & 1) {
            x[v.o2_bits[j]] = 1;
            x[v.o2_hto[j]] = n;
        }
    ASSERT_LT(row_residual(sm.milp, "O2exp_0_0", x), 1e-12);
    const auto& row = sm.milp.constraints()[*sm.milp.find_constraint("hto_0_0")];
    const double n_next = row.rhs - row_activity(row, x);
    const double physics = hto_step({353.0, n, OpState::Production}, o2, true, p, 900.0);
    EXPECT_NEAR(physics, 102.848, 5e-4);
    const double bound = lin.o2_step * std::abs(n - lin.hto_ref) * 900.0 / p.hto_discharge_const;
    EXPECT_LE(std::abs(n_next - physics), bound + 1e-12);
    EXPECT_LE(bound, lin.hto_step_error(p, 900.0));
}

// Holding 20% load from a warm clean start runs into the impurity cap within a day;
// 40% never does.
TEST(HtoRows, CapForbidsLowSteadyLoad) {
    const ElectrolyzerParams p;
    const auto hs = default_halfspaces(p);
    auto s = tiny_scenario(1, 96, 10.0, 373.0, OpState::Production);
    const auto sm = build_model(s, p, hs);
    for (double load : {0.2, 0.4}) {
        Schedule plan = idle_schedule(s);
        for (auto& e : plan.entries[0]) {
            e.state = OpState::Production;
            e.electrolytic_power = load * p.rated_power;
        }
        const auto ms = complete_assignment(plan, sm, s, p, hs);
        EXPECT_TRUE(check_feasibility(sm.milp, ms.values).empty());
        if (load < 0.34)
            EXPECT_GT(ms.repairs, 0);
        else
            EXPECT_EQ(ms.repairs, 0);
    }
}

// --- objective ---------------------------------------------------------------------

TEST(Objective, OneStepArithmetic) {
    auto b = build_tiny(1, 1, default_halfspaces(ElectrolyzerParams{}));
    EXPECT_EQ(objective_value(b.sm.milp, b.x), 0.0);
    const auto& v = b.sm.steps[0][0];
    b.x[v.rate] = nm3_h_to_mol_s(1000.0);
    b.x[v.p_total] = 5.0;
    EXPECT_NEAR(objective_value(b.sm.milp, b.x), 51.625, 1e-9);
    b.x[v.startup] = 1;
    EXPECT_NEAR(objective_value(b.sm.milp, b.x), 51.625 - 280.0, 1e-9);
    EXPECT_NEAR(step_profit(nm3_h_to_mol_s(1000.0), 5.0, false, 0.38, 34.7, 280.0, 900.0), 51.625, 1e-9);
}

// --- whole model -----------------------------------------------------------------

// Hand count for the thermal model: per unit 2 fixed initial columns plus
// (17 + 3 B_I + 2 B_O) per step; rows (31 + F + 8 B_I + 4 B_O) per unit-step,
// 2 ramp rows per interior step pair, (H - 1)(N_min - 1) idle-gap rows per unit,
// one fleet row per step and one symmetry row per identical neighbour pair.
TEST(Model, CountsMatchClosedForm) {
    const ElectrolyzerParams p;
    const auto hs = default_halfspaces(p);
    const int F = static_cast<int>(hs.facets.size());
    for (auto [fleet, horizon] : {std::pair{1, 2}, std::pair{2, 3}, std::pair{3, 5}}) {
        const auto s = tiny_scenario(fleet, horizon, 20.0);
        const auto sm = build_model(s, p, hs);
        const int bi = sm.lin.current_bits, bo = sm.lin.o2_bits, nmin = p.min_idle_steps;
        const long vars = fleet * (2L + horizon * (17L + 3 * bi + 2 * bo));
        const long rows = static_cast<long>(fleet) * horizon * (31 + F + 8 * bi + 4 * bo) +
                          fleet * 2L * (horizon - 1) + fleet * static_cast<long>(horizon - 1) * (nmin - 1) + horizon +
                          (fleet - 1);
        EXPECT_EQ(static_cast<long>(sm.milp.variables().size()), vars) << fleet << "x" << horizon;
        EXPECT_EQ(static_cast<long>(sm.milp.constraints().size()), rows) << fleet << "x" << horizon;
        EXPECT_EQ(static_cast<long>(sm.milp.num_binaries()), fleet * horizon * (5L + bi + bo));
    }
}

TEST(Model, Deterministic) {
    const ElectrolyzerParams p;
    const auto hs = default_halfspaces(p);
    const auto s = tiny_scenario(2, 6, 7.5);
    EXPECT_EQ(to_mps_string(build_model(s, p, hs).milp), to_mps_string(build_model(s, p, hs).milp));
}

TEST(Model, NoPowerAllIdleFeasible) {
    const ElectrolyzerParams p;
    const auto hs = default_halfspaces(p);
    const auto s = tiny_scenario(2, 8, 0.0);
    const auto sm = build_model(s, p, hs);
    const auto ms = complete_assignment(idle_schedule(s), sm, s, p, hs);
    EXPECT_TRUE(check_feasibility(sm.milp, ms.values).empty());
    EXPECT_EQ(objective_value(sm.milp, ms.values), 0.0);
}

TEST(Model, RejectsBadInputs) {
    const ElectrolyzerParams p;
    const auto hs = default_halfspaces(p);
    auto s = tiny_scenario(1, 4, 5.0);
    s.available_power.push_back(1.0);
    EXPECT_THROW(build_model(s, p, hs), std::invalid_argument);
    EXPECT_THROW(resolve_linearization(p, {.current_bits = 7, .current_step = 1.0}), std::invalid_argument);
    EXPECT_THROW(build_model(tiny_scenario(1, 4, 5.0), p, HalfspaceSet{}), std::invalid_argument);
}

// --- baseline ----------------------------------------------------------------------

TEST(Baseline, ForbidsLoadsBelowMinimum) {
    const ElectrolyzerParams p;
    const auto hs = default_halfspaces(p);
    const auto s = tiny_scenario(1, 2, 10.0);
    const auto sm = build_baseline_model(s, p, hs, p.max_temp);
    std::vector<double> x(sm.milp.variables().size(), 0.0);
    const auto& v = sm.steps[0][0];
    x[v.on] = 1;
    for (double load : {0.05, 0.2, 0.33}) {
        x[v.p_ele] = load * p.rated_power;
        EXPECT_GT(row_residual(sm.milp, "min_load_0_0", x), 0.0) << load;
    }
    x[v.p_ele] = 0.341 * p.rated_power;
    EXPECT_EQ(row_residual(sm.milp, "min_load_0_0", x), 0.0);
    x[v.on] = 0;
    x[v.p_ele] = 0.1;
    EXPECT_GT(row_residual(sm.milp, "pele_cap_0_0", x), 0.0);
    EXPECT_TRUE(sm.temperature.empty());
}

TEST(Baseline, ThermalModelAdmitsLowLoadExcursion) {
    const ElectrolyzerParams p;
    const auto hs = default_halfspaces(p);
    const auto s = tiny_scenario(1, 4, 10.0, 373.0, OpState::Production);
    const auto sm = build_model(s, p, hs);
    Schedule plan = idle_schedule(s);
    for (int k = 0; k < 4; ++k) {
        plan.entries[0][k].state = OpState::Production;
        plan.entries[0][k].electrolytic_power = (k == 2 ? 0.15 : 0.8) * p.rated_power;
    }
    const auto ms = complete_assignment(plan, sm, s, p, hs);
    EXPECT_EQ(ms.repairs, 0);
    EXPECT_TRUE(check_feasibility(sm.milp, ms.values).empty());
    EXPECT_NEAR(ms.values[sm.steps[0][2].p_ele], 0.75, 1e-9);
}

// With P_ele at the true stack power both rows hold; far from it, one of them fails.
TEST(ThermalRows, StackPowerRowsAdmitPhysicalPoints) {
    ElectrolyzerParams p;
    auto b = build_tiny(1, 1, default_halfspaces(p));
    const auto& v = b.sm.steps[0][0];
    const auto& lin = b.sm.lin;
    for (double T : {300.0, 340.0, 373.0}) {
        for (double frac : {0.05, 0.3, 0.7, 1.0}) {
            const double i_cap = std::min((p.max_cell_voltage - p.a0 - p.a1 * T) / p.a2, lin.current_max);
            const double I = frac * i_cap;
            std::fill(b.x.begin(), b.x.end(), 0.0);
            b.x[b.sm.temperature[0][0]] = T;
            b.x[v.on] = 1;
            b.x[v.current] = I;
            const auto q = static_cast<long long>(std::floor(I / lin.current_step));
            b.x[v.current_rem] = I - q * lin.current_step;
            for (int j = 0; j < lin.current_bits; ++j)
                if ((q >> j) & 1) {
                    b.x[v.current_bits[j]] = 1;
                    b.x[v.bit_temp[j]] = T;
                    b.x[v.bit_current[j]] = I;
                }
            const double pele = p.n_cells * I * cell_voltage(I, T, p) * 1e-6;
            b.x[v.p_ele] = pele;
            EXPECT_EQ(row_residual(b.sm.milp, "stack_cut_0_0", b.x), 0.0) << T << " " << I;
            EXPECT_EQ(row_residual(b.sm.milp, "stack_floor_0_0", b.x), 0.0) << T << " " << I;
            b.x[v.p_ele] = 0.5 * pele - 0.05;
            EXPECT_GT(row_residual(b.sm.milp, "stack_cut_0_0", b.x), 0.0) << T << " " << I;
            b.x[v.p_ele] = 1.5 * pele + 0.05;
            EXPECT_GT(row_residual(b.sm.milp, "stack_floor_0_0", b.x), 0.0) << T << " " << I;
        }
    }
}
