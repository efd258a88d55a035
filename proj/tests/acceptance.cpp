// Acceptance run: one PASS/FAIL line per criterion, with the measured numbers.
//
// Criteria 2, 7 and 8 re-run the matching unit suites from p2h_tests and time them.
// The end-to-end comparison behind criteria 5, 6 and 9 is solved once and shared.
// P2H_ACCEPT_TIME_LIMIT overrides the 600 s solver limit for quick local runs; any
// other value is reported and fails criterion 5.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "p2h/io.hpp"
#include "p2h/physics.hpp"
#include "p2h/scheduling.hpp"
#include "p2h/solver.hpp"
#include "p2h/surface.hpp"
#include "p2h/validation.hpp"

namespace fs = std::filesystem;
using namespace p2h;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Line {
    std::string title;
    Verdict verdict;
    bool set = false;
};
Line lines[10];

// Progress goes to stderr as criteria finish; the ordered summary is printed at the end.
void report(int id, const std::string& title, const Verdict& v) {
    lines[id] = {title, v, true};
    std::fprintf(stderr, "[%d] %s: %s\n", id, v.pass ? "pass" : "fail", v.detail.c_str());
}

int print_summary() {
    int failures = 0;
    for (int id = 1; id <= 9; ++id) {
        const Line& l = lines[id];
        const bool pass = l.set && l.verdict.pass;
        std::printf("criterion %d %s: %s (%s)\n", id, pass ? "PASS" : "FAIL", l.title.c_str(),
                    l.set ? l.verdict.detail.c_str() : "not run");
        failures += !pass;
    }
    std::printf("%d of 9 criteria failed\n", failures);
    return failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

std::string data(const std::string& rel) { return (fs::path(P2H_SOURCE_DIR) / "data" / rel).string(); }

Verdict run_suite(const std::string& filter, double budget_s) {
    const auto t0 = Clock::now();
    const auto log = fs::temp_directory_path() / "p2h_acceptance_suite.txt";
    const std::string cmd = std::string(P2H_TESTS_PATH) + " --gtest_brief=1 --gtest_filter='" + filter + "' >'" +
                            log.string() + "' 2>&1";
    const int st = std::system(cmd.c_str());
    const double dt = seconds_since(t0);
    // a filter that matches nothing also exits 0, so count what actually passed
    int passed = 0;
    const std::string out = read_text_file(log.string());
    const auto at = out.find("[  PASSED  ] ");
    if (at != std::string::npos) passed = std::atoi(out.c_str() + at + 13);
    fs::remove(log);
    const bool ok = WIFEXITED(st) && WEXITSTATUS(st) == 0 && passed > 0;
    return {ok && dt < budget_s, fmt("%d tests of %s %s in %.2f s, budget %.0f s", passed, filter.c_str(),
                                     ok ? "green" : "red", dt, budget_s)};
}

// --- 1 ---------------------------------------------------------------------------

Verdict hto_property(const ElectrolyzerParams& p) {
    const auto t0 = Clock::now();
    std::vector<double> loads;
    for (int l = 5; l <= 33; ++l) loads.push_back(l / 100.0);
    loads.push_back(0.335);
    const std::size_t first_safe = loads.size();
    for (int l = 34; l <= 100; ++l) loads.push_back(l / 100.0);
    const HtoCurve c = hto_curve(loads, 24.0, p);
    const double dt = seconds_since(t0);

    const double limit = p.hto_limit;
    int below_ok = 0, safe_ok = 0;
    double worst_safe = 0.0;
    for (std::size_t j = 0; j < loads.size(); ++j) {
        const double peak = *std::max_element(c.ratio[j].begin(), c.ratio[j].end());
        if (j < first_safe) {
            below_ok += peak > limit;
        } else if (loads[j] > 0.34 + 1e-12) {
            safe_ok += peak <= limit;
            worst_safe = std::max(worst_safe, peak);
        }
    }
    const auto& r34 = c.ratio[first_safe];
    const double peak34 = *std::max_element(r34.begin(), r34.end());
    const double final34 = r34.back();
    const bool asym = std::abs(final34 - limit) <= 5e-4 && peak34 <= limit + 5e-4;
    const int n_below = static_cast<int>(first_safe), n_safe = static_cast<int>(loads.size() - first_safe - 1);
    const bool ok = below_ok == n_below && safe_ok == n_safe && asym && dt < 5.0;
    return {ok, fmt("%d/%d loads below 34%% exceed 2%%; %d/%d loads above 34%% stay below (worst %.4f%%); "
                    "34%% ends at %.4f%% with peak %.4f%%; %.3f s",
                    below_ok, n_below, safe_ok, n_safe, 100 * worst_safe, 100 * final34, 100 * peak34, dt)};
}

// --- 3 ---------------------------------------------------------------------------

Verdict envelope(const ElectrolyzerParams& p) {
    const auto t0 = Clock::now();
    const HalfspaceSet hs = default_halfspaces(p);
    const double rated = production_rate(p.rated_power, p.max_temp, p);
    double undercut = 0.0, gap = 0.0;
    for (int ip = 0; ip < 100; ++ip)
        for (int it = 0; it < 50; ++it) {
            const double pw = p.rated_power * ip / 99.0;
            const double t = p.ambient_temp + (p.max_temp - p.ambient_temp) * it / 49.0;
            const double d = envelope_rate(hs, pw, t) - production_rate(pw, t, p);
            undercut = std::min(undercut, d);
            gap = std::max(gap, d);
        }
    const double dt = seconds_since(t0);
    const bool ok = undercut >= -1e-9 && gap < 0.01 * rated && hs.facets.size() <= 40 && dt < 5.0;
    return {ok, fmt("%zu facets, worst undercut %.2e mol/s, max gap %.3f%% of rated, %.2f s", hs.facets.size(),
                    std::max(0.0, -undercut), 100 * gap / rated, dt)};
}

// --- 4 ---------------------------------------------------------------------------

PlantScenario random_tiny(std::mt19937& rng, const ElectrolyzerParams& p, std::vector<double>& grid) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 1 + static_cast<int>(rng() % 2), h = 4 + static_cast<int>(rng() % 5), g = 3 + static_cast<int>(rng() % 3);
    PlantScenario s;
    s.name = "tiny";
    s.horizon = h;
    s.fleet = n;
    s.step_s = 900.0;
    s.h2_price = 0.38;
    s.startup_cost = 280.0;
    s.power_price.assign(h, 34.7);
    for (int k = 0; k < h; ++k) s.available_power.push_back(u(rng) * n * p.rated_power * 1.2);
    for (int i = 0; i < n; ++i) {
        const int st = static_cast<int>(rng() % 3);
        s.initial_states.push_back({300.0 + 73.0 * u(rng), 0.0,
                                    st == 0 ? OpState::Idle : st == 1 ? OpState::Standby : OpState::Production});
    }
    grid.clear();
    for (int j = 0; j < g; ++j)
        grid.push_back(std::round((0.15 + 0.85 * (j + u(rng)) / g) * p.rated_power * 1000.0) / 1000.0);
    return s;
}

struct OracleRun {
    Verdict verdict;
    std::vector<std::pair<Schedule, PlantScenario>> schedules;  // solved MILP schedules, for criterion 6
};

OracleRun oracle_equivalence(const ElectrolyzerParams& p, const HalfspaceSet& hs, SolverConfig cfg) {
    const auto t0 = Clock::now();
    cfg.time_limit = 60.0;
    cfg.mip_gap = 1e-7;
    const Linearization lin = resolve_linearization(p);
    std::mt19937 rng(20240);
    OracleRun out;
    int equal = 0, dominant = 0, solved = 0;
    const int trials = 24;
    double worst_excess = 0.0;
    std::string first_bad;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> grid;
        const PlantScenario s = random_tiny(rng, p, grid);
        const OracleResult orc = oracle_best(s, p, grid);
        ModelOptions mo;
        mo.power_grid = grid;
        const SchedulingModel gm = build_model(s, p, hs, {}, mo);
        const SchedulingModel um = build_model(s, p, hs);
        const SolveResult rg = solve(gm.milp, cfg);
        // dominance only needs an incumbent at or above the oracle, not a proof
        SolverConfig loose = cfg;
        loose.mip_gap = 1e-4;
        const SolveResult ru = solve(um.milp, loose);
        if (rg.status != SolveStatus::Optimal || !has_solution(ru.status)) {
            if (first_bad.empty()) first_bad = fmt("trial %d: solver %s/%s", t, to_string(rg.status), to_string(ru.status));
            continue;
        }
        ++solved;
        const double bound = objective_linearization_bound(s, p, hs, lin);
        const double tol = 1e-4 * std::abs(orc.objective) + bound;
        const double diff = std::abs(rg.objective - orc.objective);
        worst_excess = std::max(worst_excess, diff / std::max(tol, 1e-12));
        if (diff <= tol) ++equal;
        else if (first_bad.empty())
            first_bad = fmt("trial %d: grid %.4f vs oracle %.4f, allowed %.4f", t, rg.objective, orc.objective, tol);
        if (ru.objective >= orc.objective - 1e-6 * (1.0 + std::abs(orc.objective))) ++dominant;
        else if (first_bad.empty())
            first_bad = fmt("trial %d: unrestricted %.4f below oracle %.4f", t, ru.objective, orc.objective);
        out.schedules.emplace_back(extract_schedule(rg, gm, s), s);
        out.schedules.emplace_back(extract_schedule(ru, um, s), s);
    }
    const double dt = seconds_since(t0);
    out.verdict.pass = solved == trials && equal == trials && dominant == trials && dt < 300.0;
    out.verdict.detail = fmt("%d instances, %d solved, %d grid-equal, %d dominated; worst |grid-oracle| uses %.0f%% of "
                             "the allowance; %.1f s",
                             trials, solved, equal, dominant, 100 * worst_excess, dt);
    if (!first_bad.empty()) out.verdict.detail += "; " + first_bad;
    return out;
}

// --- 5, 6, 9 -----------------------------------------------------------------------

const ScenarioComparison* find(const ComparisonSummary& sum, const std::string& name) {
    for (const auto& r : sum.scenarios)
        if (r.scenario == name) return &r;
    return nullptr;
}

Verdict end_to_end(const ComparisonSummary& sum, const std::vector<std::string>& batch, double time_limit) {
    const ScenarioComparison* day = find(sum, "table1");
    std::string d;
    bool ok = time_limit == 600.0;
    if (!ok) d += fmt("time limit %.0f s instead of 600 s; ", time_limit);
    if (!day || !day->valid) {
        return {false, d + "bundled day not solved"};
    }
    const bool day_ok = day->proposed.audit.realized_profit >= day->baseline.audit.realized_profit &&
                        day->delta_profit_pct > 0.0 && day->delta_profit_pct <= 5.0;
    ok = ok && day_ok;
    d += fmt("bundled day profit %.2f vs %.2f (%+.3f%%), production %+.3f%%; ", day->proposed.audit.realized_profit,
             day->baseline.audit.realized_profit, day->delta_profit_pct, day->delta_production_pct);

    double dp = 0.0, dq = 0.0;
    int n = 0;
    for (const auto& name : batch) {
        const auto* r = find(sum, name);
        if (!r || !r->valid) continue;
        dp += r->delta_profit_pct;
        dq += r->delta_production_pct;
        ++n;
    }
    const bool batch_ok = n == static_cast<int>(batch.size()) && dq > 0.0 && dp > 0.0;
    ok = ok && batch_ok;
    d += fmt("batch %d/%zu solved, mean production %+.3f%%, mean profit %+.3f%%; ", n, batch.size(),
             n ? dq / n : 0.0, n ? dp / n : 0.0);

    int over = 0, total = 0;
    double worst = 0.0;
    for (const auto& r : sum.scenarios)
        for (const MethodOutcome* m : {&r.proposed, &r.baseline}) {
            if (!m->solved) continue;
            ++total;
            const double g = std::isfinite(m->gap) ? m->gap : 1.0;
            worst = std::max(worst, g);
            over += g > 0.01 + 1e-9;
        }
    ok = ok && over == 0;
    d += fmt("%d/%d solves above the 1%% gap, worst %.2f%%", over, total, 100 * worst);
    return {ok, d};
}

Verdict audit_clean(const ComparisonSummary& sum, const OracleRun& oracle, const ElectrolyzerParams& p) {
    int checked = 0, dirty = 0, unsolved = 0;
    std::string first;
    for (const auto& r : sum.scenarios)
        for (const MethodOutcome* m : {&r.proposed, &r.baseline}) {
            if (!m->solved) {
                ++unsolved;
                continue;
            }
            ++checked;
            if (!m->audit.pass) {
                ++dirty;
                if (first.empty()) {
                    const auto& f = m->audit.findings.front();
                    first = fmt("%s %s: %s unit %d step %d by %.4g", r.scenario.c_str(), m->method.c_str(),
                                f.tag.c_str(), f.unit, f.step, f.violation);
                }
            }
        }
    for (const auto& [sch, s] : oracle.schedules) {
        ++checked;
        const AuditReport a = audit(sch, simulate_schedule(sch, s, p), s, p);
        if (!a.pass) {
            ++dirty;
            if (first.empty()) first = fmt("tiny instance: %s", a.findings.front().tag.c_str());
        }
    }
    std::string d = fmt("%d schedules audited, %d with findings, %d solves without a schedule", checked, dirty, unsolved);
    if (!first.empty()) d += "; first: " + first;
    return {dirty == 0 && checked > 0, d};
}

Verdict qualitative(const ComparisonSummary& sum, const std::vector<PlantScenario>& scenarios,
                    const ElectrolyzerParams& p) {
    const ScenarioComparison* day = find(sum, "table1");
    const ScenarioComparison* dip = find(sum, "dip_day");
    if (!day || !day->proposed.solved || !dip || !dip->proposed.solved) return {false, "scenarios not solved"};
    const PlantScenario* s = nullptr;
    for (const auto& sc : scenarios)
        if (sc.name == "table1") s = &sc;
    const auto& sch = day->proposed.schedule;
    const auto& tr = day->proposed.trace;
    const int H = s->horizon;

    // (a) startups only once the supply covers a unit's balance-of-plant load
    int sunrise = H;
    for (int k = 0; k < H && sunrise == H; ++k)
        if (s->available_power[k] >= p.aux_power) sunrise = k;
    int first_start = H, starts = 0;
    bool active_before = false;
    for (int i = 0; i < sch.fleet; ++i)
        for (int k = 0; k < H; ++k) {
            if (sch.at(i, k).startup) {
                ++starts;
                first_start = std::min(first_start, k);
            }
            if (k < sunrise && tr.units[i].steps[k].op_state != OpState::Idle) active_before = true;
        }
    const bool a = starts > 0 && first_start >= sunrise && !active_before;

    // (b) a standby interval on the dip day
    int standby = 0;
    for (const auto& row : dip->proposed.trace.units)
        for (const auto& st : row.steps) standby += st.op_state == OpState::Standby;
    const bool b = standby > 0;

    // (c) temperature at the cap during the peak (supply within 80% of its maximum)
    const double peak_power = *std::max_element(s->available_power.begin(), s->available_power.end());
    double t_peak = 0.0;
    for (const auto& u : tr.units)
        for (int k = 0; k < H; ++k)
            if (s->available_power[k] >= 0.8 * peak_power) t_peak = std::max(t_peak, u.steps[k].temperature);
    const bool c = t_peak >= p.max_temp - 0.5;

    // (d) a bounded low-load run with no impurity finding
    const double low = min_steady_load(p) * p.rated_power;
    int longest = 0, low_steps = 0;
    for (const auto& u : tr.units) {
        int run = 0;
        for (const auto& st : u.steps) {
            const bool is_low = st.op_state == OpState::Production && st.electrolytic_power > 1e-6 &&
                                st.electrolytic_power < low - 1e-6;
            run = is_low ? run + 1 : 0;
            low_steps += is_low;
            longest = std::max(longest, run);
        }
    }
    bool hto_finding = false;
    for (const auto& f : day->proposed.audit.findings) hto_finding = hto_finding || f.tag == "hto_cap";
    const bool dd = low_steps > 0 && longest < H && !hto_finding;

    return {a && b && c && dd,
            fmt("first startup step %d, supply threshold step %d, %d startups; %d standby unit-steps on dip_day; "
                "peak-window max temperature %.2f K; %d unit-steps below %.0f%% load, longest run %d, hto finding %s",
                first_start, sunrise, starts, standby, t_peak, low_steps, 100 * min_steady_load(p), longest,
                hto_finding ? "yes" : "no")};
}

}  // namespace

int main() {
    const ElectrolyzerParams p;
    const HalfspaceSet hs = default_halfspaces(p);
    SolverConfig cfg = default_solver_config();

    report(1, "impurity curves under steady loads", hto_property(p));
    report(2, "physics unit suite",
           run_suite("Voltage.*:Faraday.*:ReactionHeat.*:Thermal.*:Cooling.*:Hto.*:FixedPoint.*:Trajectory.*:Power.*",
                     10.0));
    report(3, "production envelope soundness", envelope(p));

    if (cfg.command.empty()) {
        for (int id : {4, 5, 6}) report(id, "needs a MILP solver", {false, "no solver configured"});
    }
    OracleRun oracle;
    if (!cfg.command.empty()) {
        oracle = oracle_equivalence(p, hs, cfg);
        report(4, "oracle equivalence", oracle.verdict);
    }

    report(7, "MPS round trip", run_suite("Mps.*", 120.0));
    report(8, "state-machine rows over all 4-step strings", run_suite("StateRows.ExhaustiveFourStepStrings", 60.0));

    if (cfg.command.empty()) {
        report(9, "qualitative traces", {false, "no solver configured"});
        print_summary();
        return 1;
    }

    double limit = 600.0;
    if (const char* env = std::getenv("P2H_ACCEPT_TIME_LIMIT")) limit = std::atof(env);
    cfg.time_limit = limit;
    cfg.mip_gap = 0.01;
    std::vector<PlantScenario> scenarios{load_scenario(data("table1.json")), load_scenario(data("dip_day.json"))};
    std::vector<std::string> batch;
    for (int d = 1; d <= 10; ++d) {
        scenarios.push_back(load_scenario(data(fmt("batch/day%02d.json", d))));
        batch.push_back(scenarios.back().name);
    }
    const auto t0 = Clock::now();
    const ComparisonSummary sum = compare(scenarios, p, hs, cfg);
    std::printf("comparison of %zu scenarios took %.0f s\n", scenarios.size(), seconds_since(t0));
    for (const auto& r : sum.scenarios)
        for (const MethodOutcome* m : {&r.proposed, &r.baseline})
            std::printf("  %-8s %-8s %-24s gap %6.2f%% profit %9.2f production %9.1f findings %zu\n",
                        r.scenario.c_str(), m->method.c_str(), to_string(m->status), 100 * m->gap,
                        m->audit.realized_profit, m->audit.production_nm3, m->audit.findings.size());

    report(5, "end-to-end comparison", end_to_end(sum, batch, limit));
    report(6, "audit cleanliness", audit_clean(sum, oracle, p));
    report(9, "qualitative traces", qualitative(sum, scenarios, p));

    return print_summary() == 0 ? 0 : 1;
}
