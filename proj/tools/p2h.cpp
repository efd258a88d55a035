// p2h: scheduling, simulation and auditing of an electrolyzer fleet.
//
// Exit codes: 0 success, 2 audit findings, 3 solver failure, 4 input error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "p2h/io.hpp"
#include "p2h/milp.hpp"
#include "p2h/mps.hpp"
#include "p2h/schedule.hpp"
#include "p2h/scheduling.hpp"
#include "p2h/solver.hpp"
#include "p2h/surface.hpp"
#include "p2h/validation.hpp"

namespace fs = std::filesystem;
using namespace p2h;

namespace {

constexpr int kExitOk = 0, kExitAudit = 2, kExitSolver = 3, kExitInput = 4;

struct Globals {
    std::string params_path;
    std::string halfspaces_path;
    std::string solver_cmd;
    std::string solver_dialect;
    double time_limit = 600.0;
    double gap = 0.01;
    std::string out = "out";
    int jobs = 1;
    bool keep_temps = false;
    int substeps = 1;
};

/// Sidecar log for timings and other run-dependent output; artifacts stay deterministic.
class RunLog {
public:
    explicit RunLog(const std::string& dir) : path_((fs::path(dir) / "run.log").string()) {}
    void line(const std::string& s) {
        std::cerr << s << "\n";
        text_ += s + "\n";
    }
    ~RunLog() {
        try {
            if (!text_.empty()) write_text_file(path_, text_);
        } catch (...) {
        }
    }

private:
    std::string path_, text_;
};

ElectrolyzerParams params_of(const Globals& g) {
    return g.params_path.empty() ? ElectrolyzerParams{} : load_params(g.params_path);
}

HalfspaceSet halfspaces_of(const Globals& g, const ElectrolyzerParams& p) {
    return g.halfspaces_path.empty() ? default_halfspaces(p) : load_halfspaces(g.halfspaces_path);
}

SolverConfig solver_of(const Globals& g) {
    SolverConfig cfg = default_solver_config();
    if (!g.solver_cmd.empty()) cfg.command = g.solver_cmd;
    if (!g.solver_dialect.empty()) cfg.dialect = dialect_by_name(g.solver_dialect);
    cfg.time_limit = g.time_limit;
    cfg.mip_gap = g.gap;
    cfg.keep_temps = g.keep_temps;
    if (cfg.command.empty())
        throw std::invalid_argument("no MILP solver configured: pass --solver-cmd or set P2H_SOLVER_CMD");
    cfg.validate();
    return cfg;
}

std::string fmt(const char* f, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void write_outcome(const std::string& dir, const MethodOutcome& m, const ElectrolyzerParams& p) {
    write_text_file((fs::path(dir) / "schedule.json").string(), schedule_to_json(m.schedule));
    write_text_file((fs::path(dir) / "audit.json").string(), audit_to_json(m.audit));
    write_text_file((fs::path(dir) / "findings.jsonl").string(), findings_to_jsonl(m.audit));
    for (std::size_t i = 0; i < m.trace.units.size(); ++i)
        write_text_file((fs::path(dir) / ("trace_unit" + std::to_string(i) + ".csv")).string(),
                        trace_csv(m.trace.units[i], p));
}

void log_outcome(RunLog& log, const std::string& scenario, const MethodOutcome& m) {
    std::string s = scenario + " " + m.method + ": " + to_string(m.status);
    s += ", solve " + fmt("%.1f s", m.solve_seconds);
    if (std::isfinite(m.gap)) s += ", gap " + fmt("%.4g", m.gap);
    if (std::isfinite(m.start_objective)) s += ", start objective " + fmt("%.2f", m.start_objective);
    if (m.solved) {
        s += ", model objective " + fmt("%.2f", m.model_objective);
        s += ", realized profit " + fmt("%.2f", m.audit.realized_profit);
        s += ", production " + fmt("%.1f Nm3", m.audit.production_nm3);
        s += ", findings " + std::to_string(m.audit.findings.size());
    } else if (!m.message.empty()) {
        s += "\n" + m.message;
    }
    log.line(s);
}

int cmd_schedule(const Globals& g, const std::string& scenario_path, const std::string& method, bool no_standby) {
    const auto p = params_of(g);
    const auto s = load_scenario(scenario_path);
    const auto hs = halfspaces_of(g, p);
    const auto cfg = solver_of(g);
    RunLog log(g.out);
    CompareOptions opts;
    opts.substeps = g.substeps;
    opts.model.allow_standby = !no_standby;
    const MethodOutcome m = run_method(method, s, p, hs, cfg, opts);
    log_outcome(log, s.name, m);
    if (!m.solved) return kExitSolver;
    write_outcome(g.out, m, p);
    return m.audit.pass ? kExitOk : kExitAudit;
}

/// Profile CSV with header `step,state,p_ele_MW,p_heat_MW,p_cool_MW`.
std::vector<ProfileStep> load_profile(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    int lineno = 1;
    if (!std::getline(in, line) || line != "step,state,p_ele_MW,p_heat_MW,p_cool_MW")
        throw InputError(path, "line 1", "expected header 'step,state,p_ele_MW,p_heat_MW,p_cool_MW'");
    std::vector<ProfileStep> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> c;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) c.push_back(cell);
        const std::string where = "line " + std::to_string(lineno);
        if (c.size() != 5) throw InputError(path, where, "expected 5 columns");
        ProfileStep st;
        try {
            st.op_state = op_state_from_string(c[1]);
            st.inputs = {std::stod(c[2]), std::stod(c[3]), std::stod(c[4])};
        } catch (const std::exception& e) {
            throw InputError(path, where, e.what());
        }
        out.push_back(st);
    }
    if (out.empty()) throw InputError(path, "line 2", "empty profile");
    return out;
}

int cmd_simulate(const Globals& g, const std::string& profile_path, double step_s, double t0, double n0,
                 const std::string& s0) {
    const auto p = params_of(g);
    const auto profile = load_profile(profile_path);
    ElectrolyzerState init{t0, n0, op_state_from_string(s0)};
    SimulationOptions so;
    so.substeps = g.substeps;
    SimulationTrace tr;
    try {
        tr = simulate_trajectory(profile, init, p, step_s, so);
    } catch (const ProfileError& e) {
        throw InputError(profile_path, "line " + std::to_string(e.step() + 2), e.what());
    }
    write_text_file((fs::path(g.out) / "trace.csv").string(), trace_csv(tr, p));
    return kExitOk;
}

std::vector<double> parse_loads(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    for (std::string cell; std::getline(in, cell, ',');) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size()) throw InputError("--loads", cell, "not a number");
        out.push_back(v);
    }
    return out;
}

int cmd_hto_curve(const Globals& g, const std::string& loads, double hours, double step_s) {
    const auto p = params_of(g);
    const HtoCurve c = hto_curve(parse_loads(loads), hours, p, step_s);
    write_text_file((fs::path(g.out) / "hto_curve.csv").string(), hto_curve_csv(c));
    return kExitOk;
}

int cmd_compare(const Globals& g, const std::vector<std::string>& scenario_paths) {
    const auto p = params_of(g);
    std::vector<PlantScenario> scenarios;
    for (const auto& path : scenario_paths) scenarios.push_back(load_scenario(path));
    const auto hs = halfspaces_of(g, p);
    const auto cfg = solver_of(g);
    RunLog log(g.out);
    CompareOptions opts;
    opts.jobs = g.jobs;
    opts.substeps = g.substeps;
    const ComparisonSummary sum = compare(scenarios, p, hs, cfg, opts);
    write_text_file((fs::path(g.out) / "comparison.csv").string(), comparison_csv(sum));
    bool solver_failed = false, findings = false;
    for (const auto& r : sum.scenarios) {
        for (const MethodOutcome* m : {&r.proposed, &r.baseline}) {
            log_outcome(log, r.scenario, *m);
            if (!m->solved) {
                solver_failed = true;
                continue;
            }
            findings = findings || !m->audit.pass;
            write_outcome((fs::path(g.out) / r.scenario / m->method).string(), *m, p);
        }
    }
    for (const auto& w : sum.warnings) log.line("warning: " + w);
    log.line("mean delta production " + fmt("%.3f %%", sum.mean_delta_production_pct) + ", mean delta profit " +
             fmt("%.3f %%", sum.mean_delta_profit_pct));
    if (solver_failed) return kExitSolver;
    return findings ? kExitAudit : kExitOk;
}

int cmd_emit_mps(const Globals& g, const std::string& scenario_path, const std::string& method) {
    const auto p = params_of(g);
    const auto s = load_scenario(scenario_path);
    const auto hs = halfspaces_of(g, p);
    const SchedulingModel sm =
        method == "baseline" ? build_baseline_model(s, p, hs, p.max_temp) : build_model(s, p, hs);
    write_text_file((fs::path(g.out) / "model.mps").string(), to_mps_string(sm.milp));
    write_text_file((fs::path(g.out) / "model.meta.json").string(), metadata_json(sm.milp));
    return kExitOk;
}

int cmd_validate(const Globals& g, const std::string& scenario_path, const std::string& schedule_path, bool protective) {
    const auto p = params_of(g);
    const auto s = load_scenario(scenario_path);
    Schedule sch;
    try {
        sch = schedule_from_json(read_text_file(schedule_path));
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw InputError(schedule_path, "/", e.what());
    }
    SimulateOptions so;
    so.substeps = g.substeps;
    so.protective_control = protective;
    const FleetTrace tr = simulate_schedule(sch, s, p, so);
    const AuditReport rep = audit(sch, tr, s, p);
    write_text_file((fs::path(g.out) / "audit.json").string(), audit_to_json(rep));
    write_text_file((fs::path(g.out) / "findings.jsonl").string(), findings_to_jsonl(rep));
    for (std::size_t i = 0; i < tr.units.size(); ++i)
        write_text_file((fs::path(g.out) / ("trace_unit" + std::to_string(i) + ".csv")).string(), trace_csv(tr.units[i], p));
    return rep.pass ? kExitOk : kExitAudit;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Electrolyzer fleet scheduling with thermal and impurity dynamics"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    auto env = [](CLI::Option* o, const char* name) { return o->envname(std::string("P2H_") + name); };
    env(app.add_option("--params", g.params_path, "Electrolyzer parameter JSON (default: built-in reference)")
            ->check(CLI::ExistingFile), "PARAMS");
    env(app.add_option("--halfspaces", g.halfspaces_path, "Production half-space JSON (default: built from params)")
            ->check(CLI::ExistingFile), "HALFSPACES");
    env(app.add_option("--solver-cmd", g.solver_cmd, "Solver command template with {model} {solution} {timelimit} {gap} [{start}]"),
        "SOLVER_CMD");
    env(app.add_option("--solver-dialect", g.solver_dialect, "Solution file dialect: highs or cbc"), "SOLVER_DIALECT");
    env(app.add_option("--time-limit", g.time_limit, "Solver time limit per solve [s]")->check(CLI::PositiveNumber),
        "TIME_LIMIT");
    env(app.add_option("--gap", g.gap, "Relative MIP gap")->check(CLI::Range(0.0, 0.999999)), "GAP");
    env(app.add_option("--out", g.out, "Output directory"), "OUT");
    env(app.add_option("--jobs", g.jobs, "Parallel scenarios in compare")->check(CLI::PositiveNumber), "JOBS");
    env(app.add_flag("--debug-keep-temps", g.keep_temps, "Keep solver temporary directories"), "DEBUG_KEEP_TEMPS");
    env(app.add_option("--substeps", g.substeps, "Euler sub-steps per step in simulation")->check(CLI::PositiveNumber),
        "SUBSTEPS");

    std::string scenario, method = "proposed", schedule_path, profile, loads = "0.2,0.3,0.34,0.4", state0 = "idle";
    std::vector<std::string> scenarios;
    double hours = 24.0, step_s = 900.0, t0 = 298.0, n0 = 0.0;
    bool protective = false, no_standby = false;

    auto* sc = app.add_subcommand("schedule", "Solve, simulate and audit one scenario");
    sc->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    sc->add_option("--method", method, "proposed or baseline")->check(CLI::IsMember({"proposed", "baseline"}));
    sc->add_flag("--no-standby", no_standby, "Forbid the Standby state");

    auto* sim = app.add_subcommand("simulate", "Simulate one unit under a power reference");
    sim->add_option("--profile", profile, "CSV: step,state,p_ele_MW,p_heat_MW,p_cool_MW")->required()->check(CLI::ExistingFile);
    sim->add_option("--step-s", step_s, "Step length [s]")->check(CLI::PositiveNumber);
    sim->add_option("--initial-temp", t0, "Initial temperature [K]");
    sim->add_option("--initial-hto", n0, "Initial impurity [mol]");
    sim->add_option("--initial-state", state0, "Initial state")->check(CLI::IsMember({"idle", "standby", "production"}));

    auto* hc = app.add_subcommand("hto-curve", "Impurity ratio under constant loads");
    hc->add_option("--loads", loads, "Comma-separated load fractions");
    hc->add_option("--hours", hours, "Duration [h]")->check(CLI::PositiveNumber);
    hc->add_option("--step-s", step_s, "Step length [s]")->check(CLI::PositiveNumber);

    auto* cmp = app.add_subcommand("compare", "Proposed versus baseline on one or more scenarios");
    cmp->add_option("--scenario", scenarios, "Scenario JSON (repeatable)")->required()->check(CLI::ExistingFile);

    auto* mps = app.add_subcommand("emit-mps", "Write the model as MPS without solving");
    mps->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    mps->add_option("--method", method, "proposed or baseline")->check(CLI::IsMember({"proposed", "baseline"}));

    auto* val = app.add_subcommand("validate", "Simulate and audit an existing schedule file");
    val->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    val->add_option("--schedule", schedule_path, "Schedule JSON")->required()->check(CLI::ExistingFile);
    val->add_flag("--protective", protective, "Apply the protective unit controller");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*sc) return cmd_schedule(g, scenario, method, no_standby);
        if (*sim) return cmd_simulate(g, profile, step_s, t0, n0, state0);
        if (*hc) return cmd_hto_curve(g, loads, hours, step_s);
        if (*cmp) return cmd_compare(g, scenarios);
        if (*mps) return cmd_emit_mps(g, scenario, method);
        if (*val) return cmd_validate(g, scenario, schedule_path, protective);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitInput;
}
