#pragma once

#include <map>
#include <string>
#include <vector>

#include "p2h/milp.hpp"

namespace p2h {

enum class SolveStatus { Optimal, FeasibleGap, Infeasible, TimeLimitNoSolution, SolverError };

const char* to_string(SolveStatus s);
inline bool has_solution(SolveStatus s) { return s == SolveStatus::Optimal || s == SolveStatus::FeasibleGap; }

/// Maps a substring of the status text to a status; rules are tried in order.
struct StatusRule {
    std::string contains;
    SolveStatus status;
};

/// How to read one solver's solution file.
struct SolutionDialect {
    std::string name = "name-value";
    /// Status text is the first line of the solution file.
    std::vector<StatusRule> status_rules;
    /// Lines starting with this are metadata, not variable values.
    std::string comment_prefix = "#";
    /// Number of leading lines (after the status line) that are not values.
    int skip_lines = 0;
    /// Leading tokens dropped before reading columns (e.g. a "**" infeasibility flag).
    std::vector<std::string> drop_tokens;
    int name_column = 0;
    int value_column = 1;
    /// Regexes with one capture group, searched in the solution file and then solver output.
    std::string objective_regex;
    std::string gap_regex;
    /// When the solver prints only nonzero columns, absent variables read as zero.
    bool missing_is_zero = false;
    /// Names in the file that are not model columns are skipped (solvers that also print rows).
    bool ignore_unknown = false;
};

/// Dialect of tools/highs_solve.py.
SolutionDialect highs_wrapper_dialect();
/// Dialect of `cbc ... -solve -solution FILE`.
SolutionDialect cbc_dialect();
/// Looks up a dialect by name ("highs" or "cbc"); throws on unknown names.
SolutionDialect dialect_by_name(const std::string& name);

struct SolverConfig {
    /// Shell command with {model}, {solution}, {timelimit} and {gap} placeholders, and
    /// optionally {start}: a file with a starting assignment (header line, then
    /// `index name value 0` per column; just the header when there is no start).
    std::string command;
    double time_limit = 600.0;  // s
    double mip_gap = 0.01;
    std::string work_dir;  // parent of the temporary directory; empty = system temp
    bool keep_temps = false;
    bool negate_objective = true;
    SolutionDialect dialect = highs_wrapper_dialect();
    /// Extra seconds granted before the process is killed.
    double kill_grace = 30.0;

    /// Throws std::invalid_argument on a malformed configuration.
    void validate() const;
};

struct SolveResult {
    SolveStatus status = SolveStatus::SolverError;
    double objective = 0.0;       // model objective recomputed from the assignment
    double reported_objective = 0.0;
    double gap = 0.0;             // as reported by the solver; NaN when unknown
    std::vector<double> values;   // by variable index; empty without a solution
    double wall_time = 0.0;       // s
    std::string message;          // output excerpt on failure, temp dir when kept
    std::string temp_dir;
};

/// Replaces the placeholders; paths are single-quoted for the shell.
std::string expand_command(const SolverConfig& cfg, const std::string& model_path, const std::string& solution_path,
                           const std::string& start_path = "");

/// Parses a solution file in the given dialect against the model's columns.
SolveResult parse_solution(const std::string& text, const std::string& solver_output, const MilpModel& m,
                           const SolutionDialect& d);

/// Writes the model, runs the solver with a hard time limit and reads the solution back.
/// The assignment is checked against every row before it is returned; a violation
/// turns the result into SolverError. `start` (one value per column) is passed through
/// the {start} placeholder when the command has one and ignored otherwise.
SolveResult solve(const MilpModel& m, const SolverConfig& cfg, const std::vector<double>& start = {});

/// Solver command found on this machine (HiGHS wrapper first, then CBC), or empty.
/// The P2H_SOLVER_CMD and P2H_SOLVER_DIALECT environment variables take precedence.
SolverConfig default_solver_config();

}  // namespace p2h
