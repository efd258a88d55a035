#include "p2h/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <regex>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "p2h/mps.hpp"

namespace fs = std::filesystem;

namespace p2h {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::FeasibleGap: return "feasible-gap";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::TimeLimitNoSolution: return "time-limit-no-solution";
        case SolveStatus::SolverError: return "solver-error";
    }
    return "?";
}

SolutionDialect highs_wrapper_dialect() {
    SolutionDialect d;
    d.name = "highs";
    d.status_rules = {{"status optimal", SolveStatus::Optimal},
                      {"status feasible", SolveStatus::FeasibleGap},
                      {"status infeasible", SolveStatus::Infeasible},
                      {"status time-limit-no-solution", SolveStatus::TimeLimitNoSolution}};
    d.comment_prefix = "#";
    d.objective_regex = R"(# objective\s+(\S+))";
    d.gap_regex = R"(# gap\s+(\S+))";
    return d;
}

SolutionDialect cbc_dialect() {
    SolutionDialect d;
    d.name = "cbc";
    // order matters: the "no integer solution" wording also starts with "Stopped"
    d.status_rules = {{"Optimal", SolveStatus::Optimal},
                      {"Integer infeasible", SolveStatus::Infeasible},
                      {"Infeasible", SolveStatus::Infeasible},
                      {"no integer solution", SolveStatus::TimeLimitNoSolution},
                      {"Stopped on", SolveStatus::FeasibleGap}};
    d.comment_prefix = "";
    d.drop_tokens = {"**"};
    d.name_column = 1;
    d.value_column = 2;
    d.objective_regex = R"(objective value\s+(\S+))";
    d.gap_regex = R"(Gap:\s+(\S+))";
    d.missing_is_zero = true;
    return d;
}

SolutionDialect dialect_by_name(const std::string& name) {
    if (name == "highs") return highs_wrapper_dialect();
    if (name == "cbc") return cbc_dialect();
    throw std::invalid_argument("unknown solution dialect '" + name + "'");
}

void SolverConfig::validate() const {
    if (command.find("{model}") == std::string::npos || command.find("{solution}") == std::string::npos)
        throw std::invalid_argument("solver command must contain {model} and {solution}");
    if (!(time_limit > 0)) throw std::invalid_argument("time_limit must be > 0");
    if (!(mip_gap >= 0 && mip_gap < 1)) throw std::invalid_argument("mip_gap must lie in [0,1)");
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

void replace_all(std::string& s, const std::string& what, const std::string& with) {
    for (std::size_t pos = 0; (pos = s.find(what, pos)) != std::string::npos; pos += with.size())
        s.replace(pos, what.size(), with);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string excerpt(const std::string& s, std::size_t n = 2000) {
    return s.size() <= n ? s : "..." + s.substr(s.size() - n);
}

std::optional<double> search(const std::string& re, const std::string& text) {
    if (re.empty()) return std::nullopt;
    std::smatch mt;
    if (!std::regex_search(text, mt, std::regex(re)) || mt.size() < 2) return std::nullopt;
    try {
        return std::stod(mt[1].str());
    } catch (...) {
        return std::nullopt;
    }
}

struct ProcessOutcome {
    bool started = false;
    bool killed = false;
    int exit_code = -1;
};

/// Runs `/bin/sh -c cmd` with stdout/stderr into `log`, killing its process group after `limit` seconds.
ProcessOutcome run_shell(const std::string& cmd, const fs::path& log, const fs::path& cwd, double limit) {
    ProcessOutcome out;
    const pid_t pid = fork();
    if (pid < 0) return out;
    if (pid == 0) {
        setpgid(0, 0);
        const int fd = open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (fd >= 0) {
            dup2(fd, STDOUT_FILENO);
            dup2(fd, STDERR_FILENO);
            close(fd);
        }
        if (!cwd.empty() && chdir(cwd.c_str()) != 0) _exit(127);
        execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    setpgid(pid, pid);
    out.started = true;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(limit);
    int status = 0;
    for (;;) {
        const pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (r < 0) return out;
        if (std::chrono::steady_clock::now() > deadline) {
            kill(-pid, SIGKILL);
            waitpid(pid, &status, 0);
            out.killed = true;
            return out;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    out.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    return out;
}

}  // namespace

std::string expand_command(const SolverConfig& cfg, const std::string& model_path, const std::string& solution_path,
                           const std::string& start_path) {
    std::string cmd = cfg.command;
    replace_all(cmd, "{start}", shell_quote(start_path));
    replace_all(cmd, "{model}", shell_quote(model_path));
    replace_all(cmd, "{solution}", shell_quote(solution_path));
    replace_all(cmd, "{timelimit}", fmt(cfg.time_limit));
    replace_all(cmd, "{gap}", fmt(cfg.mip_gap));
    return cmd;
}

SolveResult parse_solution(const std::string& text, const std::string& solver_output, const MilpModel& m,
                           const SolutionDialect& d) {
    SolveResult res;
    std::istringstream in(text);
    std::string status_line;
    while (std::getline(in, status_line) && status_line.find_first_not_of(" \t\r") == std::string::npos) {
    }
    if (status_line.empty()) {
        res.message = "empty solution file";
        return res;
    }
    bool matched = false;
    for (const auto& rule : d.status_rules)
        if (status_line.find(rule.contains) != std::string::npos) {
            res.status = rule.status;
            matched = true;
            break;
        }
    if (!matched) {
        res.status = SolveStatus::SolverError;
        res.message = "unrecognized status line: " + status_line;
        return res;
    }
    res.gap = std::numeric_limits<double>::quiet_NaN();
    if (auto g = search(d.gap_regex, text)) res.gap = *g;
    else if (auto g2 = search(d.gap_regex, solver_output)) res.gap = *g2;
    if (auto o = search(d.objective_regex, text)) res.reported_objective = *o;
    if (!has_solution(res.status)) return res;
    if (res.status == SolveStatus::Optimal && std::isnan(res.gap)) res.gap = 0.0;

    const std::size_t n = m.variables().size();
    std::vector<double> x(n, std::numeric_limits<double>::quiet_NaN());
    std::string line;
    int skipped = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!d.comment_prefix.empty() && line.rfind(d.comment_prefix, 0) == 0) continue;
        if (skipped < d.skip_lines) {
            ++skipped;
            continue;
        }
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        while (!tok.empty() && std::find(d.drop_tokens.begin(), d.drop_tokens.end(), tok.front()) != d.drop_tokens.end())
            tok.erase(tok.begin());
        if (tok.empty()) continue;
        const int need = std::max(d.name_column, d.value_column);
        if (static_cast<int>(tok.size()) <= need) {
            res.status = SolveStatus::SolverError;
            res.message = "solution line " + std::to_string(line_no) + " has too few fields";
            return res;
        }
        const auto id = m.find_variable(tok[d.name_column]);
        if (!id) {
            if (d.ignore_unknown) continue;
            res.status = SolveStatus::SolverError;
            res.message = "solution names unknown column '" + tok[d.name_column] + "'";
            return res;
        }
        try {
            x[*id] = std::stod(tok[d.value_column]);
        } catch (...) {
            res.status = SolveStatus::SolverError;
            res.message = "solution line " + std::to_string(line_no) + ": bad value";
            return res;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isnan(x[j])) continue;
        if (!d.missing_is_zero) {
            res.status = SolveStatus::SolverError;
            res.message = "solution misses column '" + m.variables()[j].name + "'";
            return res;
        }
        x[j] = 0.0;
    }
    res.values = std::move(x);
    res.objective = objective_value(m, res.values);
    return res;
}

static void write_start(const MilpModel& m, const std::vector<double>& start, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "Stopped on time - objective value " << (start.empty() ? 0.0 : objective_value(m, start)) << "\n";
    char buf[64];
    for (std::size_t j = 0; j < start.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", start[j]);
        out << j << " " << m.variables()[j].name << " " << buf << " 0\n";
    }
    if (!out) throw std::runtime_error("cannot write " + path);
}

SolveResult solve(const MilpModel& m, const SolverConfig& cfg, const std::vector<double>& start) {
    if (!start.empty() && start.size() != m.variables().size())
        throw std::invalid_argument("solve: start assignment does not match the model");
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path base = cfg.work_dir.empty() ? fs::temp_directory_path() : fs::path(cfg.work_dir);
    std::string templ = (base / "p2h-solve-XXXXXX").string();
    if (!mkdtemp(templ.data())) throw std::runtime_error("cannot create a temporary directory under " + base.string());
    const fs::path dir = templ;
    const fs::path model_path = dir / "model.mps", sol_path = dir / "solution.txt", log_path = dir / "solver.log";

    MpsWriteOptions wopts;
    wopts.negate_objective = cfg.negate_objective;
    write_mps(m, model_path.string(), wopts);

    const fs::path start_path = dir / "start.txt";
    if (cfg.command.find("{start}") != std::string::npos) write_start(m, start, start_path.string());
    const std::string cmd = expand_command(cfg, model_path.string(), sol_path.string(), start_path.string());
    const auto proc = run_shell(cmd, log_path, cfg.work_dir, cfg.time_limit + cfg.kill_grace);
    const std::string output = read_file(log_path);

    SolveResult res;
    if (!proc.started) {
        res.message = "could not start solver process";
    } else if (proc.killed) {
        res.status = SolveStatus::TimeLimitNoSolution;
        res.message = "solver killed after exceeding the time limit\n" + excerpt(output);
    } else if (!fs::exists(sol_path)) {
        res.message = "solver exited with code " + std::to_string(proc.exit_code) +
                      " without a solution file\n" + excerpt(output);
    } else {
        res = parse_solution(read_file(sol_path), output, m, cfg.dialect);
        if (proc.exit_code != 0 && res.status != SolveStatus::SolverError) {
            res = SolveResult{};
            res.message = "solver exited with code " + std::to_string(proc.exit_code) + "\n" + excerpt(output);
        } else if (res.status == SolveStatus::SolverError) {
            res.message += "\n" + excerpt(output);
        }
    }
    if (has_solution(res.status)) {
        const auto findings = check_feasibility(m, res.values);
        if (!findings.empty()) {
            std::ostringstream os;
            os << "solver assignment violates " << findings.size() << " rows/bounds, first: " << findings.front().what
               << " by " << findings.front().violation;
            res.status = SolveStatus::SolverError;
            res.message = os.str();
            res.values.clear();
        }
    }
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cfg.keep_temps) {
        res.temp_dir = dir.string();
    } else {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    return res;
}

SolverConfig default_solver_config() {
    SolverConfig cfg;
    const char* env_cmd = std::getenv("P2H_SOLVER_CMD");
    const char* env_dialect = std::getenv("P2H_SOLVER_DIALECT");
#ifdef P2H_DEFAULT_SOLVER_CMD
    cfg.command = P2H_DEFAULT_SOLVER_CMD;
#endif
#ifdef P2H_DEFAULT_SOLVER_DIALECT
    cfg.dialect = dialect_by_name(P2H_DEFAULT_SOLVER_DIALECT);
#endif
    if (env_cmd && *env_cmd) cfg.command = env_cmd;
    if (env_dialect && *env_dialect) cfg.dialect = dialect_by_name(env_dialect);
    return cfg;
}

}  // namespace p2h
