#!/usr/bin/env python3
"""Solve an MPS file with HiGHS and write a name/value solution file.

The solution file starts with `# status`, `# objective` and `# gap` lines,
followed by one `name value` line per column. A start file holds a header
line and then `index name value 0` lines; a header-only file means no start.
"""
import argparse
import math
import sys

import highspy


def read_start(path, names):
    index = {n: j for j, n in enumerate(names)}
    values = [0.0] * len(names)
    seen = 0
    with open(path) as f:
        next(f, None)
        for line in f:
            tok = line.split()
            if len(tok) < 3:
                continue
            j = index.get(tok[1])
            if j is None:
                continue
            values[j] = float(tok[2])
            seen += 1
    return values if seen else None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("model")
    ap.add_argument("solution")
    ap.add_argument("time_limit", type=float)
    ap.add_argument("gap", type=float)
    ap.add_argument("--start", help="starting assignment")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", True)
    h.setOptionValue("log_to_console", True)
    h.setOptionValue("time_limit", args.time_limit)
    h.setOptionValue("mip_rel_gap", args.gap)
    h.setOptionValue("threads", args.threads)
    h.setOptionValue("random_seed", 0)
    if h.readModel(args.model) == highspy.HighsStatus.kError:
        sys.stderr.write("failed to read %s\n" % args.model)
        return 2
    if args.start:
        values = read_start(args.start, h.getLp().col_names_)
        if values is not None:
            sol = highspy.HighsSolution()
            sol.col_value = values
            sol.value_valid = True
            if h.setSolution(sol) == highspy.HighsStatus.kError:
                sys.stderr.write("start assignment rejected\n")
    h.run()

    ms = h.getModelStatus()
    info = h.getInfo()
    has_sol = info.primal_solution_status == 2  # kSolutionStatusFeasible
    S = highspy.HighsModelStatus
    if ms == S.kOptimal:
        status = "optimal"
    elif ms in (S.kInfeasible, S.kUnboundedOrInfeasible):
        status = "infeasible"
    elif ms in (S.kTimeLimit, S.kIterationLimit, S.kInterrupt, S.kSolutionLimit):
        status = "feasible" if has_sol else "time-limit-no-solution"
    else:
        status = "error"

    with open(args.solution, "w") as out:
        out.write("# status %s\n" % status)
        if status in ("optimal", "feasible"):
            gap_value = info.mip_gap if math.isfinite(info.mip_gap) else 0.0
            out.write("# objective %.17g\n" % info.objective_function_value)
            out.write("# gap %.17g\n" % gap_value)
            lp = h.getLp()
            values = h.getSolution().col_value
            for name, value in zip(lp.col_names_, values):
                out.write("%s %.17g\n" % (name, value))
    return 0


if __name__ == "__main__":
    sys.exit(main())
