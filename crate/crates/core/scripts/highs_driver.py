#!/usr/bin/env python3
"""Solve an MPS model with HiGHS and write a petal solution file.

usage: highs_driver.py MODEL SOLUTION [--gap G] [--time-limit S] [--warm-start FILE] [--threads N]

The solution file starts with `status`, `objective` and `gap` lines followed
by one `name value` pair per column. Exit code 0 whenever the solver ran to a
definite outcome (including infeasibility).
"""
import argparse
import math
import sys

import highspy


def read_warm_start(path):
    pairs = {}
    if not path:
        return pairs
    try:
        with open(path) as f:
            for line in f:
                parts = line.split()
                if len(parts) == 2 and not parts[0].startswith("#"):
                    pairs[parts[0]] = float(parts[1])
    except FileNotFoundError:
        pass
    return pairs


def complete_warm_start(h, warm):
    """Fix the hinted columns, solve what is left and hand the full point to
    the MIP as its first incumbent."""
    lp = h.getLp()
    names = list(lp.col_names_)
    idx = [i for i, n in enumerate(names) if n in warm]
    if not idx:
        return
    vals = [warm[names[i]] for i in idx]
    lower = [lp.col_lower_[i] for i in idx]
    upper = [lp.col_upper_[i] for i in idx]
    h.changeColsBounds(len(idx), idx, vals, vals)
    h.run()
    full = None
    if h.getModelStatus() == highspy.HighsModelStatus.kOptimal:
        full = list(h.getSolution().col_value)
    h.changeColsBounds(len(idx), idx, lower, upper)
    h.clearSolver()
    if full is not None:
        h.setSolution(_solution(full))
    else:
        h.setSolution(len(idx), idx, vals)


def _solution(values):
    sol = highspy.HighsSolution()
    sol.col_value = values
    return sol


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("model")
    ap.add_argument("solution")
    ap.add_argument("--gap", type=float, default=0.0)
    ap.add_argument("--time-limit", type=float, default=3600.0)
    ap.add_argument("--warm-start", default="")
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", args.gap)
    h.setOptionValue("mip_abs_gap", 1e-6)
    h.setOptionValue("time_limit", args.time_limit)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    if args.threads > 0:
        h.setOptionValue("threads", args.threads)
    if h.readModel(args.model) == highspy.HighsStatus.kError:
        print("cannot read model", file=sys.stderr)
        return 1

    warm = read_warm_start(args.warm_start)
    if warm:
        complete_warm_start(h, warm)

    h.run()
    ms = h.getModelStatus()
    info = h.getInfo()
    S = highspy.HighsModelStatus
    has_sol = info.primal_solution_status == 2
    if math.isfinite(info.mip_gap):
        gap = max(info.mip_gap, 0.0)
    else:
        gap = 0.0 if ms == S.kOptimal else 1.0
    if ms == S.kOptimal and gap <= 1e-9:
        status = "optimal"
    elif ms == S.kOptimal:
        status = "feasible-gap"
    elif ms in (S.kInfeasible,):
        status = "infeasible"
    elif ms == S.kTimeLimit:
        status = "time-limit" if has_sol else "time-limit-no-solution"
    elif has_sol:
        status = "feasible"
    else:
        print("solver ended with status %s" % h.modelStatusToString(ms), file=sys.stderr)
        return 2

    with open(args.solution, "w") as f:
        f.write("status %s\n" % status)
        if has_sol:
            f.write("objective %.17g\n" % info.objective_function_value)
            f.write("gap %.17g\n" % (0.0 if status == "optimal" else gap))
            names = h.getLp().col_names_
            values = h.getSolution().col_value
            for n, v in zip(names, values):
                f.write("%s %.17g\n" % (n, v))
    return 0


if __name__ == "__main__":
    sys.exit(main())
