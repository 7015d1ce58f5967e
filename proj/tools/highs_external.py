#!/usr/bin/env python3
"""External MILP backend: reads a CPLEX LP file, solves it with HiGHS, writes the
minimal `status` / `name value` solution format expected by relay_mtl."""
import sys

import highspy


def main() -> int:
    if len(sys.argv) != 3:
        print("usage: highs_external.py MODEL.lp SOLUTION.txt", file=sys.stderr)
        return 2
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 1e-9)
    if h.readModel(sys.argv[1]) != highspy.HighsStatus.kOk:
        print("cannot read " + sys.argv[1], file=sys.stderr)
        return 1
    h.run()
    status = h.getModelStatus()
    if status == highspy.HighsModelStatus.kInfeasible:
        # presolve has been seen to reject feasible big-M models
        h.setOptionValue("presolve", "off")
        h.clearSolver()
        h.run()
        status = h.getModelStatus()
    with open(sys.argv[2], "w", encoding="ascii", newline="\n") as out:
        if status == highspy.HighsModelStatus.kOptimal:
            out.write("status optimal\n")
        elif status == highspy.HighsModelStatus.kInfeasible:
            out.write("status infeasible\n")
            return 0
        elif status in (highspy.HighsModelStatus.kTimeLimit, highspy.HighsModelStatus.kIterationLimit):
            out.write("status iteration_limit\n")
        else:
            print("HiGHS finished with " + h.modelStatusToString(status), file=sys.stderr)
            return 1
        lp = h.getLp()
        values = h.getSolution().col_value
        for name, value in zip(lp.col_names_, values):
            out.write("%s %.17g\n" % (name, value))
    return 0


if __name__ == "__main__":
    sys.exit(main())
