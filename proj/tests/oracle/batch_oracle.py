#!/usr/bin/env python3
"""Independent high-accuracy solver for the batch reference instances.

Reads the instances written by `ongraph_acceptance dump3 <dir>` and solves

    min ||S||_1 + rho * ||P||_{2,1} + (mu/2) * ||C S + P - S C - P^T||_F^2
    s.t. S symmetric, diag(S) = 0, S >= 0, S[omega] clamped

with CVXPY at tight tolerances, printing one optimal objective per line in
the C++ initializer format expected by tests/acceptance/oracle_values.hpp.
"""

import glob
import os
import sys

import cvxpy as cp
import numpy as np


def load_instance(path):
    with open(path) as f:
        tokens = f.read().split()
    it = iter(tokens)
    o = int(next(it))
    mu = float(next(it))
    rho = float(next(it))
    c = np.array([float(next(it)) for _ in range(o * o)]).reshape(o, o)
    m = int(next(it))
    omega = [(int(next(it)), int(next(it)), float(next(it))) for _ in range(m)]
    return o, mu, rho, c, omega


def solve(o, mu, rho, c, omega):
    s = cp.Variable((o, o), symmetric=True)
    p = cp.Variable((o, o))
    resid = c @ s + p - s @ c - p.T
    objective = cp.sum(cp.abs(s)) + rho * cp.sum(cp.norm(p, 2, axis=0)) + (
        mu / 2
    ) * cp.sum_squares(resid)
    constraints = [cp.diag(s) == 0, s >= 0]
    for i, j, v in omega:
        constraints.append(s[i, j] == v)
    problem = cp.Problem(cp.Minimize(objective), constraints)
    problem.solve(solver=cp.CLARABEL, max_iter=200000)
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"solver status {problem.status}")
    return problem.value, problem.status


def main():
    directory = sys.argv[1] if len(sys.argv) > 1 else "."
    paths = sorted(glob.glob(os.path.join(directory, "instance_*.txt")))
    if not paths:
        sys.exit(f"no instance_*.txt files under {directory}")
    values = []
    for path in paths:
        o, mu, rho, c, omega = load_instance(path)
        value, status = solve(o, mu, rho, c, omega)
        values.append(value)
        print(f"# {os.path.basename(path)}: {value:.12f} ({status})", file=sys.stderr)
    print("inline constexpr double kBatchObjective[kInstanceCount] = {")
    for v in values:
        print(f"    {v:.12f},")
    print("};")


if __name__ == "__main__":
    main()
