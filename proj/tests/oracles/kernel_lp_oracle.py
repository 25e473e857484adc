"""Independent dense LP for the 1D kernel class, used to freeze oracle values.

Solves max sum_i c_i phi_i over phi on the kernel grid u_i = -1 + 2i/(m-1) with
phi = 0 at |u| >= 1, sum_i q_i phi_i = 0 (trapezoid weights) and
|phi_i - phi_j| <= |u_i - u_j|^alpha for every pair, with HiGHS via scipy.
Objective c_i = q_i f(-u_i), i.e. A_alpha(f)(0, 1).
"""
import itertools
import sys

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix


def solve(alpha, m, f):
    u = np.linspace(-1.0, 1.0, m)
    q = np.full(m, 2.0 / (m - 1))
    q[0] *= 0.5
    q[-1] *= 0.5
    c = q * f(-u)
    free = np.arange(1, m - 1)
    n = len(free)
    rows, cols, vals, rhs = [], [], [], []
    r = 0
    # Pairs among free nodes.
    for a, b in itertools.combinations(range(n), 2):
        d = abs(u[free[a]] - u[free[b]]) ** alpha
        for s in (1.0, -1.0):
            rows += [r, r]
            cols += [a, b]
            vals += [s, -s]
            rhs.append(d)
            r += 1
    # Pairs with the two pinned end nodes reduce to bounds.
    lo = np.empty(n)
    hi = np.empty(n)
    for a in range(n):
        d = min(abs(u[free[a]] - u[0]), abs(u[free[a]] - u[-1])) ** alpha
        lo[a], hi[a] = -d, d
    A = coo_matrix((vals, (rows, cols)), shape=(r, n)).tocsr()
    res = linprog(-c[free], A_ub=A, b_ub=np.array(rhs), A_eq=q[free][None, :], b_eq=[0.0],
                  bounds=list(zip(lo, hi)), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    assert res.status == 0, res.message
    return -res.fun


def sign_indicator(z):
    return np.sign(z) * (np.abs(z) <= 1.0)


def exp_indicator(z):
    return np.exp(z) * (np.abs(z) <= 1.0)


CASES = [
    ("sign_alpha1_m65", 1.0, 65, sign_indicator),
    ("sign_alpha1_m257", 1.0, 257, sign_indicator),
    ("sign_alpha0.5_m65", 0.5, 65, sign_indicator),
    ("exp_alpha0.5_m65", 0.5, 65, exp_indicator),
    ("exp_alpha1_m129", 1.0, 129, exp_indicator),
]

if __name__ == "__main__":
    want = set(sys.argv[1:])
    for name, alpha, m, f in CASES:
        if want and name not in want:
            continue
        print(f"{name} {solve(alpha, m, f):.15g}", flush=True)
