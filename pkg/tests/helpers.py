"""Brute-force oracles shared by several test modules."""

import itertools

import numpy as np

from flexcert.lp import LinearProgram, solve
from flexcert.polyhedron import HPolyhedron


def vertices(P, tol=1e-9):
    """All vertices of a bounded polyhedron by intersecting row subsets."""
    n = P.dim
    out = []
    for combo in itertools.combinations(range(P.n_rows), n):
        M = P.A[list(combo)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, P.b[list(combo)])
        if np.all(P.slack(x) >= -tol * (1 + np.abs(P.b))):
            if not any(np.allclose(x, v, atol=1e-7) for v in out):
                out.append(x)
    return np.array(out).reshape(-1, n)


def exists_lift(P, keep, x):
    """True iff some values of the other coordinates put (x, rest) in P."""
    rest = [i for i in range(P.dim) if i not in keep]
    b = P.b - P.A[:, keep] @ x
    lp = LinearProgram(np.zeros(len(rest)), P.A[:, rest], ">=", b, lower=-np.inf)
    return solve(lp).optimal


def random_polytope(rng, n, m, box=10.0):
    """Bounding box plus ``m`` random cuts through a neighbourhood of the origin."""
    A = rng.normal(size=(m, n))
    b = -rng.uniform(0.5, box, m) * np.linalg.norm(A, axis=1)
    A = np.vstack([A, np.eye(n), -np.eye(n)])
    b = np.concatenate([b, -box * np.ones(n), -box * np.ones(n)])
    return HPolyhedron(A, b)


ACCEPTANCE_LINES = []


def record(number, title, passed, detail):
    """Log one acceptance verdict; printed again in the terminal summary."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed
