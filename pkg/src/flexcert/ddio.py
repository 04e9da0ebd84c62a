"""Distance-to-boundary assessment of a demand point against a loadability set.

For every row ``j`` of ``D = {d | A d >= b}`` the subproblem finds the
smallest perturbation ``s`` (1-norm or max-norm) that moves ``d0`` onto the
hyperplane of row ``j`` while staying inside ``D``. The nearest row yields a
cost vector and dual weights under which ``d0 - s`` is optimal for
``min c.x  s.t. A x >= b``.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (BadDimension, InfeasibleInput, NotMinimal, NumericalBreakdown,
                     SubproblemInfeasible)
from .loadability import is_redundant
from .lp import LinearProgram, solve
from .polyhedron import HPolyhedron

INTERIOR, BOUNDARY, EXTERIOR = "Interior", "Boundary", "Exterior"
TIE_TOL = 1e-9
VIOLATION_TOL = 1e-9
BOUNDARY_TOL = 1e-7
DEGENERATE_MEAN = 1e-12


def _norm_key(r):
    key = str(r).lower()
    if key in ("1", "1.0", "l1"):
        return "1"
    if key in ("inf", "infinity", "max", "linf"):
        return "inf"
    raise BadDimension(f"unsupported norm {r!r}; use 1 or inf")


def _vec_norm(s, r):
    return float(np.abs(s).sum()) if r == "1" else float(np.abs(s).max(initial=0.0))


def ddio_subproblem(D, d0, j, r):
    """Smallest ``s`` with ``d0 - s`` in ``D`` and on the hyperplane of row ``j``."""
    r = _norm_key(r)
    d0 = np.asarray(d0, dtype=float).ravel()
    A, b = D.A, D.b
    J, N = A.shape
    if d0.size != N:
        raise BadDimension(f"d0 has {d0.size} entries, set has dimension {N}")
    if not 0 <= j < J:
        raise BadDimension(f"row {j} outside 0..{J - 1}")
    others = np.arange(J) != j
    rhs = b - A @ d0             # A (d0 - s) >= b  <=>  -A s >= b - A d0
    if r == "1":
        # s = p - m, p, m >= 0
        c = np.ones(2 * N)
        M = np.hstack([-A, A])
        lp = LinearProgram(c, np.vstack([M[others], M[j]]),
                           [">="] * (J - 1) + ["="], np.append(rhs[others], rhs[j]))
    else:
        # variables (s, t); t >= |s_n|
        c = np.zeros(N + 1)
        c[-1] = 1.0
        M = np.hstack([-A, np.zeros((J, 1))])
        box = np.hstack([np.vstack([np.eye(N), -np.eye(N)]), np.ones((2 * N, 1))])
        lower = np.full(N + 1, -np.inf)
        lower[-1] = 0.0
        lp = LinearProgram(c, np.vstack([M[others], box, M[j]]),
                           [">="] * (J - 1 + 2 * N) + ["="],
                           np.concatenate([rhs[others], np.zeros(2 * N), [rhs[j]]]),
                           lower=lower)
    out = solve(lp)
    if not out.optimal:
        raise SubproblemInfeasible(f"row {j}: subproblem {out.status.value}")
    return out.x[:N] - out.x[N:] if r == "1" else out.x[:N].copy()


@dataclass
class DdioResult:
    s: np.ndarray            # J x N, one perturbation per row
    distances: np.ndarray    # ||s_j||_r
    j_star: list
    rho: float
    rdc: float
    rdc_shed: float          # positive components over violated rows
    rdc_spill: float         # negative components over violated rows
    violated_rows: list
    classification: str
    norm_used: str
    degenerate: bool = False

    @property
    def min_distance(self):
        return float(self.distances[self.j_star[0]])

    def to_dict(self):
        return {"classification": self.classification, "norm": self.norm_used,
                "rho": self.rho, "rdc": self.rdc, "rdc_shed": self.rdc_shed,
                "rdc_spill": self.rdc_spill, "degenerate": self.degenerate,
                "j_star": list(self.j_star), "violated_rows": list(self.violated_rows),
                "min_distance": self.min_distance, "distances": self.distances.tolist(),
                "s": self.s.tolist()}


def check_minimal(D, mode="spot"):
    """Raise NotMinimal if a checked row is redundant.

    ``mode`` is ``"spot"`` (first, middle and last row), ``"full"`` or ``"off"``.
    """
    if mode == "off" or D.n_rows < 2:
        return
    if mode == "spot":
        rows = sorted({0, D.n_rows // 2, D.n_rows - 1})
    elif mode == "full":
        rows = range(D.n_rows)
    else:
        raise BadDimension(f"unknown minimality mode {mode!r}")
    for j in rows:
        if is_redundant(D, j):
            raise NotMinimal(f"row {j} is redundant; reduce the set first")


def ddio_assess(D, d0, r, minimality="spot", threads=1):
    r = _norm_key(r)
    d0 = np.asarray(d0, dtype=float).ravel()
    if d0.size != D.dim:
        raise BadDimension(f"d0 has {d0.size} entries, set has dimension {D.dim}")
    if D.n_rows == 0:
        raise BadDimension("set has no rows")
    if D.is_empty():
        raise InfeasibleInput("loadability set is empty")
    check_minimal(D, minimality)

    def one(j):
        return ddio_subproblem(D, d0, j, r)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            S = list(ex.map(one, range(D.n_rows)))
    else:
        S = [one(j) for j in range(D.n_rows)]
    S = np.array(S).reshape(D.n_rows, D.dim)
    dist = np.array([_vec_norm(s, r) for s in S])
    dmin = float(dist.min())
    j_star = [int(j) for j in np.flatnonzero(dist <= dmin + TIE_TOL)]
    mean = float(dist.mean())
    degenerate = mean <= DEGENERATE_MEAN
    rho = 0.0 if degenerate else float(np.clip(1.0 - dmin / mean, 0.0, 1.0))
    violated = [int(j) for j in np.flatnonzero(D.A @ d0 < D.b - VIOLATION_TOL)]
    sv = S[violated]
    rdc = float(sv.sum())
    if violated:
        cls = EXTERIOR
    elif dmin <= BOUNDARY_TOL:
        cls = BOUNDARY
    else:
        cls = INTERIOR
    return DdioResult(s=S, distances=dist, j_star=j_star, rho=rho, rdc=rdc,
                      rdc_shed=float(sv[sv > 0].sum()), rdc_spill=float(sv[sv < 0].sum()),
                      violated_rows=violated, classification=cls, norm_used=r,
                      degenerate=degenerate)


@dataclass
class InverseCertificate:
    c: np.ndarray
    y: np.ndarray
    s: np.ndarray
    row: int

    def residuals(self, D, d0):
        """Dual feasibility, duality gap (relative), and primal infeasibility."""
        x = np.asarray(d0, dtype=float) - self.s
        pc, dv = float(self.c @ x), float(D.b @ self.y)
        return {"dual": float(np.abs(D.A.T @ self.y - self.c).max()),
                "gap": abs(pc - dv) / max(1.0, abs(pc), abs(dv)),
                "primal": float(max(0.0, np.max(D.b - D.A @ x))),
                "c_norm": abs(float(np.abs(self.c).sum()) - 1.0),
                "y_min": float(self.y.min())}

    def to_dict(self):
        return {"row": self.row, "c": self.c.tolist(), "y": self.y.tolist(),
                "s": self.s.tolist()}


def recover_certificate(D, d0, result):
    """Cost vector and duals certifying ``d0 - s`` optimal for ``min c.x, A x >= b``."""
    j = min(result.j_star)
    a = D.A[j]
    n1 = float(np.abs(a).sum())
    y = np.zeros(D.n_rows)
    y[j] = 1.0 / n1
    cert = InverseCertificate(c=a / n1, y=y, s=result.s[j].copy(), row=j)
    res = cert.residuals(D, d0)
    if res["dual"] > 1e-7 or res["gap"] > 1e-6 or res["primal"] > 1e-7 or res["c_norm"] > 1e-9:
        raise NumericalBreakdown(f"certificate check failed: {res}")
    return cert


# sweeps ---------------------------------------------------------------------

@dataclass
class SweepRow:
    d0: np.ndarray
    rho: float
    rdc: float
    classification: str


def rho_sweep(D, grid, r, minimality="spot", threads=1):
    """Assess every point of ``grid``; the minimality check runs once."""
    check_minimal(D, minimality)
    out = []
    for d0 in np.atleast_2d(np.asarray(grid, dtype=float)):
        res = ddio_assess(D, d0, r, minimality="off", threads=threads)
        out.append(SweepRow(d0.copy(), res.rho, res.rdc, res.classification))
    return out


def rect_grid(lower, upper, n):
    """Tensor grid with ``n`` points per axis, last axis fastest."""
    axes = [np.linspace(lo, hi, int(n)) for lo, hi in zip(lower, upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def ray_grid(nominal, n, spread=0.14):
    """Uniform scaling of ``nominal`` from ``1 - spread`` to ``1 + spread``."""
    f = np.linspace(1.0 - spread, 1.0 + spread, int(n))
    return f[:, None] * np.asarray(nominal, dtype=float)[None, :]


def write_sweep_csv(path, rows, names=None):
    n = rows[0].d0.size if rows else 0
    names = list(names) if names is not None else [f"d{i}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["rho", "rdc", "class"])
        for row in rows:
            w.writerow([repr(float(v)) for v in row.d0] +
                       [repr(row.rho), repr(row.rdc), row.classification])


def unit_box(n):
    """``[0, 1]^n`` as an H-polyhedron; handy for examples and tests."""
    return HPolyhedron(np.vstack([np.eye(n), -np.eye(n)]),
                       np.concatenate([np.zeros(n), -np.ones(n)]))
