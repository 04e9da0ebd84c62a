"""Dense two-phase primal simplex.

Problems are stated as::

    minimize    c @ x
    subject to  A[j] @ x  (>= | <= | =)  b[j]
                lower <= x <= upper

Variable bounds default to ``0 <= x < inf``, as in most LP front ends; pass
``lower=-np.inf`` for free variables.

The pivot loop runs in the compiled kernel when available (see ``_backend``).
Dantzig pricing is used until ``3 * (J + N)`` degenerate pivots have been
made, after which Bland's rule takes over for the rest of the solve. Ratio
ties always go to the lowest basic variable index, so a solve is a
deterministic function of its input.

Dual values are read off the final basis. For degenerate optima the dual is
not unique; any valid one may be returned.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._backend import kernels
from .errors import DimensionMismatch, NumericalBreakdown

# All solver tolerances live here.
FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIV_TOL = 1e-9
ZERO_ROW_TOL = 1e-12
RESIDUAL_TOL = 1e-6

GE, LE, EQ = ">=", "<=", "="
_SENSES = {GE: GE, LE: LE, EQ: EQ, "==": EQ, "ge": GE, "le": LE, "eq": EQ}


class Status(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    c: np.ndarray
    A: np.ndarray
    senses: list
    b: np.ndarray
    lower: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        A = np.asarray(self.A, dtype=float)
        if n == 0:
            A = np.zeros((len(self.b), 0))
        elif A.size % n:
            raise DimensionMismatch(f"A has {A.size} entries, not a multiple of {n}")
        self.A = A.reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float).ravel()
        if isinstance(self.senses, str):
            self.senses = [self.senses] * self.b.size
        try:
            self.senses = [_SENSES[s] for s in self.senses]
        except KeyError as exc:
            raise DimensionMismatch(f"unknown relation {exc.args[0]!r}") from None
        self.lower = np.broadcast_to(
            np.asarray(0.0 if self.lower is None else self.lower, dtype=float),
            (n,)).copy()
        self.upper = np.broadcast_to(
            np.asarray(np.inf if self.upper is None else self.upper, dtype=float),
            (n,)).copy()
        m = self.b.size
        if self.A.shape != (m, n) or len(self.senses) != m:
            raise DimensionMismatch(
                f"A is {self.A.shape}, b has {m} rows, {len(self.senses)} senses, "
                f"c has {n} entries")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))
                and np.all(np.isfinite(self.c))):
            raise DimensionMismatch("non-finite coefficients")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise DimensionMismatch("NaN bounds")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise DimensionMismatch("lower bound +inf or upper bound -inf")

    @property
    def n_vars(self):
        return self.c.size


@dataclass
class LpOutcome:
    status: Status
    x: np.ndarray = None
    objective: float = None
    duals: np.ndarray = None
    reduced_costs: np.ndarray = None
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def optimal(self):
        return self.status is Status.OPTIMAL


class _StandardForm:
    """min cs @ z, As z = bs, z >= 0, bs >= 0, with maps back to x."""

    def __init__(self, lp):
        n = lp.n_vars
        cols = []      # (orig var, sign) per standard column
        offset = np.zeros(n)
        bound_rows = []
        for i in range(n):
            lo, up = lp.lower[i], lp.upper[i]
            if np.isfinite(lo):
                offset[i] = lo
                cols.append((i, 1.0))
                if np.isfinite(up):
                    bound_rows.append((len(cols) - 1, up - lo))
            elif np.isfinite(up):
                offset[i] = up
                cols.append((i, -1.0))
            else:
                cols.append((i, 1.0))
                cols.append((i, -1.0))
        ns = len(cols)
        M = np.zeros((n, ns))
        for k, (i, sgn) in enumerate(cols):
            M[i, k] = sgn
        self.M = M
        self.offset = offset

        A = lp.A @ M
        b = lp.b - lp.A @ offset
        senses = list(lp.senses)
        m0 = A.shape[0]
        if bound_rows:
            Ab = np.zeros((len(bound_rows), ns))
            for r, (k, width) in enumerate(bound_rows):
                Ab[r, k] = 1.0
            A = np.vstack([A, Ab])
            b = np.concatenate([b, [w for _, w in bound_rows]])
            senses += [LE] * len(bound_rows)

        # row scaling and sign normalisation; remember the factor per row
        scale = np.max(np.abs(A), axis=1) if A.size else np.zeros(A.shape[0])
        self.trivially_infeasible = False
        keep = []
        for r in range(A.shape[0]):
            if scale[r] <= ZERO_ROW_TOL:
                s, rhs = senses[r], b[r]
                tol = FEAS_TOL * (1.0 + abs(rhs))
                if (s == GE and rhs > tol) or (s == LE and rhs < -tol) or \
                        (s == EQ and abs(rhs) > tol):
                    self.trivially_infeasible = True
            else:
                keep.append(r)
        keep = np.array(keep, dtype=int)
        factor = np.zeros(A.shape[0])
        factor[keep] = 1.0 / scale[keep]
        flip = np.where(b < 0, -1.0, 1.0)
        factor *= flip
        self.row_factor = factor[:m0]
        self.m_orig = m0

        A = A[keep] * factor[keep, None]
        b = b[keep] * factor[keep]
        senses = [senses[r] for r in keep]
        for k, r in enumerate(keep):
            if flip[r] < 0 and senses[k] != EQ:
                senses[k] = GE if senses[k] == LE else LE
        self.kept = keep
        self.A, self.b, self.senses = A, b, senses
        self.c = lp.c @ M
        self.n_struct = ns


def _max_iter(m, n):
    return 50 * (m + n) + 1000


def solve(lp: LinearProgram) -> LpOutcome:
    """Solve ``lp``; never raises for infeasible or unbounded problems."""
    sf = _StandardForm(lp)
    if sf.trivially_infeasible:
        return LpOutcome(Status.INFEASIBLE, info={"phase": 0})
    m, ns = sf.A.shape

    # columns: structural | slack/surplus | artificial
    slack_cols, art_rows = [], []
    for r, s in enumerate(sf.senses):
        if s != EQ:
            slack_cols.append(r)
        if s != LE:
            art_rows.append(r)
    n_sl, n_art = len(slack_cols), len(art_rows)
    ncol = ns + n_sl + n_art
    T = np.zeros((m + 1, ncol + 1))
    T[:m, :ns] = sf.A
    T[:m, -1] = sf.b
    basis = np.empty(m, dtype=np.intp)
    ident_col = np.empty(m, dtype=np.intp)   # column that started as e_r
    for k, r in enumerate(slack_cols):
        if sf.senses[r] == LE:
            T[r, ns + k] = 1.0
            basis[r] = ns + k
            ident_col[r] = ns + k
        else:
            T[r, ns + k] = -1.0
    for k, r in enumerate(art_rows):
        col = ns + n_sl + k
        T[r, col] = 1.0
        basis[r] = col
        ident_col[r] = col
    is_art = np.zeros(ncol, dtype=bool)
    is_art[ns + n_sl:] = True

    iters = 0
    max_iter = _max_iter(m, ncol)
    bland_after = 3 * (m + ns)
    if n_art:
        T[m, :] = 0.0
        T[m, :ncol] = -T[art_rows, :ncol].sum(axis=0)
        T[m, ns + n_sl:ncol] = 0.0
        T[m, -1] = -T[art_rows, -1].sum()
        allowed = np.ones(ncol, dtype=np.uint8)
        status, it = kernels.simplex_run(T, basis, allowed, max_iter,
                                         OPT_TOL, PIV_TOL, bland_after)
        iters += it
        if status == 2:
            raise NumericalBreakdown("phase 1 hit the iteration cap")
        phase1 = -T[m, -1]
        if phase1 > FEAS_TOL * (1.0 + np.max(np.abs(sf.b), initial=0.0)):
            return LpOutcome(Status.INFEASIBLE, iterations=iters,
                             info={"phase": 1, "phase1_objective": phase1})
        # drive zero-level artificials out of the basis where possible
        for r in range(m):
            if is_art[basis[r]]:
                row = T[r, :ncol]
                cand = np.flatnonzero(~is_art & (np.abs(row) > PIV_TOL))
                if cand.size:
                    j = cand[np.argmax(np.abs(row[cand]))]
                    kernels.pivot(T, r, j)
                    basis[r] = j

    # phase 2: artificials may stay basic at level zero but never re-enter
    cfull = np.zeros(ncol)
    cfull[:ns] = sf.c
    T[m, :ncol] = cfull - cfull[basis] @ T[:m, :ncol]
    T[m, -1] = -cfull[basis] @ T[:m, -1]
    allowed = (~is_art).astype(np.uint8)
    status, it = kernels.simplex_run(T, basis, allowed, max_iter,
                                     OPT_TOL, PIV_TOL, bland_after)
    iters += it
    if status == 2:
        raise NumericalBreakdown("phase 2 hit the iteration cap")
    if status == 1:
        return LpOutcome(Status.UNBOUNDED, iterations=iters, info={"phase": 2})

    z = np.zeros(ncol)
    z[basis] = np.maximum(T[:m, -1], 0.0)
    x = sf.offset + sf.M @ z[:ns]

    # y_r = c_B B^-1 e_r: the negated reduced cost of the column that started
    # as e_r (slacks and artificials both cost zero in phase 2)
    y_std = -T[m, ident_col]
    y = np.zeros(lp.b.size)
    for k, r in enumerate(sf.kept):
        if r < sf.m_orig:
            y[r] = y_std[k] * sf.row_factor[r]
    # rounding can leave 1e-16 excursions outside the bounds
    x = np.minimum(np.maximum(x, lp.lower), lp.upper)
    reduced = lp.c - lp.A.T @ y
    obj = float(lp.c @ x)
    out = LpOutcome(Status.OPTIMAL, x=x, objective=obj, duals=y,
                    reduced_costs=reduced, iterations=iters)
    _check_residual(lp, out)
    return out


def primal_residual(lp, x):
    """Largest constraint or bound violation of ``x`` (0 when feasible)."""
    ax = lp.A @ x
    worst = 0.0
    for j, s in enumerate(lp.senses):
        if s == GE:
            worst = max(worst, lp.b[j] - ax[j])
        elif s == LE:
            worst = max(worst, ax[j] - lp.b[j])
        else:
            worst = max(worst, abs(ax[j] - lp.b[j]))
    worst = max(worst, np.max(lp.lower - x, initial=0.0),
                np.max(x - lp.upper, initial=0.0))
    return worst


def _check_residual(lp, out):
    res = primal_residual(lp, out.x)
    scale = 1.0 + np.max(np.abs(lp.b), initial=0.0)
    out.info["primal_residual"] = res
    if res > RESIDUAL_TOL * scale:
        raise NumericalBreakdown(f"primal residual {res:.3g} after solve")


def feasible_point(A, senses, b, lower=-np.inf, upper=np.inf):
    """A feasible point of the given constraint system, or None."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    out = solve(LinearProgram(np.zeros(A.shape[1]), A, senses, b, lower, upper))
    return out.x if out.optimal else None
