"""Projection of the dispatch/demand polytope onto demand space.

Variables are removed one at a time by Fourier-Motzkin elimination, and the
row set is pruned to a minimal description after every elimination, so the
intermediate systems stay small.
"""

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BadDimension, EmptyBox, InfeasibleInput, RowExplosion
from .lp import LinearProgram, Status, solve
from .polyhedron import HPolyhedron, ZERO_COEF
from .rng import Stream

log = logging.getLogger(__name__)

REDUNDANCY_TOL = 1e-7
DEFAULT_ROW_CAP = 100_000
DUP_DECIMALS = 12
MC_CHUNK = 16384


def _normalize_rows(A, b):
    scale = np.max(np.abs(A), axis=1, initial=0.0)
    nz = scale > ZERO_COEF
    A = A.copy()
    b = b.copy()
    A[nz] /= scale[nz, None]
    b[nz] /= scale[nz]
    A[np.abs(A) < 1e-13] = 0.0
    return A, b, nz


def _clean(A, b, labels, carried=None):
    """Normalize, drop trivially true rows, reject trivially false ones.

    Returns the polyhedron and, per kept row, the matching ``carried`` flag.
    """
    A, b, nz = _normalize_rows(A, b)
    if np.any(b[~nz] > ZERO_COEF):
        raise InfeasibleInput("elimination produced a row 0 >= b with b > 0")
    P = HPolyhedron(A[nz], b[nz], labels)
    flags = None if carried is None else np.asarray(carried, dtype=bool)[nz]
    return P, flags


def _equality_pair(A, b, col, pos, neg):
    """A (pos, neg) row pair that together pin ``A[i] x = b[i]``, or None."""
    if pos.size == 0 or neg.size == 0:
        return None
    Ap = A[pos] / A[pos, col][:, None]
    bp = b[pos] / A[pos, col]
    An = A[neg] / -A[neg, col][:, None]
    bn = b[neg] / -A[neg, col]
    for ip in range(pos.size):
        close = np.all(np.abs(An + Ap[ip]) <= 1e-12 * (1 + np.abs(Ap[ip])), axis=1) & \
            (np.abs(bn + bp[ip]) <= 1e-9 * (1 + abs(bp[ip])))
        hit = np.flatnonzero(close)
        if hit.size:
            return pos[ip], neg[hit[0]]
    return None


def _eliminate(P, var, max_rows=None):
    """Projection plus a flag per output row telling whether it is inherited.

    Inherited rows keep their (non-)redundancy status: rows free of ``var``
    project to themselves, and rows rewritten through an equality describe
    the same set on the equality's hyperplane.
    """
    n = P.dim
    if not 0 <= var < n:
        raise BadDimension(f"variable {var} outside 0..{n - 1}")
    A, b = P.A, P.b
    a = A[:, var]
    zero = np.flatnonzero(np.abs(a) <= ZERO_COEF)
    pos = np.flatnonzero(a > ZERO_COEF)
    neg = np.flatnonzero(a < -ZERO_COEF)
    labels = None if P.labels is None else P.labels[:var] + P.labels[var + 1:]
    rows, rhs = [A[zero]], [b[zero]]
    carried = [np.ones(zero.size, dtype=bool)]
    eq = _equality_pair(A, b, var, pos, neg)
    if eq is not None:
        ip, ineg = eq
        # a_k > 0 pairs with the negative equality row and vice versa
        for rest, piv in ((pos[pos != ip], ineg), (neg[neg != ineg], ip)):
            if rest.size:
                w = np.abs(a[rest] / a[piv])
                rows.append(A[rest] + w[:, None] * A[piv])
                rhs.append(b[rest] + w * b[piv])
                carried.append(np.ones(rest.size, dtype=bool))
    else:
        count = zero.size + pos.size * neg.size
        if max_rows is not None and count > max_rows:
            raise RowExplosion(f"eliminating column {var} would create {count} rows")
        if pos.size and neg.size:
            wp = a[pos][:, None]
            wn = -a[neg][None, :]
            comb = wn[..., None] * A[pos][:, None, :] + wp[..., None] * A[neg][None, :, :]
            rows.append(comb.reshape(-1, n))
            rhs.append((wn * b[pos][:, None] + wp * b[neg][None, :]).ravel())
            carried.append(np.zeros(pos.size * neg.size, dtype=bool))
    A2 = np.delete(np.vstack(rows), var, axis=1)
    return _clean(A2, np.concatenate(rhs), labels, np.concatenate(carried))


def fme_eliminate(P, var, max_rows=None):
    """Project out column ``var``.

    When two rows pin the variable by an equality, the variable is
    substituted out of every other row instead of pairing all positive with
    all negative rows; the result describes the same set with far fewer rows.
    """
    return _eliminate(P, var, max_rows)[0]


def is_redundant(P, j):
    """True if row ``j`` is implied by the other rows."""
    if P.n_rows < 2:
        raise BadDimension("redundancy needs at least two rows")
    others = np.arange(P.n_rows) != j
    return _implied(P.A[others], P.b[others], P.A[j], P.b[j])


def _implied(A, b, a, bj):
    r = solve(LinearProgram(a, A, ">=", b, lower=-np.inf))
    if r.status is Status.INFEASIBLE:
        return True
    if r.status is Status.UNBOUNDED:
        return False
    return r.objective >= bj - REDUNDANCY_TOL * (1.0 + abs(bj))


def _dedupe(P):
    """Indices of rows to keep after collapsing identical normalized rows."""
    A, b, _ = _normalize_rows(P.A, P.b)
    best = {}
    for i in range(P.n_rows):
        key = tuple(np.round(A[i], DUP_DECIMALS) + 0.0)
        if key not in best or b[i] > b[best[key]]:
            best[key] = i
    return sorted(best.values())


def remove_redundant(P, certified=None):
    """Minimal subset of rows describing the same set, order preserved.

    Rows are checked once each against the rows still kept; a row that is
    not implied by a superset of the final rows is not implied by the final
    rows either, so one pass suffices. Rows flagged in ``certified`` are
    known to be irredundant and skip the LP.
    """
    if P.is_empty():
        raise InfeasibleInput("polyhedron is empty")
    if P.n_rows < 2:
        return P
    keep = _dedupe(P)
    kept = list(keep)
    for j in keep:
        if len(kept) < 2:
            break
        if certified is not None and certified[j]:
            continue
        others = [k for k in kept if k != j]
        if _implied(P.A[others], P.b[others], P.A[j], P.b[j]):
            kept.remove(j)
    return P.rows(kept)


@dataclass
class ProjectionReport:
    constraint_counts: list            # (stage label, rows after pruning)
    eliminated_vars: list
    final: HPolyhedron
    raw_counts: list = field(default_factory=list)   # rows before pruning

    def to_dict(self):
        return {"constraint_counts": [list(s) for s in self.constraint_counts],
                "raw_counts": [list(s) for s in self.raw_counts],
                "eliminated_vars": list(self.eliminated_vars),
                "final_rows": self.final.n_rows,
                "final_labels": list(self.final.labels or ())}

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def project_loadability(gd, gen_vars, max_rows=DEFAULT_ROW_CAP):
    """Eliminate ``gen_vars`` in the given order, pruning after each step."""
    gen_vars = [int(v) for v in gen_vars]
    if len(set(gen_vars)) != len(gen_vars):
        raise BadDimension("gen_vars must be distinct")
    if any(not 0 <= v < gd.dim for v in gen_vars):
        raise BadDimension("gen_vars index out of range")
    labels = gd.labels or tuple(f"x{i}" for i in range(gd.dim))
    P = HPolyhedron(gd.A, gd.b, labels)
    names = [labels[v] for v in gen_vars]
    raw = [("assembled", P.n_rows)]
    P = remove_redundant(P)
    counts = [("assembled", P.n_rows)]
    for name in names:
        P, carried = _eliminate(P, P.labels.index(name), max_rows=max_rows)
        stage = f"eliminated {name}"
        raw.append((stage, P.n_rows))
        if P.n_rows > max_rows:
            raise RowExplosion(f"{P.n_rows} rows after {stage}")
        P = remove_redundant(P, certified=carried)
        counts.append((stage, P.n_rows))
        log.debug("%s: %d -> %d rows", stage, raw[-1][1], P.n_rows)
    return ProjectionReport(counts, names, P, raw)


def write_rows_csv(path, P):
    """One CSV line per row ``a_1..a_N, b`` of ``a d >= b``."""
    names = list(P.labels or (f"x{i}" for i in range(P.dim)))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["b"])
        for a, bj in zip(P.A, P.b):
            w.writerow([repr(float(v)) for v in a] + [repr(float(bj))])


def read_rows_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    names = rows[0][:-1]
    M = np.array([[float(v) for v in r] for r in rows[1:] if r]).reshape(-1, len(names) + 1)
    return HPolyhedron(M[:, :-1], M[:, -1], names)


def mc_volume(P, bbox, n_samples, seed, threads=1, chunk=MC_CHUNK):
    """Hit-or-miss volume of ``P`` inside ``bbox``; returns (estimate, std error).

    ``P`` needs a vectorized ``contains``. ``bbox`` must contain ``P``; that is
    not checked. Chunk ``i`` draws from substream ``i`` of ``seed``, so the
    estimate does not depend on ``threads``.
    """
    lo, hi = np.asarray(bbox.lower, float), np.asarray(bbox.upper, float)
    width = hi - lo
    if np.any(~np.isfinite(width)) or np.any(width <= 0):
        raise EmptyBox("bounding box has a non-positive or infinite side")
    n_samples = int(n_samples)
    if n_samples <= 0:
        raise BadDimension("n_samples must be positive")
    root = Stream(seed)
    sizes = [min(chunk, n_samples - s) for s in range(0, n_samples, chunk)]

    def hits(i):
        u = root.substream(i).uniform((sizes[i], lo.size))
        return int(np.count_nonzero(P.contains(lo + u * width)))

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            total = sum(ex.map(hits, range(len(sizes))))
    else:
        total = sum(hits(i) for i in range(len(sizes)))
    box_vol = float(np.prod(width))
    p = total / n_samples
    return box_vol * p, box_vol * np.sqrt(p * (1.0 - p) / n_samples)
