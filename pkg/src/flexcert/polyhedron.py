"""H-representation polyhedra ``{x | A x >= b}``."""

from dataclasses import dataclass

import numpy as np

from .errors import BadDimension
from .lp import LinearProgram, solve

ZERO_COEF = 1e-10


@dataclass(frozen=True)
class HPolyhedron:
    A: np.ndarray
    b: np.ndarray
    labels: tuple = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape[0] != b.size:
            if b.size == 0 and A.size == 0:
                A = A.reshape(0, A.shape[1] if A.ndim == 2 else 0)
            else:
                raise BadDimension(f"A has {A.shape[0]} rows but b has {b.size}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise BadDimension("non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != A.shape[1]:
                raise BadDimension("one label per variable required")
            object.__setattr__(self, "labels", labels)

    @property
    def dim(self):
        return self.A.shape[1]

    @property
    def n_rows(self):
        return self.A.shape[0]

    def __len__(self):
        return self.n_rows

    def slack(self, x):
        """``A x - b`` for one point or a stack of points (rows)."""
        x = np.asarray(x, dtype=float)
        return x @ self.A.T - self.b

    def contains(self, x, tol=1e-9):
        """Membership with a per-row tolerance scaled by the row's 1-norm."""
        s = self.slack(x)
        t = tol * np.maximum(np.abs(self.A).sum(axis=1), 1.0)
        return np.all(s >= -t, axis=-1)

    def normalized(self):
        """Rows scaled to unit max-abs coefficient; zero rows left untouched."""
        scale = np.max(np.abs(self.A), axis=1, initial=0.0)
        scale[scale <= ZERO_COEF] = 1.0
        return HPolyhedron(self.A / scale[:, None], self.b / scale, self.labels)

    def rows(self, idx):
        idx = np.asarray(idx, dtype=int)
        return HPolyhedron(self.A[idx].reshape(-1, self.dim), self.b[idx], self.labels)

    def drop(self, j):
        keep = np.ones(self.n_rows, dtype=bool)
        keep[j] = False
        return self.rows(np.flatnonzero(keep))

    def stack(self, other):
        if other.dim != self.dim:
            raise BadDimension(f"dimension {other.dim} != {self.dim}")
        return HPolyhedron(np.vstack([self.A, other.A]),
                           np.concatenate([self.b, other.b]), self.labels)

    def embed(self, n_total, columns):
        """Lift into ``n_total`` variables, placing our columns at ``columns``."""
        A = np.zeros((self.n_rows, n_total))
        A[:, list(columns)] = self.A
        return HPolyhedron(A, self.b.copy())

    def is_empty(self):
        lp = LinearProgram(np.zeros(self.dim), self.A, ">=", self.b, lower=-np.inf)
        return not solve(lp).optimal

    def bounding_box(self):
        """Per-coordinate (lower, upper) by 2N LPs; +-inf where unbounded."""
        lo = np.full(self.dim, -np.inf)
        hi = np.full(self.dim, np.inf)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = 1.0
            for sign, out in ((1.0, lo), (-1.0, hi)):
                r = solve(LinearProgram(sign * e, self.A, ">=", self.b, lower=-np.inf))
                if r.optimal:
                    out[i] = r.x[i]
        return lo, hi

    def chebyshev_center(self, norm="2"):
        """Center and radius of the largest ball inside, in the given norm.

        The ball ``{x : ||x - c||_r <= R}`` fits under row ``a x >= b`` iff
        ``a c - R ||a||_* >= b`` with ``||.||_*`` the dual norm, so ``r = inf``
        normalizes by the 1-norm and ``r = 1`` by the max-norm.
        """
        dual = {"2": 2, "inf": 1, "1": np.inf}[str(norm)]
        nrm = np.linalg.norm(self.A, ord=dual, axis=1)
        A = np.hstack([self.A, -nrm[:, None]])
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        lower = np.full(self.dim + 1, -np.inf)
        lower[-1] = 0.0
        r = solve(LinearProgram(c, A, ">=", self.b, lower=lower))
        if not r.optimal:
            return None, 0.0
        return r.x[:-1], float(r.x[-1])

    def to_dict(self):
        out = {"A": self.A.tolist(), "b": self.b.tolist()}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_dict(cls, data):
        A = np.asarray(data["A"], dtype=float)
        b = np.asarray(data["b"], dtype=float)
        return cls(A.reshape(b.size, -1), b, data.get("labels"))
