"""Data-driven uncertainty sets for nodal residual demand.

The polyhedral set (PUS) is built from historical observations ``W`` and the
forecasts ``mu`` that preceded them (both T x N, MW):

1. forecast errors ``W - mu`` are demeaned per node,
2. their sample covariance is eigendecomposed,
3. errors are projected on each retained principal direction and the largest
   absolute score gives that direction's half-width,
4. the set is the convex hull of ``d0 +- half_width_k * direction_k``.

The box set is the per-node min/max of the same errors around ``d0``.
"""

import csv
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (ConfigError, DegenerateComponent, EmptyInput, IndexOutOfRange,
                     ShapeMismatch, TooFewSamples)
from .lp import LinearProgram, solve
from .numerics import cholesky, sym_eigen
from .polyhedron import HPolyhedron
from .rng import Stream

MAX_FACET_K = 20
KEEP_EIG_REL = 1e-9
DEGENERATE_REL = 1e-9
SPAN_TOL_REL = 1e-6


@dataclass(frozen=True)
class Pus:
    """``conv{center +- magnitudes[k] * directions[:, k]}``."""

    center: np.ndarray
    directions: np.ndarray      # N x K, orthonormal columns
    magnitudes: np.ndarray      # K, strictly positive

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).ravel()
        V = np.asarray(self.directions, dtype=float).reshape(c.size, -1)
        s = np.asarray(self.magnitudes, dtype=float).ravel()
        if V.shape[1] != s.size or s.size == 0 or s.size > c.size:
            raise ShapeMismatch(f"{V.shape[1]} directions, {s.size} magnitudes, N={c.size}")
        if np.any(s <= 0):
            raise DegenerateComponent("magnitudes must be positive")
        if np.max(np.abs(V.T @ V - np.eye(s.size))) > 1e-8:
            raise ShapeMismatch("directions are not orthonormal")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "directions", V)
        object.__setattr__(self, "magnitudes", s)

    @property
    def n(self):
        return self.center.size

    @property
    def k(self):
        return self.magnitudes.size

    def extremal_points(self):
        """The 2K points ``center + S_k V_k`` then ``center - S_k V_k``."""
        E = (self.directions * self.magnitudes).T
        return np.vstack([self.center + E, self.center - E])

    def bounding_box(self):
        pts = self.extremal_points()
        return BoxSet(pts.min(axis=0), pts.max(axis=0))

    def volume(self):
        """Exact N-volume (zero when K < N): cross-polytope scaled by the magnitudes."""
        if self.k < self.n:
            return 0.0
        return float(2.0 ** self.n / np.prod(np.arange(1, self.n + 1)) * np.prod(self.magnitudes))

    def to_dict(self):
        return {"center": self.center.tolist(), "directions": self.directions.tolist(),
                "magnitudes": self.magnitudes.tolist()}


@dataclass(frozen=True)
class BoxSet:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).ravel()
        hi = np.asarray(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise ShapeMismatch("lower and upper differ in length")
        if np.any(lo > hi):
            raise ConfigError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def n(self):
        return self.lower.size

    def volume(self):
        return float(np.prod(self.upper - self.lower))

    def contains(self, d, tol=1e-9):
        d = np.asarray(d, dtype=float)
        return np.all((d >= self.lower - tol) & (d <= self.upper + tol), axis=-1)

    def expanded(self, frac):
        pad = frac * (self.upper - self.lower)
        return BoxSet(self.lower - pad, self.upper + pad)

    def to_hrep(self):
        eye = np.eye(self.n)
        return HPolyhedron(np.vstack([eye, -eye]),
                           np.concatenate([self.lower, -self.upper]))

    def to_dict(self):
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}


def _pair(W, mu):
    W = np.asarray(W, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    if mu.ndim == 1:
        mu = mu[:, None]
    if W.shape != mu.shape:
        raise ShapeMismatch(f"W is {W.shape}, mu is {mu.shape}")
    return W, mu


def center_data(W, mu):
    """Forecast errors ``W - mu`` with each column's sample mean removed."""
    W, mu = _pair(W, mu)
    if W.shape[0] < 2:
        raise TooFewSamples("need at least two time steps")
    E = W - mu
    return E - E.mean(axis=0)


def covariance(Wc):
    Wc = np.asarray(Wc, dtype=float)
    if Wc.ndim == 1:
        Wc = Wc[:, None]
    T = Wc.shape[0]
    if T < 2:
        raise TooFewSamples("need at least two samples")
    S = Wc.T @ Wc / (T - 1)
    return 0.5 * (S + S.T)


def project_scores(Wc, V, k):
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if not 0 <= k < V.shape[1]:
        raise IndexOutOfRange(f"component {k} of {V.shape[1]}")
    return np.asarray(Wc, dtype=float) @ V[:, k]


def extremal_magnitude(Z):
    Z = np.asarray(Z, dtype=float).ravel()
    if Z.size == 0:
        raise EmptyInput("no scores")
    return float(np.max(np.abs(Z)))


def default_k(eigenvalues):
    """Number of components with eigenvalue at least 1e-9 of the largest."""
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0 or lam[0] <= 0:
        return 0
    return int(np.sum(lam >= KEEP_EIG_REL * lam[0]))


def build_pus(W, mu, K, d0):
    """Polyhedral uncertainty set around forecast ``d0`` from error history.

    ``K=None`` keeps every component whose eigenvalue is not negligible.
    """
    Wc = center_data(W, mu)
    N = Wc.shape[1]
    d0 = np.asarray(d0, dtype=float).ravel()
    if d0.size != N:
        raise ShapeMismatch(f"d0 has {d0.size} entries, data has {N} nodes")
    eig = sym_eigen(covariance(Wc))
    if K is None:
        K = default_k(eig.values)
        if K == 0:
            raise DegenerateComponent("all forecast errors are zero")
    if not 1 <= K <= N:
        raise IndexOutOfRange(f"K={K} outside 1..{N}")
    mags = np.array([extremal_magnitude(project_scores(Wc, eig.vectors, k))
                     for k in range(K)])
    if np.any(mags <= DEGENERATE_REL * mags.max()):
        raise DegenerateComponent(f"zero-width component among the first {K}; lower K")
    return Pus(d0, eig.vectors[:, :K], mags)


def _complement(V):
    """Orthonormal basis of the orthogonal complement of V's columns."""
    N, K = V.shape
    if K == N:
        return np.zeros((N, 0))
    eig = sym_eigen(np.eye(N) - V @ V.T)
    return eig.vectors[:, :N - K]


def pus_to_hrep(p, tau=None):
    """Facets of the set in ``A d >= b`` form.

    2^K sign-pattern facets ``sum_k s_k V_k.(d - d0)/S_k <= 1``; when K < N
    each discarded direction adds a slab ``|V_j.(d - d0)| <= tau``.
    """
    if p.k > MAX_FACET_K:
        raise ConfigError(f"K={p.k} would need 2^{p.k} facets; group the nodes")
    scaled = p.directions / p.magnitudes          # N x K
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=p.k)))
    G = signs @ scaled.T                           # rows: sum_k s_k V_k / S_k
    A = -G
    b = -1.0 - G @ p.center
    comp = _complement(p.directions)
    if comp.shape[1]:
        if tau is None:
            tau = SPAN_TOL_REL * p.magnitudes.max()
        C = comp.T
        A = np.vstack([A, C, -C])
        b = np.concatenate([b, C @ p.center - tau, -(C @ p.center) - tau])
    return HPolyhedron(A, b)


def pus_contains(p, d):
    """Whether ``d`` is a convex combination of the extremal points.

    Returns ``(inside, (w_plus, w_minus))``; the weights are ``None`` if outside.
    """
    d = np.asarray(d, dtype=float).ravel()
    if d.size != p.n:
        raise ShapeMismatch(f"point has {d.size} entries, set has {p.n}")
    E = p.directions * p.magnitudes                # N x K
    A = np.vstack([np.hstack([E, -E]), np.ones((1, 2 * p.k))])
    rhs = np.concatenate([d - p.center, [1.0]])
    r = solve(LinearProgram(np.zeros(2 * p.k), A, "=", rhs, lower=0.0, upper=1.0))
    if not r.optimal:
        return False, None
    return True, (r.x[:p.k], r.x[p.k:])


def box_from_data(W, mu, d0):
    Wc = center_data(W, mu)
    d0 = np.asarray(d0, dtype=float).ravel()
    if d0.size != Wc.shape[1]:
        raise ShapeMismatch(f"d0 has {d0.size} entries, data has {Wc.shape[1]} nodes")
    return BoxSet(d0 + Wc.min(axis=0), d0 + Wc.max(axis=0))


def coverage(p, W, mu):
    """Fraction of historical errors (shifted to ``p.center``) inside the set."""
    pts = p.center + center_data(W, mu)
    return float(np.mean(pus_to_hrep(p).contains(pts, tol=1e-7)))


# grouped sets -------------------------------------------------------------

def build_grouped_pus(W, mu, groups, d0, K=None):
    """One PUS per node group; ``groups`` must partition ``range(N)``."""
    W, mu = _pair(W, mu)
    N = W.shape[1]
    flat = sorted(i for g in groups for i in g)
    if flat != list(range(N)):
        raise ConfigError("node groups must partition the demand nodes")
    d0 = np.asarray(d0, dtype=float).ravel()
    return [(list(g), build_pus(W[:, g], mu[:, g], K, d0[list(g)])) for g in groups]


def grouped_hrep(parts, n):
    blocks = [pus_to_hrep(p).embed(n, g) for g, p in parts]
    out = blocks[0]
    for blk in blocks[1:]:
        out = out.stack(blk)
    return out


def grouped_contains(parts, d):
    d = np.asarray(d, dtype=float)
    return all(pus_contains(p, d[g])[0] for g, p in parts)


def grouped_bounding_box(parts, n):
    lo = np.zeros(n)
    hi = np.zeros(n)
    for g, p in parts:
        bb = p.bounding_box()
        lo[g] = bb.lower
        hi[g] = bb.upper
    return BoxSet(lo, hi)


# synthetic data -----------------------------------------------------------

def target_covariance(mu_profile, eta, alpha):
    """``eta^2 * (alpha mu mu^T off the diagonal, mu_n^2 on it)``."""
    m = np.asarray(mu_profile, dtype=float).ravel()
    S = eta ** 2 * alpha * np.outer(m, m)
    np.fill_diagonal(S, (eta * m) ** 2)
    return S


def synth_generate(mu_profile, eta, alpha, T, seed):
    """Correlated Gaussian forecast errors proportional to a nominal profile.

    Returns ``(W, mu)`` where every row of ``mu`` equals ``mu_profile``.
    """
    m = np.asarray(mu_profile, dtype=float).ravel()
    if np.any(m <= 0):
        raise ConfigError("mu_profile must be positive")
    if not 0.0 <= eta <= 1.0:
        raise ConfigError(f"eta={eta} outside [0, 1]")
    if not -1.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha={alpha} outside [-1, 1]")
    T = int(T)
    mu = np.tile(m, (T, 1))
    if eta == 0.0:
        return mu.copy(), mu
    L = cholesky(target_covariance(m, eta, alpha))
    Z = Stream(seed).normal((T, m.size))
    return mu + Z @ L.T, mu


# csv ----------------------------------------------------------------------

def write_series_csv(path, names, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in X:
            w.writerow([repr(float(v)) for v in row])


def read_series_csv(path):
    """``(names, T x N array)`` from a header-plus-rows CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise EmptyInput(f"{path} is empty")
    names = [h.strip() for h in rows[0]]
    data = [[float(v) for v in r] for r in rows[1:] if r]
    X = np.array(data, dtype=float).reshape(-1, len(names))
    return names, X
