"""DC network model, admissibility LP and the generation-demand polytope.

Generation is aggregated per bus: bus ``n`` contributes one dispatch variable
``g_n`` bounded by the sum of its committed units' reserve windows
``[g0 - r_dn, g0 + r_up]``. Residual demand lives on ``case.demand_buses``
only, and so do the imbalance slacks of the admissibility LP; buses without
residual demand carry no load and cannot shed or spill.
"""

import json
from collections import deque
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import BadDimension, Disconnected, InvalidCase, NumericalError, SingularSusceptance
from .lp import LinearProgram, solve
from .polyhedron import HPolyhedron, ZERO_COEF
from .uncertainty import BoxSet

DEFAULT_GAMMA = 1000.0
CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True)
class Line:
    frm: int
    to: int
    fmax: float
    x: float = None
    ptdf: tuple = None       # explicit sensitivities, one per bus in case order


@dataclass(frozen=True)
class Generator:
    bus: int
    gmin: float
    gmax: float
    name: str = ""


@dataclass(frozen=True)
class GenSchedule:
    u: int
    g0: float
    r_up: float
    r_dn: float

    @property
    def window(self):
        return (self.g0 - self.r_dn, self.g0 + self.r_up)


@dataclass
class NetworkCase:
    buses: list
    lines: list
    generators: list
    slack: int
    gamma: float = DEFAULT_GAMMA
    demand_buses: list = None
    nominal_demand: np.ndarray = None
    name: str = ""
    notes: str = ""
    _ptdf: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.buses = [int(b) for b in self.buses]
        if len(set(self.buses)) != len(self.buses):
            raise InvalidCase("duplicate bus ids")
        if self.slack not in self.buses:
            raise InvalidCase(f"slack bus {self.slack} not in bus list")
        if self.demand_buses is None:
            self.demand_buses = list(self.buses)
        self.demand_buses = [int(b) for b in self.demand_buses]
        for b in self.demand_buses:
            if b not in self.buses:
                raise InvalidCase(f"demand bus {b} not in bus list")
        for ln in self.lines:
            if ln.fmax <= 0:
                raise InvalidCase(f"line {ln.frm}-{ln.to}: fmax must be positive")
            if ln.frm not in self.buses or ln.to not in self.buses:
                raise InvalidCase(f"line {ln.frm}-{ln.to} references unknown bus")
            if ln.ptdf is None and (ln.x is None or ln.x <= 0):
                raise InvalidCase(f"line {ln.frm}-{ln.to}: needs x > 0 or a ptdf row")
            if ln.ptdf is not None and len(ln.ptdf) != len(self.buses):
                raise InvalidCase(f"line {ln.frm}-{ln.to}: ptdf row length")
        for g in self.generators:
            if g.bus not in self.buses:
                raise InvalidCase(f"generator at unknown bus {g.bus}")
            if g.gmin > g.gmax:
                raise InvalidCase(f"generator at bus {g.bus}: gmin > gmax")
        if self.gamma <= 0:
            raise InvalidCase("gamma must be positive")
        if self.nominal_demand is not None:
            self.nominal_demand = np.asarray(self.nominal_demand, dtype=float)
            if self.nominal_demand.size != len(self.demand_buses):
                raise InvalidCase("nominal_demand needs one entry per demand bus")

    @property
    def n_buses(self):
        return len(self.buses)

    @property
    def n_demand(self):
        return len(self.demand_buses)

    def bus_index(self, bus):
        return self.buses.index(bus)

    def ptdf(self):
        if self._ptdf is None:
            self._ptdf = compute_ptdf(self)
        return self._ptdf


def compute_ptdf(case):
    """L x N_bus DC sensitivities; column of the slack bus is zero.

    Entry (l, n) is the flow on line l, in its from->to direction, per unit
    injected at bus n and withdrawn at the slack bus.
    """
    n = case.n_buses
    idx = {b: i for i, b in enumerate(case.buses)}
    reactive = [ln for ln in case.lines if ln.ptdf is None]
    H = np.zeros((len(case.lines), n))
    if reactive:
        adj = {i: set() for i in range(n)}
        B = np.zeros((n, n))
        for ln in reactive:
            i, j = idx[ln.frm], idx[ln.to]
            y = 1.0 / ln.x
            B[i, i] += y
            B[j, j] += y
            B[i, j] -= y
            B[j, i] -= y
            adj[i].add(j)
            adj[j].add(i)
        s = idx[case.slack]
        seen = {s}
        todo = deque([s])
        while todo:
            for j in adj[todo.popleft()]:
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
        if len(seen) != n:
            raise Disconnected(f"buses {sorted(case.buses[i] for i in set(range(n)) - seen)}"
                               " are not connected to the slack bus")
        keep = [i for i in range(n) if i != s]
        Bred = B[np.ix_(keep, keep)]
        if np.linalg.cond(Bred) > 1e12:
            raise SingularSusceptance("reduced susceptance matrix is singular")
        X = np.zeros((n, n))
        X[np.ix_(keep, keep)] = np.linalg.inv(Bred)
    for l, ln in enumerate(case.lines):
        if ln.ptdf is not None:
            H[l] = ln.ptdf
        else:
            i, j = idx[ln.frm], idx[ln.to]
            H[l] = (X[i] - X[j]) / ln.x
    H[np.abs(H) < 1e-14] = 0.0
    return H


# commitment -----------------------------------------------------------------

def validate_commitment(case, zeta):
    if len(zeta) != len(case.generators):
        raise InvalidCase(f"{len(zeta)} schedules for {len(case.generators)} generators")
    for k, (g, z) in enumerate(zip(case.generators, zeta)):
        if z.u not in (0, 1):
            raise InvalidCase(f"generator {k}: u must be 0 or 1")
        if z.r_up < 0 or z.r_dn < 0:
            raise InvalidCase(f"generator {k}: negative reserve")
        if z.u:
            lo, hi = z.window
            tol = CONSISTENCY_TOL * (1.0 + abs(g.gmax))
            if lo < g.gmin - tol or hi > g.gmax + tol:
                raise InvalidCase(
                    f"generator {k}: window [{lo}, {hi}] outside [{g.gmin}, {g.gmax}]")


def bus_windows(case, zeta):
    """``{bus: (lo, hi)}`` of aggregated dispatch for buses with committed units."""
    validate_commitment(case, zeta)
    out = {}
    for g, z in zip(case.generators, zeta):
        if not z.u:
            continue
        lo, hi = z.window
        a, b = out.get(g.bus, (0.0, 0.0))
        out[g.bus] = (a + lo, b + hi)
    return {b: out[b] for b in case.buses if b in out}


# admissibility LP -----------------------------------------------------------

@dataclass
class BaResult:
    epsilon: np.ndarray      # per demand bus; served demand is d + epsilon
    objective: float
    g_hat: np.ndarray        # per bus
    q: np.ndarray            # per bus
    d: np.ndarray            # per demand bus

    @property
    def imbalance(self):
        """Total |epsilon| in MW (objective / gamma)."""
        return float(np.abs(self.epsilon).sum())

    @property
    def shed(self):
        """Signed imbalance, positive for load shedding, negative for spillage."""
        return float(-self.epsilon.sum())

    def to_dict(self):
        return {"objective": self.objective, "imbalance_mw": self.imbalance,
                "shed_mw": self.shed, "epsilon": self.epsilon.tolist(),
                "g_hat": self.g_hat.tolist(), "q": self.q.tolist(), "d": self.d.tolist()}


def solve_ba(case, zeta, d=None, d_range=None):
    """Minimum priced imbalance for fixed demand ``d`` or demand in ``d_range``.

    ``d_range`` may be a BoxSet or an HPolyhedron over the demand buses.
    """
    if (d is None) == (d_range is None):
        raise BadDimension("give exactly one of d and d_range")
    nb, nd = case.n_buses, case.n_demand
    win = bus_windows(case, zeta)
    gbuses = list(win)
    ng = len(gbuses)
    H = case.ptdf()
    bidx = {b: i for i, b in enumerate(case.buses)}
    dcol = [bidx[b] for b in case.demand_buses]
    d_var = d is None
    if not d_var:
        d = np.asarray(d, dtype=float).ravel()
        if d.size != nd:
            raise BadDimension(f"d has {d.size} entries, case has {nd} demand buses")

    # x = [g (ng) | q (nb) | e+ (nd) | e- (nd) | d (nd if variable)]
    og, oq, oep, oem, od = 0, ng, ng + nb, ng + nb + nd, ng + nb + 2 * nd
    nv = od + (nd if d_var else 0)
    lower = np.full(nv, -np.inf)
    upper = np.full(nv, np.inf)
    for k, b in enumerate(gbuses):
        lower[og + k], upper[og + k] = win[b]
    lower[oep:od] = 0.0
    rows, senses, rhs = [], [], []
    for i in range(nb):
        r = np.zeros(nv)
        r[oq + i] = 1.0
        bus = case.buses[i]
        if bus in win:
            r[og + gbuses.index(bus)] = -1.0
        val = 0.0
        if i in dcol:
            k = dcol.index(i)
            r[oep + k] = 1.0
            r[oem + k] = -1.0
            if d_var:
                r[od + k] = 1.0
            else:
                val = -d[k]
        rows.append(r)
        senses.append("=")
        rhs.append(val)
    r = np.zeros(nv)
    r[oq:oq + nb] = 1.0
    rows.append(r)
    senses.append("=")
    rhs.append(0.0)
    for l, ln in enumerate(case.lines):
        r = np.zeros(nv)
        r[oq:oq + nb] = H[l]
        rows += [r, r]
        senses += ["<=", ">="]
        rhs += [ln.fmax, -ln.fmax]
    if d_var:
        if isinstance(d_range, BoxSet):
            if d_range.n != nd:
                raise BadDimension("demand box dimension")
            lower[od:] = d_range.lower
            upper[od:] = d_range.upper
        else:
            if d_range.dim != nd:
                raise BadDimension("demand polyhedron dimension")
            for a, bb in zip(d_range.A, d_range.b):
                r = np.zeros(nv)
                r[od:] = a
                rows.append(r)
                senses.append(">=")
                rhs.append(bb)
    c = np.zeros(nv)
    c[oep:od] = case.gamma
    out = solve(LinearProgram(c, np.array(rows), senses, rhs, lower, upper))
    if not out.optimal:
        # free slacks make the LP feasible whenever the demand range is nonempty
        raise NumericalError(f"admissibility LP reported {out.status.value}")
    x = out.x
    g_hat = np.zeros(nb)
    for k, b in enumerate(gbuses):
        g_hat[bidx[b]] = x[og + k]
    eps = x[oep:oem] - x[oem:od]
    return BaResult(epsilon=eps, objective=float(case.gamma * np.abs(eps).sum()),
                    g_hat=g_hat, q=x[oq:oep].copy(),
                    d=x[od:].copy() if d_var else d.copy())


# generation-demand polytope -------------------------------------------------

def assemble_gd_polytope(case, zeta, demand_set=None):
    """Rows of the dispatch/demand feasibility region in ``A (g, d) >= b`` form.

    Variables are the aggregated dispatch of every bus with a committed unit
    (ascending bus order) followed by demand at each demand bus. Rows, in
    order: dispatch windows, line limits, the balance equality as an opposing
    pair, then ``demand_set`` (an HPolyhedron over demand) if given.
    """
    win = bus_windows(case, zeta)
    gbuses = sorted(win, key=case.bus_index)
    ng, nd = len(gbuses), case.n_demand
    nv = ng + nd
    labels = tuple(f"g{b}" for b in gbuses) + tuple(f"d{b}" for b in case.demand_buses)
    rows, rhs = [], []
    for k, b in enumerate(gbuses):
        lo, hi = win[b]
        r = np.zeros(nv)
        r[k] = 1.0
        rows += [r, -r]
        rhs += [lo, -hi]
    H = case.ptdf()
    gcols = [case.bus_index(b) for b in gbuses]
    dcols = [case.bus_index(b) for b in case.demand_buses]
    for l, ln in enumerate(case.lines):
        r = np.zeros(nv)
        r[:ng] = H[l, gcols]
        r[ng:] = -H[l, dcols]
        if np.max(np.abs(r)) <= ZERO_COEF:
            continue
        rows += [-r, r]
        rhs += [-ln.fmax, -ln.fmax]
    r = np.concatenate([np.ones(ng), -np.ones(nd)])
    rows += [r, -r]
    rhs += [0.0, 0.0]
    P = HPolyhedron(np.array(rows), np.array(rhs), labels)
    if demand_set is not None:
        if demand_set.dim != nd:
            raise BadDimension(f"demand set has dimension {demand_set.dim}, expected {nd}")
        P = P.stack(demand_set.embed(nv, range(ng, nv)))
    return P


def gen_var_indices(gd):
    """Columns of ``gd`` holding dispatch variables, in column order."""
    return [i for i, lab in enumerate(gd.labels) if lab.startswith("g")]


def nonnegative_demand(case):
    """The demand-space set ``d >= 0`` used for intact loadability sets."""
    nd = case.n_demand
    return HPolyhedron(np.eye(nd), np.zeros(nd))


# i/o ------------------------------------------------------------------------

def case_from_dict(data):
    buses = data["buses"]
    lines = []
    for ln in data.get("lines", []):
        lines.append(Line(frm=int(ln["from"]), to=int(ln["to"]), fmax=float(ln["fmax"]),
                          x=None if "x" not in ln else float(ln["x"]),
                          ptdf=None if "ptdf" not in ln else tuple(map(float, ln["ptdf"]))))
    gens = [Generator(bus=int(g["bus"]), gmin=float(g["gmin"]), gmax=float(g["gmax"]),
                      name=str(g.get("name", ""))) for g in data["generators"]]
    return NetworkCase(buses=buses, lines=lines, generators=gens, slack=int(data["slack"]),
                       gamma=float(data.get("gamma", DEFAULT_GAMMA)),
                       demand_buses=data.get("demand_buses"),
                       nominal_demand=data.get("nominal_demand"),
                       name=str(data.get("name", "")), notes=str(data.get("notes", "")))


def commitment_from_list(items):
    out = []
    for it in items:
        if isinstance(it, dict):
            out.append(GenSchedule(int(it["u"]), float(it["g0"]),
                                   float(it.get("r_up", 0.0)), float(it.get("r_dn", 0.0))))
        elif len(it) == 3:
            # (u, g0 + r_up, g0 - r_dn): the window alone fixes the polytope
            u, hi, lo = it
            out.append(GenSchedule(int(u), float(lo), float(hi) - float(lo), 0.0))
        elif len(it) == 4:
            u, g0, ru, rd = it
            out.append(GenSchedule(int(u), float(g0), float(ru), float(rd)))
        else:
            raise InvalidCase(f"cannot read commitment entry {it!r}")
    return out


def load_case(path):
    with open(path) as fh:
        return case_from_dict(json.load(fh))


def load_commitment(path):
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data["schedules"]
    return commitment_from_list(data)


def bundled_path(name):
    """Filesystem path of a file shipped in ``flexcert/cases``."""
    return str(resources.files("flexcert") / "cases" / name)


def bundled_case(name):
    return load_case(bundled_path(name if name.endswith(".json") else name + ".json"))
