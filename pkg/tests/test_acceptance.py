"""End-to-end acceptance checks; each prints one PASS/FAIL line."""

import json
import os
import time

import numpy as np
import pytest

from flexcert.cli import main
from flexcert.ddio import ddio_assess, ddio_subproblem, recover_certificate
from flexcert.loadability import (fme_eliminate, is_redundant, mc_volume, project_loadability,
                                  remove_redundant)
from flexcert.lp import LinearProgram, solve
from flexcert.network import assemble_gd_polytope, gen_var_indices, solve_ba
from flexcert.polyhedron import HPolyhedron
from flexcert.uncertainty import (box_from_data, build_grouped_pus, build_pus,
                                  grouped_bounding_box, grouped_contains, grouped_hrep,
                                  pus_to_hrep, synth_generate, target_covariance)

from .helpers import exists_lift, record

pytestmark = pytest.mark.acceptance

SCENARIO = dict(eta=0.067, alpha=0.8, T=4000, seed=20240)
RTS_GROUPS = [[1, 2, 3, 4, 5, 6], [7, 8, 9, 10, 13, 14], [15, 16, 18, 19, 20]]


def _project(case, zeta, demand_set=None):
    gd = assemble_gd_polytope(case, zeta, demand_set)
    return project_loadability(gd, gen_var_indices(gd)).final


def _scenario(case):
    return synth_generate(case.nominal_demand, SCENARIO["eta"], SCENARIO["alpha"],
                          SCENARIO["T"], SCENARIO["seed"])


@pytest.fixture(scope="module")
def three_sets(three_bus):
    case, zeta = three_bus
    W, mu = _scenario(case)
    d0 = case.nominal_demand
    pus = build_pus(W, mu, None, d0)
    box = box_from_data(W, mu, d0)
    return {"intact": _project(case, zeta),
            "pus": _project(case, zeta, pus_to_hrep(pus)),
            "box": _project(case, zeta, box.to_hrep()),
            "_pus": pus, "_box": box}


@pytest.fixture(scope="module")
def rts_pus(rts):
    case, zeta = rts
    W, mu = _scenario(case)
    idx = {b: i for i, b in enumerate(case.demand_buses)}
    parts = build_grouped_pus(W, mu, [[idx[b] for b in g] for g in RTS_GROUPS],
                              case.nominal_demand)
    H = grouped_hrep(parts, case.n_demand)
    return {"D": _project(case, zeta, H), "parts": parts, "W": W, "mu": mu}


def _interior_samples(D, n, rng, margin=1e-6):
    lo, hi = D.bounding_box()
    out = []
    while len(out) < n:
        x = rng.uniform(lo, hi, size=(4 * n, D.dim))
        s = D.slack(x) / np.abs(D.A).sum(axis=1)
        out.extend(x[np.all(s > margin, axis=1)])
    return np.array(out[:n])


def _facet_samples(D, n, rng):
    """Shoot rays from interior points to the boundary."""
    pts = []
    for x in _interior_samples(D, n, rng):
        u = rng.normal(size=D.dim)
        rate = D.A @ u
        s = D.slack(x)
        t = np.min(np.where(rate < 0, s / -np.where(rate < 0, rate, 1), np.inf))
        pts.append(x + t * u)
    return np.array(pts)


def test_c01_rdc_equals_ba(three_bus, three_sets):
    case, zeta = three_bus
    D = three_sets["intact"]
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    interior = _interior_samples(D, 100, rng)
    lo, hi = D.bounding_box()
    pad = 0.15 * (hi - lo)
    exterior = []
    while len(exterior) < 100:
        x = rng.uniform(np.maximum(lo - pad, 0.0), hi + pad)
        if np.any(D.A @ x < D.b - 1e-6):
            exterior.append(x)
    diffs, dist_err = [], 0.0
    kinds = {"one row shed": [0, 0], "one row spill": [0, 0], "one row mixed": [0, 0],
             "several rows": [0, 0]}
    for k, d0 in enumerate(list(interior) + exterior):
        res = ddio_assess(D, d0, 1, minimality="off")
        ba = solve_ba(case, zeta, d=d0).objective / case.gamma
        diff = abs(res.rdc - ba)
        diffs.append(diff)
        # the l1 distance to the set is the smallest per-row move
        dist_err = max(dist_err, abs(res.distances.min() - ba) if k >= 100 else 0.0)
        if k >= 100:
            sv = res.s[res.violated_rows]
            kind = ("several rows" if len(res.violated_rows) > 1 else
                    "one row mixed" if sv.min() < -1e-9 and sv.max() > 1e-9 else
                    "one row shed" if res.rdc > 0 else "one row spill")
            kinds[kind][0] += 1
            kinds[kind][1] += diff <= 1e-6
    elapsed = time.perf_counter() - t0
    diffs = np.array(diffs)
    ok = bool(diffs.max() <= 1e-6) and elapsed <= 30
    record(1, "RDC(r=1) equals BA imbalance", ok,
           f"interior max diff {diffs[:100].max():.1e}; exterior agree "
           f"{int(np.sum(diffs[100:] <= 1e-6))}/100 (max diff {diffs[100:].max():.1f} MW; "
           + ", ".join(f"{k} {a}/{n}" for k, (n, a) in kinds.items())
           + f"); info: min_j |s_j|_1 vs BA/gamma max diff {dist_err:.1e}; {elapsed:.1f}s")
    assert ok


def test_c02_projection_soundness(three_bus, rts, three_sets, rts_pus):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    bad, hits, total = 0, 0, 0
    case, zeta = three_bus
    D = three_sets["intact"]
    lo, hi = D.bounding_box()
    for d in rng.uniform(lo, hi, size=(1000, 2)):
        ba0 = solve_ba(case, zeta, d=d).objective <= 1e-6 * case.gamma
        inside = bool(D.contains(d, tol=1e-9))
        bad += inside != ba0
        hits += inside
        total += 1
    # rts: the set includes the grouped uncertainty set, so the oracle is
    # "inside every group's hull (vertex LP) and zero imbalance"
    rcase, rzeta = rts
    RD = rts_pus["D"]
    bbox = grouped_bounding_box(rts_pus["parts"], rcase.n_demand)
    data_pts = (rts_pus["W"] - rts_pus["mu"].mean(axis=0) + rcase.nominal_demand
                - (rts_pus["W"] - rts_pus["mu"]).mean(axis=0))[:1000]
    uniform_pts = rng.uniform(bbox.lower, bbox.upper, size=(1000, rcase.n_demand))
    rts_hits = 0
    for d in np.vstack([uniform_pts, data_pts]):
        in_unc = grouped_contains(rts_pus["parts"], d)
        ok = in_unc and solve_ba(rcase, rzeta, d=d).objective <= 1e-6 * rcase.gamma
        inside = bool(RD.contains(d, tol=1e-9))
        bad += inside != ok
        rts_hits += inside
        total += 1
    elapsed = time.perf_counter() - t0
    passed = bad == 0 and elapsed <= 60
    record(2, "projection soundness vs BA oracle", passed,
           f"{bad} disagreements in {total} points (3-bus {hits}/1000 inside; rts "
           f"{rts_hits}/2000 inside incl. 1000 data points), {elapsed:.1f}s")
    assert passed


def _row_supports(D, j, probes):
    others = np.arange(D.n_rows) != j
    s = D.slack(probes)
    only_j = (s[:, j] < -1e-9) & np.all(s[:, others] >= -1e-12, axis=1)
    if only_j.any():
        return True
    # touching LP: some point of D meets row j with equality while the other
    # rows alone allow going past it
    lp = LinearProgram(D.A[j], D.A[others], ">=", D.b[others], lower=-np.inf)
    r = solve(lp)
    touch = solve(LinearProgram(np.zeros(D.dim), D.A, [">="] * D.n_rows, D.b, lower=-np.inf))
    return r.status.value == "unbounded" or (r.optimal and r.objective < D.b[j] - 1e-9
                                             and touch.optimal)


def test_c03_minimality(three_sets, rts_pus):
    rng = np.random.default_rng(3)
    sets = {k: v for k, v in three_sets.items() if not k.startswith("_")}
    sets["rts_pus"] = rts_pus["D"]
    redundant, unsupported, rows = 0, 0, 0
    for name, D in sets.items():
        lo, hi = D.bounding_box()
        pad = 0.05 * (hi - lo)
        probes = rng.uniform(lo - pad, hi + pad, size=(10_000, D.dim))
        for j in range(D.n_rows):
            rows += 1
            redundant += is_redundant(D, j)
            unsupported += not _row_supports(D, j, probes)
    ok = redundant == 0 and unsupported == 0
    record(3, "minimality of projected sets", ok,
           f"{rows} rows over {len(sets)} sets; {redundant} redundant, "
           f"{unsupported} without a removal witness")
    assert ok


def test_c04_metric_bounds(three_sets):
    D = three_sets["intact"]
    rng = np.random.default_rng(4)
    interior = _interior_samples(D, 1000, rng)
    rhos = np.array([ddio_assess(D, x, "inf", minimality="off").rho for x in interior])
    in_range = bool(np.all((rhos >= 0) & (rhos <= 1)))
    facets = _facet_samples(D, 100, rng)
    frho = np.array([ddio_assess(D, x, "inf", minimality="off").rho for x in facets])
    on_facet = bool(np.all(np.abs(frho - 1) <= 1e-6))
    center, _ = D.chebyshev_center("inf")
    crho = ddio_assess(D, center, "inf").rho
    sample = rhos[:100]
    cheb_min = bool(crho <= sample.min() + 1e-9)
    # same check on the uncertainty-restricted set, reported only
    P = three_sets["pus"]
    pc, _ = P.chebyshev_center("inf")
    prho = ddio_assess(P, pc, "inf").rho
    psample = np.array([ddio_assess(P, x, "inf", minimality="off").rho
                        for x in _interior_samples(P, 100, rng)])
    ok = in_range and on_facet and cheb_min
    record(4, "rho bounds and Chebyshev-center minimum (intact set, max-norm)", ok,
           f"range ok={in_range} [{rhos.min():.3f}, {rhos.max():.3f}]; facet max "
           f"|rho-1|={np.abs(frho - 1).max():.1e}; center rho {crho:.4f} vs sample min "
           f"{sample.min():.4f}; info: PUS-restricted set center {prho:.4f}, "
           f"{int(np.sum(psample < prho - 1e-9))}/100 samples lower")
    assert ok


def test_c05_norm_ordering(three_sets, rts_pus, rts):
    rng = np.random.default_rng(5)
    sets = {k: v for k, v in three_sets.items() if not k.startswith("_")}
    sets["rts_pus"] = rts_pus["D"]
    violations, checked = 0, 0
    for name, D in sets.items():
        lo, hi = D.bounding_box()
        if name == "rts_pus":
            points = [rts[0].nominal_demand]
        else:
            points = list(rng.uniform(lo, hi, size=(3, D.dim))) + \
                [0.5 * (lo + hi)]
        for d0 in points:
            for j in range(D.n_rows):
                v1 = np.abs(ddio_subproblem(D, d0, j, 1)).sum()
                vi = np.abs(ddio_subproblem(D, d0, j, "inf")).max()
                violations += vi > v1 + 1e-9
                checked += 1
    ok = violations == 0
    record(5, "max-norm distance <= 1-norm distance per row", ok,
           f"{violations} violations in {checked} row subproblems")
    assert ok


def test_c06_volume_direction(three_bus, three_sets):
    case, _ = three_bus
    t0 = time.perf_counter()
    n = 100_000
    pus, box = three_sets["_pus"], three_sets["_box"]
    pbox = pus.bounding_box()
    vp, sp = mc_volume(pus_to_hrep(pus), pbox, n, 61)
    vb, sb = mc_volume(box.to_hrep(), box, n, 61)
    vpd, spd = mc_volume(three_sets["pus"], pbox, n, 62)
    vbd, sbd = mc_volume(three_sets["box"], box, n, 62)
    gap_u = (vb - vp) / np.hypot(sp, sb)
    gap_d = (vbd - vpd) / np.hypot(spd, sbd)
    elapsed = time.perf_counter() - t0
    ok = gap_u >= 4 and gap_d >= 4 and elapsed <= 60
    record(6, "PUS smaller than box, also after network limits", ok,
           f"PUS {vp:.0f}+-{sp:.0f} vs box {vb:.0f}+-{sb:.0f} ({gap_u:.0f} se); "
           f"PUS-D {vpd:.0f}+-{spd:.0f} vs box-D {vbd:.0f}+-{sbd:.0f} ({gap_d:.0f} se); "
           f"box/PUS {vb / vp:.2f}; {elapsed:.1f}s")
    assert ok


def test_c07_fme_exactness():
    rng = np.random.default_rng(7)
    bad, samples = 0, 0
    for _ in range(50):
        m = int(rng.integers(3, 11))
        A = rng.normal(size=(m, 3))
        b = -rng.uniform(0.5, 5.0, m) * np.linalg.norm(A, axis=1)
        P = HPolyhedron(A, b)
        Q = remove_redundant(fme_eliminate(P, 2))
        for x in rng.uniform(-8, 8, size=(500, 2)):
            bad += bool(Q.contains(x, tol=1e-9)) != exists_lift(P, [0, 1], x)
            samples += 1
    ok = bad == 0
    record(7, "FME projection membership vs exists-LP", ok,
           f"{bad} disagreements in {samples} samples over 50 polytopes")
    assert ok


def test_c08_inverse_certificate():
    rng = np.random.default_rng(8)
    worst = {"dual": 0.0, "c_norm": 0.0, "gap": 0.0, "primal": 0.0}
    for k in range(100):
        n = 2 + k % 2
        m = int(rng.integers(n + 1, 9))
        A = rng.normal(size=(m, n))
        b = -rng.uniform(0.5, 5.0, m) * np.linalg.norm(A, axis=1)
        A = np.vstack([A, np.eye(n), -np.eye(n)])
        b = np.concatenate([b, -6 * np.ones(2 * n)])
        D = remove_redundant(HPolyhedron(A, b))
        d0 = rng.uniform(-8, 8, n)
        r = 1 if k % 3 else "inf"
        cert = recover_certificate(D, d0, ddio_assess(D, d0, r))
        res = cert.residuals(D, d0)
        for key in worst:
            worst[key] = max(worst[key], res[key])
    ok = (worst["dual"] <= 1e-7 and worst["c_norm"] <= 1e-9 and worst["gap"] <= 1e-6
          and worst["primal"] <= 1e-7)
    record(8, "inverse certificate invariants", ok,
           ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " over 100 polytopes")
    assert ok


def test_c09_statistical_generator():
    results = []
    for mu, eta, alpha in (([320.0, 50.0], 0.067, 0.8), ([240.0, 40.0], 0.1, 0.7),
                           ([100.0, 80.0, 120.0, 60.0, 90.0], 0.1, 0.6)):
        W, m = synth_generate(mu, eta, alpha, 4000, 20240)
        E = W - m
        T = target_covariance(mu, eta, alpha)
        frob = np.linalg.norm(np.cov(E.T) - T) / np.linalg.norm(T)
        C = np.corrcoef(E.T)
        corr = np.abs(C[np.triu_indices(len(mu), 1)] - alpha).max()
        results.append((frob, corr))
    ok = all(f < 0.10 and c <= 0.05 for f, c in results)
    record(9, "synthetic covariance and correlation", ok,
           "; ".join(f"frob {f:.3f} corr err {c:.3f}" for f, c in results))
    assert ok


def test_c10_repro_end_to_end(tmp_path):
    cfg = os.path.join(os.path.dirname(__file__), "..", "configs", "three_bus.json")
    t0 = time.perf_counter()
    code_a = main(["repro", "--config", cfg, "--out", str(tmp_path / "a")])
    elapsed = time.perf_counter() - t0
    code_b = main(["repro", "--config", cfg, "--out", str(tmp_path / "b")])
    files = sorted(os.listdir(tmp_path / "a"))
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    same = files == sorted(os.listdir(tmp_path / "b")) and all(
        (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    expected = {"W.csv", "mu.csv", "D_pus.csv", "report_pus.json", "volumes.json",
                "rho_grid_pus.csv", "result_pus_r1.json", "manifest.json"}
    ok = code_a == code_b == 0 and same and expected <= set(files) and \
        set(manifest["files"]) | {"manifest.json"} == set(files) and elapsed < 60
    record(10, "repro pipeline deterministic and complete", ok,
           f"{len(files)} files, identical across runs: {same}, {elapsed:.1f}s")
    assert ok
