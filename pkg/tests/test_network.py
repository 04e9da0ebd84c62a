import json

import numpy as np
import pytest

from flexcert.errors import BadDimension, Disconnected, InvalidCase
from flexcert.lp import LinearProgram, solve
from flexcert.network import (GenSchedule, Generator, Line, NetworkCase,
                              assemble_gd_polytope, bus_windows, case_from_dict,
                              commitment_from_list, compute_ptdf, gen_var_indices, load_case,
                              solve_ba, validate_commitment)
from flexcert.uncertainty import BoxSet


def _single_bus(lo=10.0, hi=20.0):
    case = NetworkCase(buses=[1], lines=[], generators=[Generator(1, 0.0, 100.0)], slack=1)
    return case, [GenSchedule(1, lo, hi - lo, 0.0)]


def test_ptdf_two_bus():
    case = NetworkCase(buses=[1, 2], lines=[Line(2, 1, 100.0, x=0.2)],
                       generators=[], slack=1)
    assert compute_ptdf(case)[0].tolist() == [0.0, 1.0]


def test_ptdf_triangle_by_hand():
    lines = [Line(1, 2, 100, x=0.1), Line(1, 3, 100, x=0.1), Line(2, 3, 100, x=0.1)]
    case = NetworkCase(buses=[1, 2, 3], lines=lines, generators=[], slack=1)
    # injection at 2 withdrawn at 1: 2/3 on the direct path, 1/3 via bus 3
    expected = np.array([[0, -2 / 3, -1 / 3], [0, -1 / 3, -2 / 3], [0, 1 / 3, -1 / 3]])
    assert np.allclose(compute_ptdf(case), expected, atol=1e-14)


def test_ptdf_matches_angle_solution(rts):
    # independent route: pseudo-inverse of the full susceptance matrix
    case, _ = rts
    H = compute_ptdf(case)
    idx = {b: i for i, b in enumerate(case.buses)}
    n = case.n_buses
    B = np.zeros((n, n))
    for ln in case.lines:
        i, j = idx[ln.frm], idx[ln.to]
        B[[i, j], [i, j]] += 1 / ln.x
        B[i, j] -= 1 / ln.x
        B[j, i] -= 1 / ln.x
    q = np.random.default_rng(0).normal(size=n)
    q -= q.mean()
    theta = np.linalg.pinv(B) @ q
    flows = np.array([(theta[idx[ln.frm]] - theta[idx[ln.to]]) / ln.x for ln in case.lines])
    assert np.allclose(H @ q, flows, atol=1e-9)


def test_ptdf_explicit_rows():
    case = NetworkCase(buses=[1, 2], lines=[Line(1, 2, 50.0, ptdf=(0.0, -0.5))],
                       generators=[], slack=1)
    assert compute_ptdf(case).tolist() == [[0.0, -0.5]]


def test_ptdf_disconnected():
    case = NetworkCase(buses=[1, 2, 3], lines=[Line(1, 2, 10, x=0.1)], generators=[], slack=1)
    with pytest.raises(Disconnected):
        compute_ptdf(case)


def test_case_validation():
    with pytest.raises(InvalidCase):
        NetworkCase(buses=[1], lines=[], generators=[], slack=2)
    with pytest.raises(InvalidCase):
        NetworkCase(buses=[1, 2], lines=[Line(1, 2, 0.0, x=0.1)], generators=[], slack=1)
    with pytest.raises(InvalidCase):
        NetworkCase(buses=[1], lines=[], generators=[Generator(1, 5.0, 1.0)], slack=1)
    with pytest.raises(InvalidCase):
        NetworkCase(buses=[1], lines=[], generators=[Generator(3, 0.0, 1.0)], slack=1)


def test_commitment_validation(three_bus):
    case, zeta = three_bus
    validate_commitment(case, zeta)
    bad = [GenSchedule(1, 390.0, 20.0, 0.0), zeta[1]]
    with pytest.raises(InvalidCase):
        validate_commitment(case, bad)
    with pytest.raises(InvalidCase):
        validate_commitment(case, zeta[:1])
    with pytest.raises(InvalidCase):
        validate_commitment(case, [GenSchedule(1, 100.0, -1.0, 0.0), zeta[1]])


def test_commitment_forms():
    z = commitment_from_list([{"u": 1, "g0": 5, "r_up": 2, "r_dn": 1}, [1, 9.0, 4.0],
                              [0, 0, 0, 0]])
    assert z[0].window == (4.0, 7.0)
    assert z[1].window == (4.0, 9.0)
    assert z[2].u == 0


def test_uncommitted_units_contribute_nothing(three_bus):
    case, zeta = three_bus
    off = [zeta[0], GenSchedule(0, 0.0, 0.0, 0.0)]
    assert list(bus_windows(case, off)) == [1]
    gd = assemble_gd_polytope(case, off)
    assert gd.labels == ("g1", "d2", "d3")


def test_json_roundtrip(tmp_path, three_bus):
    case, _ = three_bus
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"buses": [1, 2], "slack": 1, "lines": [
        {"from": 1, "to": 2, "x": 0.5, "fmax": 10}], "generators": [
        {"bus": 1, "gmin": 0, "gmax": 5}]}))
    c = load_case(f)
    assert c.gamma == 1000.0 and c.demand_buses == [1, 2]
    assert case_from_dict({"buses": [1], "slack": 1, "generators": []}).lines == []


def test_ba_ample_reserves(three_bus):
    case, zeta = three_bus
    r = solve_ba(case, zeta, d=[300.0, 50.0])
    assert r.objective == pytest.approx(0.0, abs=1e-9)


def test_ba_single_bus_shed():
    case, zeta = _single_bus()
    r = solve_ba(case, zeta, d=[25.0])
    assert r.shed == pytest.approx(5.0)
    assert r.epsilon[0] == pytest.approx(-5.0)
    assert r.objective == pytest.approx(5.0 * case.gamma)
    r = solve_ba(case, zeta, d=[4.0])
    assert r.shed == pytest.approx(-6.0)     # spillage
    assert r.objective == pytest.approx(6.0 * case.gamma)


def test_ba_invariants(three_bus, rng):
    case, zeta = three_bus
    for d in rng.uniform([100, -50], [600, 200], size=(50, 2)):
        r = solve_ba(case, zeta, d=d)
        assert abs(r.q.sum()) <= 1e-6
        assert r.objective >= 0
        assert r.objective == pytest.approx(case.gamma * np.abs(r.epsilon).sum(), rel=1e-6,
                                            abs=1e-9)
        # served demand obeys the network
        flows = case.ptdf() @ r.q
        assert np.all(np.abs(flows) <= np.array([ln.fmax for ln in case.lines]) + 1e-6)


def test_ba_over_range(three_bus):
    case, zeta = three_bus
    box = BoxSet(np.array([500.0, 100.0]), np.array([600.0, 150.0]))
    r = solve_ba(case, zeta, d_range=box)
    # served demand is capped by line 1-2 (2 d2 + d3 <= 730) with d3 <= 100:
    # best service is (315, 100) against the box corner (500, 100)
    assert r.shed == pytest.approx(185.0)
    assert np.all(box.contains(r.d, tol=1e-9))
    r = solve_ba(case, zeta, d_range=BoxSet(np.array([0.0, 0.0]), np.array([600.0, 600.0])))
    assert r.objective == pytest.approx(0.0, abs=1e-6)
    with pytest.raises(BadDimension):
        solve_ba(case, zeta)
    with pytest.raises(BadDimension):
        solve_ba(case, zeta, d=[1.0, 2.0, 3.0])


def test_gd_single_bus():
    case, zeta = _single_bus(5.0, 10.0)
    box = BoxSet(np.array([0.0]), np.array([20.0])).to_hrep()
    P = assemble_gd_polytope(case, zeta, box)
    assert P.labels == ("g1", "d1")
    pts = np.array([[7.0, 7.0], [5.0, 5.0], [7.0, 8.0], [4.0, 4.0], [10.0, 10.0], [11, 11]])
    assert P.contains(pts).tolist() == [True, True, False, False, True, False]


def test_gd_zero_reserve_pins_dispatch():
    case, _ = _single_bus()
    P = assemble_gd_polytope(case, [GenSchedule(1, 7.0, 0.0, 0.0)])
    lo, hi = P.bounding_box()
    assert lo[0] == pytest.approx(7.0) and hi[0] == pytest.approx(7.0)


def _direct(case, zeta, g, d):
    """Evaluate the dispatch constraints directly from case data."""
    win = bus_windows(case, zeta)
    inj = np.zeros(case.n_buses)
    for k, b in enumerate(win):
        if not win[b][0] - 1e-9 <= g[k] <= win[b][1] + 1e-9:
            return False
        inj[case.bus_index(b)] += g[k]
    for k, b in enumerate(case.demand_buses):
        inj[case.bus_index(b)] -= d[k]
    if abs(inj.sum()) > 1e-9:
        return False
    fm = np.array([ln.fmax for ln in case.lines])
    return bool(np.all(np.abs(case.ptdf() @ inj) <= fm + 1e-9))


def test_gd_matches_direct_evaluation(three_bus, rng):
    case, zeta = three_bus
    P = assemble_gd_polytope(case, zeta)
    for _ in range(500):
        g = rng.uniform([140, 30], [360, 150])
        d = rng.uniform([100, 0], [400, 150])
        d[1] = g.sum() - d[0] if rng.random() < 0.7 else d[1]   # many balanced points
        assert P.contains(np.concatenate([g, d]), tol=1e-12) == _direct(case, zeta, g, d)


def test_gd_projection_agrees_with_ba(three_bus, rng):
    case, zeta = three_bus
    P = assemble_gd_polytope(case, zeta)
    gv = gen_var_indices(P)
    dv = [i for i in range(P.dim) if i not in gv]
    for d in rng.uniform([150, -50], [550, 200], size=(1000, 2)):
        # exists-dispatch LP
        A = P.A[:, gv]
        b = P.b - P.A[:, dv] @ d
        exists = solve(LinearProgram(np.zeros(len(gv)), A, ">=", b, lower=-np.inf)).optimal
        ba = solve_ba(case, zeta, d=d)
        assert exists == (ba.objective <= 1e-6 * case.gamma)
