"""Compare the compiled and numpy kernels on the hot paths.

    python3 bench/benchmark.py [--repeat 5]
"""

import argparse
import time

import numpy as np

import flexcert.lp
import flexcert.numerics
from flexcert import _kernels_py
from flexcert.loadability import project_loadability
from flexcert.lp import LinearProgram, solve
from flexcert.network import assemble_gd_polytope, bundled_case, bundled_path, gen_var_indices, \
    load_commitment
from flexcert.numerics import sym_eigen

try:
    from flexcert import _kernels as compiled
except ImportError:
    compiled = None


def random_lp(rng, m, n):
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0, 2, n)
    b = A @ x0 - rng.uniform(0, 1, m)
    return LinearProgram(rng.uniform(0.1, 1, n), A, ">=", b)


def workloads():
    rng = np.random.default_rng(0)
    lps = {f"lp {m}x{n}": [random_lp(rng, m, n) for _ in range(5)]
           for m, n in ((20, 10), (80, 40), (200, 100))}
    out = {name: (lambda ps=ps: [solve(p) for p in ps]) for name, ps in lps.items()}
    for k in (10, 40):
        M = rng.normal(size=(k, k))
        S = M @ M.T
        out[f"jacobi {k}x{k}"] = lambda S=S: sym_eigen(S)
    case = bundled_case("three_bus")
    zeta = load_commitment(bundled_path("three_bus_zeta3.json"))
    gd = assemble_gd_polytope(case, zeta)
    out["project 3-bus"] = lambda: project_loadability(gd, gen_var_indices(gd))
    return out


def timed(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = {"python": _kernels_py}
    if compiled is not None:
        backends["cython"] = compiled
    jobs = workloads()
    times = {}
    for name, mod in backends.items():
        flexcert.lp.kernels = flexcert.numerics.kernels = mod
        times[name] = {job: timed(fn, args.repeat) for job, fn in jobs.items()}
    print(f"{'workload':<18}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for job in jobs:
        row = "".join(f"{times[b][job] * 1e3:>10.2f}ms" for b in backends)
        ratio = times["python"][job] / times["cython"][job] if "cython" in times else np.nan
        print(f"{job:<18}{row}{ratio:>9.1f}x")


if __name__ == "__main__":
    main()
