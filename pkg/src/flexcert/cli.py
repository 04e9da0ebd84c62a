"""``flexcert`` command line.

Every command reads one JSON config; relative paths inside it resolve against
the config file's directory, and ``bundled:<name>`` refers to files shipped
in ``flexcert/cases``. Outputs are CSV and JSON only.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import ddio, loadability, network, uncertainty
from .errors import ConfigError, FlexcertError, NumericalError

log = logging.getLogger("flexcert")

DEFAULTS = {
    "norm": 1,
    "seed": 0,
    "out": "out",
    "threads": 1,
    "uncertainty": {"type": "pus"},
    "samples": {"volume": 100_000, "sweep": 21},
    "sweep": {"type": "ray", "spread": 0.14},
}


class Run:
    """Resolved configuration plus lazily built pipeline objects."""

    def __init__(self, path, seed=None, threads=None, out=None):
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        self.base = os.path.dirname(os.path.abspath(path))
        self.cfg = cfg
        self.cli_seed = seed
        self.seed = int(seed if seed is not None else cfg.get("seed", DEFAULTS["seed"]))
        self.threads = max(1, int(threads if threads is not None
                                  else cfg.get("threads", DEFAULTS["threads"])))
        self.out = out if out is not None else self.path(cfg.get("out", DEFAULTS["out"]))
        self.unc = {**DEFAULTS["uncertainty"], **cfg.get("uncertainty", {})}
        self.samples = {**DEFAULTS["samples"], **cfg.get("samples", {})}
        self.norm = cfg.get("norm", DEFAULTS["norm"])
        if str(self.norm).lower() not in ("1", "inf"):
            raise ConfigError(f"norm must be 1 or inf, not {self.norm!r}")
        self._case = self._zeta = self._series = None
        self._projections = {}
        synth = self.unc.get("synth")
        if synth is not None:
            eta, alpha = float(synth.get("eta", 0.0)), float(synth.get("alpha", 0.0))
            if not 0.0 <= eta <= 1.0:
                raise ConfigError(f"eta={eta} outside [0, 1]")
            if not -1.0 <= alpha <= 1.0:
                raise ConfigError(f"alpha={alpha} outside [-1, 1]")

    def path(self, p):
        if p.startswith("bundled:"):
            name = p.split(":", 1)[1]
            return network.bundled_path(name if name.endswith(".json") else name + ".json")
        return p if os.path.isabs(p) else os.path.join(self.base, p)

    def existing(self, key, p):
        full = self.path(p)
        if not os.path.exists(full):
            raise ConfigError(f"{key}: file {full} does not exist")
        return full

    def outfile(self, name):
        os.makedirs(self.out, exist_ok=True)
        return os.path.join(self.out, name)

    # pipeline pieces --------------------------------------------------------

    @property
    def case(self):
        if self._case is None:
            if "case" not in self.cfg:
                raise ConfigError("config needs a 'case' entry")
            self._case = network.load_case(self.existing("case", self.cfg["case"]))
        return self._case

    @property
    def zeta(self):
        if self._zeta is None:
            if "commitment" not in self.cfg:
                raise ConfigError("config needs a 'commitment' entry")
            self._zeta = network.load_commitment(
                self.existing("commitment", self.cfg["commitment"]))
            network.validate_commitment(self.case, self._zeta)
        return self._zeta

    def demand_names(self):
        return [f"d{b}" for b in self.case.demand_buses]

    def nominal(self):
        if self.case.nominal_demand is not None:
            return self.case.nominal_demand
        raise ConfigError("case has no nominal_demand; give uncertainty.synth.mu")

    def synth(self):
        s = self.unc.get("synth")
        if s is None:
            raise ConfigError("uncertainty.synth is required for this command")
        mu = s.get("mu", "nominal")
        mu = self.nominal() if mu == "nominal" else np.asarray(mu, dtype=float)
        seed = self.cli_seed if self.cli_seed is not None else int(s.get("seed", self.seed))
        return uncertainty.synth_generate(mu, float(s.get("eta", 0.0)),
                                          float(s.get("alpha", 0.0)), int(s.get("T", 4000)),
                                          seed)

    @property
    def series(self):
        """``(W, mu)`` from CSV files or the synthetic generator."""
        if self._series is None:
            if "series" in self.unc:
                files = self.unc["series"]
                _, W = uncertainty.read_series_csv(self.existing("series.W", files["W"]))
                _, mu = uncertainty.read_series_csv(self.existing("series.mu", files["mu"]))
                self._series = (W, mu)
            else:
                self._series = self.synth()
            if self._series[0].shape[1] != self.case.n_demand:
                raise ConfigError("series width differs from the number of demand buses")
        return self._series

    def d0(self):
        if "d0" in self.cfg:
            return np.asarray(self.cfg["d0"], dtype=float)
        if "d0" in self.unc:
            return np.asarray(self.unc["d0"], dtype=float)
        return self.nominal()

    def uncertainty_sets(self):
        """``{"pus": (hrep, bbox, analytic volume), "box": ...}`` around d0."""
        W, mu = self.series
        d0 = self.d0()
        out = {}
        groups = self.unc.get("groups")
        if groups:
            index = {b: i for i, b in enumerate(self.case.demand_buses)}
            try:
                idx = [[index[int(b)] for b in g] for g in groups]
            except KeyError as exc:
                raise ConfigError(f"group bus {exc.args[0]} is not a demand bus") from None
            parts = uncertainty.build_grouped_pus(W, mu, idx, d0, self.unc.get("K"))
            n = self.case.n_demand
            vol = float(np.prod([p.volume() for _, p in parts]))
            out["pus"] = (uncertainty.grouped_hrep(parts, n),
                          uncertainty.grouped_bounding_box(parts, n), vol)
        else:
            p = uncertainty.build_pus(W, mu, self.unc.get("K"), d0)
            out["pus"] = (uncertainty.pus_to_hrep(p), p.bounding_box(), p.volume())
        box = uncertainty.box_from_data(W, mu, d0)
        out["box"] = (box.to_hrep(), box, box.volume())
        return out

    def demand_set(self, kind=None):
        kind = kind or self.unc.get("type", "pus")
        if kind == "intact":
            return None, None
        if kind not in ("pus", "box"):
            raise ConfigError(f"uncertainty.type must be pus, box or intact, not {kind!r}")
        H, bbox, _ = self.uncertainty_sets()[kind]
        return H, bbox

    def project(self, kind=None):
        kind = kind or self.unc.get("type", "pus")
        if kind not in self._projections:
            self._projections[kind] = self._project(kind)
        return self._projections[kind]

    def _project(self, kind):
        H, _ = self.demand_set(kind)
        gd = network.assemble_gd_polytope(self.case, self.zeta, H)
        gvars = network.gen_var_indices(gd)
        order = self.cfg.get("project", {}).get("order")
        if order:
            try:
                gvars = [gd.labels.index(name) for name in order]
            except ValueError as exc:
                raise ConfigError(f"project.order: {exc}") from None
        cap = int(self.cfg.get("project", {}).get("max_rows", loadability.DEFAULT_ROW_CAP))
        return loadability.project_loadability(gd, gvars, max_rows=cap)


# commands -------------------------------------------------------------------

def _dump(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_synth(run):
    W, mu = run.synth()
    names = run.demand_names()
    if W.shape[1] != len(names):
        names = [f"n{i}" for i in range(W.shape[1])]
    files = [run.outfile("W.csv"), run.outfile("mu.csv")]
    uncertainty.write_series_csv(files[0], names, W)
    uncertainty.write_series_csv(files[1], names, mu)
    return files


def cmd_project(run, kind=None, tag=""):
    rep = run.project(kind)
    files = [run.outfile(f"D{tag}.csv"), run.outfile(f"report{tag}.json")]
    loadability.write_rows_csv(files[0], rep.final)
    _dump(files[1], {**rep.to_dict(), "uncertainty": kind or run.unc.get("type", "pus")})
    return files


def _assess(run, D, d0, norm):
    res = ddio.ddio_assess(D, d0, norm, threads=run.threads)
    cert = ddio.recover_certificate(D, d0, res)
    ba = network.solve_ba(run.case, run.zeta, d=d0)
    return {"d0": list(map(float, d0)), "ddio": res.to_dict(),
            "certificate": cert.to_dict(), "certificate_residuals": cert.residuals(D, d0),
            "ba": ba.to_dict(), "rdc": res.rdc, "ba_imbalance_mw": ba.imbalance,
            "ba_shed_mw": ba.shed, "rdc_minus_ba_shed": res.rdc - ba.shed}


def cmd_assess(run, kind=None, tag="", norm=None):
    D = run.project(kind).final
    d0 = run.d0()
    if d0.size != D.dim:
        raise ConfigError(f"d0 has {d0.size} entries, the set has dimension {D.dim}")
    out = _assess(run, D, d0, norm if norm is not None else run.norm)
    f = run.outfile(f"result{tag}.json")
    _dump(f, out)
    return [f]


def sweep_grid(run, D):
    grid = {**DEFAULTS["sweep"], **run.cfg.get("sweep", {})}
    n = int(grid.get("n", run.samples["sweep"]))
    if grid["type"] == "ray":
        return ddio.ray_grid(run.d0(), n, float(grid["spread"]))
    if grid["type"] == "rect":
        if "lower" in grid and "upper" in grid:
            lo, hi = grid["lower"], grid["upper"]
        else:
            lo, hi = D.bounding_box()
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
                raise ConfigError("sweep.rect needs lower/upper for an unbounded set")
        return ddio.rect_grid(lo, hi, n)
    if grid["type"] == "points":
        return np.asarray(grid["points"], dtype=float)
    raise ConfigError(f"sweep.type must be ray, rect or points, not {grid['type']!r}")


def cmd_sweep(run, kind=None, tag=""):
    D = run.project(kind).final
    rows = ddio.rho_sweep(D, sweep_grid(run, D), run.norm, threads=run.threads)
    f = run.outfile(f"rho_grid{tag}.csv")
    ddio.write_sweep_csv(f, rows, run.demand_names())
    return [f]


def cmd_volume(run):
    n = int(run.samples["volume"])
    sets = run.uncertainty_sets()
    out = {"n_samples": n, "seed": run.seed}
    for k, kind in enumerate(("pus", "box")):
        H, bbox, exact = sets[kind]
        # the uncertainty set and its loadability set share one stream
        v, se = loadability.mc_volume(H, bbox, n, run.seed, threads=run.threads)
        D = run.project(kind).final
        vd, sed = loadability.mc_volume(D, bbox, n, run.seed, threads=run.threads)
        out[kind] = {"volume": v, "std_error": se, "exact": exact,
                     "bbox_volume": float(np.prod(bbox.upper - bbox.lower))}
        out[kind + "_D"] = {"volume": vd, "std_error": sed, "rows": D.n_rows}
    out["ratio_box_over_pus"] = out["box"]["volume"] / out["pus"]["volume"]
    out["ratio_boxD_over_pusD"] = (out["box_D"]["volume"] / out["pus_D"]["volume"]
                                   if out["pus_D"]["volume"] > 0 else None)
    f = run.outfile("volumes.json")
    _dump(f, out)
    return [f]


def cmd_repro(run):
    files = cmd_synth(run)
    for kind in ("pus", "box", "intact"):
        files += cmd_project(run, kind, tag=f"_{kind}")
    for kind in ("pus", "intact"):
        for norm, name in ((1, "1"), ("inf", "inf")):
            files += cmd_assess(run, kind, tag=f"_{kind}_r{name}", norm=norm)
    files += cmd_sweep(run, "pus", tag="_pus")
    files += cmd_volume(run)
    manifest = run.outfile("manifest.json")
    _dump(manifest, {"files": sorted(os.path.basename(f) for f in files), "seed": run.seed})
    return files + [manifest]


COMMANDS = {"synth": cmd_synth, "project": cmd_project, "assess": cmd_assess,
            "sweep": cmd_sweep, "volume": cmd_volume, "repro": cmd_repro}


def build_parser():
    p = argparse.ArgumentParser(prog="flexcert",
                                description="Loadability sets and flexibility assessment.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=None, help="worker cap")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _fail(code, exc):
    json.dump({"error": type(exc).__name__, "message": str(exc), "exit_code": code},
              sys.stderr)
    sys.stderr.write("\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run = Run(args.config, seed=args.seed, threads=args.threads, out=args.out)
        files = COMMANDS[args.command](run)
    except ConfigError as exc:
        return _fail(2, exc)
    except (NumericalError, FlexcertError) as exc:
        return _fail(3 if isinstance(exc, NumericalError) else 2, exc)
    except (KeyError, ValueError) as exc:
        return _fail(2, ConfigError(f"bad configuration: {exc!r}"))
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
