"""Write ``src/flexcert/cases/rts_reduced.json`` and its commitment file.

Topology and reactances follow the public 24-bus reliability test system;
generation is lumped into one unit per generator bus and line ratings are
scaled so that several lines bind near the nominal loading. The result is a
test fixture, not a faithful copy of the reference data.
"""

import json
import os
import sys

BRANCHES = [  # from, to, x (p.u.), rating (MW)
    (1, 2, 0.0139, 175), (1, 3, 0.2112, 175), (1, 5, 0.0845, 175), (2, 4, 0.1267, 175),
    (2, 6, 0.1920, 175), (3, 9, 0.1190, 175), (3, 24, 0.0839, 400), (4, 9, 0.1037, 175),
    (5, 10, 0.0883, 175), (6, 10, 0.0605, 175), (7, 8, 0.0614, 175), (8, 9, 0.1651, 175),
    (8, 10, 0.1651, 175), (9, 11, 0.0839, 400), (9, 12, 0.0839, 400), (10, 11, 0.0839, 400),
    (10, 12, 0.0839, 400), (11, 13, 0.0476, 500), (11, 14, 0.0418, 500), (12, 13, 0.0476, 500),
    (12, 23, 0.0966, 500), (13, 23, 0.0865, 500), (14, 16, 0.0389, 500), (15, 16, 0.0173, 500),
    (15, 21, 0.0490, 500), (15, 21, 0.0490, 500), (15, 24, 0.0519, 500), (16, 17, 0.0259, 500),
    (16, 19, 0.0231, 500), (17, 18, 0.0144, 500), (17, 22, 0.1053, 500), (18, 21, 0.0259, 500),
    (18, 21, 0.0259, 500), (19, 20, 0.0396, 500), (19, 20, 0.0396, 500), (20, 23, 0.0216, 500),
    (20, 23, 0.0216, 500), (21, 22, 0.0678, 500),
]
LOADS = {1: 108, 2: 97, 3: 180, 4: 74, 5: 71, 6: 136, 7: 125, 8: 171, 9: 175, 10: 195,
         13: 265, 14: 194, 15: 317, 16: 100, 18: 333, 19: 181, 20: 128}
CAPACITY = {1: 192, 2: 192, 7: 300, 13: 591, 15: 215, 16: 155, 18: 400, 21: 400, 22: 300,
            23: 660}
# (g0, r_up, r_dn); zero reserve pins the unit
SCHEDULE = {1: (120, 60, 60), 2: (150, 0, 0), 7: (200, 80, 80), 13: (500, 0, 0),
            15: (200, 0, 0), 16: (100, 50, 50), 18: (380, 0, 0), 21: (380, 0, 0),
            22: (220, 70, 70), 23: (600, 0, 0)}
RATING_SCALE = float(os.environ.get("RATING_SCALE", "1.0"))
DERATE = {(7, 8): 0.75, (14, 16): 0.55, (11, 13): 0.5}


def build():
    lines = []
    for f, t, x, rating in BRANCHES:
        fmax = rating * RATING_SCALE * DERATE.get((f, t), 1.0)
        lines.append({"from": f, "to": t, "x": x, "fmax": round(fmax, 3)})
    demand = sorted(LOADS)
    return {
        "name": "rts_reduced",
        "notes": ("Reduced 24-bus test case: reference topology and reactances, one "
                  "aggregated unit per generator bus, several ratings lowered so that "
                  "congestion appears. Not the reference data set."),
        "buses": list(range(1, 25)),
        "slack": 13,
        "gamma": 1000.0,
        "demand_buses": demand,
        "nominal_demand": [float(LOADS[b]) for b in demand],
        "lines": lines,
        "generators": [{"bus": b, "gmin": 0.0, "gmax": float(c), "name": f"G{b}"}
                       for b, c in sorted(CAPACITY.items())],
    }


def main(outdir):
    case = build()
    with open(os.path.join(outdir, "rts_reduced.json"), "w") as fh:
        json.dump(case, fh, indent=1)
    zeta = [{"u": 1, "g0": float(g0), "r_up": float(ru), "r_dn": float(rd)}
            for _, (g0, ru, rd) in sorted(SCHEDULE.items())]
    with open(os.path.join(outdir, "rts_reduced_zeta.json"), "w") as fh:
        json.dump(zeta, fh, indent=1)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/flexcert/cases")
