#!/usr/bin/env python3
"""Workspace performance-index comparison of the two limb variants.

Sweeps the evaluation cube for the spatial and the planar limb, writes
per-sample point clouds (gpi_<variant>.csv) and prints the aggregate
table.
"""

import argparse
from pathlib import Path

import numpy as np

from orlsim.geometry import bennett_default, planar_default
from orlsim.metrics import gpi_sweep
from orlsim.serialize import gpi_to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/gpi"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    reports = {}
    for name, geom in (("bennett", bennett_default()), ("planar", planar_default())):
        rep = gpi_sweep(geom)
        reports[name] = rep
        (args.out / f"gpi_{name}.csv").write_text(gpi_to_csv(rep, geom))
        print(f"{name}: {len(rep.points)} reachable samples, {rep.skipped} skipped")

    b, p = reports["bennett"], reports["planar"]
    print(f"\n{'index':22s} {'bennett':>10s} {'planar':>10s}")
    print(f"{'isotropy':22s} {b.gpi_isotropy:10.3f} {p.gpi_isotropy:10.3f}")
    for i, ax in enumerate("xyz"):
        print(f"{'velocity ' + ax + ' (m/s)':22s} {b.gpi_velocity[i]:10.2f} {p.gpi_velocity[i]:10.2f}")
    for i, ax in enumerate("xyz"):
        print(f"{'payload ' + ax + ' (N)':22s} {b.gpi_payload[i]:10.1f} {p.gpi_payload[i]:10.1f}")


if __name__ == "__main__":
    main()
