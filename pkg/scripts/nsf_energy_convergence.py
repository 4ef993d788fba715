"""Energy residual of the viscous decay test under grid and step refinement.

    python3 scripts/nsf_energy_convergence.py [--levels 3] [--t-end 1.0]
"""

import argparse

from lagtherm import catalog
from lagtherm.diagnostics import energy_audit, entropy_monotone
from lagtherm.integrate import IntegratorConfig, simulate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--cells", type=int, default=64, help="coarsest grid")
    ap.add_argument("--dt", type=float, default=2e-3, help="coarsest step")
    ap.add_argument("--t-end", type=float, default=1.0)
    args = ap.parse_args()

    prev = None
    print(f"{'cells':>6} {'dt':>9} {'energy residual':>16} {'ratio':>6}  entropy monotone")
    for k in range(args.levels):
        n, dt = args.cells * 2**k, args.dt / 2**k
        built = catalog.build("nsf1d", {"n_cells": n, "isolated": True})
        tr = simulate(built.system, built.y0, IntegratorConfig("rk4", dt=dt, t_end=args.t_end, record_every=10))
        e = energy_audit(tr)
        ratio = f"{prev / e:6.1f}" if prev else "     -"
        print(f"{n:6d} {dt:9.2e} {e:16.3e} {ratio}  {entropy_monotone(tr)}")
        prev = e


if __name__ == "__main__":
    main()
