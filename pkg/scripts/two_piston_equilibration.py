"""Diathermic versus adiabatic piston: time to equilibrium and final gaps.

    python3 scripts/two_piston_equilibration.py [--hold 1.0] [--out two_piston.csv]
"""

import argparse
import csv

from lagtherm import catalog
from lagtherm.diagnostics import equilibrium_report
from lagtherm.integrate import EquilibriumHook, simulate


def run(kappa, hold):
    built = catalog.build("two_piston", {"kappa": kappa})
    hook = EquilibriumHook(dict(built.equilibrium), hold)
    tr = simulate(built.system, built.y0, catalog.default_config("two_piston"), [hook])
    return built, tr


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--hold", type=float, default=1.0, help="time the gaps must stay closed")
    ap.add_argument("--out", help="optional CSV with both temperature histories")
    args = ap.parse_args()

    rows = {}
    for label, kappa in (("diathermic", 0.5), ("adiabatic", 0.0)):
        built, tr = run(kappa, args.hold)
        eq = equilibrium_report(tr, built.equilibrium, list(built.equilibrium))
        t_star = "never" if eq is None else f"{eq[0]:.3f}"
        print(
            f"{label:>10}: stopped at t={tr.t[-1]:.3f} (equilibrium from {t_star}); "
            f"T1={tr['T1'][-1]:.6f} T2={tr['T2'][-1]:.6f} gap_T={tr['gap_T'][-1]:.2e} "
            f"gap_p={tr['gap_p'][-1]:.2e} |v|={abs(tr['v1'][-1]):.2e}"
        )
        rows[label] = tr

    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["run", "t", "T1", "T2", "x"])
            for label, tr in rows.items():
                for t, a, b, x in zip(tr.t, tr["T1"], tr["T2"], tr["q1"]):
                    w.writerow([label, f"{t:.17g}", f"{a:.17g}", f"{b:.17g}", f"{x:.17g}"])


if __name__ == "__main__":
    main()
