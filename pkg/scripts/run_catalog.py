"""Run every shipped scenario through the command-line runner and summarise the audits.

    python3 scripts/run_catalog.py [--out-dir catalog_out] [--only NAME]
"""

import argparse
from pathlib import Path

from lagtherm.cli import parse_scenario, run_scenario

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="catalog_out")
    ap.add_argument("--only", help="substring filter on scenario file names")
    args = ap.parse_args()

    worst = 0
    for path in sorted(SCENARIOS.glob("*.toml")):
        if args.only and args.only not in path.stem:
            continue
        res = run_scenario(parse_scenario(path), out_dir=args.out_dir)
        r = res.report
        energy = r.get("max_energy_residual")
        prod = r.get("min_internal_production")
        eq = r.get("equilibrium")
        eq_txt = f"t={eq['time']:.2f}" if eq else "-"
        print(
            f"{path.stem:<24} exit {res.exit_code}  status {res.status:<9} "
            f"energy {energy if energy is None else f'{energy:.2e}'}  "
            f"min I {prod if prod is None else f'{prod:.2e}'}  "
            f"equilibrium {eq_txt}"
        )
        worst = max(worst, res.exit_code)
    raise SystemExit(worst)


if __name__ == "__main__":
    main()
