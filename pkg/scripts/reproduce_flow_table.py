#!/usr/bin/env python3
"""Rebuild the flow-variability table and step-response chart for the bundled cases.

Computes each case's settling time and percentile reaction time from its
productivity model, merges the externally measured variability statistics,
prints the table sorted by reaction time, reports the rank correlations
between reaction time and the variability columns, and writes the CSV plus
an SVG of all step responses.
"""

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from prodflow import SettlingConfig, build_report, spearman_rank, step_response, write_report_csv
from prodflow.ingest import ingest_cases
from prodflow.svgplot import emit_step_plot


def fmt(value, width, spec="{:.4f}"):
    return ("" if value is None else spec.format(value)).rjust(width)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cases", default=str(REPO / "cases"))
    parser.add_argument("--outdir", default=str(REPO / "out"))
    parser.add_argument("--epsilon", type=float, default=0.02)
    args = parser.parse_args()

    cases = ingest_cases(args.cases)
    rows = build_report(cases, SettlingConfig(epsilon=args.epsilon))

    header = f"{'case':<8}{'ts':>9}{'tt':>7}{'ts/tt':>9}{'Cpk':>8}{'Pp':>8}{'sigma_d':>9}{'rate_d':>9}{'cv':>8}  steadiness"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(
            f"{r.name:<8}"
            f"{fmt(r.settling_time, 9, '{:.2f}')}"
            f"{fmt(r.total_time, 7, '{:.0f}')}"
            f"{fmt(100 * r.reaction_fraction, 8, '{:.2f}')}%"
            f"{fmt(r.cpk, 8)}{fmt(r.pp, 8)}"
            f"{fmt(r.sigma_d, 9, '{:.2f}')}{fmt(r.rate_d, 9, '{:.2f}')}"
            f"{fmt(r.cv, 8)}  {r.steadiness}"
        )
    print()
    frac = [r.reaction_fraction for r in rows]
    print(f"spearman(ts/tt, cv)  = {spearman_rank(frac, [r.cv for r in rows]):+.4f}")
    print(f"spearman(ts/tt, Cpk) = {spearman_rank(frac, [r.cpk for r in rows]):+.4f}")
    print(f"spearman(ts/tt, Pp)  = {spearman_rank(frac, [r.pp for r in rows]):+.4f}")
    for r in rows:
        if r.note:
            print(f"\nnote [{r.name}]: {r.note}")

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_report_csv(rows, outdir / "flow_table.csv")
    by_name = {c.name: c for c in cases}
    curves = [
        (r.name, step_response(by_name[r.name].model, 1.5 * r.settling_time, 1.5 * r.settling_time / 400))
        for r in rows
    ]
    emit_step_plot(curves, outdir / "step_responses.svg")
    print(f"\nwrote {outdir / 'flow_table.csv'} and {outdir / 'step_responses.svg'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
