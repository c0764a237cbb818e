#!/usr/bin/env python3
"""Render a threshold table CSV as grouped bars (threshold vs capacity).

Each (code, L) row becomes one group of two bars; the gap column is
cross-checked against threshold - capacity to 1e-4 dB before anything is
drawn, so a corrupted table fails loudly instead of rendering nonsense.

    python3 plots/plot_thresholds.py --csv thresholds.csv --out thr.svg
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.fonttype"] = "none"  # keep text as text in SVGs
import matplotlib.pyplot as plt

from csv_schema import SchemaError, read_threshold_csv


def build_parser():
    p = argparse.ArgumentParser(
        description=__doc__.splitlines()[0],
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--csv", required=True, help="threshold table CSV")
    p.add_argument("--title", default="")
    p.add_argument("--out", required=True, help="output image (vector: .svg/.pdf)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rows, _ = read_threshold_csv(args.csv)
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    for r in rows:
        drift = abs(r["gap_db"] - (r["threshold_db"] - r["capacity_db"]))
        if drift > 1e-4:
            print(f"error: {args.csv}: row {r['code']}/L={r['L']:g} gap_db "
                  f"disagrees with threshold_db - capacity_db by {drift:.2e} dB",
                  file=sys.stderr)
            return 1

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    if not rows:
        ax.set_axis_off()
        ax.text(0.5, 0.5, "no threshold rows in input",
                ha="center", va="center", transform=ax.transAxes)
    else:
        names = [f"{r['code']}\nL={r['L']:g}" for r in rows]
        xs = range(len(rows))
        width = 0.38
        thr = [r["threshold_db"] for r in rows]
        cap = [r["capacity_db"] for r in rows]
        ax.bar([x - width / 2 for x in xs], thr, width, label="threshold")
        ax.bar([x + width / 2 for x in xs], cap, width, label="capacity limit")
        for x, r in zip(xs, rows):
            ax.annotate(f"+{r['gap_db']:.2f}",
                        (x - width / 2, r["threshold_db"]),
                        textcoords="offset points", xytext=(0, 3),
                        ha="center", fontsize=7)
        ax.set_xticks(list(xs), names, fontsize=8)
        lo = min(cap) - 0.15
        hi = max(thr) + 0.15
        ax.set_ylim(max(lo, 0.0), hi)
        ax.set_ylabel(r"$E_b/N_0$ (dB)")
        ax.legend(fontsize=9)
        ax.grid(True, axis="y", alpha=0.3)
    if args.title:
        ax.set_title(args.title)
    fig.tight_layout()
    fig.savefig(args.out)
    plt.close(fig)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
