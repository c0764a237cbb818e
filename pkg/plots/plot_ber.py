#!/usr/bin/env python3
"""Render BER-vs-Eb/N0 curves from simulator CSVs.

One curve per --csv; --label and --column pair with the CSVs by position
(columns default to ber_all).  The y axis is logarithmic, so zero-BER rows
cannot be drawn: they are dropped and counted in a footnote.  Error bars come
from the emitted ci95_half_width column; rendering never recomputes a rate.

    python3 plots/plot_ber.py --csv sys.csv --label "systematic (all bits)" \
        --csv sys.csv --label "systematic (info)" --column ber_info \
        --csv ns.csv --label non-systematic --column ber_info \
        --uncoded --out ber_curves.svg
"""

import argparse
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.fonttype"] = "none"  # keep text as text in SVGs
import matplotlib.pyplot as plt

from csv_schema import SchemaError, read_sim_csv

_MARKERS = "osD^v<>p"


def build_parser():
    p = argparse.ArgumentParser(
        description=__doc__.splitlines()[0],
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--csv", action="append", required=True, metavar="PATH",
                   help="simulator CSV; repeat for multiple curves")
    p.add_argument("--label", action="append", default=[],
                   help="legend label for the matching --csv (default: file stem)")
    p.add_argument("--column", action="append", default=[],
                   choices=["ber_all", "ber_info", "ber_parity"],
                   help="BER column for the matching --csv (default ber_all)")
    p.add_argument("--uncoded", action="store_true",
                   help="overlay the uncoded BPSK reference curve")
    p.add_argument("--bound", action="append", default=[], metavar="X,Y",
                   help="reference point overlay, repeatable (Eb/N0 dB, BER)")
    p.add_argument("--xlim", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--ylim", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--title", default="")
    p.add_argument("--out", required=True, help="output image (vector: .svg/.pdf)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if len(args.label) > len(args.csv):
        print("error: more --label values than --csv values", file=sys.stderr)
        return 2
    if len(args.column) > len(args.csv):
        print("error: more --column values than --csv values", file=sys.stderr)
        return 2

    fig, ax = plt.subplots(figsize=(6.4, 4.6))
    dropped = 0
    for i, path in enumerate(args.csv):
        label = args.label[i] if i < len(args.label) else Path(path).stem
        column = args.column[i] if i < len(args.column) else "ber_all"
        try:
            rows, _ = read_sim_csv(path)
        except SchemaError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        rows.sort(key=lambda r: r["ebn0_db"])
        kept = [r for r in rows if r[column] > 0.0]
        dropped += len(rows) - len(kept)
        if not kept:
            continue
        x = [r["ebn0_db"] for r in kept]
        y = [r[column] for r in kept]
        err = [r["ci95_half_width"] for r in kept]
        lo = [max(b - e, b * 1e-3) for b, e in zip(y, err)]  # keep bars positive
        ax.errorbar(x, y, yerr=[[b - l for b, l in zip(y, lo)], err],
                    marker=_MARKERS[i % len(_MARKERS)], ms=4, lw=1.2,
                    capsize=2, label=label)

    if args.uncoded:
        xs = ax.get_xlim() if ax.has_data() else (0.0, 10.0)
        grid = [xs[0] + k * (xs[1] - xs[0]) / 120 for k in range(121)]
        ref = [0.5 * math.erfc(math.sqrt(10 ** (g / 10))) for g in grid]
        ax.plot(grid, ref, "k--", lw=1, label="uncoded BPSK")
    for k, spec in enumerate(args.bound):
        try:
            bx, by = (float(v) for v in spec.split(","))
        except ValueError:
            print(f"error: --bound expects 'x,y', got {spec!r}", file=sys.stderr)
            return 2
        ax.plot([bx], [by], marker="*", ms=11, color="k", ls="none",
                label="reference point" if k == 0 else None)

    ax.set_yscale("log")
    ax.set_xlabel(r"$E_b/N_0$ (dB)")
    ax.set_ylabel("bit error rate")
    if args.xlim:
        ax.set_xlim(args.xlim)
    if args.ylim:
        ax.set_ylim(args.ylim)
    if args.title:
        ax.set_title(args.title)
    ax.grid(True, which="both", alpha=0.3)
    if ax.has_data():
        ax.legend(fontsize=9)
    if dropped:
        fig.text(0.01, 0.01,
                 f"{dropped} zero-BER point(s) omitted from the log axis",
                 fontsize=7, alpha=0.7)
    fig.tight_layout()
    fig.savefig(args.out)
    plt.close(fig)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
