#!/usr/bin/env python3
"""Time the BP message-passing kernels: compiled extension vs numpy fallback.

Backend selection happens at import, so each measurement runs in a child
process with SCLDPC_FORCE_NUMPY set accordingly.  Both children decode the
same noisy frames and dump their posterior LLRs; the parent reports decoded
frames/s for each backend plus the largest posterior discrepancy.

Usage: python3 benchmarks/bench_bp.py [--frames N] [--iterations I] [--ebn0 DB]
"""

import argparse
import json
import os
import subprocess
import sys
import tempfile

import numpy as np


def build_code():
    from scldpc import catalog_lookup, make_code

    return make_code(catalog_lookup("robinson-r34-m19-j4"),
                     form="nonsystematic_ff", L=100, M=4,
                     scheme="circulant", lift_seed=0)


def worker(args):
    import time

    from scldpc import SwdConfig, bp_decode_window, noise_sigma
    from scldpc.channel import frame_rng
    from scldpc.codec import sliding_window_decode
    from scldpc.kernels import BACKEND

    code = build_code()
    ctx = code.ctx
    sigma = noise_sigma(args.ebn0, code.rate)
    tx = 1.0 - 2.0 * code.encode(
        frame_rng(1, 0, 0).integers(0, 2, size=(args.frames, code.info_len),
                                    dtype=np.uint8)
    ).astype(np.float64)
    llrs = np.empty_like(tx)
    for f in range(args.frames):
        y = tx[f] + sigma * frame_rng(2, 0, f).normal(size=tx.shape[1])
        llrs[f] = 2.0 * y / sigma**2

    posteriors = np.empty_like(llrs)
    t0 = time.perf_counter()
    for f in range(args.frames):
        _, posteriors[f] = bp_decode_window(
            code.matrix, llrs[f], iterations=args.iterations,
            early_stop=False, ctx=ctx)
    bp_s = time.perf_counter() - t0

    swd_cfg = SwdConfig(W=2, iterations_per_position=args.iterations // 2,
                        early_stop=False)
    n_swd = max(args.frames // 4, 1)
    swd_posts = np.empty((n_swd, tx.shape[1]))
    t0 = time.perf_counter()
    for f in range(n_swd):
        _, swd_posts[f] = sliding_window_decode(
            code.matrix, swd_cfg, llrs[f], ctx=ctx)
    swd_s = time.perf_counter() - t0

    np.save(args.dump, posteriors)
    np.save(args.dump.replace(".npy", "_swd.npy"), swd_posts)
    print(json.dumps({"backend": BACKEND, "bp_seconds": bp_s,
                      "swd_seconds": swd_s, "frames": args.frames,
                      "swd_frames": n_swd, "bits": int(tx.size)}))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--frames", type=int, default=40)
    p.add_argument("--iterations", type=int, default=25)
    p.add_argument("--ebn0", type=float, default=3.0)
    p.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--dump", help=argparse.SUPPRESS)
    args = p.parse_args()

    if args.worker:
        worker(args)
        return

    results = {}
    dumps = {}
    with tempfile.TemporaryDirectory() as tmp:
        for forced, want in (("0", "cython"), ("1", "numpy")):
            dump = os.path.join(tmp, f"post_{want}.npy")
            env = dict(os.environ, SCLDPC_FORCE_NUMPY=forced)
            cmd = [sys.executable, os.path.abspath(__file__), "--worker",
                   "--dump", dump, "--frames", str(args.frames),
                   "--iterations", str(args.iterations),
                   "--ebn0", str(args.ebn0)]
            out = subprocess.run(cmd, env=env, check=True,
                                 capture_output=True, text=True).stdout
            info = json.loads(out.strip().splitlines()[-1])
            results[info["backend"]] = info
            dumps[info["backend"]] = (np.load(dump),
                                      np.load(dump.replace(".npy", "_swd.npy")))

        if "cython" not in results:
            print("compiled extension unavailable; measured numpy only")
        for name, info in sorted(results.items()):
            bp_rate = info["frames"] / info["bp_seconds"]
            swd_rate = info["swd_frames"] / info["swd_seconds"]
            print(f"{name:>7}: full BP {info['frames']} frames in "
                  f"{info['bp_seconds']:.2f}s ({bp_rate:.1f}/s)   "
                  f"windowed {info['swd_frames']} frames in "
                  f"{info['swd_seconds']:.2f}s ({swd_rate:.1f}/s)")
        if len(results) == 2:
            bp_diff = float(np.max(np.abs(dumps["cython"][0]
                                          - dumps["numpy"][0])))
            swd_diff = float(np.max(np.abs(dumps["cython"][1]
                                           - dumps["numpy"][1])))
            bp_x = results["numpy"]["bp_seconds"] / results["cython"]["bp_seconds"]
            swd_x = (results["numpy"]["swd_seconds"]
                     / results["cython"]["swd_seconds"])
            print(f"speedup: full BP {bp_x:.2f}x, windowed {swd_x:.2f}x   "
                  f"max |posterior diff|: BP {bp_diff:.3e}, "
                  f"windowed {swd_diff:.3e}")


if __name__ == "__main__":
    main()
