"""Command-line front end.

Experiments are described by JSON config files; every output embeds the
sha256 of the resolved case (config after defaults and flag overrides), so a
CSV or matrix file can always be traced back to the exact settings that
produced it.  Identical config + seed gives byte-identical outputs.

Exit codes: 0 success, 1 check or run failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .channel import SimConfig, run_sim, write_csv
from .codec import FORMS, _MATRIX_FORM, make_code
from .csoc import CsocSpec, catalog, catalog_lookup, catalog_stubs, validate_self_orthogonality
from .graphs import girth, min_distance_bounded
from .lifting import SCHEMES, EdgeSpreadProto, lift, search_girth6_lifting
from .matrices import terminate, write_alist, write_coord_csv
from .pexit import PexitProblem, pexit_threshold, write_threshold_csv

_DECODER_KINDS = {"swd": "swd", "bp": "bp", "majority_logic": "ml", "ml": "ml"}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path} must be a JSON object")
    return cfg


def _merge(defaults: dict, override: dict) -> dict:
    """One level of section-wise merging: dict values update, others replace."""
    out = dict(defaults)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **val}
        else:
            out[key] = val
    return out


def resolve_cases(cfg: dict) -> list[dict]:
    cases = cfg.get("cases")
    if cases is None:
        return [dict(cfg)]
    if not isinstance(cases, list) or not cases:
        raise UsageError("'cases' must be a non-empty list")
    defaults = {k: v for k, v in cfg.items() if k != "cases"}
    return [_merge(defaults, case) for case in cases]


def config_hash(case: dict) -> str:
    canon = json.dumps(case, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _spec_from(case: dict):
    code = case.get("code")
    if not isinstance(code, dict):
        raise UsageError("config needs a 'code' section")
    if "catalog" in code:
        try:
            return catalog_lookup(code["catalog"])
        except KeyError as e:
            raise UsageError(str(e)) from e
    if "exponents" in code:
        exp = code["exponents"]
        # either a bare list of exponent sets or the interchange dict
        # {n, m, J, polys, label} with the scalars optional
        sets = exp["polys"] if isinstance(exp, dict) else exp
        extra = exp if isinstance(exp, dict) else {}
        try:
            spec = CsocSpec.from_exponents(
                [tuple(t) for t in sets],
                label=extra.get("label", code.get("label", "")),
            )
        except (TypeError, KeyError) as e:
            raise UsageError(f"bad exponents section: {e}") from e
        for field in ("n", "m", "J"):
            if field in extra and extra[field] != getattr(spec, field):
                raise UsageError(
                    f"exponents section says {field}={extra[field]} but the "
                    f"polynomials imply {field}={getattr(spec, field)}")
        return spec
    if "edge_spread" in code:
        es = code["edge_spread"]
        return EdgeSpreadProto(n=int(es["n"]), J=int(es["J"]))
    raise UsageError("code section needs 'catalog', 'exponents', or 'edge_spread'")


def _label_for(case: dict, spec) -> str:
    if case.get("label"):
        return str(case["label"])
    stem = getattr(spec, "label", "") or "code"
    return f"{stem}-L{case.get('L', 200)}-M{case.get('lifting', {}).get('M', 1)}"


def _band_for(case: dict, spec):
    """Terminated band (optionally lifted) for build/validate/threshold."""
    L = int(case.get("L", 200))
    mform = case.get("matrix", "systematic")
    base, term = terminate(spec, L, mform)
    lifting = case.get("lifting", {})
    M = int(lifting.get("M", 1))
    lc = None
    if M > 1:
        lc = lift(base, M, scheme=lifting.get("scheme", "circulant"),
                  seed=int(lifting.get("seed", 0)))
    matrix = lc.expanded() if lc is not None else base
    return base, lc, matrix, term


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_build(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for case in resolve_cases(load_config(args.config)):
        spec = _spec_from(case)
        label = _label_for(case, spec)
        digest = config_hash(case)
        _, lc, matrix, term = _band_for(case, spec)
        files = {
            "alist": str(out / f"{label}.alist"),
            "coords": str(out / f"{label}.coords.csv"),
        }
        write_alist(matrix, files["alist"])
        write_coord_csv(matrix, files["coords"])
        if lc is not None:
            files["lifting"] = str(out / f"{label}.lift.json")
            with open(files["lifting"], "w", encoding="utf-8") as fh:
                fh.write(lc.to_json())
        meta = {
            "label": label,
            "config_sha256": digest,
            "rows": matrix.rows,
            "cols": matrix.cols,
            "rate": term.rate,
            "files": files,
        }
        meta_path = out / f"{label}.meta.json"
        with open(meta_path, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"built {label}: {matrix.rows}x{matrix.cols} -> {files['alist']}")
    return 0


def cmd_validate(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    all_ok = True
    for case in resolve_cases(load_config(args.config)):
        spec = _spec_from(case)
        label = _label_for(case, spec)
        _, _, matrix, _ = _band_for(case, spec)
        checks: dict = {}
        if isinstance(spec, CsocSpec):
            rep = validate_self_orthogonality(spec)
            checks["orthogonality"] = {
                "ok": rep.ok,
                "violations": [list(v) for v in rep.violations],
            }
            w_max = int(case.get("distance", {}).get("w_max", spec.J + 1))
            target = spec.J + 1
        else:
            w_max = int(case.get("distance", {}).get("w_max", spec.J + 1))
            target = spec.J + 1
        g = girth(matrix)
        checks["girth"] = {
            "ok": g.girth is None or g.girth >= 6,
            "girth": g.girth,
        }
        dist = min_distance_bounded(matrix, w_max=w_max)
        found = dist.min_weight_found
        checks["distance"] = {
            "ok": found is None or found >= target,
            "min_weight_found": found,
            "searched_up_to": dist.exhaustive_up_to,
            "witness_columns": list(dist.witness_columns),
        }
        report = {
            "label": label,
            "config_sha256": config_hash(case),
            "checks": checks,
            "pass": all(c["ok"] for c in checks.values()),
        }
        path = out / f"{label}.validate.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(json.dumps(report, indent=2, sort_keys=True))
        all_ok = all_ok and report["pass"]
    return 0 if all_ok else 1


def _sim_config(case: dict, seed_override, point_offset: int = 0,
                points=None) -> SimConfig:
    dec = dict(case.get("decoder", {}))
    chan = dict(case.get("channel", {}))
    kind = _DECODER_KINDS.get(dec.get("kind", "swd"))
    if kind is None:
        raise UsageError(f"unknown decoder kind {dec.get('kind')!r}")
    basis = chan.get("rate_basis", "actual")
    if basis not in ("actual", "nominal"):
        raise UsageError(f"unknown channel rate_basis {basis!r}")
    seed = int(chan.get("seed", 0)) if seed_override is None else int(seed_override)
    return SimConfig(
        ebn0_db=tuple(points if points is not None else chan.get("ebn0_db", ())),
        decoder=kind,
        iterations=int(dec.get("iterations", 20)),
        W=int(dec.get("W", 4)),
        min_sum=bool(dec.get("min_sum", False)),
        llr_clip=float(dec.get("llr_clip", 25.0)),
        seed=seed,
        batch=int(chan.get("batch", 64)),
        target_frame_errors=int(chan.get("target_frame_errors", 100)),
        max_frames=int(chan.get("max_frames", 1_000_000)),
        min_frames=int(chan.get("min_frames", 128)),
        all_zero=bool(chan.get("all_zero", False)),
        point_offset=point_offset,
        rate_basis=basis,
    )


def _code_from(case: dict):
    spec = _spec_from(case)
    form = case.get("form", "rsc")
    if form not in FORMS:
        raise UsageError(f"unknown form {form!r}; choose from {FORMS}")
    lifting = case.get("lifting", {})
    scheme = lifting.get("scheme", "circulant")
    if scheme not in SCHEMES:
        raise UsageError(f"unknown lifting scheme {scheme!r}")
    L = int(case.get("L", 200))
    M = int(lifting.get("M", 1))
    seed = int(lifting.get("seed", 0))
    explicit = None
    if lifting.get("search_girth6") and M > 1:
        base, _ = terminate(spec, L, _MATRIX_FORM[form])
        explicit = search_girth6_lifting(base, M, scheme, seed=seed)
        if explicit is None:
            raise UsageError(
                f"no girth-6 {scheme} lifting found for M={M} (seed {seed})")
    return make_code(
        spec,
        form=form,
        L=L,
        M=M,
        scheme=scheme,
        lift_seed=seed,
        lifting=explicit,
        label=_label_for(case, _spec_from(case)),
    )


def _simulate_one_point(payload):
    """Worker for the point pool; rebuilds the code in each process."""
    case, seed_override, point_idx, ebn0 = payload
    code = _code_from(case)
    cfg = _sim_config(case, seed_override, point_offset=point_idx, points=(ebn0,))
    return run_sim(code, cfg)[0]


def cmd_simulate(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for case in resolve_cases(load_config(args.config)):
        if args.seed is not None:
            case = _merge(case, {"channel": {"seed": int(args.seed)}})
        code = _code_from(case)
        label = _label_for(case, _spec_from(case))
        cfg = _sim_config(case, None)
        if args.threads > 1 and len(cfg.ebn0_db) > 1:
            payloads = [(case, None, i, e) for i, e in enumerate(cfg.ebn0_db)]
            with ProcessPoolExecutor(max_workers=args.threads) as pool:
                results = list(pool.map(_simulate_one_point, payloads))
        else:
            results = run_sim(code, cfg)
        comments = {
            "label": label,
            "code": code.label,
            "config_sha256": config_hash(case),
            "seed": cfg.seed,
        }
        path = out / f"{label}.csv"
        write_csv(results, path=path, comments=comments)
        print(f"simulated {label}: {len(results)} points -> {path}")
    return 0


def cmd_threshold(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = load_config(args.config)
    search = cfg.get("search", {})
    lo = float(search.get("lo", 0.5))
    hi = float(search.get("hi", 3.0))
    resolution = float(search.get("resolution", 1e-3))
    rows = []
    for case in resolve_cases(cfg):
        spec = _spec_from(case)
        label = _label_for(case, spec)
        _, _, matrix, _ = _band_for(case, spec)
        res = pexit_threshold(PexitProblem(matrix), lo=lo, hi=hi,
                              resolution=resolution)
        name = case.get("name", label)
        L = int(case.get("L", 200))
        rows.append((name, label, L, res))
        print(f"{name} L={L}: threshold {res.threshold_db:.6f} dB "
              f"(gap {res.gap_db:.6f})")
    path = Path(args.out_dir) / cfg.get("output", "thresholds.csv")
    write_threshold_csv(rows, path=path,
                        comments={"config_sha256": config_hash(cfg)})
    print(f"wrote {path}")
    return 0


def cmd_catalog(args) -> int:
    print(f"{'label':34} {'n':>3} {'m':>4} {'J':>2} {'rate':>7} {'nu':>5}")
    for spec in catalog():
        print(f"{spec.label:34} {spec.n:>3} {spec.m:>4} {spec.J:>2} "
              f"{spec.n - 1}/{spec.n:<5} {spec.constraint_length:>5}")
    stubs = catalog_stubs()
    if stubs:
        print("\nknown parameter points without exponent tables:")
        for entry in stubs:
            print(f"  {entry}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scldpc",
        description="Construct, lift, validate, simulate, and analyse "
                    "spatially coupled LDPC codes built from convolutional "
                    "self-orthogonal codes.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add(name, func, help_text, config=True):
        p = sub.add_parser(name, help=help_text)
        if config:
            p.add_argument("-c", "--config", required=True,
                           help="JSON experiment config")
        p.add_argument("--out-dir", default=".", help="output directory")
        p.set_defaults(func=func)
        return p

    add("build", cmd_build, "write parity-check matrices (alist + coords)")
    add("validate", cmd_validate,
        "orthogonality / girth / bounded-distance checks")
    p_sim = add("simulate", cmd_simulate, "Monte-Carlo BER/FER runs")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="override the channel seed")
    p_sim.add_argument("--threads", type=int, default=1,
                       help="worker processes across SNR points")
    add("threshold", cmd_threshold, "iterative decoding thresholds (CSV)")
    add("catalog", cmd_catalog, "list built-in generator catalogs",
        config=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except RuntimeError as e:
        print(f"failed: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
