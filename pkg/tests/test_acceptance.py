"""Release gates: one test per criterion, each printing a [PASS]/[FAIL] line
with the measured figure of merit next to its budget."""

import itertools
import json
import math
import time

import numpy as np
import pytest

from test_matrices import NS_CELLS, SYS_CELLS, assert_cells

from scldpc import (
    SimConfig,
    build_nonsystematic_H,
    build_systematic_H,
    bp_decode_window,
    catalog_lookup,
    girth,
    majority_logic_decode,
    make_code,
    min_distance_bounded,
    noise_sigma,
    run_sim,
    search_csoc,
    terminate,
    termination_rate,
    write_csv,
)
from scldpc.channel import frame_rng
from scldpc.cli import main as cli_main
from scldpc.lifting import EdgeSpreadProto, lift, search_girth6_lifting
from scldpc.pexit import PexitProblem, pexit_threshold


def report(criterion: str, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    print(line)
    assert ok, line


def ci_bounds(errors: int, bits: int):
    """Conservative 95% envelope on an error rate (rule-of-three at zero)."""
    spread = 1.96 * math.sqrt(errors)
    return max(errors - spread, 0.0) / bits, (errors + spread + 3.0) / bits


@pytest.fixture(scope="module")
def massey():
    return catalog_lookup("massey-r23-m13-j4")


@pytest.fixture(scope="module")
def robinson():
    return catalog_lookup("robinson-r34-m19-j4")


def test_criterion_01_bit_exact_matrices(massey):
    t0 = time.time()
    sys_band = build_systematic_H(massey, 5)
    ns_band = build_nonsystematic_H(massey, 7)
    assert_cells(sys_band.to_dense(), SYS_CELLS)
    assert_cells(ns_band.to_dense(), NS_CELLS)
    elapsed = time.time() - t0
    report(
        "criterion-1 bit-exact matrices",
        sys_band.to_dense().shape == (18, 15)
        and ns_band.to_dense().shape == (20, 14)
        and elapsed < 1.0,
        f"18x15 and 20x14 grids entry-exact; {elapsed:.3f}s < 1s",
    )


def test_criterion_02_majority_logic_guarantee(massey):
    t0 = time.time()
    T = 2 * (massey.m + 1)
    nu = massey.constraint_length  # 42
    corrected = total = 0
    for w in (1, 2):
        for pat in itertools.combinations(range(nu), w):
            r = np.zeros(T * massey.n, dtype=np.uint8)
            r[list(pat)] = 1
            corrected += not majority_logic_decode(massey, r).any()
            total += 1
    elapsed = time.time() - t0
    report(
        "criterion-2 threshold-decoding guarantee",
        total == 903 and corrected == 903 and elapsed < 10.0,
        f"{corrected}/{total} weight<=2 patterns in {nu} bits corrected; "
        f"{elapsed:.1f}s < 10s",
    )


def test_criterion_03_lifting_properties(massey, robinson):
    t0 = time.time()
    cases = failures = 0
    for spec in (massey, robinson):
        base = build_nonsystematic_H(spec, 24)
        for M in (2, 4, 8, 16):
            for scheme in ("random", "circulant"):
                for seed in range(4):
                    lifted = lift(base, M, scheme=scheme, seed=seed).expanded()
                    g = girth(lifted).girth
                    d = min_distance_bounded(lifted, w_max=spec.J + 1)
                    found = d.min_weight_found
                    ok = (g is None or g >= 6) and (found is None or found > spec.J)
                    cases += 1
                    failures += not ok
    elapsed = time.time() - t0
    report(
        "criterion-3 lifting girth/distance",
        cases >= 50 and failures == 0 and elapsed < 300.0,
        f"{cases} liftings, girth >= 6 and no null combination of weight <= J "
        f"in all; {elapsed:.0f}s < 300s",
    )


def test_criterion_04_algebraic_identities(massey):
    rng = np.random.default_rng(0xACCE55)
    frames = 10_000
    checked = 0
    for form in ("systematic_ff", "nonsystematic_ff", "rsc"):
        for M in (1, 4):
            code = make_code(massey, form=form, L=50, M=M,
                             scheme="circulant", lift_seed=0)
            csr = code.matrix.to_csr(dtype=np.int64)
            u = rng.integers(0, 2, size=(frames, code.info_len), dtype=np.uint8)
            v = code.encode(u)
            syndrome = csr @ v.T.astype(np.int64) % 2
            assert not syndrome.any(), (form, M)
            if form != "nonsystematic_ff":
                assert np.array_equal(v[:, code.info_positions], u), (form, M)
            checked += frames
    report(
        "criterion-4 algebraic identities",
        checked == 60_000,
        f"H.v=0 on {checked} frames across 3 forms x M in {{1,4}}; "
        "systematic transparency exact",
    )


def test_criterion_05_termination_rates():
    cases = [
        (14, 94, 500, 0.915),   # rate 13/14 transmitted
        (11, 324, 1000, 0.880),  # rate 10/11 transmitted
        (3, 19, 200, 0.635),    # rate 2/3, memory 19
        (3, 10, 200, 0.650),    # rate 2/3, memory 10
    ]
    got = [round(termination_rate(cpt, m, L), 3) for cpt, m, L, _ in cases]
    want = [w for _, _, _, w in cases]
    report(
        "criterion-5 termination-rate formula",
        got == want,
        f"R_t to 3 decimals: {got} == {want}",
    )


@pytest.mark.slow
def test_criterion_06_bp_matches_ml_oracle(massey):
    t0 = time.time()
    h = build_nonsystematic_H(massey, 4).restrict_rows(4)
    dense = h.to_dense()
    n = dense.shape[1]
    cand = np.array([[(v >> i) & 1 for i in range(n)] for v in range(2 ** n)],
                    dtype=np.uint8)
    cws = cand[((cand @ dense.T) % 2 == 0).all(axis=1)]
    assert len(cws) == 16
    X = 1.0 - 2.0 * cws.astype(np.float64)
    sigma = noise_sigma(6.0, 0.5)
    frames = 100_000
    ml_err = bp_err = 0
    for f in range(frames):
        rng = frame_rng(42, 0, f)
        idx = int(rng.integers(len(cws)))
        y = X[idx] + sigma * rng.normal(size=n)
        ml_err += int(np.argmin(((y[None, :] - X) ** 2).sum(axis=1))) != idx
        hard, _ = bp_decode_window(h, 2.0 * y / sigma ** 2, iterations=50)
        bp_err += not np.array_equal(hard, cws[idx])
    elapsed = time.time() - t0
    ratio = bp_err / max(ml_err, 1)
    report(
        "criterion-6 BP vs exhaustive ML",
        ml_err > 0 and ratio <= 2.0 and elapsed < 600.0,
        f"WER bp {bp_err / frames:.5f} vs ml {ml_err / frames:.5f} over "
        f"{frames} frames (ratio {ratio:.2f} <= 2); {elapsed:.0f}s < 600s",
    )


@pytest.mark.nightly
def test_criterion_07_systematic_vs_nonsystematic(massey, robinson):
    budget_bits = 10 ** 8

    def run(code):
        counted = int(code.col_masks()["info"].sum() + code.col_masks()["parity"].sum())
        frames = -(-budget_bits // counted)
        # Eb charges the terminated rate (the default), like every other run
        # in this repo.  With rate_basis="nominal" the non-systematic BER
        # drops ~10x but the parity/info ratio rises ~20% past its band, so
        # neither basis satisfies all three checks below; the default is kept
        # as the honest convention.
        cfg = SimConfig(ebn0_db=(5.2,), decoder="swd", W=4, iterations=20,
                        seed=2026, batch=512, min_frames=frames,
                        max_frames=frames, target_frame_errors=2 ** 62)
        return run_sim(code, cfg)[0]

    sys_res = run(make_code(massey, form="systematic_ff", L=200))
    ns_res = run(make_code(robinson, form="nonsystematic_ff", L=200))
    for res in (sys_res, ns_res):
        assert res.info_bits + res.parity_bits >= budget_bits
    ratio = sys_res.ber_parity / sys_res.ber_info if sys_res.ber_info else math.inf
    ordering = ns_res.ber_info < sys_res.ber_info < sys_res.ber_all
    report(
        "criterion-7 systematic vs non-systematic at 5.2 dB",
        ordering and 3.0 <= ratio <= 6.0 and ns_res.ber_info <= 1e-6,
        f"ns {ns_res.ber_info:.3e} < sys-info {sys_res.ber_info:.3e} < "
        f"sys-all {sys_res.ber_all:.3e}; parity/info {ratio:.2f} in [3,6]; "
        f"ns <= 1e-6",
    )


@pytest.mark.slow
def test_criterion_08_threshold_table(robinson):
    t0 = time.time()
    code_v = search_csoc(4, 3, 10, seed=0)
    expected = {
        ("I", 200): 1.349854, ("III", 200): 1.186035,
        ("V", 200): 1.470032, ("VII", 200): 1.392822,
        ("I", 1000): 1.190735, ("III", 1000): 1.220947,
        ("V", 1000): 1.394165, ("VII", 1000): 1.425049,
    }

    def proto(code, L):
        if code == "I":
            return terminate(robinson, L, "nonsystematic")[0]
        if code == "III":
            return EdgeSpreadProto(3, 4).build(L)
        if code == "V":
            return terminate(code_v, L, "nonsystematic")[0]
        return EdgeSpreadProto(3, 3).build(L)

    worst = 0.0
    results = {}
    for (code, L), target in expected.items():
        res = pexit_threshold(PexitProblem(proto(code, L)), lo=1.0, hi=1.7)
        results[(code, L)] = res
        worst = max(worst, abs(res.threshold_db - target))
        assert abs(res.gap_db - (res.threshold_db - res.capacity_at_rate_db)) < 1e-4
    elapsed = time.time() - t0
    coupling_gain = results[("I", 1000)].threshold_db < results[("I", 200)].threshold_db
    report(
        "criterion-8 threshold table",
        worst <= 0.05 and coupling_gain and elapsed < 1800.0,
        f"8/8 thresholds within {worst:.4f} dB of target (budget 0.05); gaps "
        f"consistent to 1e-4; L=1000 improves code I; {elapsed:.0f}s < 1800s",
    )


@pytest.mark.slow
def test_criterion_09_family_orderings(robinson):
    t0 = time.time()
    code_v_spec = search_csoc(4, 3, 10, seed=0)

    def es_code(n, J, M, L=200, seed=0):
        proto = EdgeSpreadProto(n, J)
        base, _ = terminate(proto, L, "band")
        lc = search_girth6_lifting(base, M, "time_invariant_circulant", seed=seed)
        assert lc is not None
        return make_code(proto, form="rsc", L=L, lifting=lc)

    codes = {
        "I": (make_code(robinson, form="nonsystematic_ff", L=200, M=15,
                        scheme="circulant", lift_seed=1), 4),
        "V": (make_code(code_v_spec, form="nonsystematic_ff", L=200, M=28,
                        scheme="circulant", lift_seed=1), 4),
        "III": (es_code(3, 4, 100), 3),
        "VII": (es_code(3, 3, 100), 4),
    }
    # the four codes are compared at (near-)equal decoding latency in bits:
    # three sit at exactly 3600, the J=3 CSOC at 3696 (within 3%)
    latency = {k: W * c.M * 3 * (c.base.memory + 1) for k, (c, W) in codes.items()}
    assert latency["I"] == latency["III"] == latency["VII"] == 3600
    assert latency["V"] == 3696

    def measure(name, ebn0, max_frames):
        code, W = codes[name]
        cfg = SimConfig(ebn0_db=(ebn0,), decoder="swd", W=W, iterations=20,
                        seed=11, batch=8, min_frames=8, max_frames=max_frames,
                        target_frame_errors=60)
        r = run_sim(code, cfg)[0]
        errs = r.info_bit_errors + r.parity_bit_errors
        bits = r.info_bits + r.parity_bits
        return (r.ber_all, *ci_bounds(errs, bits))

    # comparison points from the calibration scans: each pair is evaluated
    # where its weaker member runs near BER 1e-4 on this hardware budget
    SNR_CSOC = 2.4
    SNR_ES = 3.7
    # equal-latency construction comparison point
    SNR_X = 4.0

    b_i = measure("I", SNR_CSOC, 64)
    b_v = measure("V", SNR_CSOC, 96)
    b_iii = measure("III", SNR_ES, 96)
    b_vii = measure("VII", SNR_ES, 96)
    x_i = measure("I", SNR_X, 64)
    x_iii = measure("III", SNR_X, 96)
    x_v = measure("V", SNR_X, 32)
    x_vii = measure("VII", SNR_X, 96)
    elapsed = time.time() - t0

    strength = b_i[2] < b_v[1] and b_iii[2] < b_vii[1]
    construction = x_i[2] < x_iii[1] and x_v[2] < x_vii[1]
    near_1e4 = 1e-5 < b_v[0] < 1e-3 and 1e-5 < b_vii[0] < 1e-3
    report(
        "criterion-9 family orderings",
        strength and construction and near_1e4 and elapsed < 900.0,
        f"J=4 beats J=3 (I {b_i[0]:.2e} < V {b_v[0]:.2e} @ {SNR_CSOC} dB; "
        f"III {b_iii[0]:.2e} < VII {b_vii[0]:.2e} @ {SNR_ES} dB) and "
        f"CSOC beats edge-spread at equal latency (I {x_i[0]:.2e} < III "
        f"{x_iii[0]:.2e}; V {x_v[0]:.2e} < VII {x_vii[0]:.2e} @ {SNR_X} dB), "
        f"all outside 95% CIs; {elapsed:.0f}s < 900s",
    )


def test_criterion_10_byte_identical_reruns(tmp_path):
    cfg = {
        "label": "determinism",
        "code": {"catalog": "massey-r23-m13-j4"},
        "form": "rsc",
        "L": 30,
        "decoder": {"kind": "bp", "iterations": 10},
        "channel": {"ebn0_db": [4.0, 5.0], "seed": 3, "batch": 16,
                    "max_frames": 32, "min_frames": 16,
                    "target_frame_errors": 1000000},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert cli_main(["simulate", "-c", str(path),
                     "--out-dir", str(tmp_path / "a")]) == 0
    assert cli_main(["simulate", "-c", str(path),
                     "--out-dir", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "determinism.csv").read_bytes()
    b = (tmp_path / "b" / "determinism.csv").read_bytes()
    report(
        "criterion-10 determinism",
        a == b and len(a) > 0,
        f"simulate rerun with identical config+seed is byte-identical "
        f"({len(a)} bytes)",
    )
