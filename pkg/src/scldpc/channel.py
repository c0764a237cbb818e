"""AWGN/BPSK Monte-Carlo harness with reproducible per-frame noise streams.

Every frame draws from its own Philox substream keyed by (master seed,
point index, frame index), so results are byte-identical regardless of batch
size and a run can be reproduced from the CSV metadata alone.  Error counts
split by column role: information bits, parity bits, and termination bits
(the last are excluded from all rates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np
from scipy import special

from .codec import (
    Code,
    DecoderContext,
    SwdConfig,
    bp_decode_window,
    majority_logic_decode,
    sliding_window_decode,
)

__all__ = [
    "SimConfig",
    "SimResult",
    "CSV_FIELDS",
    "run_sim",
    "write_csv",
    "noise_sigma",
    "uncoded_ber",
    "frame_rng",
]

_MASK64 = (1 << 64) - 1


def noise_sigma(ebn0_db: float, rate: float) -> float:
    """Noise standard deviation for BPSK at the given Eb/N0, charging the
    transmitted energy of every code bit (termination overhead included)
    against the information bits."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def uncoded_ber(ebn0_db: float) -> float:
    """BPSK bit error rate without coding: Q(sqrt(2*Eb/N0))."""
    return 0.5 * float(special.erfc(math.sqrt(10.0 ** (ebn0_db / 10.0))))


def frame_rng(seed: int, point_idx: int, frame_idx: int) -> np.random.Generator:
    """Independent generator for one (SNR point, frame) pair."""
    word = ((point_idx << 40) | frame_idx) & _MASK64
    return np.random.Generator(np.random.Philox(key=[seed & _MASK64, word]))


@dataclass(frozen=True)
class SimConfig:
    """Simulation plan: SNR points, decoder choice, and stopping rules.

    The run stops at an SNR point once target_frame_errors frames are in
    error, or max_frames frames are decoded, whichever comes first; at least
    min_frames are always decoded.  Stopping is checked on batch boundaries,
    which keeps reruns deterministic.
    """

    ebn0_db: tuple = (5.2,)
    decoder: str = "swd"  # "swd", "bp", or "ml" (one-shot threshold decoding)
    iterations: int = 20
    W: int = 4
    min_sum: bool = False
    llr_clip: float = 25.0
    seed: int = 0
    batch: int = 64
    target_frame_errors: int = 100
    max_frames: int = 1_000_000
    min_frames: int = 128
    all_zero: bool = False
    point_offset: int = 0  # index of ebn0_db[0] within the full grid
    # Rate used to turn Eb/N0 into noise variance: "actual" charges the
    # termination overhead (R_t), "nominal" uses the asymptotic rate of the
    # unterminated code, the usual convention for BER-vs-Eb/N0 axes.
    rate_basis: str = "actual"

    def __post_init__(self):
        object.__setattr__(self, "ebn0_db", tuple(float(x) for x in self.ebn0_db))
        if self.decoder not in ("swd", "bp", "ml"):
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.batch < 1 or self.max_frames < 1:
            raise ValueError("batch and max_frames must be >= 1")
        if self.rate_basis not in ("actual", "nominal"):
            raise ValueError(f"unknown rate_basis {self.rate_basis!r}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


CSV_FIELDS = (
    "ebn0_db",
    "frames",
    "info_bits",
    "parity_bits",
    "info_bit_errors",
    "parity_bit_errors",
    "frame_errors",
    "ber_info",
    "ber_parity",
    "ber_all",
    "ci95_half_width",
    "seed",
)


@dataclass
class SimResult:
    ebn0_db: float
    frames: int
    info_bits: int
    parity_bits: int
    info_bit_errors: int
    parity_bit_errors: int
    frame_errors: int
    seed: int

    @property
    def ber_info(self) -> float:
        return self.info_bit_errors / self.info_bits if self.info_bits else 0.0

    @property
    def ber_parity(self) -> float:
        return self.parity_bit_errors / self.parity_bits if self.parity_bits else 0.0

    @property
    def ber_all(self) -> float:
        total = self.info_bits + self.parity_bits
        return (self.info_bit_errors + self.parity_bit_errors) / total if total else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def ci95_half_width(self) -> float:
        """Normal-approximation 95% half width on ber_info."""
        if not self.info_bits:
            return 0.0
        p = self.ber_info
        return 1.96 * math.sqrt(max(p * (1.0 - p), 0.0) / self.info_bits)

    def to_row(self) -> list:
        return [getattr(self, name) for name in CSV_FIELDS]


def _decode(code: Code, cfg: SimConfig, llr, ctx: DecoderContext):
    if cfg.decoder == "ml":
        # hard-decision threshold decoding corrects the information streams
        # only; parity positions keep their channel decisions
        hard = (np.asarray(llr) < 0).astype(np.uint8)
        est = hard.copy()
        k = code.spec.n - 1
        streams = majority_logic_decode(code.spec, hard)
        idx = (np.arange(streams.size) // k) * code.spec.n + np.arange(streams.size) % k
        est[idx] = streams
        return est
    if cfg.decoder == "bp":
        hard, _ = bp_decode_window(
            code.matrix, llr, iterations=cfg.iterations,
            llr_clip=cfg.llr_clip, min_sum=cfg.min_sum, ctx=ctx,
        )
        return hard
    swd = SwdConfig(
        W=cfg.W, iterations_per_position=cfg.iterations,
        llr_clip=cfg.llr_clip, min_sum=cfg.min_sum,
    )
    hard, _ = sliding_window_decode(code.matrix, swd, llr, ctx=ctx)
    return hard


def run_sim(code: Code, cfg: SimConfig, progress=None) -> list:
    """Monte-Carlo BER/FER of one code over the configured SNR points.

    progress, if given, is called as progress(point_idx, SimResult) after
    every batch with the running tallies.
    """
    if cfg.decoder == "ml" and (code.form != "systematic_ff" or code.M != 1):
        raise ValueError("ml decoding needs the systematic form at M=1")
    masks = code.col_masks()
    info_mask = masks["info"]
    parity_mask = masks["parity"]
    counted = info_mask | parity_mask
    n_info = int(info_mask.sum())
    n_parity = int(parity_mask.sum())
    ctx = code.ctx
    results = []
    eb_rate = code.rate if cfg.rate_basis == "actual" else code.nominal_rate
    for p_idx, ebn0 in enumerate(cfg.ebn0_db):
        sigma = noise_sigma(ebn0, eb_rate)
        sigma2 = sigma * sigma
        res = SimResult(
            ebn0_db=ebn0, frames=0, info_bits=0, parity_bits=0,
            info_bit_errors=0, parity_bit_errors=0, frame_errors=0,
            seed=cfg.seed,
        )
        while res.frames < cfg.max_frames:
            todo = min(cfg.batch, cfg.max_frames - res.frames)
            rngs = [
                frame_rng(cfg.seed, cfg.point_offset + p_idx, res.frames + j)
                for j in range(todo)
            ]
            if cfg.all_zero:
                cws = np.zeros((todo, code.n_bits), dtype=np.uint8)
            else:
                info = np.stack(
                    [r.integers(0, 2, size=code.info_len, dtype=np.uint8) for r in rngs]
                )
                cws = code.encode(info)
            x = 1.0 - 2.0 * cws.astype(np.float64)
            for j, r in enumerate(rngs):
                y = x[j] + sigma * r.normal(size=code.n_bits)
                hard = _decode(code, cfg, 2.0 * y / sigma2, ctx)
                wrong = (hard != cws[j]) & counted
                ie = int(np.count_nonzero(wrong & info_mask))
                pe = int(np.count_nonzero(wrong & parity_mask))
                res.info_bit_errors += ie
                res.parity_bit_errors += pe
                res.frame_errors += bool(ie or pe)
                res.frames += 1
                res.info_bits += n_info
                res.parity_bits += n_parity
            if progress is not None:
                progress(p_idx, res)
            if (
                res.frames >= cfg.min_frames
                and res.frame_errors >= cfg.target_frame_errors
            ):
                break
        results.append(res)
    return results


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def write_csv(results, path=None, comments: dict | None = None) -> str:
    """Render results as CSV; `comments` become leading '# key=value' lines."""
    lines = []
    for key in sorted(comments or {}):
        lines.append(f"# {key}={comments[key]}")
    lines.append(",".join(CSV_FIELDS))
    for res in results:
        lines.append(",".join(_fmt(v) for v in res.to_row()))
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
