"""Encoders and decoders for the banded codes.

Three encoder forms share one graph engine:

* ``systematic_ff``: n streams per time unit, the last being the degree-1
  parity column; parity solves block-by-block with no feedback.
* ``rsc``: the regular matrix (parity columns dropped) with its last stream
  recast as a recursive parity — information streams are copied verbatim and
  the parity stream is solved sequentially through the band, which realizes
  the feedback division by the last generator polynomial.
* ``nonsystematic_ff``: same matrix as rsc, but information streams are first
  precoded by the last generator polynomial, reproducing the feedforward
  generator map (the parity solve then cancels the division exactly).

Termination: a band spanning L transmitted time units has memory*M trailing
check rows past the last parity column.  The encoder reserves memory*M late
information positions ("pivot" bits), solves them against the tail syndrome
through a cached GF(2) system, and re-runs the forward pass, so every frame
satisfies all (L+memory)*M checks with no padded columns.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .csoc import CsocSpec, StructuralError
from .lifting import EdgeSpreadProto, LiftedCode, lift
from .matrices import (
    ROLE_INFO,
    ROLE_PARITY,
    BandMatrix,
    TerminationInfo,
    build_systematic_H,
    column_templates,
    terminate,
)

FORMS = ("systematic_ff", "nonsystematic_ff", "rsc")
_MATRIX_FORM = {
    "systematic_ff": "systematic",
    "nonsystematic_ff": "nonsystematic",
    "rsc": "nonsystematic",
}

__all__ = [
    "FORMS",
    "Code",
    "DecoderContext",
    "SwdConfig",
    "make_code",
    "majority_logic_decode",
    "bp_decode_window",
    "sliding_window_decode",
]


# ---------------------------------------------------------------------------
# graph encoder
# ---------------------------------------------------------------------------

class _GraphEncoder:
    """Blockwise parity solve over the (possibly lifted) terminated band.

    Information bits live in an (F, L, k, M) array; the forward pass
    accumulates their syndrome contributions, solves each parity block
    through the permutation inverse, and feeds it back into later rows.
    """

    def __init__(self, code: "Code"):
        exps, roles = column_templates(code.spec, _MATRIX_FORM[code.form])
        self.exps = [tuple(e) for e in exps]
        self.cpt = len(exps)
        self.k = self.cpt - 1
        self.p = self.cpt - 1  # parity stream index
        if roles[self.p] != ROLE_PARITY or 0 not in self.exps[self.p]:
            raise StructuralError("last stream must be a parity stream with g_0=1")
        self.form = code.form
        self.L = code.L
        self.M = code.M
        self.mem = code.base.memory
        self.need = self.mem * self.M

        self.trivial = code.lifting is None
        if not self.trivial:
            asg = code.lifting.assignment
            from .lifting import _perm_of

            def table(q, e):
                out = np.empty((self.L, self.M), dtype=np.int64)
                for t in range(self.L):
                    out[t] = _perm_of(asg[(t + e, t * self.cpt + q)], self.M)
                return out

            self._perm = {
                (q, e): table(q, e)
                for q in range(self.cpt)
                for e in self.exps[q]
            }
            self._pinv = np.argsort(self._perm[(self.p, 0)], axis=1)
        self._pivot_flat = None  # set by _ensure_termination
        self._short_flat = None
        self._pivot_cols = None
        self._free_idx = None
        self._rows_sel = None
        self._binv_t = None

    # -- forward pass -------------------------------------------------------

    def forward(self, x: np.ndarray):
        """x: (F, L, k, M) info bits -> (parity (F, L, M), tail (F, mem, M))."""
        F = x.shape[0]
        L, M, mem = self.L, self.M, self.mem
        S = np.zeros((F, L + mem, M), dtype=np.uint8)
        tsel = np.arange(L)[:, None]
        for q in range(self.k):
            xq = x[:, :, q, :]
            for e in self.exps[q]:
                if self.trivial:
                    contrib = xq
                else:
                    contrib = xq[:, tsel, self._perm[(q, e)]]
                S[:, e : e + L, :] ^= contrib
        feedback = [e for e in self.exps[self.p] if e > 0]
        parity = np.empty((F, L, M), dtype=np.uint8)
        if self.trivial and not feedback:
            parity[:] = S[:, :L, :]
        else:
            for t in range(L):
                p_t = S[:, t, :] if self.trivial else S[:, t, self._pinv[t]]
                parity[:, t, :] = p_t
                for e in feedback:
                    if self.trivial:
                        S[:, t + e, :] ^= p_t
                    else:
                        S[:, t + e, :] ^= p_t[:, self._perm[(self.p, e)][t]]
        return parity, S[:, L:, :]

    # -- termination --------------------------------------------------------

    def _impulse_tails(self, flat_idx):
        x = np.zeros((len(flat_idx), self.L * self.k * self.M), dtype=np.uint8)
        x[np.arange(len(flat_idx)), flat_idx] = 1
        _, tail = self.forward(x.reshape(-1, self.L, self.k, self.M))
        return tail.reshape(len(flat_idx), self.need)

    def _candidates(self, t_hi, t_lo):
        """Reserved-position search order: latest time units first."""
        k, M = self.k, self.M
        return np.array(
            [
                (t * k + q) * M + lane
                for t in range(t_hi - 1, t_lo - 1, -1)
                for q in range(k - 1, -1, -1)
                for lane in range(M - 1, -1, -1)
            ],
            dtype=np.int64,
        )

    def _ensure_termination(self):
        if self._free_idx is not None:
            return
        if self.need == 0:
            self._pivot_flat = np.empty(0, dtype=np.int64)
            self._short_flat = np.empty(0, dtype=np.int64)
            self._finish_index()
            return
        L = self.L
        chunk = max(1, self.mem)
        basis: dict[int, int] = {}
        pivots: list[int] = []
        columns: list[np.ndarray] = []
        t_hi = L
        stalls = 0
        while t_hi > 0 and len(pivots) < self.need and stalls < 2:
            t_lo = max(0, t_hi - chunk)
            cand = self._candidates(t_hi, t_lo)
            tails = self._impulse_tails(cand)
            packed = np.packbits(tails, axis=1, bitorder="little")
            grew = False
            for j in range(len(cand)):
                v = int.from_bytes(packed[j].tobytes(), "little")
                while v:
                    lead = v.bit_length() - 1
                    if lead not in basis:
                        break
                    v ^= basis[lead]
                if v:
                    basis[v.bit_length() - 1] = v
                    pivots.append(int(cand[j]))
                    columns.append(tails[j])
                    grew = True
                    if len(pivots) == self.need:
                        break
            stalls = 0 if grew else stalls + 1
            t_hi = t_lo
        # The tail map can be rank-deficient: generators of even weight share
        # the factor 1+D, so the all-ones functional annihilates every
        # reachable syndrome.  Solve on a row basis of what is reachable and
        # shorten (fix to zero) enough extra late positions to keep the
        # information length at k*L*M - memory*M exactly.
        rank = len(pivots)
        a = np.stack(columns).T.astype(np.uint8) if rank else np.zeros((self.need, 0), np.uint8)
        self._rows_sel, self._binv_t = _gf2_row_solver(a)
        self._pivot_flat = np.array(pivots, dtype=np.int64)
        shortfall = self.need - rank
        shorts: list[int] = []
        if shortfall and self.form != "nonsystematic_ff":
            taken = set(pivots)
            t_hi = L
            while t_hi > 0 and len(shorts) < shortfall:
                t_lo = max(0, t_hi - chunk)
                for f in self._candidates(t_hi, t_lo):
                    if int(f) not in taken:
                        shorts.append(int(f))
                        if len(shorts) == shortfall:
                            break
                t_hi = t_lo
        self._short_flat = np.array(shorts, dtype=np.int64)
        self._finish_index()

    def _finish_index(self):
        total = self.L * self.k * self.M
        mask = np.ones(total, dtype=bool)
        reserved = np.concatenate([self._pivot_flat, self._short_flat])
        if self.form == "nonsystematic_ff":
            # input is a convolution, not a placement; nothing is reserved
            self._free_idx = np.arange(total, dtype=np.int64)
        else:
            mask[reserved] = False
            self._free_idx = np.flatnonzero(mask)
        # absolute codeword columns of the reserved bits
        t, rem = np.divmod(reserved, self.k * self.M)
        q, lane = np.divmod(rem, self.M)
        self._pivot_cols = (t * self.cpt + q) * self.M + lane

    def _solve_pivots(self, x):
        if self.need == 0 or not len(self._pivot_flat):
            return
        _, tail = self.forward(x)
        s = tail.reshape(x.shape[0], self.need)[:, self._rows_sel].astype(np.int32)
        delta = ((s @ self._binv_t) & 1).astype(np.uint8)
        flat = x.reshape(x.shape[0], -1)
        flat[:, self._pivot_flat] ^= delta

    # -- public entry -------------------------------------------------------

    @property
    def info_len(self) -> int:
        if self.form == "nonsystematic_ff":
            return (self.L - self.mem) * self.k * self.M
        return self.L * self.k * self.M - self.need

    def info_positions(self) -> np.ndarray:
        """Codeword columns carrying the input bits, in input order.

        Only meaningful for the two systematic forms; the feed-forward
        nonsystematic encoder convolves its input, so no codeword column
        equals an input bit.
        """
        if self.form == "nonsystematic_ff":
            raise StructuralError(
                "nonsystematic feed-forward codewords do not contain the input bits"
            )
        self._ensure_termination()
        t, rem = np.divmod(self._free_idx, self.k * self.M)
        q, lane = np.divmod(rem, self.M)
        return (t * self.cpt + q) * self.M + lane

    def encode(self, info: np.ndarray) -> np.ndarray:
        self._ensure_termination()
        F = info.shape[0]
        L, k, M = self.L, self.k, self.M
        x = np.zeros((F, L, k, M), dtype=np.uint8)
        if self.form == "nonsystematic_ff":
            u = info.reshape(F, L - self.mem, k, M)
            for e in self.exps[self.p]:
                x[:, e : e + (L - self.mem), :, :] ^= u
        else:
            x.reshape(F, -1)[:, self._free_idx] = info
        self._solve_pivots(x)
        parity, tail = self.forward(x)
        if tail.any():
            raise StructuralError("termination solve failed to zero the tail")
        cw = np.empty((F, L, self.cpt, M), dtype=np.uint8)
        cw[:, :, : self.k, :] = x
        cw[:, :, self.p, :] = parity
        return cw.reshape(F, -1)


def _gf2_row_solver(a: np.ndarray):
    """Row basis and solver for a full-column-rank binary matrix.

    Returns (rows_sel, Binv.T as int32) where a[rows_sel] is square and
    invertible, so x = (s[rows_sel] @ Binv.T) & 1 solves a @ x = s for any s
    in the column space.
    """
    need, r = a.shape
    if r == 0:
        return np.empty(0, dtype=np.int64), np.zeros((0, 0), dtype=np.int32)
    packed = np.packbits(a, axis=1, bitorder="little")
    basis: dict[int, int] = {}
    rows_sel: list[int] = []
    for i in range(need):
        v = int.from_bytes(packed[i].tobytes(), "little")
        while v:
            lead = v.bit_length() - 1
            if lead not in basis:
                break
            v ^= basis[lead]
        if v:
            basis[v.bit_length() - 1] = v
            rows_sel.append(i)
            if len(rows_sel) == r:
                break
    if len(rows_sel) < r:
        raise StructuralError("termination solver lost rank")
    sel = np.array(rows_sel, dtype=np.int64)
    return sel, _gf2_inverse(a[sel]).T.astype(np.int32)


def _gf2_inverse(a: np.ndarray) -> np.ndarray:
    """Invert a dense binary matrix by Gauss-Jordan over GF(2)."""
    n = a.shape[0]
    aug = np.concatenate([a.copy(), np.eye(n, dtype=np.uint8)], axis=1)
    for c in range(n):
        rows = np.flatnonzero(aug[c:, c]) + c
        if not len(rows):
            raise StructuralError("singular termination system")
        r = rows[0]
        if r != c:
            aug[[c, r]] = aug[[r, c]]
        hit = np.flatnonzero(aug[:, c])
        hit = hit[hit != c]
        aug[hit] ^= aug[c]
    return aug[:, n:]


# ---------------------------------------------------------------------------
# code bundle
# ---------------------------------------------------------------------------

@dataclass
class Code:
    """A terminated, optionally lifted code ready for encoding and decoding."""

    spec: object  # CsocSpec or EdgeSpreadProto
    form: str
    L: int
    M: int
    base: BandMatrix
    matrix: BandMatrix
    term: TerminationInfo
    lifting: LiftedCode | None
    label: str = ""
    _encoder: _GraphEncoder | None = field(default=None, repr=False, compare=False)
    _ctx: "DecoderContext | None" = field(default=None, repr=False, compare=False)

    @property
    def encoder(self) -> _GraphEncoder:
        if self._encoder is None:
            self._encoder = _GraphEncoder(self)
        return self._encoder

    @property
    def ctx(self) -> "DecoderContext":
        if self._ctx is None:
            self._ctx = DecoderContext(self.matrix)
        return self._ctx

    @property
    def info_len(self) -> int:
        return self.encoder.info_len

    @property
    def info_positions(self) -> np.ndarray:
        return self.encoder.info_positions()

    @property
    def n_bits(self) -> int:
        return self.matrix.cols

    @property
    def rate(self) -> float:
        return self.term.rate

    @property
    def nominal_rate(self) -> float:
        """Asymptotic rate of the unterminated chain, (n0-1)/n0."""
        return self.term.unterminated_rate

    def latency(self, W: int) -> int:
        """Sliding-window latency in code bits: W * M * n * (m+1)."""
        return W * self.M * self.base.cols_per_time * (self.base.memory + 1)

    def encode(self, info) -> np.ndarray:
        info = np.asarray(info, dtype=np.uint8)
        single = info.ndim == 1
        if single:
            info = info[None, :]
        if info.shape[1] != self.info_len:
            raise ValueError(
                f"expected {self.info_len} information bits per frame, "
                f"got {info.shape[1]}"
            )
        cw = self.encoder.encode(info)
        return cw[0] if single else cw

    def col_masks(self) -> dict:
        """Boolean column masks: free information, parity, termination bits."""
        self.encoder._ensure_termination()
        info = self.matrix.col_roles == ROLE_INFO
        tmask = np.zeros(self.matrix.cols, dtype=bool)
        pc = self.encoder._pivot_cols
        if pc is not None and len(pc):
            tmask[pc] = True
        return {
            "info": info & ~tmask,
            "parity": self.matrix.col_roles == ROLE_PARITY,
            "termination": tmask,
        }


def make_code(
    spec_or_proto,
    form: str = "rsc",
    L: int = 200,
    M: int = 1,
    scheme: str = "circulant",
    lift_seed: int = 0,
    lifting: LiftedCode | None = None,
    label: str = "",
) -> Code:
    if form not in FORMS:
        raise ValueError(f"unknown form {form!r}; choose from {FORMS}")
    if isinstance(spec_or_proto, EdgeSpreadProto) and form != "rsc":
        raise ValueError("edge-spread protographs encode in rsc form only")
    base, term = terminate(spec_or_proto, L, _MATRIX_FORM[form])
    if form == "nonsystematic_ff" and L <= base.memory:
        raise ValueError("feedforward termination needs L > memory")
    if lifting is not None:
        if lifting.M != M and M != 1:
            raise ValueError("explicit lifting disagrees with M")
        M = lifting.M
        lc = lifting
    elif M > 1:
        lc = lift(base, M, scheme=scheme, seed=lift_seed)
    else:
        lc = None
    matrix = lc.expanded() if lc is not None else base
    if not label:
        stem = getattr(spec_or_proto, "label", "") or "code"
        label = f"{stem}-{form}-L{L}-M{M}"
    return Code(
        spec=spec_or_proto,
        form=form,
        L=L,
        M=M,
        base=base,
        matrix=matrix,
        term=term,
        lifting=lc,
        label=label,
    )


# ---------------------------------------------------------------------------
# majority-logic decoding
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=16)
def _ml_tables(spec: CsocSpec, T: int):
    mat = build_systematic_H(spec, T)
    csr = mat.to_csr(dtype=np.int64)
    exps = [np.array(g.exponents, dtype=np.int64) for g in spec.polys]
    return csr, exps


def majority_logic_decode(spec: CsocSpec, received) -> np.ndarray:
    """Definite (one-shot, no feedback) threshold decoding of the systematic
    form: each information bit is flipped when more than J/2 of its J
    orthogonal checks fail.  Corrects any floor(J/2) errors within a span of
    one constraint length."""
    r = np.asarray(received, dtype=np.uint8).ravel()
    if r.size == 0 or r.size % spec.n:
        raise ValueError("received length must be a positive multiple of n")
    T = r.size // spec.n
    csr, exps = _ml_tables(spec, T)
    synd = np.asarray(csr @ r.astype(np.int64)) % 2
    decoded = r.reshape(T, spec.n)[:, : spec.n - 1].copy()
    t = np.arange(T)[:, None]
    for q, e in enumerate(exps):
        fails = synd[t + e[None, :]].sum(axis=1)
        decoded[:, q] ^= (fails > spec.J // 2).astype(np.uint8)
    return decoded.ravel()


# ---------------------------------------------------------------------------
# belief propagation
# ---------------------------------------------------------------------------

_MAX_CHECK_DEGREE = 512  # compiled kernel stack buffer


class DecoderContext:
    """Edge layout shared by both kernel backends.

    Edges are numbered row-major; check_ptr delimits each check's edge run,
    edge_var maps edge -> variable, and var_edges/var_ptr regroup the same
    edge ids per variable.
    """

    def __init__(self, matrix: BandMatrix):
        self.matrix = matrix
        ones = matrix.ones
        self.edge_var = np.ascontiguousarray(ones[:, 1], dtype=np.int64)
        self.check_ptr = np.zeros(matrix.rows + 1, dtype=np.int64)
        np.cumsum(
            np.bincount(ones[:, 0], minlength=matrix.rows),
            out=self.check_ptr[1:],
        )
        order = np.lexsort((ones[:, 0], ones[:, 1]))
        self.var_edges = np.ascontiguousarray(order, dtype=np.int64)
        self.var_ptr = np.zeros(matrix.cols + 1, dtype=np.int64)
        np.cumsum(
            np.bincount(ones[:, 1], minlength=matrix.cols),
            out=self.var_ptr[1:],
        )
        deg = int(np.diff(self.check_ptr).max(initial=0))
        if deg > _MAX_CHECK_DEGREE:
            raise ValueError(
                f"check degree {deg} exceeds the kernel limit {_MAX_CHECK_DEGREE}"
            )
        self.num_edges = len(ones)


def _prep_llr(llr, cols, clip):
    arr = np.asarray(llr, dtype=np.float64)
    if arr.shape != (cols,):
        raise ValueError(f"expected {cols} LLRs, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("non-finite channel LLRs")
    return np.clip(arr, -clip, clip)


def bp_decode_window(
    matrix: BandMatrix,
    llr,
    iterations: int,
    llr_clip: float = 25.0,
    early_stop: bool = True,
    min_sum: bool = False,
    ctx: DecoderContext | None = None,
):
    """Flooding sum-product over the whole matrix.  Returns (hard, posterior)."""
    if ctx is None:
        ctx = DecoderContext(matrix)
    mat = ctx.matrix
    llr_c = _prep_llr(llr, mat.cols, llr_clip)
    msg_vc = llr_c[ctx.edge_var]
    msg_cv = np.zeros(ctx.num_edges, dtype=np.float64)
    posterior = llr_c.copy()
    hard = (posterior < 0).astype(np.uint8)
    for _ in range(iterations):
        kernels.check_pass(msg_vc, msg_cv, ctx.check_ptr, 0, mat.rows,
                           llr_clip, min_sum, 0.75)
        kernels.var_pass(msg_vc, msg_cv, llr_c, posterior,
                         ctx.var_edges, ctx.var_ptr, 0, mat.cols, llr_clip)
        hard = (posterior < 0).astype(np.uint8)
        if early_stop and kernels.syndrome_ok(hard, ctx.edge_var,
                                              ctx.check_ptr, 0, mat.rows):
            break
    return hard, posterior


@dataclass
class SwdConfig:
    """Sliding window settings.  W counts constraint lengths, i.e. the window
    spans W*(memory+1) time units; latency is W*M*n*(memory+1) code bits."""

    W: int = 4
    iterations_per_position: int = 20
    llr_clip: float = 25.0
    early_stop: bool = True
    min_sum: bool = False

    def __post_init__(self):
        if self.W < 1:
            raise ValueError("window size W must be >= 1")


def sliding_window_decode(
    matrix: BandMatrix,
    cfg: SwdConfig,
    llr,
    ctx: DecoderContext | None = None,
):
    """Window BP over the terminated band, committing one time unit per shift.

    Messages persist across shifts; committed variables pin their
    variable-to-check messages at +/-llr_clip and are never revisited.
    Returns (hard, posterior) over all columns.
    """
    if ctx is None:
        ctx = DecoderContext(matrix)
    mat = ctx.matrix
    L, mem = mat.time_units, mat.memory
    rpt, cpt = mat.rows_per_time, mat.cols_per_time
    span = cfg.W * (mem + 1)  # window reach in time units
    llr_c = _prep_llr(llr, mat.cols, cfg.llr_clip)
    msg_vc = llr_c[ctx.edge_var]
    msg_cv = np.zeros(ctx.num_edges, dtype=np.float64)
    posterior = llr_c.copy()
    hard = (posterior < 0).astype(np.uint8)
    for t0 in range(L):
        r_lo = t0 * rpt
        r_hi = min(t0 + span, L + mem) * rpt
        v_lo = t0 * cpt
        v_hi = min(t0 + span, L) * cpt
        for _ in range(cfg.iterations_per_position):
            kernels.check_pass(msg_vc, msg_cv, ctx.check_ptr, r_lo, r_hi,
                               cfg.llr_clip, cfg.min_sum, 0.75)
            kernels.var_pass(msg_vc, msg_cv, llr_c, posterior,
                             ctx.var_edges, ctx.var_ptr, v_lo, v_hi,
                             cfg.llr_clip)
            hard[v_lo:v_hi] = posterior[v_lo:v_hi] < 0
            if cfg.early_stop and kernels.syndrome_ok(
                hard, ctx.edge_var, ctx.check_ptr, r_lo, r_hi
            ):
                break
        # commit the target block: freeze decisions, pin outgoing messages
        e_lo = ctx.var_ptr[v_lo]
        e_hi = ctx.var_ptr[v_lo + cpt]
        eids = ctx.var_edges[e_lo:e_hi]
        deg = np.diff(ctx.var_ptr[v_lo : v_lo + cpt + 1])
        pin = (1.0 - 2.0 * hard[v_lo : v_lo + cpt]) * cfg.llr_clip
        msg_vc[eids] = np.repeat(pin, deg)
    return hard, posterior
