"""Vectorized message-passing kernels (fallback when the compiled extension
is unavailable).

Both backends share the same edge layout: edges are numbered row-major
(grouped by check row, delimited by check_ptr); var_edges lists the same edge
ids grouped per variable (delimited by var_ptr).  Messages live in flat
per-edge arrays so a sliding window can operate on contiguous slices.
"""

from __future__ import annotations

import numpy as np

_ATANH_LIM = 1.0 - 1e-15
_TINY = 1e-12


def check_pass(msg_vc, msg_cv, check_ptr, c_lo, c_hi, clip, min_sum=False, alpha=0.75):
    """Update check->variable messages for checks [c_lo, c_hi)."""
    e_lo = int(check_ptr[c_lo])
    e_hi = int(check_ptr[c_hi])
    if e_hi <= e_lo:
        return
    starts = (check_ptr[c_lo:c_hi] - e_lo).astype(np.intp)
    counts = np.diff(check_ptr[c_lo : c_hi + 1]).astype(np.intp)
    keep = counts > 0
    if not keep.all():
        # reduceat mishandles zero-length segments; empty checks own no edges
        starts = starts[keep]
        counts = counts[keep]
    x = msg_vc[e_lo:e_hi]

    if min_sum:
        a = np.abs(x)
        neg = (x < 0).astype(np.uint8)
        sign_par = np.bitwise_xor.reduceat(neg, starts)
        m1 = np.minimum.reduceat(a, starts)
        m1_rep = np.repeat(m1, counts)
        is_min = a == m1_rep
        n_min = np.add.reduceat(is_min.astype(np.int64), starts)
        masked = np.where(is_min, np.inf, a)
        m2 = np.minimum.reduceat(masked, starts)
        mag = np.where(
            is_min & np.repeat(n_min == 1, counts),
            np.repeat(m2, counts),
            m1_rep,
        )
        sign = 1.0 - 2.0 * (np.repeat(sign_par, counts) ^ neg)
        out = alpha * sign * mag
    else:
        t = np.tanh(0.5 * x)
        # keep a sign-preserving floor so the self-division below stays exact
        t = np.where(np.abs(t) < _TINY, np.where(t < 0, -_TINY, _TINY), t)
        total = np.multiply.reduceat(t, starts)
        ext = np.repeat(total, counts) / t
        np.clip(ext, -_ATANH_LIM, _ATANH_LIM, out=ext)
        out = 2.0 * np.arctanh(ext)
    np.clip(out, -clip, clip, out=out)
    msg_cv[e_lo:e_hi] = out


def var_pass(msg_vc, msg_cv, llr, posterior, var_edges, var_ptr, v_lo, v_hi, clip):
    """Update variable->check messages and posteriors for vars [v_lo, v_hi)."""
    p_lo = int(var_ptr[v_lo])
    p_hi = int(var_ptr[v_hi])
    if p_hi <= p_lo:
        return
    idx = var_edges[p_lo:p_hi]
    vals = msg_cv[idx]
    starts = (var_ptr[v_lo:v_hi] - p_lo).astype(np.intp)
    counts = np.diff(var_ptr[v_lo : v_hi + 1]).astype(np.intp)
    keep = counts > 0
    if keep.all():
        s = llr[v_lo:v_hi] + np.add.reduceat(vals, starts)
        posterior[v_lo:v_hi] = s
    else:
        s = np.asarray(llr[v_lo:v_hi], dtype=np.float64).copy()
        s[keep] += np.add.reduceat(vals, starts[keep])
        posterior[v_lo:v_hi] = s
        s = s[keep]
        counts = counts[keep]
    out = np.repeat(s, counts) - vals
    np.clip(out, -clip, clip, out=out)
    msg_vc[idx] = out


def syndrome_ok(hard, edge_var, check_ptr, c_lo, c_hi):
    """1 when every check in [c_lo, c_hi) has even parity under hard."""
    e_lo = int(check_ptr[c_lo])
    e_hi = int(check_ptr[c_hi])
    if e_hi <= e_lo:
        return 1
    bits = hard[edge_var[e_lo:e_hi]]
    starts = (check_ptr[c_lo:c_hi] - e_lo).astype(np.intp)
    counts = np.diff(check_ptr[c_lo : c_hi + 1])
    keep = counts > 0
    if not keep.all():
        starts = starts[keep]
    par = np.bitwise_xor.reduceat(bits, starts)
    return int(not par.any())
