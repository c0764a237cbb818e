"""Message-passing kernel tests: both backends against a plain-loop reference."""

import math

import numpy as np
import pytest

from scldpc import BandMatrix, DecoderContext, build_systematic_H
from scldpc.kernels import BACKEND, numpy_backend

try:
    from scldpc.kernels import _bp_cy
except ImportError:
    _bp_cy = None


def make_ctx(massey, T=8):
    h = build_systematic_H(massey, T)
    return h, DecoderContext(h)


def reference_check_pass(msg_vc, ctx, clip, min_sum=False, alpha=0.75):
    """Straight-loop version of the check update (tanh rule or scaled min-sum)."""
    out = np.zeros_like(msg_vc)
    ptr = ctx.check_ptr
    for c in range(len(ptr) - 1):
        lo, hi = ptr[c], ptr[c + 1]
        vals = msg_vc[lo:hi]
        for e in range(lo, hi):
            others = [msg_vc[k] for k in range(lo, hi) if k != e]
            if min_sum:
                sign = 1.0
                mag = math.inf
                for o in others:
                    sign = -sign if o < 0 else sign
                    mag = min(mag, abs(o))
                out[e] = max(-clip, min(clip, alpha * sign * mag))
            else:
                prod = 1.0
                for o in others:
                    t = math.tanh(0.5 * o)
                    if abs(t) < 1e-12:
                        t = math.copysign(1e-12, t) if t != 0 else 1e-12
                    prod *= t
                prod = max(-(1 - 1e-15), min(1 - 1e-15, prod))
                out[e] = max(-clip, min(clip, 2.0 * math.atanh(prod)))
    return out


def reference_var_pass(msg_cv, llr, ctx, clip):
    msg = np.zeros_like(msg_cv)
    post = np.array(llr, dtype=float)
    nv = len(ctx.var_ptr) - 1
    for v in range(nv):
        eids = ctx.var_edges[ctx.var_ptr[v] : ctx.var_ptr[v + 1]]
        s = sum(msg_cv[e] for e in eids)
        post[v] = llr[v] + s
        for e in eids:
            msg[e] = max(-clip, min(clip, llr[v] + s - msg_cv[e]))
    return msg, post


@pytest.fixture
def state(massey, rng):
    h, ctx = make_ctx(massey)
    E = len(ctx.edge_var)
    msg_vc = rng.normal(0, 4, size=E)
    msg_cv = rng.normal(0, 4, size=E)
    llr = rng.normal(0, 4, size=h.cols)
    return h, ctx, msg_vc, msg_cv, llr


def run_check(backend, msg_vc, ctx, clip, **kw):
    out = np.zeros_like(msg_vc)
    backend.check_pass(msg_vc, out, ctx.check_ptr, 0, len(ctx.check_ptr) - 1, clip, **kw)
    return out


def run_var(backend, msg_cv, llr, ctx, clip):
    msg = np.zeros_like(msg_cv)
    post = np.zeros_like(llr)
    backend.var_pass(msg, msg_cv, llr, post, ctx.var_edges, ctx.var_ptr,
                     0, len(ctx.var_ptr) - 1, clip)
    return msg, post


class TestAgainstReference:
    def test_check_pass_tanh(self, state):
        h, ctx, msg_vc, _, _ = state
        want = reference_check_pass(msg_vc, ctx, clip=25.0)
        got = run_check(numpy_backend, msg_vc, ctx, 25.0)
        np.testing.assert_allclose(got, want, atol=1e-9)

    def test_check_pass_min_sum(self, state):
        h, ctx, msg_vc, _, _ = state
        want = reference_check_pass(msg_vc, ctx, clip=25.0, min_sum=True)
        got = run_check(numpy_backend, msg_vc, ctx, 25.0, min_sum=True)
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_var_pass(self, state):
        h, ctx, _, msg_cv, llr = state
        want_msg, want_post = reference_var_pass(msg_cv, llr, ctx, clip=25.0)
        got_msg, got_post = run_var(numpy_backend, msg_cv, llr, ctx, 25.0)
        np.testing.assert_allclose(got_msg, want_msg, atol=1e-12)
        np.testing.assert_allclose(got_post, want_post, atol=1e-12)

    def test_syndrome(self, state, rng):
        h, ctx, *_ = state
        dense = h.to_dense()
        for _ in range(10):
            hard = rng.integers(0, 2, size=h.cols).astype(np.uint8)
            ok = numpy_backend.syndrome_ok(hard, ctx.edge_var, ctx.check_ptr,
                                           0, len(ctx.check_ptr) - 1)
            assert ok == (not ((dense @ hard) % 2).any())


@pytest.mark.skipif(_bp_cy is None, reason="compiled backend not built")
class TestBackendsAgree:
    def test_check_pass_both_rules(self, state):
        _, ctx, msg_vc, _, _ = state
        for kw in ({}, {"min_sum": True}, {"min_sum": True, "alpha": 0.9}):
            a = run_check(numpy_backend, msg_vc, ctx, 25.0, **kw)
            b = run_check(_bp_cy, msg_vc, ctx, 25.0, **kw)
            np.testing.assert_allclose(a, b, atol=1e-12)

    def test_var_pass(self, state):
        _, ctx, _, msg_cv, llr = state
        a = run_var(numpy_backend, msg_cv, llr, ctx, 25.0)
        b = run_var(_bp_cy, msg_cv, llr, ctx, 25.0)
        np.testing.assert_allclose(a[0], b[0], atol=1e-12)
        np.testing.assert_allclose(a[1], b[1], atol=1e-12)

    def test_syndrome(self, state, rng):
        h, ctx, *_ = state
        for _ in range(20):
            hard = rng.integers(0, 2, size=h.cols).astype(np.uint8)
            args = (hard, ctx.edge_var, ctx.check_ptr, 0, len(ctx.check_ptr) - 1)
            assert bool(numpy_backend.syndrome_ok(*args)) == bool(_bp_cy.syndrome_ok(*args))


class TestEdgeCases:
    def test_degree_one_check_is_uninformative(self, rng):
        # a check with a single edge has no neighbors to aggregate: the
        # extrinsic message saturates at +clip under either rule
        ones = np.array([[0, 0], [1, 0], [1, 1]], dtype=np.int64)
        mat = BandMatrix(rows=2, cols=2, ones=ones, cols_per_time=2,
                         time_units=1, memory=0,
                         col_roles=np.zeros(2, dtype=np.uint8))
        ctx = DecoderContext(mat)
        msg_vc = rng.normal(0, 2, size=3)
        for kw in ({}, {"min_sum": True}):
            out = run_check(numpy_backend, msg_vc, ctx, 25.0, **kw)
            assert out[0] == 25.0

    def test_empty_check_rows(self, rng):
        # rows 1 and 3 have no edges at all; kernels must skip them
        ones = np.array([[0, 0], [0, 1], [2, 0], [2, 1]], dtype=np.int64)
        mat = BandMatrix(rows=4, cols=2, ones=ones, cols_per_time=2,
                         time_units=1, memory=0,
                         col_roles=np.zeros(2, dtype=np.uint8))
        ctx = DecoderContext(mat)
        msg_vc = rng.normal(0, 2, size=4)
        out = run_check(numpy_backend, msg_vc, ctx, 25.0)
        assert np.all(np.isfinite(out))
        hard = np.zeros(2, dtype=np.uint8)
        assert numpy_backend.syndrome_ok(hard, ctx.edge_var, ctx.check_ptr, 0, 4)

    def test_outputs_respect_clip(self, state):
        _, ctx, msg_vc, msg_cv, llr = state
        big = msg_vc * 100
        out = run_check(numpy_backend, big, ctx, 25.0)
        assert np.abs(out).max() <= 25.0
        msg, _ = run_var(numpy_backend, msg_cv * 100, llr * 100, ctx, 25.0)
        assert np.abs(msg).max() <= 25.0

    def test_backend_name_exported(self):
        assert BACKEND in ("cython", "numpy")
