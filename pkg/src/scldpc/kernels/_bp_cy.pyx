# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled message-passing kernels.

Same contract as numpy_backend; loops release the GIL so frame batches can
be decoded from multiple Python threads.  Check degrees are capped at 512
(enforced by the decoder context before any kernel call).
"""

from libc.math cimport tanh, atanh, fabs


def check_pass(double[::1] msg_vc, double[::1] msg_cv, long long[::1] check_ptr,
               Py_ssize_t c_lo, Py_ssize_t c_hi, double clip,
               bint min_sum=False, double alpha=0.75):
    cdef double t[512]
    cdef double pre[512]
    cdef Py_ssize_t c, k, lo, d, i1
    cdef double acc, suf, ext, out, x, a, m1, m2
    cdef double lim = 1.0 - 1e-15
    cdef double tiny = 1e-12
    cdef double big = 1e300
    cdef int par, neg

    with nogil:
        for c in range(c_lo, c_hi):
            lo = check_ptr[c]
            d = check_ptr[c + 1] - lo
            if d <= 0:
                continue
            if min_sum:
                par = 0
                m1 = big
                m2 = big
                i1 = 0
                for k in range(d):
                    x = msg_vc[lo + k]
                    if x < 0:
                        par ^= 1
                    a = fabs(x)
                    if a < m1:
                        m2 = m1
                        m1 = a
                        i1 = k
                    elif a < m2:
                        m2 = a
                for k in range(d):
                    x = msg_vc[lo + k]
                    neg = par
                    if x < 0:
                        neg ^= 1
                    out = m2 if k == i1 else m1
                    out = alpha * out
                    if neg:
                        out = -out
                    if out > clip:
                        out = clip
                    elif out < -clip:
                        out = -clip
                    msg_cv[lo + k] = out
            else:
                acc = 1.0
                for k in range(d):
                    x = tanh(0.5 * msg_vc[lo + k])
                    if -tiny < x < tiny:
                        x = tiny if x >= 0 else -tiny
                    t[k] = x
                    pre[k] = acc
                    acc *= x
                suf = 1.0
                for k in range(d - 1, -1, -1):
                    ext = pre[k] * suf
                    if ext > lim:
                        ext = lim
                    elif ext < -lim:
                        ext = -lim
                    out = 2.0 * atanh(ext)
                    if out > clip:
                        out = clip
                    elif out < -clip:
                        out = -clip
                    msg_cv[lo + k] = out
                    suf *= t[k]


def var_pass(double[::1] msg_vc, double[::1] msg_cv, double[::1] llr,
             double[::1] posterior, long long[::1] var_edges, long long[::1] var_ptr,
             Py_ssize_t v_lo, Py_ssize_t v_hi, double clip):
    cdef Py_ssize_t v, k, lo, hi, e
    cdef double s, out

    with nogil:
        for v in range(v_lo, v_hi):
            lo = var_ptr[v]
            hi = var_ptr[v + 1]
            s = llr[v]
            for k in range(lo, hi):
                s += msg_cv[var_edges[k]]
            posterior[v] = s
            for k in range(lo, hi):
                e = var_edges[k]
                out = s - msg_cv[e]
                if out > clip:
                    out = clip
                elif out < -clip:
                    out = -clip
                msg_vc[e] = out


def syndrome_ok(unsigned char[::1] hard, long long[::1] edge_var,
                long long[::1] check_ptr, Py_ssize_t c_lo, Py_ssize_t c_hi):
    cdef Py_ssize_t c, k
    cdef int par
    cdef bint ok = 1

    with nogil:
        for c in range(c_lo, c_hi):
            par = 0
            for k in range(check_ptr[c], check_ptr[c + 1]):
                par ^= hard[edge_var[k]]
            if par:
                ok = 0
                break
    return int(ok)
