# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled single-pass implementations of the hot pixel kernels.

Must match segsweep._kernels.numpy_backend bit for bit; the equivalence is
enforced by tests/test_kernels.py. Loops are written branchless (or with
cell-major sequential passes) so the C compiler can vectorize them.
"""

import numpy as np


def confusion_counts(pred, truth):
    """Tally (tp, fp, tn, fn) over two flat boolean arrays."""
    cdef const unsigned char[::1] p = pred.reshape(-1).view(np.uint8)
    cdef const unsigned char[::1] t = truth.reshape(-1).view(np.uint8)
    cdef Py_ssize_t i, n = p.shape[0]
    cdef long long tp = 0, np_sum = 0, nt_sum = 0
    with nogil:
        for i in range(n):
            tp += p[i] & t[i]
            np_sum += p[i]
            nt_sum += t[i]
    return int(tp), int(np_sum - tp), int(n - np_sum - nt_sum + tp), int(nt_sum - tp)


def count_le(sorted_vals, thresholds):
    """Number of values <= T for each threshold T (both arrays ascending)."""
    out = np.empty(thresholds.shape[0], dtype=np.int64)
    cdef const double[::1] v = sorted_vals
    cdef const double[::1] th = thresholds
    cdef long long[::1] o = out
    cdef Py_ssize_t lo = 0, hi, mid, j, n = v.shape[0], m = th.shape[0]
    with nogil:
        # thresholds ascend, so each search starts from the previous count
        for j in range(m):
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if v[mid] <= th[j]:
                    lo = mid + 1
                else:
                    hi = mid
            o[j] = lo
    return out


def erode(mask, se, border_value=False):
    """Binary erosion; out-of-bounds pixels read as ``border_value``."""
    ys, xs = np.nonzero(se)
    dys = (ys - se.shape[0] // 2).astype(np.int64)
    dxs = (xs - se.shape[1] // 2).astype(np.int64)
    out = np.ones(mask.shape, dtype=bool)
    cdef const unsigned char[:, ::1] m = mask.view(np.uint8)
    cdef unsigned char[:, ::1] o = out.view(np.uint8)
    cdef const long long[::1] dy = dys
    cdef const long long[::1] dx = dxs
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1], k = dy.shape[0]
    cdef Py_ssize_t c, x, y, yy, dxc, x_lo, x_hi
    cdef bint border = bool(border_value)
    with nogil:
        # cell-major: AND one shifted plane into the output per element cell,
        # so the inner loops are sequential and vectorize
        for c in range(k):
            dxc = dx[c]
            x_lo = 0 if dxc >= 0 else -dxc
            x_hi = w if dxc <= 0 else w - dxc
            for y in range(h):
                yy = y + dy[c]
                if yy < 0 or yy >= h:
                    if not border:
                        for x in range(w):
                            o[y, x] = 0
                    continue
                if not border:
                    for x in range(0, x_lo):
                        o[y, x] = 0
                    for x in range(x_hi, w):
                        o[y, x] = 0
                for x in range(x_lo, x_hi):
                    o[y, x] &= m[yy, x + dxc]
    return out


def dilate(mask, se):
    """Binary dilation; out-of-bounds pixels read as background."""
    ys, xs = np.nonzero(se)
    dys = (ys - se.shape[0] // 2).astype(np.int64)
    dxs = (xs - se.shape[1] // 2).astype(np.int64)
    out = np.zeros(mask.shape, dtype=bool)
    cdef const unsigned char[:, ::1] m = mask.view(np.uint8)
    cdef unsigned char[:, ::1] o = out.view(np.uint8)
    cdef const long long[::1] dy = dys
    cdef const long long[::1] dx = dxs
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1], k = dy.shape[0]
    cdef Py_ssize_t c, x, y, yy, dxc, x_lo, x_hi
    with nogil:
        # out-of-bounds reads are background, which is the OR identity
        for c in range(k):
            dxc = dx[c]
            x_lo = 0 if dxc >= 0 else -dxc
            x_hi = w if dxc <= 0 else w - dxc
            for y in range(h):
                yy = y + dy[c]
                if yy < 0 or yy >= h:
                    continue
                for x in range(x_lo, x_hi):
                    o[y, x] |= m[yy, x + dxc]
    return out
