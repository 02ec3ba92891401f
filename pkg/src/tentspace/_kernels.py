"""Torus window reductions, the hot loops behind every functional.

Each kernel reduces a level-major array ``A`` of shape ``(K, N)`` (n=1) or
``(K, N, N)`` (n=2) over a per-level prefix of a fixed offset list.  Offsets
are sorted by distance, so ``counts[k]`` offsets cover the open ball of the
radius requested at level ``k``.

Summation is direct and in a fixed order for every output element.  That
keeps the reductions exactly monotone in their input (floating-point addition
and max are monotone), and the numba and numpy paths bit-identical.

Set ``TENTSPACE_DISABLE_NUMBA=1`` to force the numpy path.  The compiled
kernels release the GIL, so suites can share them across threads.
"""

import os

import numpy as np

DISABLE_NUMBA = os.environ.get("TENTSPACE_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")

try:
    if DISABLE_NUMBA:
        raise ImportError
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


# --------------------------------------------------------------------------
# numpy reference path
# --------------------------------------------------------------------------

def _shift_index(N, off):
    return (np.arange(N) + off) % N


def window_sum_1d_np(A, offs, counts):
    K, N = A.shape
    out = np.zeros((K, N))
    for p in range(int(counts.max(initial=0))):
        rows = counts > p
        out[rows] += A[rows][:, _shift_index(N, offs[p])]
    return out


def window_max_1d_np(A, offs, counts):
    K, N = A.shape
    out = np.zeros((K, N))
    for p in range(int(counts.max(initial=0))):
        rows = counts > p
        out[rows] = np.maximum(out[rows], A[rows][:, _shift_index(N, offs[p])])
    return out


def window_sum_2d_np(A, offs, counts):
    K, N, _ = A.shape
    out = np.zeros((K, N, N))
    for p in range(int(counts.max(initial=0))):
        rows = counts > p
        ia = _shift_index(N, offs[p, 0])
        ib = _shift_index(N, offs[p, 1])
        out[rows] += A[rows][:, ia][:, :, ib]
    return out


def window_max_2d_np(A, offs, counts):
    K, N, _ = A.shape
    out = np.zeros((K, N, N))
    for p in range(int(counts.max(initial=0))):
        rows = counts > p
        ia = _shift_index(N, offs[p, 0])
        ib = _shift_index(N, offs[p, 1])
        out[rows] = np.maximum(out[rows], A[rows][:, ia][:, :, ib])
    return out


def level_band_sum_np(F, weights, lo, hi):
    """out[k] = sum_{l=lo[k]}^{hi[k]} weights[l] * F[l], ascending l."""
    out = np.zeros_like(F, dtype=float)
    K = F.shape[0]
    span = int((hi - lo).max(initial=-1)) + 1
    for d in range(span):
        for k in range(K):
            l = lo[k] + d
            if l <= hi[k]:
                out[k] += weights[l] * F[l]
    return out


def level_band_max_np(F, lo, hi):
    out = np.zeros_like(F, dtype=float)
    K = F.shape[0]
    span = int((hi - lo).max(initial=-1)) + 1
    for d in range(span):
        for k in range(K):
            l = lo[k] + d
            if l <= hi[k]:
                out[k] = np.maximum(out[k], F[l])
    return out


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def window_sum_1d_nb(A, offs, counts):
        K, N = A.shape
        out = np.zeros((K, N))
        for k in range(K):
            c = counts[k]
            for i in range(N):
                s = 0.0
                for p in range(c):
                    s += A[k, (i + offs[p]) % N]
                out[k, i] = s
        return out

    @njit(cache=True, nogil=True)
    def window_max_1d_nb(A, offs, counts):
        K, N = A.shape
        out = np.zeros((K, N))
        for k in range(K):
            c = counts[k]
            for i in range(N):
                m = 0.0
                for p in range(c):
                    v = A[k, (i + offs[p]) % N]
                    if v > m:
                        m = v
                out[k, i] = m
        return out

    @njit(cache=True, nogil=True)
    def window_sum_2d_nb(A, offs, counts):
        K, N, _ = A.shape
        out = np.zeros((K, N, N))
        for k in range(K):
            c = counts[k]
            for i in range(N):
                for j in range(N):
                    s = 0.0
                    for p in range(c):
                        s += A[k, (i + offs[p, 0]) % N, (j + offs[p, 1]) % N]
                    out[k, i, j] = s
        return out

    @njit(cache=True, nogil=True)
    def window_max_2d_nb(A, offs, counts):
        K, N, _ = A.shape
        out = np.zeros((K, N, N))
        for k in range(K):
            c = counts[k]
            for i in range(N):
                for j in range(N):
                    m = 0.0
                    for p in range(c):
                        v = A[k, (i + offs[p, 0]) % N, (j + offs[p, 1]) % N]
                        if v > m:
                            m = v
                    out[k, i, j] = m
        return out

    @njit(cache=True, nogil=True)
    def _band_sum_flat(F, weights, lo, hi):
        K, M = F.shape
        out = np.zeros((K, M))
        for k in range(K):
            for l in range(lo[k], hi[k] + 1):
                w = weights[l]
                for i in range(M):
                    out[k, i] += w * F[l, i]
        return out

    @njit(cache=True, nogil=True)
    def _band_max_flat(F, lo, hi):
        K, M = F.shape
        out = np.zeros((K, M))
        for k in range(K):
            for l in range(lo[k], hi[k] + 1):
                for i in range(M):
                    if F[l, i] > out[k, i]:
                        out[k, i] = F[l, i]
        return out

    def level_band_sum_nb(F, weights, lo, hi):
        flat = np.ascontiguousarray(F.reshape(F.shape[0], -1), dtype=np.float64)
        return _band_sum_flat(flat, weights, lo, hi).reshape(F.shape)

    def level_band_max_nb(F, lo, hi):
        flat = np.ascontiguousarray(F.reshape(F.shape[0], -1), dtype=np.float64)
        return _band_max_flat(flat, lo, hi).reshape(F.shape)


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

def _prep(A, offs, counts):
    return (np.ascontiguousarray(A, dtype=np.float64),
            np.ascontiguousarray(offs, dtype=np.int64),
            np.ascontiguousarray(counts, dtype=np.int64))


def window_sum(A, offs, counts, use_numba=None):
    """Per-level torus window sum; ``A`` is level-major."""
    A, offs, counts = _prep(A, offs, counts)
    nb = HAS_NUMBA if use_numba is None else (use_numba and HAS_NUMBA)
    if A.ndim == 2:
        return (window_sum_1d_nb if nb else window_sum_1d_np)(A, offs.reshape(-1), counts)
    return (window_sum_2d_nb if nb else window_sum_2d_np)(A, offs.reshape(-1, 2), counts)


def window_max(A, offs, counts, use_numba=None):
    """Per-level torus window max (zero on empty windows; inputs are >= 0)."""
    A, offs, counts = _prep(A, offs, counts)
    nb = HAS_NUMBA if use_numba is None else (use_numba and HAS_NUMBA)
    if A.ndim == 2:
        return (window_max_1d_nb if nb else window_max_1d_np)(A, offs.reshape(-1), counts)
    return (window_max_2d_nb if nb else window_max_2d_np)(A, offs.reshape(-1, 2), counts)


def level_band_sum(F, weights, lo, hi, use_numba=None):
    """Weighted sum over the level band ``[lo[k], hi[k]]`` for every k."""
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    nb = HAS_NUMBA if use_numba is None else (use_numba and HAS_NUMBA)
    if nb:
        return level_band_sum_nb(F, weights, lo, hi)
    return level_band_sum_np(np.asarray(F, dtype=np.float64), weights, lo, hi)


def level_band_max(F, lo, hi, use_numba=None):
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    nb = HAS_NUMBA if use_numba is None else (use_numba and HAS_NUMBA)
    if nb:
        return level_band_max_nb(F, lo, hi)
    return level_band_max_np(np.asarray(F, dtype=np.float64), lo, hi)
