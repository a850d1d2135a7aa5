"""Compiled line/CSG kernels.

For a line ``x + t w`` each primitive contributes an interval ``(lo, hi)``
(open trace) and its closure. The CSG program is evaluated at the interval
endpoints only; the forward exit is the smallest positive endpoint at which
the open trace is empty, the backward exit the largest negative one.
"""

from __future__ import annotations

import os

import numba
import numpy as np
from numba import njit, prange

OP_PUSH = 0
OP_UNION = 1
OP_INTER = 2
OP_COMPL = 3
OP_DIFF = 4

numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_threads = os.environ.get("HS_THREADS")
if _threads:
    numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))


@njit(cache=True, inline="always")
def _traces(x, w, aw, ax, kind, row_start, row_end, b, centers, radii, tlo, thi, ook, cok):
    """Fill per-primitive traces; ``aw``/``ax`` hold row . w and row . x."""
    d = x.shape[0]
    for p in range(kind.shape[0]):
        if kind[p] == 1:
            j = row_start[p]
            bq = 0.0
            cq = 0.0
            for k in range(d):
                oc = x[k] - centers[j, k]
                bq += oc * w[k]
                cq += oc * oc
            cq -= radii[j] * radii[j]
            disc = bq * bq - cq
            if disc > 0.0:
                sq = np.sqrt(disc)
                tlo[p] = -bq - sq
                thi[p] = -bq + sq
                ook[p] = True
                cok[p] = True
            else:
                tlo[p] = -bq
                thi[p] = -bq
                ook[p] = False
                cok[p] = disc == 0.0
        else:
            lo = -np.inf
            hi = np.inf
            o = True
            c = True
            for r in range(row_start[p], row_end[p]):
                s = aw[r]
                g = b[r] - ax[r]
                # constraint along the line: t * s < g
                if s > 0.0:
                    v = g / s
                    if v < hi:
                        hi = v
                elif s < 0.0:
                    v = g / s
                    if v > lo:
                        lo = v
                elif g < 0.0:
                    o = False
                    c = False
                elif g == 0.0:
                    o = False
            if not lo < hi:
                o = False
                if lo > hi:
                    c = False
            tlo[p] = lo
            thi[p] = hi
            ook[p] = o
            cok[p] = c


@njit(cache=True)
def _member(t, tlo, thi, ook, cok, prog_op, prog_arg, so, sc):
    top = 0
    for i in range(prog_op.shape[0]):
        op = prog_op[i]
        if op == OP_PUSH:
            p = prog_arg[i]
            so[top] = ook[p] and tlo[p] < t and t < thi[p]
            sc[top] = cok[p] and tlo[p] <= t and t <= thi[p]
            top += 1
        elif op == OP_COMPL:
            o = so[top - 1]
            so[top - 1] = not sc[top - 1]
            sc[top - 1] = not o
        else:
            bo = so[top - 1]
            bc = sc[top - 1]
            top -= 1
            ao = so[top - 1]
            ac = sc[top - 1]
            if op == OP_UNION:
                so[top - 1] = ao or bo
                sc[top - 1] = ac or bc
            elif op == OP_INTER:
                so[top - 1] = ao and bo
                sc[top - 1] = ac and bc
            else:
                so[top - 1] = ao and not bc
                sc[top - 1] = ac and not bo
    return so[0]


@njit(cache=True, inline="always")
def _forward_exit(tlo, thi, ook, cok, prog_op, prog_arg, so, sc, sign):
    """Smallest endpoint sign*t > 0 with the open trace empty there (inf if none)."""
    P = tlo.shape[0]
    t0 = 0.0
    while True:
        nxt = np.inf
        for p in range(P):
            if not cok[p]:
                continue
            v = sign * tlo[p]
            if v > t0 and v < nxt:
                nxt = v
            v = sign * thi[p]
            if v > t0 and v < nxt:
                nxt = v
        if nxt == np.inf:
            return np.inf
        if not _member(sign * nxt, tlo, thi, ook, cok, prog_op, prog_arg, so, sc):
            return nxt
        t0 = nxt


@njit(cache=True, inline="always")
def _exits(x, w, aw, ax, kind, row_start, row_end, b, centers, radii, prog_op, prog_arg,
           tlo, thi, ook, cok, so, sc):
    _traces(x, w, aw, ax, kind, row_start, row_end, b, centers, radii, tlo, thi, ook, cok)
    if not _member(0.0, tlo, thi, ook, cok, prog_op, prog_arg, so, sc):
        return np.nan, np.nan
    plus = _forward_exit(tlo, thi, ook, cok, prog_op, prog_arg, so, sc, 1.0)
    minus = _forward_exit(tlo, thi, ook, cok, prog_op, prog_arg, so, sc, -1.0)
    return plus, minus


@njit(cache=True)
def _row_products(A, v, out):
    for r in range(A.shape[0]):
        acc = 0.0
        for k in range(A.shape[1]):
            acc += A[r, k] * v[k]
        out[r] = acc


@njit(cache=True, parallel=True)
def line_exits(xs, ws, kind, row_start, row_end, A, b, centers, radii, prog_op, prog_arg):
    """Forward and backward exit distances for paired rays ``(xs[i], ws[i])``."""
    n = xs.shape[0]
    P = kind.shape[0]
    L = prog_op.shape[0]
    R = A.shape[0]
    plus = np.empty(n)
    minus = np.empty(n)
    for i in prange(n):
        tlo = np.empty(P)
        thi = np.empty(P)
        ook = np.empty(P, dtype=np.bool_)
        cok = np.empty(P, dtype=np.bool_)
        so = np.empty(L, dtype=np.bool_)
        sc = np.empty(L, dtype=np.bool_)
        aw = np.empty(R)
        ax = np.empty(R)
        _row_products(A, ws[i], aw)
        _row_products(A, xs[i], ax)
        plus[i], minus[i] = _exits(xs[i], ws[i], aw, ax, kind, row_start, row_end, b, centers, radii,
                                   prog_op, prog_arg, tlo, thi, ook, cok, so, sc)
    return plus, minus


@njit(cache=True, parallel=True)
def inv_square_sums(points, dirs, W, kind, row_start, row_end, A, b, centers, radii, prog_op, prog_arg):
    """``out[j, m] = sum_i W[m, i] * min(tau+, tau-)^-2`` over directions ``dirs[i]``.

    Points outside the set get NaN.
    """
    n = points.shape[0]
    nd = dirs.shape[0]
    M = W.shape[0]
    P = kind.shape[0]
    L = prog_op.shape[0]
    R = A.shape[0]
    AW = np.empty((nd, R))
    for i in range(nd):
        _row_products(A, dirs[i], AW[i])
    out = np.zeros((n, M))
    for j in prange(n):
        tlo = np.empty(P)
        thi = np.empty(P)
        ook = np.empty(P, dtype=np.bool_)
        cok = np.empty(P, dtype=np.bool_)
        so = np.empty(L, dtype=np.bool_)
        sc = np.empty(L, dtype=np.bool_)
        x = points[j]
        ax = np.empty(R)
        _row_products(A, x, ax)
        for i in range(nd):
            tp, tm = _exits(x, dirs[i], AW[i], ax, kind, row_start, row_end, b, centers, radii,
                            prog_op, prog_arg, tlo, thi, ook, cok, so, sc)
            if np.isnan(tp):
                for m in range(M):
                    out[j, m] = np.nan
                break
            dd = tp if tp < tm else tm
            if dd < np.inf:
                inv = 1.0 / (dd * dd)
                for m in range(M):
                    out[j, m] += W[m, i] * inv
    return out
