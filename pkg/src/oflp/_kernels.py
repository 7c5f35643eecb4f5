"""Hot numeric kernels for welfare sums on segment, square and circle.

Compiled with numba's @njit by default; set OFLP_NO_NUMBA=1 to select the
pure-numpy fallback path instead (same results, no compilation).  Tree
welfare is graph traversal and stays in plain Python (`spaces` module).

`benchmarks/bench_kernels.py` compares both paths.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("OFLP_NO_NUMBA", "") in ("", "0")
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


# ---- loop bodies (numba-compiled when enabled) ----

def _seg_welfare_loop(xs, y):
    s = 0.0
    for i in range(xs.shape[0]):
        s += abs(xs[i] - y)
    return s


def _seg_welfare_many_loop(xs, ys):
    out = np.empty(ys.shape[0])
    for j in range(ys.shape[0]):
        s = 0.0
        y = ys[j]
        for i in range(xs.shape[0]):
            s += abs(xs[i] - y)
        out[j] = s
    return out


def _circle_welfare_loop(xs, y):
    s = 0.0
    for i in range(xs.shape[0]):
        d = abs(xs[i] - y)
        if d > 0.5:
            d = 1.0 - d
        s += d
    return s


def _circle_welfare_many_loop(xs, ys):
    out = np.empty(ys.shape[0])
    for j in range(ys.shape[0]):
        s = 0.0
        y = ys[j]
        for i in range(xs.shape[0]):
            d = abs(xs[i] - y)
            if d > 0.5:
                d = 1.0 - d
            s += d
        out[j] = s
    return out


def _square_welfare_loop(ax, ay, cx, cy):
    s = 0.0
    for i in range(ax.shape[0]):
        dx = ax[i] - cx
        dy = ay[i] - cy
        s += (dx * dx + dy * dy) ** 0.5
    return s


def _square_welfare_many_loop(ax, ay, cxs, cys):
    out = np.empty(cxs.shape[0])
    for j in range(cxs.shape[0]):
        s = 0.0
        cx = cxs[j]
        cy = cys[j]
        for i in range(ax.shape[0]):
            dx = ax[i] - cx
            dy = ay[i] - cy
            s += (dx * dx + dy * dy) ** 0.5
        out[j] = s
    return out


# ---- numpy fallbacks ----

def _seg_welfare_np(xs, y):
    return float(np.abs(xs - y).sum())


def _seg_welfare_many_np(xs, ys):
    return np.abs(xs[:, None] - ys[None, :]).sum(axis=0)


def _circle_welfare_np(xs, y):
    d = np.abs(xs - y)
    return float(np.minimum(d, 1.0 - d).sum())


def _circle_welfare_many_np(xs, ys):
    d = np.abs(xs[:, None] - ys[None, :])
    return np.minimum(d, 1.0 - d).sum(axis=0)


def _square_welfare_np(ax, ay, cx, cy):
    return float(np.hypot(ax - cx, ay - cy).sum())


def _square_welfare_many_np(ax, ay, cxs, cys):
    return np.hypot(ax[:, None] - cxs[None, :], ay[:, None] - cys[None, :]).sum(axis=0)


if USE_NUMBA:
    seg_welfare = njit(cache=True)(_seg_welfare_loop)
    seg_welfare_many = njit(cache=True)(_seg_welfare_many_loop)
    circle_welfare = njit(cache=True)(_circle_welfare_loop)
    circle_welfare_many = njit(cache=True)(_circle_welfare_many_loop)
    square_welfare = njit(cache=True)(_square_welfare_loop)
    square_welfare_many = njit(cache=True)(_square_welfare_many_loop)
else:
    seg_welfare = _seg_welfare_np
    seg_welfare_many = _seg_welfare_many_np
    circle_welfare = _circle_welfare_np
    circle_welfare_many = _circle_welfare_many_np
    square_welfare = _square_welfare_np
    square_welfare_many = _square_welfare_many_np
