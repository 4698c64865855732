"""Vectorised bracketed bisection."""

from __future__ import annotations

from typing import Callable

import numpy as np


class RootFindingError(ArithmeticError):
    """No sign change on the bracket. ``index`` lists the offending elements."""

    def __init__(self, message: str, index=()):
        self.index = np.atleast_1d(np.asarray(index, dtype=int))
        super().__init__(message)


def bisect(
    f: Callable[[np.ndarray], np.ndarray],
    lo,
    hi,
    tol: float = 1e-10,
    maxiter: int = 200,
) -> np.ndarray:
    """Find roots of an elementwise function on ``[lo, hi]``.

    ``f`` must map an array of abscissae (same shape as ``lo``) to residuals,
    negative at ``lo`` and positive at ``hi``. Iteration stops elementwise once
    the bracket is narrower than ``tol`` and the midpoint residual is below
    ``tol`` in magnitude, or when the bracket cannot shrink further.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    flo, fhi = f(lo), f(hi)
    bad = ~((flo < 0) & (fhi > 0))
    if np.any(bad):
        idx = np.flatnonzero(bad)
        raise RootFindingError(f"no sign change on bracket for {idx.size} element(s)", idx)

    done = np.zeros(lo.shape, dtype=bool)
    mid = 0.5 * (lo + hi)
    for _ in range(maxiter):
        mid = np.where(done, mid, 0.5 * (lo + hi))
        fm = f(mid)
        stuck = (mid <= lo) | (mid >= hi)
        done |= ((hi - lo) <= tol) & (np.abs(fm) <= tol) | stuck | (fm == 0)
        if done.all():
            return mid
        neg = (fm < 0) & ~done
        pos = (fm > 0) & ~done
        lo = np.where(neg, mid, lo)
        hi = np.where(pos, mid, hi)
    # bracket is below resolution everywhere that is left; keep the midpoint
    return mid
