"""One-dimensional bounded maximisation: coarse scan, golden-section refinement."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Maximum:
    argmax: float
    value: float


def _is_tie(a: float, b: float) -> bool:
    if not (math.isfinite(a) and math.isfinite(b)):
        return a == b
    return abs(a - b) <= 8 * np.finfo(float).eps * max(1.0, abs(a), abs(b))


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float,
                   max_iter: int = 200) -> Maximum:
    """Golden-section search for a maximum inside [a, b]; stops at interval width ``tol``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best = Maximum(c, fc) if fc >= fd else Maximum(d, fd)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            if fc > best.value or (fc == best.value and c < best.argmax):
                best = Maximum(c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            if fd > best.value:
                best = Maximum(d, fd)
    return best


def _sign_change_bracket(derivative, a: float, b: float, guess: float):
    """A sub-interval of [a, b] on which ``derivative`` goes from positive to negative.

    Tries [a, b] first, then windows around ``guess`` widening tenfold; the
    latter covers brackets whose end is a symmetry point with zero derivative.
    """
    if derivative(a) > 0 > derivative(b):
        return a, b
    width = 1e-7 * (b - a)
    while width < b - a:
        lo, hi = max(a, guess - width), min(b, guess + width)
        if derivative(lo) > 0 > derivative(hi):
            return lo, hi
        width *= 10
    return None


def maximize_unimodal(f: Callable[[float], float], lo: float, hi: float,
                      coarse_points: int = 33, tol: float = 1e-10,
                      derivative: Callable[[float], float] | None = None) -> Maximum:
    """Maximise ``f`` on [lo, hi].

    A uniform scan of ``coarse_points`` picks the best bracket, golden-section
    search narrows it to width ``tol``. If ``derivative`` is given, its root
    near the golden-section point polishes the argmax below the resolution that
    function values alone allow. Ties go to the smaller argument.
    """
    if not hi > lo:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    grid = np.linspace(lo, hi, max(coarse_points, 3))
    values = np.array([f(x) for x in grid])
    k = int(np.argmax(values))  # first occurrence, i.e. smallest argument
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    best = Maximum(float(grid[k]), float(values[k]))

    found = golden_section(f, a, b, tol)
    if found.value > best.value and not _is_tie(found.value, best.value):
        best = found

    polished = False
    if derivative is not None:
        bracket = _sign_change_bracket(derivative, a, b, best.argmax)
        if bracket is not None:
            root = brentq(derivative, *bracket, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            froot = f(root)
            if froot >= best.value or _is_tie(froot, best.value):
                best = Maximum(float(root), float(froot))
                polished = True

    # tie-break toward the smaller argument among the bracket ends and the domain start;
    # after a derivative polish the maximum is a proven interior stationary point
    for x in ([] if polished else sorted({lo, float(a)})):
        if x < best.argmax:
            fx = f(x)
            if fx >= best.value or _is_tie(fx, best.value):
                best = Maximum(float(x), float(fx))
                break
    return best
