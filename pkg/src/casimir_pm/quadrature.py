"""Adaptive composite Gauss-Legendre quadrature on ``(0, inf)`` for
integrands that decay like ``exp(-2 y d)``.

The range is split into

* geometric panels ``[y1/2^(k+1), y1/2^k]`` towards zero, added until a panel
  contributes less than ``0.1 * rel_tol`` of the total (or ``y_min`` is hit);
  the rest of ``(0, y_min)`` is estimated as a third of the lowest panel,
* uniform panels of width ``1/d`` from ``y1 = 1/d`` up to ``y_max``, which
  starts at ``30/d`` and grows by 1.5x until the last panel is negligible.

Each panel is estimated twice (whole and bisected); the difference is its
error estimate and the worst panel is bisected until the summed estimate
meets the tolerance.  The part beyond ``y_max`` is bounded from the observed
exponential decay of the last panel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import NonConvergence

__all__ = ["QuadratureResult", "integrate_decaying", "gauss_legendre_panels"]

_ORDER = 8
_TAIL_FACTOR = 30.0
_SMALL = 0.1


@dataclass
class QuadratureResult:
    value: float
    error: float
    nodes: int
    y_max: float
    y_min: float
    tail_bound: float
    panels: list = field(default_factory=list, repr=False)


def gauss_legendre_panels(edges, order=_ORDER):
    """Nodes and weights of composite Gauss-Legendre on consecutive panels."""
    x, w = leggauss(order)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    return (lo + half * (x + 1.0)).ravel(), (half * w).ravel()


class _Panel:
    __slots__ = ("lo", "hi", "whole", "halves", "err", "last_nodes")

    def __init__(self, lo, hi):
        self.lo, self.hi = lo, hi


class _Integrator:
    def __init__(self, func, order, max_nodes):
        self.func = func
        self.order = order
        self.max_nodes = max_nodes
        self.nodes = 0
        self.gx, self.gw = leggauss(order)

    def _rule(self, lo, hi):
        half = 0.5 * (hi - lo)
        y = lo + half * (self.gx + 1.0)
        return y, half * self.gw

    def evaluate(self, panels):
        """Fill in whole/halves estimates of several panels in one batch."""
        if not panels:
            return
        ys, ws = [], []
        for p in panels:
            mid = 0.5 * (p.lo + p.hi)
            for lo, hi in ((p.lo, p.hi), (p.lo, mid), (mid, p.hi)):
                y, w = self._rule(lo, hi)
                ys.append(y)
                ws.append(w)
        y = np.concatenate(ys)
        self.nodes += y.size
        if self.nodes > self.max_nodes:
            raise NonConvergence(f"quadrature node budget of {self.max_nodes} exhausted")
        vals = np.asarray(self.func(y), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise NonConvergence("non-finite integrand value")
        n = self.order
        for i, p in enumerate(panels):
            base = 3 * n * i
            whole = float(np.dot(vals[base:base + n], ws[3 * i]))
            left = float(np.dot(vals[base + n:base + 2 * n], ws[3 * i + 1]))
            right = float(np.dot(vals[base + 2 * n:base + 3 * n], ws[3 * i + 2]))
            p.whole = whole
            p.halves = left + right
            p.err = abs(p.halves - whole)
            # last two nodes and values of the right half, for tail fits
            p.last_nodes = (ys[3 * i + 2][-2:], vals[base + 3 * n - 2:base + 3 * n])


def _total(panels, exact):
    vals = [p.halves for p in sorted(panels, key=lambda p: p.lo)]
    return math.fsum(vals) if exact else float(np.sum(vals))


def _tail_bound(panel):
    (y1, y2), (f1, f2) = panel.last_nodes
    if f2 == 0.0 or f1 == 0.0 or f1 * f2 < 0:
        return abs(f2) * (y2 - y1)
    # |f| ~ y c exp(-kappa y) => int_Y^inf = |f(Y)| (1/kappa + 1/(kappa^2 Y))
    kappa = -math.log(abs(f2 / y2) / abs(f1 / y1)) / (y2 - y1)
    if not kappa > 0:
        return math.inf
    return abs(f2) * (1.0 / kappa + 1.0 / (kappa * kappa * y2))


def integrate_decaying(func, decay_length, rel_tol=1e-6, y_min=None, y_max=None,
                       order=_ORDER, max_nodes=200_000, abs_tol=0.0,
                       deterministic_sum=False):
    """Integrate ``func`` over ``(0, inf)``.

    Parameters
    ----------
    func : callable
        Vectorized integrand, ``func(y_array) -> values``.
    decay_length : float
        Length ``d`` such that the integrand decays like ``exp(-2 y d)``.
    rel_tol : float
        Target relative accuracy.
    y_min : float, optional
        Lowest abscissa considered (default ``1e-6 / d``).
    y_max : float, optional
        Fixed upper limit; by default chosen automatically.
    abs_tol : float
        Absolute tolerance floor, useful when the integral may vanish.
    deterministic_sum : bool
        Sum panel contributions with :func:`math.fsum` (order independent).

    Returns
    -------
    QuadratureResult
    """
    if not decay_length > 0:
        raise ValueError("decay_length must be positive")
    width = 1.0 / decay_length
    if y_min is None:
        y_min = 1e-6 / decay_length
    integ = _Integrator(func, order, max_nodes)

    auto_max = y_max is None
    upper = _TAIL_FACTOR * width if auto_max else float(y_max)
    knee = min(width, 0.5 * upper)
    n_core = max(1, int(math.ceil((upper - knee) / width)))
    core_edges = np.linspace(knee, upper, n_core + 1)
    panels = [_Panel(lo, hi) for lo, hi in zip(core_edges[:-1], core_edges[1:])]
    integ.evaluate(panels)

    def target():
        return max(rel_tol * abs(_total(panels, deterministic_sum)), abs_tol)

    # geometric panels towards zero
    low = knee
    while low > y_min:
        new_low = max(0.5 * low, y_min)
        if new_low < 2.0 * y_min:
            new_low = y_min
        p = _Panel(new_low, low)
        integ.evaluate([p])
        panels.append(p)
        low = new_low
        if abs(p.halves) < _SMALL * target():
            break
    # remainder on (0, low): for an integrand ~ y times a slowly varying
    # factor it is about a third of the panel [low, 2 low]
    lowest = min(panels, key=lambda p: p.lo)
    low_rest = lowest.halves / 3.0 if lowest.lo > 0 else 0.0

    # extend the upper limit
    if auto_max:
        while True:
            last = max(panels, key=lambda p: p.hi)
            if abs(last.halves) < _SMALL * target() and _tail_bound(last) < _SMALL * target():
                break
            new_upper = 1.5 * upper
            n_new = max(1, int(math.ceil((new_upper - upper) / width)))
            edges = np.linspace(upper, new_upper, n_new + 1)
            fresh = [_Panel(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
            integ.evaluate(fresh)
            panels.extend(fresh)
            upper = new_upper

    # bisect the worst panels
    while True:
        err = math.fsum(p.err for p in panels)
        if err <= 0.5 * target():
            break
        worst = max(panels, key=lambda p: p.err)
        mid = 0.5 * (worst.lo + worst.hi)
        a, b = _Panel(worst.lo, mid), _Panel(mid, worst.hi)
        integ.evaluate([a, b])
        panels.remove(worst)
        panels.extend([a, b])

    last = max(panels, key=lambda p: p.hi)
    tail = _tail_bound(last)
    value = _total(panels, deterministic_sum) + low_rest
    error = math.fsum(p.err for p in panels) + tail + 0.5 * abs(low_rest)
    return QuadratureResult(value=value, error=error, nodes=integ.nodes, y_max=upper,
                            y_min=lowest.lo, tail_bound=tail,
                            panels=sorted(((p.lo, p.hi) for p in panels)))
