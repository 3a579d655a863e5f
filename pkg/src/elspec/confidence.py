"""Confidence regions and intervals from the EL-statistic family.

Four methods share one machinery: "el" (unadjusted statistic W), "ael"
(adjusted statistic W*), "eb" (W scaled by an estimated Bartlett factor),
and "tb" (W against a threshold scaled by a supplied constant).  A point is
inside the 1-alpha region when its effective statistic does not exceed the
chi-square threshold with k = p + q degrees of freedom (sigma2 profiled out).

Unadjusted cells where the EL inner problem has no solution are reported as
a distinct "nosolution" state, never silently counted as excluded or
included.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.stats import chi2

from .arma import ArmaSpec, STATIONARITY_MARGIN
from .bartlett import corrected_threshold, estimate_bartlett, supplied_bartlett
from .el import MAX_HALF_LOG, AdjustmentPolicy, adjust, solve_dual
from .errors import (
    ConvergenceError,
    DegenerateInputError,
    InputError,
    InvalidModelError,
    NoSolutionError,
)
from .periodogram import Periodogram
from .whittle import FitResult, psi_profile, whittle_fit

METHODS = ("el", "ael", "eb", "tb")

STATUS_OK = 0
STATUS_NO_SOLUTION = 1
STATUS_FAILED = 2
STATUS_INVALID = 3
STATUS_LABELS = {
    STATUS_OK: "ok",
    STATUS_NO_SOLUTION: "nosolution",
    STATUS_FAILED: "failed",
    STATUS_INVALID: "invalid",
}

_BIG = 1e12


@dataclass(eq=False)
class RegionGrid:
    """Statistic evaluations over a parameter grid.

    ``stat`` holds the effective statistic (NaN where status != ok); for the
    "eb" method it is the Bartlett-scaled W/(1 + b_hat/n) so that the single
    ``threshold`` applies uniformly.  Node j of an axis sits at the center of
    the j-th of ``steps`` equal subdivisions of the box, keeping every node
    strictly inside an open box such as (0,1)^2.
    """

    axes: tuple
    stat: np.ndarray
    status: np.ndarray
    threshold: float
    method: str
    alpha: float
    order: tuple

    def inside(self) -> np.ndarray:
        """Boolean mask of nodes with a defined statistic below threshold."""
        with np.errstate(invalid="ignore"):
            return (self.status == STATUS_OK) & (self.stat <= self.threshold)


def grid_axis(lo: float, hi: float, steps: int) -> np.ndarray:
    """Node coordinates at the centers of ``steps`` equal subdivisions."""
    if steps < 1:
        raise InputError(f"steps must be >= 1, got {steps}")
    if not hi > lo:
        raise InputError(f"empty axis range [{lo}, {hi}]")
    edges = np.linspace(lo, hi, steps + 1)
    return (edges[:-1] + edges[1:]) / 2.0


def _stat_for_method(pg, spec, method, policy, tb_factor, alpha, k):
    """Effective statistic at one parameter point; returns (value, status)."""
    try:
        psi = psi_profile(pg, spec)
        if method == "ael":
            return solve_dual(adjust(psi, policy)).stat, STATUS_OK
        w = solve_dual(psi).stat
        if method == "eb":
            b = estimate_bartlett(psi).b
            scale = 1.0 + b / psi.m
            if scale <= 0.0:
                return np.nan, STATUS_FAILED
            return w / scale, STATUS_OK
        return w, STATUS_OK
    except NoSolutionError:
        return np.nan, STATUS_NO_SOLUTION
    except (ConvergenceError, DegenerateInputError):
        return np.nan, STATUS_FAILED


def _method_threshold(method, k, alpha, tb_factor, n):
    if method == "tb":
        if tb_factor is None:
            raise InputError("method 'tb' requires a supplied Bartlett constant")
        return corrected_threshold(tb_factor, k, alpha, n)
    return float(chi2.ppf(1.0 - alpha, df=k))


def scan_region(
    pg: Periodogram,
    order: tuple[int, int],
    box,
    steps,
    method: str = "ael",
    alpha: float = 0.10,
    policy: AdjustmentPolicy = MAX_HALF_LOG,
    tb_constant: float | None = None,
) -> RegionGrid:
    """Evaluate the chosen statistic on a grid over ``box``.

    ``box`` is a per-parameter sequence of (lo, hi) ranges and ``steps`` the
    matching node counts (a single int is broadcast).  Per-node solver
    failures are flagged in ``status`` without aborting the scan.
    """
    p, q = order
    k = p + q
    if k < 1:
        raise InputError("scan_region needs at least one free parameter")
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}; choose from {METHODS}")
    box = [tuple(map(float, rng)) for rng in box]
    if len(box) != k:
        raise InputError(f"box must give {k} ranges for order {order}, got {len(box)}")
    if np.isscalar(steps):
        steps = [int(steps)] * k
    steps = [int(s) for s in steps]
    if len(steps) != k:
        raise InputError(f"steps must give {k} counts, got {len(steps)}")

    axes = tuple(grid_axis(lo, hi, s) for (lo, hi), s in zip(box, steps))
    # Fast rejection of a grossly misplaced box: every corner combination of
    # extreme node values must define a valid model.
    for corner in np.ndindex(*(2,) * k):
        vec = np.array([ax[0] if c == 0 else ax[-1] for ax, c in zip(axes, corner)])
        try:
            ArmaSpec.from_beta1(order, vec)
        except InvalidModelError as exc:
            raise InputError(f"grid box leaves the stationarity/invertibility region: {exc}")

    tb_factor = supplied_bartlett(tb_constant) if tb_constant is not None else None
    threshold = _method_threshold(method, k, alpha, tb_factor, pg.n)

    shape = tuple(len(ax) for ax in axes)
    stat = np.full(shape, np.nan)
    status = np.full(shape, STATUS_OK, dtype=int)
    for idx in np.ndindex(*shape):
        vec = np.array([axes[d][idx[d]] for d in range(k)])
        try:
            spec = ArmaSpec.from_beta1(order, vec)
        except InvalidModelError:
            status[idx] = STATUS_INVALID
            continue
        stat[idx], status[idx] = _stat_for_method(pg, spec, method, policy, tb_factor, alpha, k)
    return RegionGrid(
        axes=axes, stat=stat, status=status, threshold=threshold,
        method=method, alpha=alpha, order=order,
    )


@dataclass(frozen=True)
class Interval:
    """One-dimensional confidence interval.

    Endpoints solve stat = threshold to high precision except where the
    search was truncated at the stationarity boundary or the user bounds
    (``truncated_lo``/``truncated_hi``).
    """

    lo: float
    hi: float
    contains_estimate: bool
    estimate: float
    threshold: float
    method: str
    truncated_lo: bool = False
    truncated_hi: bool = False


def interval_1d(
    pg: Periodogram,
    order: tuple[int, int],
    method: str = "ael",
    alpha: float = 0.10,
    bounds: tuple[float, float] | None = None,
    policy: AdjustmentPolicy = MAX_HALF_LOG,
    tb_constant: float | None = None,
    fit: FitResult | None = None,
) -> Interval:
    """Confidence interval for a scalar-parameter model (order (1,0) or (0,1)).

    Expands outward from the Whittle estimate until the effective statistic
    crosses its threshold, then solves the crossing by root bracketing; a
    side that reaches the stationarity boundary (or the user ``bounds``)
    without crossing is clamped there and flagged.  Points where the EL
    problem has no solution count as beyond the region boundary.
    """
    p, q = order
    if p + q != 1:
        raise InputError(f"interval_1d handles exactly one free parameter, got order {order}")
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}; choose from {METHODS}")
    fitres = fit if fit is not None else whittle_fit(pg, order, profile=True)
    if not fitres.converged:
        raise ConvergenceError("Whittle fit did not converge; no center for the interval scan")
    bhat = float(fitres.estimate[0])

    limit = 1.0 - 2.0 * STATIONARITY_MARGIN
    lo_bound, hi_bound = (-limit, limit) if bounds is None else map(float, bounds)
    lo_bound, hi_bound = max(lo_bound, -limit), min(hi_bound, limit)
    if not lo_bound < bhat < hi_bound:
        raise InputError(f"estimate {bhat:.6g} is outside the search bounds")

    tb_factor = supplied_bartlett(tb_constant) if tb_constant is not None else None
    threshold = _method_threshold(method, 1, alpha, tb_factor, pg.n)

    def excess(b):
        try:
            spec = ArmaSpec.from_beta1(order, [b])
        except InvalidModelError:
            return _BIG
        value, st = _stat_for_method(pg, spec, method, policy, tb_factor, alpha, 1)
        if st != STATUS_OK:
            return _BIG
        return value - threshold

    def find_edge(direction):
        # direction +1 for the upper endpoint, -1 for the lower
        bound = hi_bound if direction > 0 else lo_bound
        span = abs(bound - bhat)
        if span <= 0:
            return bhat, True
        step = max(1e-4, 0.02 * span)
        prev = bhat
        while True:
            nxt = prev + direction * step
            if (direction > 0 and nxt >= bound) or (direction < 0 and nxt <= bound):
                nxt = bound
            if excess(nxt) > 0.0:
                left, right = (prev, nxt) if direction > 0 else (nxt, prev)
                root = brentq(excess, left, right, xtol=1e-12, rtol=8.9e-16)
                return float(root), False
            if nxt == bound:
                return float(bound), True
            prev = nxt
            step *= 1.6

    hi, trunc_hi = find_edge(+1)
    lo, trunc_lo = find_edge(-1)
    return Interval(
        lo=lo, hi=hi, contains_estimate=bool(lo <= bhat <= hi), estimate=bhat,
        threshold=threshold, method=method, truncated_lo=trunc_lo, truncated_hi=trunc_hi,
    )


def _interp(pa, pb, va, vb, level):
    t = (level - va) / (vb - va)
    return (pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]))


def _cell_segments(corners, values, level):
    """Marching-squares segments for one cell.

    ``corners``/``values`` are ordered counterclockwise from the lower-left:
    (x0,y0), (x1,y0), (x1,y1), (x0,y1).  "Inside" means value <= level; the
    two ambiguous saddle cases are resolved by the cell-center average.
    """
    inside = [v <= level for v in values]
    idx = inside[0] | inside[1] << 1 | inside[2] << 2 | inside[3] << 3
    if idx in (0, 15):
        return []
    edges = {}
    for e, (a, b) in enumerate(((0, 1), (1, 2), (2, 3), (3, 0))):
        if inside[a] != inside[b]:
            edges[e] = _interp(corners[a], corners[b], values[a], values[b], level)
    pairs = {
        1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
        6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(2, 0)],
        11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
    }
    if idx == 5:  # corners 0 and 2 inside
        center_inside = float(np.mean(values)) <= level
        pairs = {5: [(3, 2), (1, 0)] if center_inside else [(3, 0), (1, 2)]}
    elif idx == 10:  # corners 1 and 3 inside
        center_inside = float(np.mean(values)) <= level
        pairs = {10: [(0, 1), (2, 3)] if center_inside else [(0, 3), (2, 1)]}
    return [(edges[a], edges[b]) for a, b in pairs[idx]]


def _chain_segments(segments, tol):
    """Join segments sharing endpoints into polylines (closed where the ends
    meet)."""

    def key(point):
        return (round(point[0] / tol), round(point[1] / tol))

    remaining = {i: seg for i, seg in enumerate(segments)}
    by_end: dict = {}
    for i, (a, b) in remaining.items():
        by_end.setdefault(key(a), []).append(i)
        by_end.setdefault(key(b), []).append(i)

    def pop_at(point_key, skip):
        for i in by_end.get(point_key, []):
            if i != skip and i in remaining:
                return i
        return None

    polylines = []
    while remaining:
        i = next(iter(remaining))
        a, b = remaining.pop(i)
        chain = [a, b]
        # extend forward from b, then backward from a
        last = i
        while True:
            j = pop_at(key(chain[-1]), last)
            if j is None:
                break
            sa, sb = remaining.pop(j)
            chain.append(sb if key(sa) == key(chain[-1]) else sa)
            last = j
        last = i
        while True:
            j = pop_at(key(chain[0]), last)
            if j is None:
                break
            sa, sb = remaining.pop(j)
            chain.insert(0, sb if key(sa) == key(chain[0]) else sa)
            last = j
        if key(chain[0]) == key(chain[-1]) and len(chain) > 2:
            chain[-1] = chain[0]
        polylines.append(np.array(chain))
    return polylines


def extract_contour(grid: RegionGrid) -> list[np.ndarray]:
    """Threshold-level contour polylines of a two-dimensional RegionGrid.

    Marching squares with linear interpolation on the statistic values;
    cells touching an undefined node (nosolution/failed/invalid) are
    skipped.  Returns a list of (v, 2) vertex arrays in parameter
    coordinates, closed (first vertex repeated) where the region does not
    hit the grid boundary.  A region covering every node is reported as the
    node-extent rectangle; an empty region gives an empty list.
    """
    if len(grid.axes) != 2:
        raise InputError("contour extraction is defined for two-parameter grids only")
    xs, ys = grid.axes
    level = grid.threshold
    valid = grid.status == STATUS_OK
    if valid.all():
        if np.all(grid.stat <= level):
            x0, x1, y0, y1 = xs[0], xs[-1], ys[0], ys[-1]
            return [np.array([(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)])]
        if np.all(grid.stat > level):
            return []

    segments = []
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            ok = valid[i, j] and valid[i + 1, j] and valid[i + 1, j + 1] and valid[i, j + 1]
            if not ok:
                continue
            corners = (
                (xs[i], ys[j]), (xs[i + 1], ys[j]),
                (xs[i + 1], ys[j + 1]), (xs[i], ys[j + 1]),
            )
            values = (
                grid.stat[i, j], grid.stat[i + 1, j],
                grid.stat[i + 1, j + 1], grid.stat[i, j + 1],
            )
            segments.extend(_cell_segments(corners, values, level))
    if not segments:
        return []
    span = max(xs[-1] - xs[0], ys[-1] - ys[0])
    return _chain_segments(segments, tol=1e-9 * span)
