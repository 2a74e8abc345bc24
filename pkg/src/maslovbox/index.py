"""Winding-number machinery: shelves, the boundary box, and the count bound.

Conventions (fixed throughout):

* The tracking point is the squared phase of psi1 - i*psi2, so its angle is
  theta = 2*atan2(-psi2, psi1), continuous across psi2 = 0.  Crossings are
  the points where psi1 = 0; there theta sits on the level pi (mod 2pi).
* A crossing traversed with d(psi1/psi2)/dt > 0 rotates counterclockwise and
  counts +1; clockwise counts -1.
* At a path start that is itself a crossing, only a clockwise departure
  contributes (-1); at a path end, only a counterclockwise arrival (+1).
  Equivalently: departure to / arrival from the side where psi1*psi2 < 0 is
  the counterclockwise side.
* Intervals where psi1 vanishes identically contribute only at entry/exit,
  by the same arrival/departure rules.

A shelf index is the sum of event directions under these conventions.  The
boundary invariant m of a box is the index of the closed boundary loop
(bottom, right, reversed top, reversed left), which the corner rules make
equal to bottom + right - top - left with every shelf taken in its
canonical (increasing-parameter) orientation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ConfigurationError,
    NotARegularCrossingError,
    ResolutionError,
)
from .exterior import coform_map, wedge_top
from .shooting import PsiPath, ShelfComputer, TruncationChoice
from .spectral import leading_eigenpair, tilde_eigvec_from_left

log = logging.getLogger(__name__)

__all__ = [
    "TrackingAngle",
    "CrossingEvent",
    "ShelfResult",
    "BoxResult",
    "BoundReport",
    "lift_angle",
    "crossing_direction",
    "endpoint_adjust",
    "shelf_index",
    "full_line_shelf",
    "asymptotic_right_extension",
    "top_shelf_eigenvalues",
    "maslov_box",
    "invariance_scan",
    "exchange_parity_check",
    "count_bound",
    "index_from_samples",
]

_ZERO_TOL = 1e-11      # |psi1| below this counts as "at the crossing"
_PLATEAU_TOL = 1e-12
_SIGNAL_FLOOR = 1e-9   # |psi1| above this is trusted against integration noise
_MAX_SAMPLES = 1 << 20


def _theta(p1: float, p2: float) -> float:
    return 2.0 * math.atan2(-p2, p1)


def _unwrap(prev: float, cur: float) -> float:
    # representative of cur (mod 2*pi) within (prev - pi, prev + pi]
    k = math.floor((cur - prev + math.pi) / (2.0 * math.pi))
    return cur - 2.0 * math.pi * k


@dataclass
class TrackingAngle:
    """Continuous lift of the doubled tracking angle along a refined path."""

    ts: np.ndarray
    theta: np.ndarray
    path: PsiPath
    crossing_angle: float = math.pi

    @property
    def winding(self) -> float:
        return (self.theta[-1] - self.theta[0]) / (2.0 * math.pi)


@dataclass
class CrossingEvent:
    location: float
    direction: int
    kind: str           # interior | start-departure | end-arrival | asymptotic | plateau | corner | tangential
    psi2: float = 0.0
    slope: float = 0.0


@dataclass
class ShelfResult:
    index: int
    crossings: list
    invariance_min: float
    broken: bool
    path: Optional[PsiPath] = None

    @property
    def directed_crossings(self) -> list:
        return [e for e in self.crossings if e.direction != 0]


def _refine_samples(pair_fn, ta, tb, n0, max_samples=_MAX_SAMPLES):
    """Sample pair_fn on [ta, tb] until adjacent lifted angles differ < pi/2."""
    n0 = max(int(n0), 8)
    ts = list(np.linspace(ta, tb, n0))
    vals = [pair_fn(t) for t in ts]
    guard = 0
    while True:
        thetas = [_theta(*vals[0])]
        for v in vals[1:]:
            thetas.append(_unwrap(thetas[-1], _theta(*v)))
        new_ts = []
        min_dt = abs(tb - ta) * 1e-12 + 1e-300
        for i in range(len(ts) - 1):
            if abs(thetas[i + 1] - thetas[i]) >= 0.5 * math.pi and abs(ts[i + 1] - ts[i]) > min_dt:
                new_ts.append(0.5 * (ts[i] + ts[i + 1]))
        if not new_ts:
            break
        if len(ts) + len(new_ts) > max_samples:
            raise ResolutionError(f"angle refinement exceeded {max_samples} samples")
        for t in new_ts:
            vals.append(pair_fn(t))
            ts.append(t)
        order = np.argsort(ts)
        ts = [ts[i] for i in order]
        vals = [vals[i] for i in order]
        guard += 1
        if guard > 60:
            raise ResolutionError("angle refinement failed to converge")
    p1 = np.array([v[0] for v in vals])
    p2 = np.array([v[1] for v in vals])
    return np.array(ts), p1, p2


def lift_angle(path: PsiPath, pair_fn=None, max_samples=_MAX_SAMPLES) -> TrackingAngle:
    """Continuous lift of the tracking angle; refines via pair_fn when given."""
    if pair_fn is not None:
        ts, p1, p2 = _refine_samples(pair_fn, path.ts[0], path.ts[-1], len(path.ts), max_samples)
        path = PsiPath(ts=ts, psi1=p1, psi2=p2)
    if path.broken:
        log.warning("invariance broken along path (min radius %.3e)", path.invariance_min)
    thetas = [_theta(path.psi1[0], path.psi2[0])]
    for p1, p2 in zip(path.psi1[1:], path.psi2[1:]):
        thetas.append(_unwrap(thetas[-1], _theta(p1, p2)))
    return TrackingAngle(ts=path.ts, theta=np.array(thetas), path=path)


def crossing_direction(psi1_slope: float, psi2_value: float, slope_tol: float = 1e-12) -> int:
    """Sign of d(psi1/psi2)/dt at a crossing: +1 counterclockwise, -1 clockwise."""
    if psi2_value == 0.0:
        raise NotARegularCrossingError("psi2 vanishes at the crossing")
    r = psi1_slope / psi2_value
    if abs(r) <= slope_tol:
        return 0
    return 1 if r > 0 else -1


def _arrival(psi1_side: float, psi2_at: float) -> int:
    # +1 iff the approach side is the counterclockwise one (psi1*psi2 < 0)
    return 1 if psi1_side * psi2_at < 0 else 0


def _departure(psi1_side: float, psi2_at: float) -> int:
    # -1 iff the exit side is the clockwise one (psi1*psi2 < 0)
    return -1 if psi1_side * psi2_at < 0 else 0


def endpoint_adjust(angle: TrackingAngle, end: str, zero_tol: float = _ZERO_TOL) -> int:
    """Endpoint contribution when the path starts or finishes at a crossing."""
    p = angle.path
    if end == "start":
        if abs(p.psi1[0]) >= zero_tol:
            return 0
        k = next((i for i in range(len(p.ts)) if abs(p.psi1[i]) >= zero_tol), None)
        return 0 if k is None else _departure(p.psi1[k], p.psi2[0])
    if end == "finish":
        if abs(p.psi1[-1]) >= zero_tol:
            return 0
        k = next((i for i in range(len(p.ts) - 1, -1, -1) if abs(p.psi1[i]) >= zero_tol), None)
        return 0 if k is None else _arrival(p.psi1[k], p.psi2[-1])
    raise ValueError(f"end must be 'start' or 'finish', got {end!r}")


def _interior_direction(pair_fn, t_star, span, psi2_star):
    h = 1e-5 * span
    for _ in range(2):
        slope = (pair_fn(t_star + h)[0] - pair_fn(t_star - h)[0]) / (2 * h)
        if abs(slope) > 1e-9:
            break
        h *= 8.0
    try:
        return crossing_direction(slope, psi2_star, slope_tol=1e-9), slope
    except NotARegularCrossingError:
        return 0, slope


def index_from_samples(
    path: PsiPath,
    pair_fn=None,
    *,
    adjust_start: bool = True,
    adjust_end: bool = True,
    zero_tol: float = _ZERO_TOL,
) -> ShelfResult:
    """Crossing census and index from a sampled (already refined) path.

    With pair_fn the crossing locations are sharpened by root bracketing and
    directions use central-difference slopes; without it everything is read
    off the stored samples, so re-running on emitted CSV columns reproduces
    the reported index exactly.
    """
    ts, p1, p2 = path.ts, path.psi1, path.psi2
    span = abs(ts[-1] - ts[0])
    events: list[CrossingEvent] = []
    zeroish = np.abs(p1) < zero_tol

    # plateau runs (including single exactly-zero samples)
    runs = []
    i = 0
    n = len(ts)
    while i < n:
        if zeroish[i]:
            j = i
            while j + 1 < n and zeroish[j + 1]:
                j += 1
            runs.append((i, j))
            i = j + 1
        else:
            i += 1

    covered = np.zeros(n, dtype=bool)
    for i, j in runs:
        covered[i : j + 1] = True
        interior_plateau = j - i >= 2 and i > 0 and j < n - 1
        if i == 0:
            if adjust_start:
                adj = _departure(p1[j + 1], p2[i]) if j + 1 < n else 0
                if adj:
                    events.append(CrossingEvent(ts[i], adj, "start-departure", psi2=p2[i]))
        else:
            d = _arrival(p1[i - 1], p2[i])
            if d:
                events.append(CrossingEvent(ts[i], d, "plateau" if interior_plateau else "interior", psi2=p2[i]))
        if j == n - 1:
            if adjust_end and i > 0:
                adj = _arrival(p1[i - 1], p2[j])
                if adj:
                    events.append(CrossingEvent(ts[j], adj, "end-arrival", psi2=p2[j]))
                # arrival already counted above; drop the duplicate interior entry
                if events and len(events) >= 2 and events[-2].kind in ("interior", "plateau") and events[-2].location == ts[i]:
                    events.pop(-2)
        else:
            d = _departure(p1[j + 1], p2[j])
            if d:
                events.append(CrossingEvent(ts[j], d, "plateau" if interior_plateau else "interior", psi2=p2[j]))

    # transversal sign changes between trusted samples
    for i in range(n - 1):
        if covered[i] or covered[i + 1]:
            continue
        if p1[i] * p1[i + 1] < 0:
            if pair_fn is not None:
                t_star = brentq(lambda t: pair_fn(t)[0], ts[i], ts[i + 1], xtol=1e-10 * max(span, 1.0))
                psi2_star = pair_fn(t_star)[1]
                direction, slope = _interior_direction(pair_fn, t_star, span, psi2_star)
            else:
                t_star = ts[i] - p1[i] * (ts[i + 1] - ts[i]) / (p1[i + 1] - p1[i])
                psi2_star = 0.5 * (p2[i] + p2[i + 1])
                slope = (p1[i + 1] - p1[i]) / (ts[i + 1] - ts[i])
                direction = crossing_direction(slope, psi2_star, slope_tol=0.0) if psi2_star != 0 else 0
            kind = "interior" if direction != 0 else "tangential"
            if direction == 0:
                log.warning("tangential or irregular crossing at t=%.6g", t_star)
            events.append(CrossingEvent(t_star, direction, kind, psi2=psi2_star, slope=slope))

    events.sort(key=lambda e: e.location)
    idx = sum(e.direction for e in events)
    return ShelfResult(
        index=int(idx),
        crossings=events,
        invariance_min=path.invariance_min,
        broken=path.broken,
        path=path,
    )


def shelf_index(
    path_or_fn,
    ta: float | None = None,
    tb: float | None = None,
    *,
    pair_fn=None,
    n0: int = 129,
    adjust_start: bool = True,
    adjust_end: bool = True,
    zero_tol: float = _ZERO_TOL,
) -> ShelfResult:
    """Hyperplane index of one shelf.

    Accepts either a PsiPath (optionally with pair_fn for refinement) or a
    pair function with an interval [ta, tb].
    """
    if isinstance(path_or_fn, PsiPath):
        path = path_or_fn
        if pair_fn is not None:
            angle = lift_angle(path, pair_fn=pair_fn)
            path = angle.path
    else:
        pair_fn = path_or_fn
        ts, p1, p2 = _refine_samples(pair_fn, ta, tb, n0)
        path = PsiPath(ts=ts, psi1=p1, psi2=p2)
    return index_from_samples(
        path, pair_fn, adjust_start=adjust_start, adjust_end=adjust_end, zero_tol=zero_tol
    )


# ----------------------------------------------------------------------
# full-line shelves (fixed lam, x from -inf to +inf)
# ----------------------------------------------------------------------

_EVANS_EIG_TOL = 1e-6  # |D| below this marks lam as an eigenvalue


def _loose_computer(computer: ShelfComputer) -> ShelfComputer:
    # second pass at relaxed tolerances; cached on the tight computer
    loose = getattr(computer, "_loose_twin", None)
    if loose is None:
        tr = computer.trunc
        loose = ShelfComputer(
            computer.sys,
            TruncationChoice(tr.L_minus, tr.L_plus,
                             rtol=min(max(1e-7, tr.rtol * 1e3), 1e-5),
                             atol=min(max(1e-9, tr.atol * 1e3), 1e-6)),
        )
        computer._loose_twin = loose
    return loose


def _trusted_right_cut(computer: ShelfComputer, lam: float, lo: float, hi: float, n: int = 129) -> float:
    """Largest x at which the forward pass is still trusted.

    At an eigenvalue the true decaying solution is overtaken by dominant-mode
    noise as x grows; the noise scales with the integrator tolerance, so the
    point where a loose-tolerance twin pass diverges (in tracking angle)
    bounds the trusted region of the tight pass from below.
    """
    loose = _loose_computer(computer)
    ts = np.linspace(lo, hi, n)
    cut = hi
    for i, t in enumerate(ts):
        a = computer.pair_infty(lam, float(t))
        b = loose.pair_infty(lam, float(t))
        d = abs(_unwrap(0.0, _theta(*a) - _theta(*b)))
        if d > 0.2:
            cut = ts[max(i - 3, 0)]
            break
    return float(cut)


def _right_asymptotic_event(computer, lam, pf, cut_hi, span) -> CrossingEvent:
    """Arrival contribution of the x -> +inf crossing, decided at the last
    trusted x.  Raises when the trusted tail still oscillates (the limit
    index is then genuinely undefined at this lam)."""
    tail = np.linspace(cut_hi - 0.12 * span, cut_hi, 25)
    p1 = np.array([pf(float(t))[0] for t in tail])
    strong = np.abs(p1) > _SIGNAL_FLOOR
    flips = int(np.count_nonzero(np.diff(np.sign(p1[strong])) != 0)) if strong.any() else 0
    if flips > 1:
        raise ConfigurationError(
            f"detection value oscillates up to the trusted cutoff at lam={lam}; "
            "the full-line index is unresolved (increase L or avoid this lam)"
        )
    p1c, p2c = pf(cut_hi)
    return CrossingEvent(math.inf, _arrival(p1c, p2c), "asymptotic", psi2=p2c)


def asymptotic_right_extension(
    computer: ShelfComputer, lam: float, eig_tol: float = _EVANS_EIG_TOL
) -> Optional[CrossingEvent]:
    """Contribution of the x -> +inf limit to the full-line index.

    The limit detection value is proportional to the Evans value, so lam is
    treated as an asymptotic crossing exactly when |D(lam)| is below eig_tol.
    Returns +1 when the approach is counterclockwise (a small clockwise
    displacement of the tracking point at the last trusted x), 0 for the
    other crossing cases, None when there is no asymptotic crossing.
    """
    if abs(computer.evans(lam)) > eig_tol:
        return None
    lo, hi = -computer.trunc.L_minus, computer.trunc.L_plus
    cut = _trusted_right_cut(computer, lam, 0.5 * (lo + hi), hi)
    return _right_asymptotic_event(computer, lam, lambda x: computer.pair_infty(lam, x), cut, hi - lo)


def full_line_shelf(
    computer: ShelfComputer,
    lam: float,
    n0: int = 257,
    window: tuple[float, float] | None = None,
    eig_tol: float = _EVANS_EIG_TOL,
) -> ShelfResult:
    """Index of x -> [psi1, psi2](x; lam) over [-inf, +inf].

    Finite crossings are collected on the trusted window; the asymptotic
    limits contribute by the arrival/departure rules (the right limit is a
    crossing iff lam is an eigenvalue, i.e. the Evans value vanishes).
    """
    lo = -computer.trunc.L_minus if window is None else window[0]
    hi = computer.trunc.L_plus if window is None else window[1]
    pf = lambda x: computer.pair_infty(lam, x)
    events: list[CrossingEvent] = []
    idx = 0

    cut_hi = hi
    if abs(computer.evans(lam)) <= eig_tol:
        cut_hi = _trusted_right_cut(computer, lam, 0.5 * (lo + hi), hi)
        ev = _right_asymptotic_event(computer, lam, pf, cut_hi, hi - lo)
        events.append(ev)
        idx += ev.direction

    p1_lo, p2_lo = pf(lo)
    if abs(p1_lo) <= _SIGNAL_FLOOR:
        ts0 = np.linspace(lo, lo + 0.12 * (hi - lo), 25)
        vals = [pf(float(t)) for t in ts0]
        k = next((i for i, v in enumerate(vals) if abs(v[0]) > _SIGNAL_FLOOR), None)
        if k is not None:
            ev = CrossingEvent(-math.inf, _departure(vals[k][0], p2_lo), "asymptotic", psi2=p2_lo)
            events.append(ev)
            idx += ev.direction

    res = shelf_index(pf, lo, cut_hi, n0=n0, adjust_start=False, adjust_end=False)
    events.extend(res.crossings)
    idx += res.index
    events.sort(key=lambda e: e.location)
    return ShelfResult(index=int(idx), crossings=events, invariance_min=res.invariance_min,
                       broken=res.broken, path=res.path)


# ----------------------------------------------------------------------
# top shelf: eigenvalue detection at fixed x = c
# ----------------------------------------------------------------------


def top_shelf_eigenvalues(
    computer: ShelfComputer,
    lam_window: tuple[float, float],
    c: float,
    n0: int = 129,
    lam_pad: float = 1e-3,
    refine_tol: float = 1e-4,
) -> tuple[ShelfResult, list]:
    """Sweep the finite-c detection pair over lam and refine its zeros.

    Eigenvalue locations are refined to |dlam| <= refine_tol.  Directions in
    the returned event list follow the boundary traversal (lam decreasing);
    the ShelfResult index is canonical (lam increasing).  The top pad keeps
    the structural zero at lam = lam2 (present whenever lam2 is itself an
    eigenvalue) out of the interior census.
    """
    l1, l2 = lam_window
    pf = lambda lam: computer.pair_finite(lam, c, c)
    res = shelf_index(pf, l1, l2 - lam_pad, n0=n0, adjust_start=False, adjust_end=False)
    eigs = []
    for ev in res.crossings:
        if ev.kind not in ("interior", "tangential"):
            continue
        lam_star = ev.location
        lo, hi = lam_star - refine_tol, lam_star + refine_tol
        f = lambda lam: pf(lam)[0]
        try:
            if f(lo) * f(hi) < 0:
                lam_star = brentq(f, lo, hi, xtol=0.1 * refine_tol)
        except ValueError:
            pass
        eigs.append((float(lam_star), -ev.direction))
    return res, eigs


# ----------------------------------------------------------------------
# the boundary box
# ----------------------------------------------------------------------


@dataclass
class BoxResult:
    bottom: ShelfResult
    right: ShelfResult
    top: ShelfResult
    left: ShelfResult
    m: int
    lam_window: tuple[float, float]
    x_window: tuple[float, float]
    corner_events: list = field(default_factory=list)
    broken: bool = False
    invariance_min: float = math.inf
    consistent: bool = True

    @property
    def shelf_sum(self) -> int:
        return self.bottom.index + self.right.index - self.top.index - self.left.index


_CORNER_FLOOR = 1e-5  # detection values below this at a corner mark a structural crossing


def _joint_event(t_loc, before, after, kind="corner"):
    """Crossing contribution where two boundary segments meet."""
    p1b, p2b = before
    p1a, p2a = after
    if p1b * p1a < 0:
        psi2 = p2b if abs(p2b) > abs(p2a) else p2a
        d = (1 if p1a > 0 else -1) * (1 if psi2 > 0 else -1)
        return CrossingEvent(t_loc, d, kind, psi2=psi2)
    return None


def maslov_box(
    computer: ShelfComputer,
    lam_window: tuple[float, float],
    x_window: tuple[float, float],
    grid: tuple[int, int] = (64, 64),
) -> BoxResult:
    """Boundary invariant and per-shelf censuses for one box.

    The invariant m is the index of the closed boundary loop traversed
    bottom -> right -> reversed top -> reversed left; the detection pair on
    every shelf is the finite-c pair against the co-solution carried at the
    top edge c2.  Reported shelf indices are canonical and satisfy
    m = bottom + right - top - left.
    """
    l1, l2 = lam_window
    c1, c2 = x_window
    if not (l1 < l2 and c1 < c2):
        raise ConfigurationError("windows must be nondegenerate")
    n_lam, n_x = max(grid[0], 16), max(grid[1], 16)
    lpad = max(1e-4 * (l2 - l1), 1e-6)
    xpad = max(1e-3 * (c2 - c1), 1e-6)

    pf_bottom = lambda lam: computer.pair_finite(lam, c1, c2)
    pf_right = lambda x: computer.pair_finite(l2, x, c2)
    pf_top = lambda lam: computer.pair_finite(lam, c2, c2)
    pf_left = lambda x: computer.pair_finite(l1, x, c2)

    # canonical-orientation censuses on padded interiors
    r_bottom = shelf_index(pf_bottom, l1 + lpad, l2 - lpad, n0=n_lam, adjust_start=False, adjust_end=False)
    r_right = shelf_index(pf_right, c1 + xpad, c2 - xpad, n0=n_x, adjust_start=False, adjust_end=False)
    r_top = shelf_index(pf_top, l1 + lpad, l2 - lpad, n0=n_lam, adjust_start=False, adjust_end=False)
    r_left = shelf_index(pf_left, c1 + xpad, c2 - xpad, n0=n_x, adjust_start=False, adjust_end=False)

    # loop traversal: bottom, right, top reversed, left reversed
    segs = [
        (r_bottom, False, (l2, c1)),
        (r_right, False, (l2, c2)),
        (r_top, True, (l1, c2)),
        (r_left, True, (l1, c1)),
    ]
    loop_m = 0
    corner_events = []
    broken = False
    inv_min = math.inf
    for res, rev, _ in segs:
        loop_m += -res.index if rev else res.index
        broken = broken or res.broken
        inv_min = min(inv_min, res.invariance_min)
    for k in range(4):
        res_a, rev_a, corner = segs[k]
        res_b, rev_b, _ = segs[(k + 1) % 4]
        pa = res_a.path
        before = (pa.psi1[0], pa.psi2[0]) if rev_a else (pa.psi1[-1], pa.psi2[-1])
        pb = res_b.path
        after = (pb.psi1[-1], pb.psi2[-1]) if rev_b else (pb.psi1[0], pb.psi2[0])
        ev = _joint_event(corner, before, after)
        if ev is not None:
            corner_events.append((corner, ev))
            loop_m += ev.direction

    # fold corner adjustments into the canonical shelf reports so that
    # m = bottom + right - top - left holds as stated
    def corner_value(lam, x):
        return computer.pair_finite(lam, x, c2)

    adj_right = 0
    adj_top = 0
    p1c, p2c = corner_value(l2, c2)
    if abs(p1c) < _CORNER_FLOOR:
        rp = r_right.path
        adj_right = _arrival(rp.psi1[-1], p2c if p2c != 0 else rp.psi2[-1])
        tp = r_top.path
        adj_top = _arrival(tp.psi1[-1], p2c if p2c != 0 else tp.psi2[-1])
    right = replace(r_right, index=r_right.index + adj_right)
    top = replace(r_top, index=r_top.index + adj_top)

    box = BoxResult(
        bottom=r_bottom,
        right=right,
        top=top,
        left=r_left,
        m=int(loop_m),
        lam_window=lam_window,
        x_window=x_window,
        corner_events=corner_events,
        broken=broken,
        invariance_min=inv_min,
    )
    box.consistent = box.shelf_sum == box.m and not broken
    if not box.consistent:
        log.warning(
            "box shelf sum %d disagrees with loop invariant %d (broken=%s)",
            box.shelf_sum, box.m, broken,
        )
    return box


# ----------------------------------------------------------------------
# invariance scan, exchange principle, count bound
# ----------------------------------------------------------------------


def invariance_scan(
    computer: ShelfComputer,
    lam_window: tuple[float, float],
    x_window: tuple[float, float],
    lam_step: float = 1e-3,
    curves=None,
) -> list[tuple[float, float]]:
    """Interior points where both detection values vanish simultaneously.

    Walks the traced psi1 = 0 curves and bisects sign changes of psi2 along
    them down to the requested lam resolution.
    """
    from .curves import trace_spectral_curves  # local import: curves uses shooting only

    if curves is None:
        curves = trace_spectral_curves(computer, lam_window, x_window)
    losses = []
    for curve in curves:
        pts = curve.points
        for a, b in zip(pts[:-1], pts[1:]):
            if a.psi2_sign == 0 or b.psi2_sign == 0 or a.psi2_sign == b.psi2_sign:
                continue
            lo, hi = a, b
            # bisect along the curve: solve x on the psi1=0 set at the midpoint lam
            while abs(hi.lam - lo.lam) > lam_step and abs(hi.x - lo.x) > 1e-9:
                lam_mid = 0.5 * (lo.lam + hi.lam)
                x_mid_guess = 0.5 * (lo.x + hi.x)
                rad = max(abs(hi.x - lo.x), 1e-4)
                f = lambda x: computer.pair_infty(lam_mid, x)[0]
                try:
                    x_mid = brentq(f, x_mid_guess - rad, x_mid_guess + rad, xtol=1e-9)
                except ValueError:
                    break
                s = np.sign(computer.pair_infty(lam_mid, x_mid)[1])
                mid = type(a)(lam=lam_mid, x=x_mid, psi2_sign=int(s))
                if s == lo.psi2_sign:
                    lo = mid
                else:
                    hi = mid
            losses.append((0.5 * (lo.lam + hi.lam), 0.5 * (lo.x + hi.x)))
    return losses


def exchange_parity_check(
    computer: ShelfComputer,
    lam: float,
    window: tuple[float, float],
    m_alt: np.ndarray,
    n0: int = 129,
) -> Optional[int]:
    """Index difference over one shelf window when the second detection form
    is rebuilt from an alternative invertible matrix.

    Returns None (inconclusive) if either triple loses invariance on the
    window or an endpoint sits at a crossing; otherwise the difference,
    which is an even integer.
    """
    m_alt = np.asarray(m_alt, dtype=float)
    if abs(np.linalg.det(m_alt)) <= 1e-12:
        raise ConfigurationError("alternative M must be invertible")
    sp0 = computer.spec(computer.sys.anchor_lambda)
    ref = coform_map(m_alt) @ sp0.vtilde_plus
    nz = np.flatnonzero(np.abs(ref) > 1e-12 * np.linalg.norm(ref))
    if nz.size == 0:
        return None
    sign_alt = 1.0 if ref[nz[0]] > 0 else -1.0
    map_alt = coform_map(m_alt)

    def pair_alt(x):
        sp = computer.spec(lam)
        u = computer.u_path(lam, x_hi=max(x, 0.0)).direction(x)
        denom = np.linalg.norm(sp.vtilde_plus)
        return (
            wedge_top(u, sp.vtilde_plus) / denom,
            sign_alt * wedge_top(u, map_alt @ sp.vtilde_plus) / denom,
        )

    pair_std = lambda x: computer.pair_infty(lam, x)
    res_std = shelf_index(pair_std, window[0], window[1], n0=n0, adjust_start=False, adjust_end=False)
    res_alt = shelf_index(pair_alt, window[0], window[1], n0=n0, adjust_start=False, adjust_end=False)
    for res, pf in ((res_std, pair_std), (res_alt, pair_alt)):
        if res.broken or res.invariance_min < 1e-10:
            return None
        if abs(pf(window[0])[0]) < 1e-6 or abs(pf(window[1])[0]) < 1e-6:
            return None
    return int(res_alt.index - res_std.index)


@dataclass
class BoundReport:
    """Theorem ingredients and the resulting eigenvalue-count lower bound."""

    right_full: int
    left_full: int
    bottom_asym: int
    m: int
    corner_increment: int
    closed_bound: int     # count on [lam1, lam2]
    open_bound: int       # count on [lam1, lam2) after the corner refinement

    def __str__(self):
        return (
            f"N# >= |{self.right_full} - {self.left_full} + {self.bottom_asym} "
            f"- ({self.m})| = {self.closed_bound}; corner increment {self.corner_increment} "
            f"-> open-interval bound {self.open_bound}"
        )


def count_bound(
    box: BoxResult,
    right_full: int,
    left_full: int,
    bottom_asym: int,
    corner_increment: int = 0,
) -> BoundReport:
    """Eigenvalue-count lower bound from the full-line shelf indices and m.

    closed_bound bounds the count on the closed lam interval; when the
    corner increment from the Evans derivative signs is supplied, open_bound
    bounds the count with the right endpoint excluded.
    """
    raw = abs(right_full - left_full + bottom_asym - box.m)
    return BoundReport(
        right_full=right_full,
        left_full=left_full,
        bottom_asym=bottom_asym,
        m=box.m,
        corner_increment=corner_increment,
        closed_bound=raw,
        open_bound=max(raw - corner_increment, 0),
    )
