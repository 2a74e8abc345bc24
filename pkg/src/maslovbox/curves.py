"""Tracing of spectral curves: the zero level set of the detection value
psi1 in the (lam, x) rectangle.

Curves are seeded at boundary crossings (right shelf, top shelf) and
continued inward by a secant predictor with a one-dimensional root-solve
corrector.  The corrector acts on whichever coordinate the current tangent
is less aligned with, so folds in lam (turnarounds) switch the continuation
parameter automatically.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .shooting import ShelfComputer

log = logging.getLogger(__name__)

__all__ = ["SpectralCurvePoint", "SpectralCurve", "trace_spectral_curves"]


@dataclass(frozen=True)
class SpectralCurvePoint:
    lam: float
    x: float
    psi2_sign: int


@dataclass
class SpectralCurve:
    points: list
    entered: str
    exited: str | None = None
    closed: bool = False

    @property
    def min_lam(self) -> float:
        return min(p.lam for p in self.points)

    @property
    def endpoints(self) -> tuple[SpectralCurvePoint, SpectralCurvePoint]:
        return self.points[0], self.points[-1]


def _boundary_zeros(pair_fn, ta, tb, n0=257):
    """Refined zeros of psi1 along one boundary edge."""
    from .index import _refine_samples  # shared adaptive sampler

    ts, p1, _ = _refine_samples(pair_fn, ta, tb, n0)
    zeros = []
    for i in range(len(ts) - 1):
        if p1[i] * p1[i + 1] < 0:
            zeros.append(brentq(lambda t: pair_fn(t)[0], ts[i], ts[i + 1], xtol=1e-9))
    return zeros


class _Tracer:
    def __init__(self, computer: ShelfComputer, lam_window, x_window, max_steps):
        self.c = computer
        self.l1, self.l2 = lam_window
        self.c1, self.c2 = x_window
        self.wl = self.l2 - self.l1
        self.wx = self.c2 - self.c1
        self.max_steps = max_steps
        self.x_margin = 0.05 * self.wx

    def psi(self, lam, x):
        return self.c.pair_infty(lam, x)

    @staticmethod
    def _bracket_root(f, q, r0, rmax, lo, hi, xtol):
        """Root of f nearest to q: expand outward, comparing each side
        against the sign at q itself (handles twin roots around q)."""
        q = min(max(q, lo), hi)
        try:
            fq = f(q)
        except Exception:
            return None
        if fq == 0.0:
            return q
        r = max(r0, 4.0 * xtol)
        while r <= rmax:
            a, b = max(q - r, lo), min(q + r, hi)
            try:
                fa = f(a) if a < q else fq
                fb = f(b) if b > q else fq
            except Exception:
                return None
            left = fa == 0.0 or fa * fq < 0
            right = fb == 0.0 or fb * fq < 0
            try:
                if left and right:
                    ra = a if fa == 0.0 else brentq(f, a, q, xtol=xtol)
                    rb = b if fb == 0.0 else brentq(f, q, b, xtol=xtol)
                    return ra if abs(ra - q) <= abs(rb - q) else rb
                if left:
                    return a if fa == 0.0 else brentq(f, a, q, xtol=xtol)
                if right:
                    return b if fb == 0.0 else brentq(f, q, b, xtol=xtol)
            except ValueError:
                return None
            r *= 2.0
        return None

    def _solve_x(self, lam, x_guess, radius):
        # prefetch the path over the whole bracket so every evaluation inside
        # this solve shares one integration (bit-stable signs near roots)
        hi = min(max(x_guess + 8.0 * radius, 0.0), self.c.trunc.L_plus)
        try:
            self.c.u_path(lam, x_hi=hi)
        except Exception:
            return None
        f = lambda x: self.psi(lam, x)[0]
        return self._bracket_root(
            f, x_guess, radius, 8.0 * radius,
            self.c1 - self.x_margin, self.c2 + self.x_margin,
            1e-10 * max(self.wx, 1.0),
        )

    def _solve_lam(self, x, lam_guess, radius):
        # every evaluation at a new lam costs a full shooting pass, so the
        # tolerance is kept proportionate to the window
        f = lambda lam: self.psi(lam, x)[0]
        return self._bracket_root(
            f, lam_guess, radius, 8.0 * radius,
            self.l1 - 0.05 * self.wl, self.l2,
            1e-6 * max(self.wl, 1e-6),
        )

    def _point(self, lam, x):
        s = np.sign(self.psi(lam, x)[1])
        return SpectralCurvePoint(lam=float(lam), x=float(x), psi2_sign=int(s))

    def _exit_side(self, lam, x):
        if lam >= self.l2 - 1e-12 * max(1.0, abs(self.l2)):
            return "right"
        if lam <= self.l1:
            return "left"
        if x >= self.c2:
            return "top"
        if x <= self.c1:
            return "bottom"
        return None

    def _implicit_tangent(self, lam0, x0, entered):
        # unit tangent of the level set in scaled coordinates, pointing inward
        eps_l = 1e-6 * self.wl
        eps_x = 1e-5 * self.wx
        dpsi_dx = (self.psi(lam0, x0 + eps_x)[0] - self.psi(lam0, max(x0 - eps_x, self.c1))[0]) / (
            x0 + eps_x - max(x0 - eps_x, self.c1)
        )
        l_hi = min(lam0 + eps_l, self.l2)
        dpsi_dl = (self.psi(l_hi, x0)[0] - self.psi(lam0 - eps_l, x0)[0]) / (l_hi - (lam0 - eps_l))
        t = np.array([-dpsi_dx * self.wx, dpsi_dl * self.wl])
        n = np.linalg.norm(t)
        if n == 0:
            return None
        t /= n
        if entered == "right" and t[0] > 0:
            t = -t
        if entered == "top" and t[1] > 0:
            t = -t
        return t

    def trace(self, lam0, x0, entered: str) -> SpectralCurve:
        pts = [self._point(lam0, x0)]
        h = 1.0 / 128.0
        t = self._implicit_tangent(lam0, x0, entered)
        if t is None:
            return SpectralCurve(points=pts, entered=entered, exited=None)

        streak = 0
        for _ in range(self.max_steps):
            p_cur = pts[-1]
            if len(pts) >= 2:
                p_prev = pts[-2]
                t = np.array([(p_cur.lam - p_prev.lam) / self.wl, (p_cur.x - p_prev.x) / self.wx])
                norm = np.linalg.norm(t)
                if norm == 0:
                    break
                t /= norm
            ok = False
            exited = None
            while h >= 1e-6:
                q_lam = p_cur.lam + h * t[0] * self.wl
                q_x = p_cur.x + h * t[1] * self.wx
                # correction brackets follow the expected per-axis displacement,
                # so neighboring legs of the level set stay out of reach
                r_x = max(2.0 * h * abs(t[1]) * self.wx, 2e-3 * self.wx)
                r_l = max(2.0 * h * abs(t[0]) * self.wl, 2e-3 * self.wl)
                # predictor leaving the window: try to land on the boundary
                side = self._exit_side(q_lam, q_x)
                if side is not None:
                    hit = None
                    if side in ("right", "left"):
                        lam_b = self.l2 if side == "right" else self.l1
                        x_b = self._solve_x(lam_b, q_x, r_x)
                        if x_b is not None and abs(x_b - q_x) <= 4.0 * r_x:
                            hit = (lam_b, x_b)
                    else:
                        x_b = self.c2 if side == "top" else self.c1
                        lam_b = self._solve_lam(x_b, q_lam, r_l)
                        if lam_b is not None and abs(lam_b - q_lam) <= 4.0 * r_l:
                            hit = (lam_b, x_b)
                    if hit is not None:
                        step = np.array([(hit[0] - p_cur.lam) / self.wl, (hit[1] - p_cur.x) / self.wx])
                        ns = np.linalg.norm(step)
                        if ns == 0.0 or float(step @ t) / ns > -0.2:
                            pts.append(self._point(*hit))
                            exited = side
                            break
                    h *= 0.5
                    streak = 0
                    continue
                # interior predictor: correct along the less-aligned coordinate,
                # preferring the lam-parametrized corrector (cached paths);
                # fall back to the other axis near folds, where the lagging
                # secant tangent can overshoot past the level set
                cand = None
                lam_first = abs(t[0]) * 4.0 >= abs(t[1])
                for axis in ("x", "lam") if lam_first else ("lam", "x"):
                    if axis == "x":
                        x_new = self._solve_x(q_lam, q_x, r_x)
                        if x_new is not None and abs(x_new - q_x) <= 4.0 * r_x:
                            cand = (q_lam, x_new)
                            break
                    else:
                        lam_new = self._solve_lam(q_x, q_lam, r_l)
                        if lam_new is not None and abs(lam_new - q_lam) <= 4.0 * r_l:
                            cand = (lam_new, q_x)
                            break
                if cand is not None:
                    # reject corrector jumps onto a neighboring leg (they
                    # reverse the direction of travel)
                    step = np.array([(cand[0] - p_cur.lam) / self.wl, (cand[1] - p_cur.x) / self.wx])
                    ns = np.linalg.norm(step)
                    if ns == 0.0 or float(step @ t) / ns > -0.2:
                        ok = True
                        break
                h *= 0.5
                streak = 0
            if exited is not None:
                return SpectralCurve(points=pts, entered=entered, exited=exited)
            if not ok:
                log.warning("continuation stalled at (%.5g, %.5g)", p_cur.lam, p_cur.x)
                break
            lam_new, x_new = cand
            pts.append(self._point(lam_new, x_new))
            if len(pts) > 12:
                d0 = math.hypot((pts[-1].lam - pts[0].lam) / self.wl, (pts[-1].x - pts[0].x) / self.wx)
                if d0 < 0.5 * h:
                    return SpectralCurve(points=pts, entered=entered, exited=None, closed=True)
            streak += 1
            if streak >= 4:
                h = min(h * 1.5, 1.0 / 16.0)
                streak = 0
        return SpectralCurve(points=pts, entered=entered, exited=None)


def trace_spectral_curves(
    computer: ShelfComputer,
    lam_window: tuple[float, float],
    x_window: tuple[float, float],
    max_steps: int = 4000,
    n0_edge: int = 257,
) -> list[SpectralCurve]:
    """Trace every curve of the psi1 = 0 level set that meets the right or
    top edge of the window."""
    l1, l2 = lam_window
    c1, c2 = x_window
    tracer = _Tracer(computer, lam_window, x_window, max_steps)

    seeds = []
    for x in _boundary_zeros(lambda x: computer.pair_infty(l2, x), c1, c2, n0_edge):
        seeds.append((l2, x, "right"))
    for lam in _boundary_zeros(lambda lam: computer.pair_infty(lam, c2), l1, l2 - 1e-4 * (l2 - l1), n0_edge):
        seeds.append((lam, c2, "top"))

    curves: list[SpectralCurve] = []

    def near_existing(lam, x):
        for c in curves:
            for p in c.points:
                if math.hypot((p.lam - lam) / max(l2 - l1, 1e-12), (p.x - x) / (c2 - c1)) < 1.0 / 64.0:
                    return True
        return False

    for lam0, x0, side in seeds:
        if near_existing(lam0, x0):
            continue
        curves.append(tracer.trace(lam0, x0, side))
    return curves
