"""Rescaled shooting for the decaying solution and the (n-1)-form co-solution.

Forward pass: u' = (A(x;lam) - mu_- I) u from x = -L_minus with u = v-(lam),
so u is the maximally-decaying solution with its dominant exponential removed.
Backward pass: U' = (induced_matrix(A) + mu_+ I) U from x = +L_plus with
U = Vt+(lam).  Both passes renormalize whenever the carried norm leaves
[1e-6, 1e6] and accumulate the dropped scale as a log, which only the Evans
reconstruction consumes; every detection quantity is scale-normalized.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    ConfigurationError,
    DegenerateInputError,
    IntegrationFailureError,
)
from .exterior import coform_map, induced_matrix, wedge_top
from .spectral import AsymptoticSpectrum, SystemDefinition, spectral_data, _m_sign

__all__ = [
    "TruncationChoice",
    "PathFunction",
    "SolutionPath",
    "PsiPath",
    "integrate_eta_minus",
    "integrate_ytilde_plus",
    "psi_pair_at",
    "finite_c_pair",
    "select_truncation",
    "ShelfComputer",
]

_LEG = 4.0            # renormalization checkpoints every <= 4 units of x
_NORM_LO, _NORM_HI = 1e-6, 1e6


@dataclass(frozen=True)
class TruncationChoice:
    """Domain truncation and integration tolerances."""

    L_minus: float
    L_plus: float
    rtol: float = 1e-10
    atol: float = 1e-12

    def __post_init__(self):
        if self.L_minus <= 0 or self.L_plus <= 0:
            raise ConfigurationError("truncation lengths must be positive")
        if not (0 < self.rtol <= 1e-4) or not (0 < self.atol <= 1e-4):
            raise ConfigurationError("tolerances must lie in (0, 1e-4]")


class PathFunction:
    """Piecewise dense ODE solution with log-scale bookkeeping.

    eval(x) returns (vector, log_scale): the true solution is
    exp(log_scale) * vector, with the vector kept within a safe float range.
    """

    def __init__(self, segments, x_lo: float, x_hi: float):
        self._segments = sorted(segments, key=lambda s: s[0])
        self._los = [s[0] for s in self._segments]
        self.x_lo = x_lo
        self.x_hi = x_hi

    def eval(self, x: float) -> tuple[np.ndarray, float]:
        if not (self.x_lo - 1e-9 <= x <= self.x_hi + 1e-9):
            raise ValueError(f"x={x} outside path range [{self.x_lo}, {self.x_hi}]")
        x = min(max(x, self.x_lo), self.x_hi)
        i = bisect.bisect_right(self._los, x) - 1
        i = max(0, min(i, len(self._segments) - 1))
        lo, hi, sol, base = self._segments[i]
        return sol(x), base

    def direction(self, x: float) -> np.ndarray:
        v, _ = self.eval(x)
        n = np.linalg.norm(v)
        if n == 0.0:
            raise DegenerateInputError(f"path vanished at x={x}")
        return v / n

    def sample(self, xs) -> "SolutionPath":
        xs = np.asarray(xs, dtype=float)
        vecs = np.empty((xs.size, self._segments[0][2](self.x_lo).size))
        logs = np.empty(xs.size)
        for k, x in enumerate(xs):
            v, b = self.eval(float(x))
            vecs[k] = v
            logs[k] = b
        return SolutionPath(xs=xs, vectors=vecs, log_scales=logs)


@dataclass(frozen=True)
class SolutionPath:
    """Grid samples of a rescaled solution (vector per point, log scale per point)."""

    xs: np.ndarray
    vectors: np.ndarray
    log_scales: np.ndarray


@dataclass
class PsiPath:
    """A sampled detection pair along one shelf parameter."""

    ts: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray

    @property
    def invariance_min(self) -> float:
        return float(np.min(self.psi1**2 + self.psi2**2))

    @property
    def broken(self) -> bool:
        return self.invariance_min <= 1e-12


def _integrate_legs(rhs, x_from: float, x_to: float, y0: np.ndarray, rtol: float, atol: float) -> PathFunction:
    direction = 1.0 if x_to >= x_from else -1.0
    n_legs = max(1, int(math.ceil(abs(x_to - x_from) / _LEG)))
    edges = np.linspace(x_from, x_to, n_legs + 1)
    y = np.array(y0, dtype=float)
    base = 0.0
    segments = []
    for a, b in zip(edges[:-1], edges[1:]):
        sol = solve_ivp(rhs, (a, b), y, method="RK45", dense_output=True, rtol=rtol, atol=atol)
        if not sol.success:
            raise IntegrationFailureError(f"integration failed near x={sol.t[-1]}", x=float(sol.t[-1]))
        y = sol.y[:, -1].copy()
        if not np.all(np.isfinite(y)):
            raise IntegrationFailureError(f"non-finite state at x={b}", x=float(b))
        segments.append((min(a, b), max(a, b), sol.sol, base))
        nrm = float(np.linalg.norm(y))
        if nrm == 0.0:
            raise IntegrationFailureError(f"solution collapsed to zero at x={b}", x=float(b))
        if nrm < _NORM_LO or nrm > _NORM_HI:
            base += math.log(nrm)
            y /= nrm
    lo, hi = min(x_from, x_to), max(x_from, x_to)
    return PathFunction(segments, lo, hi)


def integrate_eta_minus(
    sys: SystemDefinition,
    lam: float,
    trunc: TruncationChoice,
    x_to: float | None = None,
    spec: AsymptoticSpectrum | None = None,
) -> PathFunction:
    """Forward pass: the rescaled maximally-decaying solution from -L_minus."""
    spec = spec or spectral_data(sys, lam)
    mu = spec.mu_minus
    eye = np.eye(sys.n)

    def rhs(x, u):
        return (sys.coeff(x, lam) - mu * eye) @ u

    target = trunc.L_plus if x_to is None else x_to
    return _integrate_legs(rhs, -trunc.L_minus, target, spec.v_minus, trunc.rtol, trunc.atol)


def integrate_ytilde_plus(
    sys: SystemDefinition,
    lam: float,
    trunc: TruncationChoice,
    x_to: float | None = None,
    spec: AsymptoticSpectrum | None = None,
) -> PathFunction:
    """Backward pass: the rescaled (n-1)-form co-solution from +L_plus."""
    spec = spec or spectral_data(sys, lam)
    mu = spec.mu_plus
    eye = np.eye(sys.n)

    def rhs(x, U):
        return (induced_matrix(sys.coeff(x, lam)) + mu * eye) @ U

    target = -trunc.L_minus if x_to is None else x_to
    return _integrate_legs(rhs, trunc.L_plus, target, spec.vtilde_plus, trunc.rtol, trunc.atol)


def psi_pair_at(u, spec: AsymptoticSpectrum) -> tuple[float, float]:
    """Detection pair against the asymptotic targets:
    psi1 = u ^ Vt+ / (|u| |Vt+|),  psi2 = u ^ VtM+ / (|u| |Vt+|).

    This is the large-c form used on the left/right shelves and for
    spectral-curve tracing.
    """
    u = np.asarray(u, dtype=float)
    nu = np.linalg.norm(u)
    if nu == 0.0:
        raise DegenerateInputError("zero vector has no detection pair")
    denom = nu * np.linalg.norm(spec.vtilde_plus)
    return (
        wedge_top(u, spec.vtilde_plus) / denom,
        wedge_top(u, spec.vtilde_m_plus) / denom,
    )


def select_truncation(
    sys: SystemDefinition,
    lam_range: tuple[float, float],
    tol: float = 1e-8,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    n_probe: int = 9,
) -> TruncationChoice:
    """Choose L so the coefficient perturbation satisfies
    ||A(+-L) - A+-|| < tol * gap, where gap is the smallest spectral gap of
    the asymptotic matrices over the lam range.  Clamped to L >= 10; fails
    above L = 500.
    """
    l1, l2 = lam_range
    lams = np.linspace(l1, l2, n_probe)
    gap = math.inf
    for lam in lams:
        sp = spectral_data(sys, float(lam))
        gap = min(gap, sp.gap_minus, sp.gap_plus)
    if not (gap > 0):
        raise ConfigurationError("no spectral gap over the lam range")
    budget = tol * gap

    def side_ok(L: float) -> tuple[bool, bool]:
        ok_m = all(
            np.linalg.norm(sys.coeff(-L, float(lam)) - sys.a_minus(float(lam))) < budget
            for lam in lams
        )
        ok_p = all(
            np.linalg.norm(sys.coeff(+L, float(lam)) - sys.a_plus(float(lam))) < budget
            for lam in lams
        )
        return ok_m, ok_p

    L_minus = L_plus = None
    L = 10.0
    while L <= 500.0:
        ok_m, ok_p = side_ok(L)
        if L_minus is None and ok_m:
            L_minus = L
        if L_plus is None and ok_p:
            L_plus = L
        if L_minus is not None and L_plus is not None:
            return TruncationChoice(L_minus=L_minus, L_plus=L_plus, rtol=rtol, atol=atol)
        L *= 1.2
    raise ConfigurationError(
        f"cannot satisfy coefficient tolerance {tol:g} within L <= 500 for {sys.label!r}"
    )


class ShelfComputer:
    """Cached shooting passes and detection pairs for one system.

    All shelf, box, Evans, and curve computations share this object so the
    per-lam ODE passes are integrated once.
    """

    def __init__(self, sys: SystemDefinition, trunc: TruncationChoice):
        self.sys = sys
        self.trunc = trunc
        self._spec: dict[float, AsymptoticSpectrum] = {}
        self._u: dict[float, PathFunction] = {}
        self._U: dict[float, PathFunction] = {}
        self._u_hi: dict[float, float] = {}
        self._U_lo: dict[float, float] = {}
        self.m_sign = _m_sign(sys)
        self.m_map = coform_map(sys.m_matrix)

    # -- cached primitives -------------------------------------------------

    def spec(self, lam: float) -> AsymptoticSpectrum:
        lam = float(lam)
        if lam not in self._spec:
            self._spec[lam] = spectral_data(self.sys, lam)
        return self._spec[lam]

    def u_path(self, lam: float, x_hi: float | None = None) -> PathFunction:
        lam = float(lam)
        want = self.trunc.L_plus if x_hi is None else min(x_hi, self.trunc.L_plus)
        if lam not in self._u or self._u_hi[lam] < want - 1e-12:
            self._u[lam] = integrate_eta_minus(self.sys, lam, self.trunc, x_to=want, spec=self.spec(lam))
            self._u_hi[lam] = want
        return self._u[lam]

    def U_path(self, lam: float, x_lo: float | None = None) -> PathFunction:
        lam = float(lam)
        want = -self.trunc.L_minus if x_lo is None else max(x_lo, -self.trunc.L_minus)
        if lam not in self._U or self._U_lo[lam] > want + 1e-12:
            self._U[lam] = integrate_ytilde_plus(self.sys, lam, self.trunc, x_to=want, spec=self.spec(lam))
            self._U_lo[lam] = want
        return self._U[lam]

    # -- detection pairs ----------------------------------------------------

    def pair_infty(self, lam: float, x: float) -> tuple[float, float]:
        """Asymptotic-target pair along x at fixed lam (right/left shelves)."""
        u, _ = self.u_path(lam, x_hi=max(x, 0.0)).eval(x)
        return psi_pair_at(u, self.spec(lam))

    def pair_finite(self, lam: float, x: float, c: float) -> tuple[float, float]:
        """Finite-c pair: detection against the co-solution carried at x = c."""
        u, _ = self.u_path(lam, x_hi=max(x, c)).eval(x)
        U, _ = self.U_path(lam, x_lo=min(x, c)).eval(c)
        nu, nU = np.linalg.norm(u), np.linalg.norm(U)
        if nu == 0.0 or nU == 0.0:
            raise DegenerateInputError("degenerate state in finite-c pair")
        denom = nu * nU
        return (
            wedge_top(u, U) / denom,
            self.m_sign * wedge_top(u, self.m_map @ U) / denom,
        )

    def pair_bottom_asym(self, lam: float) -> tuple[float, float]:
        """Pair of the asymptotic bottom shelf, from spectral data alone."""
        sp = self.spec(lam)
        return psi_pair_at(sp.v_minus, sp)

    # -- Evans values ---------------------------------------------------------

    def evans(self, lam: float, x_match: float = 0.0) -> float:
        """Evans value with all removed scales recombined at x_match."""
        sp = self.spec(lam)
        u, bu = self.u_path(lam, x_hi=max(x_match, 0.0)).eval(x_match)
        U, bU = self.U_path(lam, x_lo=min(x_match, 0.0)).eval(x_match)
        expo = (sp.mu_minus - sp.mu_plus) * x_match + bu + bU
        return float(math.exp(expo) * wedge_top(u, U))


def finite_c_pair(sys: SystemDefinition, lam: float, c: float, trunc: TruncationChoice) -> tuple[float, float]:
    """One-shot finite-c pair evaluated at x = c (top-shelf detection value)."""
    if not (-trunc.L_minus < c <= trunc.L_plus):
        raise ConfigurationError(f"c={c} outside the truncation window")
    return ShelfComputer(sys, trunc).pair_finite(lam, c, c)
