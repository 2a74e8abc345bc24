"""Built-in wave models: solitary pulse (gkdv) and dissipative front (kdvb).

Both ship as SystemDefinition factories plus closed-form detection-pair
oracles at lam = 0, the truncation hints the integrators need, and the
model-specific guards/bounds used by the verdict assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigurationError, DegenerateInputError, WaveConstructionError
from .spectral import SystemDefinition, cubic_roots

__all__ = [
    "GkdvModel",
    "KdvbModel",
    "gkdv_system",
    "gkdv_shelf_zero",
    "gkdv_quadratic_roots",
    "gkdv_mu3",
    "kdvb_wave",
    "kdvb_system",
    "kdvb_shelf_zero",
    "kdvb_left_shelf_bound",
]


def _sech(t):
    # overflow-safe sech
    a = np.abs(t)
    e = np.exp(-a)
    return 2.0 * e / (1.0 + e * e)


def _sech_scalar(t: float) -> float:
    e = math.exp(-abs(t))
    return 2.0 * e / (1.0 + e * e)


# ----------------------------------------------------------------------
# generalized KdV solitary wave
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class GkdvModel:
    """Solitary wave u(x) = alpha * sech(gamma x)^(2/p) with speed s > 0.

    The profile solves the integrated wave ODE u'' = s u - u^(p+1)/(p+1);
    alpha**p = s (p+1)(p+2) / 2 and gamma = p sqrt(s) / 2.
    """

    p: float
    s: float

    def __post_init__(self):
        if self.p < 1:
            raise ConfigurationError(f"nonlinearity exponent must be >= 1, got {self.p}")
        if self.s <= 0:
            raise ConfigurationError(f"wave speed must be positive, got {self.s}")

    @property
    def alpha(self) -> float:
        return (0.5 * self.s * (self.p + 1) * (self.p + 2)) ** (1.0 / self.p)

    @property
    def gamma(self) -> float:
        return 0.5 * self.p * math.sqrt(self.s)

    @property
    def alpha_p(self) -> float:
        # alpha**p without the fractional power round trip
        return 0.5 * self.s * (self.p + 1) * (self.p + 2)

    def u(self, x):
        return self.alpha * _sech(self.gamma * x) ** (2.0 / self.p)

    def du(self, x):
        return -(2.0 * self.gamma / self.p) * self.u(x) * np.tanh(self.gamma * x)

    def d2u(self, x):
        u = self.u(x)
        return self.s * u - u ** (self.p + 1) / (self.p + 1)

    def d3u(self, x):
        return (self.s - self.u(x) ** self.p) * self.du(x)

    def a(self, x):
        # a(x) = u^p - s; u^p written through sech^2 to keep it exact
        return self.alpha_p * _sech(self.gamma * x) ** 2 - self.s

    def da(self, x):
        t = self.gamma * x
        return -2.0 * self.gamma * self.alpha_p * _sech(t) ** 2 * np.tanh(t)

    def decay_rate(self) -> float:
        # decay rate of the coefficient perturbation a(x) - a(+-inf)
        return 2.0 * self.gamma

    def wave_ode_residual(self, x):
        return self.d2u(x) - (self.s * self.u(x) - self.u(x) ** (self.p + 1) / (self.p + 1))


def gkdv_mu3(model: GkdvModel, lam: float) -> float:
    """Leading asymptotic rate: the largest root of mu^3 - s mu + lam."""
    roots = cubic_roots(0.0, -model.s, lam)
    return float(roots[0].real)


def gkdv_system(model: GkdvModel) -> SystemDefinition:
    s = model.s
    gamma = model.gamma
    ap = model.alpha_p

    def coeff(x, lam):
        t = gamma * float(x)
        sech2 = _sech_scalar(t) ** 2
        a = ap * sech2 - s
        da = -2.0 * gamma * ap * sech2 * math.tanh(t)
        return np.array(
            [
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [-lam - da, -a, 0.0],
            ]
        )

    def a_inf(lam):
        return np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-lam, s, 0.0]])

    def kappa(lam):
        mu3 = gkdv_mu3(model, lam)
        return 1.0 / math.sqrt(-lam / mu3 + 2.0 * mu3 * mu3)

    m = np.array(
        [
            [0.0, 1.0, 1.0 / math.sqrt(s)],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, -1.0 / s],
        ]
    )
    return SystemDefinition(
        n=3,
        coeff=coeff,
        a_minus=a_inf,
        a_plus=a_inf,
        m_matrix=m,
        label=f"gkdv(p={model.p}, s={model.s})",
        kappa=kappa,
    )


def gkdv_shelf_zero(model: GkdvModel, x):
    """Closed-form detection pair at lam = 0, up to one positive scale:
    psi1 ~ (2 gamma / p) u'' + u''' and psi2 ~ u'.

    Finite zeros of psi1 sit at tanh(gamma x) equal to the roots of
    (p+1)(p+2) z^2 + p (p+2) z - p; psi2 vanishes only at x = 0.
    """
    c = 2.0 * model.gamma / model.p
    return c * model.d2u(x) + model.d3u(x), model.du(x)


def gkdv_quadratic_roots(model: GkdvModel) -> tuple[float, float]:
    """Roots z1 < 0 < z2 of (p+1)(p+2) z^2 + p(p+2) z - p on (-1, 1)."""
    p = model.p
    a, b, c = (p + 1) * (p + 2), p * (p + 2), -p
    disc = math.sqrt(b * b - 4 * a * c)
    return (-b - disc) / (2 * a), (-b + disc) / (2 * a)


# ----------------------------------------------------------------------
# KdV-Burgers front
# ----------------------------------------------------------------------


class _HermiteTable:
    """Uniform-grid cubic Hermite evaluator for (value, derivative) data."""

    def __init__(self, x0: float, h: float, vals: np.ndarray, ders: np.ndarray):
        self.x0 = x0
        self.h = h
        self.vals = vals
        self.ders = ders
        self.x1 = x0 + h * (len(vals) - 1)
        # plain lists: scalar lookups avoid numpy-scalar arithmetic overhead
        self._v = vals.tolist()
        self._d = ders.tolist()

    def scalar(self, x: float) -> float:
        t = (x - self.x0) / self.h
        i = int(t)
        if i < 0:
            i = 0
        elif i > len(self._v) - 2:
            i = len(self._v) - 2
        s = t - i
        v0, v1 = self._v[i], self._v[i + 1]
        d0, d1 = self._d[i] * self.h, self._d[i + 1] * self.h
        s2 = s * s
        s3 = s2 * s
        return (
            (2 * s3 - 3 * s2 + 1) * v0
            + (s3 - 2 * s2 + s) * d0
            + (-2 * s3 + 3 * s2) * v1
            + (s3 - s2) * d1
        )

    def __call__(self, x):
        t = (np.asarray(x) - self.x0) / self.h
        i = np.clip(t.astype(int), 0, len(self.vals) - 2)
        s = t - i
        h = self.h
        v0, v1 = self.vals[i], self.vals[i + 1]
        d0, d1 = self.ders[i] * h, self.ders[i + 1] * h
        s2, s3 = s * s, s * s * s
        out = (
            (2 * s3 - 3 * s2 + 1) * v0
            + (s3 - 2 * s2 + s) * d0
            + (-2 * s3 + 3 * s2) * v1
            + (s3 - s2) * d1
        )
        return out if out.ndim else out.item()


@dataclass(frozen=True)
class KdvbModel:
    """Front profile u(x) with u(-inf) = 1, u(+inf) = -1 for the
    integrated ODE nu u'' + u' - (u^2 - 1)/2 = 0, recentered so u(0) = 0.

    Monotone for nu < 1/4, oscillatory tail at +inf for nu > 1/4.  Outside
    the integrated table the saddle/sink linearizations take over, so the
    profile (and its derivatives) can be evaluated on all of R.
    """

    nu: float
    x_left: float   # below this, saddle linearization around (1, 0)
    x_right: float  # above this, sink linearization around (-1, 0)
    table_u: _HermiteTable = field(repr=False)
    table_du: _HermiteTable = field(repr=False)
    left_amp: float = field(repr=False)
    left_rate: float = field(repr=False)
    right_coeffs: tuple = field(repr=False)
    c_sup: float = 1.0

    def _right_tail(self, x):
        dx = np.asarray(x, dtype=float) - self.x_right
        if self.nu > 0.25:
            a, b, A, B = self.right_coeffs
            e = np.exp(a * dx)
            up1 = e * (A * np.cos(b * dx) + B * np.sin(b * dx))
            dup1 = e * ((a * A + b * B) * np.cos(b * dx) + (a * B - b * A) * np.sin(b * dx))
        else:
            z1, z2, c1, c2 = self.right_coeffs
            e1, e2 = np.exp(z1 * dx), np.exp(z2 * dx)
            up1 = c1 * e1 + c2 * e2
            dup1 = c1 * z1 * e1 + c2 * z2 * e2
        return up1 - 1.0, dup1

    def _eval_scalar(self, x: float) -> tuple[float, float]:
        if x < self.x_left:
            d = self.left_amp * math.exp(self.left_rate * (x - self.x_left))
            return 1.0 - d, -self.left_rate * d
        if x > self.x_right:
            dx = x - self.x_right
            if self.nu > 0.25:
                a, b, A, B = self.right_coeffs
                e = math.exp(a * dx)
                cb, sb = math.cos(b * dx), math.sin(b * dx)
                return e * (A * cb + B * sb) - 1.0, e * ((a * A + b * B) * cb + (a * B - b * A) * sb)
            z1, z2, cc1, cc2 = self.right_coeffs
            e1, e2 = math.exp(z1 * dx), math.exp(z2 * dx)
            return cc1 * e1 + cc2 * e2 - 1.0, cc1 * z1 * e1 + cc2 * z2 * e2
        return self.table_u.scalar(x), self.table_du.scalar(x)

    def _eval(self, x):
        if isinstance(x, float) or np.ndim(x) == 0:
            return self._eval_scalar(float(x))
        x = np.asarray(x, dtype=float)
        u = np.empty_like(x)
        du = np.empty_like(x)
        left = x < self.x_left
        right = x > self.x_right
        mid = ~(left | right)
        if left.any():
            d = self.left_amp * np.exp(self.left_rate * (x[left] - self.x_left))
            u[left] = 1.0 - d
            du[left] = -self.left_rate * d
        if right.any():
            u[right], du[right] = self._right_tail(x[right])
        if mid.any():
            u[mid] = self.table_u(x[mid])
            du[mid] = self.table_du(x[mid])
        return u, du

    def u(self, x):
        return self._eval(x)[0]

    def du(self, x):
        return self._eval(x)[1]

    def d2u(self, x):
        u, du = self._eval(x)
        return (0.5 * (u * u - 1.0) - du) / self.nu

    def d3u(self, x):
        # differentiate the integrated ODE: nu u''' + u'' = u u'
        u, du = self._eval(x)
        d2 = (0.5 * (u * u - 1.0) - du) / self.nu
        return (u * du - d2) / self.nu

    def decay_rate_minus(self) -> float:
        return self.left_rate

    def decay_rate_plus(self) -> float:
        if self.nu > 0.25:
            return 1.0 / (2.0 * self.nu)
        return (1.0 - math.sqrt(1.0 - 4.0 * self.nu)) / (2.0 * self.nu)

    def wave_ode_residual(self, x):
        u, du = self._eval(x)
        return self.nu * self.d2u(x) + du - 0.5 * (u * u - 1.0)


def kdvb_wave(nu: float, L: float = 80.0) -> KdvbModel:
    """Build the front by shooting along the unstable manifold of the
    phase-plane saddle at (1, 0) into the sink at (-1, 0).

    The connection is one-dimensional, so shooting is exact up to
    integration error; the first zero of u fixes the translate.
    """
    if nu <= 0:
        raise ConfigurationError(f"dispersion nu must be positive, got {nu}")
    if abs(nu - 0.25) < 1e-12:
        raise ConfigurationError("nu = 1/4 is the excluded borderline case")

    xi = (-1.0 + math.sqrt(1.0 + 4.0 * nu)) / (2.0 * nu)  # unstable saddle rate
    delta0 = 1e-10
    switch_tol = 1e-8

    def rhs(x, y):
        u, w = y
        return [w, (0.5 * (u * u - 1.0) - w) / nu]

    def near_sink(x, y):
        return math.hypot(y[0] + 1.0, y[1]) - switch_tol

    near_sink.terminal = True
    near_sink.direction = -1

    def downcross(x, y):
        return y[0]

    y0 = [1.0 - delta0, -delta0 * xi]
    # x-budget: saddle escape + spiral/node relaxation, generously padded
    span = math.log(1.0 / delta0) / xi + 40.0 * max(1.0, 2.0 * nu) + L
    sol = solve_ivp(
        rhs,
        (0.0, span),
        y0,
        rtol=1e-12,
        atol=1e-14,
        dense_output=True,
        events=[near_sink, downcross],
        max_step=0.05,
    )
    if not sol.success or sol.t_events[0].size == 0:
        raise WaveConstructionError(
            f"front did not reach the sink within x <= {span:.1f} (nu={nu})"
        )
    if sol.t_events[1].size == 0:
        raise WaveConstructionError("front never crossed u = 0; cannot recenter")
    x_zero = float(sol.t_events[1][0])
    x_end = float(sol.t_events[0][0])

    step = 1e-3
    ts = np.arange(0.0, x_end + step, step)
    ts[-1] = min(ts[-1], x_end)
    states = sol.sol(ts)
    u_tab, w_tab = states[0], states[1]
    table_u = _HermiteTable(-x_zero, step, u_tab.copy(), w_tab.copy())
    dw_tab = (0.5 * (u_tab * u_tab - 1.0) - w_tab) / nu
    table_du = _HermiteTable(-x_zero, step, w_tab.copy(), dw_tab.copy())

    # sink linearization coefficients from the terminal state
    ue, we = sol.sol(x_end)
    if nu > 0.25:
        a = -1.0 / (2.0 * nu)
        b = math.sqrt(4.0 * nu - 1.0) / (2.0 * nu)
        A = ue + 1.0
        B = (we - a * A) / b
        right = (a, b, A, B)
    else:
        rt = math.sqrt(1.0 - 4.0 * nu)
        z1 = (-1.0 - rt) / (2.0 * nu)
        z2 = (-1.0 + rt) / (2.0 * nu)
        c2 = ((ue + 1.0) * z1 - we) / (z1 - z2)
        c1 = (ue + 1.0) - c2
        right = (z1, z2, c1, c2)

    c_sup = float(np.max(np.abs(u_tab))) + 1e-6  # safety margin over table error
    model = KdvbModel(
        nu=nu,
        x_left=-x_zero,
        x_right=x_end - x_zero,
        table_u=table_u,
        table_du=table_du,
        left_amp=delta0,
        left_rate=xi,
        right_coeffs=right,
        c_sup=c_sup,
    )
    mono = bool(np.all(w_tab <= 1e-10))
    if nu < 0.25 and not mono:
        raise WaveConstructionError(f"profile for nu={nu} < 1/4 failed the monotonicity check")
    return model


def kdvb_system(model: KdvbModel) -> SystemDefinition:
    nu = model.nu

    def coeff(x, lam):
        u, du = model._eval_scalar(float(x))
        return np.array(
            [
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0 / nu],
                [du - lam, u, -1.0 / nu],
            ]
        )

    def a_minus(lam):
        return np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0 / nu], [-lam, 1.0, -1.0 / nu]])

    def a_plus(lam):
        return np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0 / nu], [-lam, -1.0, -1.0 / nu]])

    m = np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
    return SystemDefinition(
        n=3,
        coeff=coeff,
        a_minus=a_minus,
        a_plus=a_plus,
        m_matrix=m,
        label=f"kdvb(nu={model.nu})",
    )


def kdvb_shelf_zero(model: KdvbModel, x):
    """Closed-form detection pair at lam = 0, up to one positive scale:
    psi1 ~ -u'(x) (u(x) + 1) and psi2 ~ u''(x).

    For nu > 1/4 the finite crossings alternate between u = -1 events and
    u' = 0 events with the direction cycle (+, +, -, -).
    """
    u, du = model._eval(np.asarray(x, dtype=float))
    return -du * (u + 1.0), model.d2u(x)


def kdvb_left_shelf_bound(model: KdvbModel, c_sup: float | None = None) -> float:
    """Energy-method eigenvalue floor for the half-line problems detected on
    the left shelf: lam >= -(1/(2 eps delta) + 3 C / (2 eps)) with
    eps = delta = min(nu/4, 1/(3C)).

    Any lam1 below the returned value certifies an empty left shelf.
    """
    C = model.c_sup if c_sup is None else float(c_sup)
    if C <= 0:
        raise DegenerateInputError("sup |u| must be positive")
    eps = min(0.25 * model.nu, 1.0 / (3.0 * C))
    delta = eps
    return -(1.0 / (2.0 * eps * delta) + 3.0 * C / (2.0 * eps))
