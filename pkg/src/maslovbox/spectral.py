"""Asymptotic spectral data for eigenvalue systems y' = A(x; lam) y.

For each admissible lam the asymptotic matrices A-(lam), A+(lam) must each
have a unique simple real eigenvalue of largest real part (spectral gap).
This module extracts that leading pair on both sides together with the
detection forms used throughout:

* v-     right eigenvector of A-(lam) for mu-(lam), unit norm, first nonzero
         component positive;
* w+     left eigenvector of A+(lam), normalized w+ . v+ = 1;
* Vt+    the co-eigenvector of induced_matrix(A+) for -mu+, built from w+
         componentwise (so v+ ^ Vt+ = w+ . v+ = 1 exactly);
* VtM+   the image of Vt+ under the (n-1)-form transform of M, with a global
         sign anchored at lam = 0 (first nonzero component positive there).

Anchoring the M-side sign at lam = 0 and inheriting continuity from Vt+
fixes one orientation for the whole lam <= 0 family, which is what makes
crossing directions comparable across runs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import AssumptionViolationError, DegenerateInputError, DimensionMismatchError
from .exterior import coform_map, induced_matrix

__all__ = [
    "SystemDefinition",
    "AsymptoticSpectrum",
    "EigTriple",
    "cubic_roots",
    "leading_eigenpair",
    "tilde_eigvec_from_left",
    "spectral_data",
    "coalescence_lambda_gkdv",
]

_GAP_TOL = 1e-9  # absolute gap on real parts required by the simplicity assumption


def _order_desc_real(ev: np.ndarray) -> np.ndarray:
    """Descending real part, ties (to 1e-9 relative) by ascending imaginary part."""
    scale = 1.0 + float(np.max(np.abs(ev))) if ev.size else 1.0
    re_key = np.round(ev.real / (1e-9 * scale))
    return ev[np.lexsort((ev.imag, -re_key))]


def cubic_roots(b: float, c: float, d: float) -> np.ndarray:
    """Roots of mu^3 + b mu^2 + c mu + d by Cardano's formulas.

    Deterministic ordering: descending real part, ties broken by ascending
    imaginary part.  Real coefficients only.
    """
    # depressed cubic t^3 + p t + q with mu = t - b/3
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = -4.0 * p**3 - 27.0 * q * q
    if disc >= 0.0 and p <= 0.0:
        # three real roots: trigonometric form
        if p == 0.0:
            roots = [shift, shift, shift] if q == 0.0 else None
            if roots is None:
                r = -np.cbrt(q)
                roots = [r + shift, r + shift, r + shift]
            ts = np.array(roots, dtype=complex)
        else:
            m = 2.0 * math.sqrt(-p / 3.0)
            arg = np.clip(3.0 * q / (p * m), -1.0, 1.0)
            phi = math.acos(arg) / 3.0
            ts = np.array(
                [m * math.cos(phi - 2.0 * math.pi * k / 3.0) + shift for k in range(3)],
                dtype=complex,
            )
    else:
        # one real root, one complex pair
        half_q = q / 2.0
        inner = cmath.sqrt(half_q * half_q + (p / 3.0) ** 3)
        u = (-half_q + inner) ** (1.0 / 3.0)
        if abs(u) < 1e-300:
            u = (-half_q - inner) ** (1.0 / 3.0)
        v = -p / (3.0 * u) if abs(u) > 0 else 0.0
        w = complex(-0.5, math.sqrt(3.0) / 2.0)
        ts = np.array([u + v + shift, u * w + v / w + shift, u / w + v * w + shift])
    # clean up tiny imaginary parts on the real root(s)
    real_mask = np.abs(ts.imag) < 1e-9 * (1.0 + np.abs(ts.real))
    ts = np.where(real_mask, ts.real + 0.0j, ts)
    return _order_desc_real(ts)


def _char_cubic_coeffs(A: np.ndarray) -> tuple[float, float, float]:
    tr = float(np.trace(A))
    tr2 = float(np.trace(A @ A))
    det = float(np.linalg.det(A))
    return -tr, 0.5 * (tr * tr - tr2), -det


def _eigvals_ordered(A: np.ndarray) -> np.ndarray:
    if A.shape[0] == 3:
        return cubic_roots(*_char_cubic_coeffs(A))
    return _order_desc_real(np.linalg.eigvals(A))


def _null_vector(B: np.ndarray) -> np.ndarray:
    # right null vector via SVD; B is (A - mu I) at a simple eigenvalue
    _, _, vh = np.linalg.svd(B)
    return vh[-1].conj()


def _sign_fix(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12 * np.linalg.norm(v))
    if nz.size and v[nz[0]].real < 0:
        return -v
    return v


@dataclass(frozen=True)
class EigTriple:
    """Leading eigenvalue mu with right/left eigenvectors (w . v = 1)."""

    mu: float
    v: np.ndarray
    w: np.ndarray
    mu_star: float  # largest real part among the remaining eigenvalues


def leading_eigenpair(A) -> EigTriple:
    """Leading simple real eigenpair of a square matrix.

    v has unit norm with its first nonzero component positive; w is the left
    eigenvector scaled so that w . v = 1.  Raises AssumptionViolationError
    when the leading eigenvalue is not real and simple with a clear gap.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"square matrix required, got {A.shape}")
    ev = _eigvals_ordered(A)
    mu = ev[0]
    mu_star = float(np.max(ev[1:].real))
    if abs(mu.imag) > 1e-9 * (1.0 + abs(mu.real)) or mu.real - mu_star <= _GAP_TOL:
        raise AssumptionViolationError(
            f"no simple real leading eigenvalue: leading {mu}, next real part {mu_star}",
            mu_pair=(complex(mu), mu_star),
        )
    mu = float(mu.real)
    v = _sign_fix(_null_vector(A - mu * np.eye(A.shape[0])).real)
    v = v / np.linalg.norm(v)
    w = _null_vector(A.T - mu * np.eye(A.shape[0])).real
    wv = float(w @ v)
    if abs(wv) < 1e-12:
        raise AssumptionViolationError(
            f"leading eigenvalue {mu} appears defective (w.v = {wv})", mu_pair=(mu, mu_star)
        )
    return EigTriple(mu=mu, v=v, w=w / wv, mu_star=mu_star)


def tilde_eigvec_from_left(w) -> np.ndarray:
    """Co-eigenvector of the induced matrix built from a left eigenvector.

    Componentwise out[j] = (-1)**(n-j) w[n+1-j] (1-based); if w A = mu w then
    induced_matrix(A) @ out = -mu out, and v ^ out = w . v for any v.
    """
    w = np.asarray(w)
    if w.ndim != 1:
        raise DimensionMismatchError("left eigenvector must be a vector")
    n = w.size
    alt = (-1.0) ** (n - 1 - np.arange(n))
    return alt * w[::-1]


@dataclass(frozen=True)
class SystemDefinition:
    """An eigenvalue system y' = A(x; lam) y with asymptotic limits.

    coeff(x, lam) returns the n x n coefficient matrix; a_minus / a_plus are
    its x -> -inf / +inf limits.  m_matrix is the invertible matrix defining
    the second detection form.
    """

    n: int
    coeff: Callable[[float, float], np.ndarray]
    a_minus: Callable[[float], np.ndarray]
    a_plus: Callable[[float], np.ndarray]
    m_matrix: np.ndarray
    label: str = ""
    kappa: Optional[Callable[[float], float]] = None  # reporting hook only
    anchor_lambda: float = 0.0  # where the M-side sign convention is anchored

    def __post_init__(self):
        M = np.asarray(self.m_matrix, dtype=float)
        object.__setattr__(self, "m_matrix", M)
        if M.shape != (self.n, self.n):
            raise DimensionMismatchError(f"m_matrix must be {self.n}x{self.n}")
        if abs(np.linalg.det(M)) <= 1e-12:
            raise DegenerateInputError("m_matrix is not invertible (|det| <= 1e-12)")

    def asymptotic_mismatch(self, lam: float, x_abs: float = 50.0) -> tuple[float, float]:
        """Frobenius distances ||A(-x)-A-||, ||A(+x)-A+|| for validation."""
        dm = np.linalg.norm(self.coeff(-x_abs, lam) - self.a_minus(lam))
        dp = np.linalg.norm(self.coeff(+x_abs, lam) - self.a_plus(lam))
        return float(dm), float(dp)


@dataclass(frozen=True)
class AsymptoticSpectrum:
    """Leading spectral data of both asymptotic matrices at one lam."""

    lam: float
    mu_minus: float
    mu_plus: float
    mu_star_minus: float
    mu_star_plus: float
    v_minus: np.ndarray
    w_plus: np.ndarray
    vtilde_plus: np.ndarray
    vtilde_m_plus: np.ndarray
    kappa: float = 1.0
    coalescence_note: str = ""
    _norm_vt: float = field(default=0.0, repr=False)

    @property
    def gap_minus(self) -> float:
        return self.mu_minus - self.mu_star_minus

    @property
    def gap_plus(self) -> float:
        return self.mu_plus - self.mu_star_plus


def _m_sign(sys: SystemDefinition) -> float:
    """Global sign of the M-side detection form, anchored at anchor_lambda."""
    trip = leading_eigenpair(sys.a_plus(sys.anchor_lambda))
    ref = coform_map(sys.m_matrix) @ tilde_eigvec_from_left(trip.w)
    nz = np.flatnonzero(np.abs(ref) > 1e-12 * np.linalg.norm(ref))
    if nz.size == 0:
        raise DegenerateInputError("M-transformed co-eigenvector vanished at the anchor")
    return 1.0 if ref[nz[0]] > 0 else -1.0


def spectral_data(sys: SystemDefinition, lam: float) -> AsymptoticSpectrum:
    """Assemble the leading asymptotic data for one lam.

    Normalizations: v- unit norm (first nonzero component positive), Vt+ from
    the left eigenvector with w+ . v+ = 1, VtM+ = sign * coform_map(M) @ Vt+
    with the sign fixed at the anchor lam.  When A- = A+, this yields
    v- ^ Vt+ = 1 exactly.
    """
    minus = leading_eigenpair(sys.a_minus(lam))
    plus = leading_eigenpair(sys.a_plus(lam))
    vt = tilde_eigvec_from_left(plus.w)
    vtm = _m_sign(sys) * (coform_map(sys.m_matrix) @ vt)
    note = ""
    if abs(plus.mu_star - minus.mu_star) < 1e-12 and plus.mu_star == minus.mu_star:
        pass  # nothing to report; kept for symmetry of the branches below
    kap = float(sys.kappa(lam)) if sys.kappa is not None else 1.0
    return AsymptoticSpectrum(
        lam=float(lam),
        mu_minus=minus.mu,
        mu_plus=plus.mu,
        mu_star_minus=minus.mu_star,
        mu_star_plus=plus.mu_star,
        v_minus=minus.v,
        w_plus=plus.w,
        vtilde_plus=vt,
        vtilde_m_plus=vtm,
        kappa=kap,
        coalescence_note=note,
        _norm_vt=float(np.linalg.norm(vt)),
    )


def coalescence_lambda_gkdv(s: float) -> float:
    """Parameter value where the two non-leading asymptotic rates of the
    solitary-wave system merge into a complex pair: -2 (s/3)^(3/2).

    Affects only the subdominant pair; the leading eigenvalue stays real and
    simple through it.
    """
    if s <= 0:
        raise DegenerateInputError(f"wave speed must be positive, got {s}")
    return -2.0 * (s / 3.0) ** 1.5
