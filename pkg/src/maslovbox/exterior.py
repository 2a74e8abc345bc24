"""Exterior-algebra kernels for 1-forms and (n-1)-forms on R^n.

A 1-form is stored as its coefficient vector in the basis e_1..e_n.  An
(n-1)-form V is stored as the vector (V_1, ..., V_n) where slot j holds the
coefficient of the basis form omitting e_{n+1-j}, i.e.

    V_1 e_1^...^e_{n-1} + V_2 e_1^...^e_{n-2}^e_n + ... + V_n e_2^...^e_n.

Slot coefficients are raw minors (no cofactor signs); every alternating sign
lives in ``wedge_top`` and ``coform_to_covector``.  All kernels are
dimension-generic for n >= 2 and dtype-preserving (real or complex).
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError

__all__ = [
    "wedge_top",
    "induced_matrix",
    "columns_to_coform",
    "coform_to_covector",
    "coform_map",
    "conjugation_residual",
]


def _alt_signs(n: int) -> np.ndarray:
    # (+1, -1, +1, ...) of length n
    return (-1.0) ** np.arange(n)


def _as_vector(v, name: str) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 1 or v.size < 2:
        raise DimensionMismatchError(f"{name} must be a vector of length >= 2, got shape {v.shape}")
    return v


def wedge_top(v, V) -> float | complex:
    """Coefficient of e_1^...^e_n in the product (1-form v) ^ ((n-1)-form V).

    Equals sum_i (-1)**(i+1) v_i V_{n+1-i}; for V = columns_to_coform(Y) this
    is det([v | Y]).
    """
    v = _as_vector(v, "v")
    V = _as_vector(V, "V")
    if v.shape != V.shape:
        raise DimensionMismatchError(f"1-form and (n-1)-form disagree: {v.shape} vs {V.shape}")
    return (v * (_alt_signs(v.size) * V[::-1])).sum().item()


def induced_matrix(A) -> np.ndarray:
    """Matrix driving the (n-1)-form flow induced by y' = A y.

    Entrywise relation: out[i, j] = (-1)**(i+j+1) * A[n+1-j, n+1-i] in 1-based
    indices.  Its spectrum is the negated spectrum of A, and
    (A u) ^ V + u ^ (out V) = 0 for all u, V.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"square matrix required, got shape {A.shape}")
    n = A.shape[0]
    i, j = np.indices((n, n))
    signs = (-1.0) ** (i + j + 1)
    return signs * A[::-1, ::-1].T


def columns_to_coform(cols) -> np.ndarray:
    """Coefficients of y_1 ^ ... ^ y_{n-1} for the columns of an n x (n-1) matrix.

    Slot j receives the minor obtained by deleting row n+1-j (1-based); minors
    carry no extra sign.
    """
    Y = np.asarray(cols)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1] + 1:
        raise DimensionMismatchError(f"expected shape (n, n-1), got {Y.shape}")
    n = Y.shape[0]
    out = np.empty(n, dtype=np.result_type(Y.dtype, float))
    for j in range(n):
        out[j] = np.linalg.det(np.delete(Y, n - 1 - j, axis=0))
    return out


def coform_to_covector(V) -> np.ndarray:
    """Row vector z with z . y == wedge_top(y, V) for every 1-form y.

    Componentwise z_j = (-1)**(j-1) V_{n+1-j}; the returned expression is the
    same floating-point product used by ``wedge_top``.
    """
    V = _as_vector(V, "V")
    return _alt_signs(V.size) * V[::-1]


def coform_map(M) -> np.ndarray:
    """Matrix L acting on (n-1)-form coefficients with
    (M y_1) ^ ... ^ (M y_{n-1}) = L (y_1 ^ ... ^ y_{n-1}).

    Satisfies (M u) ^ (L V) = det(M) * (u ^ V) for all u, V.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"square matrix required, got shape {M.shape}")
    n = M.shape[0]
    L = np.empty((n, n), dtype=np.result_type(M.dtype, float))
    for j in range(n):
        keep = [k for k in range(n) if k != n - 1 - j]
        L[:, j] = columns_to_coform(M[:, keep])
    return L


def conjugation_residual(A, u, U) -> float | complex:
    """(A u) ^ U + u ^ (induced_matrix(A) U); identically zero in exact arithmetic."""
    A = np.asarray(A)
    u = _as_vector(u, "u")
    U = _as_vector(U, "U")
    if A.shape != (u.size, u.size) or U.size != u.size:
        raise DimensionMismatchError("A, u, U dimensions are inconsistent")
    return wedge_top(A @ u, U) + wedge_top(u, induced_matrix(A) @ U)
