"""Matrix and finite-difference representations of the momentum dispersion operator.

Matrix side, in the basis {|n, X, P, b>} truncated to N states:

    p[n, m] = (sqrt(m) d(n, m-1) + sqrt(m+1) d(n, m+1)) / sqrt(2)
    x[n, m] = i (sqrt(m) d(n, m-1) - sqrt(m+1) d(n, m+1)) / sqrt(2)

with ``[x, p] = i diag(1, ..., 1, 1-N)`` and ``(p @ p + x @ x) / 4`` equal to
``diag((2n+1)/4)`` except at the last index.

Differential side, acting on functions of (X, P):

    p~ = sqrt(2) b (i d/dP - X / hbar),    x~ = -i sqrt(2) a d/dX,
    D~ = 4 B (p~**2 + x~**2) / 4
       = -(hbar**2 / 2) d2/dX2 - 2 B**2 d2/dP2 - (4 i B**2 / hbar) X d/dP + (2 B**2 / hbar**2) X**2

whose eigenvalues on phase-space wavefunctions are (2n+1) B, B = b**2. The
bracket is sometimes quoted with every coefficient divided by B; that form is
dimensionless and has eigenvalues 2n+1 instead (``printed_form=True``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scales import ScaleParam

__all__ = [
    "GridTooSmall",
    "ZeroField",
    "PhaseField",
    "matrix_p",
    "matrix_x",
    "commutator_check",
    "reduced_dispersion_product",
    "matrix_reduced_dispersion",
    "matrix_dispersion",
    "dispersion_coefficients",
    "lattice_axes",
    "sample_field",
    "fd_apply_dispersion",
    "fd_apply_composed",
    "eigen_residual",
    "DEFAULT_STEPS_PER_A",
    "DEFAULT_STEPS_PER_B",
    "DEFAULT_EXTENT",
]

DEFAULT_STEPS_PER_A = 200
DEFAULT_STEPS_PER_B = 400
DEFAULT_EXTENT = 6.0
MIN_POINTS = 7  # five interior points plus the stencil margin
ROW_BLOCK = 256


class GridTooSmall(ValueError):
    pass


class ZeroField(ValueError):
    pass


# ---------------------------------------------------------------------------
# Matrices


def _lowering(N: int) -> np.ndarray:
    if N < 1:
        raise ValueError("N must be >= 1")
    return np.diag(np.sqrt(np.arange(1, N, dtype=float)), k=1)


def matrix_p(N: int) -> np.ndarray:
    lo = _lowering(N)
    return ((lo + lo.T) / math.sqrt(2.0)).astype(complex)


def matrix_x(N: int) -> np.ndarray:
    lo = _lowering(N)
    return 1j * (lo - lo.T) / math.sqrt(2.0)


def commutator_check(N: int) -> np.ndarray:
    """``x @ p - p @ x``; equals ``i diag(1, ..., 1, 1 - N)``."""
    x, p = matrix_x(N), matrix_p(N)
    return x @ p - p @ x


def reduced_dispersion_product(N: int) -> np.ndarray:
    """``(p @ p + x @ x) / 4`` built from the truncated matrices."""
    x, p = matrix_x(N), matrix_p(N)
    return 0.25 * (p @ p + x @ x)


def matrix_reduced_dispersion(N: int) -> np.ndarray:
    return np.diag(0.25 * (2.0 * np.arange(N) + 1.0)).astype(complex)


def matrix_dispersion(N: int, scale: ScaleParam) -> np.ndarray:
    """``diag((2n+1) B)`` for n = 0 .. N-1."""
    return 4.0 * scale.B * matrix_reduced_dispersion(N)


# ---------------------------------------------------------------------------
# Lattice fields


@dataclass(frozen=True, eq=False)
class PhaseField:
    """Complex samples of a function of (X, P) on a uniform rectangular lattice.

    ``values[i, j]`` is the sample at ``(X[i], P[j])``.
    """

    X: np.ndarray
    P: np.ndarray
    values: np.ndarray
    scale: ScaleParam

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        P = np.asarray(self.P, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (X.size, P.size):
            raise ValueError(f"values shape {v.shape} does not match axes ({X.size}, {P.size})")
        for name, ax in (("X", X), ("P", P)):
            if ax.size >= 2:
                d = np.diff(ax)
                if np.any(d <= 0) or np.max(np.abs(d - d.mean())) > 1e-8 * abs(d.mean()):
                    raise ValueError(f"{name} axis must be uniform and increasing")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "values", v)

    @property
    def h_X(self) -> float:
        return float((self.X[-1] - self.X[0]) / (self.X.size - 1))

    @property
    def h_P(self) -> float:
        return float((self.P[-1] - self.P[0]) / (self.P.size - 1))

    def interior(self) -> "PhaseField":
        return PhaseField(self.X[1:-1], self.P[1:-1], self.values[1:-1, 1:-1], self.scale)


def lattice_axes(
    scale: ScaleParam,
    center: tuple[float, float] = (0.0, 0.0),
    h_X: float | None = None,
    h_P: float | None = None,
    extent: tuple[float, float] = (DEFAULT_EXTENT, DEFAULT_EXTENT),
):
    """Uniform axes spanning ``center +- (extent[0] a, extent[1] b)``."""
    h_X = scale.a / DEFAULT_STEPS_PER_A if h_X is None else h_X
    h_P = scale.b / DEFAULT_STEPS_PER_B if h_P is None else h_P
    nX = int(round(extent[0] * scale.a / h_X))
    nP = int(round(extent[1] * scale.b / h_P))
    X = center[0] + h_X * np.arange(-nX, nX + 1)
    P = center[1] + h_P * np.arange(-nP, nP + 1)
    return X, P


def sample_field(builder, X, P, scale: ScaleParam) -> PhaseField:
    """Evaluate ``builder(X[:, None], P[None, :])`` into a :class:`PhaseField`."""
    vals = np.broadcast_to(builder(X[:, None], P[None, :]), (len(X), len(P)))
    return PhaseField(X, P, vals, scale)


def dispersion_coefficients(scale: ScaleParam, printed_form: bool = False):
    """Coefficients (c_XX, c_PP, c_XP, c_X2) of the differential operator.

    ``D~ f = c_XX f_XX + c_PP f_PP + c_XP X f_P + c_X2 X**2 f``.
    """
    B, hbar = scale.B, scale.hbar
    c = (-0.5 * hbar * hbar, -2.0 * B * B, -4j * B * B / hbar, 2.0 * B * B / (hbar * hbar))
    if printed_form:
        c = tuple(ci / B for ci in c)
    return c


def _check_grid(field: PhaseField):
    if field.X.size < MIN_POINTS or field.P.size < MIN_POINTS:
        raise GridTooSmall(
            f"need at least {MIN_POINTS} points per axis, got {field.X.size} x {field.P.size}"
        )


def fd_apply_dispersion(field: PhaseField, printed_form: bool = False) -> PhaseField:
    """Apply the differential dispersion operator with second-order central differences.

    The result lives on the interior lattice (one cell stripped on each side).
    """
    _check_grid(field)
    f = field.values
    hX, hP = field.h_X, field.h_P
    cXX, cPP, cXP, cX2 = dispersion_coefficients(field.scale, printed_form)
    Xi = field.X[1:-1]
    out = np.empty((f.shape[0] - 2, f.shape[1] - 2), dtype=complex)
    for r0 in range(1, f.shape[0] - 1, ROW_BLOCK):
        r1 = min(r0 + ROW_BLOCK, f.shape[0] - 1)
        c = f[r0:r1, 1:-1]
        up, dn = f[r0 + 1 : r1 + 1, 1:-1], f[r0 - 1 : r1 - 1, 1:-1]
        rt, lf = f[r0:r1, 2:], f[r0:r1, :-2]
        X = Xi[r0 - 1 : r1 - 1, None]
        d_xx = (up - 2.0 * c + dn) / (hX * hX)
        d_pp = (rt - 2.0 * c + lf) / (hP * hP)
        d_p = (rt - lf) / (2.0 * hP)
        out[r0 - 1 : r1 - 1] = cXX * d_xx + cPP * d_pp + cXP * X * d_p + cX2 * X * X * c
    return PhaseField(Xi, field.P[1:-1], out, field.scale)


def fd_apply_composed(field: PhaseField) -> PhaseField:
    """``4 B (p~ p~ + x~ x~) / 4`` built by composing first-difference operators.

    Each square is a forward-difference operator followed by a backward one.
    Because ``(D+ + D-) / 2`` is the central difference, the composition lands
    on the same stencil as :func:`fd_apply_dispersion`; agreement between the
    two checks the operator algebra rather than the discretization.
    """
    _check_grid(field)
    s = field.scale
    f = field.values
    hX, hP = field.h_X, field.h_P
    X = field.X[:, None]
    k_p = math.sqrt(2.0) * s.b
    k_x = math.sqrt(2.0) * s.a

    xf = -1j * k_x * (f[1:] - f[:-1]) / hX
    xx = -1j * k_x * (xf[1:] - xf[:-1]) / hX

    pf = k_p * (1j * (f[:, 1:] - f[:, :-1]) / hP - X / s.hbar * f[:, :-1])
    pp = k_p * (1j * (pf[:, 1:] - pf[:, :-1]) / hP - X / s.hbar * pf[:, 1:])

    total = xx[:, 1:-1] + pp[1:-1, :]
    return PhaseField(field.X[1:-1], field.P[1:-1], s.B * total, s)


def eigen_residual(field: PhaseField, n: int, eigenvalue: float | None = None) -> float:
    """Relative residual ``|D~ f - lam f| / |lam f|`` over the interior lattice.

    ``lam`` defaults to ``(2n+1) B``.
    """
    lam = (2 * n + 1) * field.scale.B if eigenvalue is None else eigenvalue
    inner = field.values[1:-1, 1:-1]
    norm = float(np.linalg.norm(inner))
    if norm < 1e-300:
        raise ZeroField("candidate field vanishes on the interior lattice")
    applied = fd_apply_dispersion(field).values
    return float(np.linalg.norm(applied - lam * inner) / (abs(lam) * norm))
