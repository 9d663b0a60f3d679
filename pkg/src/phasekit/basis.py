"""Harmonic Hermite-Gaussian functions and input state descriptions.

The coordinate-space basis function of |n, X, P, b> is

    phi_n(x) = H_n((x - X) / (sqrt(2) a)) / sqrt(2**n n! sqrt(2 pi) a)
               * exp(-((x - X) / (2 a))**2 + i P x / hbar)

and its momentum-space counterpart (the unitary Fourier transform with kernel
``exp(-i p x / hbar) / sqrt(2 pi hbar)``) is

    phi~_n(p) = (-i)**n H_n((p - P) / (sqrt(2) b)) / sqrt(2**n n! sqrt(2 pi) b)
                * exp(-((p - P) / (2 b))**2 - i X (p - P) / hbar).

No extra constant phase is needed between the two; ``fourier_of_phi`` checks
this numerically.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .hermite import hermite_eval, log_prefactor
from .quadrature import Adaptive, GaussHermite, default_order, integrate_1d
from .scales import PhaseIndex, ScaleParam

__all__ = [
    "OutOfDomain",
    "hermite_gaussian",
    "hermite_gaussian_momentum",
    "phi",
    "phi_tilde",
    "fourier_of_phi",
    "HermiteGaussian",
    "GaussianPacket",
    "Superposition",
    "SampledGrid",
    "eval_state",
    "state_norm",
    "state_from_dict",
    "state_to_dict",
    "load_state",
]


class OutOfDomain(ValueError):
    """A sampled state was evaluated outside its grid."""


def _assemble(n, u, log_pref, phase):
    # sign(H) * exp(log|H| + log_pref - u**2 / 2) * exp(i phase), u = (x - X) / (sqrt(2) a)
    h = hermite_eval(n, u)
    with np.errstate(divide="ignore"):
        log_mod = np.log(np.abs(h)) + log_pref - 0.5 * u * u
    return np.sign(h) * np.exp(log_mod) * np.exp(1j * phase)


def hermite_gaussian(n: int, x, X, P, scale: ScaleParam):
    """phi_n(x, X, P, b) with NumPy broadcasting over ``x``, ``X`` and ``P``."""
    x = np.asarray(x, dtype=float)
    u = (x - X) / (math.sqrt(2.0) * scale.a)
    return _assemble(n, u, log_prefactor(n, scale.a), P * x / scale.hbar)


def hermite_gaussian_momentum(n: int, p, X, P, scale: ScaleParam):
    """phi~_n(p, X, P, b) with NumPy broadcasting over ``p``, ``X`` and ``P``."""
    p = np.asarray(p, dtype=float)
    u = (p - P) / (math.sqrt(2.0) * scale.b)
    val = _assemble(n, u, log_prefactor(n, scale.b), -X * (p - P) / scale.hbar)
    return (-1j) ** n * val


def phi(idx: PhaseIndex, x):
    return hermite_gaussian(idx.n, x, idx.X, idx.P, idx.scale)


def phi_tilde(idx: PhaseIndex, p):
    return hermite_gaussian_momentum(idx.n, p, idx.X, idx.P, idx.scale)


def fourier_of_phi(idx: PhaseIndex, p, spec=None):
    """Numerical ``(2 pi hbar)**-1/2 * integral phi_n(x) exp(-i p x / hbar) dx``.

    Independent of :func:`phi_tilde`; used to pin down its phase convention.
    """
    if spec is None:
        spec = GaussHermite(default_order(idx.n), idx.X, 2.0 * idx.scale.a)
    hbar = idx.scale.hbar

    def one(pv):
        return integrate_1d(lambda x: phi(idx, x) * np.exp(-1j * pv * x / hbar), spec)

    p_arr = np.asarray(p, dtype=float)
    out = np.array([one(pv) for pv in p_arr.ravel()]).reshape(p_arr.shape)
    return out / math.sqrt(2.0 * math.pi * hbar)


# ---------------------------------------------------------------------------
# State descriptions


@dataclass(frozen=True)
class HermiteGaussian:
    idx: PhaseIndex

    @property
    def hbar(self) -> float:
        return self.idx.scale.hbar

    def envelope(self):
        s = self.idx.scale
        k = math.sqrt(2 * self.idx.n + 1)
        return self.idx.X, k * s.a, self.idx.P, k * s.b


@dataclass(frozen=True)
class GaussianPacket:
    """Minimum-uncertainty packet: a ground-state Hermite-Gaussian of its own width.

    ``width`` is the coordinate half-width (standard deviation of |psi|**2);
    it need not match the scale of the basis it is projected onto.
    """

    center: float = 0.0
    width: float = 1.0
    momentum: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("packet width must be positive")

    def as_index(self) -> PhaseIndex:
        return PhaseIndex(0, self.center, self.momentum, ScaleParam(self.width, self.hbar))

    def envelope(self):
        return self.center, self.width, self.momentum, self.hbar / (2.0 * self.width)


@dataclass(frozen=True)
class Superposition:
    """``sum_k c_k |s_k>``; normalization is checked by quadrature on construction."""

    terms: tuple
    check_norm: bool = True
    norm_tol: float = 1e-8

    def __post_init__(self):
        terms = tuple((complex(c), s) for c, s in self.terms)
        if not terms:
            raise ValueError("superposition needs at least one term")
        hbars = {s.hbar for _, s in terms}
        if len(hbars) != 1:
            raise ValueError("all superposed states must share hbar")
        object.__setattr__(self, "terms", terms)
        if self.check_norm:
            nrm = state_norm(self)
            if abs(nrm - 1.0) > self.norm_tol:
                raise ValueError(f"superposition is not normalized: norm**2 = {nrm:.12g}")

    @property
    def hbar(self) -> float:
        return self.terms[0][1].hbar

    def envelope(self):
        envs = [s.envelope() for _, s in self.terms]
        wts = np.array([abs(c) ** 2 for c, _ in self.terms])
        wts = wts / wts.sum()
        xc = float(np.dot(wts, [e[0] for e in envs]))
        pc = float(np.dot(wts, [e[2] for e in envs]))
        xw = max(e[1] + abs(e[0] - xc) for e in envs)
        pw = max(e[3] + abs(e[2] - pc) for e in envs)
        return xc, xw, pc, pw


@dataclass(frozen=True, eq=False)
class SampledGrid:
    """A wavefunction sampled on a uniform coordinate grid, cubic-spline interpolated.

    The interpolation error is O(h**4) in the grid spacing ``h`` for smooth
    data.
    """

    x: np.ndarray
    values: np.ndarray
    hbar: float = 1.0
    _spline: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if x.ndim != 1 or x.shape != v.shape:
            raise ValueError("x and values must be 1-D arrays of equal length")
        if x.size < 4:
            raise ValueError("need at least 4 grid nodes")
        dx = np.diff(x)
        if np.any(dx <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if np.max(np.abs(dx - dx.mean())) > 1e-9 * max(1.0, abs(dx.mean())):
            raise ValueError("grid nodes must be uniformly spaced")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_spline", CubicSpline(x, v))

    @property
    def spacing(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def extent(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    def __call__(self, xq):
        xq = np.asarray(xq, dtype=float)
        lo, hi = self.extent
        if np.any(xq < lo) or np.any(xq > hi):
            raise OutOfDomain(f"sampled state is defined on [{lo}, {hi}] only")
        return self._spline(xq)

    @cached_property
    def _moments(self):
        dens = np.abs(self.values) ** 2
        mass = np.trapezoid(dens, self.x)
        xc = np.trapezoid(self.x * dens, self.x) / mass
        xw = math.sqrt(max(np.trapezoid((self.x - xc) ** 2 * dens, self.x) / mass, 1e-300))
        k = 2.0 * math.pi * np.fft.fftfreq(self.x.size, d=self.spacing) * self.hbar
        spec = np.abs(np.fft.fft(self.values)) ** 2
        pc = float(np.sum(k * spec) / spec.sum())
        pw = math.sqrt(max(float(np.sum((k - pc) ** 2 * spec) / spec.sum()), 1e-300))
        return float(xc), xw, pc, pw

    def envelope(self):
        return self._moments


def eval_state(s, x):
    """Evaluate psi(x) for any state description."""
    if isinstance(s, HermiteGaussian):
        return phi(s.idx, x)
    if isinstance(s, GaussianPacket):
        return phi(s.as_index(), x)
    if isinstance(s, Superposition):
        return sum(c * eval_state(t, x) for c, t in s.terms)
    if isinstance(s, SampledGrid):
        return s(x)
    raise TypeError(f"unknown state type {type(s).__name__}")


def _domain(s, span=12.0):
    if isinstance(s, SampledGrid):
        return s.extent
    if isinstance(s, Superposition):
        lo, hi = zip(*(_domain(t, span) for _, t in s.terms))
        return min(lo), max(hi)
    xc, xw, _, _ = s.envelope()
    return xc - span * xw, xc + span * xw


def state_norm(s, rel_tol: float = 1e-12) -> float:
    """``integral |psi|**2 dx`` by adaptive quadrature over the state's support."""
    lo, hi = _domain(s)
    spec = Adaptive(lo, hi, abs_tol=1e-14, rel_tol=rel_tol, max_refinements=18)
    return float(np.real(integrate_1d(lambda x: np.abs(eval_state(s, x)) ** 2, spec)))


# ---------------------------------------------------------------------------
# Serialization


def state_to_dict(s) -> dict:
    if isinstance(s, HermiteGaussian):
        return {"type": "hermite_gaussian", **s.idx.to_dict()}
    if isinstance(s, GaussianPacket):
        return {
            "type": "gaussian_packet",
            "center": s.center,
            "width": s.width,
            "momentum": s.momentum,
            "hbar": s.hbar,
        }
    if isinstance(s, Superposition):
        d = {
            "type": "superposition",
            "terms": [
                {"coefficient": [c.real, c.imag], "state": state_to_dict(t)} for c, t in s.terms
            ],
        }
        if not s.check_norm:
            d["check_norm"] = False
        return d
    if isinstance(s, SampledGrid):
        return {
            "type": "sampled_grid",
            "hbar": s.hbar,
            "x": s.x.tolist(),
            "values": [[v.real, v.imag] for v in s.values],
        }
    raise TypeError(f"unknown state type {type(s).__name__}")


def state_from_dict(d: dict, hbar: float | None = None):
    kind = d.get("type")
    if kind == "hermite_gaussian":
        d = dict(d)
        if hbar is not None:
            d.setdefault("hbar", hbar)
        return HermiteGaussian(PhaseIndex.from_dict(d))
    if kind == "gaussian_packet":
        return GaussianPacket(
            float(d.get("center", 0.0)),
            float(d.get("width", 1.0)),
            float(d.get("momentum", 0.0)),
            float(d.get("hbar", 1.0 if hbar is None else hbar)),
        )
    if kind == "superposition":
        terms = []
        for t in d["terms"]:
            c = t["coefficient"]
            c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
            terms.append((c, state_from_dict(t["state"], hbar)))
        return Superposition(tuple(terms), check_norm=d.get("check_norm", True))
    if kind == "sampled_grid":
        vals = np.array([complex(re, im) for re, im in d["values"]])
        return SampledGrid(np.array(d["x"], dtype=float), vals, float(d.get("hbar", 1.0 if hbar is None else hbar)))
    raise ValueError(f"unknown state type {kind!r}")


def load_state(path, hbar: float | None = None):
    """Read a state from JSON, or from a three-column CSV ``x, Re psi, Im psi``."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        rows = []
        with path.open(newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append([float(v) for v in row[:3]])
                except ValueError:
                    continue  # header line
        arr = np.array(rows)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError(f"{path}: expected three columns x, re, im")
        return SampledGrid(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], 1.0 if hbar is None else hbar)
    with path.open(encoding="utf-8") as fh:
        return state_from_dict(json.load(fh), hbar)
