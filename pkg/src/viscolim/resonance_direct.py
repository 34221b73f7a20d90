"""Resonances of step potentials as zeros of an outgoing matching function.

Start from the solution ``e^{-ikx}`` (outgoing to the left) at ``x = -r0``,
propagate ``(u, u')`` across the pieces with the constant-coefficient
fundamental system, and return ``f(k) = ik u(r0) - u'(r0)``. For
``x > r0`` the solution is ``A e^{-ikx} + B e^{ikx}`` and ``f = 2ik A e^{-ikr0}``,
so zeros are exactly the ``k`` for which the solution is outgoing on both
sides: resonances for ``Im k < 0``, bound states for ``Im k > 0``.

Every step is entire in ``k`` (cos and sin(x)/x of ``sqrt(k^2 - v)`` are even
in the root), so the argument principle applies on any contour avoiding
``k = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import potentials as pot
from .eigensolver import spectral_order
from .errors import (BoundaryTooCloseToZero, BudgetExceeded, ConfigError,
                     NonCompactSupport, ZeroWavenumber)
from .potentials import AnalyticKind, AnalyticPotential, PiecewiseConstantPotential

_TAYLOR_CUTOFF = 1e-4
_MAX_PHASE_STEP = math.pi / 2


def _fundamental(w, length):
    """``cos(sqrt(w) L)``, ``sin(sqrt(w) L) / sqrt(w)`` as entire functions of ``w``."""
    w = np.asarray(w, dtype=complex)
    t = w * length * length
    small = np.abs(t) < _TAYLOR_CUTOFF
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.sqrt(w)
        c = np.cos(root * length)
        s = np.sin(root * length) / root
    if np.any(small):
        ts = t[small] if t.ndim else t
        c_small = 1 - ts / 2 + ts**2 / 24 - ts**3 / 720
        s_small = length * (1 - ts / 6 + ts**2 / 120 - ts**3 / 5040)
        if t.ndim:
            c[small], s[small] = c_small, s_small
        else:
            c, s = c_small, s_small
    return c, s


def propagate_piece(u, du, v: float, k, length: float):
    """Carry ``(u, u')`` across an interval where ``-u'' + v u = k^2 u``."""
    if length < 0:
        raise ValueError("length must be non-negative")
    k = np.asarray(k, dtype=complex)
    w = k * k - v
    c, s = _fundamental(w, length)
    return u * c + du * s, du * c - u * w * s


def _pieces_of(p):
    if isinstance(p, PiecewiseConstantPotential):
        return p.pieces
    if isinstance(p, AnalyticPotential) and p.kind is AnalyticKind.ZERO:
        return ()
    raise NonCompactSupport("matching function needs a compactly supported step potential")


def matching_function(p, k, r0: float | None = None):
    """``f(k) = ik u(r0) - u'(r0)``; vectorized over ``k``."""
    pieces = _pieces_of(p)
    r = pot.support_radius(p) if r0 is None else float(r0)
    if r < pot.support_radius(p):
        raise ConfigError("r0 smaller than the support radius")
    k_arr = np.asarray(k, dtype=complex)
    if np.any(k_arr == 0):
        raise ZeroWavenumber("matching function is evaluated at k = 0")
    u = np.exp(1j * k_arr * r)
    du = -1j * k_arr * u
    x = -r
    for a, b, v in pieces:
        if a > x:
            u, du = propagate_piece(u, du, 0.0, k_arr, a - x)
        u, du = propagate_piece(u, du, v, k_arr, b - a)
        x = b
    if r > x:
        u, du = propagate_piece(u, du, 0.0, k_arr, r - x)
    f = 1j * k_arr * u - du
    return complex(f) if f.ndim == 0 else f


@dataclass(frozen=True)
class KRectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ConfigError(f"degenerate rectangle {self}")

    @property
    def width(self):
        return self.re_max - self.re_min

    @property
    def height(self):
        return self.im_max - self.im_min

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, k, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= k.real <= self.re_max + pad
                and self.im_min - pad <= k.imag <= self.im_max + pad)

    def distance_to_origin(self) -> float:
        dx = max(self.re_min, 0.0, -self.re_max)
        dy = max(self.im_min, 0.0, -self.im_max)
        return math.hypot(dx, dy)

    def split(self, frac: float) -> tuple["KRectangle", "KRectangle"]:
        """Cut across the longer side at fraction ``frac``."""
        if self.width >= self.height:
            cut = self.re_min + frac * self.width
            return (KRectangle(self.re_min, cut, self.im_min, self.im_max),
                    KRectangle(cut, self.re_max, self.im_min, self.im_max))
        cut = self.im_min + frac * self.height
        return (KRectangle(self.re_min, self.re_max, self.im_min, cut),
                KRectangle(self.re_min, self.re_max, cut, self.im_max))

    def path(self, t):
        """Counter-clockwise boundary, ``t`` in ``[0, 1]``, corners at quarters."""
        t = np.asarray(t, dtype=float)
        side = np.minimum((t * 4).astype(int), 3)
        s = t * 4 - side
        corners = np.array([complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                            complex(self.re_max, self.im_max), complex(self.re_min, self.im_max),
                            complex(self.re_min, self.im_min)])
        return corners[side] + s * (corners[side + 1] - corners[side])

    def initial_params(self, per_side: int, rate: float) -> np.ndarray:
        parts = []
        for i, length in enumerate((self.width, self.height, self.width, self.height)):
            m = max(per_side, math.ceil(length * rate))
            parts.append((i + np.arange(m) / m) / 4)
        parts.append(np.array([1.0]))
        return np.concatenate(parts)


@dataclass(frozen=True)
class _Circle:
    center: complex
    radius: float

    def path(self, t):
        return self.center + self.radius * np.exp(2j * math.pi * np.asarray(t, dtype=float))

    def initial_params(self, per_side: int, rate: float) -> np.ndarray:
        m = max(4 * per_side, math.ceil(2 * math.pi * self.radius * rate))
        return np.linspace(0.0, 1.0, m + 1)


@dataclass
class _Trace:
    """Samples of ``f`` along a closed contour (first point repeated at the end)."""

    k: np.ndarray
    f: np.ndarray

    @property
    def log_steps(self) -> np.ndarray:
        ratio = self.f[1:] / self.f[:-1]
        return np.log(np.abs(ratio)) + 1j * np.angle(ratio)

    @property
    def winding(self) -> int:
        return int(round(float(np.sum(self.log_steps.imag)) / (2 * math.pi)))

    def first_moment(self) -> complex:
        """Approximate ``(1/2 pi i) contour-integral k f'/f dk``."""
        mid = 0.5 * (self.k[1:] + self.k[:-1])
        return complex(np.sum(mid * self.log_steps) / (2j * math.pi))


def _phase_rate(r0: float) -> float:
    return 4.0 * (1.0 + 2.0 * r0)


def _trace_contour(f, contour, per_side: int, rate: float, *, max_points: int = 200_000,
                   min_step: float = 1e-13) -> _Trace:
    t = contour.initial_params(per_side, rate)
    vals = f(contour.path(t))
    scale = max(1.0, abs(complex(contour.path(0.0))))
    while True:
        if not np.all(np.isfinite(vals)):
            raise BoundaryTooCloseToZero("matching function is not finite on the contour")
        if np.any(vals == 0):
            raise BoundaryTooCloseToZero("matching function vanishes on the contour")
        ratio = vals[1:] / vals[:-1]
        step = np.abs(np.log(np.abs(ratio)) + 1j * np.angle(ratio))
        bad = np.nonzero(step >= _MAX_PHASE_STEP)[0]
        if bad.size == 0:
            return _Trace(contour.path(t), vals)
        seg = np.abs(contour.path(t[bad + 1]) - contour.path(t[bad]))
        if np.any(seg < min_step * scale) or t.size + bad.size > max_points:
            raise BoundaryTooCloseToZero("a zero lies on or next to the contour")
        t_new = 0.5 * (t[bad] + t[bad + 1])
        v_new = f(contour.path(t_new))
        t = np.insert(t, bad + 1, t_new)
        vals = np.insert(vals, bad + 1, v_new)


def winding_number(p, rect: KRectangle, samples_per_side: int = 64, r0: float | None = None) -> int:
    """Number of zeros of the matching function inside ``rect``, with multiplicity."""
    r = pot.support_radius(p) if r0 is None else float(r0)
    fun = lambda k: matching_function(p, k, r)
    return _trace_contour(fun, rect, samples_per_side, _phase_rate(r)).winding


@dataclass(frozen=True)
class Pole:
    k: complex
    multiplicity: int
    certified: bool

    @property
    def z(self) -> complex:
        return self.k * self.k

    @property
    def kind(self) -> str:
        return "bound_state" if self.k.imag > 0 else "resonance"

    @property
    def sheet_arg(self) -> float:
        """``arg z`` on the continued sheet: twice ``arg k`` taken in ``[-pi/8, 15pi/8)``."""
        a = math.atan2(self.k.imag, self.k.real)
        if a < -math.pi / 8:
            a += 2 * math.pi
        return 2 * a


@dataclass(frozen=True)
class ResonanceSet:
    poles: tuple[Pole, ...]
    search_region: KRectangle
    potential_digest: str
    total_winding: int = 0
    boundary_max_abs_f: float = 0.0
    newton_tol: float = 1e-12

    @property
    def resonances(self) -> tuple[Pole, ...]:
        return tuple(p for p in self.poles if p.kind == "resonance")

    @property
    def bound_states(self) -> tuple[Pole, ...]:
        return tuple(p for p in self.poles if p.kind == "bound_state")


def _newton(fun, k0: complex, tol: float, maxiter: int = 60) -> tuple[complex, bool]:
    k = k0
    for _ in range(maxiter):
        h = 1e-6 * (1 + abs(k))
        d = (fun(k + h) - fun(k - h)) / (2 * h)
        if d == 0 or not np.isfinite(d):
            return k, False
        step = fun(k) / d
        k = k - step
        if not np.isfinite(k):
            return k0, False
        if abs(step) <= tol * (1 + abs(k)):
            return complex(k), True
    return complex(k), False


_SPLIT_FRACTIONS = (0.5, 0.45, 0.55, 0.4, 0.6, 0.35, 0.65, 0.3, 0.7)


def find_resonances(p, rect: KRectangle, newton_tol: float = 1e-12, *,
                    samples_per_side: int = 64, threshold_exclusion_radius: float = 1e-3,
                    min_cell: float = 1e-7, max_depth: int = 60, max_cells: int = 20_000,
                    r0: float | None = None) -> ResonanceSet:
    """Certified zeros of the matching function inside ``rect``.

    The rectangle is bisected until each cell holds at most one zero (by
    winding number); single zeros are polished by Newton's method and
    certified by a winding number of one on a small circle around them.
    """
    if rect.distance_to_origin() < threshold_exclusion_radius:
        raise ConfigError("search rectangle must stay clear of the threshold k = 0")
    r = pot.support_radius(p) if r0 is None else float(r0)
    fun = lambda k: matching_function(p, k, r)
    rate = _phase_rate(r)

    outer = _trace_contour(fun, rect, samples_per_side, rate)
    total = outer.winding
    boundary_max = float(np.max(np.abs(outer.f)))
    poles: list[Pole] = []
    stack = [(rect, total, outer, 0)]
    cells = 0
    while stack:
        cell, m, trace, depth = stack.pop()
        cells += 1
        if cells > max_cells:
            raise BudgetExceeded(f"more than {max_cells} cells examined")
        if m <= 0:
            continue
        if m == 1:
            pole = _polish(fun, cell, trace, newton_tol, samples_per_side, rate,
                           threshold_exclusion_radius)
            if pole is not None:
                poles.append(pole)
                continue
        if max(cell.width, cell.height) <= min_cell * (1 + abs(cell.center)):
            poles.append(Pole(cell.center, m, certified=m > 1))
            continue
        if depth >= max_depth:
            raise BudgetExceeded(f"subdivision depth exceeded {max_depth}")
        for frac in _SPLIT_FRACTIONS:
            try:
                children = [(c, _trace_contour(fun, c, samples_per_side, rate)) for c in cell.split(frac)]
            except BoundaryTooCloseToZero:
                continue
            if sum(tr.winding for _, tr in children) == m:
                break
        else:
            raise BudgetExceeded(f"could not split cell {cell} cleanly")
        for c, tr in children:
            stack.append((c, tr.winding, tr, depth + 1))

    order = spectral_order([pl.z for pl in poles])
    return ResonanceSet(
        poles=tuple(poles[i] for i in order),
        search_region=rect,
        potential_digest=pot.digest(p),
        total_winding=total,
        boundary_max_abs_f=boundary_max,
        newton_tol=newton_tol,
    )


def _polish(fun, cell, trace, tol, per_side, rate, exclusion) -> Pole | None:
    guess = trace.first_moment()
    if not cell.contains(guess):
        guess = cell.center
    k, ok = _newton(fun, guess, tol)
    if not ok or not cell.contains(k, pad=1e-9 * (1 + abs(k))):
        k, ok = _newton(fun, cell.center, tol)
        if not ok or not cell.contains(k, pad=1e-9 * (1 + abs(k))):
            return None
    if abs(k) <= exclusion:
        return None
    radius = max(1e-6, 100 * tol) * (1 + abs(k))
    try:
        certified = _trace_contour(fun, _Circle(k, radius), per_side // 4 or 1, rate).winding == 1
    except BoundaryTooCloseToZero:
        certified = False
    return Pole(k, 1, certified)
