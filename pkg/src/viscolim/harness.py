"""Experiment drivers: epsilon sweeps, matching, symmetry and pseudospectrum runs."""
from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .eigensolver import (DEFAULT_MATCH_TOL, DEFAULT_RESIDUAL_TOL, SectorWindow, Spectrum,
                          filter_sector, resolvent_norm, spectral_order,
                          stability_filter)
from .errors import ConfigError, ViscolimError
from .oscillator_basis import CapConfig, davies_matrix
from .potentials import AnalyticPotential, Potential
from .resonance_direct import KRectangle, find_resonances

THREADS_ENV = "VISCOLIM_THREADS"


@dataclass(frozen=True)
class Target:
    """A reference point ``z`` (usually a resonance) with its multiplicity."""

    z: complex
    multiplicity: int = 1
    certified: bool = True
    source: str = "direct"


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of an epsilon sweep.

    ``physical_scale`` fixes the basis width in the original variable: when
    set, the basis dilation at each epsilon is ``physical_scale * |eps|**-0.25``
    and ``basis_scale`` is ignored. ``resonances`` replaces the direct solver
    with externally known targets.
    """

    potential: Potential
    epsilons: tuple[float, ...]
    alpha: float = 0.0
    basis_size: int = 128
    window: SectorWindow = field(default_factory=SectorWindow)
    match_radius: float = 0.1
    output_dir: str = "out"
    basis_scale: float = 1.0
    physical_scale: float | None = None
    quadrature_order: int | None = None
    growth: float = 1.5
    stability_tol: float = DEFAULT_MATCH_TOL
    residual_tol: float = DEFAULT_RESIDUAL_TOL
    search_rect: KRectangle | None = None
    newton_tol: float = 1e-12
    resonances: tuple[Target, ...] | None = None
    final_error_tolerance: float | None = None

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps:
            raise ConfigError("need at least one epsilon")
        if any(e == 0 or not math.isfinite(e) for e in eps):
            raise ConfigError("epsilons must be finite and nonzero")
        if any(abs(a) < abs(b) for a, b in zip(eps, eps[1:])):
            raise ConfigError("epsilons must be sorted by |eps| descending")
        object.__setattr__(self, "epsilons", eps)
        if not self.match_radius > 0:
            raise ConfigError("match_radius must be positive")
        if self.physical_scale is not None and not self.physical_scale > 0:
            raise ConfigError("physical_scale must be positive")
        if self.resonances is not None:
            object.__setattr__(self, "resonances", tuple(self.resonances))
        for e in eps:
            self.cap_config(e)

    def cap_config(self, epsilon: float) -> CapConfig:
        s = self.basis_scale if self.physical_scale is None else self.physical_scale * abs(epsilon) ** -0.25
        return CapConfig(epsilon=epsilon, alpha=self.alpha, basis_size=self.basis_size,
                         quadrature_order=self.quadrature_order, basis_scale=s)


@dataclass(frozen=True)
class MatchedPair:
    eigenvalue: complex
    resonance: complex
    abs_error: float
    resonance_index: int


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int, float], ...]
    unmatched_eigenvalues: tuple[int, ...]
    unmatched_resonances: tuple[int, ...]


def match_spectra(eigs: Sequence[complex], resonances: Sequence[tuple[complex, int]],
                  radius: float) -> Matching:
    """Optimal assignment of eigenvalues to resonances within ``radius``.

    A resonance of multiplicity ``m`` can take up to ``m`` eigenvalues. Among
    all assignments the number of pairs is maximized first and the total
    distance second. Pairs are ``(eigenvalue index, resonance index, distance)``.
    """
    if not radius > 0:
        raise ConfigError("radius must be positive")
    eigs = np.asarray(eigs, dtype=complex).reshape(-1)
    slots = [i for i, (_, m) in enumerate(resonances) for _ in range(int(m))]
    zs = np.array([complex(resonances[i][0]) for i in slots], dtype=complex)
    pairs = []
    if eigs.size and zs.size:
        dist = np.abs(eigs[:, None] - zs[None, :])
        # every forbidden pair costs more than any feasible full assignment
        big = radius * (min(dist.shape) + 1) + 1
        rows, cols = linear_sum_assignment(np.where(dist <= radius, dist, big))
        pairs = [(int(r), slots[c], abs(complex(eigs[r]) - complex(zs[c])))
                 for r, c in zip(rows, cols) if dist[r, c] <= radius]
    pairs.sort()
    hit_e = {p[0] for p in pairs}
    hit_r = {p[1] for p in pairs}
    return Matching(
        pairs=tuple(pairs),
        unmatched_eigenvalues=tuple(i for i in range(eigs.size) if i not in hit_e),
        unmatched_resonances=tuple(i for i in range(len(resonances)) if i not in hit_r),
    )


@dataclass(frozen=True)
class DiskCount:
    resonance_index: int
    resonance: complex
    epsilon: float
    delta: float
    count: int
    expected: int


@dataclass(frozen=True)
class EpsilonResult:
    """Outcome at one epsilon. Eigenvalues for negative epsilon are stored conjugated."""

    epsilon: float
    basis_scale: float
    spectrum: Spectrum | None
    windowed: tuple[complex, ...] = ()
    pairs: tuple[MatchedPair, ...] = ()
    unmatched_eigenvalues: tuple[complex, ...] = ()
    unmatched_resonances: tuple[int, ...] = ()
    failure: str | None = None


@dataclass(frozen=True)
class ConvergenceReport:
    config: SweepConfig
    targets: tuple[Target, ...]
    results: tuple[EpsilonResult, ...]
    disk_counts: tuple[DiskCount, ...] = ()

    def error_sequence(self, index: int) -> list[float | None]:
        out = []
        for r in self.results:
            errs = [p.abs_error for p in r.pairs if p.resonance_index == index]
            out.append(min(errs) if errs else None)
        return out

    @property
    def error_sequences(self) -> dict[int, list[float | None]]:
        return {i: self.error_sequence(i) for i in range(len(self.targets))}

    def strictly_decreasing(self, index: int) -> bool:
        seq = self.error_sequence(index)
        return all(e is not None for e in seq) and all(a > b for a, b in zip(seq, seq[1:]))

    @property
    def failed(self) -> bool:
        return any(r.failure is not None for r in self.results)


def _thread_count(n_tasks: int) -> int:
    raw = os.environ.get(THREADS_ENV)
    cap = os.cpu_count() or 1
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, min(cap, n_tasks))


def default_search_rect(window: SectorWindow, clearance: float = 1e-3) -> KRectangle:
    """Rectangle in the lower ``k`` half plane covering the resonance part of ``window``.

    Zeros with ``Im k > 0`` of a real potential are bound states on the
    imaginary axis, which sit on ``arg z = pi`` and are outside open windows
    ending at ``pi``; they are not searched for here.
    """
    lo = max(window.arg_min, -math.pi / 4) / 2
    if lo >= 0:
        raise ConfigError("window contains no resonances (arg_min >= 0)")
    r_in, r_out = math.sqrt(window.radius_min), math.sqrt(window.radius_max)
    re_min = r_in * math.cos(lo)
    return KRectangle(re_min, r_out, -r_out * math.sin(-lo), -clearance)


def sweep_targets(cfg: SweepConfig) -> tuple[Target, ...]:
    if cfg.resonances is not None:
        ts = cfg.resonances
    else:
        rect = cfg.search_rect or default_search_rect(cfg.window)
        rs = find_resonances(cfg.potential, rect, cfg.newton_tol)
        ts = tuple(Target(p.z, p.multiplicity, p.certified) for p in rs.poles
                   if cfg.window.contains([p.z], arg=[p.sheet_arg])[0])
    order = spectral_order([t.z for t in ts])
    return tuple(ts[i] for i in order)


def _run_one(cfg: SweepConfig, epsilon: float, targets: tuple[Target, ...]) -> EpsilonResult:
    cap = cfg.cap_config(epsilon)
    try:
        spec = stability_filter(cfg.potential, cap, cfg.growth, cfg.stability_tol, cfg.residual_tol)
    except ViscolimError as exc:
        return EpsilonResult(epsilon, cap.basis_scale, None, failure=f"{type(exc).__name__}: {exc}")
    if epsilon < 0:
        spec = spec.conjugate()
    win = filter_sector(spec.stable_only(), cfg.window).eigenvalues
    m = match_spectra(win, [(t.z, t.multiplicity) for t in targets], cfg.match_radius)
    pairs = tuple(MatchedPair(complex(win[i]), targets[j].z, d, j) for i, j, d in m.pairs)
    return EpsilonResult(
        epsilon=epsilon,
        basis_scale=cap.basis_scale,
        spectrum=spec,
        windowed=tuple(complex(z) for z in win),
        pairs=pairs,
        unmatched_eigenvalues=tuple(complex(win[i]) for i in m.unmatched_eigenvalues),
        unmatched_resonances=m.unmatched_resonances,
    )


def disk_count(spec: Spectrum, z: complex, delta: float) -> int:
    ev = spec.stable_only().eigenvalues
    return int(np.count_nonzero(np.abs(ev - z) < delta))


def run_sweep(cfg: SweepConfig) -> ConvergenceReport:
    """Resonances once, then per epsilon: assemble, solve, filter, match.

    Epsilon tasks run on a thread pool (size capped by ``VISCOLIM_THREADS``);
    results are ordered as in ``cfg.epsilons``. A failure at one epsilon is
    recorded in its result and does not abort the others.
    """
    targets = sweep_targets(cfg)
    with ThreadPoolExecutor(max_workers=_thread_count(len(cfg.epsilons))) as pool:
        results = tuple(pool.map(lambda e: _run_one(cfg, e, targets), cfg.epsilons))
    counts = []
    for r in results:
        if r.spectrum is None:
            continue
        for j, t in enumerate(targets):
            counts.append(DiskCount(j, t.z, r.epsilon, cfg.match_radius,
                                    disk_count(r.spectrum, t.z, cfg.match_radius), t.multiplicity))
    return ConvergenceReport(cfg, targets, results, tuple(counts))


@dataclass(frozen=True)
class ConjugationReport:
    epsilon: float
    distance: float
    plus: tuple[complex, ...]
    minus: tuple[complex, ...]


def _hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return math.inf
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def conjugation_check(p: Potential, epsilon: float, cfg: CapConfig, window: SectorWindow | None = None,
                      growth: float = 1.5, match_tol: float = DEFAULT_MATCH_TOL,
                      residual_tol: float = DEFAULT_RESIDUAL_TOL) -> ConjugationReport:
    """Hausdorff distance between the spectrum at ``-eps`` and the conjugated spectrum at ``+eps``.

    Only stable eigenvalues are compared: those of ``+eps`` inside ``window``
    and those of ``-eps`` inside the mirrored window.
    """
    window = window or SectorWindow()
    eps = abs(float(epsilon))
    plus = stability_filter(p, replace(cfg, epsilon=eps), growth, match_tol, residual_tol).stable_only()
    minus = stability_filter(p, replace(cfg, epsilon=-eps), growth, match_tol, residual_tol).stable_only()
    zp = plus.eigenvalues[window.contains(plus.eigenvalues)]
    zm = minus.eigenvalues[window.contains(np.conj(minus.eigenvalues))]
    zm = zm[spectral_order(zm)]
    return ConjugationReport(eps, _hausdorff(zm, np.conj(zp)),
                             tuple(complex(z) for z in zp), tuple(complex(z) for z in zm))


@dataclass(frozen=True)
class ZGrid:
    """Rectangular grid of spectral parameters, plus optional extra points."""

    re_min: float = 0.0
    re_max: float = 0.0
    im_min: float = 0.0
    im_max: float = 0.0
    n_re: int = 0
    n_im: int = 0
    extra: tuple[complex, ...] = ()

    def points(self) -> np.ndarray:
        pts = []
        if self.n_re > 0 and self.n_im > 0:
            re = np.linspace(self.re_min, self.re_max, self.n_re)
            im = np.linspace(self.im_min, self.im_max, self.n_im)
            pts.extend((x + 1j * y) for y in im for x in re)
        pts.extend(complex(z) for z in self.extra)
        if not pts:
            raise ConfigError("empty z grid")
        return np.array(pts, dtype=complex)


def region_label(z: complex, gamma: float, margin: float) -> str:
    """Where ``z`` sits relative to the rays ``arg z = 0`` and ``arg z = -gamma``.

    ``"ray"`` within ``margin`` (in angle) of the eigenvalue ray ``-gamma/2``,
    ``"between"`` strictly between the rays otherwise, ``"outside"`` elsewhere.
    """
    if z == 0:
        return "outside"
    a = cmath.phase(z)
    if abs(a + gamma / 2) < margin:
        return "ray"
    return "between" if -gamma < a < 0 else "outside"


@dataclass(frozen=True, eq=False)
class PseudospectrumTable:
    epsilons: tuple[float, ...]
    gamma: float
    basis_size: int
    points: tuple[complex, ...]
    regions: tuple[str, ...]
    norms: np.ndarray  # (len(epsilons), len(points)); inf where z is an eigenvalue

    def __eq__(self, other):
        if not isinstance(other, PseudospectrumTable):
            return NotImplemented
        return ((self.epsilons, self.gamma, self.basis_size, self.points, self.regions)
                == (other.epsilons, other.gamma, other.basis_size, other.points, other.regions)
                and np.array_equal(self.norms, other.norms))

    @property
    def growth_ratios(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.norms[1:] / self.norms[:-1]


def pseudospectrum_scan(epsilons: Sequence[float], gamma: float, grid: ZGrid | Sequence[complex],
                        basis_size: int, basis_scale: float = 1.0, ray_margin: float = 0.05) -> PseudospectrumTable:
    """Resolvent norms of the ``V = 0`` operator ``D^2 + e^{-i gamma} eps x^2`` on a grid."""
    eps = tuple(float(e) for e in epsilons)
    if not eps or any(not e > 0 for e in eps):
        raise ConfigError("pseudospectrum epsilons must be positive")
    pts = grid.points() if isinstance(grid, ZGrid) else np.asarray(grid, dtype=complex).reshape(-1)

    def row(e):
        m = davies_matrix(e, gamma, basis_size, basis_scale)
        return [resolvent_norm(m, z) for z in pts]

    with ThreadPoolExecutor(max_workers=_thread_count(len(eps))) as pool:
        norms = np.array(list(pool.map(row, eps)), dtype=float)
    return PseudospectrumTable(eps, float(gamma), int(basis_size), tuple(complex(z) for z in pts),
                               tuple(region_label(z, gamma, ray_margin) for z in pts), norms)


@dataclass(frozen=True)
class Example4Result:
    """Stable, sector-filtered spectra of the sin(x)/x potential. No reference values exist."""

    epsilons: tuple[float, ...]
    spectra: tuple[Spectrum, ...]
    basis_size: int
    exploratory: bool = True


def example4_sweep(epsilons: Sequence[float], basis_size: int, *, alpha: float = 0.0,
                   window: SectorWindow | None = None, basis_scale: float = 1.0,
                   growth: float = 1.5, match_tol: float = DEFAULT_MATCH_TOL,
                   residual_tol: float = DEFAULT_RESIDUAL_TOL) -> Example4Result:
    window = window or SectorWindow()
    p = AnalyticPotential.sinc()
    eps = tuple(float(e) for e in epsilons)

    def one(e):
        cfg = CapConfig(epsilon=e, alpha=alpha, basis_size=basis_size, basis_scale=basis_scale)
        spec = stability_filter(p, cfg, growth, match_tol, residual_tol)
        return filter_sector(spec.stable_only(), window)

    with ThreadPoolExecutor(max_workers=_thread_count(len(eps))) as pool:
        spectra = tuple(pool.map(one, eps))
    return Example4Result(eps, spectra, int(basis_size))
