"""Dense non-Hermitian eigenvalues, pollution filtering and resolvent norms."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

from .errors import ConfigError, NoConvergence
from .oscillator_basis import CapConfig, assemble_cap_matrix
from .potentials import Potential

DEFAULT_RESIDUAL_TOL = 1e-8
DEFAULT_MATCH_TOL = 1e-6
ARG_FLOOR = -math.pi / 4
ARG_CEIL = 7 * math.pi / 4


def spectral_order(z) -> np.ndarray:
    """Indices sorting ``z`` by imaginary part descending, then real part ascending."""
    z = np.asarray(z, dtype=complex)
    return np.lexsort((z.real, -z.imag))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues with residuals; ``stable`` is ``None`` until the N-refinement filter ran."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    stable: np.ndarray | None = None
    config_digest: str = ""

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=complex).reshape(-1)
        res = np.asarray(self.residuals, dtype=float).reshape(-1)
        if ev.shape != res.shape:
            raise ValueError("eigenvalues and residuals differ in length")
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "residuals", res)
        if self.stable is not None:
            st = np.asarray(self.stable, dtype=bool).reshape(-1)
            if st.shape != ev.shape:
                raise ValueError("stable flags differ in length")
            object.__setattr__(self, "stable", st)

    def __len__(self):
        return self.eigenvalues.size

    def subset(self, mask) -> "Spectrum":
        mask = np.asarray(mask, dtype=bool)
        return replace(
            self,
            eigenvalues=self.eigenvalues[mask],
            residuals=self.residuals[mask],
            stable=None if self.stable is None else self.stable[mask],
        )

    def stable_only(self) -> "Spectrum":
        if self.stable is None:
            raise ValueError("spectrum has no stability flags")
        return self.subset(self.stable)

    def conjugate(self) -> "Spectrum":
        ev = np.conj(self.eigenvalues)
        order = spectral_order(ev)
        return replace(
            self,
            eigenvalues=ev[order],
            residuals=self.residuals[order],
            stable=None if self.stable is None else self.stable[order],
        )

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        same_flags = (self.stable is None and other.stable is None) or (
            self.stable is not None and other.stable is not None
            and np.array_equal(self.stable, other.stable))
        return (np.array_equal(self.eigenvalues, other.eigenvalues)
                and np.array_equal(self.residuals, other.residuals)
                and same_flags and self.config_digest == other.config_digest)


def continuous_arg(z) -> np.ndarray:
    """Argument of ``z`` taken in ``[-pi/4, 7pi/4)``."""
    a = np.angle(np.asarray(z, dtype=complex))
    return np.where(a < ARG_FLOOR, a + 2 * math.pi, a)


@dataclass(frozen=True)
class SectorWindow:
    """Open sector in ``arg z`` intersected with a closed annulus in ``|z|``."""

    arg_min: float = ARG_FLOOR + 0.05
    arg_max: float = math.pi
    radius_min: float = 0.05
    radius_max: float = 30.0

    def __post_init__(self):
        if not ARG_FLOOR <= self.arg_min < self.arg_max <= ARG_CEIL:
            raise ConfigError(
                f"window needs -pi/4 <= arg_min < arg_max <= 7pi/4, got ({self.arg_min}, {self.arg_max})")
        if not 0 < self.radius_min <= self.radius_max:
            raise ConfigError("window radii must be positive and ordered")

    def contains(self, z, arg=None) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        a = continuous_arg(z) if arg is None else np.asarray(arg)
        r = np.abs(z)
        return ((a > self.arg_min) & (a < self.arg_max)
                & (r >= self.radius_min) & (r <= self.radius_max))


def eig_dense(matrix) -> Spectrum:
    """All eigenvalues of a dense square matrix, with explicit residuals.

    Residuals are ``||A v - lambda v|| / ||A||_F`` for unit right eigenvectors.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"need a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    try:
        w, v = sla.eig(a, check_finite=False)
    except (sla.LinAlgError, ValueError) as exc:
        raise NoConvergence(f"dense eigensolver failed: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise NoConvergence("dense eigensolver returned non-finite values")
    v = v / np.linalg.norm(v, axis=0)
    fro = np.linalg.norm(a)
    res = np.linalg.norm(a @ v - v * w, axis=0)
    if fro > 0:
        res = res / fro
    order = spectral_order(w)
    return Spectrum(w[order], res[order])


def cap_spectrum(p: Potential, cfg: CapConfig) -> Spectrum:
    """Eigenvalues of ``P_eps`` from the Galerkin matrix, unfiltered."""
    gm = assemble_cap_matrix(p, cfg)
    spec = eig_dense(gm.entries)
    return replace(spec, eigenvalues=gm.scale_factor * spec.eigenvalues,
                   config_digest=f"{gm.potential_digest}|{cfg.digest()}")


def stability_filter(p: Potential, cfg: CapConfig, growth: float = 1.5,
                     match_tol: float = DEFAULT_MATCH_TOL,
                     residual_tol: float = DEFAULT_RESIDUAL_TOL) -> Spectrum:
    """Spectrum at ``N`` with eigenvalues flagged stable when they persist at ``ceil(growth N)``.

    An eigenvalue is stable if the larger basis has an eigenvalue within
    ``match_tol`` and its own residual is at most ``residual_tol``.
    """
    if not growth > 1:
        raise ConfigError("growth must exceed 1")
    if not match_tol > 0:
        raise ConfigError("match_tol must be positive")
    base = cap_spectrum(p, cfg)
    refined = cap_spectrum(p, cfg.with_size(math.ceil(growth * cfg.basis_size)))
    if len(base) == 0:
        return replace(base, stable=np.zeros(0, dtype=bool))
    dist = np.abs(base.eigenvalues[:, None] - refined.eigenvalues[None, :]).min(axis=1)
    stable = (dist <= match_tol) & (base.residuals <= residual_tol)
    return replace(base, stable=stable)


def filter_sector(s: Spectrum, w: SectorWindow) -> Spectrum:
    return s.subset(w.contains(s.eigenvalues))


def resolvent_norm(matrix, z: complex) -> float:
    """``1 / sigma_min(A - z I)``; ``inf`` when ``z`` is numerically an eigenvalue."""
    a = np.asarray(matrix, dtype=complex)
    n = a.shape[0]
    sv = sla.svdvals(a - z * np.eye(n), check_finite=False)
    smin, smax = sv[-1], sv[0]
    if smin <= n * np.finfo(float).eps * smax:
        return math.inf
    return float(1.0 / smin)
