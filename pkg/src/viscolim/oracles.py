"""Closed-form spectra used as ground truth.

* Davies oscillator ``-Delta + e^{-i gamma} eps x^2`` in ``n`` dimensions:
  eigenvalues ``e^{-i gamma/2} sqrt(eps) (n + 2|k|)``.
* Quadratic potentials ``sum lam_j^2 x_j^2 - sum mu_l^2 x_{r+l}^2``: the
  resonances ``sum lam_j (2k_j+1) - i sum mu_l (2k_{r+l}+1)`` and the
  eigenvalues of the regularized operator for ``eps > 0``.

Multiplicities are returned as repeated entries.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class MultiIndexBox:
    """All ``k`` in ``N_0^n`` with ``|k| <= max_level``."""

    n: int
    max_level: int

    def __post_init__(self):
        if self.n < 1 or self.max_level < 0:
            raise ConfigError("need n >= 1 and max_level >= 0")

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        for level in range(self.max_level + 1):
            yield from indices_of_weight(self.n, level)

    def __len__(self):
        return math.comb(self.max_level + self.n, self.n)


def indices_of_weight(n: int, m: int) -> Iterator[tuple[int, ...]]:
    """Multi-indices of length ``n`` summing to ``m``, in lexicographically decreasing order."""
    # stars and bars: choose positions of the n-1 bars among m+n-1 slots
    for bars in itertools.combinations(range(m + n - 1), n - 1):
        edges = (-1,) + bars + (m + n - 1,)
        yield tuple(edges[i + 1] - edges[i] - 1 for i in range(n))


def level_multiplicity(n: int, m: int) -> int:
    return math.comb(m + n - 1, n - 1)


def davies_spectrum(epsilon: float, gamma: float, box: MultiIndexBox) -> np.ndarray:
    if not epsilon > 0:
        raise ConfigError("epsilon must be positive")
    if not 0 <= gamma < math.pi:
        raise ConfigError("gamma must lie in [0, pi)")
    unit = cmath.exp(-0.5j * gamma) * math.sqrt(epsilon)
    return np.array([unit * (box.n + 2 * sum(k)) for k in box], dtype=complex)


def _check_frequencies(lambdas, mus, box):
    lambdas = [float(v) for v in lambdas]
    mus = [float(v) for v in mus]
    if any(v <= 0 for v in lambdas + mus):
        raise ConfigError("frequencies must be positive")
    if len(lambdas) + len(mus) != box.n:
        raise ConfigError(f"{len(lambdas)} + {len(mus)} frequencies for dimension {box.n}")
    return lambdas, mus


def _lattice(lambdas: Sequence[complex], mus: Sequence[complex], box: MultiIndexBox) -> np.ndarray:
    r = len(lambdas)
    out = []
    for k in box:
        val = sum(lam * (2 * kj + 1) for lam, kj in zip(lambdas, k[:r]))
        val -= 1j * sum(mu * (2 * kj + 1) for mu, kj in zip(mus, k[r:]))
        out.append(val)
    return np.array(out, dtype=complex)


def quadratic_resonances(lambdas, mus, box: MultiIndexBox) -> np.ndarray:
    lambdas, mus = _check_frequencies(lambdas, mus, box)
    return _lattice(lambdas, mus, box)


def quadratic_cap_eigenvalues(lambdas, mus, epsilon: float, box: MultiIndexBox) -> np.ndarray:
    """Eigenvalues of ``-Delta + V - i eps x^2`` for quadratic ``V``, ``eps > 0``.

    Each confining direction contributes ``(lam^2 - i eps)^{1/2} (2k+1)``
    and each inverted one ``-i (mu^2 + i eps)^{1/2} (2k+1)``; in both cases
    the factor squares to the coefficient of ``x^2`` and has positive real
    part, which is what makes the Gaussian eigenfunctions decay. Principal
    square roots throughout.
    """
    lambdas, mus = _check_frequencies(lambdas, mus, box)
    if not epsilon > 0:
        raise ConfigError("epsilon must be positive")
    lam_eff = [cmath.sqrt(lam * lam - 1j * epsilon) for lam in lambdas]
    mu_eff = [cmath.sqrt(mu * mu + 1j * epsilon) for mu in mus]
    return _lattice(lam_eff, mu_eff, box)
