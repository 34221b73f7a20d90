"""Galerkin matrices of the regularized operator in the Hermite-function basis.

For ``eta = |epsilon|`` the substitution ``y = eta**(1/4) x`` turns

    P_eps = D^2 + V - i epsilon e^{-i alpha} x^2

into ``eta**(1/2) * A`` with

    A = D^2 - i sign(epsilon) e^{-i alpha} y^2 + eta**(-1/2) V(eta**(-1/4) y),

so the eigenvalues of ``P_eps`` are ``eta**(1/2)`` times those of ``A``.
``A`` is expanded in ``sqrt(s) h_k(s y)``, where ``h_k`` are the normalized
Hermite functions and ``s`` is an optional basis dilation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_hermite

from . import potentials as pot
from .errors import ConfigError, QuadratureOrderTooLow
from .potentials import AnalyticKind, PiecewiseConstantPotential, Potential

_RESCALE = 1e150


@dataclass(frozen=True)
class CapConfig:
    """Discretization and regularization parameters.

    ``quadrature_order`` defaults to ``2 * basis_size``.
    """

    epsilon: float
    alpha: float = 0.0
    basis_size: int = 128
    quadrature_order: int | None = None
    basis_scale: float = 1.0

    def __post_init__(self):
        eps = float(self.epsilon)
        if eps == 0.0 or not math.isfinite(eps):
            raise ConfigError(f"epsilon must be finite and nonzero, got {self.epsilon!r}")
        if not 0.0 <= self.alpha < math.pi:
            raise ConfigError(f"alpha must lie in [0, pi), got {self.alpha!r}")
        n = int(self.basis_size)
        if n != self.basis_size or n < 2:
            raise ConfigError(f"basis_size must be an integer >= 2, got {self.basis_size!r}")
        q = 2 * n if self.quadrature_order is None else int(self.quadrature_order)
        if q < 2 * n:
            raise QuadratureOrderTooLow(f"quadrature_order {q} < 2 * basis_size = {2 * n}")
        if not (self.basis_scale > 0 and math.isfinite(self.basis_scale)):
            raise ConfigError(f"basis_scale must be positive, got {self.basis_scale!r}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "basis_size", n)
        object.__setattr__(self, "quadrature_order", q)
        object.__setattr__(self, "basis_scale", float(self.basis_scale))

    def with_size(self, n: int) -> "CapConfig":
        """Same parameters at basis size ``n``, quadrature raised if needed."""
        return CapConfig(
            epsilon=self.epsilon,
            alpha=self.alpha,
            basis_size=n,
            quadrature_order=max(self.quadrature_order, 2 * n),
            basis_scale=self.basis_scale,
        )

    def digest(self) -> str:
        return f"eps={self.epsilon!r};alpha={self.alpha!r};N={self.basis_size};q={self.quadrature_order};s={self.basis_scale!r}"


@dataclass(frozen=True, eq=False)
class GalerkinMatrix:
    entries: np.ndarray
    scale_factor: float
    config: CapConfig
    potential_digest: str = field(default="")

    @property
    def physical(self) -> np.ndarray:
        """Matrix of ``P_eps`` itself, i.e. ``scale_factor * entries``."""
        return self.scale_factor * self.entries


def hermite_functions(points, n: int) -> np.ndarray:
    """Normalized Hermite functions ``h_k(x)``, ``k < n``, as an ``n x len(points)`` array.

    Uses the three-term recurrence with running rescaling so that large
    ``|x|`` neither underflows the Gaussian factor nor overflows the
    polynomial part.
    """
    if n < 1:
        raise ConfigError("need at least one Hermite function")
    x = np.atleast_1d(np.asarray(points, dtype=float))
    out = np.empty((n, x.size))
    log_scale = -0.5 * x * x
    prev = np.zeros_like(x)
    cur = np.full_like(x, np.pi**-0.25)
    out[0] = _combine(cur, log_scale)
    for k in range(n - 1):
        nxt = math.sqrt(2.0 / (k + 1)) * x * cur - math.sqrt(k / (k + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if big.any():
            cur[big] /= _RESCALE
            prev[big] /= _RESCALE
            log_scale[big] += math.log(_RESCALE)
        out[k + 1] = _combine(cur, log_scale)
    return out


def _combine(mantissa, log_scale):
    with np.errstate(divide="ignore"):
        return np.sign(mantissa) * np.exp(np.log(np.abs(mantissa)) + log_scale)


def _ladder(n: int, sign: float) -> np.ndarray:
    k = np.arange(n)
    m = np.diag(k + 0.5)
    off = sign * np.sqrt((k[:-2] + 1.0) * (k[:-2] + 2.0)) / 2.0
    m[k[:-2], k[:-2] + 2] = off
    m[k[:-2] + 2, k[:-2]] = off
    return m


def matrix_x2(n: int) -> np.ndarray:
    """``<h_j, x^2 h_k>``."""
    if n < 2:
        raise ConfigError("basis size must be >= 2")
    return _ladder(n, 1.0)


def matrix_d2(n: int) -> np.ndarray:
    """``<h_j, -h_k''>``."""
    if n < 2:
        raise ConfigError("basis size must be >= 2")
    return _ladder(n, -1.0)


def gauss_hermite_function_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for integrals ``int f(x) dx`` with ``f = exp(-x^2) * poly``.

    The weights already include the ``exp(x^2)`` factor; they are computed
    from the Christoffel function ``1 / sum_k h_k(x_i)^2`` so they stay
    finite for large orders.
    """
    nodes, _ = roots_hermite(order)
    h = hermite_functions(nodes, order)
    return nodes, 1.0 / np.einsum("ki,ki->i", h, h)


def potential_matrix(p: Potential, n: int, quadrature_order: int, dilation: float) -> np.ndarray:
    """``<h_j, V(dilation * x) h_k>`` for ``j, k < n``."""
    if not dilation > 0:
        raise ConfigError(f"dilation must be positive, got {dilation!r}")
    if isinstance(p, PiecewiseConstantPotential):
        if quadrature_order < 2 * n:
            raise QuadratureOrderTooLow(
                f"quadrature_order {quadrature_order} < 2 * basis_size = {2 * n}")
        m = np.zeros((n, n))
        if not p.pieces:
            return m
        nodes, weights = np.polynomial.legendre.leggauss(quadrature_order)
        for a, b, v in p.pieces:
            lo, hi = a / dilation, b / dilation
            half = 0.5 * (hi - lo)
            h = hermite_functions(half * nodes + 0.5 * (hi + lo), n)
            m += v * (h * (half * weights)) @ h.T
        return 0.5 * (m + m.T)
    if p.kind is AnalyticKind.ZERO:
        return np.zeros((n, n))
    if p.kind is AnalyticKind.QUADRATIC:
        return p.coeff * dilation**2 * matrix_x2(n)
    nodes, weights = gauss_hermite_function_rule(max(quadrature_order, n))
    h = hermite_functions(nodes, n)
    m = (h * (weights * pot.evaluate(p, dilation * nodes))) @ h.T
    return 0.5 * (m + m.T)


def assemble_cap_matrix(p: Potential, cfg: CapConfig) -> GalerkinMatrix:
    """Rescaled CAP operator ``A`` with ``scale_factor * eig(A) ~ eig(P_eps)``."""
    n, s = cfg.basis_size, cfg.basis_scale
    eta = abs(cfg.epsilon)
    cap = -1j * math.copysign(1.0, cfg.epsilon) * np.exp(-1j * cfg.alpha)
    entries = (s * s) * matrix_d2(n) + (cap / (s * s)) * matrix_x2(n)
    vmat = potential_matrix(p, n, cfg.quadrature_order, eta**-0.25 / s)
    entries = entries + eta**-0.5 * vmat
    return GalerkinMatrix(entries, math.sqrt(eta), cfg, pot.digest(p))


def davies_matrix(epsilon: float, gamma: float, n: int, basis_scale: float = 1.0) -> np.ndarray:
    """Matrix of ``D^2 + e^{-i gamma} epsilon x^2`` (unscaled, i.e. the operator itself)."""
    if not epsilon > 0:
        raise ConfigError("Davies oscillator needs epsilon > 0")
    if not 0.0 <= gamma < math.pi:
        raise ConfigError(f"gamma must lie in [0, pi), got {gamma!r}")
    s = basis_scale
    a = (s * s) * matrix_d2(n) + (np.exp(-1j * gamma) / (s * s)) * matrix_x2(n)
    return math.sqrt(epsilon) * a
