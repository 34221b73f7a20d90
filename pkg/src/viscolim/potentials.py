"""Potentials V for the operator -d^2/dx^2 + V on the line.

Two families are supported:

* :class:`PiecewiseConstantPotential` -- compactly supported step potentials,
  usable by both the Galerkin assembler and the transfer-matrix solver.
* :class:`AnalyticPotential` -- closed forms (zero, quadratic, sin(x)/x) used
  for oracle checks and exploratory runs.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError, NonCompactSupport


@dataclass(frozen=True)
class PiecewiseConstantPotential:
    """Value ``v`` on each half-open interval ``[a, b)``; zero elsewhere.

    ``pieces`` is a tuple of ``(a, b, v)`` triples, sorted and non-overlapping.
    """

    pieces: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        cleaned = []
        for piece in self.pieces:
            if len(piece) != 3:
                raise ConfigError(f"piece must be (a, b, v), got {piece!r}")
            a, b, v = (_real(c, "piece entry") for c in piece)
            if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(v)):
                raise ConfigError(f"non-finite piece {piece!r}")
            if not a < b:
                raise ConfigError(f"piece needs a < b, got {piece!r}")
            cleaned.append((a, b, v))
        for (_, b0, _), (a1, _, _) in zip(cleaned, cleaned[1:]):
            if a1 < b0:
                raise ConfigError("pieces must be sorted and non-overlapping")
        object.__setattr__(self, "pieces", tuple(cleaned))

    @property
    def is_compact(self) -> bool:
        return True


class AnalyticKind(enum.Enum):
    ZERO = "zero"
    QUADRATIC = "quadratic"
    SINC = "sinc"


@dataclass(frozen=True)
class AnalyticPotential:
    """Closed-form potential: ``0``, ``coeff * x**2`` or ``sin(x) / x``."""

    kind: AnalyticKind
    coeff: float = 0.0

    def __post_init__(self):
        kind = AnalyticKind(self.kind)
        object.__setattr__(self, "kind", kind)
        coeff = _real(self.coeff, "coeff")
        if kind is AnalyticKind.QUADRATIC and (coeff == 0.0 or not math.isfinite(coeff)):
            raise ConfigError("quadratic coefficient must be finite and nonzero")
        object.__setattr__(self, "coeff", coeff)

    @classmethod
    def zero(cls) -> "AnalyticPotential":
        return cls(AnalyticKind.ZERO)

    @classmethod
    def quadratic(cls, coeff: float) -> "AnalyticPotential":
        return cls(AnalyticKind.QUADRATIC, coeff)

    @classmethod
    def sinc(cls) -> "AnalyticPotential":
        return cls(AnalyticKind.SINC)

    @property
    def is_compact(self) -> bool:
        return self.kind is AnalyticKind.ZERO


Potential = Union[PiecewiseConstantPotential, AnalyticPotential]


def _real(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise ConfigError(f"{what} must be a real number, got {value!r}")
    return float(value)


def evaluate(p: Potential, x):
    """V(x); works on scalars and arrays."""
    x_arr = np.asarray(x, dtype=float)
    if isinstance(p, PiecewiseConstantPotential):
        out = np.zeros_like(x_arr)
        for a, b, v in p.pieces:
            out[(x_arr >= a) & (x_arr < b)] = v
    elif p.kind is AnalyticKind.ZERO:
        out = np.zeros_like(x_arr)
    elif p.kind is AnalyticKind.QUADRATIC:
        out = p.coeff * x_arr**2
    else:
        out = np.sinc(x_arr / np.pi)
    return float(out) if out.ndim == 0 else out


def support_radius(p: Potential) -> float:
    """Smallest r with V = 0 outside [-r, r]."""
    if isinstance(p, PiecewiseConstantPotential):
        return max((abs(t) for t in piece_breakpoints(p)), default=0.0)
    if p.kind is AnalyticKind.ZERO:
        return 0.0
    raise NonCompactSupport(f"{p.kind.value} potential has no compact support")


def piece_breakpoints(p: PiecewiseConstantPotential) -> list[float]:
    points: list[float] = []
    for a, b, _ in p.pieces:
        for t in (a, b):
            if not points or points[-1] != t:
                points.append(t)
    return points


def to_dict(p: Potential) -> dict:
    if isinstance(p, PiecewiseConstantPotential):
        return {
            "type": "piecewise",
            "pieces": [{"a": a, "b": b, "v": v} for a, b, v in p.pieces],
        }
    if p.kind is AnalyticKind.QUADRATIC:
        return {"type": "quadratic", "coeff": p.coeff}
    return {"type": p.kind.value}


def from_dict(doc: dict) -> Potential:
    """Parse the config-file description of a potential."""
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigError(f"potential must be an object with a 'type' key, got {doc!r}")
    kind = doc["type"]
    if kind == "piecewise":
        pieces = doc.get("pieces", [])
        if not isinstance(pieces, list):
            raise ConfigError("'pieces' must be a list")
        try:
            triples = tuple((pc["a"], pc["b"], pc["v"]) for pc in pieces)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed piece in {pieces!r}") from exc
        return PiecewiseConstantPotential(triples)
    if kind == "quadratic":
        if "coeff" not in doc:
            raise ConfigError("quadratic potential needs 'coeff'")
        return AnalyticPotential.quadratic(doc["coeff"])
    if kind == "sinc":
        return AnalyticPotential.sinc()
    if kind == "zero":
        return AnalyticPotential.zero()
    raise ConfigError(f"unknown potential type {kind!r}")


def digest(p: Potential) -> str:
    """Content hash, stable across runs and platforms."""
    canon = json.dumps(to_dict(p), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
