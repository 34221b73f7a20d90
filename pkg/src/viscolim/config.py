"""The JSON run configuration shared by all subcommands.

One document holds every field; each subcommand reads the fields it needs.
See README.md for the schema. Unknown keys are rejected so typos surface.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from importlib import resources
from pathlib import Path

from . import oracles
from . import potentials as pot
from .eigensolver import SectorWindow
from .errors import ConfigError
from .export import rect_from_dict, target_from_dict, window_from_dict
from .harness import SweepConfig, Target, ZGrid, default_search_rect
from .oscillator_basis import CapConfig

KEYS = {
    "description", "potential", "epsilon", "epsilons", "alpha", "basis_size", "basis_scale",
    "physical_scale", "quadrature_order", "window", "match_radius", "growth", "stability_tol",
    "residual_tol", "search_rect", "newton_tol", "resonances", "final_error_tolerance",
    "output_dir", "pseudospectrum", "oracle",
}

SWEEP_KEYS = ("alpha", "basis_size", "match_radius", "output_dir", "basis_scale", "physical_scale",
              "quadrature_order", "growth", "stability_tol", "residual_tol", "newton_tol",
              "final_error_tolerance")


def shipped(name: str) -> Path:
    """Path of a config bundled with the package, e.g. ``shipped("barrier_sweep")``."""
    path = resources.files("viscolim") / "configs" / f"{name}.json"
    if not path.is_file():
        raise ConfigError(f"no shipped config named {name!r}")
    return Path(str(path))


def load(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return validate(doc)


def validate(doc) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    extra = set(doc) - KEYS
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    return doc


def merge(doc: dict, overrides: dict) -> dict:
    """Config with CLI overrides applied; ``None`` overrides are ignored."""
    out = dict(doc)
    out.update({k: v for k, v in overrides.items() if v is not None})
    return validate(out)


def _need(doc, key):
    if key not in doc or doc[key] is None:
        raise ConfigError(f"config needs {key!r}")
    return doc[key]


def potential(doc: dict) -> pot.Potential:
    return pot.from_dict(_need(doc, "potential"))


def window(doc: dict) -> SectorWindow:
    return window_from_dict(doc["window"]) if doc.get("window") is not None else SectorWindow()


def cap_config(doc: dict, epsilon: float | None = None) -> CapConfig:
    eps = float(_need(doc, "epsilon") if epsilon is None else epsilon)
    scale = doc.get("basis_scale", 1.0)
    if doc.get("physical_scale") is not None:
        scale = float(doc["physical_scale"]) * abs(eps) ** -0.25
    return CapConfig(epsilon=eps, alpha=float(doc.get("alpha", 0.0)),
                     basis_size=doc.get("basis_size", 128),
                     quadrature_order=doc.get("quadrature_order"), basis_scale=scale)


def targets(spec) -> tuple[Target, ...]:
    """Externally supplied resonances: a list of targets or a quadratic oracle request."""
    if isinstance(spec, list):
        return tuple(target_from_dict(t) for t in spec)
    if isinstance(spec, dict) and spec.get("oracle") == "quadratic":
        lambdas, mus = spec.get("lambdas", []), spec.get("mus", [])
        box = oracles.MultiIndexBox(len(lambdas) + len(mus), int(_need(spec, "max_level")))
        values = oracles.quadratic_resonances(lambdas, mus, box)
        counts = Counter(complex(z) for z in values)
        return tuple(Target(z, m, True, "oracle") for z, m in counts.items())
    raise ConfigError("resonances must be a list or {'oracle': 'quadratic', ...}")


def sweep_config(doc: dict) -> SweepConfig:
    eps = _need(doc, "epsilons")
    if not isinstance(eps, list):
        raise ConfigError("epsilons must be a list")
    kw = {k: doc[k] for k in SWEEP_KEYS if doc.get(k) is not None}
    return SweepConfig(
        potential=potential(doc),
        epsilons=tuple(float(e) for e in eps),
        window=window(doc),
        search_rect=None if doc.get("search_rect") is None else rect_from_dict(doc["search_rect"]),
        resonances=None if doc.get("resonances") is None else targets(doc["resonances"]),
        **kw,
    )


def search_rect(doc: dict):
    if doc.get("search_rect") is not None:
        return rect_from_dict(doc["search_rect"])
    return default_search_rect(window(doc))


def pseudospectrum(doc: dict) -> dict:
    """Keyword arguments for ``pseudospectrum_scan``."""
    sec = _need(doc, "pseudospectrum")
    allowed = {"epsilons", "gamma", "basis_size", "basis_scale", "grid", "points", "ray_margin"}
    if not isinstance(sec, dict) or set(sec) - allowed:
        raise ConfigError(f"pseudospectrum section accepts {sorted(allowed)}")
    g = sec.get("grid") or {}
    pts = tuple(complex(float(a), float(b)) for a, b in sec.get("points", []))
    try:
        grid = ZGrid(extra=pts, **g)
    except TypeError as exc:
        raise ConfigError(f"bad grid: {exc}") from exc
    return {
        "epsilons": tuple(_need(sec, "epsilons")),
        "gamma": float(sec.get("gamma", math.pi / 2)),
        "grid": grid,
        "basis_size": int(sec.get("basis_size", 200)),
        "basis_scale": float(sec.get("basis_scale", 1.0)),
        "ray_margin": float(sec.get("ray_margin", 0.05)),
    }


def oracle(doc: dict) -> tuple[str, dict]:
    sec = _need(doc, "oracle")
    if not isinstance(sec, dict) or "kind" not in sec:
        raise ConfigError("oracle section needs 'kind'")
    params = {k: v for k, v in sec.items() if k != "kind"}
    return sec["kind"], params
