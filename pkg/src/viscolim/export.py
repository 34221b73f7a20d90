"""CSV, JSON and SVG output for spectra, resonance sets and reports.

CSV floats carry 17 significant digits; JSON floats use ``repr`` and
round-trip exactly. Complex numbers are ``[re, im]`` pairs in JSON.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import potentials as pot
from .eigensolver import SectorWindow, Spectrum
from .errors import ConfigError
from .harness import (ConjugationReport, ConvergenceReport, DiskCount, EpsilonResult,
                      Example4Result, MatchedPair, PseudospectrumTable, SweepConfig, Target)
from .resonance_direct import KRectangle, Pole, ResonanceSet

FORMATS = ("csv", "json", "svg")


@dataclass(frozen=True, eq=False)
class OracleTable:
    """Closed-form values with the parameters that produced them."""

    name: str
    params: dict
    values: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, OracleTable):
            return NotImplemented
        return (self.name == other.name and self.params == other.params
                and np.array_equal(self.values, other.values))


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _c(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _z(pair) -> complex:
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise ConfigError(f"complex number must be [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def _num(x):
    return None if x is None or not math.isfinite(x) else x


def _inf(x):
    return math.inf if x is None else float(x)


# ---- JSON ----------------------------------------------------------------

def window_to_dict(w: SectorWindow) -> dict:
    return {"arg_min": w.arg_min, "arg_max": w.arg_max, "radius_min": w.radius_min, "radius_max": w.radius_max}


def window_from_dict(d: dict) -> SectorWindow:
    return SectorWindow(**_pick(d, ("arg_min", "arg_max", "radius_min", "radius_max"), "window"))


def rect_to_dict(r: KRectangle) -> dict:
    return {"re_min": r.re_min, "re_max": r.re_max, "im_min": r.im_min, "im_max": r.im_max}


def rect_from_dict(d: dict) -> KRectangle:
    return KRectangle(**_pick(d, ("re_min", "re_max", "im_min", "im_max"), "search_rect", required=True))


def _pick(d, keys, what, required=False):
    if not isinstance(d, dict):
        raise ConfigError(f"{what} must be an object")
    extra = set(d) - set(keys)
    if extra:
        raise ConfigError(f"unknown {what} keys: {sorted(extra)}")
    if required and set(keys) - set(d):
        raise ConfigError(f"{what} needs keys {list(keys)}")
    return {k: float(v) for k, v in d.items()}


def target_to_dict(t: Target) -> dict:
    return {"z": _c(t.z), "multiplicity": t.multiplicity, "certified": t.certified, "source": t.source}


def target_from_dict(d: dict) -> Target:
    return Target(_z(d["z"]), int(d.get("multiplicity", 1)), bool(d.get("certified", True)),
                  str(d.get("source", "external")))


def sweep_config_to_dict(c: SweepConfig) -> dict:
    return {
        "potential": pot.to_dict(c.potential),
        "epsilons": list(c.epsilons),
        "alpha": c.alpha,
        "basis_size": c.basis_size,
        "window": window_to_dict(c.window),
        "match_radius": c.match_radius,
        "output_dir": c.output_dir,
        "basis_scale": c.basis_scale,
        "physical_scale": c.physical_scale,
        "quadrature_order": c.quadrature_order,
        "growth": c.growth,
        "stability_tol": c.stability_tol,
        "residual_tol": c.residual_tol,
        "search_rect": None if c.search_rect is None else rect_to_dict(c.search_rect),
        "newton_tol": c.newton_tol,
        "resonances": None if c.resonances is None else [target_to_dict(t) for t in c.resonances],
        "final_error_tolerance": c.final_error_tolerance,
    }


def sweep_config_from_dict(d: dict) -> SweepConfig:
    kw = dict(d)
    kw["potential"] = pot.from_dict(kw["potential"])
    kw["epsilons"] = tuple(kw["epsilons"])
    if "window" in kw:
        kw["window"] = window_from_dict(kw["window"])
    if kw.get("search_rect") is not None:
        kw["search_rect"] = rect_from_dict(kw["search_rect"])
    if kw.get("resonances") is not None:
        kw["resonances"] = tuple(target_from_dict(t) for t in kw["resonances"])
    try:
        return SweepConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def spectrum_to_dict(s: Spectrum, **context) -> dict:
    out = {"kind": "spectrum", **context}
    out.update({
        "eigenvalues": [_c(z) for z in s.eigenvalues],
        "residuals": [float(r) for r in s.residuals],
        "stable": None if s.stable is None else [bool(b) for b in s.stable],
        "config_digest": s.config_digest,
    })
    return out


def spectrum_from_dict(d: dict) -> Spectrum:
    return Spectrum(
        np.array([_z(z) for z in d["eigenvalues"]], dtype=complex),
        np.array(d["residuals"], dtype=float),
        None if d.get("stable") is None else np.array(d["stable"], dtype=bool),
        d.get("config_digest", ""),
    )


def resonance_set_to_dict(r: ResonanceSet) -> dict:
    return {
        "kind": "resonance_set",
        "search_region": rect_to_dict(r.search_region),
        "potential_digest": r.potential_digest,
        "total_winding": r.total_winding,
        "boundary_max_abs_f": r.boundary_max_abs_f,
        "newton_tol": r.newton_tol,
        "poles": [{"k": _c(p.k), "z": _c(p.z), "multiplicity": p.multiplicity,
                   "certified": p.certified, "kind": p.kind} for p in r.poles],
    }


def resonance_set_from_dict(d: dict) -> ResonanceSet:
    return ResonanceSet(
        poles=tuple(Pole(_z(p["k"]), int(p["multiplicity"]), bool(p["certified"])) for p in d["poles"]),
        search_region=rect_from_dict(d["search_region"]),
        potential_digest=d["potential_digest"],
        total_winding=int(d["total_winding"]),
        boundary_max_abs_f=float(d["boundary_max_abs_f"]),
        newton_tol=float(d["newton_tol"]),
    )


def _result_to_dict(r: EpsilonResult) -> dict:
    return {
        "epsilon": r.epsilon,
        "basis_scale": r.basis_scale,
        "failure": r.failure,
        "spectrum": None if r.spectrum is None else spectrum_to_dict(r.spectrum),
        "windowed": [_c(z) for z in r.windowed],
        "pairs": [{"eigenvalue": _c(p.eigenvalue), "resonance": _c(p.resonance),
                   "abs_error": p.abs_error, "resonance_index": p.resonance_index} for p in r.pairs],
        "unmatched_eigenvalues": [_c(z) for z in r.unmatched_eigenvalues],
        "unmatched_resonances": list(r.unmatched_resonances),
    }


def _result_from_dict(d: dict) -> EpsilonResult:
    return EpsilonResult(
        epsilon=float(d["epsilon"]),
        basis_scale=float(d["basis_scale"]),
        spectrum=None if d["spectrum"] is None else spectrum_from_dict(d["spectrum"]),
        windowed=tuple(_z(z) for z in d["windowed"]),
        pairs=tuple(MatchedPair(_z(p["eigenvalue"]), _z(p["resonance"]), float(p["abs_error"]),
                                int(p["resonance_index"])) for p in d["pairs"]),
        unmatched_eigenvalues=tuple(_z(z) for z in d["unmatched_eigenvalues"]),
        unmatched_resonances=tuple(int(i) for i in d["unmatched_resonances"]),
        failure=d["failure"],
    )


def report_to_dict(r: ConvergenceReport) -> dict:
    return {
        "kind": "convergence_report",
        "config": sweep_config_to_dict(r.config),
        "targets": [target_to_dict(t) for t in r.targets],
        "results": [_result_to_dict(x) for x in r.results],
        "disk_counts": [{"resonance_index": c.resonance_index, "resonance": _c(c.resonance),
                         "epsilon": c.epsilon, "delta": c.delta, "count": c.count,
                         "expected": c.expected} for c in r.disk_counts],
        "error_sequences": {str(i): seq for i, seq in r.error_sequences.items()},
    }


def report_from_dict(d: dict) -> ConvergenceReport:
    return ConvergenceReport(
        config=sweep_config_from_dict(d["config"]),
        targets=tuple(target_from_dict(t) for t in d["targets"]),
        results=tuple(_result_from_dict(x) for x in d["results"]),
        disk_counts=tuple(DiskCount(int(c["resonance_index"]), _z(c["resonance"]), float(c["epsilon"]),
                                    float(c["delta"]), int(c["count"]), int(c["expected"]))
                          for c in d["disk_counts"]),
    )


def pseudospectrum_to_dict(t: PseudospectrumTable) -> dict:
    return {
        "kind": "pseudospectrum",
        "epsilons": list(t.epsilons),
        "gamma": t.gamma,
        "basis_size": t.basis_size,
        "points": [_c(z) for z in t.points],
        "regions": list(t.regions),
        # null marks the infinite sentinel
        "norms": [[_num(float(v)) for v in row] for row in t.norms],
        "growth_ratios": [[_num(float(v)) for v in row] for row in t.growth_ratios],
    }


def pseudospectrum_from_dict(d: dict) -> PseudospectrumTable:
    return PseudospectrumTable(
        epsilons=tuple(float(e) for e in d["epsilons"]),
        gamma=float(d["gamma"]),
        basis_size=int(d["basis_size"]),
        points=tuple(_z(z) for z in d["points"]),
        regions=tuple(d["regions"]),
        norms=np.array([[_inf(v) for v in row] for row in d["norms"]], dtype=float).reshape(
            len(d["epsilons"]), len(d["points"])),
    )


def example4_to_dict(r: Example4Result) -> dict:
    return {
        "kind": "example4",
        "exploratory": r.exploratory,
        "basis_size": r.basis_size,
        "epsilons": list(r.epsilons),
        "spectra": [spectrum_to_dict(s) for s in r.spectra],
    }


def example4_from_dict(d: dict) -> Example4Result:
    return Example4Result(tuple(float(e) for e in d["epsilons"]),
                          tuple(spectrum_from_dict(s) for s in d["spectra"]),
                          int(d["basis_size"]), bool(d["exploratory"]))


def conjugation_to_dict(r: ConjugationReport) -> dict:
    return {"kind": "conjugation", "epsilon": r.epsilon, "distance": _num(r.distance),
            "plus": [_c(z) for z in r.plus], "minus": [_c(z) for z in r.minus]}


def conjugation_from_dict(d: dict) -> ConjugationReport:
    return ConjugationReport(float(d["epsilon"]), _inf(d["distance"]),
                             tuple(_z(z) for z in d["plus"]), tuple(_z(z) for z in d["minus"]))


def oracle_to_dict(t: OracleTable) -> dict:
    return {"kind": "oracle", "name": t.name, "params": t.params, "values": [_c(z) for z in t.values]}


def oracle_from_dict(d: dict) -> OracleTable:
    return OracleTable(d["name"], d["params"], np.array([_z(z) for z in d["values"]], dtype=complex))


_ENCODERS = [
    (Spectrum, spectrum_to_dict),
    (ResonanceSet, resonance_set_to_dict),
    (ConvergenceReport, report_to_dict),
    (PseudospectrumTable, pseudospectrum_to_dict),
    (Example4Result, example4_to_dict),
    (ConjugationReport, conjugation_to_dict),
    (OracleTable, oracle_to_dict),
]

_DECODERS = {
    "spectrum": spectrum_from_dict,
    "resonance_set": resonance_set_from_dict,
    "convergence_report": report_from_dict,
    "pseudospectrum": pseudospectrum_from_dict,
    "example4": example4_from_dict,
    "conjugation": conjugation_from_dict,
    "oracle": oracle_from_dict,
}


def to_jsonable(obj, **context) -> dict:
    for cls, enc in _ENCODERS:
        if isinstance(obj, cls):
            return enc(obj, **context) if cls is Spectrum else enc(obj)
    raise TypeError(f"cannot export {type(obj).__name__}")


def from_jsonable(doc: dict):
    try:
        return _DECODERS[doc["kind"]](doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed artifact: {exc}") from exc


def dumps(obj, **context) -> str:
    return json.dumps(to_jsonable(obj, **context), indent=2, allow_nan=False) + "\n"


def loads(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return from_jsonable(doc)


# ---- CSV -----------------------------------------------------------------

SPECTRUM_COLUMNS = ("epsilon", "alpha", "index", "re_z", "im_z", "residual", "stable")
RESONANCE_COLUMNS = ("re_k", "im_k", "re_z", "im_z", "multiplicity", "certified", "kind")
PAIR_COLUMNS = ("epsilon", "resonance_index", "re_resonance", "im_resonance",
                "re_eigenvalue", "im_eigenvalue", "abs_error")
PSEUDO_COLUMNS = ("epsilon", "re_z", "im_z", "region", "resolvent_norm")
VALUE_COLUMNS = ("index", "re_z", "im_z")
CONJ_COLUMNS = ("side", "index", "re_z", "im_z")


def _flag(b) -> str:
    return "" if b is None else ("true" if b else "false")


def _spectrum_rows(s: Spectrum, epsilon, alpha):
    for i, z in enumerate(s.eigenvalues):
        yield (fmt(epsilon), fmt(alpha), i, fmt(z.real), fmt(z.imag), fmt(s.residuals[i]),
               _flag(None if s.stable is None else s.stable[i]))


def csv_text(obj, **context) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(obj, Spectrum):
        w.writerow(SPECTRUM_COLUMNS)
        w.writerows(_spectrum_rows(obj, context.get("epsilon", math.nan), context.get("alpha", 0.0)))
    elif isinstance(obj, Example4Result):
        w.writerow(SPECTRUM_COLUMNS)
        for e, s in zip(obj.epsilons, obj.spectra):
            w.writerows(_spectrum_rows(s, e, context.get("alpha", 0.0)))
    elif isinstance(obj, ResonanceSet):
        w.writerow(RESONANCE_COLUMNS)
        for p in obj.poles:
            w.writerow((fmt(p.k.real), fmt(p.k.imag), fmt(p.z.real), fmt(p.z.imag),
                        p.multiplicity, _flag(p.certified), p.kind))
    elif isinstance(obj, ConvergenceReport):
        w.writerow(PAIR_COLUMNS)
        for r in obj.results:
            for p in r.pairs:
                w.writerow((fmt(r.epsilon), p.resonance_index, fmt(p.resonance.real), fmt(p.resonance.imag),
                            fmt(p.eigenvalue.real), fmt(p.eigenvalue.imag), fmt(p.abs_error)))
    elif isinstance(obj, PseudospectrumTable):
        w.writerow(PSEUDO_COLUMNS)
        for e, row in zip(obj.epsilons, obj.norms):
            for z, region, v in zip(obj.points, obj.regions, row):
                w.writerow((fmt(e), fmt(z.real), fmt(z.imag), region, "inf" if math.isinf(v) else fmt(v)))
    elif isinstance(obj, OracleTable):
        w.writerow(VALUE_COLUMNS)
        for i, z in enumerate(obj.values):
            w.writerow((i, fmt(z.real), fmt(z.imag)))
    elif isinstance(obj, ConjugationReport):
        w.writerow(CONJ_COLUMNS)
        for side, zs in (("plus", obj.plus), ("minus", obj.minus)):
            for i, z in enumerate(zs):
                w.writerow((side, i, fmt(z.real), fmt(z.imag)))
    else:
        raise TypeError(f"cannot export {type(obj).__name__} as csv")
    return buf.getvalue()


# ---- SVG -----------------------------------------------------------------

def svg_text(obj, **context) -> str:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "viscolim", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        window = None
        if isinstance(obj, ConvergenceReport):
            window = obj.config.window
            cmap = plt.get_cmap("viridis")
            n = len(obj.results)
            for i, r in enumerate(obj.results):
                z = np.array(r.windowed, dtype=complex)
                ax.scatter(z.real, z.imag, s=12, color=cmap(i / max(n - 1, 1)), label=f"eps = {r.epsilon:g}")
            t = np.array([x.z for x in obj.targets], dtype=complex)
            ax.scatter(t.real, t.imag, marker="x", s=40, color="crimson", label="resonances")
        elif isinstance(obj, ResonanceSet):
            z = np.array([p.z for p in obj.poles], dtype=complex)
            ax.scatter(z.real, z.imag, marker="x", s=40, color="crimson", label="poles")
        elif isinstance(obj, (Spectrum, OracleTable)):
            z = obj.eigenvalues if isinstance(obj, Spectrum) else obj.values
            ax.scatter(z.real, z.imag, s=12, label="eigenvalues")
        elif isinstance(obj, Example4Result):
            cmap = plt.get_cmap("viridis")
            n = len(obj.spectra)
            for i, (e, s) in enumerate(zip(obj.epsilons, obj.spectra)):
                z = s.eigenvalues
                ax.scatter(z.real, z.imag, s=12, color=cmap(i / max(n - 1, 1)), label=f"eps = {e:g}")
        elif isinstance(obj, ConjugationReport):
            zp, zm = np.array(obj.plus, dtype=complex), np.array(obj.minus, dtype=complex)
            ax.scatter(zp.real, zp.imag, s=12, label="+eps")
            ax.scatter(zm.real, zm.imag, s=12, label="-eps")
        elif isinstance(obj, PseudospectrumTable):
            z = np.array(obj.points, dtype=complex)
            with np.errstate(divide="ignore"):
                lv = np.log10(obj.norms[-1])
            lv = np.where(np.isfinite(lv), lv, np.nan)
            sc = ax.scatter(z.real, z.imag, c=lv, s=14, cmap="magma")
            fig.colorbar(sc, ax=ax, label=f"log10 resolvent norm, eps = {obj.epsilons[-1]:g}")
        else:
            plt.close(fig)
            raise TypeError(f"cannot export {type(obj).__name__} as svg")
        if window is not None:
            r = window.radius_max
            for a in (window.arg_min, window.arg_max):
                ax.plot([0, r * math.cos(a)], [0, r * math.sin(a)], ls="--", lw=0.8, color="grey")
            ax.set_title(f"arg z in ({window.arg_min:.3f}, {window.arg_max:.3f}), "
                         f"|z| in [{window.radius_min:g}, {window.radius_max:g}]", fontsize=9)
        ax.axhline(0, lw=0.5, color="black")
        ax.set_xlabel("Re z")
        ax.set_ylabel("Im z")
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=8)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def export(obj, fmt_name: str, path, **context) -> Path:
    """Write ``obj`` as csv, json or svg; I/O failures name the path."""
    if fmt_name not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {fmt_name!r}")
    text = {"csv": csv_text, "json": dumps, "svg": svg_text}[fmt_name](obj, **context)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def load(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return loads(text)
