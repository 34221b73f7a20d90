"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import config as cfgmod
from . import export as ex
from . import oracles
from .eigensolver import filter_sector, stability_filter
from .errors import ConfigError, NumericalFailure
from .harness import conjugation_check, example4_sweep, pseudospectrum_scan, run_sweep
from .resonance_direct import find_resonances

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("configuration")
    g.add_argument("-c", "--config", help="JSON config file")
    g.add_argument("--preset", help="name of a shipped config, e.g. barrier_sweep")
    g.add_argument("-o", "--output-dir", dest="output_dir")
    g.add_argument("--epsilon", type=float)
    g.add_argument("--epsilons", type=_floats, help="comma-separated, sorted by |eps| descending")
    g.add_argument("--alpha", type=float)
    g.add_argument("--basis-size", dest="basis_size", type=int)
    g.add_argument("--basis-scale", dest="basis_scale", type=float)
    g.add_argument("--physical-scale", dest="physical_scale", type=float)
    g.add_argument("--match-radius", dest="match_radius", type=float)


OVERRIDES = ("output_dir", "epsilon", "epsilons", "alpha", "basis_size", "basis_scale",
             "physical_scale", "match_radius")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="viscolim", description=(
        "Scattering resonances of 1-D step potentials, computed directly and as "
        "limits of complex-absorbing-potential eigenvalues."))
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("resonances", "certified zeros of the matching function"),
        ("cap-spectrum", "stability-filtered CAP eigenvalues at one epsilon"),
        ("sweep", "epsilon sweep matched against resonances"),
        ("oracle", "closed-form spectra"),
        ("conjugation", "spectrum(-eps) versus conj(spectrum(+eps))"),
        ("pseudospectrum", "resolvent norms of the Davies oscillator"),
        ("example4", "exploratory sweep for sin(x)/x"),
    ]:
        _common(sub.add_parser(name, help=help_text))
    p = sub.add_parser("export", help="convert a JSON artifact to csv, json or svg")
    p.add_argument("artifact", help="JSON file written by another subcommand")
    p.add_argument("--format", choices=ex.FORMATS, required=True)
    p.add_argument("--out", required=True)
    return parser


def _config(args) -> dict:
    if args.config and args.preset:
        raise ConfigError("use either --config or --preset")
    if args.preset:
        doc = cfgmod.load(cfgmod.shipped(args.preset))
    elif args.config:
        doc = cfgmod.load(args.config)
    else:
        doc = {}
    return cfgmod.merge(doc, {k: getattr(args, k) for k in OVERRIDES})


def _out(doc) -> Path:
    return Path(doc.get("output_dir") or "out")


def _fmt(z: complex) -> str:
    return f"{z.real:+.10f} {z.imag:+.10f}i"


def cmd_resonances(doc):
    p = cfgmod.potential(doc)
    rs = find_resonances(p, cfgmod.search_rect(doc), float(doc.get("newton_tol", 1e-12)))
    out = _out(doc)
    for f in ex.FORMATS:
        ex.export(rs, f, out / f"resonances.{f}")
    print(f"total winding {rs.total_winding}, {len(rs.poles)} poles")
    for pole in rs.poles:
        print(f"  k = {_fmt(pole.k)}  z = {_fmt(pole.z)}  m = {pole.multiplicity}  "
              f"{pole.kind}{'' if pole.certified else ' (uncertified)'}")


def cmd_cap_spectrum(doc):
    p = cfgmod.potential(doc)
    cap = cfgmod.cap_config(doc)
    spec = stability_filter(p, cap, float(doc.get("growth", 1.5)),
                            float(doc.get("stability_tol", 1e-6)), float(doc.get("residual_tol", 1e-8)))
    out = _out(doc)
    ex.export(spec, "csv", out / "spectrum.csv", epsilon=cap.epsilon, alpha=cap.alpha)
    ex.export(spec, "json", out / "spectrum.json", epsilon=cap.epsilon, alpha=cap.alpha)
    stable = spec.stable_only()
    ex.export(stable, "svg", out / "spectrum.svg")
    inside = len(filter_sector(stable, cfgmod.window(doc)))
    print(f"{len(spec)} eigenvalues, {len(stable)} stable, {inside} stable in window")
    for z in stable.eigenvalues:
        print(f"  {_fmt(z)}")


def cmd_sweep(doc) -> int:
    sc = cfgmod.sweep_config(doc)
    report = run_sweep(sc)
    out = _out(doc)
    ex.export(report, "json", out / "report.json")
    ex.export(report, "csv", out / "pairs.csv")
    ex.export(report, "svg", out / "sweep.svg")
    for i, r in enumerate(report.results):
        if r.spectrum is not None:
            ex.export(r.spectrum, "csv", out / f"spectrum_{i:02d}.csv", epsilon=r.epsilon, alpha=sc.alpha)
    print(f"{len(report.targets)} resonances in window; epsilons {list(sc.epsilons)}")
    tol = sc.final_error_tolerance
    for j, t in enumerate(report.targets):
        seq = report.error_sequence(j)
        shown = ", ".join("-" if e is None else f"{e:.3e}" for e in seq)
        verdict = "decreasing" if report.strictly_decreasing(j) else "NOT decreasing"
        if tol is not None and seq and seq[-1] is not None:
            verdict += f"; final {'<=' if seq[-1] <= tol else '>'} {tol:g}"
        print(f"  z = {_fmt(t.z)}  errors [{shown}]  {verdict}")
    for r in report.results:
        if r.failure:
            print(f"  eps = {r.epsilon:g}: FAILED {r.failure}")
    return EXIT_NUMERICAL if report.failed else EXIT_OK


def cmd_oracle(doc):
    kind, params = cfgmod.oracle(doc)
    try:
        if kind == "davies":
            box = oracles.MultiIndexBox(int(params.get("n", 1)), int(params["max_level"]))
            values = oracles.davies_spectrum(float(params["epsilon"]), float(params.get("gamma", math.pi / 2)), box)
        elif kind in ("quadratic_resonances", "quadratic_cap"):
            lam, mu = params.get("lambdas", []), params.get("mus", [])
            box = oracles.MultiIndexBox(len(lam) + len(mu), int(params["max_level"]))
            if kind == "quadratic_resonances":
                values = oracles.quadratic_resonances(lam, mu, box)
            else:
                values = oracles.quadratic_cap_eigenvalues(lam, mu, float(params["epsilon"]), box)
        else:
            raise ConfigError(f"unknown oracle kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"oracle needs {exc}") from exc
    table = ex.OracleTable(kind, params, values)
    out = _out(doc)
    ex.export(table, "csv", out / "oracle.csv")
    ex.export(table, "json", out / "oracle.json")
    for z in values:
        print(f"  {_fmt(z)}")


def cmd_conjugation(doc):
    p = cfgmod.potential(doc)
    cap = cfgmod.cap_config(doc)
    rep = conjugation_check(p, cap.epsilon, cap, cfgmod.window(doc), float(doc.get("growth", 1.5)),
                            float(doc.get("stability_tol", 1e-6)), float(doc.get("residual_tol", 1e-8)))
    out = _out(doc)
    ex.export(rep, "json", out / "conjugation.json")
    ex.export(rep, "csv", out / "conjugation.csv")
    print(f"eps = {rep.epsilon:g}: {len(rep.plus)} / {len(rep.minus)} stable eigenvalues, "
          f"Hausdorff distance {rep.distance:.3e}")


def cmd_pseudospectrum(doc):
    kw = cfgmod.pseudospectrum(doc)
    table = pseudospectrum_scan(**kw)
    out = _out(doc)
    for f in ex.FORMATS:
        ex.export(table, f, out / f"pseudospectrum.{f}")
    ratios = table.growth_ratios
    for i, (z, region) in enumerate(zip(table.points, table.regions)):
        norms = " ".join(f"{v:.4e}" for v in table.norms[:, i])
        growth = " ".join(f"{v:.3f}" for v in ratios[:, i])
        print(f"  z = {_fmt(z)} [{region}]  norms {norms}  growth {growth}")


def cmd_example4(doc):
    eps = doc.get("epsilons") or ([doc["epsilon"]] if doc.get("epsilon") is not None else None)
    if not eps:
        raise ConfigError("example4 needs epsilons")
    res = example4_sweep(eps, int(doc.get("basis_size", 200)), alpha=float(doc.get("alpha", 0.0)),
                         window=cfgmod.window(doc), basis_scale=float(doc.get("basis_scale", 1.0)),
                         growth=float(doc.get("growth", 1.5)),
                         match_tol=float(doc.get("stability_tol", 1e-6)),
                         residual_tol=float(doc.get("residual_tol", 1e-8)))
    out = _out(doc)
    ex.export(res, "json", out / "example4.json")
    ex.export(res, "svg", out / "example4.svg")
    for i, (e, s) in enumerate(zip(res.epsilons, res.spectra)):
        ex.export(s, "csv", out / f"example4_{i:02d}.csv", epsilon=e, alpha=float(doc.get("alpha", 0.0)))
        print(f"eps = {e:g}: {len(s)} stable eigenvalues in window (exploratory, no reference)")


def cmd_export(args):
    obj = ex.load(args.artifact)
    ex.export(obj, args.format, args.out)
    print(args.out)


COMMANDS = {
    "resonances": cmd_resonances,
    "cap-spectrum": cmd_cap_spectrum,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "conjugation": cmd_conjugation,
    "pseudospectrum": cmd_pseudospectrum,
    "example4": cmd_example4,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "export":
            cmd_export(args)
            return EXIT_OK
        return COMMANDS[args.command](_config(args)) or EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
