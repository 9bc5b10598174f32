"""Command-line front end: ``resonance-atlas <command> [flags]``.

Commands
--------
find      zeros of f / f_plus (or of the hydrogen resolvent) with labels
sweep     track zeros along kappa, mu or delta; one CSV per branch plus an SVG
critical  the exceptional point (kappa_c, delta_c, zeta_c) at a given mu
discrete  eigenvalue curves of the three-mode matrix or the dressed pair
hydrogen  circular-transition constants, both resonances and the lifetime
selftest  run the numbered regression criteria

Every command accepts ``--out DIR``, ``--json``, ``--quiet`` and
``--config FILE``. The config file is INI-style with one section per
command; keys are the long flag names (``delta-from`` or ``delta_from``).
Flags given on the command line override the file.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .continuation import classify, critical_coupling, resonance_pair, track
from .core import (
    CouplingFamily,
    lorentzian_squared,
    make_params,
    simple_pole,
)
from .discrete import dressed_eigenvalues, eigenvalue_curves
from .errors import DomainError, ResonanceError, TrackingLost
from .rootfind import find_all

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

# kappa_c windows quoted for reference widths; other mu values are reported unverified
CRITICAL_REFERENCE = {0.01: (2e-3, 4e-3)}


class ConfigError(Exception):
    """Bad flag values or config file contents (exit code 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


# --- output helpers ---------------------------------------------------------

def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.splitext(path)[1])
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _complex(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _report(command, inputs, outputs, residuals) -> dict:
    return {"command": command, "inputs": inputs, "outputs": outputs,
            "residuals": residuals, "version": __version__}


def _threads() -> int:
    raw = os.environ.get("RESONANCE_ATLAS_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"RESONANCE_ATLAS_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("RESONANCE_ATLAS_THREADS must be >= 1")
    return n


def _family(name: str) -> CouplingFamily:
    if name == "lorentzian":
        return lorentzian_squared()
    if name == "simple-pole":
        return simple_pole()
    raise ConfigError(f"unknown family {name!r}")


def _parse_complex(text: str) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {text!r}") from exc


# --- commands ---------------------------------------------------------------

def cmd_find(args) -> tuple[dict, int]:
    if args.family == "hydrogen":
        return cmd_hydrogen(args)
    params = make_params(args.kappa, args.mu, args.delta)
    family = _family(args.family)
    zeros = find_all(params, family)
    out = []
    for r in zeros:
        if args.classify and r.zeta.imag < 0:
            r.label = classify(params, family, r)
        out.append(r.as_dict())
    inputs = {"kappa": params.kappa, "mu": params.mu, "delta": params.delta, "family": args.family}
    return _report("find", inputs, {"zeros": out}, [r.residual for r in zeros]), EXIT_OK


def cmd_sweep(args) -> tuple[dict, int]:
    params = make_params(args.kappa, args.mu, args.delta)
    family = _family(args.family)
    if args.seed:
        starts = [_parse_complex(s) for s in args.seed]
    else:
        starts = [r.zeta for r in resonance_pair(params, family)]
    os.makedirs(args.out, exist_ok=True)

    def run(z0):
        try:
            return track(params, family, args.vary, args.to, args.steps, z0, spacing=args.spacing), None
        except TrackingLost as exc:
            return exc.partial, exc

    with ThreadPoolExecutor(max_workers=min(_threads(), len(starts))) as pool:
        results = list(pool.map(run, starts))

    branches, files, code = [], [], EXIT_OK
    series = []
    for k, (traj, lost) in enumerate(results):
        rows = [(p, r.zeta.real, r.zeta.imag, k, r.residual) for p, r in traj.samples]
        path = os.path.join(args.out, f"{args.stem}.branch{k}.csv")
        _atomic_write(path, _csv_text(("param", "re", "im", "branch", "residual"), rows))
        files.append(path)
        info = {"branch": k, "start": _complex(starts[k]), "end": _complex(traj.end.zeta),
                "samples": len(traj), "complete": lost is None}
        if lost is not None:
            info["lost_at"] = lost.param
            info["message"] = str(lost)
            code = EXIT_NUMERIC
        branches.append(info)
        series.append((traj.zetas.real, traj.zetas.imag, f"branch {k}"))
    if not args.no_svg:
        from .plotting import polyline_svg

        svg = os.path.join(args.out, f"{args.stem}.svg")
        polyline_svg(svg, series, "Re zeta", "Im zeta", f"zeros as {args.vary} -> {args.to:g}")
        files.append(svg)
    inputs = {"kappa": params.kappa, "mu": params.mu, "delta": params.delta, "vary": args.vary,
              "to": args.to, "steps": args.steps, "spacing": args.spacing, "family": args.family}
    residuals = [max(r.residual for _, r in traj.samples) for traj, _ in results]
    return _report("sweep", inputs, {"branches": branches, "files": files}, residuals), code


def cmd_critical(args) -> tuple[dict, int]:
    if not args.mu > 0:
        raise DomainError(f"mu must be > 0, got {args.mu}")
    family = _family(args.family)
    ep = critical_coupling(args.mu, family)
    out = ep.as_dict()
    window = CRITICAL_REFERENCE.get(args.mu)
    out["status"] = "verified" if window and window[0] <= ep.kappa_c <= window[1] else "unverified"
    if args.probe:
        from .continuation import regime_diagnose

        probes = {}
        for factor in (1 - args.probe, 1 + args.probe):
            k = ep.kappa_c * factor
            probes[repr(k)] = regime_diagnose(make_params(k, args.mu, 0.0), family).regime.value
        out["probes"] = probes
    return _report("critical", {"mu": args.mu, "family": args.family}, out,
                   list(ep.condition_residuals)), EXIT_OK


def cmd_discrete(args) -> tuple[dict, int]:
    if args.steps < 2:
        raise DomainError("steps must be >= 2")
    deltas = np.linspace(args.delta_from, args.delta_to, args.steps)
    os.makedirs(args.out, exist_ok=True)
    if args.mode == "matrix":
        curves = eigenvalue_curves(args.kappa, args.mu, deltas)
        header = ("delta", "e1", "e2", "e3", "e4")
        gap = float(np.min(np.diff(curves, axis=1)))
        outputs = {"min_gap": gap}
    else:
        pairs = [dressed_eigenvalues(args.n, args.kappa, d) for d in deltas]
        curves = np.array([(p.zeta_minus, p.zeta_plus) for p in pairs])
        header = ("delta", "zeta_minus", "zeta_plus")
        outputs = {"min_splitting": float(np.min(curves[:, 1] - curves[:, 0]))}
    rows = [(d, *c) for d, c in zip(deltas, curves)]
    csv_path = os.path.join(args.out, f"{args.stem}.csv")
    _atomic_write(csv_path, _csv_text(header, rows))
    files = [csv_path]
    if not args.no_svg:
        from .plotting import polyline_svg

        svg = os.path.join(args.out, f"{args.stem}.svg")
        series = [(deltas, curves[:, j], name) for j, name in enumerate(header[1:])]
        polyline_svg(svg, series, "delta", "E / mode energy", f"kappa = {args.kappa:g}")
        files.append(svg)
    outputs["files"] = files
    inputs = {"mode": args.mode, "kappa": args.kappa, "mu": args.mu, "n": args.n,
              "delta_from": args.delta_from, "delta_to": args.delta_to, "steps": args.steps}
    return _report("discrete", inputs, outputs, []), EXIT_OK


def cmd_hydrogen(args) -> tuple[dict, int]:
    from .hydrogen import hydrogen_resonances, lifetime_seconds, transition

    tr = transition(args.n)
    std, nonstd = hydrogen_resonances(args.n)
    outputs = {
        "kappa_n": tr.kappa_n,
        "mu_n": tr.mu_n,
        "D_n": tr.D_n,
        "alpha_n": tr.alpha_n,
        "beta_n": tr.beta_n,
        "level_spacing_eV": tr.level_spacing_eV,
        "standard": std.as_dict(),
        "nonstandard": nonstd.as_dict(),
        "lifetime_s": lifetime_seconds(std.zeta, tr, args.channels),
        "polarization_channels": args.channels,
    }
    return _report("hydrogen", {"n": args.n, "channels": args.channels}, outputs,
                   [std.residual, nonstd.residual]), EXIT_OK


def cmd_selftest(args) -> tuple[dict, int]:
    from . import selftest

    numbers = [int(c) for c in args.criteria.split(",")] if args.criteria else None
    if numbers and any(n not in selftest.CRITERIA for n in numbers):
        raise ConfigError(f"criteria must be among {sorted(selftest.CRITERIA)}")
    log = None if (args.quiet or args.json) else print
    results = selftest.run(numbers, tamper=args.tamper, log=log)
    passed = all(r.passed for r in results)
    report = _report("selftest", {"criteria": numbers or sorted(selftest.CRITERIA), "tamper": args.tamper},
                     {"passed": passed, "criteria": [r.as_dict() for r in results]}, [])
    return report, EXIT_OK if passed else EXIT_NUMERIC


# --- parser -----------------------------------------------------------------

COMMANDS = {
    "find": cmd_find,
    "sweep": cmd_sweep,
    "critical": cmd_critical,
    "discrete": cmd_discrete,
    "hydrogen": cmd_hydrogen,
    "selftest": cmd_selftest,
}

# per-command defaults; the config file sits between these and the flags
DEFAULTS = {
    "find": dict(kappa=0.1, mu=0.01, delta=0.25, family="lorentzian", n=2, classify=True, channels=2),
    "sweep": dict(kappa=0.1, mu=0.01, delta=0.25, family="lorentzian", vary="mu", to=1.0, steps=60,
                  spacing="linear", seed=None, stem="sweep", no_svg=False),
    "critical": dict(mu=0.01, family="lorentzian", probe=0.0),
    "discrete": dict(mode="matrix", kappa=0.1, mu=0.01, n=1, delta_from=-0.1, delta_to=0.1, steps=201,
                     stem="discrete", no_svg=False),
    "hydrogen": dict(n=2, channels=2),
    "selftest": dict(criteria=None, tamper=False),
}

BOOLEAN_KEYS = {"classify", "no_svg", "tamper"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory (default: current directory)")
    common.add_argument("--json", action="store_true", default=None, help="print the JSON report")
    common.add_argument("--quiet", action="store_true", default=None, help="suppress the text summary")
    common.add_argument("--config", default=None, help="INI file with one section per command")

    parser = _Parser(prog="resonance-atlas", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def params(p, family_choices=("lorentzian", "simple-pole")):
        p.add_argument("--kappa", type=float, help="dimensionless coupling")
        p.add_argument("--mu", type=float, help="dimensionless width")
        p.add_argument("--delta", type=float, help="detuning")
        p.add_argument("--family", choices=family_choices)

    p = sub.add_parser("find", parents=[common], help="locate zeros")
    params(p, ("lorentzian", "simple-pole", "hydrogen"))
    p.add_argument("--n", type=int, help="upper principal quantum number (hydrogen)")
    p.add_argument("--channels", type=int, help="polarization channels for the lifetime (hydrogen)")
    p.add_argument("--no-classify", dest="classify", action="store_false", default=None,
                   help="skip the standard/nonstandard label")

    p = sub.add_parser("sweep", parents=[common], help="track zeros along one parameter")
    params(p)
    p.add_argument("--vary", choices=("kappa", "mu", "delta"))
    p.add_argument("--to", type=float, help="final value of the varied parameter")
    p.add_argument("--steps", type=int)
    p.add_argument("--spacing", choices=("linear", "log"))
    p.add_argument("--seed", action="append", help="starting zero, e.g. 1.005-2.095j (repeatable)")
    p.add_argument("--stem", help="file name stem for <stem>.branch<k>.csv")
    p.add_argument("--no-svg", action="store_true", default=None)

    p = sub.add_parser("critical", parents=[common], help="exceptional point at fixed mu")
    p.add_argument("--mu", type=float)
    p.add_argument("--family", choices=("lorentzian", "simple-pole"))
    p.add_argument("--probe", type=float, help="also diagnose the regime at kappa_c (1 -/+ PROBE)")

    p = sub.add_parser("discrete", parents=[common], help="zero-width eigenvalue curves")
    p.add_argument("--mode", choices=("matrix", "dressed"))
    p.add_argument("--kappa", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--n", type=int, help="excitation number (dressed mode)")
    p.add_argument("--delta-from", type=float)
    p.add_argument("--delta-to", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--stem")
    p.add_argument("--no-svg", action="store_true", default=None)

    p = sub.add_parser("hydrogen", parents=[common], help="circular-transition resonances")
    p.add_argument("--n", type=int)
    p.add_argument("--channels", type=int)

    p = sub.add_parser("selftest", parents=[common], help="run the regression criteria")
    p.add_argument("--criteria", help="comma-separated subset, e.g. 1,4,8")
    p.add_argument("--tamper", action="store_true", default=None,
                   help="shrink every tolerance so the harness must report failures")
    return parser


def _coerce(key: str, raw: str, template):
    if key in BOOLEAN_KEYS or isinstance(template, bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"config key {key!r} expects a boolean, got {raw!r}")
    if key == "seed":
        return [s for s in raw.replace(",", " ").split() if s]
    if isinstance(template, int):
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"config key {key!r} expects an integer, got {raw!r}") from exc
    if isinstance(template, float):
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"config key {key!r} expects a number, got {raw!r}") from exc
    return raw.strip()


def resolve(args) -> argparse.Namespace:
    """Merge defaults, the config section for the command, and explicit flags."""
    merged = dict(DEFAULTS[args.command])
    merged.update(out=".", json=False, quiet=False)
    if args.config:
        cp = configparser.ConfigParser()
        try:
            with open(args.config) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        if cp.has_section(args.command):
            for key, raw in cp.items(args.command):
                key = key.replace("-", "_")
                if key not in merged:
                    raise ConfigError(f"unknown key {key!r} in section [{args.command}]")
                merged[key] = _coerce(key, raw, merged[key])
    for key, value in vars(args).items():
        if value is not None:
            merged[key] = value
    return argparse.Namespace(**merged)


def _summary(report: dict) -> str:
    out = report["outputs"]
    cmd = report["command"]
    if cmd == "find" and "zeros" in out:
        lines = []
        for z in out["zeros"]:
            label = f"  {z['label']}" if z.get("label") else ""
            lines.append(f"{z['re']:.10g} {z['im']:+.6g}i  [{z['sheet']}]  |f|={z['residual']:.2g}{label}")
        return "\n".join(lines)
    if cmd == "hydrogen" or (cmd == "find" and "standard" in out):
        s, ns = out["standard"], out["nonstandard"]
        return (f"kappa_n = {out['kappa_n']:.6g}  mu_n = {out['mu_n']:.6g}\n"
                f"standard    {s['re']:.10g} {s['im']:+.6g}i\n"
                f"nonstandard {ns['re']:.6g} {ns['im']:+.6g}i\n"
                f"lifetime ({out['polarization_channels']} channels) = {out['lifetime_s']:.4g} s")
    if cmd == "critical":
        re, im = out["zeta_c"]
        lines = [f"kappa_c = {out['kappa_c']:.10g}  (kappa_c/mu = {out['kappa_c_over_mu']:.6g}, {out['status']})",
                 f"delta_c = {out['delta_c']:.3g}",
                 f"zeta_c  = {re:.10g} {im:+.10g}i"]
        for k, regime in out.get("probes", {}).items():
            lines.append(f"kappa = {float(k):.10g}: {regime}")
        return "\n".join(lines)
    if cmd == "sweep":
        lines = []
        for b in out["branches"]:
            end = b["end"]
            state = "complete" if b["complete"] else f"LOST at {b['lost_at']:.6g}"
            lines.append(f"branch {b['branch']}: {b['samples']} samples, end {end['re']:.8g} {end['im']:+.4g}i ({state})")
        return "\n".join(lines + [f"wrote {f}" for f in out["files"]])
    if cmd == "discrete":
        key = "min_gap" if "min_gap" in out else "min_splitting"
        return "\n".join([f"{key} = {out[key]:.6g}"] + [f"wrote {f}" for f in out["files"]])
    if cmd == "selftest":
        return "all criteria passed" if out["passed"] else "some criteria FAILED"
    return json.dumps(out, indent=2)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        raw = parser.parse_args(argv)
        args = resolve(raw)
        _threads()
        report, code = COMMANDS[args.command](args)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except (ConfigError, DomainError) as exc:
        print(f"resonance-atlas: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResonanceError as exc:
        print(f"resonance-atlas: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out and args.command in ("find", "critical", "hydrogen", "selftest") and args.out != ".":
        os.makedirs(args.out, exist_ok=True)
        _atomic_write(os.path.join(args.out, f"{args.command}.json"), json.dumps(report, indent=2) + "\n")
    if args.json:
        print(json.dumps(report, indent=2))
    elif not args.quiet:
        print(_summary(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
