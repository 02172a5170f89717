"""Scenario configuration, presets and the ``strat-ipm`` command line."""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import os
import sys
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import analysis
from .errors import BlowUpError, ParameterError
from .operators import NormSpec, biot_savart, norm
from .propagator import (
    WitnessSpec,
    evolve_curves,
    gaussian_density,
    kernel_decay_ratio,
    plane_decay_curve,
    sharpness_witness,
)
from .solver import InitialData, SigmaSpec, SolverConfig, make_domain, run

EXIT_PASS, EXIT_CONFIG, EXIT_BLOWUP, EXIT_LEDGER, EXIT_IO, EXIT_PREDICTION = 0, 1, 2, 3, 4, 5
KINDS = ("linear", "solver", "profile", "mean-laws", "plane", "inequalities")


class ConfigError(ValueError):
    """Invalid scenario file (unknown key, bad value or violated invariant)."""


@dataclass
class Scenario:
    id: str
    kind: str = "solver"
    description: str = ""
    claim: str = ""
    config: SolverConfig | None = None
    params: dict = field(default_factory=dict)
    predictions: tuple = ()
    window: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"scenario kind must be one of {KINDS}")
        self.predictions = tuple(self.predictions)
        if self.window is not None:
            self.window = tuple(float(w) for w in self.window)


@dataclass
class ScenarioResult:
    exit_code: int
    lines: list
    curves: dict
    status: str = "completed"


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_SOLVER_KEYS = {f.name for f in fields(SolverConfig)} - {"initial", "sigma"}
_INITIAL_KEYS = {f.name for f in fields(InitialData)}
_SIGMA_KEYS = {f.name for f in fields(SigmaSpec)}
_PARAM_TYPES = {
    "Nt_min": float, "Nt_max": float, "samples": int, "N": float, "density": str, "eps": float,
    "s": float, "j": "ints", "norms": "strs", "xi_max": float, "width": float, "kernel_s": float,
    "spectra": int, "M": "floats", "commutator_s": float, "commutator_K": int, "ensemble": int,
    "convolution_s": float, "exponents": "floats", "anisotropic": bool, "seed": int,
    "two_route_tol": float, "drift_tol": float, "mean_tol": float, "u1_tol": float,
    "strip_modes": "ints", "strip_T": float, "variation_max": float,
}


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _parse_ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _coerce(kind, text):
    if kind is bool:
        return _parse_bool(text)
    if kind == "floats":
        return _parse_floats(text)
    if kind == "ints":
        return _parse_ints(text)
    if kind == "strs":
        return tuple(v.strip() for v in text.split(",") if v.strip())
    return kind(text)


_SOLVER_TYPES = {
    "domain": str, "N": float, "N_ratio": float, "modes": "ints", "points": "ints", "length": float,
    "m": int, "dt": float, "cfl_safety": float, "dt_max": float, "ndt_max": float, "T": float,
    "Nt_final": float, "snapshots": "snapshots", "dealias": bool, "nonlinear": bool,
    "blowup_factor": float, "store_fields": bool,
}
_INITIAL_TYPES = {
    "kind": str, "amplitude": float, "band": int, "tail": float, "horizontal": int, "horizontal_min": int,
    "zero_horizontal_mean": bool, "mean": float, "seed": int,
}
_SIGMA_TYPES = {"shape": str, "amplitude": float, "width": float}


def _section_values(parser, section, types, context):
    out = {}
    if not parser.has_section(section):
        return out
    for key, text in parser.items(section):
        if key not in types:
            raise ConfigError(f"{context}: unknown key {key!r} in section [{section}]")
        if text.strip().lower() == "none":
            out[key] = None
            continue
        kind = types[key]
        try:
            if kind == "snapshots":
                vals = _parse_floats(text)
                out[key] = int(vals[0]) if len(vals) == 1 and "." not in text else vals
            else:
                out[key] = _coerce(kind, text)
        except ValueError as exc:
            raise ConfigError(f"{context}: bad value for [{section}] {key}: {exc}") from exc
    return out


def parse_config(source):
    """Parse a scenario from a path or from the text of a key-value document."""
    context = "<string>"
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        context = str(source)
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = str(source)
    stripped = [ln for ln in text.splitlines() if ln.strip() and not ln.strip().startswith(("#", ";"))]
    if stripped and not stripped[0].lstrip().startswith("["):
        text = "[solver]\n" + text
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string(text, source=context)
    except configparser.Error as exc:
        raise ConfigError(f"{context}: {exc}") from exc
    allowed = {"scenario", "solver", "initial", "sigma", "params", "predictions"}
    for section in parser.sections():
        if section not in allowed:
            raise ConfigError(f"{context}: unknown section [{section}]")
    scen = _section_values(parser, "scenario", {"id": str, "kind": str, "description": str, "claim": str,
                                                "window": "floats"}, context)
    solver = _section_values(parser, "solver", dict(_SOLVER_TYPES, K="ints"), context)
    initial = _section_values(parser, "initial", _INITIAL_TYPES, context)
    sigma = _section_values(parser, "sigma", _SIGMA_TYPES, context)
    params = _section_values(parser, "params", _PARAM_TYPES, context)
    predictions = []
    if parser.has_section("predictions"):
        for key, text in parser.items("predictions"):
            parts = text.split(None, 3)
            try:
                kind, exponent, tol = parts[0], float(parts[1]), float(parts[2])
            except (IndexError, ValueError) as exc:
                raise ConfigError(f"{context}: prediction {key!r} must read '<equal|upper> <exponent> <tol> [claim]'") from exc
            claim = parts[3] if len(parts) > 3 else ""
            try:
                predictions.append(analysis.RatePrediction(key, exponent, tol, kind, claim))
            except ParameterError as exc:
                raise ConfigError(f"{context}: prediction {key!r}: {exc}") from exc
    if "K" in solver:
        solver["modes"] = solver.pop("K")
    if "modes" in solver and len(solver["modes"]) == 1:
        solver["modes"] = (solver["modes"][0],) * 2
    kind = scen.get("kind", "solver")
    try:
        if kind in ("plane", "inequalities") and not (solver or initial or sigma):
            config = None
        else:
            config = SolverConfig(
                **solver,
                initial=InitialData(**initial),
                sigma=SigmaSpec(**sigma) if sigma else None,
            )
        scenario = Scenario(
            id=scen.get("id", "custom"),
            kind=kind,
            description=scen.get("description", ""),
            claim=scen.get("claim", ""),
            config=config,
            params=params,
            predictions=tuple(predictions),
            window=scen.get("window"),
        )
    except (ParameterError, TypeError) as exc:
        raise ConfigError(f"{context}: {exc}") from exc
    return scenario


def emit_config(scenario):
    """Serialize a scenario to the key-value format read by :func:`parse_config`."""
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    parser["scenario"] = {"id": scenario.id, "kind": scenario.kind}
    if scenario.description:
        parser["scenario"]["description"] = scenario.description
    if scenario.claim:
        parser["scenario"]["claim"] = scenario.claim
    if scenario.window is not None:
        parser["scenario"]["window"] = _fmt(scenario.window)
    cfg = scenario.config
    if cfg is not None:
        parser["solver"] = {}
        for name in sorted(_SOLVER_KEYS):
            value = getattr(cfg, name)
            parser["solver"][name] = "none" if value is None else _fmt(value)
        parser["initial"] = {name: ("none" if getattr(cfg.initial, name) is None else _fmt(getattr(cfg.initial, name)))
                             for name in sorted(_INITIAL_KEYS)}
        if cfg.sigma is not None:
            parser["sigma"] = {name: _fmt(getattr(cfg.sigma, name)) for name in sorted(_SIGMA_KEYS)}
    if scenario.params:
        parser["params"] = {k: _fmt(v) for k, v in sorted(scenario.params.items())}
    if scenario.predictions:
        parser["predictions"] = {
            p.observable: f"{p.kind} {p.exponent!r} {p.tol!r}" + (f" {p.claim}" if p.claim else "")
            for p in scenario.predictions
        }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


def _p(observable, exponent, tol, kind="equal", claim=""):
    return analysis.RatePrediction(observable, exponent, tol, kind, claim)


def _presets():
    m = 4
    eps = 0.05
    witness_preds = []
    for j in (0, 1):
        witness_preds.append(_p(f"L1_j{j}", -(j / 2 + 0.25 + eps), eps + 0.02))
        witness_preds.append(_p(f"L2_j{j}", -(j / 2 + eps), eps + 0.02))
    return [
        Scenario(
            "torus-linear-rates", "linear",
            "Exact linear propagation of critical-tail data on the torus (4 horizontal, 1024 vertical modes).",
            "torus L2 decay table: theta ~ (1+Nt)^(-m/2), u ~ (1+Nt)^(-(m+1)/2), u2 ~ (1+Nt)^(-(m+2)/2)",
            SolverConfig(domain="torus", N=1.0, modes=(4, 1024), nonlinear=False,
                         initial=InitialData("algebraic", horizontal=4, seed=1)),
            {"Nt_min": 1.0, "Nt_max": 1000.0, "samples": 40},
            (_p("theta:L2", -m / 2, 0.15), _p("u:L2", -(m + 1) / 2, 0.15), _p("u2:L2", -(m + 2) / 2, 0.15)),
            (10.0, 1000.0),
        ),
        Scenario(
            "torus-nonlinear-profile", "profile",
            "Small-data nonlinear torus run; asymptotic horizontal profile by two routes.",
            "convergence to a stratified profile sigma(x2) given by the time-integrated horizontal flux",
            SolverConfig(domain="torus", N_ratio=20.0, modes=(16, 128), Nt_final=200.0, snapshots=60, ndt_max=0.05,
                         initial=InitialData("algebraic", horizontal=4, seed=2)),
            {"two_route_tol": 1e-3},
            (_p("hmean-profile", -m / 2, 0.3, "upper"),),
            (10.0, 50.0),
        ),
        Scenario(
            "strip-rates", "linear",
            "Exact linear propagation of critical-tail data on the strip.",
            "strip L2 decay of the vertical velocity ~ (1+Nt)^(-(m+2)/2)",
            SolverConfig(domain="strip", N=1.0, modes=(4, 512), nonlinear=False,
                         initial=InitialData("algebraic", horizontal=4, seed=1)),
            {"Nt_min": 1.0, "Nt_max": 1000.0, "samples": 40},
            (_p("u2:L2", -(m + 2) / 2, 0.2), _p("theta:L2", -m / 2, 0.2), _p("u:L2", -(m + 1) / 2, 0.2)),
            (10.0, 1000.0),
        ),
        Scenario(
            "plane-quasilinear", "solver",
            "Nonlinear run on the periodized plane box L = 32 with a compact background profile.",
            "quasi-linear plane regime: ||u||_{H^m} ~ (1+Nt)^(-1/2), ||grad u2||_{H^(m-1)} ~ (1+Nt)^(-1)",
            SolverConfig(domain="plane_box", N_ratio=20.0, modes=(32, 1024), length=32.0, Nt_final=120.0,
                         snapshots=30, ndt_max=0.5, sigma=SigmaSpec("bump", 0.5, 4.0),
                         initial=InitialData("algebraic", horizontal=32, horizontal_min=32, seed=2)),
            {},
            (_p("u:Hm", -0.5, 0.2), _p("grad_u2:Hm-1", -1.0, 0.2)),
            (10.0, 100.0),
        ),
        Scenario(
            "sharpness-witness", "plane",
            "Continuous-frequency quadrature of the anisotropically singular witness density.",
            "sharpness of the plane rates: witness decays like (1+Nt)^(-(j/2+1/4+eps)) in L1 and (1+Nt)^(-(j/2+eps)) in L2",
            None,
            {"density": "witness", "eps": eps, "s": 3.0, "j": (0, 1), "norms": ("L1", "L2"), "xi_max": 2048.0,
             "Nt_min": 100.0, "Nt_max": 1e6, "samples": 25, "N": 1.0},
            tuple(witness_preds),
            (100.0, 1e6),
        ),
        Scenario(
            "kernel-decay", "plane",
            "L1 norm of the linear plane semigroup applied to an isotropic Gaussian.",
            "kernel bound: (1+Nt)^(1/4) times the L1 semigroup norm stays bounded by C ||f||_{H^s}",
            None,
            {"density": "gaussian", "width": 1.0, "j": (0,), "norms": ("L1",), "xi_max": 2048.0, "kernel_s": 2.0,
             "Nt_min": 1.0, "Nt_max": 1e6, "samples": 25, "N": 1.0, "variation_max": 3.0},
            (_p("L1_j0", -0.25, 0.02, "upper"),),
            (1.0, 1e6),
        ),
        Scenario(
            "inequalities", "inequalities",
            "Balancing inequality, commutator and convolution ensembles.",
            "balancing bound, anisotropic commutator estimate and weighted Young inequalities with resolution-stable constants",
            None,
            {"spectra": 1000, "M": tuple(float(2**k) for k in range(11)), "commutator_s": 3.0, "commutator_K": 32,
             "ensemble": 100, "convolution_s": 2.0, "exponents": (1.0, 1.0, 1.0), "seed": 0, "drift_tol": 0.2},
            (),
            None,
        ),
        Scenario(
            "mean-laws", "mean-laws",
            "Nonlinear torus run with nonzero mean and a strip run; mean-value laws.",
            "mean laws: torus mean decays like exp(-Nt), strip mean is conserved, horizontal mean of u vanishes",
            SolverConfig(domain="torus", N=1.0, modes=(16, 16), T=20.0, snapshots=21, ndt_max=0.05,
                         initial=InitialData("band", amplitude=0.5, band=4, mean=1.0, seed=4)),
            {"mean_tol": 1e-8, "u1_tol": 1e-12, "strip_modes": (8, 48), "strip_T": 20.0},
            (),
            None,
        ),
    ]


def presets():
    return {s.id: s for s in _presets()}


def list_scenarios():
    """Preset ids with the claim each reproduces."""
    return [(s.id, s.claim) for s in _presets()]


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


def _linear_curves(scenario):
    cfg = scenario.config
    prm = scenario.params
    domain = make_domain(cfg)
    theta0 = domain.initial(cfg.initial, cfg.m)
    N = cfg.N
    Nt = np.geomspace(prm.get("Nt_min", 1.0), prm.get("Nt_max", 1e3), int(prm.get("samples", 40)))
    l2 = NormSpec("L2")

    def u_l2(f):
        vel = biot_savart(f)
        return math.hypot(norm(vel.u1, l2), norm(vel.u2, l2))

    observables = {
        "theta:L2": lambda f: norm(f, l2),
        "u:L2": u_l2,
        "u2:L2": lambda f: norm(biot_savart(f).u2, l2),
    }
    return evolve_curves(theta0, N, Nt / N, observables)


def _plane_curves(scenario):
    prm = scenario.params
    N = prm.get("N", 1.0)
    from .fields import PlaneQuadrature

    quad = PlaneQuadrature(xi_max=prm.get("xi_max", 2048.0))
    Nt = np.geomspace(prm.get("Nt_min", 1.0), prm.get("Nt_max", 1e6), int(prm.get("samples", 25)))
    times = Nt / N
    curves = {}
    for j in prm.get("j", (0,)):
        if prm.get("density", "gaussian") == "witness":
            density = sharpness_witness(WitnessSpec(prm.get("eps", 0.05), prm.get("s", 3.0), j))
        else:
            density = gaussian_density(prm.get("width", 1.0))
        for kind in prm.get("norms", ("L1",)):
            curves[f"{kind}_j{j}"] = plane_decay_curve(density, N, times, kind, j, quad)
    if prm.get("density") == "gaussian":
        curves["kernel_ratio"] = kernel_decay_ratio(gaussian_density(prm.get("width", 1.0)), N, times,
                                                    prm.get("kernel_s", 2.0), quad)
    return curves


def _line(passed, text):
    return f"{'PASS' if passed else 'FAIL'} {text}"


def _status_code(status):
    if status == "blow_up":
        return EXIT_BLOWUP
    if status == "ledger_violation":
        return EXIT_LEDGER
    return EXIT_PASS


def execute(scenario):
    """Run a scenario in memory; returns a :class:`ScenarioResult`."""
    kind = scenario.kind
    lines, curves, status = [], {}, "completed"
    window = scenario.window or (10.0, 1e3)
    if kind == "linear":
        curves = _linear_curves(scenario)
        lines += [c.line() for c in analysis.check_predictions(curves, scenario.predictions, window)]
    elif kind == "plane":
        curves = _plane_curves(scenario)
        lines += [c.line() for c in analysis.check_predictions(curves, scenario.predictions, window)]
        if "kernel_ratio" in curves and "variation_max" in scenario.params:
            vals = curves["kernel_ratio"].values
            variation = float(vals.max() / vals.min())
            limit = scenario.params["variation_max"]
            lines.append(_line(variation < limit, f"kernel_ratio variation {variation:.4g} (< {limit:g} required)"))
    elif kind in ("solver", "profile", "mean-laws"):
        traj = run(scenario.config)
        status = traj.status
        curves = dict(traj.curves)
        lines.append(f"INFO run status {traj.status}" + (f" at t={traj.status_time:.6g}" if traj.status_time else ""))
        lines.append(f"INFO ledger total/bound {traj.ledger.total / traj.ledger.bound:.6g}")
        if traj.completed:
            if kind == "solver":
                lines += analysis.build_report(traj, scenario.predictions, window).lines()
            elif kind == "profile":
                prof = analysis.extract_profile(traj)
                curves["hmean-profile"] = prof.curve
                tol = scenario.params.get("two_route_tol", 1e-3)
                lines.append(_line(prof.relative_difference <= tol,
                                   f"profile two-route relative difference {prof.relative_difference:.3e} (<= {tol:g})"))
                lines += [c.line() for c in analysis.check_predictions(curves, scenario.predictions, window)]
            else:
                lines += _mean_law_lines(scenario, traj)
    elif kind == "inequalities":
        lines += _inequality_lines(scenario.params)
    failed = any(ln.startswith("FAIL") for ln in lines)
    code = _status_code(status)
    if code == EXIT_PASS and failed:
        code = EXIT_PREDICTION
    return ScenarioResult(code, lines, curves, status)


def _mean_law_lines(scenario, traj):
    prm = scenario.params
    tol, utol = prm.get("mean_tol", 1e-8), prm.get("u1_tol", 1e-12)
    rep = analysis.audit_mean_laws(traj)
    lines = [
        _line(rep.mean_violation <= tol, f"torus mean follows exp(-Nt) law: max relative deviation {rep.mean_violation:.3e}"),
        _line(rep.horizontal_velocity_mean <= utol, f"torus horizontal mean of u1: {rep.horizontal_velocity_mean:.3e}"),
    ]
    strip_cfg = replace(scenario.config, domain="strip", modes=tuple(prm.get("strip_modes", (8, 48))),
                        T=prm.get("strip_T", scenario.config.T), points=None,
                        initial=replace(scenario.config.initial, mean=0.0, zero_horizontal_mean=False))
    straj = run(strip_cfg)
    srep = analysis.audit_mean_laws(straj)
    lines.append(_line(srep.mean_violation <= tol, f"strip mean conserved: max relative deviation {srep.mean_violation:.3e}"))
    lines.append(_line(srep.horizontal_velocity_mean <= utol, f"strip horizontal mean of u: {srep.horizontal_velocity_mean:.3e}"))
    return lines


def _inequality_lines(prm):
    rng = np.random.default_rng(prm.get("seed", 0))
    from .fields import TorusGrid

    grid = TorusGrid(8)
    spectra = [analysis.random_spectrum(grid, rng, rng.uniform(0, 6)) for _ in range(int(prm.get("spectra", 1000)))]
    bal = analysis.verify_balancing(spectra, prm.get("M", (1.0,)), 4)
    drift_tol = prm.get("drift_tol", 0.2)
    lines = [_line(bal.violations == 0, f"balancing: {bal.violations} violations in {len(bal.ratios)} checks, max ratio {bal.max_ratio:.6g}")]
    K = int(prm.get("commutator_K", 32))
    n = int(prm.get("ensemble", 100))
    com = analysis.verify_commutator(K, n, prm.get("commutator_s", 3.0), prm.get("seed", 0))
    lines.append(_line(com.finite and com.drift < drift_tol,
                       f"commutator: constant {com.extra['constant_K']:.6g} -> {com.extra['constant_2K']:.6g}, drift {com.drift:.4f}"))
    ex = tuple(prm.get("exponents", (1.0, 1.0, 1.0)))
    for aniso in (False, True):
        conv = analysis.verify_convolution(K, n, prm.get("convolution_s", 2.0), ex, prm.get("seed", 0), anisotropic=aniso)
        lines.append(_line(conv.finite and conv.drift < drift_tol,
                           f"{conv.name}: constant {conv.extra['constant_K']:.6g} -> {conv.extra['constant_2K']:.6g}, drift {conv.drift:.4f}"))
    return lines


def write_curves(path, curves):
    labels = list(curves)
    if not labels:
        return
    base = curves[labels[0]]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "Nt", *labels])
        for k in range(len(base.t)):
            row = [base.t[k], base.Nt[k]] + [curves[lab].values[k] if len(curves[lab].t) == len(base.t) else float("nan")
                                             for lab in labels]
            writer.writerow([f"{v:.17g}" for v in row])


def run_scenario(scenario, out=None, quiet=False):
    """Execute a scenario, write ``<id>.csv``, ``<id>.summary.txt`` and ``<id>.cfg``; return the exit code."""
    try:
        result = execute(scenario)
    except BlowUpError as exc:
        result = ScenarioResult(EXIT_BLOWUP, [f"FAIL blow-up: {exc}"], {}, "blow_up")
    header = [f"scenario: {scenario.id}", f"claim: {scenario.claim}", f"description: {scenario.description}"]
    verdict = "PASS" if result.exit_code == EXIT_PASS else "FAIL"
    text = "\n".join(header + result.lines + [f"result: {verdict} (exit {result.exit_code})"]) + "\n"
    if out is not None:
        try:
            os.makedirs(out, exist_ok=True)
            write_curves(os.path.join(out, f"{scenario.id}.csv"), result.curves)
            with open(os.path.join(out, f"{scenario.id}.summary.txt"), "w", encoding="utf-8") as fh:
                fh.write(text)
            with open(os.path.join(out, f"{scenario.id}.cfg"), "w", encoding="utf-8") as fh:
                fh.write(emit_config(scenario))
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
    if not quiet:
        sys.stdout.write(text)
    return result.exit_code


def _with_seed(scenario, seed):
    if seed is None:
        return scenario
    params = dict(scenario.params)
    if "seed" in params:
        params["seed"] = seed
    config = scenario.config
    if config is not None:
        config = replace(config, initial=replace(config.initial, seed=seed))
    return replace(scenario, config=config, params=params)


def main(argv=None):
    # shared flags are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=argparse.SUPPRESS, help="directory for CSV curves and summaries")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the random seed")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="suppress the summary on stdout")
    parser = argparse.ArgumentParser(prog="strat-ipm", parents=[common],
                                     description="Stratified IPM simulator and verification harness.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", parents=[common], help="run a scenario file")
    p_run.add_argument("config")
    p_pre = sub.add_parser("preset", parents=[common], help="run a named preset")
    p_pre.add_argument("id")
    sub.add_parser("list", help="list presets")
    args = parser.parse_args(argv)
    for name, default in (("out", None), ("seed", None), ("quiet", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if args.command == "list":
        for sid, claim in list_scenarios():
            print(f"{sid}\t{claim}")
        return EXIT_PASS
    try:
        if args.command == "run":
            if not os.path.exists(args.config):
                print(f"I/O error: no such file {args.config}", file=sys.stderr)
                return EXIT_IO
            scenario = parse_config(args.config)
        else:
            table = presets()
            if args.id not in table:
                print(f"unknown preset {args.id!r}; available: {', '.join(table)}", file=sys.stderr)
                return EXIT_CONFIG
            scenario = table[args.id]
        scenario = _with_seed(scenario, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_scenario(scenario, args.out, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
