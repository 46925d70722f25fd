"""Command-line entry point.

    multitime-rd [COMMAND] --config run.json --out results/ [--seed N] [--quiet]

The command is read from the config's ``command`` key unless given on the
command line. Exit status: 0 all checks pass, 1 a check failed, 2 bad
configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .constraints import (CATALOG_IDS, PARAMETER_SCHEMAS, ArbitraryFunction,
                          build_proposition_form, catalog_entry, default_grid, symmetry_orbit)
from .errors import ConfigError, MultitimeError
from .expr import CompiledExpression
from .fields import Grid, ScalarField, make_grid
from .pde import PDESpec, ReactionTerm, canonical_huxley, residual_arrays
from .report_io import dumps, format_float
from .simulate import RD1DProblem, march, measure_front_speed, reduce_to_characteristic
from .transforms import (FirstIntegral, characteristic_transform, check_first_integral,
                         log_transform, pullback_solution, scaling_normalize,
                         shift_to_wave_frame, time_rescale, verify_transform_system)
from .verify import FD_TOL, JET_TOL, residual_report, summarize
from .wave import WaveProblem, front_shoot, integrate_profile

log = logging.getLogger("multitime_rd")

COMMANDS = ("verify", "simulate", "transform", "profile", "catalog-list")
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


# -- config reading ----------------------------------------------------------

def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    if path.suffix.lower() in (".yaml", ".yml"):
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
            raise ConfigError(f"{where}: {getattr(exc, 'problem', exc)}") from exc
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc


def _need(doc: dict, key: str, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ConfigError(f"{where}.{key} is required")
    return doc[key]


def _as_float(value, where: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: expected a number, got {value!r}") from exc


def _pde(doc, where="pde") -> PDESpec:
    try:
        return PDESpec.from_dict(doc)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _grid(doc, where="grid") -> Grid:
    try:
        return make_grid(_need(doc, "ranges", where), _need(doc, "counts", where))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def expression_field(source: str, m: int) -> ScalarField:
    names = tuple(f"tau{i}" for i in range(1, m + 1)) + ("x",)
    expr = CompiledExpression(source, names)

    def func(tau, x):
        return expr(*tau, x) + 0.0 * x

    return ScalarField(func, m, name=f"expr({source})")


def build_solution(doc, where="solution") -> tuple[ScalarField, Grid | None]:
    """A field from a solution document, plus its default grid if it has one."""
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected a mapping")
    if "catalog" in doc:
        params = dict(doc.get("params", {}))
        if "P" in params:
            params["P"] = ArbitraryFunction.from_dict(params["P"])
        try:
            entry = catalog_entry(doc["catalog"], mask=doc.get("mask"), **params)
        except ConfigError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        return entry.field, entry.grid
    if "expression" in doc:
        m = int(doc.get("m", 1))
        return expression_field(str(doc["expression"]), m), None
    if "proposition" in doc:
        sub = doc["proposition"]
        phi, grid = build_solution(_need(sub, "phi", f"{where}.proposition"),
                                   f"{where}.proposition.phi")
        P = ArbitraryFunction.from_dict(sub.get("P", 0.0))
        k = _as_float(sub.get("k", 0.0), f"{where}.proposition.k")
        return build_proposition_form(phi, k, P, phi.m), grid
    if "orbit" in doc:
        sub = doc["orbit"]
        base, grid = build_solution(_need(sub, "base", f"{where}.orbit"), f"{where}.orbit.base")
        tau0 = sub.get("tau0", [0.0] * base.m)
        return symmetry_orbit(base, tau0, _as_float(sub.get("x0", 0.0), f"{where}.orbit.x0"),
                              bool(sub.get("reflect", False))), grid
    raise ConfigError(f"{where}: expected one of 'catalog', 'expression', 'proposition', 'orbit'")


# -- commands ----------------------------------------------------------------

def _write_residual_csv(path: Path, pde, fld, grid, method):
    tau, x = grid.split()
    keep = ~fld.excluded_mask(tau, x)
    with np.errstate(all="ignore"):
        res = residual_arrays(pde, fld, tuple(t[keep] for t in tau), x[keep], method)
    names = [f"tau{i}" for i in range(1, pde.m + 1)] + ["x", "residual"]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        cols = [t[keep] for t in tau] + [x[keep], np.asarray(res) + 0 * x[keep]]
        for row in zip(*cols):
            writer.writerow([format(float(v), ".16e") for v in row])


def cmd_verify(cfg: dict, out: Path, rng: np.random.Generator) -> dict:
    fld, default = build_solution(_need(cfg, "solution", "config"))
    pde = _pde(cfg["pde"]) if "pde" in cfg else canonical_huxley(fld.m)
    if pde.m != fld.m:
        raise ConfigError(f"pde.m = {pde.m} but the solution has {fld.m} times")
    grid = _grid(cfg["grid"]) if "grid" in cfg else (default or default_grid("rational_m1", pde.m))
    if grid.ndim != pde.m + 1:
        raise ConfigError(f"grid has {grid.ndim} axes, expected pde.m + 1 = {pde.m + 1}")
    method = cfg.get("method", "jet")
    if method not in ("jet", "fd"):
        raise ConfigError("method must be 'jet' or 'fd'")
    tol = _as_float(cfg.get("tolerance", JET_TOL if method == "jet" else FD_TOL), "tolerance")
    reports = [residual_report(pde, fld, grid, tol, method, label="grid")]
    n_random = int(cfg.get("random_points", 0))
    if n_random > 0:
        lo = np.array([r[0] for r in grid.ranges])
        hi = np.array([r[1] for r in grid.ranges])
        pts = rng.uniform(lo, hi, size=(n_random, grid.ndim))
        tau, x = tuple(pts[:, i] for i in range(pde.m)), pts[:, -1]
        keep = ~fld.excluded_mask(tau, x)
        tau_k = tuple(t[keep] for t in tau)
        with np.errstate(all="ignore"):
            vals = residual_arrays(pde, fld, tau_k, x[keep], method)
        reports.append(summarize(vals, tau_k + (x[keep],), int((~keep).sum()), tol,
                                 {"random_points": n_random}, "random points"))
    _write_residual_csv(out / "residual.csv", pde, fld, grid, method)
    return {"solution": fld.name, "pde": pde.to_dict(), "method": method,
            "reports": [r.to_dict() for r in reports],
            "pass": all(r.passed for r in reports)}


def cmd_simulate(cfg: dict, out: Path, rng) -> dict:
    fld, _ = build_solution(_need(cfg, "solution", "config"))
    pde = _pde(cfg["pde"]) if "pde" in cfg else canonical_huxley(fld.m)
    sim = _need(cfg, "simulate", "config")
    template = reduce_to_characteristic(pde, sim.get("omega", [0.0] * (pde.m - 1)))
    problem = RD1DProblem(template, fld, tuple(_need(sim, "x_range", "simulate")),
                          tuple(sim.get("s_range", [0.0, 1.0])))
    dx = _as_float(_need(sim, "dx", "simulate"), "simulate.dx")
    ds = _as_float(sim.get("ds", dx * dx / (4 * pde.mu)), "simulate.ds")
    result = march(problem, dx, ds, sim.get("scheme", "explicit_ftcs"))
    result.to_csv(out / "simulation.csv")
    max_error = _as_float(sim.get("max_error", 5e-3), "simulate.max_error")
    doc = {"solution": fld.name, "pde": pde.to_dict(), "scheme": result.meta,
           "linf_error": result.linf_error, "max_error": max_error,
           "error_pass": result.linf_error <= max_error}
    passed = doc["error_pass"]
    if "level" in sim:
        speed = measure_front_speed(result, _as_float(sim["level"], "simulate.level"))
        doc["front_speed"] = speed
        if "expected_speed" in sim:
            tol = _as_float(sim.get("speed_tol", 2e-2), "simulate.speed_tol")
            doc["speed_pass"] = abs(speed - _as_float(sim["expected_speed"], "expected_speed")) <= tol
            passed = passed and doc["speed_pass"]
    doc["pass"] = passed
    return doc


def _fn(source: str, names, where):
    try:
        expr = CompiledExpression(str(source), tuple(names))
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    return expr


def _transform(doc: dict, m: int, where: str):
    kind = _need(doc, "kind", where)
    if kind == "log":
        return log_transform(m, doc.get("domain"))
    if kind == "scaling":
        return scaling_normalize(_as_float(_need(doc, "mu", where), f"{where}.mu"),
                                 _as_float(_need(doc, "a", where), f"{where}.a"),
                                 _as_float(_need(doc, "b", where), f"{where}.b"), m)
    if kind == "shift_y":
        return shift_to_wave_frame(_as_float(doc.get("k", 0.0), f"{where}.k"), m)
    if kind == "time_rescale":
        hs = [_fn(s, ("t",), f"{where}.h[{i}]") for i, s in enumerate(_need(doc, "h", where))]
        return time_rescale(hs, _need(doc, "domain", where))
    raise ConfigError(f"{where}.kind: unknown transformation {kind!r}")


def _characteristic(doc: dict, cfg: dict, out: Path) -> dict:
    where = "transform.characteristic"
    names = ("t1", "t2")
    h1e = _fn(_need(doc, "h1", where), names, f"{where}.h1")
    h2e = _fn(_need(doc, "h2", where), names, f"{where}.h2")
    h1 = lambda t: h1e(*t) + 0.0 * t[0]  # noqa: E731
    h2 = lambda t: h2e(*t) + 0.0 * t[0]  # noqa: E731
    domain = _need(doc, "domain", where)
    fi_src = _need(doc, "first_integral", where)
    if fi_src == "traced":
        first = FirstIntegral.traced(h1, h2, float(domain[0][0]))
    else:
        fie = _fn(fi_src, names, f"{where}.first_integral")
        first = FirstIntegral.closed(lambda t: fie(*t) + 0.0 * t[0])
    w1e = _fn(_need(doc, "W1", where), ("s",), f"{where}.W1")
    w2e = _fn(_need(doc, "W2", where), ("s",), f"{where}.W2")
    integral = None
    if "integral" in doc:
        ie = _fn(doc["integral"], names, f"{where}.integral")
        integral = lambda t: ie(*t) + 0.0 * t[0]  # noqa: E731
    T = characteristic_transform(h1, h2, first, lambda s: w1e(s) + 0.0 * s,
                                 lambda s: w2e(s) + 0.0 * s, domain, integral)
    grid = _grid(cfg["grid"]) if "grid" in cfg else make_grid(domain, [20, 20])
    tol = _as_float(cfg.get("tolerance", JET_TOL), "tolerance")
    reports = [verify_transform_system(h1, h2, T, grid, tol),
               check_first_integral(h1, h2, first, grid, tol)]
    return {"transformation": T.to_dict(), "reports": [r.to_dict() for r in reports],
            "pass": all(r.passed for r in reports)}


def cmd_transform(cfg: dict, out: Path, rng) -> dict:
    sub = _need(cfg, "transform", "config")
    if "characteristic" in sub:
        return _characteristic(sub["characteristic"], cfg, out)
    target, _ = build_solution(_need(cfg, "solution", "config"))
    pde = _pde(_need(cfg, "pde", "config"))
    chain = [_transform(d, pde.m, f"transform.chain[{i}]")
             for i, d in enumerate(_need(sub, "chain", "transform"))]
    fld = target
    for T in reversed(chain):
        fld = pullback_solution(T, fld)
    grid = _grid(_need(cfg, "grid", "config"))
    tol = _as_float(cfg.get("tolerance", JET_TOL), "tolerance")
    rep = residual_report(pde, fld, grid, tol, label="pullback")
    _write_residual_csv(out / "residual.csv", pde, fld, grid, "jet")
    return {"chain": [T.to_dict() for T in chain], "solution": target.name,
            "pde": pde.to_dict(), "reports": [rep.to_dict()], "pass": rep.passed}


def cmd_profile(cfg: dict, out: Path, rng) -> dict:
    sub = _need(cfg, "profile", "config")
    reaction = ReactionTerm.from_dict(sub.get("reaction", "huxley_normalized"))
    mu = _as_float(sub.get("mu", 1.0), "profile.mu")
    mode = sub.get("mode", "integrate")
    doc = {"mode": mode, "mu": mu, "reaction": reaction.to_dict()}
    if mode == "shoot":
        c, prof = front_shoot(mu, reaction, _as_float(_need(sub, "u_minus", "profile"), "u_minus"),
                              _as_float(_need(sub, "u_plus", "profile"), "u_plus"),
                              _need(sub, "bracket", "profile"),
                              _as_float(sub.get("step", 0.02), "profile.step"))
        doc.update(speed=c, gap=prof.meta["gap"], samples=len(prof.y))
        passed = True
        if "expected_speed" in sub:
            tol = _as_float(sub.get("speed_tol", 1e-3), "profile.speed_tol")
            passed = abs(c - _as_float(sub["expected_speed"], "expected_speed")) <= tol
        doc["pass"] = passed
    elif mode == "integrate":
        prob = WaveProblem(mu, _as_float(sub.get("k", 0.0), "profile.k"), reaction)
        prof = integrate_profile(prob, _as_float(_need(sub, "u0", "profile"), "u0"),
                                 _as_float(_need(sub, "du0", "profile"), "du0"),
                                 _need(sub, "y_range", "profile"),
                                 _as_float(sub.get("step", 1e-3), "profile.step"),
                                 sub.get("y0"))
        doc.update(k=prob.k, samples=len(prof.y), blown_up=prof.blown_up,
                   max_ode_residual=float(np.max(np.abs(prof.ode_residual(prob)))))
        passed = not prof.blown_up
        if "exact" in sub:
            exact = _fn(sub["exact"], ("y",), "profile.exact")
            err = float(np.max(np.abs(prof.u - (exact(prof.y) + 0.0 * prof.y))))
            tol = _as_float(sub.get("max_error", 1e-6), "profile.max_error")
            doc.update(max_error_vs_exact=err, max_error=tol)
            passed = passed and err <= tol
        doc["pass"] = passed
    else:
        raise ConfigError("profile.mode must be 'integrate' or 'shoot'")
    prof.to_csv(out / "profile.csv")
    return doc


def cmd_catalog_list(cfg: dict, out: Path, rng) -> dict:
    return {"entries": [{"id": cid, "parameters": PARAMETER_SCHEMAS[cid]} for cid in CATALOG_IDS],
            "pass": True}


HANDLERS = {"verify": cmd_verify, "simulate": cmd_simulate, "transform": cmd_transform,
            "profile": cmd_profile, "catalog-list": cmd_catalog_list}


# -- text rendering ----------------------------------------------------------

def render_text(command: str, doc: dict) -> str:
    lines = [f"command: {command}   pass: {'yes' if doc.get('pass') else 'NO'}"]
    if command == "catalog-list":
        for e in doc["entries"]:
            params = ", ".join(f"{k}: {v}" for k, v in e["parameters"].items())
            lines.append(f"  {e['id']:<16} {params}")
        return "\n".join(lines)
    if "reports" in doc:
        lines.append(f"  {'label':<22}{'pass':<6}{'max|res|':>24}{'rms':>24}{'evaluated':>11}"
                     f"{'masked':>8}")
        for r in doc["reports"]:
            lines.append(f"  {r['label'][:21]:<22}{'yes' if r['pass'] else 'NO':<6}"
                         f"{format_float(r['max_abs_residual']):>24}"
                         f"{format_float(r['rms_residual']):>24}"
                         f"{r['points_evaluated']:>11}{r['points_masked']:>8}")
    for key in ("linf_error", "front_speed", "speed", "gap", "max_error_vs_exact"):
        if key in doc:
            lines.append(f"  {key:<22}{format_float(doc[key])}")
    return "\n".join(lines)


# -- entry point -------------------------------------------------------------

def run(config: dict, out: Path, seed: int = 0) -> tuple[int, dict]:
    """Execute one command; returns (exit status, report document)."""
    command = config.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {list(COMMANDS)}, got {command!r}")
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    body = HANDLERS[command](config, out, rng)
    doc = {"command": command, "version": __version__, "seed": seed, **body}
    doc["pass"] = bool(body.get("pass", False))
    (out / "report.json").write_text(dumps(doc) + "\n")
    return (EXIT_PASS if doc["pass"] else EXIT_FAIL), doc


def _error_doc(exc: MultitimeError) -> dict:
    return {"error": exc.code, "exit_status": exc.exit_status, "message": str(exc)}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="multitime-rd", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="overrides the config's 'command' key")
    parser.add_argument("--config", help="JSON or YAML run configuration")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, default=0, help="seed for random test points")
    parser.add_argument("--quiet", action="store_true", help="suppress the text summary")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    out = Path(args.out)
    try:
        if args.config:
            config = load_config(args.config)
        elif args.command == "catalog-list":
            config = {}
        else:
            raise ConfigError("--config is required for this command")
        if args.command:
            config = {**config, "command": args.command}
        try:
            status, doc = run(config, out, args.seed)
        except (ValueError, TypeError, KeyError) as exc:
            # malformed values that slipped past the schema checks
            raise ConfigError(f"invalid configuration: {exc}") from exc
    except MultitimeError as exc:
        err = _error_doc(exc)
        print(dumps(err), file=sys.stderr)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "report.json").write_text(dumps(err) + "\n")
        except OSError:
            pass
        return exc.exit_status
    if not args.quiet:
        print(render_text(doc["command"], doc))
    return status


if __name__ == "__main__":
    sys.exit(main())
