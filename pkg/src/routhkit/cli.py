"""Command-line front end.

Subcommands:

* ``simulate``    - integrate the full Euler-Lagrange field,
* ``reduce``      - integrate the Lagrange-Routh field on N_mu/G_mu,
* ``reconstruct`` - rebuild a full trajectory from a reduced run,
* ``compare``     - run both pipelines from one state and compare.

Systems are selected by name (``se2``, ``classical-demo``, ``wong``) or
by a config file.  Config files are INI-style with sections [system],
[connection], [run], [tolerances]; arrays use bracketed comma form,
e.g. ``k_ab = [[1.0]]``.  Exit codes: 0 success, 1 tolerance failure,
2 usage/config error, 3 numerical failure.  Errors are reported as one
JSON object on stderr.  The log level is set by ROUTHKIT_LOG.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import json
import logging
import os
import sys as _sys
from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np

from .bundle import FullState
from .errors import (ChartError, DomainError, IntegrationError, LevelSetError,
                     RegularityError, RouthkitError, SpecError)
from .integrate import Trajectory
from .lagrangian import LagrangianSystem
from .pipelines import (compare_pipelines, integrate_reduced, reduce_full_state,
                        simulate_full)
from .reconstruct import LevelConnectionKind, reconstruct
from .routh import MomentumLevel, ReducedState, solve_level_set
from . import systems as builtin

logger = logging.getLogger("routhkit")

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


@dataclass
class SystemBundle:
    """A runnable system: dynamics, momentum level, and IC builders."""

    name: str
    system: LagrangianSystem
    level: MomentumLevel
    full_ic: Callable[[Dict[str, float]], FullState]
    params: Dict[str, float] = field(default_factory=dict)

    def reduced_ic(self, params: Dict[str, float]) -> ReducedState:
        return reduce_full_state(self.level, self.full_ic(params))


# ---------------------------------------------------------------------------
# built-in registry

def _build_se2(params: Dict[str, float]) -> SystemBundle:
    A = params.get("A", 0.5)
    mu = params.get("mu", 0.3)
    se2 = builtin.make_se2(A, mu)

    def full_ic(p: Dict[str, float]) -> FullState:
        ic = builtin.SE2Initial(
            x0=p.get("x0", 0.0), xdot0=p.get("xdot0", 1.0),
            y0=p.get("y0", 0.0), thetadot0=p.get("thetadot0", 1.0),
        )
        raw_keys = {"ydot0", "zdot0", "z0", "theta0"}
        if raw_keys & p.keys():
            c = se2.derived_constants(ic)
            return se2.state_from_raw(
                ic.x0, ic.xdot0, ic.y0, p.get("z0", c["z0"]), p.get("theta0", 0.0),
                p.get("ydot0", c["ydot0"]), p.get("zdot0", c["zdot0"]), ic.thetadot0,
            )
        return se2.initial_state(ic)

    return SystemBundle("se2", se2.system, se2.level, full_ic, params)


def _build_classical(params: Dict[str, float]) -> SystemBundle:
    demo = builtin.make_classical_demo(params.get("mu", 0.7))

    def full_ic(p: Dict[str, float]) -> FullState:
        x = np.array([p.get("x1", 0.6), p.get("x2", -0.4)])
        vb = np.array([p.get("v1", 0.4), p.get("v2", 0.3)])
        th = np.array([p.get("th1", 0.2)])
        vg = solve_level_set(demo.system, demo.level, x, th, vb)
        return FullState(x, th, vb, vg)

    return SystemBundle("classical-demo", demo.system, demo.level, full_ic, params)


def _build_wong(params: Dict[str, float]) -> SystemBundle:
    wong = builtin.make_wong_demo(params.get("mu1", 0.12))

    def full_ic(p: Dict[str, float]) -> FullState:
        x = np.array([p.get("x1", 0.2), p.get("x2", -0.3)])
        vb = np.array([p.get("v1", 0.3), p.get("v2", 0.25)])
        th = np.array([p.get("phi", 0.1), p.get("s1", 0.4), p.get("s2", -0.25)])
        vg = solve_level_set(wong.system, wong.level, x, th, vb)
        return FullState(x, th, vb, vg)

    return SystemBundle("wong", wong.system, wong.level, full_ic, params)


BUILTIN_SYSTEMS = {
    "se2": _build_se2,
    "classical-demo": _build_classical,
    "wong": _build_wong,
}


# ---------------------------------------------------------------------------
# config files

def _parse_value(text: str):
    text = text.strip()
    if text.startswith("["):
        try:
            return np.asarray(ast.literal_eval(text), dtype=float)
        except (ValueError, SyntaxError) as exc:
            raise SpecError(f"unparseable array: {text!r}") from exc
    try:
        return float(text)
    except ValueError:
        return text


def load_config(path: str) -> Dict[str, Dict[str, object]]:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise SpecError(f"config file not found: {path}")
    out: Dict[str, Dict[str, object]] = {}
    for section in parser.sections():
        out[section.lower()] = {k: _parse_value(v) for k, v in parser.items(section)}
    return out


def _config_system(cfg: Dict[str, Dict[str, object]], params: Dict[str, float]) -> SystemBundle:
    sysc = dict(cfg.get("system", {}))
    name = sysc.pop("name", None)
    if name is not None:
        merged = {k: float(v) for k, v in sysc.items() if isinstance(v, (int, float))}
        merged.update(params)
        return build_system(str(name), merged)
    kind = sysc.get("kind")
    if kind == "abelian":
        return _config_abelian(sysc, cfg, params)
    if kind == "wong":
        return _config_wong(sysc, cfg, params)
    raise SpecError(f"config [system] needs name=<builtin> or kind=abelian|wong, got {kind!r}")


def _lin_field(sec: Dict[str, object], prefix: str, required_shape) -> builtin.MatrixField:
    const = sec.get(f"{prefix}_const", sec.get(prefix))
    if const is None:
        raise SpecError(f"config missing {prefix}(_const)")
    const = np.asarray(const, dtype=float)
    if required_shape is not None and const.shape != required_shape:
        raise SpecError(f"{prefix} must have shape {required_shape}")
    lin = sec.get(f"{prefix}_lin")
    return builtin.linear_field(const, None if lin is None else np.asarray(lin, dtype=float))


def _config_abelian(sysc, cfg, params) -> SystemBundle:
    n = int(sysc.get("base_dim", 0))
    m = int(sysc.get("group_dim", 0))
    if n <= 0 or m <= 0:
        raise SpecError("abelian config needs base_dim and group_dim")
    k_ij = _lin_field(sysc, "k_ij", (n, n))
    k_ia = _lin_field(sysc, "k_ia", (n, m))
    k_ab = _lin_field(sysc, "k_ab", (m, m))
    weights = np.asarray(sysc.get("potential_quad", np.zeros(n)), dtype=float)
    pot = builtin.ScalarField(lambda x: 0.5 * float(weights @ (x * x)),
                              lambda x: weights * x)
    samples = np.vstack([np.zeros(n), 0.5 * np.ones(n), -0.5 * np.ones(n)])
    system = builtin.make_classical(k_ij, k_ia, k_ab, pot, base_dim=n,
                                    sample_points=samples, name="abelian-config")
    mu = np.asarray(sysc.get("mu", np.zeros(m)), dtype=float)
    from .lie import aligned_isotropy_split
    level = MomentumLevel(mu, aligned_isotropy_split(system.chart.algebra, mu, m))

    def full_ic(p: Dict[str, float]) -> FullState:
        x = np.array([p.get(f"x{i+1}", 0.0) for i in range(n)])
        vb = np.array([p.get(f"v{i+1}", 0.0) for i in range(n)])
        th = np.array([p.get(f"th{a+1}", 0.0) for a in range(m)])
        vg = solve_level_set(system, level, x, th, vb)
        return FullState(x, th, vb, vg)

    return SystemBundle("abelian-config", system, level, full_ic, params)


def _config_wong(sysc, cfg, params) -> SystemBundle:
    n = int(sysc.get("base_dim", 0))
    if n <= 0:
        raise SpecError("wong config needs base_dim")
    algebra = sysc.get("algebra", "su2")
    if algebra != "su2":
        raise SpecError("wong config supports algebra = su2 (cyclic so(3) basis)")
    chart = builtin.so3_product_chart()
    h = np.asarray(sysc.get("h", np.eye(3)), dtype=float)
    metric = _lin_field(sysc, "metric", (n, n))
    gamma = _lin_field(sysc, "gamma", (3, n))
    mu = np.asarray(sysc.get("mu", [0.1, 0.0, 0.0]), dtype=float)
    samples = np.vstack([np.zeros(n), 0.4 * np.ones(n), -0.4 * np.ones(n)])
    wong = builtin.make_wong(chart, n, metric, h, gamma, mu, n_A=1,
                             sample_points=samples, name="wong-config")

    def full_ic(p: Dict[str, float]) -> FullState:
        x = np.array([p.get(f"x{i+1}", 0.0) for i in range(n)])
        vb = np.array([p.get(f"v{i+1}", 0.1) for i in range(n)])
        th = np.array([p.get("phi", 0.0), p.get("s1", 0.3), p.get("s2", 0.0)])
        vg = solve_level_set(wong.system, wong.level, x, th, vb)
        return FullState(x, th, vb, vg)

    return SystemBundle("wong-config", wong.system, wong.level, full_ic, params)


def build_system(name: str, params: Dict[str, float]) -> SystemBundle:
    if name in BUILTIN_SYSTEMS:
        return BUILTIN_SYSTEMS[name](params)
    if os.path.exists(name):
        return _config_system(load_config(name), params)
    raise SpecError(f"unknown system: {name}")


# ---------------------------------------------------------------------------
# trajectory io

def _full_columns(sys: LagrangianSystem):
    return (["t"]
            + [f"x_{lbl}" for lbl in sys.base_labels]
            + [f"theta_{lbl}" for lbl in sys.group_labels]
            + [f"v_{lbl}" for lbl in sys.base_labels]
            + [f"w_{lbl}" for lbl in sys.group_labels])


def _reduced_columns(sys: LagrangianSystem, level: MomentumLevel):
    alpha = sys.group_labels[level.n_A:]
    return (["t"]
            + [f"x_{lbl}" for lbl in sys.base_labels]
            + [f"theta_{lbl}" for lbl in alpha]
            + [f"v_{lbl}" for lbl in sys.base_labels])


def write_trajectory(path: str, traj: Trajectory, columns, fmt: str, meta: dict):
    data = np.column_stack([traj.times, traj.states])
    names = list(columns) + list(traj.diagnostics.keys())
    if traj.diagnostics:
        data = np.column_stack([data] + [traj.diagnostics[k] for k in traj.diagnostics])
    if fmt == "csv":
        with open(path, "w") as fh:
            fh.write("# routhkit trajectory\n")
            fh.write(f"# config: {json.dumps(meta, sort_keys=True)}\n")
            fh.write(",".join(names) + "\n")
            for row in data:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    elif fmt == "json":
        payload = {
            "metadata": meta,
            "columns": {name: data[:, k].tolist() for k, name in enumerate(names)},
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)
    else:
        raise SpecError(f"unknown format: {fmt}")


def read_reduced_csv(path: str, sys: LagrangianSystem, level: MomentumLevel) -> Trajectory:
    expected = _reduced_columns(sys, level)
    times = []
    rows = []
    with open(path) as fh:
        header = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                if header[: len(expected)] != expected:
                    raise SpecError(
                        f"reduced file columns {header[:len(expected)]} do not match "
                        f"system columns {expected}")
                continue
            vals = [float(v) for v in line.split(",")]
            times.append(vals[0])
            rows.append(vals[1: len(expected)])
    if not rows:
        raise SpecError(f"no data rows in {path}")
    return Trajectory(np.asarray(times), np.asarray(rows))


# ---------------------------------------------------------------------------
# commands

def _meta(args, bundle: SystemBundle, extra=None) -> dict:
    meta = {
        "system": bundle.name,
        "params": bundle.params,
        "t0": args.t0, "tf": args.tf, "dt": args.dt,
        "connection": getattr(args, "connection", None),
        "seed": args.seed,
    }
    if extra:
        meta.update(extra)
    return meta


def _parse_params(pairs) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for item in pairs or []:
        if "=" not in item:
            raise SpecError(f"--param expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise SpecError(f"--param {k}: not a number: {v!r}") from exc
    return out


def cmd_simulate(args) -> int:
    bundle = build_system(args.system, _parse_params(args.param))
    state0 = bundle.full_ic(bundle.params)
    traj = simulate_full(bundle.system, state0, args.t0, args.tf, args.dt,
                         mu=bundle.level.mu)
    write_trajectory(args.out, traj, _full_columns(bundle.system), args.format,
                     _meta(args, bundle))
    drift = max(float(np.max(np.abs(traj.diagnostics[k])))
                for k in traj.diagnostics if k.startswith("p_err"))
    print(f"simulate {bundle.name}: {len(traj)} samples -> {args.out}; "
          f"max momentum error {drift:.3e}")
    return EXIT_OK


def cmd_reduce(args) -> int:
    bundle = build_system(args.system, _parse_params(args.param))
    rstate0 = bundle.reduced_ic(bundle.params)
    traj = integrate_reduced(bundle.system, bundle.level, rstate0, args.t0, args.tf, args.dt)
    write_trajectory(args.out, traj, _reduced_columns(bundle.system, bundle.level),
                     args.format, _meta(args, bundle))
    print(f"reduce {bundle.name}: {len(traj)} samples -> {args.out}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    bundle = build_system(args.system, _parse_params(args.param))
    rtraj = read_reduced_csv(args.reduced, bundle.system, bundle.level)
    kind = LevelConnectionKind(args.connection)
    seed_state = bundle.full_ic(bundle.params)
    rec = reconstruct(bundle.system, bundle.level, rtraj, kind,
                      lift_seed_theta_A=seed_state.theta[: bundle.level.n_A])
    write_trajectory(args.out, rec.trajectory, _full_columns(bundle.system),
                     args.format, _meta(args, bundle))
    if args.group_out:
        cols = ["t"] + [f"g_{lbl}" for lbl in bundle.system.group_labels]
        write_trajectory(args.group_out, rec.group_curve, cols, args.format,
                         _meta(args, bundle))
    print(f"reconstruct {bundle.name}: {len(rec.trajectory)} samples -> {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    bundle = build_system(args.system, _parse_params(args.param))
    state0 = bundle.full_ic(bundle.params)
    kind = LevelConnectionKind(args.connection)
    report = compare_pipelines(bundle.system, bundle.level, state0,
                               args.t0, args.tf, args.dt, kind,
                               tolerance=args.tolerance)
    payload = {"system": bundle.name, **report.as_dict(), "config": _meta(args, bundle)}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2)
    print(f"compare {bundle.name}: discrepancy {report.max_discrepancy:.3e} "
          f"(tol {report.tolerance:.1e}), momentum drift {report.momentum_drift:.3e}, "
          f"EL residual {report.el_residual:.3e} -> {'PASS' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_TOLERANCE


def _add_common(p):
    p.add_argument("--system", required=True,
                   help="built-in name (se2, classical-demo, wong) or config file path")
    p.add_argument("--param", action="append", metavar="NAME=VALUE",
                   help="system/IC parameter override (repeatable)")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--tf", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=None,
                   help="seed for randomized test-data generation (recorded in output)")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="routhkit",
                                 description="Routh reduction and reconstruction toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate the full Euler-Lagrange field")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reduce", help="integrate the reduced field on N_mu/G_mu")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("reconstruct", help="reconstruct a full trajectory from a reduced run")
    _add_common(p)
    p.add_argument("--reduced", required=True, help="reduced trajectory CSV from 'reduce'")
    p.add_argument("--connection", choices=[k.value for k in LevelConnectionKind],
                   default="mechanical")
    p.add_argument("--out", required=True)
    p.add_argument("--group-out", default=None, help="also write the developed group curve")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("compare", help="full vs reduce+reconstruct comparison")
    _add_common(p)
    p.add_argument("--connection", choices=[k.value for k in LevelConnectionKind],
                   default="mechanical")
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--out", default=None, help="JSON report path")
    p.set_defaults(func=cmd_compare)
    return ap


def _error_json(exc: Exception, code: int) -> str:
    return json.dumps({
        "error": str(exc),
        "kind": type(exc).__name__,
        "exit_code": code,
    })


def main(argv=None) -> int:
    level = os.environ.get("ROUTHKIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, ValueError) as exc:
        print(_error_json(exc, EXIT_USAGE), file=_sys.stderr)
        return EXIT_USAGE
    except (RegularityError, LevelSetError, ChartError, IntegrationError, DomainError) as exc:
        code = EXIT_TOLERANCE if isinstance(exc, DomainError) else EXIT_NUMERICAL
        print(_error_json(exc, code), file=_sys.stderr)
        return code
    except RouthkitError as exc:
        print(_error_json(exc, EXIT_NUMERICAL), file=_sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
