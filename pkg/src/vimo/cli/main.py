"""Command line entry point.

    vimo run CONFIG
    vimo solve CONFIG [--method M] [--tol T] ...
    vimo check-classes CONFIG
    vimo obstacle-demo [CONFIG]
    vimo residual-scan CONFIG

Exit status: 0 when every report passes or converges, 2 on a failed check or
an unconverged solve, 1 on usage or schema errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .. import classes as cl
from ..errors import VimoError
from ..obstacle import (GridConfig, build_signorini_problem, constant_coefficients, default_coefficients,
                        export_rows, node_filter, solve_signorini, verify_complementarity)
from ..solver import (GalerkinFilter, certify, solve_extragradient, solve_galerkin, solve_lifted,
                      solve_truncated)
from ..solver.truncation import DEFAULT_RADII
from .build import build_modulus, build_problem
from .config import ConfigError, RunConfig, load_config
from .emit import ScanReport, emit_report, record_line

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
TASKS = ("solve", "check-classes", "obstacle-demo", "residual-scan")

log = logging.getLogger("vimo")


# ---------------------------------------------------------------------------
# tasks


def _solve(cfg: RunConfig, seed: int):
    p = build_problem(cfg.instance)
    s = cfg.solver
    y0 = None if s.y0 is None else np.asarray(s.y0, dtype=float)
    if s.method == "extragradient":
        rep = solve_extragradient(p, y0, step=s.step, tol=s.tol, max_iter=s.max_iter, probe_count=s.probes,
                                  seed=seed)
    elif s.method == "lift":
        rep = solve_lifted(p, y0, step=s.step, tol=s.tol, max_iter=s.max_iter, probe_count=s.probes, seed=seed)
    elif s.method == "galerkin":
        filt = GalerkinFilter.full(p.dim) if s.strides is None else GalerkinFilter.strided(p.dim, s.strides)
        rep = solve_galerkin(p, filt, inner_tol=s.tol, step=s.step, max_iter=s.max_iter, seed=seed)
    else:
        radii = DEFAULT_RADII if s.radii is None else s.radii
        rep = solve_truncated(p, radii, tol=s.tol, step=s.step, max_iter=s.max_iter, seed=seed, y0=y0)
    return [rep], emit_report(rep, "csv"), EXIT_OK if rep.converged else EXIT_FAIL


def _check_classes(cfg: RunConfig, seed: int):
    p = build_problem(cfg.instance)
    c = cfg.checks
    A, d = p.A, p.dim
    y0 = np.zeros(d) if c.y0 is None else np.asarray(c.y0, dtype=float)
    R = c.R if c.R is not None else c.radius * math.sqrt(d) * (1 + 1e-9)
    C = build_modulus(c.modulus)
    pairs = cl.sample_pairs(d, c.pairs, seed, c.radius)
    reports = []
    for name in c.battery:
        if name == "monotone":
            reports.append(cl.check_monotone(A, pairs))
        elif name == "semibounded_variation":
            reports.append(cl.check_semibounded_variation(A, C, R, pairs))
        elif name == "radial_semicontinuity":
            reports.append(cl.check_radial_semicontinuity(A, cl.sample_triples(d, c.triples, seed, c.radius)))
        elif name == "coercivity":
            reports.append(cl.check_coercivity(A, y0, seed=seed, phi=None if p.phi.is_zero else p.phi))
        elif name == "local_boundedness":
            reports.append(cl.check_local_boundedness(A, y0, seed=seed))
        else:
            bat = cl.Battery.standard(d, seed, c.pairs, c.triples, radius=c.radius)
            reports.append(cl.pseudomonotone_harness(A, C, bat, seed))
    code = EXIT_FAIL if any(r.verdict == "fail" for r in reports) else EXIT_OK
    return reports, "".join(emit_report(r, "csv") for r in reports), code


def _obstacle(cfg: RunConfig, seed: int):
    o = cfg.obstacle
    grid = GridConfig(o.dimension, o.nodes)
    k = o.coefficients
    coeffs = (constant_coefficients(o.dimension, k.value) if k.kind == "constant"
              else default_coefficients(o.dimension, k.p))
    f = o.f if isinstance(o.f, float) else np.asarray(o.f, dtype=float)
    inst = build_signorini_problem(grid, coeffs, f, o.include_nonsmooth, seed=seed)
    s = cfg.solver
    if o.galerkin:
        rep = solve_galerkin(inst.problem, node_filter(grid, o.strides), inner_tol=s.tol, step=s.step,
                             max_iter=s.max_iter, seed=seed)
    else:
        rep = solve_signorini(inst, tol=s.tol, step=s.step, max_iter=max(s.max_iter, 50000), seed=seed)
    comp = verify_complementarity(inst, rep.y, o.complementarity_tol)
    rows = export_rows(inst, rep.y)
    lines = [",".join(["x1", "x2"][:o.dimension] + ["y", "flux"])]
    for r in rows:
        lines.append(",".join("" if v is None else repr(float(v)) for v in r))
    code = EXIT_OK if rep.converged and comp.passed else EXIT_FAIL
    return [inst.coefficient_report, rep, comp], "\n".join(lines) + "\n", code


def _scan(cfg: RunConfig, seed: int):
    p = build_problem(cfg.instance)
    sc = cfg.scan
    if sc.points is not None:
        P = np.asarray(sc.points, dtype=float)
    else:
        axes = [np.linspace(a, b, sc.count) for a, b in zip(sc.lo, sc.hi)]
        P = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    if P.ndim != 2 or P.shape[1] != p.dim:
        raise ConfigError(f"scan: points must have length {p.dim}")
    res, feas = [], []
    for y in P:
        ok = p.feasible(y)
        feas.append(ok)
        res.append(certify(p, y, count=cfg.solver.probes, seed=seed) if ok else math.inf)
    rep = ScanReport(P, res, feas)
    return [rep], emit_report(rep, "csv"), EXIT_OK


_RUNNERS = {"solve": _solve, "check-classes": _check_classes, "obstacle-demo": _obstacle,
            "residual-scan": _scan}


def execute(cfg: RunConfig, out=sys.stdout, fmt: str | None = None) -> int:
    """Run the configured task, write outputs and return the exit status."""
    seed = cfg.resolved_seed()
    try:
        reports, csv_text, code = _RUNNERS[cfg.task](cfg, seed)
    except VimoError as exc:
        raise ConfigError(f"{cfg.task}: {exc}") from exc
    fmt = fmt or cfg.output.format
    if fmt == "table":
        out.write("\n".join(emit_report(r, "table") for r in reports))
    elif fmt == "records":
        out.write("".join(record_line(r) for r in reports))
    else:
        out.write(csv_text)
    if cfg.output.records:
        Path(cfg.output.records).write_text("".join(record_line(r) for r in reports))
    if cfg.output.csv:
        Path(cfg.output.csv).write_text(csv_text)
    return code


def run_config(path, out=sys.stdout) -> int:
    """Load ``path`` and run its task; schema errors are reported and give exit 1."""
    try:
        return execute(load_config(path), out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


# ---------------------------------------------------------------------------
# argument parsing


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vimo", description="Variational inequalities with multivalued operators.")
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="overrides the config seed and $VIMO_SEED")
    common.add_argument("--tol", type=float)
    common.add_argument("--step", type=float)
    common.add_argument("--max-iter", type=int)
    common.add_argument("--method", choices=["extragradient", "lift", "galerkin", "truncation"])
    common.add_argument("--format", choices=["table", "records", "csv"])
    common.add_argument("--records", help="write JSON-lines records to this file")
    common.add_argument("--csv", help="write the CSV output to this file")
    common.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("run", parents=[common], help="run the task named in the config").add_argument("config")
    for t in TASKS:
        p = sub.add_parser(t, parents=[common], help=f"run the {t} task")
        p.add_argument("config", nargs="?" if t == "obstacle-demo" else None)
    return ap


def _apply_flags(cfg: RunConfig | None, args, task: str | None) -> RunConfig:
    data = {"schema_version": 1, "task": task} if cfg is None else cfg.model_dump(exclude_none=True)
    if task is not None:
        data["task"] = task
    if args.seed is not None:
        data["seed"] = args.seed
    solver = data.setdefault("solver", {})
    for key, val in (("tol", args.tol), ("step", args.step), ("max_iter", args.max_iter), ("method", args.method)):
        if val is not None:
            solver[key] = val
    output = data.setdefault("output", {})
    for key, val in (("records", args.records), ("csv", args.csv), ("format", args.format)):
        if val is not None:
            output[key] = val
    from pydantic import ValidationError
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError("; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors())) from exc


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else None
        task = None if args.command == "run" else args.command
        return execute(_apply_flags(cfg, args, task))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
