"""Command-line front end.

Subcommands ``mesh``, ``solve``, ``verify`` and ``sweep``. Every output file
embeds the run configuration, the code version and hashes of its inputs, so
passing an output file back through ``--config`` repeats the run.

Exit codes: 0 success, 2 usage error, 3 solver failure (the error class name
is printed on stderr), 4 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .assembly import ProblemSpec, assemble
from .eig import default_seed, richardson, solve
from .errors import InvalidParameter, SpeclabError
from .mesh import gen_domain, parse_domain, read_fmesh, refine, write_fmesh
from .serrin import solve_serrin
from .verify import THEOREM_IDS, Study, reports_to_json, run_suite

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_FAIL = 0, 2, 3, 4
PROBLEMS = ("dirichlet", "neumann", "robin", "dtn", "bs")


@dataclass
class RunConfig:
    """Every parameter of a run, defaults included."""

    command: str
    domain: str | None = None
    param: str | None = None
    mesh: str | None = None
    h: float | None = None
    refinements: int = 3
    problem: str | None = None
    p: int = 0
    tau: float | None = None
    taus: list | None = None
    k: int = 6
    suite: str = "all"
    seed: int = field(default_factory=default_seed)
    tol: float = 1e-9
    jobs: int = 1
    strict: bool = False
    out: str | None = None
    csv: str | None = None
    plot: str | None = None

    def to_dict(self):
        return asdict(self)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser():
    parser = _Parser(prog="speclab", description="Eigenvalue bounds for differential forms on domains.")
    parser.add_argument("--version", action="version", version=f"speclab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, need_domain=True):
        sp.add_argument("--config", help="JSON config, or an earlier output file holding a run_config")
        sp.add_argument("--domain", choices=("disk", "annulus", "ellipse", "square", "cap"))
        sp.add_argument("--param", help="comma separated domain parameters")
        sp.add_argument("--h", type=_positive_float, help="target mesh size")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tol", type=_positive_float)
        sp.add_argument("--out")

    sp = sub.add_parser("mesh", help="generate an FMESH file")
    common(sp)

    sp = sub.add_parser("solve", help="solve one eigenvalue problem")
    common(sp)
    sp.add_argument("--mesh", help="FMESH input (instead of --domain/--h)")
    sp.add_argument("--problem", choices=PROBLEMS)
    sp.add_argument("--p", type=int, choices=(0, 1, 2))
    sp.add_argument("--tau", type=float)
    sp.add_argument("--k", type=int)
    sp.add_argument("--csv")

    sp = sub.add_parser("verify", help="run theorem checkers")
    common(sp)
    sp.add_argument("--mesh", help="FMESH input used as the coarsest level")
    sp.add_argument("--suite", choices=("all",) + THEOREM_IDS)
    sp.add_argument("--refinements", type=int)
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--strict", action="store_true", default=None,
                    help="treat INCONCLUSIVE as failure")

    sp = sub.add_parser("sweep", help="convergence or tau sweep")
    common(sp)
    sp.add_argument("--mesh")
    sp.add_argument("--problem", choices=PROBLEMS + ("serrin",))
    sp.add_argument("--p", type=int, choices=(0, 1, 2))
    sp.add_argument("--tau", type=float)
    sp.add_argument("--taus", type=_float_list, help="comma separated tau grid (robin)")
    sp.add_argument("--k", type=int, help="eigenvalue index, 1-based")
    sp.add_argument("--refinements", type=int)
    sp.add_argument("--csv")
    sp.add_argument("--plot", help="two-column plot data file")
    return parser


def _load_config(path):
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "run_config" in data:
        data = data["run_config"]
    if not isinstance(data, dict):
        raise InvalidParameter("config file must hold a JSON object")
    return data


def make_config(ns) -> RunConfig:
    base = {}
    if getattr(ns, "config", None):
        base = _load_config(ns.config)
        if base.get("command", ns.command) != ns.command:
            raise InvalidParameter(f"config is for {base['command']!r}, not {ns.command!r}")
    cfg = RunConfig(command=ns.command)
    known = set(RunConfig.__dataclass_fields__)
    for key, value in base.items():
        if key in known:
            setattr(cfg, key, value)
    for key, value in vars(ns).items():
        if key in known and key != "command" and value is not None:
            setattr(cfg, key, value)
    if cfg.command == "sweep" and ns.k is None and "k" not in base:
        cfg.k = 1
    _check_config(cfg)
    return cfg


def _check_config(cfg):
    if cfg.command in ("mesh",) or (cfg.command != "mesh" and not cfg.mesh):
        if cfg.domain is None:
            raise InvalidParameter("--domain is required")
        if cfg.h is None:
            raise InvalidParameter("--h is required")
    if cfg.command in ("solve", "sweep") and cfg.problem is None:
        raise InvalidParameter("--problem is required")
    if cfg.problem == "robin" and cfg.tau is None and not cfg.taus:
        raise InvalidParameter("robin needs --tau")
    if cfg.k < 1 or cfg.refinements < 1 or cfg.jobs < 1:
        raise InvalidParameter("k, refinements and jobs must be positive")


# --------------------------------------------------------------------------
# inputs and outputs
# --------------------------------------------------------------------------


def _file_hash(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _mesh_bytes_hash(mesh):
    buf = io.StringIO()
    write_fmesh(mesh, buf)
    return hashlib.sha256(buf.getvalue().encode()).hexdigest()


def _coarse_mesh(cfg):
    if cfg.mesh:
        return read_fmesh(cfg.mesh), {"mesh": _file_hash(cfg.mesh)}
    mesh = gen_domain(parse_domain(cfg.domain, cfg.param), cfg.h)
    return mesh, {"mesh": _mesh_bytes_hash(mesh)}


def _envelope(cfg, hashes, body):
    return {"run_config": cfg.to_dict(), "version": f"speclab {__version__}", "input_hashes": hashes, **body}


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _header_lines(cfg, hashes):
    return [
        f"# speclab {__version__}",
        "# run_config " + json.dumps(cfg.to_dict(), sort_keys=True),
        "# input_hashes " + json.dumps(hashes, sort_keys=True),
    ]


def _fmt(x):
    if x is None:
        return ""
    return repr(float(x))


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_mesh(cfg):
    mesh = gen_domain(parse_domain(cfg.domain, cfg.param), cfg.h)
    buf = io.StringIO()
    write_fmesh(mesh, buf)
    _emit(buf.getvalue(), cfg.out)
    return EXIT_OK


def cmd_solve(cfg):
    mesh, hashes = _coarse_mesh(cfg)
    pencil = assemble(ProblemSpec(cfg.problem, cfg.p, cfg.tau), mesh)
    spec = solve(pencil, cfg.k, cfg.tol, cfg.seed)
    body = {
        "problem": cfg.problem,
        "p": cfg.p,
        "tau": cfg.tau,
        "n_vertices": mesh.n_vertices,
        "eigenvalues": [float(v) for v in spec.eigenvalues],
        "residuals": [float(r) for r in spec.residuals],
        "solver": {k: v for k, v in spec.meta.items() if isinstance(v, (int, float, str, bool))},
    }
    text = json.dumps(_envelope(cfg, hashes, body), indent=2, sort_keys=True) + "\n"
    _emit(text, cfg.out)
    if cfg.csv:
        lines = _header_lines(cfg, hashes) + ["index,eigenvalue,residual"]
        lines += [f"{i + 1},{_fmt(v)},{_fmt(r)}" for i, (v, r) in enumerate(zip(spec.eigenvalues, spec.residuals))]
        _emit("\n".join(lines) + "\n", cfg.csv)
    return EXIT_OK


def cmd_verify(cfg):
    mesh, hashes = _coarse_mesh(cfg)
    study = Study(mesh, levels=cfg.refinements, tol=cfg.tol, seed=cfg.seed)
    reports = run_suite(study, cfg.suite, jobs=cfg.jobs)
    extra = {"run_config": cfg.to_dict(), "version": f"speclab {__version__}", "input_hashes": hashes}
    _emit(reports_to_json(reports, extra) + "\n", cfg.out)
    for r in reports:
        sys.stderr.write(f"{r.theorem_id:24s} p={r.p!s:7s} {r.verdict}\n")
    verdicts = {r.verdict for r in reports}
    if "FAIL" in verdicts or (cfg.strict and "INCONCLUSIVE" in verdicts):
        return EXIT_FAIL
    return EXIT_OK


def _level_meshes(cfg):
    mesh, hashes = _coarse_mesh(cfg)
    meshes = [mesh]
    for _ in range(cfg.refinements - 1):
        meshes.append(refine(meshes[-1]))
    return meshes, hashes


def _level_value(cfg, mesh, tau):
    if cfg.problem == "serrin":
        return solve_serrin(mesh).constancy_score
    pencil = assemble(ProblemSpec(cfg.problem, cfg.p, tau), mesh)
    return float(solve(pencil, max(cfg.k, 1), cfg.tol, cfg.seed).eigenvalues[cfg.k - 1])


def _extrapolate(values):
    if len(values) >= 3:
        ex = richardson(*values[-3:])
        return ex.value, ex.observed_order
    return None, None


def cmd_sweep(cfg):
    meshes, hashes = _level_meshes(cfg)
    rows = []
    plot = []
    if cfg.taus:
        for tau in cfg.taus:
            vals = [_level_value(cfg, m, tau) for m in meshes]
            ex, order = _extrapolate(vals)
            rows.append([_fmt(tau), _fmt(meshes[-1].h_target), _fmt(vals[-1]), _fmt(ex), _fmt(order)])
            plot.append((tau, ex if ex is not None else vals[-1]))
        head = "tau,h,value,extrapolated,order"
    else:
        vals = []
        for m in meshes:
            vals.append(_level_value(cfg, m, cfg.tau))
            ex, order = _extrapolate(vals)
            rows.append([_fmt(m.h_target), _fmt(vals[-1]), _fmt(ex), _fmt(order)])
            plot.append((m.h_target, vals[-1]))
        head = "h,value,extrapolated,order"
    lines = _header_lines(cfg, hashes) + [head] + [",".join(r) for r in rows]
    _emit("\n".join(lines) + "\n", cfg.csv or cfg.out)
    if cfg.plot:
        plines = _header_lines(cfg, hashes) + [f"{x!r} {y!r}" for x, y in plot]
        _emit("\n".join(plines) + "\n", cfg.plot)
    return EXIT_OK


COMMANDS = {"mesh": cmd_mesh, "solve": cmd_solve, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = make_config(ns)
    except (InvalidParameter, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    try:
        return COMMANDS[cfg.command](cfg)
    except InvalidParameter as exc:
        sys.stderr.write(f"InvalidParameter: {exc}\n")
        return EXIT_USAGE
    except SpeclabError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_SOLVER
    except (np.linalg.LinAlgError, ArithmeticError) as exc:
        sys.stderr.write(f"FactorizationFailure: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    raise SystemExit(main())
