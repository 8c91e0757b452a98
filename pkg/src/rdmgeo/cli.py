"""Command-line front end.

Every subcommand reads an optional TOML file (``--config``) whose keys
match the long flag names with dashes replaced by underscores; flags given
on the command line win.  The resolved configuration is written into the
header of every output so a run can be repeated from its outputs alone.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .eigen import ConvergenceError, lowest_eigenpairs, spectrum_full
from .geometry import closed
from .meanfield import HullDegeneracyError, limit_body, meanfield_energy
from .oracle import MAX_N, analytic_spectrum, brute_force_ground, full_space_model
from .output import fmt, metadata_lines, write_csv
from .ruling import ScalingSeries, classify, convergence_metric, limit_polyline, scan_family
from .spinops import (MODELS, OperatorKind, assemble_hamiltonian, build_operator, model_preset)
from .sweep import (PLANES, DirectionGrid, mixture_coords, project_2d, trace_boundary,
                    write_boundary_csv)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2
DEFAULT_NS = (2, 10, 100, 1000)


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    """Everything that determines a run's output."""

    command: str = ""
    model: str = "ising"
    lam: list | None = None
    family: str | None = None
    t: list | None = None
    n: int | None = None
    ns: list | None = None
    m: int = 5
    grid: str = "fibonacci"
    count: int = 200
    plane: str = "xy"
    tol_residual: float = 1e-10
    tol_deg: float | None = None
    angle_tol: float = 0.02
    eps_scale: float = 1.0
    samples: int = 10_000
    kind: str | None = None
    max_n: int = 8
    cases: int = 20
    seed: int = 20240611
    out: str | None = None
    faces: str | None = None
    hull: str | None = None
    json_out: str | None = None
    series: str | None = None
    gnuplot: str | None = None
    threads: int | None = field(default=None, metadata={"serialize": False})

    def metadata(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)
                if f.metadata.get("serialize", True)}


# --------------------------------------------------------------------------
# parsing

def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected comma-separated integers, got {text!r}")
    return [int(v) for v in vals]


_CONVERTERS = {"lam": _floats, "t": _floats, "ns": _ints}
_ALIASES = {"lambda": "lam", "json": "json_out"}


def _load_toml(path):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for key, val in data.items():
        key = _ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
        if key not in known or key == "command":
            raise ConfigError(f"unknown config key {key!r} in {path}")
        out[key] = val
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values = _load_toml(args.config) if getattr(args, "config", None) else {}
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    for key, conv in _CONVERTERS.items():
        if values.get(key) is not None:
            values[key] = conv(values[key])
    values["command"] = args.command
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.model.lower() not in MODELS:
        raise ConfigError(f"unknown model {cfg.model!r}; valid presets: {', '.join(sorted(MODELS))}")
    cfg.model = cfg.model.lower()
    if cfg.threads is None:
        env = os.environ.get("RDMGEO_THREADS")
        if env:
            try:
                cfg.threads = max(1, int(env))
            except ValueError:
                raise ConfigError(f"RDMGEO_THREADS must be an integer, got {env!r}") from None
    if cfg.threads is not None and cfg.threads < 1:
        raise ConfigError("--threads must be at least 1")
    return cfg


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit 1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", help="TOML file with defaults for any flag")
    p.add_argument("--model", choices=sorted(MODELS), default=None)
    p.add_argument("--threads", type=int, help="worker pool size (default: RDMGEO_THREADS or CPU count)")
    p.add_argument("--out", help="output path (default: stdout)")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rdmgeo", description="Geometry of two-body reduced density matrices "
                     "for two-mode collective-spin models.")
    parser.add_argument("--version", action="version", version=f"rdmgeo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="lowest eigenvalues at one lambda and N")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", help="three comma-separated coefficients")
    p.add_argument("--m", type=int, help="number of eigenvalues")
    p.add_argument("--tol-residual", type=float)
    p.add_argument("--tol-deg", type=float)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("sweep", help="exposed boundary points over a direction grid")
    _common(p)
    p.add_argument("--ns", help="comma-separated particle numbers (default 2,10,100,1000)")
    p.add_argument("--grid", choices=["fibonacci", "latlong", "great_circle"])
    p.add_argument("--count", type=int, help="number of directions")
    p.add_argument("--plane", choices=sorted(PLANES), help="plane of the great_circle grid")
    p.add_argument("--faces", help="face-vertex CSV path")
    p.add_argument("--tol-residual", type=float)
    p.add_argument("--tol-deg", type=float)

    p = sub.add_parser("project", help="2-D projection of the boundary at one N")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--plane", choices=sorted(PLANES))
    p.add_argument("--grid", choices=["fibonacci", "latlong", "great_circle"])
    p.add_argument("--count", type=int)
    p.add_argument("--hull", help="hull polyline CSV path")
    p.add_argument("--gnuplot", help="write a gnuplot script for the projection here")

    p = sub.add_parser("meanfield", help="large-N body as OBJ and JSON")
    _common(p)
    p.add_argument("--samples", type=int, help="Bloch-sphere samples")
    p.add_argument("--json", dest="json_out", help="JSON body path")
    p.add_argument("--lambda", dest="lam", help="also report the mean-field energy at this lambda")

    p = sub.add_parser("scaling", help="finite-size scan of a family plus classification")
    _common(p)
    p.add_argument("--family", help='e.g. "J=-1,Bz=t,Bx=0"')
    p.add_argument("--t", help="comma-separated family parameters")
    p.add_argument("--ns", help="comma-separated particle numbers")
    p.add_argument("--m", type=int)
    p.add_argument("--eps-scale", type=float)
    p.add_argument("--json", dest="json_out", help="report path (default: stdout)")

    p = sub.add_parser("classify", help="classify a saved scaling series")
    _common(p)
    p.add_argument("--series", help="scaling series CSV")
    p.add_argument("--t", help="family member to classify")

    p = sub.add_parser("verify", help="compare the pipeline with the independent oracles")
    _common(p)
    p.add_argument("--max-n", type=int)
    p.add_argument("--cases", type=int, help="random lambdas per model and N")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("ops-dump", help="dense CSV of one collective operator")
    _common(p)
    p.add_argument("--kind", choices=[k.value for k in OperatorKind])
    p.add_argument("--n", type=int)
    return parser


# --------------------------------------------------------------------------
# commands

@contextmanager
def _sink(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _need(cfg, *names):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError("missing required setting(s): " + ", ".join("--" + m.replace("_", "-")
                                                                     for m in missing))


def _lam(cfg):
    if len(cfg.lam) != 3:
        raise ConfigError("--lambda needs exactly three values")
    return np.array(cfg.lam)


def _grid(cfg) -> DirectionGrid:
    if cfg.count < 1:
        raise ConfigError("--count must be positive")
    if cfg.grid == "fibonacci":
        return DirectionGrid.fibonacci(cfg.count)
    if cfg.grid == "great_circle":
        return DirectionGrid.great_circle(cfg.plane, cfg.count)
    if cfg.grid == "latlong":
        n_lat = max(1, int(round(np.sqrt(cfg.count / 2))))
        return DirectionGrid.latlong(n_lat, max(1, cfg.count // n_lat))
    raise ConfigError(f"unknown grid {cfg.grid!r}")


def _json_dump(doc) -> str:
    def clean(x):
        if isinstance(x, float) and not np.isfinite(x):
            return None
        if isinstance(x, dict):
            return {k: clean(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [clean(v) for v in x]
        return x
    return json.dumps(clean(doc), sort_keys=True, indent=2) + "\n"


def cmd_spectrum(cfg: RunConfig) -> int:
    _need(cfg, "n", "lam")
    model = model_preset(cfg.model)
    lam = _lam(cfg)
    ham = assemble_hamiltonian(model.spec(lam, cfg.n))
    m = min(cfg.m, cfg.n + 1)
    try:
        sol = lowest_eigenpairs(ham, m, cfg.tol_residual, tol_deg=cfg.tol_deg, seed=cfg.seed)
    except ConvergenceError as exc:
        raise NumericalFailure(str(exc)) from None
    doc = {"model": model.name, "N": cfg.n, "lambda": lam.tolist(), "parameters": model.describe(lam),
           "energies": [float(e) for e in sol.energies], "gap01": sol.gap01, "gap12": sol.gap12,
           "degeneracy": sol.degeneracy, "metadata": {"version": __version__, "config": cfg.metadata()}}
    with _sink(cfg.out) as fh:
        fh.write(_json_dump(doc))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    model = model_preset(cfg.model)
    ns = cfg.ns or list(DEFAULT_NS)
    grid = _grid(cfg)
    points = []
    for n in ns:
        points += trace_boundary(model, n, grid, threads=cfg.threads, tol_residual=cfg.tol_residual,
                                 tol_deg=cfg.tol_deg)
    with _sink(cfg.out) as fh:
        if cfg.faces:
            with open(cfg.faces, "w", newline="") as ffh:
                write_boundary_csv(fh, ffh, model, points, cfg.metadata())
        else:
            write_boundary_csv(fh, None, model, points, cfg.metadata())
    failed = [p for p in points if not p.ok]
    if failed:
        raise NumericalFailure(f"{len(failed)} of {len(points)} directions failed; first: {failed[0].error}")
    return EXIT_OK


def cmd_project(cfg: RunConfig) -> int:
    _need(cfg, "n")
    model = model_preset(cfg.model)
    points = trace_boundary(model, cfg.n, _grid(cfg), threads=cfg.threads)
    if not any(p.ok for p in points):
        raise NumericalFailure("every direction failed")
    proj = project_2d(points, cfg.plane)
    with _sink(cfg.out) as fh:
        write_csv(fh, ("u", "v"), proj.points.tolist(), cfg.metadata())
    if cfg.hull:
        with open(cfg.hull, "w", newline="") as fh:
            write_csv(fh, ("u", "v"), closed(proj.hull).tolist(), cfg.metadata())
    if cfg.gnuplot:
        with open(cfg.gnuplot, "w") as fh:
            for line in metadata_lines(cfg.metadata()):
                fh.write(line + "\n")
            hull = cfg.hull or "hull.csv"
            fh.write("set datafile separator ','\nset size ratio -1\n"
                     f"set xlabel '{cfg.plane[0]}'\nset ylabel '{cfg.plane[1]}'\n"
                     f"plot '{hull}' every ::1 using 1:2 with lines title 'N={cfg.n}'\n")
    if not proj.degenerate:
        try:
            dist = convergence_metric(proj.points, limit_polyline(model, cfg.plane))
            print(f"hausdorff distance to the limit outline: {fmt(dist)}", file=sys.stderr)
        except ValueError:
            pass
    return EXIT_OK


def cmd_meanfield(cfg: RunConfig) -> int:
    model = model_preset(cfg.model)
    try:
        body = limit_body(model, cfg.samples)
    except HullDegeneracyError as exc:
        raise NumericalFailure(str(exc)) from None
    meta = cfg.metadata()
    with _sink(cfg.out) as fh:
        fh.write(body.to_obj(meta))
    if cfg.json_out:
        with open(cfg.json_out, "w") as fh:
            fh.write(body.to_json({"version": __version__, "config": meta}) + "\n")
    if cfg.lam is not None:
        energy, alpha, point = meanfield_energy(model, _lam(cfg))
        print(_json_dump({"energy_per_particle": energy, "bloch_vector": alpha.tolist(),
                          "point": point.tolist()}), end="", file=sys.stderr)
    return EXIT_OK


def cmd_scaling(cfg: RunConfig) -> int:
    _need(cfg, "family", "t", "ns")
    try:
        series = scan_family(cfg.model, cfg.family, cfg.t, cfg.ns, m=max(3, cfg.m),
                             eps_scale=cfg.eps_scale, threads=cfg.threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.out:
        with _sink(cfg.out) as fh:
            series.write_csv(fh, cfg.metadata())
    _write_reports(series, cfg, cfg.json_out)
    failed = [c for c in series.cells if not c.ok]
    if failed:
        raise NumericalFailure(f"{len(failed)} cells failed; first: {failed[0].error}")
    return EXIT_OK


def _write_reports(series, cfg, path):
    try:
        if len(series.t_grid) == 1:
            text = classify(series).to_json()
        else:
            docs = {fmt(t): classify(series, t).to_dict() for t in series.t_grid}
            text = json.dumps(docs, sort_keys=True, indent=2) + "\n"
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    with _sink(path) as fh:
        fh.write(text)


def cmd_classify(cfg: RunConfig) -> int:
    _need(cfg, "series")
    try:
        with open(cfg.series) as fh:
            series = ScalingSeries.read_csv(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {cfg.series}: {exc.strerror}") from None
    if cfg.t:
        if len(cfg.t) != 1:
            raise ConfigError("classify takes a single --t")
        try:
            text = classify(series, cfg.t[0]).to_json()
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        with _sink(cfg.out) as fh:
            fh.write(text)
    else:
        _write_reports(series, cfg, cfg.out)
    return EXIT_OK


def verification_rows(max_n: int = 8, cases: int = 20, seed: int = 20240611):
    """(check, model, N, error, tolerance) rows comparing pipeline and oracles."""
    if not 2 <= max_n <= MAX_N:
        raise ConfigError(f"--max-n must lie in [2, {MAX_N}]")
    rng = np.random.default_rng(seed)
    rows = []
    for name in sorted(MODELS):
        model = MODELS[name]
        for n in range(2, max_n + 1):
            fm = full_space_model(model, [1.0, 1.0, 1.0], n)
            pipe = assemble_hamiltonian(model.spec([1.0, 1.0, 1.0], n)).to_dense()
            rows.append(("projected_hamiltonian", name, n, float(np.abs(fm.projected - pipe).max()), 1e-12))
            rows.append(("symmetric_closure", name, n, fm.closure_residual(), 1e-12))
            e_err = c_err = 0.0
            for _ in range(cases):
                lam = rng.standard_normal(3)
                e0, coords, _ = brute_force_ground(model, lam, n)
                sol = lowest_eigenpairs(assemble_hamiltonian(model.spec(lam, n)), min(3, n + 1))
                e_err = max(e_err, abs(e0 - sol.e0))
                c_err = max(c_err, float(np.abs(coords - mixture_coords(model, n, sol.ground_space)).max()))
            rows.append(("ground_energy", name, n, e_err, 1e-10))
            rows.append(("coordinates", name, n, c_err, 1e-9))
    for n in (4, 10, 100):
        for family, model, lam, args in (
                ("ising_zero_field", "ising", (1.0, 0.0, 0.0), (1.0,)),
                ("ising_bx", "ising", (1.0, 0.0, -1.0), (1.0, -1.0)),
                ("xy_equal", "xy", (-1.0, -1.0, 0.0), (-1.0,))):
            w = spectrum_full(assemble_hamiltonian(MODELS[model].spec(lam, n)))
            rows.append((f"analytic_{family}", model, n,
                         float(np.abs(w - analytic_spectrum(family, *args, n)).max()), 1e-9))
    return rows


def cmd_verify(cfg: RunConfig) -> int:
    rows = verification_rows(cfg.max_n, cfg.cases, cfg.seed)
    ok = all(err <= tol for *_, err, tol in rows)
    with _sink(cfg.out) as fh:
        write_csv(fh, ("check", "model", "N", "max_error", "tolerance", "status"),
                  [(c, m, n, e, t, "PASS" if e <= t else "FAIL") for c, m, n, e, t in rows],
                  cfg.metadata())
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_ops_dump(cfg: RunConfig) -> int:
    _need(cfg, "kind", "n")
    dense = build_operator(cfg.kind, cfg.n).to_dense()

    def cell(z):
        if z.imag == 0:
            return fmt(z.real)
        return f"{fmt(z.real)}{'+' if z.imag >= 0 else '-'}{fmt(abs(z.imag))}j"

    with _sink(cfg.out) as fh:
        for line in metadata_lines(cfg.metadata()):
            fh.write(line + "\n")
        for row in dense:
            fh.write(",".join(cell(complex(z)) for z in row) + "\n")
    return EXIT_OK


COMMANDS = {"spectrum": cmd_spectrum, "sweep": cmd_sweep, "project": cmd_project,
            "meanfield": cmd_meanfield, "scaling": cmd_scaling, "classify": cmd_classify,
            "verify": cmd_verify, "ops-dump": cmd_ops_dump}


_LIST_FLAGS = ("--lambda", "--t", "--ns")


def _glue_negative(argv):
    """``--lambda -1,0,0`` -> ``--lambda=-1,0,0`` so argparse does not read the
    value as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _LIST_FLAGS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and nxt[1:2] in set("0123456789."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(_glue_negative(sys.argv[1:] if argv is None else list(argv)))
    try:
        cfg = build_config(args)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"rdmgeo {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"rdmgeo {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConvergenceError as exc:
        print(f"rdmgeo {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"rdmgeo {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
