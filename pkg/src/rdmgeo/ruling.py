"""Flat and ruled pieces of convex bodies, and finite-size scaling of the
gaps that produce them.

A ruled boundary piece appears when the ground state of every Hamiltonian
in a family of directions is degenerate in the large-N limit.  Two
mechanisms do this: a gapless tower whose spacing closes like ``1/N`` and
a symmetry-broken doublet whose splitting closes faster than any power of
``N`` while the next gap stays finite.  ``classify`` tells them apart from
a ``ScalingSeries``.
"""
from __future__ import annotations

import ast
import heapq
import json
import math
import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .eigen import lowest_eigenpairs
from .geometry import closed, convex_hull_2d, hausdorff_distance
from .meanfield import ConvexBody3
from .output import fmt, metadata_lines
from .spinops import Model, assemble_hamiltonian, model_preset
from .sweep import MAX_FACE_DIM, default_threads, observable_coords, resolve_exposed_face

__all__ = [
    "FaceCluster",
    "detect_flat_faces",
    "LambdaFamily",
    "parse_family",
    "ScalingCell",
    "ScalingSeries",
    "scan_family",
    "ClassifyConfig",
    "RulingReport",
    "classify",
    "convergence_metric",
    "limit_polyline",
]


# --------------------------------------------------------------------------
# flat and ruled facet clusters

@dataclass(frozen=True)
class FaceCluster:
    """A maximal group of hull facets lying on one flat or ruled piece.

    Attributes
    ----------
    kind : {"flat", "ruled"}
    area, area_fraction : float
        Total facet area and its share of the body surface.
    normal, offset : best-fit plane ``normal . p = offset`` through the
        cluster's vertices (least squares).
    ruling_direction : ndarray or None
        Unit vector perpendicular to every facet normal, i.e. the common
        direction of the straight segments sweeping the piece.  ``None``
        for flat clusters, where every in-plane direction qualifies.
    deviation : float
        RMS angle (radians) by which the normals miss the common
        perpendicular (ruled) or the common normal (flat).
    facets : ndarray of facet indices into ``body.facets``.
    """

    kind: str
    area: float
    area_fraction: float
    normal: np.ndarray
    offset: float
    ruling_direction: np.ndarray | None
    deviation: float
    facets: np.ndarray

    @property
    def is_ruled(self) -> bool:
        return self.kind == "ruled"


def _canonical(v):
    v = np.asarray(v, dtype=float)
    i = int(np.argmax(np.abs(v)))
    return v if v[i] >= 0 else -v


def _rms_spread(moment, weight):
    """sqrt of the smallest eigenvalue of a normalized normal moment matrix."""
    return math.sqrt(max(np.linalg.eigvalsh(moment / weight)[0], 0.0))


def detect_flat_faces(body: ConvexBody3, angle_tol: float = 0.02, *, crease_angle: float = 0.35,
                      min_area_fraction: float = 0.01) -> list[FaceCluster]:
    """Flat and ruled clusters of hull facets.

    Facets are first joined into components whose neighbouring normals
    differ by less than ``angle_tol``.  Adjacent components are then merged
    greedily, cheapest first, while the merged set of normals still has a
    common perpendicular to within ``sin(angle_tol)`` RMS and the shared
    edges are no sharper than ``crease_angle``.  A cluster is ruled when its
    area-weighted normals span a plane and flat when they collapse to a
    single direction.  Curved (strictly convex) pieces break into many tiny
    clusters and are dropped by ``min_area_fraction``.

    Parameters
    ----------
    body : ConvexBody3
    angle_tol : float
        Angular tolerance in radians, in ``(0, 0.1]``.
    crease_angle : float
        Dihedral angle above which two facets are never merged; keeps two
        ruled sheets meeting along a sharp edge apart.
    min_area_fraction : float
        Clusters with a smaller share of the surface are not reported.

    Returns
    -------
    list of FaceCluster, largest first.
    """
    if not isinstance(body, ConvexBody3) or len(body.facets) == 0:
        raise ValueError("detect_flat_faces needs a non-empty ConvexBody3")
    if not 0.0 < angle_tol <= 0.1:
        raise ValueError("angle_tol must lie in (0, 0.1]")
    normals = body.normals
    area = body.facet_areas
    total = float(area.sum())
    nf = len(normals)

    f = np.repeat(np.arange(nf), 3)
    g = body.neighbors.ravel()
    keep = f < g
    f, g = f[keep], g[keep]
    dihedral = np.arccos(np.clip(np.einsum("ij,ij->i", normals[f], normals[g]), -1.0, 1.0))

    smooth = dihedral < angle_tol
    graph = coo_matrix((np.ones(smooth.sum()), (f[smooth], g[smooth])), shape=(nf, nf))
    k, label = connected_components(graph, directed=False)

    moment = np.zeros((k, 3, 3))
    np.add.at(moment, label, area[:, None, None] * normals[:, :, None] * normals[:, None, :])
    weight = np.bincount(label, area, minlength=k)

    # stage two: greedy merging of components across gentle creases
    neighbours = [set() for _ in range(k)]
    mild = dihedral < crease_angle
    for a, b in zip(label[f[mild]], label[g[mild]]):
        if a != b:
            neighbours[a].add(b)
            neighbours[b].add(a)
    limit = math.sin(angle_tol)
    heap = [(_rms_spread(moment[a] + moment[b], weight[a] + weight[b]), a, b)
            for a in range(k) for b in neighbours[a] if a < b]
    heapq.heapify(heap)
    alive = np.ones(k, dtype=bool)
    root = np.arange(k)
    while heap:
        cost, a, b = heapq.heappop(heap)
        if cost > limit:
            break
        if not (alive[a] and alive[b]):
            continue
        current = _rms_spread(moment[a] + moment[b], weight[a] + weight[b])
        if current != cost:  # stale entry: one side has grown since
            heapq.heappush(heap, (current, a, b))
            continue
        alive[b] = False
        root[b] = a
        moment[a] += moment[b]
        weight[a] += weight[b]
        neighbours[a] |= neighbours[b]
        neighbours[a] -= {a, b}
        for c in neighbours[b]:
            neighbours[c].discard(b)
            if c != a:
                neighbours[c].add(a)
        for c in neighbours[a]:
            if alive[c]:
                heapq.heappush(heap, (_rms_spread(moment[a] + moment[c], weight[a] + weight[c]),
                                      min(a, c), max(a, c)))

    # resolve union chains
    for i in range(k):
        r = i
        while root[r] != r:
            r = root[r]
        root[i] = r
    facet_root = root[label]

    out = []
    flat_limit = limit ** 2
    for r in np.flatnonzero(alive):
        frac = weight[r] / total
        if frac < min_area_fraction:
            continue
        mu, vec = np.linalg.eigh(moment[r] / weight[r])
        mu = np.maximum(mu, 0.0)
        if mu[1] <= flat_limit:
            kind, ruling, dev = "flat", None, math.sqrt(mu[0] + mu[1])
        elif mu[0] <= flat_limit:
            kind, ruling, dev = "ruled", _canonical(vec[:, 0]), math.sqrt(mu[0])
        else:
            continue
        members = np.flatnonzero(facet_root == r)
        pts = body.vertices[np.unique(body.facets[members])]
        centre = pts.mean(axis=0)
        _, _, vt = np.linalg.svd(pts - centre, full_matrices=False)
        normal = vt[-1]
        mean_normal = (area[members, None] * normals[members]).sum(axis=0)
        if normal @ mean_normal < 0:
            normal = -normal
        out.append(FaceCluster(kind, float(weight[r]), float(frac), normal, float(normal @ centre),
                               ruling, dev, members))
    out.sort(key=lambda c: (-c.area, tuple(np.round(c.normal, 12))))
    return out


# --------------------------------------------------------------------------
# one-parameter Hamiltonian families

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _compile_expr(text: str):
    """Arithmetic in ``t`` and numeric literals, returned as a callable."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError:
        raise ValueError(f"cannot parse expression {text!r}") from None

    def ev(node, t):
        if isinstance(node, ast.Expression):
            return ev(node.body, t)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "t":
            return t
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, t), ev(node.right, t))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand, t))
        raise ValueError(f"unsupported element in expression {text!r}")

    ev(tree, 0.0)  # validate once
    return lambda t: float(ev(tree, float(t)))


@dataclass(frozen=True)
class LambdaFamily:
    """``t -> lambda(t)`` given as one expression per model parameter."""

    model: Model
    expressions: tuple

    def __call__(self, t) -> np.ndarray:
        return np.array([_compile_expr(e)(t) for e in self.expressions])

    @property
    def text(self) -> str:
        return ",".join(f"{p}={e}" for p, e in zip(self.model.param_names, self.expressions))


def parse_family(text: str, model) -> LambdaFamily:
    """Parse ``"J=-1,Bz=t,Bx=0"`` into a family for ``model``.

    Every parameter of the model must be given exactly once; values are
    arithmetic expressions in ``t``.
    """
    model = model_preset(model)
    names = {p.lower(): p for p in model.param_names}
    given = {}
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ValueError(f"family entry {part!r} is not of the form name=expression")
        key, expr = (s.strip() for s in part.split("=", 1))
        if key.lower() not in names:
            raise ValueError(f"{model.name} has no parameter {key!r}; expected {', '.join(model.param_names)}")
        name = names[key.lower()]
        if name in given:
            raise ValueError(f"parameter {name} given twice")
        _compile_expr(expr)
        given[name] = expr
    missing = [p for p in model.param_names if p not in given]
    if missing:
        raise ValueError(f"family is missing {', '.join(missing)}")
    return LambdaFamily(model, tuple(given[p] for p in model.param_names))


# --------------------------------------------------------------------------
# scaling scans

SERIES_COLUMNS = ("model", "t", "N", "lambda0", "lambda1", "lambda2", "e0", "gap01", "gap12",
                  "degeneracy", "window", "face_diameter", "x", "y", "z", "error")


@dataclass(frozen=True)
class ScalingCell:
    """Spectral and geometric data of one ``(t, N)`` solve."""

    t: float
    n: int
    lam: np.ndarray
    e0: float
    gap01: float
    gap12: float
    degeneracy: int
    window: int
    face_diameter: float
    coords: np.ndarray
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def row(self, model_name):
        return [model_name, self.t, self.n, *self.lam, self.e0, self.gap01, self.gap12,
                self.degeneracy, self.window, self.face_diameter, *self.coords, self.error or ""]


@dataclass(frozen=True)
class ScalingSeries:
    """Cells of a scan over family parameters ``t_grid`` and sizes ``n_values``."""

    model: Model
    family: str
    t_grid: tuple
    n_values: tuple
    cells: tuple = field(repr=False)

    def __post_init__(self):
        n = tuple(int(x) for x in self.n_values)
        if any(b <= a for a, b in zip(n, n[1:])):
            raise ValueError("n_values must be strictly ascending")
        t = tuple(float(x) for x in self.t_grid)
        have = {(c.t, c.n) for c in self.cells}
        if have != {(a, b) for a in t for b in n} or len(self.cells) != len(t) * len(n):
            raise ValueError("a scaling series needs exactly one cell per (t, N) pair")
        object.__setattr__(self, "n_values", n)
        object.__setattr__(self, "t_grid", t)
        order = {(a, b): i for i, (a, b) in enumerate((a, b) for a in t for b in n)}
        object.__setattr__(self, "cells", tuple(sorted(self.cells, key=lambda c: order[(c.t, c.n)])))

    def at(self, t: float) -> list[ScalingCell]:
        """Cells of one family member, ascending in N."""
        t = float(t)
        if t not in self.t_grid:
            raise KeyError(f"t={t} not in the series grid {list(self.t_grid)}")
        return [c for c in self.cells if c.t == t]

    def rescaled(self, factor: float) -> "ScalingSeries":
        """Copy with every gap multiplied by ``factor``."""
        cells = [ScalingCell(c.t, c.n, c.lam, c.e0, c.gap01 * factor, c.gap12 * factor, c.degeneracy,
                             c.window, c.face_diameter, c.coords, c.error) for c in self.cells]
        return ScalingSeries(self.model, self.family, self.t_grid, self.n_values, tuple(cells))

    def write_csv(self, fh, metadata: dict | None = None):
        for line in metadata_lines(metadata):
            fh.write(line + "\n")
        fh.write(f"# family: {self.family}\n")
        fh.write(",".join(SERIES_COLUMNS) + "\n")
        for c in self.cells:
            fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in c.row(self.model.name)) + "\n")

    @classmethod
    def read_csv(cls, fh) -> "ScalingSeries":
        family = ""
        header = None
        cells = []
        model = None
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                if line.startswith("# family: "):
                    family = line[len("# family: "):]
                continue
            if not line:
                continue
            parts = line.split(",", len(SERIES_COLUMNS) - 1)
            if header is None:
                header = parts
                if tuple(header) != SERIES_COLUMNS:
                    raise ValueError("not a scaling series CSV (unexpected columns)")
                continue
            rec = dict(zip(header, parts))
            model = model_preset(rec["model"])
            cells.append(ScalingCell(
                float(rec["t"]), int(rec["N"]),
                np.array([float(rec[f"lambda{i}"]) for i in range(3)]),
                float(rec["e0"]), float(rec["gap01"]), float(rec["gap12"]), int(rec["degeneracy"]),
                int(rec["window"]), float(rec["face_diameter"]),
                np.array([float(rec[a]) for a in "xyz"]), rec["error"] or None))
        if model is None:
            raise ValueError("scaling series CSV has no rows")
        ts = sorted({c.t for c in cells})
        ns = sorted({c.n for c in cells})
        return cls(model, family, tuple(ts), tuple(ns), tuple(cells))


def _diameter(points):
    if len(points) < 2:
        return 0.0
    d = points[:, None, :] - points[None, :, :]
    return float(np.sqrt((d ** 2).sum(-1)).max())


def _scan_cell(model, t, n, lam, m, eps_scale, tol_residual):
    ham = assemble_hamiltonian(model.spec(lam, n))
    dim = n + 1
    m = min(dim, max(m, 3))
    sol = lowest_eigenpairs(ham, m, tol_residual)
    eps = max(sol.tol_deg, eps_scale / n)
    # widen until the window [E0, E0 + eps] is closed off by a level outside it
    while sol.energies[-1] - sol.e0 <= eps and m < dim and m < MAX_FACE_DIM + 1:
        m = min(dim, 2 * m, MAX_FACE_DIM + 1)
        sol = lowest_eigenpairs(ham, m, tol_residual)
    window = int(np.count_nonzero(sol.energies - sol.e0 <= eps))
    if sol.degeneracy == 1:
        coords = observable_coords(model, n, sol.vectors[:, 0])
    else:
        coords = resolve_exposed_face(sol.ground_space, model, n).mean(axis=0)
    if window > MAX_FACE_DIM:
        diameter = float("nan")
    elif window == 1:
        diameter = 0.0
    else:
        diameter = _diameter(resolve_exposed_face(sol.vectors[:, :window], model, n))
    return ScalingCell(float(t), int(n), lam, float(sol.e0), sol.gap01, sol.gap12, sol.degeneracy,
                       window, diameter, coords)


def scan_family(model, lambda_family, t_grid, n_values, *, m: int = 3, eps_scale: float = 1.0,
                tol_residual: float = 1e-10, threads: int | None = None) -> ScalingSeries:
    """Solve every ``(t, N)`` cell of a family.

    Parameters
    ----------
    model : str or Model
    lambda_family : LambdaFamily, str or callable
        ``t -> lambda``; a string is parsed with ``parse_family``.
    t_grid, n_values : sequences
        Family parameters and particle numbers (each ``N >= 2``).
    m : int
        Minimum number of eigenpairs per solve (at least 3).
    eps_scale : float
        The epsilon-face window is ``max(tol_deg, eps_scale / N)`` above E0.

    Solver failures are recorded in the cell's ``error`` field.
    """
    model = model_preset(model)
    if isinstance(lambda_family, str):
        lambda_family = parse_family(lambda_family, model)
    family_text = getattr(lambda_family, "text", repr(lambda_family))
    t_grid = [float(t) for t in np.atleast_1d(t_grid)]
    n_values = sorted(int(n) for n in np.atleast_1d(n_values))
    if not t_grid:
        raise ValueError("t_grid is empty")
    if not n_values or n_values[0] < 2:
        raise ValueError("every N must be at least 2")
    jobs = [(t, n) for t in t_grid for n in n_values]

    def one(job):
        t, n = job
        lam = np.asarray(lambda_family(t), dtype=float)
        lam.setflags(write=False)
        try:
            return _scan_cell(model, t, n, lam, m, eps_scale, tol_residual)
        except Exception as exc:  # recorded per cell
            nan = float("nan")
            return ScalingCell(t, n, lam, nan, nan, nan, 0, 0, nan, np.full(3, nan),
                               error=f"{type(exc).__name__}: {exc}")

    threads = threads or default_threads()
    if threads == 1 or len(jobs) == 1:
        cells = [one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(one, jobs))
    return ScalingSeries(model, family_text, tuple(t_grid), tuple(n_values), tuple(cells))


# --------------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class ClassifyConfig:
    """Thresholds of the gapless / symmetry-breaking discriminator.

    gap01 of a gapless family must follow ``c N^-p`` with ``p`` within
    ``exponent_tol`` of ``exponent`` and relative log residual below
    ``max_residual``; gap12 must vanish too, at a rate no slower than
    ``p - gap12_slack``.  A symmetry-breaking family needs gap12 with fitted
    exponent at most ``bounded_exponent`` and a log splitting ratio that
    falls at least linearly in N (relative residual below
    ``max_split_residual``).  Gaps at or below ``max(floor, rel_noise |E0|)``
    are treated as unresolved zeros.
    """

    exponent: float = 1.0
    exponent_tol: float = 0.25
    max_residual: float = 0.05
    gap12_slack: float = 0.25
    bounded_exponent: float = 0.25
    max_split_residual: float = 0.1
    floor: float = 1e-14
    rel_noise: float = 1e-12
    min_points: int = 4
    min_span: float = 8.0


@dataclass(frozen=True)
class RulingReport:
    verdict: str
    gap_fit: dict
    splitting_ratio_fit: dict
    face_growth: list
    evidence_notes: str

    def to_dict(self) -> dict:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return None
            if isinstance(x, dict):
                return {k: clean(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [clean(v) for v in x]
            return x
        return clean({"verdict": self.verdict, "gap_fit": self.gap_fit,
                      "splitting_ratio_fit": self.splitting_ratio_fit,
                      "face_growth": self.face_growth, "evidence_notes": self.evidence_notes})

    def to_json(self, metadata: dict | None = None) -> str:
        doc = self.to_dict()
        if metadata is not None:
            doc["metadata"] = metadata
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _linfit(x, y):
    """Least-squares line; returns slope, intercept and relative residual."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    a = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(a, y, rcond=None)
    err = y - (slope * x + icpt)
    spread = float(((y - y.mean()) ** 2).sum())
    rel = math.sqrt(float((err ** 2).sum()) / spread) if spread > 0 else (0.0 if not err.any() else math.inf)
    return float(slope), float(icpt), rel


def classify(series: ScalingSeries, t: float | None = None,
             config: ClassifyConfig | None = None) -> RulingReport:
    """Gapless, symmetry-breaking or undetermined origin of a ground-state degeneracy.

    Parameters
    ----------
    series : ScalingSeries
    t : float, optional
        Family member to classify; required when the series has several.
    config : ClassifyConfig, optional

    Raises
    ------
    ValueError
        Fewer than ``min_points`` sizes or a size span below ``min_span``.
    """
    cfg = config or ClassifyConfig()
    if t is None:
        if len(series.t_grid) != 1:
            raise ValueError("series holds several family members; pass t")
        t = series.t_grid[0]
    cells = [c for c in series.at(t) if c.ok]
    ns = np.array([c.n for c in cells], dtype=float)
    if len(cells) < cfg.min_points or ns.max() / ns.min() < cfg.min_span:
        raise ValueError(f"classification needs at least {cfg.min_points} solved sizes spanning a "
                         f"factor of {cfg.min_span:g}; got N = {[int(n) for n in ns]}")
    g01 = np.array([c.gap01 for c in cells])
    g12 = np.array([c.gap12 for c in cells])
    noise = np.array([max(cfg.floor, cfg.rel_noise * max(1.0, abs(c.e0)) if math.isfinite(c.e0) else cfg.floor)
                      for c in cells])
    resolved = g01 > noise
    zero12 = (g12 <= noise) | (g12 <= 1e-6 * np.where(resolved, g01, 0.0))
    notes = []
    face_growth = [[int(c.n), float(c.face_diameter)] for c in cells]
    nan = float("nan")

    # power law of the splitting over resolved sizes
    gap_fit = {"exponent": nan, "amplitude": nan, "residual": nan}
    if resolved.sum() >= 2:
        slope, icpt, rel = _linfit(np.log(ns[resolved]), np.log(g01[resolved]))
        gap_fit = {"exponent": -slope, "amplitude": math.exp(icpt), "residual": rel}
    if (~resolved).any():
        notes.append("gap01 below resolution at N = " + ", ".join(str(int(n)) for n in ns[~resolved]))

    # splitting ratio against N over sizes where both gaps are resolved
    both = resolved & ~zero12
    ratio_fit = {"slope": nan, "residual": nan}
    log_ratio = np.log(np.maximum(g01, cfg.floor) / np.maximum(g12, cfg.floor))
    if both.sum() >= 2:
        slope, _, rel = _linfit(ns[both], log_ratio[both])
        ratio_fit = {"slope": slope, "residual": rel}

    # gapless test
    p = gap_fit["exponent"]
    gapless = False
    if resolved.sum() >= 3 and math.isfinite(p):
        p_ok = abs(p - cfg.exponent) <= cfg.exponent_tol
        fit_ok = gap_fit["residual"] < cfg.max_residual
        fit_cells = resolved
        if zero12[fit_cells].all():
            g12_ok, g12_note = True, "gap12 vanishes at every fitted N"
        elif (~zero12[fit_cells]).sum() >= 2:
            s12, _, _ = _linfit(np.log(ns[fit_cells & ~zero12]), np.log(g12[fit_cells & ~zero12]))
            g12_ok = -s12 >= p - cfg.gap12_slack
            g12_note = f"gap12 exponent {-s12:.3g}"
        else:
            g12_ok, g12_note = False, "gap12 neither vanishing nor fittable"
        gapless = p_ok and fit_ok and g12_ok
        notes.append(f"gapless test: gap01 ~ N^-{p:.4g} (relative residual {gap_fit['residual']:.3g}); {g12_note}")

    # symmetry-breaking test
    sb = False
    if not gapless:
        g12_fit = ~zero12 & np.isfinite(g12)
        bounded = False
        if zero12.any():
            notes.append("gap12 vanishes at some N")
        elif g12_fit.sum() >= 2:
            s12, _, _ = _linfit(np.log(ns[g12_fit]), np.log(g12[g12_fit]))
            bounded = -s12 <= cfg.bounded_exponent
            notes.append(f"symmetry-breaking test: gap12 exponent {-s12:.3g} (bounded below: {bounded})")
        superpoly = False
        idx = np.flatnonzero(resolved)
        tail_ok = idx.size == 0 or resolved[: idx[-1] + 1].all()
        if idx.size == 0:
            superpoly = True
            notes.append("ground doublet exactly degenerate at every N")
        elif not tail_ok:
            notes.append("unresolved splittings interleave with resolved ones")
        elif idx.size >= 3:
            s_lin, _, r_lin = _linfit(ns[resolved], log_ratio[resolved])
            _, _, r_log = _linfit(np.log(ns[resolved]), log_ratio[resolved])
            ratio_fit = {"slope": s_lin, "residual": r_lin}
            superpoly = s_lin < 0 and r_lin <= r_log and r_lin < cfg.max_split_residual
            notes.append(f"log(gap01/gap12) vs N: slope {s_lin:.4g}, residual {r_lin:.3g} "
                         f"(vs log N residual {r_log:.3g})")
        else:
            dec = np.all(np.diff(log_ratio[resolved]) < 0) if idx.size == 2 else True
            superpoly = bool(dec and (~resolved).any())
            notes.append("splitting falls below resolution after "
                         f"{idx.size} resolved size(s)" if superpoly else
                         "too few resolved splittings to judge their decay")
        sb = bounded and superpoly

    verdict = "gapless" if gapless else ("symmetry_breaking" if sb else "undetermined")
    return RulingReport(verdict, gap_fit, ratio_fit, face_growth, "; ".join(notes))


# --------------------------------------------------------------------------
# convergence of projected boundaries

def convergence_metric(finite_points, limit_polyline) -> float:
    """Symmetric Hausdorff distance between a finite-N projected boundary and
    a limit boundary.

    ``finite_points`` is any 2-D point set; its convex hull polygon is
    compared with ``limit_polyline`` by exact point-to-segment distances in
    both directions (each polyline is densified against the other).
    """
    pts = np.atleast_2d(np.asarray(finite_points, dtype=float))
    lim = np.atleast_2d(np.asarray(limit_polyline, dtype=float))
    if pts.size == 0 or lim.size == 0:
        raise ValueError("both boundaries must be non-empty")
    if pts.shape[1] != 2 or lim.shape[1] != 2:
        raise ValueError("boundaries must be 2-D")
    hull = convex_hull_2d(pts)
    if len(hull) < 3:
        raise ValueError("finite boundary is degenerate (fewer than three hull vertices)")
    if len(lim) < 2:
        raise ValueError("limit polyline is degenerate (a single point)")
    poly = closed(hull)
    scale = max(np.ptp(poly, axis=0).max(), np.ptp(lim, axis=0).max(), 1e-300)
    return hausdorff_distance(poly, lim, max_segment=scale / 2000)


def limit_polyline(model, plane: str = "xy", samples: int = 721) -> np.ndarray:
    """Closed outline of the large-N body projected onto ``plane``."""
    name = model_preset(model).name
    s = np.linspace(-1.0, 1.0, samples)
    if (name, plane) == ("ising", "xy"):
        pts = np.c_[1.0 - s ** 2, s]                 # x = 1 - y^2, closed by x = 0
    elif (name, plane) == ("ising", "xz"):
        pts = np.c_[s ** 2, s]                       # x = z^2, closed by x = 1
    elif (name, plane) == ("ising", "yz"):
        a = np.linspace(0.0, 2.0 * np.pi, samples)
        pts = np.c_[np.cos(a), np.sin(a)]
    elif (name, plane) == ("xy", "xy"):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    elif name == "xy" and plane in ("xz", "yz"):
        pts = np.c_[1.0 - s ** 2, s]
    else:
        raise ValueError(f"unknown projection plane {plane!r}")
    return closed(pts)
