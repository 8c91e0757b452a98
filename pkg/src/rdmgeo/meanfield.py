"""Large-N limit bodies built from product states.

In the N -> infinity limit every two-body RDM of a symmetric state is a
mixture of products ``|a><a| (x) |a><a|``, so the limit body is the convex
hull of the images of single-qubit Bloch vectors ``(a, b, c)``.  The
closed-form boundary sheets, tangent planes and ruling segments of the two
models live here too.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .geometry import fibonacci_sphere
from .output import fmt, metadata_lines
from .spinops import model_preset

__all__ = [
    "BlochVector",
    "ConvexBody3",
    "HullDegeneracyError",
    "Membership",
    "extreme_point",
    "extreme_points",
    "convex_body",
    "limit_body",
    "boundary_membership",
    "supporting_plane",
    "ruling_line",
    "meanfield_energy",
]


class HullDegeneracyError(ValueError):
    """The point set spans fewer than three dimensions."""


class Membership(str, enum.Enum):
    ON_CURVED = "on_curved_piece"
    ON_RULED_1 = "on_ruled_piece_1"
    ON_RULED_2 = "on_ruled_piece_2"
    INTERIOR = "interior"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class BlochVector:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if abs(np.sqrt(self.a ** 2 + self.b ** 2 + self.c ** 2) - 1.0) > 1e-12:
            raise ValueError("Bloch vector of a pure state must have unit norm")

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "BlochVector":
        return cls(np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))

    def __array__(self, dtype=None, copy=None):
        return np.array([self.a, self.b, self.c], dtype=dtype)


def extreme_points(model, alphas) -> np.ndarray:
    """Vectorized product-state map for an ``(k, 3)`` array of Bloch vectors."""
    name = model_preset(model).name
    al = np.atleast_2d(np.asarray(alphas, dtype=float))
    a, b, c = al.T
    if name == "ising":
        return np.column_stack([a * a, c, a])
    return np.column_stack([a * a, b * b, c])


def extreme_point(model, alpha) -> np.ndarray:
    """Coordinates of the product state ``|alpha>|alpha>``.

    ``ising`` maps ``(a, b, c)`` to ``(a^2, c, a)``; ``xy`` maps it to
    ``(a^2, b^2, c)``.
    """
    if not isinstance(alpha, BlochVector):
        alpha = BlochVector(*np.asarray(alpha, dtype=float))
    return extreme_points(model, np.asarray(alpha))[0]


@dataclass(frozen=True)
class ConvexBody3:
    """Triangulated convex polytope with outward-oriented facets.

    ``equations[f] = (nx, ny, nz, d)`` with unit outward normal; interior
    points satisfy ``n . p + d <= 0``.
    """

    vertices: np.ndarray
    facets: np.ndarray
    equations: np.ndarray
    neighbors: np.ndarray
    provenance: dict

    @property
    def normals(self) -> np.ndarray:
        return self.equations[:, :3]

    @property
    def facet_areas(self) -> np.ndarray:
        p = self.vertices[self.facets]
        return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)

    @property
    def area(self) -> float:
        return float(self.facet_areas.sum())

    @property
    def volume(self) -> float:
        p = self.vertices[self.facets]
        return float(np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2])).sum() / 6.0)

    def edges(self) -> np.ndarray:
        e = np.sort(np.concatenate([self.facets[:, [0, 1]], self.facets[:, [1, 2]],
                                    self.facets[:, [2, 0]]]), axis=1)
        return np.unique(e, axis=0)

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges()) + len(self.facets)

    def signed_distance(self, points) -> np.ndarray:
        """Largest facet-plane excess; positive outside the body."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(len(pts))
        step = max(1, 2 ** 22 // max(len(self.equations), 1))  # bound the work array
        for s in range(0, len(pts), step):
            out[s:s + step] = (pts[s:s + step] @ self.normals.T + self.equations[:, 3]).max(axis=1)
        return out

    def to_obj(self, metadata: dict | None = None) -> str:
        lines = metadata_lines(metadata)
        lines += ["v " + " ".join(fmt(c) for c in v) for v in self.vertices]
        lines += ["f " + " ".join(str(int(i) + 1) for i in f) for f in self.facets]
        return "\n".join(lines) + "\n"

    def to_json(self, metadata: dict | None = None) -> str:
        doc = {
            "vertices": [[float(c) for c in v] for v in self.vertices],
            "facets": [[int(i) for i in f] for f in self.facets],
            "provenance": self.provenance,
        }
        if metadata is not None:
            doc["metadata"] = metadata
        return json.dumps(doc, sort_keys=True)


def convex_body(points, provenance: dict | None = None) -> ConvexBody3:
    """3-D convex hull of a point cloud, facets oriented outward."""
    provenance = dict(provenance or {})
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    label = provenance.get("model", "point cloud")
    if len(pts) < 4:
        raise HullDegeneracyError(f"{label}: need at least 4 points for a 3-D hull, got {len(pts)}")
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise HullDegeneracyError(f"{label}: points do not span three dimensions ({exc.args[0].splitlines()[0]})") from None
    used = hull.vertices
    remap = np.full(len(pts), -1)
    remap[used] = np.arange(len(used))
    facets = remap[hull.simplices]
    verts = pts[used]
    eq = hull.equations
    tri = verts[facets]
    orient = np.einsum("ij,ij->i", np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), eq[:, :3])
    flip = orient < 0
    facets[flip] = facets[flip][:, [0, 2, 1]]
    return ConvexBody3(verts, facets, eq, hull.neighbors, provenance)


def limit_body(model, sample_count: int = 10_000) -> ConvexBody3:
    """Convex hull of product-state images over a Fibonacci sample of the Bloch sphere."""
    model = model_preset(model)
    pts = extreme_points(model, fibonacci_sphere(sample_count))
    return convex_body(pts, {"kind": "mean_field", "model": model.name, "samples": int(sample_count)})


def _residuals(name, p):
    x, y, z = p
    if name == "ising":
        return {"blue": x - z * z, "green": 1.0 - y * y - x}
    return {"main": 1.0 - z * z - x - y, "x0": x, "y0": y}


def boundary_membership(model, point, tol: float = 1e-9) -> Membership:
    """Locate a point relative to the closed-form limit body.

    Ising: the sheet ``x = z^2`` is ruled piece 1, ``x + y^2 = 1`` is ruled
    piece 2, and their intersection (the curve of extreme points) is the
    curved piece.  XY: ``x + y + z^2 = 1`` is the curved main sheet, the
    planes ``x = 0`` and ``y = 0`` are ruled pieces 1 and 2.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    name = model_preset(model).name
    r = _residuals(name, np.asarray(point, dtype=float))
    if min(r.values()) < -tol:
        return Membership.EXTERIOR
    on = {k: abs(v) <= tol for k, v in r.items()}
    if name == "ising":
        if on["blue"] and on["green"]:
            return Membership.ON_CURVED
        if on["blue"]:
            return Membership.ON_RULED_1
        if on["green"]:
            return Membership.ON_RULED_2
        return Membership.INTERIOR
    if on["main"]:
        return Membership.ON_CURVED
    if on["x0"]:
        return Membership.ON_RULED_1
    if on["y0"]:
        return Membership.ON_RULED_2
    return Membership.INTERIOR


_SHEET_KEYS = {
    "ising": {Membership.ON_RULED_1: "blue", Membership.ON_RULED_2: "green"},
    "xy": {Membership.ON_CURVED: "main", Membership.ON_RULED_1: "x0", Membership.ON_RULED_2: "y0"},
}


def supporting_plane(model, point, tol: float = 1e-9, sheet=None) -> np.ndarray:
    """Tangent plane ``(n0, n1, n2, offset)`` at a boundary point.

    The body lies on the side ``n . p >= offset``.  Where two sheets meet
    (the Ising extreme-point curve, the XY seams) the plane is not unique;
    ``sheet`` then selects which sheet's plane is returned.  By default the
    Ising blue sheet and the XY main sheet take precedence.
    """
    name = model_preset(model).name
    x0, y0, z0 = p = np.asarray(point, dtype=float)
    where = boundary_membership(name, point, tol)
    if where in (Membership.INTERIOR, Membership.EXTERIOR):
        raise ValueError(f"point {tuple(point)} is {where.value}, not on the boundary")
    if sheet is None:
        sheet = Membership.ON_RULED_1 if name == "ising" and where is Membership.ON_CURVED else where
    sheet = Membership(sheet)
    key = _SHEET_KEYS[name].get(sheet)
    if key is None:
        raise ValueError(f"{name} has no boundary sheet {sheet.value}")
    if abs(_residuals(name, p)[key]) > tol:
        raise ValueError(f"point {tuple(point)} does not lie on {sheet.value}")
    if name == "ising":
        if sheet is Membership.ON_RULED_2:
            # x + x0 + 2 y0 y = 2 with the body below
            return np.array([-1.0, -2.0 * y0, 0.0, x0 - 2.0])
        # x + x0 - 2 z0 z = 0 with the body above
        return np.array([1.0, 0.0, -2.0 * z0, -x0])
    if sheet is Membership.ON_CURVED:
        return np.array([-1.0, -1.0, -2.0 * z0, x0 + y0 - 2.0])
    if sheet is Membership.ON_RULED_1:
        return np.array([1.0, 0.0, 0.0, 0.0])
    return np.array([0.0, 1.0, 0.0, 0.0])


def ruling_line(model, sheet, anchor, t: float) -> np.ndarray:
    """Point at parameter ``t`` in [0, 1] along the ruling segment through ``anchor``.

    ``sheet`` is a ``Membership`` value naming a ruled sheet: Ising pieces 1
    and 2 (segments along y and along z), or the XY main sheet (segments
    ``(x, 1 - x - z0^2, z0)``).
    """
    name = model_preset(model).name
    sheet = Membership(sheet)
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    x0, y0, z0 = anchor = np.asarray(anchor, dtype=float)
    where = boundary_membership(name, anchor, 1e-9)
    if where is not sheet and where is not Membership.ON_CURVED:
        raise ValueError(f"anchor {tuple(anchor)} is {where.value}, not on {sheet.value}")
    if name == "ising":
        if sheet is Membership.ON_RULED_1:
            half = np.sqrt(max(1.0 - z0 * z0, 0.0))
            return np.array([x0, (2.0 * t - 1.0) * half, z0])
        if sheet is Membership.ON_RULED_2:
            half = np.sqrt(max(1.0 - y0 * y0, 0.0))
            return np.array([x0, y0, (2.0 * t - 1.0) * half])
    elif sheet is Membership.ON_CURVED:
        x = t * (1.0 - z0 * z0)
        return np.array([x, 1.0 - x - z0 * z0, z0])
    raise ValueError(f"{name} has no ruling family on {sheet.value}")


def _golden(f, lo, hi, tol):
    inv = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def meanfield_energy(model, lam, grid: int = 181, tol: float = 1e-10):
    """Minimum of ``lam . extreme_point(alpha)`` over the Bloch sphere.

    Dense angular grid followed by alternating golden-section refinement of
    the polar and azimuthal angles.  Returns ``(energy, alpha, point)``.
    """
    model = model_preset(model)
    lam = np.asarray(lam, dtype=float)

    def energy(theta, phi):
        al = np.column_stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi),
                              np.cos(theta) * np.ones_like(phi)])
        return extreme_points(model, al) @ lam

    theta = np.linspace(0.0, np.pi, grid)
    phi = np.linspace(0.0, 2.0 * np.pi, 2 * grid - 1)[:-1]
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    e = energy(tt.ravel(), pp.ravel()).reshape(tt.shape)
    i, j = np.unravel_index(np.argmin(e), e.shape)
    th, ph = theta[i], phi[j]
    dth, dph = theta[1] - theta[0], phi[1] - phi[0]
    best = e[i, j]
    for _ in range(100):
        th, _ = _golden(lambda s: energy(np.array([s]), np.array([ph]))[0],
                        max(th - dth, 0.0), min(th + dth, np.pi), 1e-12)
        ph, cur = _golden(lambda s: energy(np.array([th]), np.array([s]))[0], ph - dph, ph + dph, 1e-12)
        dth, dph = max(dth / 2, 1e-9), max(dph / 2, 1e-9)
        if best - cur <= tol and dth <= 1e-6:
            best = min(best, cur)
            break
        best = min(best, cur)
    alpha = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    point = extreme_points(model, alpha)[0]
    return float(point @ lam), alpha, point
