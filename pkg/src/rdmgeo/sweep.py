"""Exposed points of the finite-N body by supporting-hyperplane sweeps.

For a unit direction ``lam`` the ground space of ``H(lam)`` touches the
body of projection coordinates ``(x, y, z)`` on the plane
``lam . p = E0 / N``.  Sweeping ``lam`` over a grid of directions traces
the boundary.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .eigen import lowest_eigenpairs
from .geometry import convex_hull_2d, fibonacci_sphere
from .output import write_csv
from .spinops import (BandedHermitian, Model, OperatorKind, assemble_hamiltonian, build_operator,
                      model_preset)

__all__ = [
    "DirectionGrid",
    "BoundaryPoint",
    "TwoRDM",
    "Projection",
    "observable_coords",
    "mixture_coords",
    "boundary_point",
    "resolve_exposed_face",
    "trace_boundary",
    "project_2d",
    "build_two_rdm",
    "pair_operator",
    "write_boundary_csv",
    "BOUNDARY_COLUMNS",
    "FACE_COLUMNS",
    "MAX_FACE_DIM",
    "default_threads",
]

MAX_FACE_DIM = 64
PLANES = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}

BOUNDARY_COLUMNS = ("model", "N", "lambda0", "lambda1", "lambda2", "energy_per_particle",
                    "x", "y", "z", "gap01", "gap12", "degeneracy", "face_vertex_count")
FACE_COLUMNS = ("direction_index", "vx", "vy", "vz")


def default_threads() -> int:
    env = os.environ.get("RDMGEO_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class DirectionGrid:
    """Unit vectors used as Hamiltonian directions."""

    directions: np.ndarray
    scheme: str
    count: int = field(init=False)

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.directions, dtype=float))
        if d.shape[1] != 3 or len(d) == 0:
            raise ValueError("directions must be a nonempty (k, 3) array")
        norms = np.linalg.norm(d, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero direction")
        d = d / norms[:, None]
        if len(np.unique(np.round(d, 12), axis=0)) != len(d):
            raise ValueError("directions must be pairwise distinct")
        d.setflags(write=False)
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "count", len(d))

    def __len__(self):
        return self.count

    @classmethod
    def fibonacci(cls, count: int) -> "DirectionGrid":
        return cls(fibonacci_sphere(count), "fibonacci")

    @classmethod
    def latlong(cls, n_lat: int, n_lon: int) -> "DirectionGrid":
        """Cell-centred polar angles about the lambda2 axis (poles excluded)."""
        theta = (np.arange(n_lat) + 0.5) * np.pi / n_lat
        phi = np.arange(n_lon) * 2.0 * np.pi / n_lon
        t, p = np.meshgrid(theta, phi, indexing="ij")
        d = np.column_stack([(np.sin(t) * np.cos(p)).ravel(), (np.sin(t) * np.sin(p)).ravel(),
                             np.cos(t).ravel()])
        return cls(d, "latlong")

    @classmethod
    def great_circle(cls, plane: str, count: int) -> "DirectionGrid":
        """``count`` equally spaced directions in a coordinate plane of lambda.

        ``plane="xy"`` spans (lambda0, lambda1) and keeps lambda2 = 0, the
        family whose boundary projects onto the xy plane.
        """
        i, j = PLANES[plane]
        phi = np.arange(count) * 2.0 * np.pi / count
        d = np.zeros((count, 3))
        d[:, i] = np.cos(phi)
        d[:, j] = np.sin(phi)
        return cls(d, f"greatcircle({plane},{count})")

    def restrict(self, axis: int, sign: int) -> "DirectionGrid":
        """Keep directions with ``sign * lam[axis] >= 0``."""
        keep = sign * self.directions[:, axis] >= 0
        return DirectionGrid(self.directions[keep], f"{self.scheme}|lam{axis}{'>=' if sign > 0 else '<='}0")


@dataclass(frozen=True)
class BoundaryPoint:
    """Exposed point (or face centroid) of the body for one direction."""

    lam: np.ndarray
    n: int
    coords: np.ndarray
    energy_per_particle: float
    gap01: float
    gap12: float
    degeneracy: int
    face_vertices: np.ndarray
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class TwoRDM:
    """Two-qubit reduced density matrix of a permutation-symmetric state."""

    matrix: np.ndarray

    def expectation(self, op) -> float:
        return float(np.trace(self.matrix @ np.asarray(op)).real)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def swapped(self) -> np.ndarray:
        """The matrix with its two tensor factors exchanged."""
        return self.matrix.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)


@dataclass(frozen=True)
class Projection:
    points: np.ndarray
    hull: np.ndarray
    degenerate: bool


@lru_cache(maxsize=64)
def _operator(kind: OperatorKind, n: int) -> BandedHermitian:
    return build_operator(kind, n)


def _scaled_observables(model: Model, n: int):
    """Operators whose expectations are the projection coordinates."""
    return [(_operator(t, n), t.scaling(n) / n) for t in model.terms]


def observable_coords(model, n: int, state) -> np.ndarray:
    """Projection coordinates ``(f_i(N)/N) <H_i>`` of a normalized state."""
    model = model_preset(model)
    state = np.asarray(state)
    if state.shape != (n + 1,):
        raise ValueError(f"state has shape {state.shape}, expected ({n + 1},)")
    return np.array([s * op.expectation(state) for op, s in _scaled_observables(model, n)])


def mixture_coords(model, n: int, vectors) -> np.ndarray:
    """Coordinates of the uniform mixture over the span of orthonormal ``vectors``.

    Independent of the basis chosen inside the span, unlike the
    coordinates of any single degenerate eigenvector.
    """
    v = np.asarray(vectors)
    if v.ndim == 1:
        v = v[:, None]
    return np.mean([observable_coords(model, n, v[:, i]) for i in range(v.shape[1])], axis=0)


def resolve_exposed_face(ground_vectors, model, n: int, secondary_count: int = 64) -> np.ndarray:
    """Extreme points of the joint numerical range of the observables on a
    degenerate ground space.

    The three scaled observables are compressed to the ``d``-dimensional
    span of ``ground_vectors``.  For each of ``secondary_count`` directions
    ``u`` the top eigenvector of ``u . (A, B, C)`` is an exposed point of
    the range; directions whose top eigenvalue is itself degenerate expose
    an edge rather than a point and are skipped.  Points closer than 1e-7
    are merged.
    """
    model = model_preset(model)
    v = np.asarray(ground_vectors)
    if v.ndim != 2 or v.shape[0] != n + 1:
        raise ValueError("ground_vectors must have shape (N + 1, d)")
    d = v.shape[1]
    if d < 2:
        raise ValueError("an exposed face needs at least two ground vectors")
    if d > MAX_FACE_DIM:
        raise ValueError(f"ground space of dimension {d} exceeds the face cap {MAX_FACE_DIM}")
    if secondary_count < 8:
        raise ValueError("secondary_count must be at least 8")
    comp = []
    for op, s in _scaled_observables(model, n):
        a = s * (v.conj().T @ op.matvec(v))
        comp.append(0.5 * (a + a.conj().T))
    comp = np.array(comp)
    scale = max(np.abs(comp).max(), 1.0)

    found = []
    for u in fibonacci_sphere(secondary_count):
        w, y = np.linalg.eigh(np.tensordot(u, comp, axes=1))
        if w[-1] - w[-2] <= 1e-10 * scale:
            continue
        top = y[:, -1]
        found.append(np.einsum("i,kij,j->k", top.conj(), comp, top).real)
    if not found:
        # every direction degenerate: the compressed observables are scalars
        found = [np.real(np.diagonal(comp, axis1=1, axis2=2)[:, 0])]
    unique = []
    for p in found:
        if all(np.linalg.norm(p - q) > 1e-7 for q in unique):
            unique.append(p)
    out = np.array(unique)
    return out[np.lexsort(np.round(out, 9).T[::-1])]


def boundary_point(model, n: int, lam, *, tol_residual: float = 1e-10, tol_deg: float | None = None,
                   secondary_count: int = 64) -> BoundaryPoint:
    """Exposed face of the body in direction ``lam`` (a unit 3-vector)."""
    model = model_preset(model)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (3,) or abs(np.linalg.norm(lam) - 1.0) > 1e-9:
        raise ValueError("lam must be a unit 3-vector")
    ham = assemble_hamiltonian(model.spec(lam, n))
    dim = n + 1
    m = min(dim, 4)
    while True:
        sol = lowest_eigenpairs(ham, m, tol_residual, tol_deg=tol_deg)
        if sol.degeneracy < m or m == dim:
            break
        m = min(dim, 2 * m)
    if sol.degeneracy == 1:
        coords = observable_coords(model, n, sol.vectors[:, 0])
        face = coords[None, :]
    else:
        face = resolve_exposed_face(sol.ground_space, model, n, secondary_count)
        coords = face.mean(axis=0)
    lam.setflags(write=False)
    return BoundaryPoint(lam, n, coords, sol.e0 / n, sol.gap01, sol.gap12, sol.degeneracy, face)


def _failed(lam, n, exc):
    nan3 = np.full(3, np.nan)
    return BoundaryPoint(np.asarray(lam, dtype=float), n, nan3, float("nan"), float("nan"),
                         float("nan"), 0, np.empty((0, 3)), error=f"{type(exc).__name__}: {exc}")


def trace_boundary(model, n: int, grid: DirectionGrid, *, threads: int | None = None,
                   **kwargs) -> list[BoundaryPoint]:
    """``boundary_point`` for every grid direction, in grid order.

    Failures are recorded on the returned point (``error`` set, NaN
    coordinates) instead of aborting the sweep.
    """
    model = model_preset(model)
    threads = threads or default_threads()

    def one(lam):
        try:
            return boundary_point(model, n, lam, **kwargs)
        except Exception as exc:  # recorded per direction
            return _failed(lam, n, exc)

    if threads == 1 or len(grid) == 1:
        return [one(lam) for lam in grid.directions]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, grid.directions))


def project_2d(points, plane: str = "xy") -> Projection:
    """Drop one coordinate and take the counterclockwise 2-D hull.

    ``points`` may be ``BoundaryPoint`` objects (all face vertices are
    used; failed directions are skipped) or an ``(k, 3)`` array.
    """
    if plane not in PLANES:
        raise ValueError(f"plane must be one of {sorted(PLANES)}")
    if len(points) and isinstance(points[0], BoundaryPoint):
        arr = [p.face_vertices for p in points if p.ok]
        xyz = np.vstack(arr) if arr else np.empty((0, 3))
    else:
        xyz = np.atleast_2d(np.asarray(points, dtype=float))
    if xyz.size == 0:
        raise ValueError("nothing to project")
    if xyz.ndim != 2 or xyz.shape[1] != 3:
        raise ValueError("points must be (k, 3)")
    uv = xyz[:, PLANES[plane]]
    hull = convex_hull_2d(uv)
    return Projection(uv, hull, len(hull) < 3)


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_AXIS_OPS = {"X": OperatorKind.Jx, "Y": OperatorKind.Jy, "Z": OperatorKind.Jz}


def build_two_rdm(n: int, state) -> TwoRDM:
    """Two-particle RDM of a symmetric ``n``-qubit state from collective moments."""
    if n < 2:
        raise ValueError("a two-particle RDM needs N >= 2")
    psi = np.asarray(state)
    if psi.shape != (n + 1,):
        raise ValueError(f"state has shape {psi.shape}, expected ({n + 1},)")
    labels = "XYZ"
    applied = {a: _operator(_AXIS_OPS[a], n).matvec(psi) for a in labels}
    single = {a: float(np.vdot(psi, applied[a]).real) / n for a in labels}
    pair = {}
    for a in labels:
        for b in labels:
            moment = float(np.vdot(applied[a], applied[b]).real)  # Re <J_a J_b>
            if a == b:
                pair[a, b] = (moment - n) / (n * (n - 1))
            else:
                pair[a, b] = moment / (n * (n - 1))
    rho = np.kron(_PAULI["I"], _PAULI["I"]).astype(complex)
    for a in labels:
        rho += single[a] * (np.kron(_PAULI[a], _PAULI["I"]) + np.kron(_PAULI["I"], _PAULI[a]))
        for b in labels:
            rho += pair[a, b] * np.kron(_PAULI[a], _PAULI[b])
    return TwoRDM(rho / 4.0)


def pair_operator(kind, n: int) -> np.ndarray:
    """4x4 operator ``M`` with ``tr(rho2 M) = (f(N)/N) <H>`` for a term kind."""
    kind = OperatorKind(kind)
    eye = np.eye(4, dtype=complex)
    name = kind.value
    if kind is OperatorKind.Identity:
        return eye / n
    axis = name[1].upper()
    single = 0.5 * (np.kron(_PAULI[axis], _PAULI["I"]) + np.kron(_PAULI["I"], _PAULI[axis]))
    if not kind.is_two_body:
        return single
    return eye / n + (n - 1) / n * np.kron(_PAULI[axis], _PAULI[axis])


def write_boundary_csv(fh, faces_fh, model, points, metadata: dict | None = None):
    """Write one row per direction plus the face-vertex table."""
    model = model_preset(model)
    rows, face_rows = [], []
    for idx, p in enumerate(points):
        rows.append([model.name, p.n, *p.lam, p.energy_per_particle, *p.coords, p.gap01, p.gap12,
                     p.degeneracy, len(p.face_vertices)])
        face_rows.extend([idx, *v] for v in p.face_vertices)
    write_csv(fh, BOUNDARY_COLUMNS, rows, metadata)
    if faces_fh is not None:
        write_csv(faces_fh, FACE_COLUMNS, face_rows, metadata)
