"""Small computational-geometry helpers shared by the sweep, mean-field and
ruling modules."""
from __future__ import annotations

import numpy as np

__all__ = [
    "fibonacci_sphere",
    "convex_hull_2d",
    "point_to_polyline",
    "directed_hausdorff",
    "hausdorff_distance",
    "closed",
]

_GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def fibonacci_sphere(count: int) -> np.ndarray:
    """``count`` nearly uniform unit vectors (golden-angle spiral)."""
    if count < 1:
        raise ValueError("count must be positive")
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = _GOLDEN_ANGLE * i
    pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points, tol: float = 0.0) -> np.ndarray:
    """Counterclockwise convex hull by Andrew's monotone chain.

    Collinear points are dropped.  Returns the hull vertices without
    repeating the first one; fewer than three rows means the hull is a
    segment or a point.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("empty point set")
    pts = np.unique(pts, axis=0)  # lexicographic sort
    if len(pts) < 3:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= tol:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= tol:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def closed(polyline) -> np.ndarray:
    """Append the first vertex so a polygon becomes a closed polyline."""
    p = np.asarray(polyline, dtype=float)
    if len(p) > 1 and not np.array_equal(p[0], p[-1]):
        p = np.vstack([p, p[:1]])
    return p


def point_to_polyline(points, polyline) -> np.ndarray:
    """Distance from each point to the nearest segment of ``polyline``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    pl = np.atleast_2d(np.asarray(polyline, dtype=float))
    if len(pl) == 1:
        return np.linalg.norm(pts - pl[0], axis=1)
    a, b = pl[:-1], pl[1:]
    ab = b - a
    len2 = np.einsum("ij,ij->i", ab, ab)
    out = np.full(len(pts), np.inf)
    # chunk to bound memory at (chunk x segments)
    for lo in range(0, len(pts), 2048):
        p = pts[lo:lo + 2048, None, :]
        t = np.einsum("psk,sk->ps", p - a[None], ab)
        t = np.where(len2 > 0, t / np.where(len2 > 0, len2, 1.0), 0.0)
        t = np.clip(t, 0.0, 1.0)
        proj = a[None] + t[..., None] * ab[None]
        out[lo:lo + 2048] = np.sqrt(((p - proj) ** 2).sum(-1)).min(axis=1)
    return out


def _densify(polyline, max_segment):
    pl = np.asarray(polyline, dtype=float)
    if max_segment is None or len(pl) < 2:
        return pl
    pieces = [pl[:1]]
    for a, b in zip(pl[:-1], pl[1:]):
        k = max(1, int(np.ceil(np.linalg.norm(b - a) / max_segment)))
        t = np.linspace(0.0, 1.0, k + 1)[1:, None]
        pieces.append(a + t * (b - a))
    return np.vstack(pieces)


def directed_hausdorff(a, b, max_segment: float | None = None) -> float:
    """``max_{p in a} dist(p, b)`` with ``b`` treated as a polyline.

    Points of ``a`` are its vertices, optionally densified so that no
    segment is longer than ``max_segment``.
    """
    return float(point_to_polyline(_densify(a, max_segment), b).max())


def hausdorff_distance(a, b, max_segment: float | None = None) -> float:
    """Symmetric Hausdorff distance between two polylines."""
    return max(directed_hausdorff(a, b, max_segment), directed_hausdorff(b, a, max_segment))
