"""The reduced-state body at finite N and its mean-field limit.

Each coupling direction lam picks out the ground state of H(lam); its
normalized two-body expectations form a boundary point of the convex
body.  As N grows the projected boundary approaches the hull of
product-state images, whose curved and flat pieces are identified here.

Run: python demos/02_boundary_and_limit_body.py
"""
import numpy as np

from rdmgeo.meanfield import boundary_membership, limit_body, meanfield_energy, supporting_plane
from rdmgeo.ruling import convergence_metric, detect_flat_faces, limit_polyline
from rdmgeo.sweep import DirectionGrid, project_2d, trace_boundary

for model in ("ising", "xy"):
    body = limit_body(model, 10_000)
    print(f"{model}: limit body volume {body.volume:.5f}, {len(body.vertices)} vertices, "
          f"Euler characteristic {body.euler_characteristic()}")
    for c in detect_flat_faces(body):
        extra = f"ruling {np.round(c.ruling_direction, 3)}" if c.is_ruled else f"normal {np.round(c.normal, 3)}"
        print(f"   {c.kind:5s} piece, {100 * c.area_fraction:5.1f}% of the surface, {extra}")

print("\nPoints on the Ising boundary and their supporting planes (n . p >= offset)")
for p in [(0.25, 0.0, 0.5), (0.75, 0.5, 0.3), (0.0, 1.0, 0.0)]:
    m = boundary_membership("ising", p)
    print(f"   {p}: {m.name:12s} plane {np.round(supporting_plane('ising', p), 3)}")

e, alpha, point = meanfield_energy("ising", (1, 0, -1))
print(f"\nMean-field energy per particle at lam = (1, 0, -1): {e:.6f} at {np.round(point, 4)}")

print("\nHausdorff distance of the projected finite-N boundary to the limit curve")
for model, plane in (("xy", "xy"), ("ising", "xy"), ("ising", "xz")):
    ref = limit_polyline(model, plane)
    dist = []
    for n in (10, 100, 1000):
        pts = trace_boundary(model, n, DirectionGrid.great_circle(plane, 180))
        dist.append(convergence_metric(project_2d(pts, plane).points, ref))
    print(f"   {model:5s} {plane}: " + "  ".join(f"N={n}: {d:.2e}" for n, d in zip((10, 100, 1000), dist)))
