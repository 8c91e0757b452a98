"""Reading the phase from the ground-state gaps.

A flat (ruled) piece of the limit body shows up at finite N in one of
two ways.  Either the gap closes like 1/N (a gapless region), or two
levels merge exponentially fast while the next gap stays open
(symmetry breaking).  The scan below computes gap01, gap12 and the
exposed-face diameter over a ladder of N and classifies each family.

Run: python demos/03_phase_diagnostics.py
"""
from rdmgeo.ruling import classify, scan_family

cases = [
    ("ising", "J=1,Bz=0,Bx=t", -1.0, (100, 200, 400, 800)),
    ("ising", "J=-1,Bz=t,Bx=0", 1.0, (10, 20, 40, 80, 160)),
    ("xy", "J1=-1,J2=-1,Bz=t", 0.0, (100, 200, 400, 800)),
]
for model, family, t, ladder in cases:
    series = scan_family(model, family, [t], ladder)
    print(f"{model} {family} at t = {t}")
    for c in series.cells:
        print(f"   N = {c.n:4d}  gap01 = {c.gap01:.3e}  gap12 = {c.gap12:.3e}  "
              f"face diameter = {c.face_diameter:.3e}")
    report = classify(series)
    print(f"   verdict: {report.verdict}  ({report.evidence_notes})\n")
