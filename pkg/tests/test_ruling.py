import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rdmgeo.geometry import fibonacci_sphere
from rdmgeo.meanfield import convex_body, limit_body
from rdmgeo.oracle import analytic_spectrum
from rdmgeo.ruling import (ClassifyConfig, ScalingCell, ScalingSeries, classify, convergence_metric,
                           detect_flat_faces, limit_polyline, parse_family, scan_family)
from rdmgeo.spinops import model_preset
from rdmgeo.sweep import DirectionGrid, project_2d, trace_boundary

LADDER = (100, 200, 400, 800)


@pytest.fixture(scope="module")
def ising_clusters():
    return detect_flat_faces(limit_body("ising", 10_000), 0.02)


@pytest.fixture(scope="module")
def xy_clusters():
    return detect_flat_faces(limit_body("xy", 10_000), 0.02)


@pytest.fixture(scope="module")
def gapless_series():
    return scan_family("ising", "J=1,Bz=0,Bx=t", [-1.0], LADDER)


@pytest.fixture(scope="module")
def sb_series():
    return scan_family("ising", "J=-1,Bz=t,Bx=0", [1.0], (10, 20, 40, 80))


@pytest.fixture(scope="module")
def xy_series():
    return scan_family("xy", "J1=-1,J2=-1,Bz=0", [0.0], LADDER)


def angle(u, v):
    return math.acos(min(1.0, abs(float(np.dot(u, v))) / np.linalg.norm(u) / np.linalg.norm(v)))


class TestDetectFlatFaces:
    def test_ising_two_ruled_sheets(self, ising_clusters):
        ruled = [c for c in ising_clusters if c.is_ruled]
        assert len(ruled) == 2 and len(ising_clusters) == 2
        dirs = sorted(ruled, key=lambda c: abs(c.ruling_direction[2]))
        assert angle(dirs[0].ruling_direction, [0, 1, 0]) <= 0.02
        assert angle(dirs[1].ruling_direction, [0, 0, 1]) <= 0.02

    def test_ising_sheets_match_closed_forms(self, ising_clusters):
        body = limit_body("ising", 10_000)
        for c in ising_clusters:
            x, y, z = body.vertices[np.unique(body.facets[c.facets])].T
            blue, green = np.abs(x - z * z), np.abs(x + y * y - 1)
            own, other = (blue, green) if abs(c.ruling_direction[1]) > 0.9 else (green, blue)
            # seam vertices sit on both sheets
            assert np.minimum(own, other).max() <= 2e-4
            assert np.mean(own <= 2e-4) >= 0.5

    def test_ising_sheets_equal_area(self, ising_clusters):
        a, b = (c.area_fraction for c in ising_clusters)
        assert a == pytest.approx(b, rel=0.02)

    def test_xy_main_sheet_and_two_planes(self, xy_clusters):
        ruled = [c for c in xy_clusters if c.kind == "ruled"]
        flat = [c for c in xy_clusters if c.kind == "flat"]
        assert len(ruled) == 1 and len(flat) == 2
        # rulings at constant z run along (-1, 1, 0)
        assert angle(ruled[0].ruling_direction, [-1, 1, 0]) <= 0.02
        normals = sorted((np.abs(c.normal) for c in flat), key=lambda n: -n[0])
        # sampled vertices near x = 0 have x = a^2 slightly above zero
        assert np.allclose(normals[0], [1, 0, 0], atol=1e-4)
        assert np.allclose(normals[1], [0, 1, 0], atol=1e-4)
        assert all(abs(c.offset) <= 1e-4 for c in flat)

    def test_sphere_has_none(self):
        body = convex_body(fibonacci_sphere(4000))
        assert detect_flat_faces(body, 0.02) == []

    def test_cube_six_flat_faces(self):
        g = np.linspace(-1, 1, 6)
        pts = np.array([(a, b, c) for a in g for b in g for c in g])
        clusters = detect_flat_faces(convex_body(pts), 0.02)
        assert len(clusters) == 6 and all(c.kind == "flat" for c in clusters)
        assert sum(c.area for c in clusters) == pytest.approx(24.0)

    def test_cylinder_is_ruled(self):
        phi = np.linspace(0, 2 * np.pi, 400, endpoint=False)
        pts = np.vstack([np.c_[np.cos(phi), np.sin(phi), np.full_like(phi, h)] for h in (-1, 1)])
        clusters = detect_flat_faces(convex_body(pts), 0.02)
        side = [c for c in clusters if c.is_ruled]
        assert len(side) == 1 and angle(side[0].ruling_direction, [0, 0, 1]) <= 1e-6
        assert sum(c.kind == "flat" for c in clusters) == 2

    def test_errors(self):
        body = limit_body("ising", 500)
        for tol in (0.0, -0.01, 0.2):
            with pytest.raises(ValueError):
                detect_flat_faces(body, tol)
        with pytest.raises(ValueError):
            detect_flat_faces(None)

    def test_deterministic(self):
        body = limit_body("xy", 2000)
        a, b = detect_flat_faces(body), detect_flat_faces(body)
        assert [c.kind for c in a] == [c.kind for c in b]
        assert all(np.array_equal(x.facets, y.facets) for x, y in zip(a, b))


class TestParseFamily:
    def test_basic(self):
        fam = parse_family("J=-1,Bz=t,Bx=0", "ising")
        assert np.allclose(fam(0.5), [-1, 0.5, 0])
        assert fam.text == "J=-1,Bz=t,Bx=0"

    def test_order_and_case_free(self):
        fam = parse_family("bx = 2*t - 1, j=1, BZ=t**2", "ising")
        assert np.allclose(fam(3.0), [1, 9, 5])

    @pytest.mark.parametrize("text", ["J=1,Bz=0", "J=1,Bz=0,Bx=0,J=2", "J=1,Bz=0,Q=0",
                                      "J=1,Bz=0,Bx", "J=__import__('os'),Bz=0,Bx=0",
                                      "J=1,Bz=0,Bx=s", "J=1,Bz=0,Bx=(t"])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            parse_family(text, "ising")


class TestScanFamily:
    def test_gapless_bound(self, gapless_series):
        for c in gapless_series.cells:
            assert c.ok and c.gap01 <= 8.0 / c.n

    def test_gaps_match_completed_square(self, gapless_series):
        for c in gapless_series.cells:
            e = analytic_spectrum("ising_bx", 1.0, -1.0, c.n)
            levels = np.unique(np.round(e, 9))
            assert c.e0 == pytest.approx(e[0], abs=1e-9)
            assert c.gap01 == pytest.approx(levels[1] - levels[0], abs=1e-9)

    def test_xy_gaps_match_closed_form(self, xy_series):
        for c in xy_series.cells:
            e = analytic_spectrum("xy_equal", -1.0, c.n)
            assert c.e0 == pytest.approx(e[0], abs=1e-9)
            assert c.gap01 == pytest.approx(e[1] - e[0], abs=1e-9)

    def test_symmetry_breaking_gaps(self, sb_series):
        g01 = np.array([c.gap01 for c in sb_series.cells])
        g12 = np.array([c.gap12 for c in sb_series.cells])
        resolved = g01 > 1e-12 * 100
        assert np.all(np.diff(np.log(g01[resolved])) < 0)
        assert g12.min() > 1.0

    def test_zero_field_control_exact_doublet(self):
        s = scan_family("ising", "J=-1,Bz=t,Bx=0", [0.0], (10, 20, 40, 80))
        for c in s.cells:
            # exact degeneracy, resolved to rounding of the dense solve
            assert c.degeneracy == 2 and c.gap01 <= 1e-14 * abs(c.e0)
        report = classify(s)
        assert report.verdict == "symmetry_breaking"

    def test_single_cell(self):
        s = scan_family("ising", "J=1,Bz=0,Bx=t", [0.5], [12])
        assert len(s.cells) == 1 and s.cells[0].ok and s.n_values == (12,)

    def test_eps_window(self, xy_series):
        # the xy tower is spaced 4/N: a 1/N window holds the ground state only,
        # a wider one catches the first doublet at every N
        assert all(c.window == 1 and c.face_diameter == 0.0 for c in xy_series.cells)
        wide = scan_family("xy", "J1=-1,J2=-1,Bz=0", [0.0], (100, 200), eps_scale=5.0)
        assert all(c.window == 3 and c.face_diameter > 0 for c in wide.cells)

    def test_callable_family_and_threads(self):
        a = scan_family("xy", lambda t: [t, -1.0, 0.0], [-1.0, -0.5], (8, 16), threads=1)
        b = scan_family("xy", lambda t: [t, -1.0, 0.0], [-1.0, -0.5], (8, 16), threads=4)
        for x, y in zip(a.cells, b.cells):
            assert x.e0 == y.e0 and np.array_equal(x.coords, y.coords)

    def test_errors(self):
        with pytest.raises(ValueError):
            scan_family("ising", "J=1,Bz=0,Bx=t", [], [10])
        with pytest.raises(ValueError):
            scan_family("ising", "J=1,Bz=0,Bx=t", [0.0], [1, 10])

    def test_failure_recorded_per_cell(self):
        s = scan_family("ising", lambda t: [float("nan"), 0, 0], [0.0], [4])
        assert not s.cells[0].ok and "lambda" in s.cells[0].error

    def test_series_invariants(self, gapless_series):
        with pytest.raises(ValueError):
            ScalingSeries(gapless_series.model, "", (-1.0,), (200, 100), gapless_series.cells)
        with pytest.raises(ValueError):
            ScalingSeries(gapless_series.model, "", (-1.0,), LADDER, gapless_series.cells[:-1])

    def test_csv_round_trip(self, sb_series):
        buf = io.StringIO()
        sb_series.write_csv(buf, {"seed": 0})
        text = buf.getvalue()
        assert "# family: J=-1,Bz=t,Bx=0" in text
        back = ScalingSeries.read_csv(io.StringIO(text))
        assert back.n_values == sb_series.n_values and back.family == sb_series.family
        for a, b in zip(back.cells, sb_series.cells):
            assert a.gap01 == b.gap01 and a.gap12 == b.gap12 and np.array_equal(a.coords, b.coords)
        assert classify(back).to_dict() == classify(sb_series).to_dict()

    def test_read_csv_rejects_foreign(self):
        with pytest.raises(ValueError):
            ScalingSeries.read_csv(io.StringIO("a,b\n1,2\n"))


class TestClassify:
    def test_gapless(self, gapless_series):
        r = classify(gapless_series)
        assert r.verdict == "gapless"
        assert 0.75 <= r.gap_fit["exponent"] <= 1.25
        assert r.gap_fit["residual"] < 0.05

    def test_symmetry_breaking(self, sb_series):
        r = classify(sb_series)
        assert r.verdict == "symmetry_breaking"
        assert r.splitting_ratio_fit["slope"] < 0

    def test_xy_gapless(self, xy_series):
        assert classify(xy_series).verdict == "gapless"

    def test_gapped_unique_ground_state_undetermined(self):
        s = scan_family("ising", "J=1,Bz=t,Bx=0", [1.0], (10, 20, 40, 80))
        r = classify(s)
        assert r.verdict == "undetermined" and r.evidence_notes

    @settings(max_examples=20)
    @given(st.floats(-2, 2))
    def test_rescaling_invariance(self, sb_series, gapless_series, log_c):
        c = 10.0 ** log_c
        for s in (sb_series, gapless_series):
            a, b = classify(s), classify(s.rescaled(c))
            assert a.verdict == b.verdict
            assert b.gap_fit["exponent"] == pytest.approx(a.gap_fit["exponent"], abs=1e-9)
            if math.isfinite(a.splitting_ratio_fit["slope"]):
                assert b.splitting_ratio_fit["slope"] == pytest.approx(a.splitting_ratio_fit["slope"],
                                                                       abs=1e-9)

    def test_insufficient_span(self):
        s = scan_family("ising", "J=1,Bz=0,Bx=t", [-1.0], (100, 200, 400))
        with pytest.raises(ValueError):
            classify(s)
        s = scan_family("ising", "J=1,Bz=0,Bx=t", [-1.0], (100, 120, 160, 200))
        with pytest.raises(ValueError):
            classify(s)

    def test_needs_t_for_multi_member_series(self):
        s = scan_family("ising", "J=-1,Bz=t,Bx=0", [0.5, 1.0], (10, 20, 40, 80))
        with pytest.raises(ValueError):
            classify(s)
        assert classify(s, 0.5).verdict == "symmetry_breaking"
        with pytest.raises(KeyError):
            classify(s, 0.7)

    def test_thresholds_configurable(self, gapless_series):
        strict = ClassifyConfig(exponent=2.0)
        assert classify(gapless_series, config=strict).verdict != "gapless"

    def test_json_fields(self, gapless_series):
        doc = json.loads(classify(gapless_series).to_json())
        assert set(doc) == {"verdict", "gap_fit", "splitting_ratio_fit", "face_growth", "evidence_notes"}
        assert set(doc["gap_fit"]) == {"exponent", "amplitude", "residual"}
        assert set(doc["splitting_ratio_fit"]) == {"slope", "residual"}
        assert [row[0] for row in doc["face_growth"]] == list(LADDER)
        assert all(len(row) == 2 for row in doc["face_growth"])
        assert isinstance(doc["evidence_notes"], str)

    def test_json_nan_becomes_null(self):
        s = scan_family("ising", "J=-1,Bz=t,Bx=0", [0.0], (10, 20, 40, 80))
        doc = json.loads(classify(s).to_json())
        assert doc["gap_fit"]["exponent"] is None

    def test_synthetic_power_law(self):
        model = model_preset("ising")
        ns = (16, 32, 64, 128, 256)
        cells = [ScalingCell(0.0, n, np.zeros(3), -1.0, 3.0 / n, 2.0 / n, 1, 3, 0.1, np.zeros(3))
                 for n in ns]
        s = ScalingSeries(model, "synthetic", (0.0,), ns, tuple(cells))
        r = classify(s)
        assert r.verdict == "gapless"
        assert r.gap_fit["exponent"] == pytest.approx(1.0)
        assert r.gap_fit["amplitude"] == pytest.approx(3.0)

    def test_synthetic_exponential_splitting(self):
        model = model_preset("ising")
        ns = (8, 16, 32, 48, 64)
        cells = [ScalingCell(0.0, n, np.zeros(3), -1.0, math.exp(-0.2 * n), 2.0, 1, 1, 0.0, np.zeros(3))
                 for n in ns]
        r = classify(ScalingSeries(model, "synthetic", (0.0,), ns, tuple(cells)))
        assert r.verdict == "symmetry_breaking"
        assert r.splitting_ratio_fit["slope"] == pytest.approx(-0.2)


class TestConvergenceMetric:
    def test_identical(self):
        sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        assert convergence_metric(sq, np.vstack([sq, sq[:1]])) == 0.0

    def test_shifted_square(self):
        sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        lim = np.vstack([sq, sq[:1]]) + [0.1, 0.0]
        assert convergence_metric(sq, lim) == pytest.approx(0.1, abs=1e-12)

    @pytest.mark.parametrize("pts,lim", [
        (np.empty((0, 2)), [[0, 0], [1, 1]]),
        ([[0, 0], [1, 0], [0, 1]], np.empty((0, 2))),
        ([[0, 0], [1, 1], [2, 2]], [[0, 0], [1, 1]]),
        ([[0, 0], [1, 0], [0, 1]], [[0.5, 0.5]]),
        ([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 0], [1, 1]]),
    ])
    def test_degenerate_inputs(self, pts, lim):
        with pytest.raises(ValueError):
            convergence_metric(pts, lim)

    @settings(max_examples=30)
    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 10))
    def test_similarity_covariance(self, dx, dy, s):
        rng = np.random.default_rng(3)
        pts = rng.random((40, 2))
        lim = limit_polyline("xy")
        base = convergence_metric(pts, lim)
        moved = convergence_metric(s * pts + [dx, dy], s * lim + [dx, dy])
        assert moved == pytest.approx(s * base, rel=1e-9, abs=1e-12)

    @pytest.mark.parametrize("model,plane", [("xy", "xy"), ("ising", "xy"), ("ising", "xz")])
    def test_projections_approach_limit(self, model, plane):
        dist = []
        for n in (10, 100, 1000):
            pts = trace_boundary(model, n, DirectionGrid.great_circle(plane, 90))
            dist.append(convergence_metric(project_2d(pts, plane).points, limit_polyline(model, plane)))
        assert dist[0] > dist[1] > dist[2]

    def test_limit_polyline_planes(self):
        assert np.allclose(limit_polyline("xy", "xy"), [[0, 0], [1, 0], [0, 1], [0, 0]])
        for model in ("ising", "xy"):
            for plane in ("xy", "xz", "yz"):
                line = limit_polyline(model, plane)
                assert np.array_equal(line[0], line[-1])
        with pytest.raises(ValueError):
            limit_polyline("ising", "uv")
