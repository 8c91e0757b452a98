import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rdmgeo.eigen import (DENSE_CUTOFF, ConvergenceError, default_tol_deg, ground_energy_bracket,
                          lowest_eigenpairs, spectrum_full)
from rdmgeo.spinops import MODELS, BandedHermitian, assemble_hamiltonian, build_operator


def ham(model, lam, n):
    return assemble_hamiltonian(MODELS[model].spec(lam, n))


class TestLowestEigenpairs:
    def test_ising_quadratic(self):
        sol = lowest_eigenpairs(ham("ising", [1, 0, 0], 4), 5)
        assert np.allclose(sol.energies, [0, 1, 1, 4, 4], atol=1e-12)
        assert sol.degeneracy == 1

    def test_completed_square_minimum(self):
        sol = lowest_eigenpairs(ham("ising", [1, 0, -1], 100), 2)
        assert sol.e0 == pytest.approx(-25.0, abs=1e-10)
        # ground state is the Jx eigenstate with k = 50
        assert build_operator("Jx", 100).expectation(sol.vectors[:, 0]) == pytest.approx(50.0, abs=1e-8)

    def test_zero_matrix(self):
        sol = lowest_eigenpairs(BandedHermitian(np.zeros((1, 6))), 3)
        assert np.array_equal(sol.energies, np.zeros(3))
        assert sol.degeneracy == 3

    def test_errors(self):
        h = ham("ising", [1, 0, 0], 4)
        with pytest.raises(ValueError):
            lowest_eigenpairs(h, 6)
        with pytest.raises(ValueError):
            lowest_eigenpairs(h, 0)
        with pytest.raises(ValueError):
            lowest_eigenpairs(h, 1, tol_residual=1e-3)
        with pytest.raises(ValueError):
            lowest_eigenpairs(h, 1, strategy="magic")

    def test_nonconvergence_carries_best_residual(self):
        h = ham("xy", [1, -0.7, 0.3], 400)
        with pytest.raises(ConvergenceError) as info:
            lowest_eigenpairs(h, 2, 1e-12, strategy="krylov", max_basis=8, max_restarts=2)
        assert info.value.best_residual > 0

    def test_residuals_and_orthonormality(self, rng):
        h = ham("xy", rng.standard_normal(3), 300)
        sol = lowest_eigenpairs(h, 4, 1e-10, strategy="krylov")
        assert np.all(sol.residuals <= 1e-10 * h.norm_bound())
        v = sol.vectors
        assert np.abs(v.conj().T @ v - np.eye(4)).max() <= 1e-10
        assert np.all(np.diff(sol.energies) >= 0)

    def test_doubly_degenerate_ground_state(self):
        sol = lowest_eigenpairs(ham("ising", [-1, 0, 0], 10), 3)
        assert sol.degeneracy == 2
        assert sol.gap01 == pytest.approx(0.0, abs=1e-12)
        assert sol.ground_space.shape == (11, 2)

    def test_default_tol_deg(self):
        assert default_tol_deg(0.5) == 1e-8
        assert default_tol_deg(-300.0) == pytest.approx(3e-6)


def test_strategy_equivalence(rng):
    for _ in range(50):
        model = rng.choice(["ising", "xy"])
        n = int(rng.integers(10, 400))
        h = ham(model, rng.standard_normal(3), n)
        d = lowest_eigenpairs(h, 3, strategy="dense")
        k = lowest_eigenpairs(h, 3, strategy="krylov")
        si = lowest_eigenpairs(h, 3, strategy="shift-invert")
        assert np.abs(d.energies - k.energies).max() <= 1e-9
        assert np.abs(d.energies - si.energies).max() <= 1e-9


def test_variational_bound(rng):
    h = ham("ising", rng.standard_normal(3), 60)
    e0 = lowest_eigenpairs(h, 1).e0
    for _ in range(100):
        v = rng.standard_normal(61) + 1j * rng.standard_normal(61)
        v /= np.linalg.norm(v)
        assert e0 <= h.expectation(v) + 1e-12


@settings(max_examples=25)
@given(st.sampled_from(["ising", "xy"]), st.integers(2, 80),
       st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_degeneracy_matches_energies(model, n, lam):
    sol = lowest_eigenpairs(ham(model, lam, n), min(4, n + 1))
    assert sol.degeneracy == np.count_nonzero(sol.energies - sol.e0 <= sol.tol_deg)


class TestSpectrumFull:
    def test_xy(self):
        assert np.allclose(spectrum_full(ham("xy", [1, 1, 0], 4)), [2, 2, 5, 5, 6])

    def test_diagonal(self):
        assert np.allclose(spectrum_full(build_operator("Jz", 2)), [-2, 0, 2])

    def test_ising_double_minimum(self):
        w = spectrum_full(ham("ising", [-1, 0, 0], 10))
        assert w[0] == pytest.approx(-10) and w[1] == pytest.approx(-10)
        assert w[2] > -10 + 1

    def test_above_cutoff(self):
        with pytest.raises(ValueError, match="lowest_eigenpairs"):
            spectrum_full(build_operator("Jz", DENSE_CUTOFF))


def test_krylov_beyond_dense_cutoff():
    n = 2400
    sol = lowest_eigenpairs(ham("ising", [1, 0, -1], n), 2)
    assert sol.strategy == "shift-invert"
    assert sol.e0 == pytest.approx(-n / 4, abs=1e-8)
    assert sol.gap01 == pytest.approx(4.0 / n, rel=1e-6)


def test_ground_energy_bracket(rng):
    h = ham("xy", rng.standard_normal(3), 150)
    lo, hi = ground_energy_bracket(h)
    e0 = lowest_eigenpairs(h, 1, strategy="dense").e0
    assert lo < e0 <= hi + 1e-12
    assert hi - lo <= 1e-10 * h.norm_bound()


@pytest.mark.parametrize("strategy", ["krylov", "shift-invert"])
def test_iterative_resolves_exact_doublet(strategy):
    sol = lowest_eigenpairs(ham("ising", [-1, 0, 0], 600), 3, strategy=strategy)
    assert sol.degeneracy == 2
    assert sol.e0 == pytest.approx(-600.0, abs=1e-8)
