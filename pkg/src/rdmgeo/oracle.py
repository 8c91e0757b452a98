"""Independent reference results.

Two kinds of ground truth that share no code with the banded pipeline:
Hamiltonians built as explicit sums of Pauli strings on the full ``2^N``
qubit space and projected onto the symmetric subspace, and the closed-form
spectra of the exactly solvable families.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .spinops import OperatorKind, model_preset

__all__ = [
    "MAX_N",
    "FullSpaceModel",
    "pauli_sum",
    "dicke_vectors",
    "full_space_model",
    "brute_force_ground",
    "analytic_spectrum",
]

MAX_N = 12

_PAULI = {
    "I": sp.identity(2, dtype=complex, format="csr"),
    "X": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
    "Y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex)),
    "Z": sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex)),
}


def _check(n):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"N must be a positive integer, got {n!r}")
    if n > MAX_N:
        raise ValueError(f"N = {n} exceeds the full-space limit {MAX_N} (2^N x 2^N matrices)")


def _site(p, j, n):
    """Pauli ``p`` on qubit ``j`` of ``n``."""
    return reduce(lambda a, b: sp.kron(a, b, format="csr"),
                  [_PAULI[p] if s == j else _PAULI["I"] for s in range(n)])


def pauli_sum(kind: OperatorKind | str, n: int) -> sp.csr_matrix:
    """Collective operator on the full space, written out site by site.

    ``Jx = sum_i X_i`` and ``Jx^2 = sum_{i,j} X_i X_j`` (likewise for y, z).
    """
    _check(n)
    kind = OperatorKind(kind)
    dim = 2 ** n
    if kind is OperatorKind.Identity:
        return sp.identity(dim, dtype=complex, format="csr")
    axis = kind.value[1].upper()
    sites = [_site(axis, j, n) for j in range(n)]
    if not kind.is_two_body:
        return reduce(lambda a, b: a + b, sites)
    out = sp.csr_matrix((dim, dim), dtype=complex)
    for i in range(n):
        for j in range(n):
            out = out + sites[i] @ sites[j]
    return out


def dicke_vectors(n: int) -> np.ndarray:
    """Columns are normalized Dicke states in the order of ascending ``Z`` total.

    Column ``i`` is the uniform positive superposition of the bit strings
    with ``i`` zeros (``Z|0> = |0>``), so its collective ``Z`` eigenvalue is
    ``2i - N``.
    """
    _check(n)
    basis = np.zeros((2 ** n, n + 1))
    for ones in range(n + 1):
        col = n - ones
        idx = [sum(1 << (n - 1 - b) for b in c) for c in combinations(range(n), ones)]
        basis[idx, col] = 1.0 / np.sqrt(len(idx))
    return basis


@dataclass(frozen=True)
class FullSpaceModel:
    """Hamiltonian on all ``2^N`` qubit states plus the symmetric basis."""

    n: int
    hamiltonian: np.ndarray
    terms: tuple
    symmetric_basis: np.ndarray

    @property
    def projected(self) -> np.ndarray:
        b = self.symmetric_basis
        h = b.T @ self.hamiltonian @ b
        return 0.5 * (h + h.conj().T)

    def closure_residual(self) -> float:
        """Spectral norm of ``(I - P) H P`` with ``P`` the symmetric projector."""
        b = self.symmetric_basis
        hb = self.hamiltonian @ b
        return float(np.linalg.norm(hb - b @ (b.T @ hb), 2))


@lru_cache(maxsize=8)
def _dense_term(kind, n):
    scale = 1.0 / n if kind.is_two_body else 1.0
    out = (scale * pauli_sum(kind, n)).toarray()
    out.setflags(write=False)
    return out


def full_space_model(model, lam, n: int) -> FullSpaceModel:
    """``sum_i lam_i f_i H_i`` built from Pauli strings, ``f = 1/N`` for quadratic terms."""
    _check(n)
    model = model_preset(model)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (3,):
        raise ValueError("lambda must have three components")
    terms = tuple(_dense_term(kind, n) for kind in model.terms)
    h = sum(c * t for c, t in zip(lam, terms))
    return FullSpaceModel(n, h, terms, dicke_vectors(n))


def brute_force_ground(model, lam, n: int, tol_deg: float = 1e-8):
    """Ground energy and coordinates from the full-space construction.

    Returns
    -------
    e0 : float
    coords : ndarray (3,)
        ``(1/N) tr(rho f_i H_i)``; under degeneracy ``rho`` is the uniform
        mixture over the ground space.
    degeneracy : int
        Levels within ``tol_deg * max(1, |E0|)`` of the ground energy.
    """
    fm = full_space_model(model, lam, n)
    w, v = np.linalg.eigh(fm.projected)
    e0 = w[0]
    d = int(np.count_nonzero(w - e0 <= tol_deg * max(1.0, abs(e0))))
    states = fm.symmetric_basis @ v[:, :d]
    coords = np.array([np.einsum("ik,ij,jk->", states.conj(), t, states).real / (d * n)
                       for t in fm.terms])
    return float(e0), coords, d


def analytic_spectrum(family: str, *args) -> np.ndarray:
    """Closed-form spectra of the exactly solvable families, ascending.

    ``ising_zero_field(J, N)``: ``(J/N) k^2``.
    ``ising_bx(J, Bx, N)``: ``(J/N)(k + N Bx / 2J)^2 - N Bx^2 / 4J``.
    ``xy_equal(J1, N)``: ``(J1/N)(N(N+2) - k^2)``.
    ``k`` runs over ``-N, -N+2, ..., N``.
    """
    try:
        *params, n = args
    except ValueError:
        raise ValueError("missing particle number") from None
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"N must be a positive integer, got {n!r}")
    k = np.arange(-n, n + 1, 2, dtype=float)
    if family == "ising_zero_field":
        (j,) = params
        e = (j / n) * k ** 2
    elif family == "ising_bx":
        j, bx = params
        if j == 0:
            raise ValueError("ising_bx needs J != 0 (the completed square divides by J)")
        e = (j / n) * (k + n * bx / (2 * j)) ** 2 - n * bx ** 2 / (4 * j)
    elif family == "xy_equal":
        (j1,) = params
        e = (j1 / n) * (n * (n + 2) - k ** 2)
    else:
        raise ValueError(f"unknown family {family!r}; expected ising_zero_field, ising_bx or xy_equal")
    return np.sort(e)
