"""Lowest eigenpairs of banded Hermitian matrices.

Small problems (``dim <= DENSE_CUTOFF``) go to LAPACK's banded solver;
larger ones use a restarted block Krylov method with full
reorthogonalization, applied to the shift-inverted matrix
``(H - sigma)^-1`` with ``sigma`` just below the ground energy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .spinops import BandedHermitian

__all__ = [
    "DENSE_CUTOFF",
    "DEFAULT_SEED",
    "ConvergenceError",
    "GroundSolution",
    "lowest_eigenpairs",
    "spectrum_full",
    "default_tol_deg",
    "ground_energy_bracket",
]

DENSE_CUTOFF = 2001
DEFAULT_SEED = 20240611
# distance of the shift below E0, relative to ||H||: close enough to separate
# clustered low levels, far enough to keep (H - sigma) well conditioned
SHIFT_OFFSET = 1e-8


class ConvergenceError(RuntimeError):
    """Iterative eigensolver failed to reach the requested residual."""

    def __init__(self, message, best_residual):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


@dataclass(frozen=True)
class GroundSolution:
    """Low-lying part of a spectrum.

    ``gap01`` and ``gap12`` are NaN when fewer than two (three) levels were
    requested.  ``degeneracy`` counts energies within ``tol_deg`` of the
    lowest one, so it saturates at ``len(energies)``.
    """

    energies: np.ndarray
    vectors: np.ndarray
    gap01: float
    gap12: float
    degeneracy: int
    tol_deg: float
    residuals: np.ndarray
    strategy: str

    @property
    def e0(self) -> float:
        return float(self.energies[0])

    @property
    def ground_space(self) -> np.ndarray:
        return self.vectors[:, : self.degeneracy]


def default_tol_deg(e0: float) -> float:
    return 1e-8 * max(1.0, abs(e0))


def _package(h, energies, vectors, strategy, tol_deg):
    energies = np.asarray(energies, dtype=float)
    order = np.argsort(energies, kind="stable")
    energies, vectors = energies[order], vectors[:, order]
    e0 = energies[0]
    if tol_deg is None:
        tol_deg = default_tol_deg(e0)
    hv = h.matvec(vectors)
    residuals = np.linalg.norm(hv - vectors * energies, axis=0)
    gap01 = float(energies[1] - e0) if len(energies) > 1 else float("nan")
    gap12 = float(energies[2] - energies[1]) if len(energies) > 2 else float("nan")
    degeneracy = int(np.count_nonzero(energies - e0 <= tol_deg))
    energies.setflags(write=False)
    vectors.setflags(write=False)
    return GroundSolution(energies, vectors, max(gap01, 0.0) if gap01 == gap01 else gap01,
                          max(gap12, 0.0) if gap12 == gap12 else gap12,
                          degeneracy, float(tol_deg), residuals, strategy)


def _dense(h, m):
    ab = h.to_lapack_upper()
    if h.dim == 1:
        return np.array([float(ab[0, 0].real)]), np.ones((1, 1), dtype=ab.dtype)
    w, v = la.eig_banded(ab, lower=False, select="i", select_range=(0, m - 1),
                         check_finite=False)
    return w, v


def _orthonormalize(block, basis, rng):
    """Orthonormalize ``block`` against ``basis`` and itself (two passes).

    Columns that vanish are replaced by random directions so the block keeps
    its width.
    """
    for _ in range(2):
        if basis is not None and basis.shape[1]:
            block = block - basis @ (basis.conj().T @ block)
    q, r = np.linalg.qr(block)
    scale = max(np.abs(np.diag(r)).max(initial=0.0), 1.0)
    weak = np.abs(np.diag(r)) < 1e-10 * scale
    if np.any(weak):
        fresh = rng.standard_normal((block.shape[0], int(weak.sum())))
        if np.iscomplexobj(block):
            fresh = fresh + 1j * rng.standard_normal(fresh.shape)
        q[:, weak] = fresh
        full = q[:, ~weak] if basis is None else np.hstack([basis, q[:, ~weak]])
        for _ in range(2):
            q[:, weak] -= full @ (full.conj().T @ q[:, weak])
            q[:, weak], _ = np.linalg.qr(q[:, weak])
    return q


def _block_krylov(h, m, tol_residual, block_size, max_basis, max_restarts, seed, target=None):
    n = h.dim
    dtype = float if h.is_real else complex
    rng = np.random.default_rng(seed)
    p = min(n, block_size)
    norm = max(h.norm_bound(), np.finfo(float).tiny)
    max_basis = min(n, max(max_basis, 2 * p + m))

    x = rng.standard_normal((n, p))
    if dtype is complex:
        x = x + 1j * rng.standard_normal((n, p))
    x = _orthonormalize(x, None, rng)
    best = np.inf
    for _ in range(max_restarts):
        q = x
        hq = h.matvec(q)
        while q.shape[1] < max_basis:
            width = min(p, max_basis - q.shape[1])
            nxt = _orthonormalize(hq[:, -p:][:, :width], q, rng)
            q = np.hstack([q, nxt])
            hq = np.hstack([hq, h.matvec(nxt)])
        t = q.conj().T @ hq
        t = 0.5 * (t + t.conj().T)
        theta, y = la.eigh(t)
        keep = min(q.shape[1], max(m, p) + p)
        ritz = q @ y[:, :keep]
        hritz = hq @ y[:, :keep]
        if target is None:
            res = np.linalg.norm(hritz - ritz * theta[:keep], axis=0)
            worst = res[:m].max() / norm
        else:
            # convergence is judged on the untransformed matrix
            tv = target.matvec(ritz[:, :m])
            e = np.einsum("ij,ij->j", ritz[:, :m].conj(), tv).real
            worst = np.linalg.norm(tv - ritz[:, :m] * e, axis=0).max() / target.norm_bound()
        best = min(best, worst)
        if worst <= tol_residual or q.shape[1] >= n:
            return theta[:m], ritz[:, :m]
        x = _orthonormalize(ritz, None, rng)
    raise ConvergenceError(f"block Krylov solver did not converge in {max_restarts} restarts", best)


class _ShiftInverted:
    """``-(H - sigma)^-1`` through a banded Cholesky factor; needs ``sigma < E0``."""

    def __init__(self, h, sigma, factor, scale):
        self.dim, self.is_real = h.dim, h.is_real
        self._factor, self._scale = factor, scale

    def matvec(self, v):
        return -la.cho_solve_banded((self._factor, False), v, check_finite=False)

    def norm_bound(self):
        return self._scale


def _factor_below(ab, sigma):
    """Cholesky factor of ``H - sigma`` or None when it is not positive definite."""
    shifted = ab.copy()
    shifted[-1] -= sigma
    try:
        return la.cholesky_banded(shifted, lower=False, check_finite=False)
    except la.LinAlgError:
        return None


def ground_energy_bracket(h: BandedHermitian, rel_tol: float = 1e-10):
    """Interval ``(lo, hi]`` containing the lowest eigenvalue.

    Bisection on the shift: ``H - s`` has a Cholesky factorization exactly
    when ``s`` lies below the spectrum.  Each probe costs one banded
    factorization.
    """
    ab = h.to_lapack_upper()
    norm = max(h.norm_bound(), 1.0)
    lo = -norm - 1.0
    hi = float(h.diagonal(0).real.min())
    while hi - lo > rel_tol * norm:
        mid = 0.5 * (lo + hi)
        if _factor_below(ab, mid) is None:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _shift_invert(h, m, tol_residual, block_size, max_basis, max_restarts, seed):
    lo, hi = ground_energy_bracket(h)
    norm = max(h.norm_bound(), 1.0)
    sigma = lo - max(hi - lo, SHIFT_OFFSET * norm)
    factor = _factor_below(h.to_lapack_upper(), sigma)
    if factor is None:  # rounding placed sigma on the spectrum; step further down
        sigma -= 1e-8 * norm
        factor = _factor_below(h.to_lapack_upper(), sigma)
    op = _ShiftInverted(h, sigma, factor, 1.0 / (lo - sigma))
    _, v = _block_krylov(op, m, tol_residual, block_size, max_basis, max_restarts, seed, target=h)
    # Rayleigh-Ritz on the original matrix inside the converged subspace
    q, _ = np.linalg.qr(v)
    t = q.conj().T @ h.matvec(q)
    w, y = la.eigh(0.5 * (t + t.conj().T))
    return w, q @ y


def lowest_eigenpairs(h: BandedHermitian, m: int = 1, tol_residual: float = 1e-10, *,
                      strategy: str = "auto", tol_deg: float | None = None,
                      block_size: int | None = None, max_basis: int = 240,
                      max_restarts: int = 500, seed: int = DEFAULT_SEED) -> GroundSolution:
    """The ``m`` lowest eigenpairs of ``h``.

    Parameters
    ----------
    h : BandedHermitian
    m : int
        Number of eigenpairs, ``1 <= m <= h.dim``.
    tol_residual : float
        Residual target relative to ``||h||``, in ``(0, 1e-4]``.
    strategy : {"auto", "dense", "krylov", "shift-invert"}
        ``auto`` picks the banded LAPACK solver when ``dim <= DENSE_CUTOFF``
        and shift-invert block Krylov above.  ``krylov`` runs block Krylov
        on ``h`` itself, which is slow for clustered low spectra.
    tol_deg : float, optional
        Absolute window for counting ground-state degeneracy; defaults to
        ``1e-8 * max(1, |E0|)``.
    block_size : int, optional
        Krylov block width, at least 2 so that a doubly degenerate ground
        level is resolved.
    seed : int
        Seed of the Krylov start block.

    Raises
    ------
    ConvergenceError
        If the Krylov iteration stalls; carries the best relative residual.
    """
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    if m > h.dim:
        raise ValueError(f"requested {m} eigenpairs of a {h.dim}x{h.dim} matrix")
    if not (0.0 < tol_residual <= 1e-4):
        raise ValueError("tol_residual must lie in (0, 1e-4]")
    if strategy == "auto":
        strategy = "dense" if h.dim <= DENSE_CUTOFF else "shift-invert"
    if strategy == "dense":
        w, v = _dense(h, m)
    elif strategy == "krylov":
        bs = block_size if block_size is not None else max(2, min(m, 6))
        w, v = _block_krylov(h, m, tol_residual, bs, max_basis, max_restarts, seed)
    elif strategy == "shift-invert":
        bs = block_size if block_size is not None else max(2, min(m, 6))
        w, v = _shift_invert(h, m, tol_residual, bs, min(max_basis, 60), max_restarts, seed)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return _package(h, w, np.array(v), strategy, tol_deg)


def spectrum_full(h: BandedHermitian) -> np.ndarray:
    """All eigenvalues of ``h`` in ascending order."""
    if h.dim > DENSE_CUTOFF:
        raise ValueError(f"dim {h.dim} exceeds the dense cutoff {DENSE_CUTOFF}; "
                         "use lowest_eigenpairs for the low end of the spectrum")
    if h.dim == 1:
        return np.array([float(h.bands[0, 0])])
    return np.sort(la.eigvals_banded(h.to_lapack_upper(), lower=False, check_finite=False))
