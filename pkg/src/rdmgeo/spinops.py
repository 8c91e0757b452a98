"""Collective spin operators and two-mode Hamiltonians in the Dicke basis.

All operators use the Pauli normalization: the collective operator
``J_a = sum_i sigma_a^i`` is twice the angular-momentum operator of total
spin ``N/2``.  The symmetric subspace of ``N`` qubits is spanned by the
``N + 1`` eigenvectors of ``J_z``, ordered by ascending eigenvalue
``k = -N, -N + 2, ..., N``.
"""
from __future__ import annotations

import enum
import numbers
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "OperatorKind",
    "BandedHermitian",
    "Model",
    "HamiltonianSpec",
    "MODELS",
    "build_operator",
    "assemble_hamiltonian",
    "model_preset",
    "dicke_k",
]


class OperatorKind(enum.Enum):
    """Collective observables available as Hamiltonian terms."""

    Jx = "Jx"
    Jy = "Jy"
    Jz = "Jz"
    Jx2 = "Jx2"
    Jy2 = "Jy2"
    Jz2 = "Jz2"
    Identity = "Identity"

    @property
    def is_two_body(self) -> bool:
        return self in (OperatorKind.Jx2, OperatorKind.Jy2, OperatorKind.Jz2)

    def scaling(self, n: int) -> float:
        """Energy scaling factor: 1 for single-particle terms, 1/N for two-body."""
        return 1.0 / n if self.is_two_body else 1.0


class BandedHermitian:
    """Hermitian matrix stored by its main and upper diagonals.

    ``bands[d, i]`` holds ``M[i, i + d]`` for ``i < dim - d``; the tail of
    each row is zero padding.  The lower triangle is implied by Hermiticity.
    Instances are immutable.

    Parameters
    ----------
    bands : array_like, shape (bandwidth + 1, dim)
        Diagonals of the upper triangle, main diagonal first.  Imaginary
        parts on the main diagonal are discarded.
    """

    def __init__(self, bands):
        bands = np.array(bands, dtype=complex, ndmin=2)
        if bands.ndim != 2 or bands.shape[1] < 1:
            raise ValueError("bands must have shape (bandwidth + 1, dim) with dim >= 1")
        dim = bands.shape[1]
        bands[0] = bands[0].real
        for d in range(1, bands.shape[0]):
            bands[d, max(dim - d, 0):] = 0.0
        # drop trailing all-zero diagonals
        nb = bands.shape[0]
        while nb > 1 and not np.any(bands[nb - 1]):
            nb -= 1
        bands = bands[:nb]
        is_real = not np.any(bands.imag)
        if is_real:
            bands = np.ascontiguousarray(bands.real)
        bands.setflags(write=False)
        self._bands = bands
        self._is_real = is_real

    @property
    def dim(self) -> int:
        return self._bands.shape[1]

    @property
    def bandwidth(self) -> int:
        return self._bands.shape[0] - 1

    @property
    def bands(self) -> np.ndarray:
        return self._bands

    @property
    def is_real(self) -> bool:
        return self._is_real

    def __repr__(self):
        kind = "real" if self.is_real else "complex"
        return f"BandedHermitian(dim={self.dim}, bandwidth={self.bandwidth}, {kind})"

    def diagonal(self, d: int = 0) -> np.ndarray:
        """The ``d``-th upper diagonal (length ``dim - d``)."""
        return self._bands[d, : self.dim - d] if d <= self.bandwidth else np.zeros(max(self.dim - d, 0))

    def to_dense(self) -> np.ndarray:
        n = self.dim
        dtype = float if self.is_real else complex
        out = np.zeros((n, n), dtype=dtype)
        idx = np.arange(n)
        out[idx, idx] = self._bands[0]
        for d in range(1, self.bandwidth + 1):
            b = self._bands[d, : n - d]
            out[idx[: n - d], idx[d:]] = b
            out[idx[d:], idx[: n - d]] = np.conj(b)
        return out

    def to_lapack_upper(self) -> np.ndarray:
        """Upper banded storage as expected by ``scipy.linalg.eig_banded``."""
        u, n = self.bandwidth, self.dim
        ab = np.zeros((u + 1, n), dtype=self._bands.dtype)
        for d in range(u + 1):
            ab[u - d, d:] = self._bands[d, : n - d]
        return ab

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Product ``M @ v`` for a vector or a (dim, k) block."""
        v = np.asarray(v)
        if v.shape[0] != self.dim:
            raise ValueError(f"dimension mismatch: operator {self.dim}, vector {v.shape[0]}")
        n = self.dim
        b0 = self._bands[0]
        if v.ndim == 1:
            out = b0 * v
        else:
            out = b0[:, None] * v
        out = out.astype(np.result_type(out, self._bands, v), copy=False)
        for d in range(1, self.bandwidth + 1):
            b = self._bands[d, : n - d]
            if v.ndim > 1:
                b = b[:, None]
            out[: n - d] += b * v[d:]
            out[d:] += np.conj(b) * v[: n - d]
        return out

    __matmul__ = matvec

    def expectation(self, v: np.ndarray) -> float:
        """Real expectation value ``<v|M|v>`` (no normalization applied)."""
        return float(np.vdot(v, self.matvec(v)).real)

    def _padded(self, bandwidth):
        out = np.zeros((bandwidth + 1, self.dim), dtype=self._bands.dtype)
        out[: self.bandwidth + 1] = self._bands
        return out

    def __add__(self, other):
        if not isinstance(other, BandedHermitian):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        w = max(self.bandwidth, other.bandwidth)
        return BandedHermitian(self._padded(w) + other._padded(w))

    def __mul__(self, scalar):
        if not isinstance(scalar, numbers.Real):
            return NotImplemented
        return BandedHermitian(self._bands * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, BandedHermitian):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self._padded(max(self.bandwidth, other.bandwidth)),
                                                        other._padded(max(self.bandwidth, other.bandwidth)))

    __hash__ = None

    def norm_bound(self) -> float:
        """Cheap upper bound on the spectral norm (max absolute row sum)."""
        n = self.dim
        rows = np.abs(self._bands[0]).astype(float)
        for d in range(1, self.bandwidth + 1):
            a = np.abs(self._bands[d, : n - d])
            rows[: n - d] += a
            rows[d:] += a
        return float(rows.max())


def dicke_k(n: int) -> np.ndarray:
    """``J_z`` eigenvalues labelling the Dicke basis, ascending."""
    return np.arange(-n, n + 1, 2)


def _check_n(n):
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        raise TypeError(f"particle number must be an integer, got {n!r}")
    if n < 1:
        raise ValueError(f"particle number must be >= 1, got {n}")
    return int(n)


def build_operator(kind: OperatorKind | str, n: int) -> BandedHermitian:
    """Matrix of a collective operator on the symmetric subspace of ``n`` qubits.

    Examples
    --------
    >>> build_operator("Jz", 2).to_dense()
    array([[-2.,  0.,  0.],
           [ 0.,  0.,  0.],
           [ 0.,  0.,  2.]])
    """
    kind = OperatorKind(kind)
    n = _check_n(n)
    dim = n + 1
    i = np.arange(dim)
    k = dicke_k(n).astype(float)
    # |<k+2|J_+|k>|^2 = (N - i)(i + 1), kept as exact integers for the squares
    c2 = ((n - i[:-1]) * (i[:-1] + 1)).astype(float)
    c = np.sqrt(c2)

    if kind is OperatorKind.Identity:
        return BandedHermitian(np.ones((1, dim)))
    if kind is OperatorKind.Jz:
        return BandedHermitian(k[None, :])
    if kind is OperatorKind.Jz2:
        return BandedHermitian((k * k)[None, :])

    bands = np.zeros((2, dim), dtype=complex)
    if kind is OperatorKind.Jx:
        bands[1, :-1] = c
        return BandedHermitian(bands)
    if kind is OperatorKind.Jy:
        bands[1, :-1] = 1j * c
        return BandedHermitian(bands)

    diag = np.zeros(dim)
    diag[1:] += c2
    diag[:-1] += c2
    bands = np.zeros((3, dim))
    bands[0] = diag
    sign = 1.0 if kind is OperatorKind.Jx2 else -1.0
    bands[2, : dim - 2] = sign * c[:-1] * c[1:]
    return BandedHermitian(bands)


@dataclass(frozen=True)
class Model:
    """A named choice of three Hamiltonian terms with labelled coefficients."""

    name: str
    terms: tuple
    param_names: tuple

    def spec(self, lam, n: int) -> "HamiltonianSpec":
        return HamiltonianSpec(self.terms, lam, n)

    def describe(self, lam) -> dict:
        return {p: float(v) for p, v in zip(self.param_names, lam)}


MODELS = {
    "ising": Model("ising", (OperatorKind.Jx2, OperatorKind.Jz, OperatorKind.Jx), ("J", "Bz", "Bx")),
    "xy": Model("xy", (OperatorKind.Jx2, OperatorKind.Jy2, OperatorKind.Jz), ("J1", "J2", "Bz")),
}


def model_preset(name: str | Model) -> Model:
    """Look up a model by name (``"ising"`` or ``"xy"``)."""
    if isinstance(name, Model):
        return name
    try:
        return MODELS[str(name).lower()]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; valid presets: {', '.join(sorted(MODELS))}") from None


@dataclass(frozen=True)
class HamiltonianSpec:
    """Three terms, their coefficients and the particle number."""

    terms: tuple
    lam: tuple = field(default=(0.0, 0.0, 0.0))
    n: int = 1

    def __post_init__(self):
        terms = tuple(OperatorKind(t) for t in self.terms)
        if len(terms) != 3:
            raise ValueError("a Hamiltonian has exactly three terms")
        lam = tuple(float(x) for x in np.asarray(self.lam, dtype=float).ravel())
        if len(lam) != 3:
            raise ValueError("lambda must have three components")
        if not all(np.isfinite(lam)):
            raise ValueError("lambda must be finite")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "n", _check_n(self.n))

    @property
    def scalings(self) -> tuple:
        return tuple(t.scaling(self.n) for t in self.terms)


def assemble_hamiltonian(spec: HamiltonianSpec) -> BandedHermitian:
    """``sum_i lam_i f_i(N) H_i`` as a banded matrix."""
    dim = spec.n + 1
    width = max(2 if t.is_two_body else (1 if t in (OperatorKind.Jx, OperatorKind.Jy) else 0)
                for t, lam in zip(spec.terms, spec.lam) if lam != 0.0) if any(spec.lam) else 0
    acc = np.zeros((width + 1, dim), dtype=complex)
    for term, lam, f in zip(spec.terms, spec.lam, spec.scalings):
        if lam == 0.0:
            continue
        op = build_operator(term, spec.n)
        acc[: op.bandwidth + 1] += (lam * f) * op.bands
    return BandedHermitian(acc)
