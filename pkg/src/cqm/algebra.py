"""Finite matrix algebra: observables, spectral decompositions and C*-norms.

Dynamical variables are plain complex ``numpy`` arrays. Observables wrap a
Hermitian array together with the tolerance used to admit it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, DimMismatch, NonFinite, NotHermitian

DEFAULT_HERMITICITY_TOL = 1e-10
DEFAULT_RELATIVE_DEGENERACY = 1e-9


def as_matrix(entries) -> np.ndarray:
    """Validate and copy ``entries`` into a square, finite complex array."""
    if isinstance(entries, Observable):
        return entries.matrix
    m = np.array(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix has NaN or infinite entries")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def _freeze(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian element of the algebra.

    The stored matrix is exactly Hermitian (it has been symmetrised) and
    read-only.
    """

    matrix: np.ndarray
    hermiticity_tol: float = DEFAULT_HERMITICITY_TOL

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"Observable(dim={self.dim})"


def make_observable(entries, tol: float = DEFAULT_HERMITICITY_TOL) -> Observable:
    """Admit ``entries`` as an observable.

    The largest entrywise deviation from the conjugate transpose must not
    exceed ``tol``; the admitted matrix is then replaced by ``(A + A^H)/2``
    so downstream code sees an exactly Hermitian array.

    Raises
    ------
    NotHermitian
        If the deviation exceeds ``tol``.
    NonFinite
        On NaN or infinite entries.
    """
    if isinstance(entries, Observable):
        return entries
    m = as_matrix(entries)
    deviation = float(np.max(np.abs(m - dagger(m))))
    if deviation > tol:
        raise NotHermitian(deviation, tol)
    return Observable(_freeze(0.5 * (m + dagger(m))), tol)


def commutator(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"commutator of {a.shape} and {b.shape} matrices")
    return a @ b - b @ a


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Distinct eigenvalues (ascending) with their orthogonal projectors.

    ``vectors[i]`` holds an orthonormal basis (as columns) of the i-th
    eigenspace, so ``projectors[i] == vectors[i] @ vectors[i].conj().T``.
    """

    eigenvalues: tuple[float, ...]
    projectors: tuple[np.ndarray, ...]
    multiplicities: tuple[int, ...]
    vectors: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def dim(self) -> int:
        return sum(self.multiplicities)

    def reconstruct(self) -> np.ndarray:
        return sum(lam * p for lam, p in zip(self.eigenvalues, self.projectors))

    def function(self, f) -> np.ndarray:
        """Apply a scalar function through the spectrum: sum of f(lambda_i) P_i."""
        return sum(f(lam) * p for lam, p in zip(self.eigenvalues, self.projectors))


def cluster_eigenvalues(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group indices of ascending ``values`` whose consecutive gaps are <= tol."""
    groups = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [np.array(g) for g in groups]


def spectral_decomposition(a, degeneracy_tol: float | None = None,
                           check_tol: float = 1e-8) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix with degenerate clustering.

    Parameters
    ----------
    a : Observable or array_like
        Hermitian input (validated through :func:`make_observable`).
    degeneracy_tol : float, optional
        Absolute gap below which neighbouring eigenvalues are merged.
        Defaults to ``1e-9 * ||A||``.
    check_tol : float
        Relative tolerance for the post-hoc reconstruction check.

    Raises
    ------
    ConvergenceFailure
        If the eigensolver fails or the decomposition does not reproduce
        ``a`` to within ``check_tol * max(1, ||A||)``.
    """
    obs = make_observable(a)
    m = obs.matrix
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"Hermitian eigensolver failed: {exc}") from exc
    scale = float(np.max(np.abs(w)))
    if degeneracy_tol is None:
        degeneracy_tol = DEFAULT_RELATIVE_DEGENERACY * scale
    groups = cluster_eigenvalues(w, degeneracy_tol)
    eigenvalues, projectors, mults, vectors = [], [], [], []
    for g in groups:
        vecs = v[:, g]
        eigenvalues.append(float(np.mean(w[g])))
        projectors.append(_freeze(vecs @ dagger(vecs)))
        mults.append(len(g))
        vectors.append(_freeze(vecs))
    dec = SpectralDecomposition(tuple(eigenvalues), tuple(projectors), tuple(mults), tuple(vectors))
    residual = float(np.max(np.abs(dec.reconstruct() - m)))
    if residual > check_tol * max(1.0, scale):
        raise ConvergenceFailure(f"spectral reconstruction residual {residual:.3e}")
    return dec


def spectrum(a, degeneracy_tol: float | None = None) -> tuple[float, ...]:
    """Distinct eigenvalues, ascending."""
    return spectral_decomposition(a, degeneracy_tol).eigenvalues


def cstar_norm(r) -> float:
    """Operator norm: square root of the largest eigenvalue of R^H R.

    ``R`` is scaled by its largest entry first so tiny or huge matrices do not
    under- or overflow; the norm is zero exactly when ``R`` is.
    """
    r = as_matrix(r)
    top_entry = float(np.max(np.abs(r))) if r.size else 0.0
    if top_entry == 0.0:
        return 0.0
    # power-of-two scaling is exact, even for subnormal entries
    exp = int(np.frexp(top_entry)[1])
    r = np.ldexp(r.real, -exp) + 1j * np.ldexp(r.imag, -exp)
    scale = math.ldexp(1.0, exp)
    try:
        top = np.linalg.eigvalsh(dagger(r) @ r)[-1]
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigensolver failed: {exc}") from exc
    # the largest entry bounds the norm from below, so top >= 1/4 up to rounding
    return scale * float(np.sqrt(max(top, 0.25)))


def check_cstar_identity(r, tol: float = 1e-10) -> bool:
    """True when ``| ||R*R|| - ||R||^2 | <= tol * ||R||^2``."""
    r = as_matrix(r)
    n2 = cstar_norm(r) ** 2
    return abs(cstar_norm(dagger(r) @ r) - n2) <= tol * n2


def hermitian_square_root(r) -> Observable:
    """The positive observable A with A^2 = R^H R."""
    dec = spectral_decomposition(dagger(as_matrix(r)) @ as_matrix(r))
    return make_observable(dec.function(lambda x: np.sqrt(max(x, 0.0))))


def pauli() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The Pauli matrices (tau_1, tau_2, tau_3)."""
    t1 = np.array([[0, 1], [1, 0]], dtype=complex)
    t2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    t3 = np.array([[1, 0], [0, -1]], dtype=complex)
    return t1, t2, t3


def tau(n) -> np.ndarray:
    """tau(n) = n . (tau_1, tau_2, tau_3) for a real 3-vector ``n``."""
    n = np.asarray(n, dtype=float)
    return sum(c * t for c, t in zip(n, pauli()))


def matrix_to_json(m) -> dict:
    """Row-major ``{"dim", "re", "im"}`` encoding."""
    m = as_matrix(m)
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    re = np.array(obj["re"], dtype=float)
    im = np.array(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise DimMismatch("re and im parts differ in shape")
    m = as_matrix(re + 1j * im)
    if "dim" in obj and int(obj["dim"]) != m.shape[0]:
        raise DimMismatch(f"declared dim {obj['dim']} but matrix is {m.shape[0]}x{m.shape[0]}")
    return m
