"""GNS representation of a state on the full n x n matrix algebra.

The algebra is coordinatised by the matrix units ``E_ij`` (index ``i*n + j``
unless a different ``unit_order`` is requested). The Gram matrix
``G[a, b] = Psi(E_a^* E_b)`` is Hermitian positive semidefinite; its null
space is the left ideal ``{R : Psi(R^* R) = 0}``, and the quotient carries
the representation by left multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import as_matrix, cstar_norm, dagger
from .errors import DimMismatch, NotPositive
from .probability import StateFunctional


@dataclass(frozen=True, eq=False)
class GNSRepresentation:
    n: int
    rep_dim: int
    functional: StateFunctional = field(repr=False)
    unit_order: np.ndarray = field(repr=False)
    # Rows map coordinate vectors (in unit_order) to class vectors.
    _embed: np.ndarray = field(repr=False)
    _lift: np.ndarray = field(repr=False)

    def coordinates(self, r) -> np.ndarray:
        r = as_matrix(r)
        if r.shape != (self.n, self.n):
            raise DimMismatch(f"element of shape {r.shape} in a {self.n}x{self.n} algebra")
        return r.reshape(-1)[self.unit_order]

    def embed(self, r) -> np.ndarray:
        """Class vector of ``r`` in the quotient Hilbert space."""
        return self._embed @ self.coordinates(r)

    def rep_map(self, s) -> np.ndarray:
        """Matrix of left multiplication by ``s`` on the quotient."""
        s = as_matrix(s)
        left = np.kron(s, np.eye(self.n))[np.ix_(self.unit_order, self.unit_order)]
        return self._embed @ left @ self._lift

    @property
    def cyclic_vector(self) -> np.ndarray:
        return self.embed(np.eye(self.n))

    def to_json(self) -> dict:
        from .algebra import matrix_to_json

        emb = self._embed
        return {
            "n": self.n,
            "rep_dim": self.rep_dim,
            "weight": matrix_to_json(self.functional.weight),
            "cyclic_vector": {"re": self.cyclic_vector.real.tolist(),
                              "im": self.cyclic_vector.imag.tolist()},
            "embedding": {"rows": int(emb.shape[0]), "cols": int(emb.shape[1]),
                          "re": emb.real.tolist(), "im": emb.imag.tolist()},
        }


def gram_matrix(n: int, psi: StateFunctional, unit_order=None) -> np.ndarray:
    """``G[(ij),(kl)] = Psi(E_ij^* E_kl) = delta_ik Psi(E_jl)``."""
    if psi.dim != n:
        raise DimMismatch(f"functional on dim {psi.dim}, algebra of dim {n}")
    # Psi(E_jl) = weight[l, j]
    g = np.kron(np.eye(n), psi.weight.T)
    if unit_order is not None:
        g = g[np.ix_(unit_order, unit_order)]
    return g


def gns_construct(n: int, psi: StateFunctional, rank_tol: float = 1e-10,
                  unit_order=None) -> GNSRepresentation:
    """GNS representation of ``psi`` on the n x n matrix algebra.

    Gram eigenvalues below ``rank_tol * max eigenvalue`` are treated as null.

    Raises
    ------
    NotPositive
        If the Gram matrix has an eigenvalue below ``-rank_tol * max eigenvalue``.
    """
    order = np.arange(n * n) if unit_order is None else np.asarray(unit_order)
    if sorted(order.tolist()) != list(range(n * n)):
        raise DimMismatch("unit_order must be a permutation of range(n*n)")
    g = gram_matrix(n, psi, order)
    w, u = np.linalg.eigh(0.5 * (g + dagger(g)))
    top = float(w[-1])
    if w[0] < -rank_tol * top:
        raise NotPositive(f"Gram matrix eigenvalue {w[0]:.3e} < 0")
    keep = w > rank_tol * top
    wk, uk = w[keep], u[:, keep]
    embed = np.sqrt(wk)[:, None] * dagger(uk)
    lift = uk / np.sqrt(wk)[None, :]
    return GNSRepresentation(n, int(keep.sum()), psi, order, embed, lift)


@dataclass
class RepresentationReport:
    trials: int
    tol: float
    max_residuals: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _random_element(gen: np.random.Generator, n: int) -> np.ndarray:
    return gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))


def verify_representation(rep: GNSRepresentation, trials: int = 200, seed: int = 0,
                          tol: float = 1e-8) -> RepresentationReport:
    """Check the representation laws on random pairs of algebra elements.

    Checked per pair ``(R, S)``: multiplicativity, *-preservation, that the
    cyclic vector reproduces the state, that left multiplication passes to
    the quotient, that class inner products reproduce ``Psi(R^* S)``, and
    contractivity ``||pi(R)|| <= ||R||``.
    """
    gen = np.random.default_rng(seed)
    report = RepresentationReport(trials, tol)
    n = rep.n
    omega = rep.cyclic_vector
    psi = rep.functional
    names = ("multiplicative", "adjoint", "cyclic", "left_action", "inner_product", "contractive")
    report.max_residuals = {k: 0.0 for k in names}
    pairs = [(np.eye(n, dtype=complex), np.eye(n, dtype=complex))]
    pairs += [(_random_element(gen, n), _random_element(gen, n)) for _ in range(trials)]
    for t, (r, s) in enumerate(pairs):
        pr, ps = rep.rep_map(r), rep.rep_map(s)
        res = {
            "multiplicative": np.max(np.abs(rep.rep_map(r @ s) - pr @ ps)),
            "adjoint": np.max(np.abs(rep.rep_map(dagger(r)) - dagger(pr))),
            "cyclic": abs(np.vdot(omega, pr @ omega) - psi(r)),
            "left_action": np.max(np.abs(ps @ rep.embed(r) - rep.embed(s @ r))),
            "inner_product": abs(np.vdot(rep.embed(r), rep.embed(s)) - psi(dagger(r) @ s)),
            "contractive": max(0.0, cstar_norm(pr) - cstar_norm(r)),
        }
        for k, v in res.items():
            v = float(v)
            report.max_residuals[k] = max(report.max_residuals[k], v)
            if v > tol:
                report.violations.append((t, k, v))
    return report
