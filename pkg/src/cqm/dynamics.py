"""Unitary evolution, infinite-time averages and the ground functional.

Sign convention: ``U(t) = sum_n p_n exp(i E_n t)`` and observables evolve as
``A(t) = U(t)^-1 A U(t)``. For ``H = E0 tau_3`` this is
``exp(-i E0 t tau_3) A exp(i E0 t tau_3)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (Observable, SpectralDecomposition, as_matrix, dagger, make_observable,
                      spectral_decomposition)
from .contexts import DEFAULT_TOL, Context, joint_context
from .errors import DegenerateGround, DimMismatch, NotGroundState, ValidationError
from .probability import StateFunctional
from .states import PhysicalState, evaluate


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    observable: Observable
    decomposition: SpectralDecomposition = field(repr=False)

    @classmethod
    def from_matrix(cls, h, degeneracy_tol: float | None = None) -> "Hamiltonian":
        obs = make_observable(h)
        return cls(obs, spectral_decomposition(obs, degeneracy_tol))

    @property
    def dim(self) -> int:
        return self.observable.dim

    @property
    def ground_energy(self) -> float:
        return self.decomposition.eigenvalues[0]

    @property
    def nondegenerate_ground(self) -> bool:
        return self.decomposition.multiplicities[0] == 1

    def unitary(self, t: float) -> np.ndarray:
        return self.decomposition.function(lambda e: np.exp(1j * e * t))


def _as_hamiltonian(h) -> Hamiltonian:
    return h if isinstance(h, Hamiltonian) else Hamiltonian.from_matrix(h)


def _check_dims(a: np.ndarray, h: Hamiltonian):
    if a.shape[0] != h.dim:
        raise DimMismatch(f"observable dim {a.shape[0]} vs Hamiltonian dim {h.dim}")


def evolve(a, h, t: float):
    """``U(t)^-1 A U(t)``; returns an :class:`Observable` when given one."""
    h = _as_hamiltonian(h)
    m = as_matrix(a)
    _check_dims(m, h)
    if not np.isfinite(t):
        raise ValidationError("time must be finite")
    u = h.unitary(t)
    out = dagger(u) @ m @ u
    if isinstance(a, Observable):
        return make_observable(0.5 * (out + dagger(out)), a.hermiticity_tol)
    return out


def evolve_state_eval(phi: PhysicalState, a, ctx: Context, h, t: float,
                      tol: float = DEFAULT_TOL) -> float:
    """``phi_t(A) = phi(A(t))``, evaluated in ``ctx``.

    The evolved observable generally leaves the context it started in; the
    caller supplies the context that contains ``A(t)``.
    """
    return evaluate(phi, evolve(a, h, t), ctx, tol)


def time_average(a, h):
    """Infinite-time average ``sum_n p_n A p_n`` (exact for a discrete spectrum)."""
    h = _as_hamiltonian(h)
    m = as_matrix(a)
    _check_dims(m, h)
    out = sum(p @ m @ p for p in h.decomposition.projectors)
    if isinstance(a, Observable):
        return make_observable(0.5 * (out + dagger(out)), a.hermiticity_tol)
    return out


def ground_projector(h) -> np.ndarray:
    """Projector onto the lowest level; the level must be nondegenerate."""
    h = _as_hamiltonian(h)
    if not h.nondegenerate_ground:
        raise DegenerateGround(
            f"lowest eigenvalue {h.ground_energy} has multiplicity {h.decomposition.multiplicities[0]}")
    return np.array(h.decomposition.projectors[0])


def ground_functional(h) -> StateFunctional:
    """Psi_0 defined by ``p0 A p0 = Psi_0(A) p0``."""
    return StateFunctional(ground_projector(h))


def hamiltonian_context(h, a=None) -> tuple[Context, int]:
    """A context containing H (and the time average of ``a``), plus the ground index."""
    h = _as_hamiltonian(h)
    p0 = ground_projector(h)
    members = [h.observable]
    if a is not None:
        members.append(time_average(make_observable(a), h))
    ctx = joint_context(members)
    k = int(np.argmax(np.real(np.einsum("ik,ij,jk->k", np.conj(ctx.basis), p0, ctx.basis))))
    return ctx, k


@dataclass
class ErgodicityReport:
    psi0: float
    phi0_of_average: float
    gap: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.gap <= self.tol


def ergodicity_check(h, a, phi0: PhysicalState, ctx: Context,
                     tol: float = 1e-10) -> ErgodicityReport:
    """Compare ``Psi_0(A)`` with ``phi_0(time average of A)`` in a ground valuation.

    Raises
    ------
    NotGroundState
        If ``phi0`` does not value the ground projector at 1 in ``ctx``.
    NotInContext
        If the time-averaged observable is not diagonal in ``ctx``.
    """
    h = _as_hamiltonian(h)
    obs = make_observable(a)
    p0 = ground_projector(h)
    if abs(evaluate(phi0, p0, ctx) - 1.0) > 1e-9:
        raise NotGroundState("phi0 does not assign 1 to the ground projector")
    psi0 = ground_functional(h)(obs.matrix).real
    val = evaluate(phi0, time_average(obs, h), ctx)
    return ErgodicityReport(psi0, val, abs(psi0 - val), tol)
