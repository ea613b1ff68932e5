"""Physical states as contextual valuations.

A valuation on a context picks one joint eigenvector: on a maximal
commutative matrix algebra the real homomorphisms are exactly the maps
``A -> <e_k|A|e_k>``. A :class:`PhysicalState` is therefore a partial map
from context ids to outcome indices, and it may assign different values to
an observable that lives in two contexts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from . import rng
from .algebra import as_matrix, make_observable
from .contexts import DEFAULT_TOL, Context, context_from_vector, in_context, restrict
from .errors import (DimMismatch, InconsistentIntersection, NoContainingContext, UnassignedContext,
                     ValidationError)

SHARED_RAY_TOL = 1e-9


@dataclass(frozen=True)
class PhysicalState:
    assignments: MappingProxyType
    dim: int

    def __init__(self, assignments, dim: int):
        clean = {}
        for cid, k in dict(assignments).items():
            k = int(k)
            if not 0 <= k < dim:
                raise ValidationError(f"outcome {k} out of range for dim {dim}")
            clean[str(cid)] = k
        object.__setattr__(self, "assignments", MappingProxyType(clean))
        object.__setattr__(self, "dim", int(dim))

    def __getitem__(self, cid: str) -> int:
        try:
            return self.assignments[cid]
        except KeyError:
            raise UnassignedContext(f"context {cid} is not assigned") from None

    def __contains__(self, cid) -> bool:
        return cid in self.assignments

    def to_json(self) -> dict:
        return {cid: self.assignments[cid] for cid in sorted(self.assignments)}

    @classmethod
    def from_json(cls, obj: dict, dim: int) -> "PhysicalState":
        return cls(obj, dim)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A preparation: outcome ``outcome`` of context ``anchor_context``."""

    anchor_context: str
    outcome: int
    projector: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.projector.shape[0]

    @property
    def vector(self) -> np.ndarray:
        w, v = np.linalg.eigh(self.projector)
        return v[:, -1]


def prepare(ctx: Context, outcome: int) -> QuantumState:
    if not 0 <= outcome < ctx.dim:
        raise ValidationError(f"outcome {outcome} out of range for dim {ctx.dim}")
    p = ctx.projector(outcome)
    p.setflags(write=False)
    return QuantumState(ctx.id, int(outcome), p)


def prepare_vector(psi) -> tuple[QuantumState, Context]:
    """Preparation of an arbitrary pure vector, with the context it belongs to."""
    ctx, k = context_from_vector(psi)
    return prepare(ctx, k), ctx


@dataclass(frozen=True)
class ValueSet:
    """Distinct values of an observable across contexts, with contributors."""

    values: tuple[float, ...]
    contexts: tuple[tuple[str, ...], ...]

    def __len__(self):
        return len(self.values)

    @property
    def is_singleton(self) -> bool:
        return len(self.values) == 1


def evaluate(phi: PhysicalState, a, ctx: Context, tol: float = DEFAULT_TOL) -> float:
    """Value of ``a`` under the restriction of ``phi`` to ``ctx``."""
    k = phi[ctx.id]
    return float(restrict(a, ctx, tol)[k])


def evaluate_multivalued(phi: PhysicalState, a, contexts, tol: float = DEFAULT_TOL,
                         value_tol: float = 1e-9) -> ValueSet:
    """Every value ``phi`` gives ``a`` over assigned contexts that contain it.

    Values closer than ``value_tol * max(1, |value|)`` are reported once.

    Raises
    ------
    NoContainingContext
        If no assigned context contains ``a``.
    """
    m = as_matrix(a)
    found: list[tuple[float, str]] = []
    for ctx in contexts:
        if ctx.id in phi and in_context(m, ctx, tol):
            found.append((evaluate(phi, m, ctx, tol), ctx.id))
    if not found:
        raise NoContainingContext("no assigned context contains the observable")
    found.sort()
    values: list[float] = []
    contribs: list[list[str]] = []
    for v, cid in found:
        if values and abs(v - values[-1]) <= value_tol * max(1.0, abs(v)):
            contribs[-1].append(cid)
        else:
            values.append(v)
            contribs.append([cid])
    return ValueSet(tuple(values), tuple(tuple(c) for c in contribs))


def is_stable(phi: PhysicalState, a, contexts, tol: float = DEFAULT_TOL) -> bool:
    return evaluate_multivalued(phi, a, contexts, tol).is_singleton


def shared_rays(ctx_a: Context, ctx_b: Context, tol: float = SHARED_RAY_TOL) -> list[tuple[int, int]]:
    """Pairs (j, i) with basis vector j of ``ctx_a`` parallel to vector i of ``ctx_b``."""
    overlap = np.abs(np.conj(ctx_a.basis).T @ ctx_b.basis)
    return [(int(j), int(i)) for j, i in zip(*np.nonzero(overlap >= 1.0 - tol))]


def consistent_outcomes(anchor: Context, anchor_outcome: int, other: Context,
                        tol: float = SHARED_RAY_TOL) -> list[int]:
    """Outcomes of ``other`` that agree with the anchor on every shared rank-1 projector.

    A shared ray is valued 1 in both contexts or 0 in both.
    """
    pairs = shared_rays(anchor, other, tol)
    return [m for m in range(other.dim)
            if all((j == anchor_outcome) == (i == m) for j, i in pairs)]


def construct_physical_state(contexts, anchor: str, anchor_outcome: int, seed: int,
                             tol: float = SHARED_RAY_TOL) -> PhysicalState:
    """Build a valuation single-valued on the anchor context.

    The anchor context gets ``anchor_outcome``. Every other context gets an
    outcome drawn uniformly from those consistent with the anchor on shared
    rank-1 eigenprojectors (all outcomes when nothing is shared). Draws come
    from the counter-based stream keyed by ``(seed, context id)``, so the
    result does not depend on the order of ``contexts``.

    Raises
    ------
    InconsistentIntersection
        If a context has no outcome compatible with the anchor.
    """
    contexts = list(contexts)
    by_id = {c.id: c for c in contexts}
    if anchor not in by_id:
        raise ValidationError(f"anchor {anchor} is not in the family")
    anchor_ctx = by_id[anchor]
    dim = anchor_ctx.dim
    if any(c.dim != dim for c in contexts):
        raise DimMismatch("contexts of different dimensions")
    if not 0 <= anchor_outcome < dim:
        raise ValidationError(f"anchor outcome {anchor_outcome} out of range")
    assign = {anchor: int(anchor_outcome)}
    for cid in sorted(by_id):
        if cid == anchor:
            continue
        allowed = consistent_outcomes(anchor_ctx, anchor_outcome, by_id[cid], tol)
        if not allowed:
            raise InconsistentIntersection(f"no outcome of {cid} matches the anchor on shared rays")
        u = rng.uniforms(seed, "phi/" + cid, 0, 1)[0]
        assign[cid] = allowed[min(int(u * len(allowed)), len(allowed) - 1)]
    return PhysicalState(assign, dim)


@dataclass
class HomomorphismReport:
    trials: int
    max_additive_residual: float = 0.0
    max_multiplicative_residual: float = 0.0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def random_in_context(ctx: Context, generator: np.random.Generator, scale: float = 1.0):
    """Random observable diagonal in the context basis, with its diagonal."""
    d = scale * generator.standard_normal(ctx.dim)
    m = (ctx.basis * d) @ np.conj(ctx.basis).T
    return make_observable(0.5 * (m + np.conj(m).T)), d


def check_homomorphism(phi: PhysicalState, ctx: Context, trials: int = 100, seed: int = 0,
                       tol: float = 1e-9) -> HomomorphismReport:
    """Additivity and multiplicativity of ``phi`` on random in-context pairs."""
    gen = np.random.default_rng(seed)
    rep = HomomorphismReport(trials)
    for t in range(trials):
        a, _ = random_in_context(ctx, gen)
        b, _ = random_in_context(ctx, gen)
        fa, fb = evaluate(phi, a, ctx), evaluate(phi, b, ctx)
        add = abs(evaluate(phi, a.matrix + b.matrix, ctx) - fa - fb)
        mul = abs(evaluate(phi, a.matrix @ b.matrix, ctx) - fa * fb)
        rep.max_additive_residual = max(rep.max_additive_residual, add)
        rep.max_multiplicative_residual = max(rep.max_multiplicative_residual, mul)
        if add > tol or mul > tol:
            rep.violations.append((t, add, mul))
    return rep
