"""Contexts: maximal commuting families and their joint eigenbases.

A context is stored as a unitary matrix whose columns are joint eigenvectors
of a commuting family. Columns are put in a canonical form so that two
families with the same joint eigenbasis produce bit-identical contexts with
the same id.

The continuum of maximal commutative subalgebras of the full matrix algebra
is never enumerated; contexts are generated only from an explicit, finite
:class:`ObservableFamily`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .algebra import (Observable, as_matrix, cluster_eigenvalues, commutator, cstar_norm,
                      dagger, make_observable, matrix_from_json, matrix_to_json)
from .errors import (ConvergenceFailure, DimMismatch, FamilyTooLarge, NotCommuting,
                     NotInContext, ValidationError)

DEFAULT_TOL = 1e-9
PHASE_CUTOFF = 1e-12
SORT_RESOLUTION = 1e-8
DEFAULT_CLIQUE_CAP = 10**6


@dataclass(frozen=True, eq=False)
class Context:
    id: str
    basis: np.ndarray = field(repr=False)
    source_observables: tuple[str, ...] = ()
    maximal_within_family: bool = True

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def vector(self, k: int) -> np.ndarray:
        return self.basis[:, k]

    def projector(self, k: int) -> np.ndarray:
        v = self.basis[:, k]
        return np.outer(v, np.conj(v))


@dataclass(frozen=True)
class ObservableFamily:
    labels: tuple[str, ...]
    observables: tuple[Observable, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.observables):
            raise ValidationError("labels and observables differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("family labels must be unique")
        dims = {o.dim for o in self.observables}
        if len(dims) > 1:
            raise DimMismatch(f"family mixes dimensions {sorted(dims)}")

    @classmethod
    def from_pairs(cls, pairs) -> "ObservableFamily":
        labels, obs = zip(*[(str(k), make_observable(v)) for k, v in pairs])
        return cls(tuple(labels), tuple(obs))

    @property
    def dim(self) -> int:
        return self.observables[0].dim

    def __len__(self):
        return len(self.labels)


def _column_key(col: np.ndarray) -> tuple:
    re = np.rint(col.real / SORT_RESOLUTION).astype(np.int64)
    im = np.rint(col.imag / SORT_RESOLUTION).astype(np.int64)
    return tuple(int(x) for pair in zip(re, im) for x in pair)


def canonicalize(basis) -> np.ndarray:
    """Canonical column form of a unitary basis.

    Each column is rephased so that its first component with magnitude above
    1e-12 is real and positive; columns are then sorted in descending
    lexicographic order of their components rounded to 1e-8. The map is
    idempotent bit-for-bit.
    """
    b = np.array(basis, dtype=complex)
    for k in range(b.shape[1]):
        col = b[:, k]
        lead = int(np.argmax(np.abs(col) > PHASE_CUTOFF))
        c = col[lead]
        if c.imag == 0.0 and c.real > 0.0:
            continue
        b[:, k] = col * (np.conj(c) / abs(c))
        b[lead, k] = abs(c)
    order = sorted(range(b.shape[1]), key=lambda k: _column_key(b[:, k]), reverse=True)
    return b[:, order]


def context_id(basis: np.ndarray) -> str:
    h = hashlib.blake2b(digest_size=6)
    for k in range(basis.shape[1]):
        h.update(repr(_column_key(basis[:, k])).encode("ascii"))
    return "ctx-" + h.hexdigest()


def make_context(basis, source_observables=(), maximal_within_family=True,
                 unitarity_tol: float = 1e-10) -> Context:
    """Wrap a unitary basis as a canonical :class:`Context`."""
    b = canonicalize(as_matrix(basis))
    err = float(np.max(np.abs(dagger(b) @ b - np.eye(b.shape[0]))))
    if err > unitarity_tol:
        raise ValidationError(f"context basis is not unitary (error {err:.3e})")
    b.setflags(write=False)
    return Context(context_id(b), b, tuple(source_observables), bool(maximal_within_family))


def complete_subspace(vectors: np.ndarray, dim: int) -> np.ndarray:
    """Deterministic orthonormal basis of the span of ``vectors``.

    The result depends only on the subspace (through its projector), not on
    the particular spanning set: standard unit vectors are projected in and
    Gram-Schmidt'd greedily, always taking the largest remaining residual.
    """
    q, _ = np.linalg.qr(vectors)
    p = q @ dagger(q)
    candidates = p.copy()
    chosen = []
    for _ in range(vectors.shape[1]):
        norms = np.linalg.norm(candidates, axis=0)
        j = int(np.argmax(norms))
        v = candidates[:, j] / norms[j]
        chosen.append(v)
        candidates = candidates - np.outer(v, np.conj(v) @ candidates)
    return np.column_stack(chosen)


def complement_basis(vectors: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the orthogonal complement of ``vectors``."""
    dim = vectors.shape[0]
    q, _ = np.linalg.qr(vectors)
    rest = np.eye(dim) - q @ dagger(q)
    w, v = np.linalg.eigh(rest)
    return complete_subspace(v[:, w > 0.5], dim)


def _refine(blocks, m: np.ndarray, deg_tol: float):
    out = []
    for w in blocks:
        if w.shape[1] == 1:
            out.append(w)
            continue
        sub = dagger(w) @ m @ w
        vals, vecs = np.linalg.eigh(0.5 * (sub + dagger(sub)))
        for g in cluster_eigenvalues(vals, deg_tol):
            out.append(w @ vecs[:, g])
    return out


def _joint_blocks(mats, deg_tol_rel: float):
    dim = mats[0].shape[0]
    blocks = [np.eye(dim, dtype=complex)]
    for m in mats:
        blocks = _refine(blocks, m, deg_tol_rel * max(cstar_norm(m), 1e-300))
    return blocks


def _offdiag_residue(basis: np.ndarray, m: np.ndarray) -> float:
    d = dagger(basis) @ m @ basis
    off = d - np.diag(np.diag(d))
    return float(np.max(np.abs(off))) if off.size else 0.0


def joint_context(commuting, tol: float = DEFAULT_TOL, labels=None,
                  degeneracy_tol: float = 1e-9, seed: int = 12345) -> Context:
    """Joint eigenbasis of a commuting family of observables.

    Each eigenspace of the first observable is refined by the second, and
    so on. If the result fails the post-hoc check (off-diagonal residue
    above ``tol * ||A||`` for some input) the routine falls back to
    diagonalising a fixed pseudo-random real combination of the inputs.
    Joint eigenspaces of dimension > 1 are filled in by
    :func:`complete_subspace` and the context is flagged
    ``maximal_within_family=False``.

    Raises
    ------
    NotCommuting
        If some pair has ``||[A_i, A_j]|| > tol * max(1, ||A_i|| ||A_j||)``.
    ConvergenceFailure
        If neither route produces a valid joint eigenbasis.
    """
    obs = [make_observable(a) for a in commuting]
    if not obs:
        raise ValidationError("joint_context needs at least one observable")
    dim = obs[0].dim
    if any(o.dim != dim for o in obs):
        raise DimMismatch("observables in a context must share a dimension")
    mats = [o.matrix for o in obs]
    norms = [cstar_norm(m) for m in mats]
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            res = cstar_norm(commutator(mats[i], mats[j]))
            if res > tol * max(1.0, norms[i] * norms[j]):
                raise NotCommuting(i, j, res)

    def valid(blocks):
        basis = np.column_stack(blocks)
        return all(_offdiag_residue(basis, m) <= tol * max(n, 1e-300) for m, n in zip(mats, norms))

    blocks = _joint_blocks(mats, degeneracy_tol)
    if not valid(blocks):
        coeffs = np.random.default_rng(seed).standard_normal(len(mats))
        combo = sum(c * m / max(n, 1e-300) for c, m, n in zip(coeffs, mats, norms))
        blocks = _joint_blocks([combo] + mats, degeneracy_tol)
        if not valid(blocks):
            raise ConvergenceFailure("joint diagonalisation failed the post-hoc residue check")
    maximal = all(b.shape[1] == 1 for b in blocks)
    cols = [complete_subspace(b, dim) if b.shape[1] > 1 else b for b in blocks]
    labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(len(obs)))
    return make_context(np.column_stack(cols), labels, maximal)


def commutation_graph(family: ObservableFamily, tol: float = DEFAULT_TOL) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(len(family)))
    mats = [o.matrix for o in family.observables]
    norms = [cstar_norm(m) for m in mats]
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if cstar_norm(commutator(mats[i], mats[j])) <= tol * max(1.0, norms[i] * norms[j]):
                g.add_edge(i, j)
    return g


def maximal_contexts(family: ObservableFamily, tol: float = DEFAULT_TOL,
                     cap: int = DEFAULT_CLIQUE_CAP, min_size: int = 1) -> list[Context]:
    """One context per maximal commuting subset of ``family``.

    Maximal cliques of the commutation graph are enumerated (Bron-Kerbosch
    with pivoting, via networkx); cliques smaller than ``min_size`` are
    dropped. Cliques with the same canonical joint eigenbasis are merged and
    their source labels united. Output is sorted by context id.

    Raises
    ------
    FamilyTooLarge
        If more than ``cap`` maximal cliques exist.
    """
    if len(family) == 0:
        raise ValidationError("empty observable family")
    g = commutation_graph(family, tol)
    cliques = []
    for clique in nx.find_cliques(g):
        cliques.append(sorted(clique))
        if len(cliques) > cap:
            raise FamilyTooLarge(f"more than {cap} maximal commuting subsets")
    merged: dict[str, Context] = {}
    for clique in sorted(cliques):
        if len(clique) < min_size:
            continue
        ctx = joint_context([family.observables[i] for i in clique], tol,
                            labels=[family.labels[i] for i in clique])
        if ctx.id in merged:
            old = merged[ctx.id]
            names = set(old.source_observables) | set(ctx.source_observables)
            ordered = tuple(lbl for lbl in family.labels if lbl in names)
            ctx = Context(old.id, old.basis, ordered,
                          old.maximal_within_family or ctx.maximal_within_family)
        merged[ctx.id] = ctx
    return [merged[k] for k in sorted(merged)]


def in_context(a, ctx: Context, tol: float = DEFAULT_TOL) -> bool:
    """True when ``a`` is diagonal in the context basis up to ``tol * ||a||``."""
    m = as_matrix(a)
    if m.shape[0] != ctx.dim:
        raise DimMismatch(f"observable dim {m.shape[0]} vs context dim {ctx.dim}")
    return _offdiag_residue(ctx.basis, m) <= tol * cstar_norm(m)


def restrict(a, ctx: Context, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Diagonal values <e_k|A|e_k> of an in-context observable, in context order."""
    m = as_matrix(a)
    if not in_context(m, ctx, tol):
        raise NotInContext(f"observable is not diagonal in context {ctx.id}")
    return np.real(np.einsum("ik,ij,jk->k", np.conj(ctx.basis), m, ctx.basis))


def context_from_vector(psi) -> tuple[Context, int]:
    """A context containing the ray of ``psi`` and the index of that ray in it."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    rest = complement_basis(psi[:, None])
    ctx = make_context(np.column_stack([psi, rest]))
    k = int(np.argmax(np.abs(np.conj(ctx.basis).T @ psi)))
    return ctx, k


def context_to_json(ctx: Context) -> dict:
    return {
        "id": ctx.id,
        "basis": matrix_to_json(ctx.basis),
        "sources": list(ctx.source_observables),
        "maximal_within_family": ctx.maximal_within_family,
    }


def context_from_json(obj: dict) -> Context:
    ctx = make_context(matrix_from_json(obj["basis"]), obj.get("sources", ()),
                       obj.get("maximal_within_family", True))
    if "id" in obj and obj["id"] != ctx.id:
        raise ValidationError(f"context id {obj['id']} does not match its basis ({ctx.id})")
    return ctx


def contexts_to_json(contexts) -> list:
    return [context_to_json(c) for c in contexts]
