"""Per-device probability spaces, sampling and quantum averages.

Every sample is tagged with the id of the context (measuring device) that
produced it. Statistics are only ever formed inside one tag: combining
samples from different contexts raises :class:`ContextMismatch`. There is
deliberately no API that builds a joint distribution over several contexts.

The measure over physical states is the Born measure of the preparation,
``p_k = |<e_k|psi>|^2``. This is the model's physical input.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .algebra import as_matrix, dagger, spectrum
from .contexts import DEFAULT_TOL, Context, restrict
from .errors import ContextMismatch, DimMismatch, NotPositive, ValidationError
from .states import QuantumState

CHUNK = 1 << 18


def born_weights(prep: QuantumState, ctx: Context) -> np.ndarray:
    """Outcome probabilities ``<e_k| P |e_k>`` of the preparation projector P."""
    if prep.dim != ctx.dim:
        raise DimMismatch(f"preparation dim {prep.dim} vs context dim {ctx.dim}")
    p = np.real(np.einsum("ik,ij,jk->k", np.conj(ctx.basis), prep.projector, ctx.basis))
    p = np.clip(p, 0.0, None)
    return p / p.sum()


@dataclass(frozen=True)
class MeasurementConfig:
    preparation: QuantumState
    context: Context
    trials: int
    seed: int

    def __post_init__(self):
        if int(self.trials) < 1:
            raise ValidationError("trials must be >= 1")


@dataclass(frozen=True, eq=False)
class SampleSet:
    context_id: str
    outcome_counts: np.ndarray = field(repr=False)
    trials: int
    seed: int

    def to_json(self) -> dict:
        return {
            "context_id": self.context_id,
            "trials": int(self.trials),
            "seed": int(self.seed),
            "outcome_counts": [int(c) for c in self.outcome_counts],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["context_id", "outcome", "count"])
        for k, c in enumerate(self.outcome_counts):
            w.writerow([self.context_id, k, int(c)])
        return buf.getvalue()

    @classmethod
    def from_json(cls, obj: dict) -> "SampleSet":
        counts = np.array(obj["outcome_counts"], dtype=np.int64)
        if int(counts.sum()) != int(obj["trials"]):
            raise ValidationError("outcome counts do not sum to trials")
        return cls(obj["context_id"], counts, int(obj["trials"]), int(obj["seed"]))


def draw_outcomes(weights: np.ndarray, seed: int, stream, start: int, count: int) -> np.ndarray:
    """Outcome indices for trials ``start .. start+count-1`` by inverse CDF."""
    cdf = np.cumsum(weights)
    u = rng.uniforms(seed, stream, start, count) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(weights) - 1)


def sample(config: MeasurementConfig, workers: int = 1, chunk: int = CHUNK) -> SampleSet:
    """Draw ``config.trials`` outcomes from the Born weights.

    Trial ``i`` uses the uniform addressed by ``(seed, context id, i)``, so
    the histogram is identical for any ``workers`` or ``chunk``.
    """
    weights = born_weights(config.preparation, config.context)
    n = len(weights)
    trials = int(config.trials)
    starts = list(range(0, trials, chunk))

    def run(start):
        count = min(chunk, trials - start)
        out = draw_outcomes(weights, config.seed, config.context.id, start, count)
        return np.bincount(out, minlength=n)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    counts = np.sum(parts, axis=0).astype(np.int64)
    counts.setflags(write=False)
    return SampleSet(config.context.id, counts, trials, int(config.seed))


def merge_samples(*samples: SampleSet) -> SampleSet:
    """Pool samples taken with the same device. Cross-context pooling is refused."""
    ids = {s.context_id for s in samples}
    if len(ids) != 1:
        raise ContextMismatch(f"cannot pool samples from different contexts: {sorted(ids)}")
    counts = np.sum([s.outcome_counts for s in samples], axis=0).astype(np.int64)
    return SampleSet(samples[0].context_id, counts, sum(s.trials for s in samples), samples[0].seed)


def _values(s: SampleSet, a, ctx: Context, tol: float) -> np.ndarray:
    if s.context_id != ctx.id:
        raise ContextMismatch(f"sample was taken in {s.context_id}, not {ctx.id}")
    return restrict(a, ctx, tol)


def empirical_mean(s: SampleSet, a, ctx: Context, tol: float = DEFAULT_TOL) -> float:
    vals = _values(s, a, ctx, tol)
    return float(np.dot(s.outcome_counts, vals) / s.trials)


def empirical_stderr(s: SampleSet, a, ctx: Context, tol: float = DEFAULT_TOL) -> float:
    """Standard error of :func:`empirical_mean` (plug-in variance, divisor trials - 1)."""
    vals = _values(s, a, ctx, tol)
    mean = np.dot(s.outcome_counts, vals) / s.trials
    if s.trials < 2:
        return float("inf")
    var = np.dot(s.outcome_counts, (vals - mean) ** 2) / (s.trials - 1)
    return float(np.sqrt(var / s.trials))


@dataclass(frozen=True, eq=False)
class StateFunctional:
    """Linear positive normalised functional ``R -> trace(weight @ R)``."""

    weight: np.ndarray

    def __post_init__(self):
        w = as_matrix(self.weight)
        if np.max(np.abs(w - dagger(w))) > 1e-12:
            raise NotPositive("weight matrix is not Hermitian")
        w = 0.5 * (w + dagger(w))
        if np.linalg.eigvalsh(w)[0] < -1e-12:
            raise NotPositive("weight matrix has a negative eigenvalue")
        if abs(np.trace(w).real - 1.0) > 1e-12:
            raise NotPositive(f"weight trace {np.trace(w).real!r} != 1")
        w.setflags(write=False)
        object.__setattr__(self, "weight", w)

    @property
    def dim(self) -> int:
        return self.weight.shape[0]

    def __call__(self, r) -> complex:
        return quantum_average(self, r)

    @classmethod
    def from_state(cls, prep: QuantumState) -> "StateFunctional":
        return cls(np.array(prep.projector))

    @classmethod
    def maximally_mixed(cls, n: int) -> "StateFunctional":
        return cls(np.eye(n, dtype=complex) / n)


def quantum_average(psi: StateFunctional, r) -> complex:
    r = as_matrix(r)
    if r.shape != psi.weight.shape:
        raise DimMismatch(f"functional on dim {psi.dim} applied to {r.shape}")
    return complex(np.trace(psi.weight @ r))


def _spectral_keys(a, vals: np.ndarray, tol: float) -> tuple[list[float], np.ndarray]:
    spec = list(spectrum(a))
    idx = np.array([int(np.argmin([abs(v - s) for s in spec])) for v in vals])
    return spec, idx


def marginal_distribution(prep: QuantumState, ctx: Context, a, tol: float = DEFAULT_TOL) -> dict:
    """Distribution of ``a`` measured with device ``ctx``: eigenvalue -> probability.

    Keys are the distinct eigenvalues of ``a`` (zero-probability ones
    included), so maps from different contexts are directly comparable.
    """
    vals = restrict(a, ctx, tol)
    spec, idx = _spectral_keys(a, vals, tol)
    w = born_weights(prep, ctx)
    return {lam: float(np.sum(w[idx == i])) for i, lam in enumerate(spec)}


def empirical_marginal(s: SampleSet, a, ctx: Context, tol: float = DEFAULT_TOL) -> dict:
    vals = _values(s, a, ctx, tol)
    spec, idx = _spectral_keys(a, vals, tol)
    return {lam: float(np.sum(s.outcome_counts[idx == i]) / s.trials) for i, lam in enumerate(spec)}
