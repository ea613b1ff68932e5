"""Truncated harmonic oscillator and its time-ordered Green functions.

Two independent routes to ``G(t_1, ..., t_n)``:

* :func:`green_wick` differentiates the generating functional
  ``Z(j) = exp((i/2) \\int\\int j D^c j)`` combinatorially: the n-th derivative
  at ``j = 0`` is a sum over perfect pairings of products of ``i D^c``.
* :func:`green_operator` builds Heisenberg ``Q(t)`` in a Fock truncation,
  multiplies them in time order and reads off the ground-state element.

Heisenberg operators here use the textbook convention
``Q(t) = exp(iHt) Q exp(-iHt)``, which gives ``a(t) = a exp(-i nu t)``. This is
the opposite sign to :func:`cqm.dynamics.evolve`; only this one reproduces the
causal propagator below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .algebra import cstar_norm, dagger
from .dynamics import ground_projector
from .errors import TruncationInsufficient, ValidationError


@dataclass(frozen=True, eq=False)
class FockTruncation:
    levels: int
    nu: float
    lowering: np.ndarray = field(repr=False)
    raising: np.ndarray = field(repr=False)

    @property
    def number(self) -> np.ndarray:
        return self.raising @ self.lowering

    @property
    def position(self) -> np.ndarray:
        return (self.lowering + self.raising) / math.sqrt(2.0 * self.nu)

    @property
    def momentum(self) -> np.ndarray:
        return 1j * math.sqrt(self.nu / 2.0) * (self.raising - self.lowering)

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.nu * (self.number + 0.5 * np.eye(self.levels))

    @property
    def energies(self) -> np.ndarray:
        return self.nu * (np.arange(self.levels) + 0.5)


def build_truncation(levels: int, nu: float) -> FockTruncation:
    """Ladder operators on the lowest ``levels`` Fock states; ``a`` has sqrt(k) above the diagonal."""
    if levels < 2:
        raise ValidationError("need at least 2 levels")
    if not nu > 0:
        raise ValidationError("frequency must be positive")
    a = np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1).astype(complex)
    a.setflags(write=False)
    ad = dagger(a).copy()
    ad.setflags(write=False)
    return FockTruncation(int(levels), float(nu), a, ad)


@dataclass
class GroundLimitReport:
    r_values: list
    distances: list
    expected: list
    monotone: bool
    limit: np.ndarray = field(repr=False)
    matches_ground_projector: bool

    @property
    def exact(self) -> bool:
        return all(d == e for d, e in zip(self.distances, self.expected))


def damping(trunc: FockTruncation, r: float) -> np.ndarray:
    """``exp(-r a^+ a^-)``; diagonal in the Fock basis."""
    return np.diag(np.exp(-r * np.arange(trunc.levels, dtype=float))).astype(complex)


def ground_projector_limit(trunc: FockTruncation, r_values) -> GroundLimitReport:
    """Distance of ``exp(-r a^+ a^-)`` from ``|0><0|`` for increasing ``r``.

    The difference is diagonal with entries ``exp(-r k)``, ``k >= 1``, so its
    norm is exactly ``exp(-r)``.
    """
    r_values = [float(r) for r in r_values]
    if any(r < 0 for r in r_values) or any(b <= a for a, b in zip(r_values, r_values[1:])):
        raise ValidationError("r_values must be non-negative and strictly increasing")
    k = np.arange(1, trunc.levels, dtype=float)
    distances = [float(np.max(np.exp(-r * k))) for r in r_values]
    expected = [float(np.exp(-r)) for r in r_values]
    limit = np.zeros((trunc.levels, trunc.levels), dtype=complex)
    limit[0, 0] = 1.0
    monotone = all(b < a for a, b in zip(distances, distances[1:]))
    p0 = ground_projector(trunc.hamiltonian)
    return GroundLimitReport(r_values, distances, expected, monotone, limit,
                             bool(np.max(np.abs(p0 - limit)) < 1e-12))


def auxiliary_vanishing(trunc: FockTruncation, k: int, l: int, r: float,
                        r2: float | None = None) -> float:
    """``|| exp(-r a^+a^-) (a^+)^k (a^-)^l exp(-r2 a^+a^-) ||`` (``r2`` defaults to ``r``)."""
    if k < 1 or l < 1:
        raise ValidationError("k and l must be >= 1")
    r2 = r if r2 is None else r2
    a, ad = trunc.lowering, trunc.raising
    core = np.linalg.matrix_power(ad, k) @ np.linalg.matrix_power(a, l)
    return cstar_norm(damping(trunc, r) @ core @ damping(trunc, r2))


def causal_propagator(t: float, nu: float) -> complex:
    """``D^c(t) = (1/2pi) \\int dE exp(-itE) / (nu^2 - E^2 - i0)``.

    Closing the contour around the pole at ``E = sign(t) (nu - i0)`` gives
    ``i exp(-i nu |t|) / (2 nu)``.
    """
    if not nu > 0:
        raise ValidationError("frequency must be positive")
    return 1j * np.exp(-1j * nu * abs(t)) / (2.0 * nu)


def propagator_quadrature(t: float, nu: float, eps: float) -> complex:
    """The propagator integral at finite ``eps`` by adaptive quadrature.

    The integrand is even in E, so only the cosine part over [0, inf)
    survives. The region around the pole is integrated with a breakpoint;
    the tail uses QUADPACK's Fourier-integral routine.
    """
    f = lambda e: 1.0 / (nu * nu - e * e - 1j * eps)  # noqa: E731
    w = max(50.0 * eps / nu, 1e-3)
    top = 4.0 * nu
    total = 0j
    for a, b in ((0.0, nu - w), (nu - w, nu + w), (nu + w, top)):
        for part, unit in ((np.real, 1.0), (np.imag, 1j)):
            g = lambda e, part=part: part(f(e)) * math.cos(t * e)  # noqa: E731
            v, _ = integrate.quad(g, a, b, points=[nu] if a < nu < b else None,
                                  limit=2000, epsabs=1e-13, epsrel=1e-12)
            total += unit * v
    for part, unit in ((np.real, 1.0), (np.imag, 1j)):
        g = lambda e, part=part: part(f(e))  # noqa: E731
        if t != 0:
            v, _ = integrate.quad(g, top, np.inf, weight="cos", wvar=abs(t), limlst=200)
        else:
            v, _ = integrate.quad(g, top, np.inf, epsabs=1e-14)
        total += unit * v
    return complex(total / math.pi)


def propagator_extrapolated(t: float, nu: float, eps_values=(1e-2, 1e-3, 1e-4)) -> complex:
    """Quadrature at several ``eps`` extrapolated to ``eps -> 0`` (polynomial fit in eps)."""
    eps = np.asarray(eps_values, dtype=float)
    vals = np.array([propagator_quadrature(t, nu, e) for e in eps])
    # Lagrange extrapolation to eps = 0
    total = 0j
    for i in range(len(eps)):
        others = np.delete(eps, i)
        total += vals[i] * np.prod(others / (others - eps[i]))
    return complex(total)


@dataclass(frozen=True)
class GreenRequest:
    times: tuple[float, ...]
    truncation: FockTruncation

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if not all(math.isfinite(t) for t in self.times):
            raise ValidationError("times must be finite")


@lru_cache(maxsize=None)
def _pairings(n: int) -> tuple:
    def rec(items):
        if not items:
            return [[]]
        first, rest = items[0], items[1:]
        out = []
        for i, partner in enumerate(rest):
            for tail in rec(rest[:i] + rest[i + 1:]):
                out.append([(first, partner)] + tail)
        return out

    return tuple(tuple(p) for p in rec(tuple(range(n))))


def perfect_pairings(n: int) -> tuple:
    """All perfect matchings of ``range(n)`` as tuples of index pairs; empty for odd n."""
    if n % 2:
        return ()
    return _pairings(n)


def green_wick(req: GreenRequest) -> complex:
    """``(1/i)^n d^n Z / dj(t_1)...dj(t_n)`` at ``j = 0``.

    Each pair ``(a, b)`` of a perfect pairing contributes the second
    derivative of the exponent, ``i D^c(t_a - t_b)``.
    """
    times = req.times
    n = len(times)
    if n % 2:
        return 0j
    nu = req.truncation.nu
    total = 0j
    for pairing in perfect_pairings(n):
        term = 1 + 0j
        for a, b in pairing:
            term *= 1j * causal_propagator(times[a] - times[b], nu)
        total += term
    return complex((1 / 1j) ** n * total)


def heisenberg_position(trunc: FockTruncation, t: float) -> np.ndarray:
    phase = np.exp(1j * trunc.energies * t)
    return (phase[:, None] * trunc.position) * np.conj(phase)[None, :]


def _operator_value(trunc: FockTruncation, times) -> complex:
    # stable sort: equal times keep input order (Q(t) commutes with itself)
    order = sorted(range(len(times)), key=lambda i: -times[i])
    vec = np.zeros(trunc.levels, dtype=complex)
    vec[0] = 1.0
    for i in reversed(order):
        vec = heisenberg_position(trunc, times[i]) @ vec
    return complex(vec[0])


def green_operator(req: GreenRequest, tol: float = 1e-8) -> complex:
    """``<0| T Q(t_1) ... Q(t_n) |0>`` in the Fock truncation.

    Raises
    ------
    TruncationInsufficient
        If repeating the computation with twice the levels moves the value
        by more than ``tol * max(1, |value|)``.
    """
    trunc = req.truncation
    value = _operator_value(trunc, req.times)
    doubled = _operator_value(build_truncation(2 * trunc.levels, trunc.nu), req.times)
    if abs(doubled - value) > tol * max(1.0, abs(doubled)):
        raise TruncationInsufficient(
            f"{trunc.levels} levels: value moves by {abs(doubled - value):.3e} when doubled")
    return value


def green_report(req: GreenRequest, tol: float = 1e-8) -> dict:
    w = green_wick(req)
    o = green_operator(req, tol)
    gap = abs(w - o) / max(abs(o), 1e-300) if (w != 0 or o != 0) else 0.0
    return {"times": list(req.times), "wick_value": w, "operator_value": o,
            "N": req.truncation.levels, "relative_gap": float(gap)}
