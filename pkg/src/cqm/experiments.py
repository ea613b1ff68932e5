"""Experiment drivers: CHSH, a noncontextual baseline, Kochen-Specker, Pauli example.

Spin observables carry eigenvalues +-1/2. A CHSH setting angle ``alpha``
is an analyser angle: the measured spin direction is
``(sin 2 alpha, 0, cos 2 alpha)``, so the angle between the directions for
settings ``a`` and ``b`` is ``theta_ab = 2 |a - b|`` (mod 2 pi folding).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .algebra import make_observable, pauli, tau
from .contexts import Context, joint_context, make_context
from .dynamics import Hamiltonian, ergodicity_check, ground_functional, time_average
from .errors import InvalidInstance, ValidationError
from .probability import MeasurementConfig, empirical_mean, empirical_stderr, sample
from .states import PhysicalState, evaluate, prepare_vector

CHSH_ANGLES = (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8)

# ---------------------------------------------------------------- CHSH


def analyser_direction(alpha: float) -> np.ndarray:
    return np.array([math.sin(2 * alpha), 0.0, math.cos(2 * alpha)])


def spin_half(direction) -> np.ndarray:
    """``(1/2) sigma . n`` for a unit 3-vector."""
    n = np.asarray(direction, dtype=float)
    return 0.5 * tau(n / np.linalg.norm(n))


def singlet() -> np.ndarray:
    return np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)


def pair_observables(dir_a, dir_b) -> tuple[np.ndarray, np.ndarray]:
    """``A = S_a (x) I`` and ``B = I (x) S_b`` on the two-particle space."""
    eye = np.eye(2)
    return np.kron(spin_half(dir_a), eye), np.kron(eye, spin_half(dir_b))


def correlation_exact(dir_a, dir_b) -> float:
    """Singlet expectation of ``A B`` computed from the matrices."""
    a, b = pair_observables(dir_a, dir_b)
    psi = singlet()
    return float(np.real(np.conj(psi) @ a @ b @ psi))


def angle_between(dir_a, dir_b) -> float:
    u = np.asarray(dir_a, dtype=float)
    v = np.asarray(dir_b, dtype=float)
    c = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.acos(max(-1.0, min(1.0, c)))


def chsh_combination(e_ab, e_abp, e_apb, e_apbp) -> float:
    return abs(e_ab - e_abp) + abs(e_apb + e_apbp)


@dataclass(frozen=True)
class CHSHConfig:
    a: float = CHSH_ANGLES[0]
    b: float = CHSH_ANGLES[1]
    a_prime: float = CHSH_ANGLES[2]
    b_prime: float = CHSH_ANGLES[3]
    trials: int = 10**6
    seed: int = 0

    def __post_init__(self):
        if int(self.trials) < 1:
            raise ValidationError("trials must be >= 1")

    def settings(self):
        return (("ab", self.a, self.b), ("ab'", self.a, self.b_prime),
                ("a'b", self.a_prime, self.b), ("a'b'", self.a_prime, self.b_prime))


@dataclass
class SettingResult:
    setting: str
    context_id: str
    theta: float
    e_exact: float
    e_hat: float
    stderr: float
    n: int


@dataclass
class CHSHReport:
    settings: list
    i_hat: float
    i_stderr: float
    i_exact: float
    samples: dict = field(repr=False, default_factory=dict)
    contexts: dict = field(repr=False, default_factory=dict)

    @property
    def z_score(self) -> float:
        return (self.i_hat - self.i_exact) / self.i_stderr

    def to_json(self) -> dict:
        return {
            "settings": [{
                "setting": s.setting, "context_id": s.context_id, "theta": s.theta,
                "E_exact": s.e_exact, "E_hat": s.e_hat, "stderr": s.stderr, "n": s.n,
            } for s in self.settings],
            "I_hat": self.i_hat,
            "I_stderr": self.i_stderr,
            "I_exact": self.i_exact,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["setting", "theta", "E_exact", "E_hat", "stderr", "n"])
        for s in self.settings:
            w.writerow([s.setting, repr(s.theta), repr(s.e_exact), repr(s.e_hat), repr(s.stderr), s.n])
        return buf.getvalue()


def chsh_exact(a, b, a_prime, b_prime) -> float:
    e = [correlation_exact(analyser_direction(x), analyser_direction(y))
         for x, y in ((a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime))]
    return chsh_combination(*e)


def setting_context(alpha: float, beta: float) -> tuple[Context, np.ndarray]:
    """Joint context of ``A_alpha`` and ``B_beta`` and their product observable."""
    a, b = pair_observables(analyser_direction(alpha), analyser_direction(beta))
    ctx = joint_context([a, b], labels=[f"A({alpha!r})", f"B({beta!r})"])
    return ctx, a @ b


def chsh_run(cfg: CHSHConfig, workers: int = 1) -> CHSHReport:
    """Estimate the four correlations from four disjoint samples, one per device.

    The preparation is the singlet. Each setting's sample is drawn with its
    own context (and therefore its own random stream); no statistic ever
    combines outcomes from different samples, only their means.
    """
    prep, _ = prepare_vector(singlet())
    results, samples, contexts = [], {}, {}
    for name, alpha, beta in cfg.settings():
        ctx, ab = setting_context(alpha, beta)
        s = sample(MeasurementConfig(prep, ctx, int(cfg.trials), int(cfg.seed)), workers=workers)
        da, db = analyser_direction(alpha), analyser_direction(beta)
        results.append(SettingResult(
            name, ctx.id, angle_between(da, db), correlation_exact(da, db),
            empirical_mean(s, ab, ctx), empirical_stderr(s, ab, ctx), int(cfg.trials)))
        samples[name] = s
        contexts[name] = ctx
    e_hat = [r.e_hat for r in results]
    i_hat = chsh_combination(*e_hat)
    i_se = math.sqrt(sum(r.stderr ** 2 for r in results))
    i_exact = chsh_combination(*[r.e_exact for r in results])
    return CHSHReport(results, i_hat, i_se, i_exact, samples, contexts)


# ------------------------------------------------------ noncontextual baseline


def _hidden_directions(seed: int, trials: int) -> np.ndarray:
    """Uniform unit vectors on the sphere from two counter-based streams."""
    z = 2.0 * rng.uniforms(seed, "lambda/z", 0, trials) - 1.0
    phi = 2.0 * math.pi * rng.uniforms(seed, "lambda/phi", 0, trials)
    s = np.sqrt(1.0 - z * z)
    return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])


def sign_model(lams: np.ndarray, alpha: float, side: str) -> np.ndarray:
    """Deterministic +-1/2 outcome: sign of the hidden direction along the analyser.

    The B side is anticorrelated so that equal settings give -1/4.
    """
    proj = lams @ analyser_direction(alpha)
    out = np.where(proj >= 0.0, 0.5, -0.5)
    return out if side == "A" else -out


@dataclass
class ClassicalReport:
    model: str
    trials: int
    seed: int
    correlations: dict
    i_hat: float
    i_stderr: float
    bound: float
    dichotomy_ok: bool
    pointwise_ok: bool

    @property
    def within_bound(self) -> bool:
        return self.i_hat <= self.bound + 3.0 * self.i_stderr

    def to_json(self) -> dict:
        return {"model": self.model, "trials": self.trials, "seed": self.seed,
                "correlations": self.correlations, "I_hat": self.i_hat,
                "I_stderr": self.i_stderr, "bound": self.bound,
                "within_bound": self.within_bound, "dichotomy_ok": self.dichotomy_ok,
                "pointwise_ok": self.pointwise_ok}


def check_dichotomy(b1: np.ndarray, b2: np.ndarray) -> bool:
    """Per hidden state, one of |B_b - B_b'|, |B_b + B_b'| is 0 and the other 1."""
    d = np.abs(b1 - b2)
    s = np.abs(b1 + b2)
    return bool(np.all(((d == 0.0) & (s == 1.0)) | ((d == 1.0) & (s == 0.0)))
                and np.all(0.5 * (d + s) == 0.5))


def classical_chsh_baseline(seed: int = 0, trials: int = 10**6, model: str = "sign",
                            cfg: CHSHConfig | None = None,
                            constant=(0.5, 0.5, -0.5, 0.5)) -> ClassicalReport:
    """CHSH in one shared probability space of noncontextual outcome assignments.

    ``model="sign"`` draws a hidden direction per trial and answers with the
    sign of its projection on each analyser. ``model="constant"`` uses the
    fixed outcomes ``constant = (A_a, A_a', B_b, B_b')`` for every trial.
    All four correlations are averages over the same trials.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    cfg = cfg or CHSHConfig()
    if model == "sign":
        lams = _hidden_directions(seed, trials)
        aa, aap = sign_model(lams, cfg.a, "A"), sign_model(lams, cfg.a_prime, "A")
        bb, bbp = sign_model(lams, cfg.b, "B"), sign_model(lams, cfg.b_prime, "B")
    elif model == "constant":
        if any(abs(v) != 0.5 for v in constant):
            raise ValidationError("constant outcomes must be +-1/2")
        aa, aap, bb, bbp = (np.full(trials, float(v)) for v in constant)
    else:
        raise ValidationError(f"unknown model {model!r}")
    # Sums of +-1/4 products are exact in double precision for trials < 2**50.
    x = aa * (bb - bbp)
    y = aap * (bb + bbp)
    sx, sy = float(np.sum(x)), float(np.sum(y))
    i_hat = (abs(sx) + abs(sy)) / trials
    v = math.copysign(1.0, sx) * x + math.copysign(1.0, sy) * y
    i_se = float(np.std(v, ddof=1) / math.sqrt(trials)) if trials > 1 else float("inf")
    corr = {"ab": float(np.mean(aa * bb)), "ab'": float(np.mean(aa * bbp)),
            "a'b": float(np.mean(aap * bb)), "a'b'": float(np.mean(aap * bbp))}
    pointwise = bool(np.all(np.abs(aa) * np.abs(bb - bbp) + np.abs(aap) * np.abs(bb + bbp) == 0.5))
    return ClassicalReport(model, trials, seed, corr, i_hat, i_se, 0.5,
                           check_dichotomy(bb, bbp), pointwise)


# ------------------------------------------------------------ Kochen-Specker


@dataclass(frozen=True, eq=False)
class KSInstance:
    rays: tuple
    contexts: tuple

    def __post_init__(self):
        rays = []
        for r in self.rays:
            v = np.asarray(r, dtype=complex)
            nrm = np.linalg.norm(v)
            if nrm == 0:
                raise InvalidInstance("zero ray")
            rays.append(v / nrm)
        dims = {v.size for v in rays}
        if len(dims) != 1:
            raise InvalidInstance("rays of different dimensions")
        dim = dims.pop()
        ctxs = tuple(tuple(int(i) for i in c) for c in self.contexts)
        for c in ctxs:
            if len(c) != dim or len(set(c)) != dim:
                raise InvalidInstance(f"context {c} does not have {dim} distinct rays")
            if any(not 0 <= i < len(rays) for i in c):
                raise InvalidInstance(f"context {c} references a missing ray")
            for p in range(dim):
                for q in range(p + 1, dim):
                    if abs(np.vdot(rays[c[p]], rays[c[q]])) > 1e-10:
                        raise InvalidInstance(f"rays {c[p]} and {c[q]} in context {c} are not orthogonal")
        object.__setattr__(self, "rays", tuple(rays))
        object.__setattr__(self, "contexts", ctxs)

    @property
    def dim(self) -> int:
        return self.rays[0].size

    def to_json(self) -> dict:
        return {"rays": [[[float(x.real), float(x.imag)] for x in r] for r in self.rays],
                "contexts": [list(c) for c in self.contexts]}

    @classmethod
    def from_json(cls, obj: dict) -> "KSInstance":
        rays = []
        for r in obj["rays"]:
            rays.append([complex(x[0], x[1]) if isinstance(x, (list, tuple)) else complex(x) for x in r])
        return cls(tuple(rays), tuple(tuple(c) for c in obj["contexts"]))

    def projector_contexts(self) -> list[Context]:
        return [make_context(np.column_stack([self.rays[i] for i in c])) for c in self.contexts]


# Nine orthogonal bases of R^4 over 18 rays; each ray lies in exactly two bases,
# so a {0,1} colouring would need an odd number (9) to equal an even count.
_KS18_BASES = (
    ("0001", "0010", "1100", "1-100"),
    ("0001", "0100", "1010", "10-10"),
    ("1-11-1", "1-1-11", "1100", "0011"),
    ("1-11-1", "1111", "10-10", "010-1"),
    ("0010", "0100", "1001", "100-1"),
    ("1-1-11", "1111", "100-1", "01-10"),
    ("11-11", "111-1", "1-100", "0011"),
    ("11-11", "-1111", "1010", "010-1"),
    ("111-1", "-1111", "1001", "01-10"),
)


def _parse_ray(s: str) -> tuple[int, ...]:
    out, i = [], 0
    while i < len(s):
        if s[i] == "-":
            out.append(-int(s[i + 1]))
            i += 2
        else:
            out.append(int(s[i]))
            i += 1
    return tuple(out)


def ks_18ray() -> KSInstance:
    """The 18-ray, 9-basis Kochen-Specker set in four dimensions."""
    labels = sorted({r for basis in _KS18_BASES for r in basis})
    index = {lbl: i for i, lbl in enumerate(labels)}
    rays = tuple(_parse_ray(lbl) for lbl in labels)
    return KSInstance(rays, tuple(tuple(index[r] for r in basis) for basis in _KS18_BASES))


def spin1_triad_instance(frames) -> KSInstance:
    """Instance whose contexts are orthonormal frames (rows of 3x3 matrices) in R^3."""
    rays, ctxs, seen = [], [], {}
    for frame in frames:
        f = np.asarray(frame, dtype=float)
        idx = []
        for v in f:
            v = v / np.linalg.norm(v)
            v = v if v[np.argmax(np.abs(v) > 1e-12)] > 0 else -v
            key = tuple(np.round(v, 9))
            if key not in seen:
                seen[key] = len(rays)
                rays.append(v)
            idx.append(seen[key])
        ctxs.append(tuple(idx))
    return KSInstance(tuple(rays), tuple(ctxs))


@dataclass
class KSResult:
    colorable: bool
    witness: tuple | None
    nodes: int
    solutions: int | None = None

    @property
    def verdict(self) -> str:
        return "colorable" if self.colorable else "UNSAT"

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "colorable": self.colorable,
                "witness": list(self.witness) if self.witness is not None else None,
                "nodes": self.nodes, "solutions": self.solutions}


def ks_check(instance: KSInstance, count_all: bool = False) -> KSResult:
    """Exhaustive search for a {0,1} ray colouring with exactly one 1 per context.

    Backtracking branches on which ray of an uncovered context gets the 1;
    choosing a ray forces every other ray in all of its contexts to 0. The
    next context branched on is the one with the fewest open rays.
    ``nodes`` counts search nodes visited. With ``count_all`` every colouring
    is enumerated.
    """
    n = len(instance.rays)
    ctxs = instance.contexts
    member = [[] for _ in range(n)]
    for ci, c in enumerate(ctxs):
        for r in c:
            member[r].append(ci)
    value = [None] * n
    nodes = 0
    found = []

    def search():
        nonlocal nodes
        nodes += 1
        best, best_open = None, None
        for ci, c in enumerate(ctxs):
            if any(value[r] == 1 for r in c):
                continue
            open_rays = [r for r in c if value[r] is None]
            if not open_rays:
                return False
            if best is None or len(open_rays) < len(best_open):
                best, best_open = ci, open_rays
        if best is None:
            found.append(tuple(0 if v is None else v for v in value))
            return not count_all
        for r in best_open:
            forced = [q for ci in member[r] for q in ctxs[ci] if q != r and value[q] is None]
            if any(value[q] == 1 for ci in member[r] for q in ctxs[ci] if q != r):
                continue
            value[r] = 1
            for q in forced:
                value[q] = 0
            done = search()
            value[r] = None
            for q in forced:
                value[q] = None
            if done:
                return True
            # r is 0 in the remaining branches of this context
            value[r] = 0
        for r in best_open:
            value[r] = None
        return False

    search()
    # Rays left unassigned in a full colouring lie in no context.
    witness = found[0] if found else None
    return KSResult(bool(found), witness, nodes, len(found) if count_all else None)


def verify_coloring(instance: KSInstance, coloring) -> bool:
    return all(sum(coloring[r] for r in c) == 1 for c in instance.contexts)


# ------------------------------------------------------------ Pauli example


def bloch_decomposition(a) -> tuple[float, float, np.ndarray]:
    """``A = r0 I + r tau(n)`` for a Hermitian 2x2 ``A = [[a, b], [b*, d]]``.

    ``r0 = (a + d)/2``, ``r = sqrt((a - d)^2/4 + |b|^2)``,
    ``n = (Re b, -Im b, (a - d)/2) / r``; ``n`` is taken as the z axis when r = 0.
    """
    m = make_observable(a).matrix
    if m.shape != (2, 2):
        raise ValidationError("Pauli decomposition needs a 2x2 observable")
    aa, dd, b = m[0, 0].real, m[1, 1].real, m[0, 1]
    r0 = 0.5 * (aa + dd)
    r = math.sqrt(0.25 * (aa - dd) ** 2 + abs(b) ** 2)
    if r == 0:
        return r0, 0.0, np.array([0.0, 0.0, 1.0])
    n = np.array([b.real, -b.imag, 0.5 * (aa - dd)]) / r
    return r0, r, n


@dataclass
class PauliReport:
    matrix: np.ndarray = field(repr=False)
    r0: float = 0.0
    r: float = 0.0
    n: np.ndarray = field(default=None, repr=False)
    reconstruction_error: float = 0.0
    phi_values: dict = field(default_factory=dict)
    phi_errors: dict = field(default_factory=dict)
    antisymmetry_ok: bool = True
    time_average_error: float = 0.0
    psi0: float = 0.0
    psi0_error: float = 0.0
    ergodic_gap: float = 0.0

    def to_json(self) -> dict:
        return {"r0": self.r0, "r": self.r, "n": [float(x) for x in self.n],
                "reconstruction_error": self.reconstruction_error,
                "phi_values": {str(k): v for k, v in self.phi_values.items()},
                "phi_errors": {str(k): v for k, v in self.phi_errors.items()},
                "antisymmetry_ok": self.antisymmetry_ok,
                "time_average_error": self.time_average_error,
                "psi0": self.psi0, "psi0_error": self.psi0_error,
                "ergodic_gap": self.ergodic_gap}


def sign_branch_outcome(ctx: Context, n, sign: int) -> int:
    """Outcome index in ``ctx`` at which ``tau(n)`` takes the value ``sign``."""
    vals = np.real(np.einsum("ik,ij,jk->k", np.conj(ctx.basis), tau(n), ctx.basis))
    return int(np.argmin(np.abs(vals - sign)))


def pauli_walkthrough(a=None, e0: float = 1.0) -> PauliReport:
    """Two-level example: decomposition, both valuation branches, time average, ground state.

    With ``H = diag(E0, -E0)`` the ground functional is ``A -> d`` and the
    time average is ``diag(a, d)``; the ground valuation (``f(z) = -1``)
    gives ``phi_0(time average) = d``.
    """
    if a is None:
        a = np.array([[2.0, 1.0], [1.0, 0.0]])
    obs = make_observable(a)
    m = obs.matrix
    r0, r, n = bloch_decomposition(obs)
    rep = PauliReport(np.array(m), r0, r, n)
    rep.reconstruction_error = float(np.max(np.abs(r0 * np.eye(2) + r * tau(n) - m)))

    ctx = joint_context([tau(n)])
    anti = True
    for f in (+1, -1):
        k = sign_branch_outcome(ctx, n, f)
        phi = PhysicalState({ctx.id: k}, 2)
        val = evaluate(phi, m, ctx)
        rep.phi_values[f] = val
        rep.phi_errors[f] = abs(val - (r0 + r * f))
        anti &= evaluate(phi, tau(-n), ctx) == -evaluate(phi, tau(n), ctx)
    rep.antisymmetry_ok = bool(anti)

    h = Hamiltonian.from_matrix(np.diag([e0, -e0]))
    abar = time_average(obs, h).matrix
    rep.time_average_error = float(np.max(np.abs(abar - np.diag(np.diag(m)))))
    rep.psi0 = ground_functional(h)(m).real
    rep.psi0_error = abs(rep.psi0 - m[1, 1].real)
    z_ctx = joint_context([pauli()[2]])
    phi0 = PhysicalState({z_ctx.id: sign_branch_outcome(z_ctx, [0, 0, 1], -1)}, 2)
    rep.ergodic_gap = ergodicity_check(h, obs, phi0, z_ctx).gap
    return rep


def spin1_squares(direction) -> np.ndarray:
    """``S_n^2 = I - n n^T`` for spin 1 in the Cartesian basis."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    return np.eye(3) - np.outer(n, n)


def spin1_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-1 generators in the Cartesian basis, ``(S_k)_ij = -i eps_kij``."""
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k], eps[i, k, j] = 1.0, -1.0
    return tuple(-1j * eps[k] for k in range(3))

